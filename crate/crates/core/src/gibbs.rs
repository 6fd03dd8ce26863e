//! Collapsed Gibbs sampling for LDA.
//!
//! The topic of token `i` (word `v` in document `m`) is resampled from
//!
//! ```text
//! p(z_i = k | z_-i) ∝ (n_mk + α) (n_kv + β) / (n_k + Vβ)
//! ```
//!
//! with all counts excluding token `i`. After burn-in, every `thin`-th sweep
//! contributes the smoothed estimates `(n_kv + β) / (n_k + Vβ)` and
//! `(n_mk + α) / (N_m + Kα)`; the fit reports their running mean.

use std::time::Instant;

use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{Algorithm, FitConfig, FitResult};
use crate::rng::seeded_rng;
use crate::types::{Assignments, Corpus, DirichletHyperparams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GibbsEstimator {
    /// Mean over thinned post-burn-in sweeps.
    ThinnedMean,
    /// Estimate from the last sweep only.
    FinalState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsConfig {
    pub iterations: usize,
    pub burn_in_fraction: f64,
    pub thin: usize,
    pub hyper: DirichletHyperparams,
    #[serde(rename = "K")]
    pub k: usize,
    pub seed: u64,
    pub estimator: GibbsEstimator,
}

impl GibbsConfig {
    pub const DEFAULT_ITERATIONS: usize = 5000;
    pub const FAST_ITERATIONS: usize = 2500;

    pub fn new(k: usize, hyper: DirichletHyperparams, seed: u64) -> Self {
        Self {
            iterations: Self::DEFAULT_ITERATIONS,
            burn_in_fraction: 0.8,
            thin: 10,
            hyper,
            k,
            seed,
            estimator: GibbsEstimator::ThinnedMean,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.hyper.validate()?;
        if self.k < 1 {
            return Err(Error::Config("K must be at least 1".into()));
        }
        if self.iterations < 1 || self.thin < 1 {
            return Err(Error::Config(
                "iterations and thin must be at least 1".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.burn_in_fraction) {
            return Err(Error::Config(format!(
                "burn_in_fraction = {} must lie in [0, 1)",
                self.burn_in_fraction
            )));
        }
        if self.estimator == GibbsEstimator::ThinnedMean
            && self.iterations - self.burn_in() < self.thin
        {
            return Err(Error::Config(format!(
                "{} iterations with burn-in {} retain no sample at thin {}",
                self.iterations, self.burn_in_fraction, self.thin
            )));
        }
        Ok(())
    }

    pub fn burn_in(&self) -> usize {
        (self.iterations as f64 * self.burn_in_fraction).floor() as usize
    }

    /// Whether sweep `t` (1-based) contributes to the estimate.
    pub fn is_retained(&self, t: usize) -> bool {
        match self.estimator {
            GibbsEstimator::FinalState => t == self.iterations,
            GibbsEstimator::ThinnedMean => {
                let burn = self.burn_in();
                t > burn && (t - burn).is_multiple_of(self.thin)
            }
        }
    }
}

/// Normalized collapsed conditional from counts that already exclude the
/// current token. `word_topic[k]` is the count of the token's word in topic `k`.
pub fn collapsed_conditional(
    doc_topic: &[u32],
    word_topic: &[u32],
    topic: &[u64],
    hyper: &DirichletHyperparams,
    vocab_size: usize,
) -> Vec<f64> {
    let vbeta = vocab_size as f64 * hyper.beta;
    let mut p: Vec<f64> = doc_topic
        .iter()
        .zip(word_topic)
        .zip(topic)
        .map(|((&nd, &nw), &nt)| {
            (nd as f64 + hyper.alpha) * (nw as f64 + hyper.beta) / (nt as f64 + vbeta)
        })
        .collect();
    let total: f64 = p.iter().sum();
    for x in &mut p {
        *x /= total;
    }
    p
}

/// Full conditional of token `n` of document `m` (word `word`), with the
/// token's own assignment removed from the counts.
pub fn conditional_distribution(
    assignments: &Assignments,
    m: usize,
    n: usize,
    word: usize,
    hyper: &DirichletHyperparams,
    k: usize,
    vocab_size: usize,
) -> Result<Vec<f64>> {
    if assignments.num_topics() != k || assignments.count_topic_word.ncols() != vocab_size {
        return Err(Error::Input(
            "assignment tables do not match K and V".into(),
        ));
    }
    let current = *assignments
        .z
        .get(m)
        .and_then(|d| d.get(n))
        .ok_or_else(|| Error::Input(format!("no token ({m}, {n})")))?;
    if word >= vocab_size {
        return Err(Error::Input(format!("word {word} outside vocabulary")));
    }
    let exclude = |count: u64, t: usize| -> Result<u64> {
        if t == current {
            count.checked_sub(1).ok_or_else(|| {
                Error::Internal(format!(
                    "excluding token ({m}, {n}) drives a count of topic {t} negative"
                ))
            })
        } else {
            Ok(count)
        }
    };
    let mut doc_topic = Vec::with_capacity(k);
    let mut word_topic = Vec::with_capacity(k);
    let mut topic = Vec::with_capacity(k);
    for t in 0..k {
        doc_topic.push(exclude(assignments.count_doc_topic[[m, t]] as u64, t)? as u32);
        word_topic.push(exclude(assignments.count_topic_word[[t, word]] as u64, t)? as u32);
        topic.push(exclude(assignments.count_topic[t], t)?);
    }
    Ok(collapsed_conditional(
        &doc_topic,
        &word_topic,
        &topic,
        hyper,
        vocab_size,
    ))
}

/// One collapsed Gibbs chain over a corpus.
pub struct GibbsSampler<'c> {
    docs: &'c [Vec<usize>],
    k: usize,
    v: usize,
    hyper: DirichletHyperparams,
    z: Vec<Vec<usize>>,
    /// `M x K`, row-major.
    doc_topic: Vec<u32>,
    /// `V x K`, row-major (word-major for the inner loop).
    word_topic: Vec<u32>,
    topic: Vec<u64>,
    inv_topic: Vec<f64>,
    weights: Vec<f64>,
    rng: ChaCha8Rng,
}

impl<'c> GibbsSampler<'c> {
    /// Starts a chain with topics drawn uniformly at random per token.
    pub fn new(corpus: &'c Corpus, k: usize, hyper: DirichletHyperparams, seed: u64) -> Self {
        let mut rng = seeded_rng(seed, 0);
        let z = corpus
            .docs
            .iter()
            .map(|d| d.iter().map(|_| rng.random_range(0..k)).collect())
            .collect();
        Self::with_assignments(corpus, k, hyper, z, rng)
    }

    fn with_assignments(
        corpus: &'c Corpus,
        k: usize,
        hyper: DirichletHyperparams,
        z: Vec<Vec<usize>>,
        rng: ChaCha8Rng,
    ) -> Self {
        let v = corpus.vocab_size();
        let mut doc_topic = vec![0u32; corpus.num_docs() * k];
        let mut word_topic = vec![0u32; v * k];
        let mut topic = vec![0u64; k];
        for (m, (doc, labels)) in corpus.docs.iter().zip(&z).enumerate() {
            for (&w, &t) in doc.iter().zip(labels) {
                doc_topic[m * k + t] += 1;
                word_topic[w * k + t] += 1;
                topic[t] += 1;
            }
        }
        let vbeta = v as f64 * hyper.beta;
        let inv_topic = topic.iter().map(|&n| 1.0 / (n as f64 + vbeta)).collect();
        Self {
            docs: &corpus.docs,
            k,
            v,
            hyper,
            z,
            doc_topic,
            word_topic,
            topic,
            inv_topic,
            weights: vec![0.0; k],
            rng,
        }
    }

    /// One pass over every token, documents in order, positions in order.
    pub fn sweep(&mut self) {
        let k = self.k;
        let (alpha, beta) = (self.hyper.alpha, self.hyper.beta);
        let vbeta = self.v as f64 * beta;
        for (m, doc) in self.docs.iter().enumerate() {
            let labels = &mut self.z[m];
            let dt = &mut self.doc_topic[m * k..(m + 1) * k];
            for (n, &w) in doc.iter().enumerate() {
                let old = labels[n];
                let wt = &mut self.word_topic[w * k..(w + 1) * k];
                dt[old] -= 1;
                wt[old] -= 1;
                self.topic[old] -= 1;
                self.inv_topic[old] = 1.0 / (self.topic[old] as f64 + vbeta);

                let mut total = 0.0;
                for t in 0..k {
                    total += (dt[t] as f64 + alpha) * (wt[t] as f64 + beta) * self.inv_topic[t];
                    self.weights[t] = total;
                }
                let u = self.rng.random::<f64>() * total;
                let new = self.weights.partition_point(|&c| c <= u).min(k - 1);

                labels[n] = new;
                dt[new] += 1;
                wt[new] += 1;
                self.topic[new] += 1;
                self.inv_topic[new] = 1.0 / (self.topic[new] as f64 + vbeta);
            }
        }
    }

    /// Current labels with freshly laid out count tables.
    pub fn assignments(&self) -> Assignments {
        let (m_docs, k, v) = (self.docs.len(), self.k, self.v);
        let count_doc_topic = Array2::from_shape_vec((m_docs, k), self.doc_topic.clone())
            .expect("doc-topic table shape");
        let count_topic_word = Array2::from_shape_fn((k, v), |(t, w)| self.word_topic[w * k + t]);
        Assignments {
            z: self.z.clone(),
            count_doc_topic,
            count_topic_word,
            count_topic: self.topic.clone(),
        }
    }

    /// Smoothed topic-word estimate of the current state.
    pub fn phi_estimate(&self) -> Array2<f64> {
        let (k, v, beta) = (self.k, self.v, self.hyper.beta);
        let vbeta = v as f64 * beta;
        Array2::from_shape_fn((k, v), |(t, w)| {
            (self.word_topic[w * k + t] as f64 + beta) / (self.topic[t] as f64 + vbeta)
        })
    }

    /// Smoothed document-topic estimate of the current state.
    pub fn theta_estimate(&self) -> Array2<f64> {
        let (k, alpha) = (self.k, self.hyper.alpha);
        let kalpha = k as f64 * alpha;
        Array2::from_shape_fn((self.docs.len(), k), |(m, t)| {
            (self.doc_topic[m * k + t] as f64 + alpha) / (self.docs[m].len() as f64 + kalpha)
        })
    }
}

/// Running arithmetic mean that stays bit-exact when every sample is equal.
struct RunningMean {
    mean: Option<Array2<f64>>,
    count: usize,
}

impl RunningMean {
    fn new() -> Self {
        Self {
            mean: None,
            count: 0,
        }
    }

    fn push(&mut self, sample: Array2<f64>) {
        self.count += 1;
        match &mut self.mean {
            None => self.mean = Some(sample),
            Some(mean) => {
                let s = self.count as f64;
                mean.zip_mut_with(&sample, |m, &x| *m += (x - *m) / s);
            }
        }
    }
}

/// Fits LDA by collapsed Gibbs sampling.
pub fn gibbs_fit(corpus: &Corpus, config: &GibbsConfig) -> Result<FitResult> {
    config.validate()?;
    if corpus.is_empty() || corpus.total_tokens() == 0 {
        return Err(Error::Input("cannot fit an empty corpus".into()));
    }
    let start = Instant::now();
    let mut sampler = GibbsSampler::new(corpus, config.k, config.hyper, config.seed);
    let mut phi = RunningMean::new();
    let mut theta = RunningMean::new();
    for t in 1..=config.iterations {
        sampler.sweep();
        if config.is_retained(t) {
            phi.push(sampler.phi_estimate());
            theta.push(sampler.theta_estimate());
        }
    }
    Ok(FitResult {
        algorithm: Algorithm::Gibbs,
        phi_hat: phi.mean.expect("at least one retained sweep"),
        theta_hat: theta.mean.expect("at least one retained sweep"),
        iterations: config.iterations,
        seed: config.seed,
        wall_clock_seconds: Some(start.elapsed().as_secs_f64()),
        config: FitConfig::Gibbs(config.clone()),
        elbo_trace: None,
    })
}
