//! Batch mean-field variational Bayes for smoothed LDA.
//!
//! Per document, responsibilities and the document Dirichlet `gamma` are
//! iterated to local convergence:
//!
//! ```text
//! r_wk ∝ exp(ψ(γ_mk) − ψ(Σ_j γ_mj) + ψ(λ_kw) − ψ(Σ_v λ_kv))
//! γ_mk = α + Σ_w c_mw r_wk
//! ```
//!
//! then the topic Dirichlets are refit from all responsibilities,
//! `λ_kv = β + Σ_m c_mv r_vk`. Documents are handled as word counts; equal
//! tokens share one responsibility vector.

use std::time::Instant;

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{Algorithm, FitConfig, FitResult};
use crate::rng::seeded_rng;
use crate::special::{digamma, ln_gamma};
use crate::types::{Corpus, DirichletHyperparams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VbConfig {
    pub epochs: usize,
    pub inner_doc_iters: usize,
    /// Mean absolute change in `gamma` below which a document's inner loop stops.
    pub doc_convergence_tol: f64,
    /// Relative ELBO improvement below which the epoch loop stops.
    pub elbo_tol: f64,
    /// Upper bound of the uniform noise added to `beta` when seeding `lambda`.
    pub init_noise: f64,
    pub hyper: DirichletHyperparams,
    #[serde(rename = "K")]
    pub k: usize,
    pub seed: u64,
}

impl VbConfig {
    pub const DEFAULT_EPOCHS: usize = 150;

    pub fn new(k: usize, hyper: DirichletHyperparams, seed: u64) -> Self {
        Self {
            epochs: Self::DEFAULT_EPOCHS,
            inner_doc_iters: 50,
            doc_convergence_tol: 1e-6,
            elbo_tol: 1e-6,
            init_noise: 1.0,
            hyper,
            k,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.hyper.validate()?;
        if self.k < 1 {
            return Err(Error::Config("K must be at least 1".into()));
        }
        if self.epochs < 1 || self.inner_doc_iters < 1 {
            return Err(Error::Config(
                "epochs and inner_doc_iters must be at least 1".into(),
            ));
        }
        if !(self.doc_convergence_tol >= 0.0 && self.elbo_tol >= 0.0 && self.init_noise >= 0.0) {
            return Err(Error::Config(
                "tolerances and init_noise must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Variational parameters and the ELBO after each epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationalState {
    /// `K x V` topic Dirichlet parameters.
    pub lambda: Array2<f64>,
    /// `M x K` document Dirichlet parameters.
    pub gamma: Array2<f64>,
    pub elbo_trace: Vec<f64>,
}

impl VariationalState {
    /// Row means of `lambda`.
    pub fn phi_hat(&self) -> Array2<f64> {
        row_normalized(&self.lambda)
    }

    /// Row means of `gamma`.
    pub fn theta_hat(&self) -> Array2<f64> {
        row_normalized(&self.gamma)
    }
}

fn row_normalized(m: &Array2<f64>) -> Array2<f64> {
    let mut out = m.clone();
    for mut row in out.rows_mut() {
        let total: f64 = row.iter().sum();
        row.mapv_inplace(|x| x / total);
    }
    out
}

/// Word counts of one document, sorted by word.
fn bag_of_words(doc: &[usize]) -> Vec<(usize, f64)> {
    let mut words = doc.to_vec();
    words.sort_unstable();
    let mut bag: Vec<(usize, f64)> = Vec::new();
    for w in words {
        match bag.last_mut() {
            Some((last, c)) if *last == w => *c += 1.0,
            _ => bag.push((w, 1.0)),
        }
    }
    bag
}

/// `E[ln X]` under a Dirichlet with parameters `row`.
fn dirichlet_expected_log(row: &[f64], out: &mut [f64]) {
    let psi_total = digamma(row.iter().sum());
    for (o, &x) in out.iter_mut().zip(row) {
        *o = digamma(x) - psi_total;
    }
}

/// Fills `resp` with normalized responsibilities from log weights.
#[inline]
fn softmax_into(logits: impl Iterator<Item = f64> + Clone, resp: &mut [f64]) -> f64 {
    let max = logits.clone().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for (r, l) in resp.iter_mut().zip(logits) {
        *r = (l - max).exp();
        total += *r;
    }
    for r in resp.iter_mut() {
        *r /= total;
    }
    max + total.ln()
}

/// `-KL(q || p)` for `q = Dir(params)`, `p` symmetric `Dir(prior)`, given `E_q[ln x]`.
fn dirichlet_prior_terms(params: &[f64], elog: &[f64], prior: f64) -> f64 {
    let dim = params.len() as f64;
    let mut out = ln_gamma(dim * prior) - dim * ln_gamma(prior);
    out -= ln_gamma(params.iter().sum());
    for (&p, &e) in params.iter().zip(elog) {
        out += (prior - 1.0) * e + ln_gamma(p) - (p - 1.0) * e;
    }
    out
}

struct Workspace {
    k: usize,
    v: usize,
    /// `K x V` row-major `E[ln φ_kv]`.
    elog_beta: Vec<f64>,
    elog_theta: Vec<f64>,
    resp: Vec<f64>,
}

impl Workspace {
    fn new(k: usize, v: usize) -> Self {
        Self {
            k,
            v,
            elog_beta: vec![0.0; k * v],
            elog_theta: vec![0.0; k],
            resp: vec![0.0; k],
        }
    }

    fn refresh_beta(&mut self, lambda: &Array2<f64>) {
        for (t, row) in lambda.rows().into_iter().enumerate() {
            let row = row.as_slice().expect("standard layout");
            dirichlet_expected_log(row, &mut self.elog_beta[t * self.v..(t + 1) * self.v]);
        }
    }

    fn logits(&self, w: usize) -> impl Iterator<Item = f64> + Clone + '_ {
        let v = self.v;
        self.elog_theta
            .iter()
            .enumerate()
            .map(move |(t, &e)| e + self.elog_beta[t * v + w])
    }

    /// Computes responsibilities of word `w` under the current `elog_theta`.
    fn responsibilities(&mut self, w: usize) -> f64 {
        let mut resp = std::mem::take(&mut self.resp);
        let lse = softmax_into(self.logits(w), &mut resp);
        self.resp = resp;
        lse
    }
}

/// Evidence lower bound of `state` with responsibilities at their optimum
/// for the given `gamma` and `lambda`.
pub fn compute_elbo(
    corpus: &Corpus,
    state: &VariationalState,
    hyper: &DirichletHyperparams,
) -> Result<f64> {
    let (k, v) = state.lambda.dim();
    if v != corpus.vocab_size() {
        return Err(Error::Input(format!(
            "lambda has {v} columns, vocabulary has {}",
            corpus.vocab_size()
        )));
    }
    if state.gamma.dim() != (corpus.num_docs(), k) {
        return Err(Error::Input(format!(
            "gamma is {:?}, expected ({}, {k})",
            state.gamma.dim(),
            corpus.num_docs()
        )));
    }
    let mut ws = Workspace::new(k, v);
    ws.refresh_beta(&state.lambda);
    Ok(elbo_with(corpus, state, hyper, &mut ws))
}

fn elbo_with(
    corpus: &Corpus,
    state: &VariationalState,
    hyper: &DirichletHyperparams,
    ws: &mut Workspace,
) -> f64 {
    let mut total = 0.0;
    for (m, doc) in corpus.docs.iter().enumerate() {
        let gamma = state.gamma.row(m);
        let gamma = gamma.as_slice().expect("standard layout");
        let mut elog_theta = std::mem::take(&mut ws.elog_theta);
        dirichlet_expected_log(gamma, &mut elog_theta);
        ws.elog_theta = elog_theta;
        for (w, c) in bag_of_words(doc) {
            total += c * ws.responsibilities(w);
        }
        total += dirichlet_prior_terms(gamma, &ws.elog_theta, hyper.alpha);
    }
    for t in 0..ws.k {
        let lambda = state.lambda.row(t);
        let lambda = lambda.as_slice().expect("standard layout");
        total += dirichlet_prior_terms(lambda, &ws.elog_beta[t * ws.v..(t + 1) * ws.v], hyper.beta);
    }
    total
}

/// Runs batch VB and returns the final variational state.
pub fn vb_run(corpus: &Corpus, config: &VbConfig) -> Result<VariationalState> {
    config.validate()?;
    if corpus.is_empty() || corpus.total_tokens() == 0 {
        return Err(Error::Input("cannot fit an empty corpus".into()));
    }
    let (k, v) = (config.k, corpus.vocab_size());
    let (alpha, beta) = (config.hyper.alpha, config.hyper.beta);
    let mut rng = seeded_rng(config.seed, 0);
    let mut state = VariationalState {
        lambda: Array2::from_shape_fn((k, v), |_| beta + config.init_noise * rng.random::<f64>()),
        gamma: Array2::from_shape_fn((corpus.num_docs(), k), |(m, _)| {
            alpha + corpus.docs[m].len() as f64 / k as f64
        }),
        elbo_trace: Vec::with_capacity(config.epochs),
    };
    let bags: Vec<Vec<(usize, f64)>> = corpus.docs.iter().map(|d| bag_of_words(d)).collect();
    let mut ws = Workspace::new(k, v);
    let mut sstats = vec![0.0; k * v];
    let mut new_gamma = vec![0.0; k];

    for _ in 0..config.epochs {
        ws.refresh_beta(&state.lambda);
        sstats.iter_mut().for_each(|x| *x = 0.0);
        for (m, bag) in bags.iter().enumerate() {
            let mut gamma = state.gamma.row_mut(m);
            let gamma = gamma.as_slice_mut().expect("standard layout");
            for _ in 0..config.inner_doc_iters {
                dirichlet_expected_log(gamma, &mut ws.elog_theta);
                new_gamma.iter_mut().for_each(|x| *x = 0.0);
                for &(w, c) in bag {
                    ws.responsibilities(w);
                    for (g, &r) in new_gamma.iter_mut().zip(&ws.resp) {
                        *g += c * r;
                    }
                }
                let mut change = 0.0;
                for (g, &s) in gamma.iter_mut().zip(&new_gamma) {
                    let updated = alpha + s;
                    change += (updated - *g).abs();
                    *g = updated;
                }
                if change / (k as f64) < config.doc_convergence_tol {
                    break;
                }
            }
            dirichlet_expected_log(gamma, &mut ws.elog_theta);
            for &(w, c) in bag {
                ws.responsibilities(w);
                for (t, &r) in ws.resp.iter().enumerate() {
                    sstats[t * v + w] += c * r;
                }
            }
        }
        for ((t, w), l) in state.lambda.indexed_iter_mut() {
            *l = beta + sstats[t * v + w];
        }
        ws.refresh_beta(&state.lambda);
        let elbo = elbo_with(corpus, &state, &config.hyper, &mut ws);
        let previous = state.elbo_trace.last().copied();
        state.elbo_trace.push(elbo);
        if let Some(prev) = previous {
            if (elbo - prev) / prev.abs() < config.elbo_tol {
                break;
            }
        }
    }
    Ok(state)
}

/// Fits LDA by batch variational Bayes.
pub fn vb_fit(corpus: &Corpus, config: &VbConfig) -> Result<FitResult> {
    let start = Instant::now();
    let state = vb_run(corpus, config)?;
    Ok(FitResult {
        algorithm: Algorithm::Vb,
        phi_hat: state.phi_hat(),
        theta_hat: state.theta_hat(),
        iterations: state.elbo_trace.len(),
        seed: config.seed,
        wall_clock_seconds: Some(start.elapsed().as_secs_f64()),
        config: FitConfig::Vb(config.clone()),
        elbo_trace: Some(state.elbo_trace),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::Preset;
    use crate::simgen::generate_corpus;

    fn corpus(preset: Preset, m: usize, seed: u64) -> Corpus {
        generate_corpus(&preset.generator(m, seed)).unwrap().0
    }

    #[test]
    fn bag_of_words_counts() {
        assert_eq!(bag_of_words(&[3, 1, 3, 3]), vec![(1, 1.0), (3, 3.0)]);
    }

    #[test]
    fn single_topic_is_closed_form_after_one_epoch() {
        let c = corpus(Preset::Smaller, 9, 1);
        let hyper = DirichletHyperparams::new(0.5, 0.5).unwrap();
        let mut cfg = VbConfig::new(1, hyper, 4);
        cfg.epochs = 1;
        let state = vb_run(&c, &cfg).unwrap();
        for (m, doc) in c.docs.iter().enumerate() {
            assert_eq!(state.gamma[[m, 0]], 0.5 + doc.len() as f64);
        }
        for (w, &n) in c.word_counts().iter().enumerate() {
            assert_eq!(state.lambda[[0, w]], 0.5 + n as f64);
        }
    }

    #[test]
    fn elbo_is_monotone_and_bounds_hold() {
        let c = corpus(Preset::Smaller, 20, 3);
        let hyper = DirichletHyperparams::new(0.5, 0.5).unwrap();
        let mut cfg = VbConfig::new(7, hyper, 2);
        cfg.epochs = 40;
        cfg.elbo_tol = 0.0;
        let state = vb_run(&c, &cfg).unwrap();
        for pair in state.elbo_trace.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-8 * pair[0].abs(), "{pair:?}");
        }
        assert!(state.gamma.iter().all(|&g| g >= 0.5));
        assert!(state.lambda.iter().all(|&l| l >= 0.5));
        let last = compute_elbo(&c, &state, &hyper).unwrap();
        assert_eq!(last, *state.elbo_trace.last().unwrap());
    }

    #[test]
    fn fit_is_deterministic() {
        let c = corpus(Preset::Smaller, 10, 5);
        let mut cfg = VbConfig::new(7, DirichletHyperparams::new(0.5, 0.5).unwrap(), 9);
        cfg.epochs = 10;
        let a = vb_fit(&c, &cfg).unwrap().without_timing();
        let b = vb_fit(&c, &cfg).unwrap().without_timing();
        assert_eq!(a, b);
        for row in a.phi_hat.rows() {
            assert!((row.sum() - 1.0).abs() < 1e-10);
            assert!(row.iter().all(|&x| x > 0.0));
        }
    }

    #[test]
    fn elbo_rejects_mismatched_state() {
        let c = corpus(Preset::Smaller, 3, 5);
        let state = VariationalState {
            lambda: Array2::ones((2, 50)),
            gamma: Array2::ones((3, 2)),
            elbo_trace: vec![],
        };
        let hyper = DirichletHyperparams::default();
        assert!(matches!(
            compute_elbo(&c, &state, &hyper),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn empty_corpus_is_rejected() {
        let c = corpus(Preset::Smaller, 0, 5);
        let cfg = VbConfig::new(3, DirichletHyperparams::default(), 0);
        assert!(matches!(vb_fit(&c, &cfg), Err(Error::Input(_))));
    }
}
