//! Synthetic corpus generation from known LDA ground truth.
//!
//! Content topics sit at equally spaced centers on a circle of content
//! words, each a Laplace or Gaussian bump whose width is `overlap` times the
//! spacing between centers. An optional function-word topic is flat over a
//! reserved tail block of the vocabulary and receives a fixed share of every
//! document.

use ndarray::Array2;
use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded_rng};
use crate::sampling::{sample_dirichlet, CumulativeTable};
use crate::types::{circular_distance, Corpus, GroundTruthModel, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopicShape {
    Laplace,
    Gaussian,
}

impl std::str::FromStr for TopicShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "laplace" => Ok(Self::Laplace),
            "gaussian" => Ok(Self::Gaussian),
            other => Err(Error::Config(format!("unknown topic shape {other:?}"))),
        }
    }
}

pub const DEFAULT_OVERLAP: f64 = 0.5;
pub const DEFAULT_FUNCTION_FRACTION: f64 = 0.2;
pub const DEFAULT_FUNCTION_BLOCK_FRACTION: f64 = 0.1;

fn default_shape() -> TopicShape {
    TopicShape::Laplace
}
fn default_overlap() -> f64 {
    DEFAULT_OVERLAP
}
fn default_function_fraction() -> f64 {
    DEFAULT_FUNCTION_FRACTION
}
fn default_function_block_fraction() -> f64 {
    DEFAULT_FUNCTION_BLOCK_FRACTION
}
fn default_true() -> bool {
    true
}

/// Parameters of one synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    /// Documents per corpus.
    #[serde(rename = "M")]
    pub m: usize,
    /// Vocabulary size.
    #[serde(rename = "V")]
    pub v: usize,
    /// Tokens per document.
    #[serde(rename = "N")]
    pub n: usize,
    /// Topics, including the function topic when enabled.
    #[serde(rename = "K")]
    pub k: usize,
    /// Content topics mixed into each document.
    #[serde(rename = "K_m")]
    pub k_m: usize,
    #[serde(default = "default_shape")]
    pub shape: TopicShape,
    /// Topic width relative to the spacing between neighbouring centers.
    #[serde(default = "default_overlap")]
    pub overlap: f64,
    /// Expected share of each document's mass given to the function topic.
    #[serde(default = "default_function_fraction")]
    pub function_fraction: f64,
    /// Share of the vocabulary reserved for function words.
    #[serde(default = "default_function_block_fraction")]
    pub function_block_fraction: f64,
    /// Whether the last topic is the flat function-word topic.
    #[serde(default = "default_true")]
    pub function_topic: bool,
    pub seed: u64,
}

impl GeneratorConfig {
    /// Required JSON keys (everything without a default).
    pub const REQUIRED_FIELDS: [&'static str; 6] = ["M", "V", "N", "K", "K_m", "seed"];
    /// Every accepted JSON key.
    pub const ALL_FIELDS: [&'static str; 11] = [
        "M",
        "V",
        "N",
        "K",
        "K_m",
        "shape",
        "overlap",
        "function_fraction",
        "function_block_fraction",
        "function_topic",
        "seed",
    ];

    /// Number of topics on the content circle.
    pub fn content_topics(&self) -> usize {
        if self.function_topic {
            self.k.saturating_sub(1)
        } else {
            self.k
        }
    }

    /// Size of the reserved function-word block.
    pub fn function_block_len(&self) -> usize {
        if self.function_topic {
            (self.function_block_fraction * self.v as f64).round() as usize
        } else {
            0
        }
    }

    pub fn total_tokens(&self) -> u128 {
        self.m as u128 * self.n as u128
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.n < 1 {
            return fail("N must be at least 1".into());
        }
        if self.k < 1 {
            return fail("K must be at least 1".into());
        }
        if self.function_topic && self.k < 2 {
            return fail("K must be at least 2 when the function topic is enabled".into());
        }
        let content = self.content_topics();
        if self.k_m < 1 || self.k_m > content {
            return fail(format!(
                "K_m = {} must lie in 1..={content} (K{} content topics)",
                self.k_m,
                if self.function_topic { " - 1" } else { "" }
            ));
        }
        if self.v < self.k {
            return fail(format!("V = {} must be at least K = {}", self.v, self.k));
        }
        if !(self.overlap > 0.0 && self.overlap <= 1.0) {
            return fail(format!("overlap = {} must lie in (0, 1]", self.overlap));
        }
        if !(self.function_fraction >= 0.0 && self.function_fraction < 1.0) {
            return fail(format!(
                "function_fraction = {} must lie in [0, 1)",
                self.function_fraction
            ));
        }
        if self.function_topic {
            if !(self.function_block_fraction > 0.0 && self.function_block_fraction < 1.0) {
                return fail(format!(
                    "function_block_fraction = {} must lie in (0, 1)",
                    self.function_block_fraction
                ));
            }
            let vf = self.function_block_len();
            if vf == 0 {
                return fail("function block rounds to zero words".into());
            }
            if vf >= self.v {
                return fail(format!(
                    "function block of {vf} words leaves no content words"
                ));
            }
            if self.v - vf < content {
                return fail(format!(
                    "{} content words cannot host {content} distinct topic centers",
                    self.v - vf
                ));
            }
        } else if self.function_fraction != 0.0 {
            return fail("function_fraction must be 0 when the function topic is disabled".into());
        }
        Ok(())
    }

    pub fn vocabulary(&self) -> Result<Vocabulary> {
        let vf = self.function_block_len();
        Vocabulary::new(self.v, self.v - vf..self.v)
    }

    /// Center word of content topic `k`.
    pub fn topic_center(&self, k: usize) -> usize {
        let span = self.v - self.function_block_len();
        let spacing = span as f64 / self.content_topics() as f64;
        ((k as f64 * spacing).round() as usize) % span
    }
}

/// Builds the `K x V` ground-truth topic matrix.
pub fn build_ground_truth_topics(config: &GeneratorConfig) -> Result<Array2<f64>> {
    config.validate()?;
    let vocab = config.vocabulary()?;
    let span = vocab.content_span();
    let content = config.content_topics();
    let width = config.overlap * span as f64 / content as f64;
    let mut phi = Array2::zeros((config.k, config.v));
    for k in 0..content {
        let center = config.topic_center(k);
        let mut row = phi.row_mut(k);
        for word in 0..span {
            let d = circular_distance(word, center, span)? as f64;
            row[word] = match config.shape {
                TopicShape::Laplace => (-d / width).exp(),
                TopicShape::Gaussian => (-d * d / (2.0 * width * width)).exp(),
            };
        }
        let total = row.sum();
        row /= total;
    }
    if config.function_topic {
        let block = vocab.function_block();
        let flat = 1.0 / block.len() as f64;
        let mut row = phi.row_mut(config.k - 1);
        for word in block {
            row[word] = flat;
        }
    }
    Ok(phi)
}

/// Repeated document draws from one topic matrix.
pub struct DocumentSampler<'a> {
    config: &'a GeneratorConfig,
    topics: Vec<CumulativeTable>,
}

impl<'a> DocumentSampler<'a> {
    pub fn new(phi: &Array2<f64>, config: &'a GeneratorConfig) -> Result<Self> {
        if phi.dim() != (config.k, config.v) {
            return Err(Error::Input(format!(
                "phi is {:?}, config expects ({}, {})",
                phi.dim(),
                config.k,
                config.v
            )));
        }
        let topics = phi
            .rows()
            .into_iter()
            .map(|r| CumulativeTable::new(r.as_slice().expect("standard layout")))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { config, topics })
    }

    /// Draws one document: its tokens and its full-length topic proportions.
    ///
    /// The active content topics get concentration 1 and the function topic
    /// `f·K_m/(1−f)`, so its share has mean `f`. With a fixed share the
    /// function topic could not be told apart from its mass spread over
    /// every content topic.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(Vec<usize>, Vec<f64>)> {
        let cfg = self.config;
        let mut active = index::sample(rng, cfg.content_topics(), cfg.k_m).into_vec();
        active.sort_unstable();
        let mut theta = vec![0.0; cfg.k];
        let ff = cfg.function_fraction;
        if ff > 0.0 {
            let mut conc = vec![1.0; cfg.k_m + 1];
            conc[cfg.k_m] = ff * cfg.k_m as f64 / (1.0 - ff);
            let shares = sample_dirichlet(&conc, rng)?;
            for (&k, &s) in active.iter().zip(&shares) {
                theta[k] = s.max(f64::MIN_POSITIVE);
            }
            // Small concentrations can underflow; active topics stay in the support.
            theta[cfg.k - 1] = shares[cfg.k_m].max(f64::MIN_POSITIVE);
        } else {
            let shares = sample_dirichlet(&vec![1.0; cfg.k_m], rng)?;
            for (&k, &s) in active.iter().zip(&shares) {
                theta[k] = s.max(f64::MIN_POSITIVE);
            }
        }
        let mixture = CumulativeTable::new(&theta)?;
        let tokens = (0..cfg.n)
            .map(|_| {
                let z = mixture.sample(rng);
                self.topics[z].sample(rng)
            })
            .collect();
        Ok((tokens, theta))
    }
}

/// Draws one document from `phi`.
pub fn sample_document<R: Rng + ?Sized>(
    phi: &Array2<f64>,
    config: &GeneratorConfig,
    rng: &mut R,
) -> Result<(Vec<usize>, Vec<f64>)> {
    config.validate()?;
    DocumentSampler::new(phi, config)?.sample(rng)
}

/// Generates a corpus and the ground truth it was drawn from.
///
/// Document `m` uses stream `m` of `config.seed`, so any document can be
/// regenerated on its own.
pub fn generate_corpus(config: &GeneratorConfig) -> Result<(Corpus, GroundTruthModel)> {
    let phi = build_ground_truth_topics(config)?;
    let sampler = DocumentSampler::new(&phi, config)?;
    let mut docs = Vec::with_capacity(config.m);
    let mut theta = Array2::zeros((config.m, config.k));
    for m in 0..config.m {
        let mut rng = seeded_rng(config.seed, m as u64);
        let (tokens, row) = sampler.sample(&mut rng)?;
        docs.push(tokens);
        theta.row_mut(m).assign(&ndarray::ArrayView1::from(&row));
    }
    let corpus = Corpus {
        docs,
        vocab: config.vocabulary()?,
        seed: config.seed,
        gen_params: config.clone(),
    };
    let truth = GroundTruthModel {
        phi,
        theta,
        includes_function_topic: config.function_topic,
    };
    Ok((corpus, truth))
}

/// The config of group member `index`: identical except for a derived seed.
pub fn group_member_config(config: &GeneratorConfig, index: usize) -> GeneratorConfig {
    GeneratorConfig {
        seed: derive_seed(config.seed, index as u64),
        ..config.clone()
    }
}

/// Generates `group_size` independent corpora sharing every parameter but
/// the seed.
pub fn generate_group(
    config: &GeneratorConfig,
    group_size: usize,
) -> Result<Vec<(Corpus, GroundTruthModel)>> {
    if group_size == 0 {
        return Err(Error::Config("group size must be at least 1".into()));
    }
    (0..group_size)
        .into_par_iter()
        .map(|i| generate_corpus(&group_member_config(config, i)))
        .collect()
}
