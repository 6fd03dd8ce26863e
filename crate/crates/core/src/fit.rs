use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::gibbs::GibbsConfig;
use crate::types::nested_rows;
use crate::vb::VbConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Gibbs,
    Vb,
}

impl Algorithm {
    pub const ALL: [Algorithm; 2] = [Algorithm::Gibbs, Algorithm::Vb];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Gibbs => "gibbs",
            Algorithm::Vb => "vb",
        }
    }

    /// Default fit seed for a corpus, as used by the experiment harness.
    pub fn fit_seed(self, corpus_seed: u64) -> u64 {
        let tag = match self {
            Algorithm::Gibbs => crate::rng::tags::GIBBS,
            Algorithm::Vb => crate::rng::tags::VB,
        };
        crate::rng::derive_seed(corpus_seed, tag)
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "gibbs" => Ok(Algorithm::Gibbs),
            "vb" => Ok(Algorithm::Vb),
            other => Err(crate::Error::Config(format!("unknown algorithm {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FitConfig {
    Gibbs(GibbsConfig),
    Vb(VbConfig),
}

/// Estimated topics from one inference run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub algorithm: Algorithm,
    /// `K x V` estimated topic-word probabilities.
    #[serde(with = "nested_rows")]
    pub phi_hat: Array2<f64>,
    /// `M x K` estimated document-topic proportions.
    #[serde(with = "nested_rows")]
    pub theta_hat: Array2<f64>,
    /// Sweeps (Gibbs) or epochs (VB) actually run.
    pub iterations: usize,
    pub seed: u64,
    /// `None` when the fit is persisted as part of a reproducible experiment.
    pub wall_clock_seconds: Option<f64>,
    pub config: FitConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elbo_trace: Option<Vec<f64>>,
}

impl FitResult {
    pub fn num_topics(&self) -> usize {
        self.phi_hat.nrows()
    }

    /// Drops run-dependent timing so that serialized fits are reproducible.
    pub fn without_timing(mut self) -> Self {
        self.wall_clock_seconds = None;
        self
    }
}
