//! The two synthetic data sets used throughout the experiments.

use serde::{Deserialize, Serialize};

use crate::gibbs::GibbsConfig;
use crate::simgen::{
    GeneratorConfig, TopicShape, DEFAULT_FUNCTION_BLOCK_FRACTION, DEFAULT_FUNCTION_FRACTION,
};
use crate::types::DirichletHyperparams;
use crate::vb::VbConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// V = 100, N = 100, K = 7 (6 content + function), 3 content topics per document.
    Smaller,
    /// V = 500, N = 120, K = 10 (9 content + function), 5 content topics per document.
    Larger,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Smaller => "smaller",
            Preset::Larger => "larger",
        }
    }

    pub fn default_m(self) -> usize {
        match self {
            Preset::Smaller => 50,
            Preset::Larger => 100,
        }
    }

    /// Corpus size and K range for the coherence sweep.
    pub fn coherence_defaults(self) -> (usize, std::ops::RangeInclusive<usize>) {
        match self {
            Preset::Smaller => (100, 4..=10),
            Preset::Larger => (200, 6..=14),
        }
    }

    pub fn generator(self, m: usize, seed: u64) -> GeneratorConfig {
        let (v, n, k, k_m, shape, overlap) = match self {
            Preset::Smaller => (100, 100, 7, 3, TopicShape::Laplace, 0.5),
            Preset::Larger => (500, 120, 10, 5, TopicShape::Gaussian, 0.5),
        };
        GeneratorConfig {
            m,
            v,
            n,
            k,
            k_m,
            shape,
            overlap,
            function_fraction: DEFAULT_FUNCTION_FRACTION,
            function_block_fraction: DEFAULT_FUNCTION_BLOCK_FRACTION,
            function_topic: true,
            seed,
        }
    }

    pub fn hyper(self) -> DirichletHyperparams {
        match self {
            Preset::Smaller => DirichletHyperparams {
                alpha: 0.5,
                beta: 0.5,
            },
            Preset::Larger => DirichletHyperparams {
                alpha: 0.1,
                beta: 0.1,
            },
        }
    }

    pub fn gibbs(self, k: usize, seed: u64) -> GibbsConfig {
        GibbsConfig::new(k, self.hyper(), seed)
    }

    pub fn vb(self, k: usize, seed: u64) -> VbConfig {
        VbConfig::new(k, self.hyper(), seed)
    }
}

impl std::str::FromStr for Preset {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "smaller" => Ok(Preset::Smaller),
            "larger" => Ok(Preset::Larger),
            other => Err(crate::Error::Config(format!("unknown preset {other:?}"))),
        }
    }
}
