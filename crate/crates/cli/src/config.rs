//! Optional `--config` file (TOML or JSON, chosen by extension). Every
//! section and key is optional; command line flags win over the file.

use std::path::Path;

use serde::Deserialize;
use topicsim_core::{GibbsEstimator, Preset, TopicShape};

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub preset: Option<Preset>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub generator: GeneratorSection,
    #[serde(default)]
    pub hyper: HyperSection,
    #[serde(default)]
    pub gibbs: GibbsSection,
    #[serde(default)]
    pub vb: VbSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub coherence: CoherenceSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSection {
    #[serde(rename = "M")]
    pub m: Option<usize>,
    #[serde(rename = "V")]
    pub v: Option<usize>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    #[serde(rename = "K_m")]
    pub k_m: Option<usize>,
    pub shape: Option<TopicShape>,
    pub overlap: Option<f64>,
    pub function_fraction: Option<f64>,
    pub function_block_fraction: Option<f64>,
    pub function_topic: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperSection {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GibbsSection {
    pub iterations: Option<usize>,
    pub burn_in_fraction: Option<f64>,
    pub thin: Option<usize>,
    pub estimator: Option<GibbsEstimator>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VbSection {
    pub epochs: Option<usize>,
    pub inner_doc_iters: Option<usize>,
    pub doc_convergence_tol: Option<f64>,
    pub elbo_tol: Option<f64>,
    pub init_noise: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub dataset: Option<String>,
    pub m_values: Option<Vec<usize>>,
    pub group_size: Option<usize>,
    pub k_values: Option<Vec<usize>>,
    pub fast: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoherenceSection {
    pub top_n: Option<usize>,
    pub window: Option<usize>,
    pub epsilon: Option<f64>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)?;
        let is_json = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if is_json {
            Ok(serde_json::from_str(&text)?)
        } else {
            Ok(toml::from_str(&text)?)
        }
    }
}
