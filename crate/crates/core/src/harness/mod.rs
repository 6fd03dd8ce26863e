//! Corpus-group experiments: generate, fit both algorithms, evaluate,
//! summarize and plot. Everything written is a function of the spec.

mod manifest;
mod run;
pub mod stats;
pub mod svg;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::CoherenceConfig;
use crate::gibbs::GibbsConfig;
use crate::presets::Preset;
use crate::simgen::GeneratorConfig;
use crate::vb::VbConfig;

pub use manifest::{hash_tree, verify, Manifest, VerifyReport};
pub use run::{coherence_sweep, run_experiment, CoherenceSummary, ExperimentOutcome, SweepOutcome};
pub use stats::{boxplot_stats, BoxStats, GroupSummary};
pub use svg::{emit_boxplot, emit_wordtopic_plot};

pub const DEFAULT_M_VALUES: [usize; 6] = [50, 100, 200, 300, 400, 500];
pub const DEFAULT_GROUP_SIZE: usize = 20;
pub const FAST_GROUP_SIZE: usize = 10;

pub const EXPERIMENT_FILE: &str = "experiment.json";
pub const SUMMARY_FILE: &str = "summary.json";
pub const BOXPLOT_FILE: &str = "boxplot_kld.svg";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const COHERENCE_EXPERIMENT_FILE: &str = "coherence_experiment.json";
pub const COHERENCE_SUMMARY_FILE: &str = "coherence_summary.json";
pub const COHERENCE_MANIFEST_FILE: &str = "coherence_manifest.json";

/// Everything needed to rerun an experiment.
///
/// Per corpus, `M` and `seed` of `generator` are replaced by the group
/// values, and `K` and `seed` of the fit configs by the true (or swept) K
/// and a seed derived from the corpus seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub dataset: String,
    pub generator: GeneratorConfig,
    pub m_values: Vec<usize>,
    pub group_size: usize,
    pub gibbs: GibbsConfig,
    pub vb: VbConfig,
    /// K values for the coherence sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_values: Option<Vec<usize>>,
    #[serde(default)]
    pub coherence: CoherenceConfig,
    pub master_seed: u64,
    /// Not persisted: the tree must not depend on where it was written.
    #[serde(skip)]
    pub output_dir: PathBuf,
}

impl ExperimentSpec {
    /// Full profile for a preset, or the desk-scale one when `fast`.
    pub fn from_preset(preset: Preset, master_seed: u64, fast: bool, output_dir: PathBuf) -> Self {
        let generator = preset.generator(preset.default_m(), master_seed);
        let k = generator.k;
        let mut gibbs = preset.gibbs(k, master_seed);
        if fast {
            gibbs.iterations = GibbsConfig::FAST_ITERATIONS;
        }
        Self {
            dataset: preset.name().to_string(),
            generator,
            m_values: DEFAULT_M_VALUES.to_vec(),
            group_size: if fast {
                FAST_GROUP_SIZE
            } else {
                DEFAULT_GROUP_SIZE
            },
            gibbs,
            vb: preset.vb(k, master_seed),
            k_values: None,
            coherence: CoherenceConfig::default(),
            master_seed,
            output_dir,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_values.is_empty() {
            return Err(Error::Config("the M list is empty".into()));
        }
        if self.group_size < 1 {
            return Err(Error::Config("group_size must be at least 1".into()));
        }
        if self.dataset.is_empty()
            || self.dataset.contains(['/', '\\'])
            || self.dataset == "."
            || self.dataset == ".."
        {
            return Err(Error::Config(format!(
                "dataset name {:?} is not a plain directory name",
                self.dataset
            )));
        }
        let mut sorted = self.m_values.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.m_values.len() {
            return Err(Error::Config("M values must be distinct".into()));
        }
        for &m in &self.m_values {
            self.generator_for(m, 0).validate()?;
        }
        self.gibbs.validate()?;
        self.vb.validate()?;
        self.coherence.validate()?;
        if let Some(ks) = &self.k_values {
            if ks.is_empty() || ks.contains(&0) {
                return Err(Error::Config(
                    "K range must be nonempty and positive".into(),
                ));
            }
        }
        Ok(())
    }

    /// Root of this dataset's output tree.
    pub fn dataset_dir(&self) -> PathBuf {
        self.output_dir.join(&self.dataset)
    }

    pub(crate) fn generator_for(&self, m: usize, seed: u64) -> GeneratorConfig {
        GeneratorConfig {
            m,
            seed,
            ..self.generator.clone()
        }
    }
}
