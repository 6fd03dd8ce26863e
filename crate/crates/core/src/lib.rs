//! Topic-model evaluation on synthetic corpora.
//!
//! Corpora are sampled from known LDA ground truth ([`simgen`]), fitted with
//! collapsed Gibbs sampling ([`gibbs`]) or batch variational Bayes ([`vb`]),
//! and scored by aligned forward KLD and C_v coherence ([`eval`]). The
//! [`harness`] module runs whole groups of corpora and summarizes them as box
//! plots.

pub mod corpus_io;
pub mod error;
pub mod eval;
pub mod fit;
pub mod gibbs;
pub mod harness;
pub mod json;
pub mod presets;
pub mod rng;
pub mod sampling;
pub mod simgen;
pub mod special;
pub mod types;
pub mod vb;

pub use ndarray;

pub use error::{Error, Result};
pub use eval::{align_topics, cv_score, kld, CoherenceConfig, CoherenceReport, EvalReport};
pub use fit::{Algorithm, FitConfig, FitResult};
pub use gibbs::{gibbs_fit, GibbsConfig, GibbsEstimator};
pub use presets::Preset;
pub use simgen::{generate_corpus, generate_group, GeneratorConfig, TopicShape};
pub use types::{Assignments, Corpus, DirichletHyperparams, GroundTruthModel, Vocabulary};
pub use vb::{vb_fit, VariationalState, VbConfig};
