//! Scoring extracted topics: aligned forward KLD against ground truth and
//! C_v coherence against the corpus.

mod coherence;
mod kld;

pub use coherence::{
    cosine_similarity, cv_score, npmi, top_words, CoherenceConfig, CoherenceReport, WindowStats,
};
pub use kld::{
    align_topics, align_topics_with, kld, smooth_distribution, EvalReport, DEFAULT_SMOOTHING,
};
