//! Benchmark fixtures shared by the criterion targets in `benches/`.

use topicsim_core::{generate_corpus, Corpus, GroundTruthModel, Preset};

/// A corpus of `m` documents from `preset` with a fixed seed.
pub fn fixture(preset: Preset, m: usize) -> (Corpus, GroundTruthModel) {
    generate_corpus(&preset.generator(m, 42)).expect("preset configs are valid")
}
