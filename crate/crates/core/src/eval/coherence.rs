//! C_v topic coherence: Boolean sliding-window probabilities, NPMI context
//! vectors over a topic's top words, one-set segmentation and indirect
//! cosine similarity.

use std::collections::HashMap;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::Corpus;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceConfig {
    pub top_n: usize,
    pub window: usize,
    pub epsilon: f64,
}

impl Default for CoherenceConfig {
    fn default() -> Self {
        Self {
            top_n: 10,
            window: 110,
            epsilon: 1e-12,
        }
    }
}

impl CoherenceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.top_n < 2 {
            return Err(Error::Config(format!(
                "top_n = {} must be at least 2",
                self.top_n
            )));
        }
        if self.window < 1 {
            return Err(Error::Config("window must be at least 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!(
                "epsilon = {} must be positive",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Window occurrence counts for a fixed set of words.
///
/// Every document contributes its windows of `window` consecutive tokens
/// (stride 1); a document no longer than the window contributes itself as
/// one window. A word counts once per window however often it appears.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowStats {
    words: Vec<usize>,
    lookup: HashMap<usize, usize>,
    num_windows: u64,
    occurrences: Vec<u64>,
    /// Symmetric `n x n`; the diagonal repeats `occurrences`.
    co_occurrences: Vec<u64>,
}

impl WindowStats {
    pub fn collect(docs: &[Vec<usize>], words: &[usize], window: usize) -> Self {
        assert!(window >= 1, "window must be positive");
        let n = words.len();
        let lookup: HashMap<usize, usize> =
            words.iter().enumerate().map(|(i, &w)| (w, i)).collect();
        let mut stats = Self {
            words: words.to_vec(),
            lookup,
            num_windows: 0,
            occurrences: vec![0; n],
            co_occurrences: vec![0; n * n],
        };
        let mut in_window = vec![0u32; n];
        let mut present = Vec::with_capacity(n);
        for doc in docs {
            let tracked: Vec<Option<usize>> =
                doc.iter().map(|w| stats.lookup.get(w).copied()).collect();
            in_window.iter_mut().for_each(|c| *c = 0);
            let first = doc.len().min(window);
            for p in tracked[..first].iter().flatten() {
                in_window[*p] += 1;
            }
            stats.record_window(&in_window, &mut present);
            for start in 1..=doc.len().saturating_sub(window) {
                if let Some(p) = tracked[start - 1] {
                    in_window[p] -= 1;
                }
                if let Some(p) = tracked[start + window - 1] {
                    in_window[p] += 1;
                }
                stats.record_window(&in_window, &mut present);
            }
        }
        stats
    }

    fn record_window(&mut self, in_window: &[u32], present: &mut Vec<usize>) {
        let n = self.words.len();
        self.num_windows += 1;
        present.clear();
        present.extend((0..n).filter(|&i| in_window[i] > 0));
        for &a in present.iter() {
            self.occurrences[a] += 1;
            for &b in present.iter() {
                self.co_occurrences[a * n + b] += 1;
            }
        }
    }

    pub fn num_windows(&self) -> u64 {
        self.num_windows
    }

    /// Share of windows containing `word` (0 for untracked words).
    pub fn probability(&self, word: usize) -> f64 {
        match self.lookup.get(&word) {
            Some(&i) if self.num_windows > 0 => {
                self.occurrences[i] as f64 / self.num_windows as f64
            }
            _ => 0.0,
        }
    }

    /// Share of windows containing both words.
    pub fn joint_probability(&self, a: usize, b: usize) -> f64 {
        match (self.lookup.get(&a), self.lookup.get(&b)) {
            (Some(&i), Some(&j)) if self.num_windows > 0 => {
                self.co_occurrences[i * self.words.len() + j] as f64 / self.num_windows as f64
            }
            _ => 0.0,
        }
    }
}

/// Normalized pointwise mutual information of two words,
/// `ln((p_ij + ε) / (p_i p_j)) / −ln(p_ij + ε)`, clamped to `[−1, 1]`.
///
/// A pair present in every window scores 1 and a pair involving a word that
/// never occurs scores −1; both are the limits of the formula.
pub fn npmi(i: usize, j: usize, stats: &WindowStats, epsilon: f64) -> f64 {
    let (pi, pj, pij) = (
        stats.probability(i),
        stats.probability(j),
        stats.joint_probability(i, j),
    );
    if pi == 0.0 || pj == 0.0 {
        return -1.0;
    }
    if pij >= 1.0 {
        return 1.0;
    }
    let joint = pij + epsilon;
    ((joint / (pi * pj)).ln() / -joint.ln()).clamp(-1.0, 1.0)
}

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Indices of the `n` most probable words, most probable first (lower index on ties).
pub fn top_words(topic: ArrayView1<f64>, n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..topic.len()).collect();
    idx.sort_by(|&a, &b| topic[b].total_cmp(&topic[a]).then(a.cmp(&b)));
    idx.truncate(n);
    idx
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    pub per_topic: Vec<f64>,
    pub mean: f64,
    pub config: CoherenceConfig,
}

fn topic_coherence(words: &[usize], stats: &WindowStats, epsilon: f64) -> f64 {
    let n = words.len();
    let mut table = vec![0.0; n * n];
    for (a, &wa) in words.iter().enumerate() {
        for (b, &wb) in words.iter().enumerate() {
            table[a * n + b] = npmi(wa, wb, stats, epsilon);
        }
    }
    let set_vector: Vec<f64> = (0..n)
        .map(|b| (0..n).map(|a| table[a * n + b]).sum())
        .collect();
    let total: f64 = (0..n)
        .map(|a| cosine_similarity(&table[a * n..(a + 1) * n], &set_vector))
        .sum();
    total / n as f64
}

/// C_v coherence of every topic (row) of `fit_phi` over `corpus`.
pub fn cv_score(
    fit_phi: &Array2<f64>,
    corpus: &Corpus,
    config: &CoherenceConfig,
) -> Result<CoherenceReport> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(Error::Input("coherence needs a nonempty corpus".into()));
    }
    if fit_phi.ncols() != corpus.vocab_size() {
        return Err(Error::Input(
            "topic width differs from the corpus vocabulary".into(),
        ));
    }
    if config.top_n > fit_phi.ncols() {
        return Err(Error::Input(format!(
            "top_n = {} exceeds the vocabulary size {}",
            config.top_n,
            fit_phi.ncols()
        )));
    }
    let per_topic: Vec<f64> = fit_phi
        .rows()
        .into_iter()
        .map(|row| {
            let words = top_words(row, config.top_n);
            let stats = WindowStats::collect(&corpus.docs, &words, config.window);
            topic_coherence(&words, &stats, config.epsilon)
        })
        .collect();
    let mean = per_topic.iter().sum::<f64>() / per_topic.len().max(1) as f64;
    Ok(CoherenceReport {
        per_topic,
        mean,
        config: *config,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::Preset;
    use crate::types::Vocabulary;

    fn corpus(docs: Vec<Vec<usize>>, v: usize) -> Corpus {
        let n = docs.first().map_or(1, Vec::len);
        Corpus {
            docs,
            vocab: Vocabulary::plain(v).unwrap(),
            seed: 0,
            gen_params: crate::simgen::GeneratorConfig {
                n,
                ..Preset::Smaller.generator(0, 0)
            },
        }
    }

    #[test]
    fn sliding_windows_count_once_per_window() {
        // windows of 3 over [0 1 0 2 3]: {0,1}, {0,1,2}, {0,2,3}
        let stats = WindowStats::collect(&[vec![0, 1, 0, 2, 3]], &[0, 1, 2, 3], 3);
        assert_eq!(stats.num_windows(), 3);
        assert_eq!(stats.probability(0), 1.0);
        assert!((stats.probability(1) - 2.0 / 3.0).abs() < 1e-15);
        assert!((stats.joint_probability(2, 3) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(stats.joint_probability(1, 3), 0.0);
        // Short documents are a single window.
        let stats = WindowStats::collect(&[vec![0, 1], vec![2]], &[0, 1, 2], 110);
        assert_eq!(stats.num_windows(), 2);
        assert_eq!(stats.joint_probability(0, 1), 0.5);
    }

    #[test]
    fn perfect_association() {
        // Words 0 and 1 always together, half of the windows.
        let docs: Vec<Vec<usize>> = (0..100)
            .map(|i| if i % 2 == 0 { vec![0, 1] } else { vec![2, 3] })
            .collect();
        let stats = WindowStats::collect(&docs, &[0, 1], 10);
        assert!((npmi(0, 1, &stats, 1e-12) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn never_together() {
        let docs: Vec<Vec<usize>> = (0..100).map(|i| vec![i % 2]).collect();
        let stats = WindowStats::collect(&docs, &[0, 1], 10);
        assert!(npmi(0, 1, &stats, 1e-12) <= -0.9);
    }

    #[test]
    fn independent_words() {
        // p(0) = p(1) = 1/2 and p(0,1) = 1/4 over four windows.
        let docs = vec![vec![0, 1], vec![0, 2], vec![1, 2], vec![2, 2]];
        let stats = WindowStats::collect(&docs, &[0, 1], 110);
        assert!(npmi(0, 1, &stats, 1e-12).abs() < 1e-9);
    }

    #[test]
    fn npmi_stays_in_range() {
        let docs: Vec<Vec<usize>> = (0..50).map(|i| vec![i % 3, (i * 7) % 5, i % 2]).collect();
        let words = [0, 1, 2, 3, 4, 9];
        let stats = WindowStats::collect(&docs, &words, 2);
        for &a in &words {
            for &b in &words {
                let x = npmi(a, b, &stats, 1e-12);
                assert!((-1.0..=1.0).contains(&x));
            }
        }
        assert_eq!(npmi(9, 0, &stats, 1e-12), -1.0);
    }

    #[test]
    fn co_occurring_top_words_score_one() {
        let docs: Vec<Vec<usize>> = (0..20)
            .map(|i| {
                if i % 4 == 0 {
                    vec![5, 6, 7, 8]
                } else {
                    vec![0, 1, 2, 3]
                }
            })
            .collect();
        let c = corpus(docs, 10);
        let mut phi = Array2::from_elem((1, 10), 0.01);
        for w in 0..4 {
            phi[[0, w]] = 0.2;
        }
        let cfg = CoherenceConfig {
            top_n: 4,
            ..CoherenceConfig::default()
        };
        let r = cv_score(&phi, &c, &cfg).unwrap();
        assert!((r.per_topic[0] - 1.0).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn single_word_topics_are_rejected() {
        let c = corpus(vec![vec![0, 1], vec![1, 2]], 3);
        let phi = ndarray::array![[0.2, 0.5, 0.3]];
        let cfg = CoherenceConfig {
            top_n: 1,
            ..CoherenceConfig::default()
        };
        assert!(matches!(cv_score(&phi, &c, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn errors() {
        let c = corpus(vec![vec![0, 1]], 3);
        let phi = ndarray::array![[0.2, 0.5, 0.3]];
        let cfg = CoherenceConfig {
            top_n: 4,
            ..CoherenceConfig::default()
        };
        assert!(matches!(cv_score(&phi, &c, &cfg), Err(Error::Input(_))));
        let empty = corpus(vec![], 3);
        assert!(cv_score(
            &phi,
            &empty,
            &CoherenceConfig {
                top_n: 2,
                ..Default::default()
            }
        )
        .is_err());
    }

    #[test]
    fn top_words_order() {
        let row = ndarray::array![0.1, 0.4, 0.1, 0.4];
        assert_eq!(top_words(row.view(), 3), vec![1, 3, 0]);
    }
}
