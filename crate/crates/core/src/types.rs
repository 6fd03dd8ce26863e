//! Domain types shared by every stage: vocabulary, hyperparameters, ground
//! truth, corpora and topic assignments.

use std::ops::Range;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simgen::GeneratorConfig;

/// Word indices `0..size`. The function-word block, when present, occupies
/// the tail `size - len..size`; content words live on the circle `0..size - len`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    size: usize,
    function_block: Range<usize>,
}

impl Vocabulary {
    pub fn new(size: usize, function_block: Range<usize>) -> Result<Self> {
        if size < 2 {
            return Err(Error::Config(format!(
                "vocabulary size {size} must be at least 2"
            )));
        }
        if !function_block.is_empty() && (function_block.end != size || function_block.start == 0) {
            return Err(Error::Config(format!(
                "function block {function_block:?} must be a proper tail of 0..{size}"
            )));
        }
        Ok(Self {
            size,
            function_block,
        })
    }

    /// Vocabulary without a function-word block.
    pub fn plain(size: usize) -> Result<Self> {
        Self::new(size, size..size)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn function_block(&self) -> Range<usize> {
        self.function_block.clone()
    }

    /// Number of words on the content circle.
    pub fn content_span(&self) -> usize {
        self.size - self.function_block.len()
    }

    /// Synthetic word strings `w0`, `w1`, ...
    pub fn word(&self, index: usize) -> String {
        format!("w{index}")
    }
}

/// Distance between two positions on a circle of `span` words.
pub fn circular_distance(a: usize, b: usize, span: usize) -> Result<usize> {
    if a >= span || b >= span {
        return Err(Error::Parameter(format!(
            "indices ({a}, {b}) must be below span {span}"
        )));
    }
    let d = a.abs_diff(b);
    Ok(d.min(span - d))
}

/// Symmetric Dirichlet concentrations for document-topic (`alpha`) and
/// topic-word (`beta`) priors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirichletHyperparams {
    pub alpha: f64,
    pub beta: f64,
}

impl DirichletHyperparams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let h = Self { alpha, beta };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, x) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::Config(format!("{name} = {x} must be positive")));
            }
        }
        Ok(())
    }
}

impl Default for DirichletHyperparams {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            beta: 0.1,
        }
    }
}

/// Serde helpers storing a matrix as nested row arrays.
pub mod nested_rows {
    use ndarray::Array2;
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &Array2<f64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = m.rows().into_iter().map(|r| r.to_vec()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Array2<f64>, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        super::matrix_from_rows(&rows).map_err(D::Error::custom)
    }
}

/// Builds a matrix from equal-length rows. An empty list gives a `0 x 0` matrix.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<Array2<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Input("matrix rows have unequal lengths".into()));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Array2::from_shape_vec((rows.len(), ncols), flat).map_err(|e| Error::Input(e.to_string()))
}

pub(crate) fn row_sum_error(row: ArrayView1<f64>) -> f64 {
    (row.sum() - 1.0).abs()
}

/// The distributions a corpus was sampled from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthModel {
    /// `K x V` topic-word probabilities.
    #[serde(with = "nested_rows")]
    pub phi: Array2<f64>,
    /// `M x K` per-document topic proportions.
    #[serde(with = "nested_rows")]
    pub theta: Array2<f64>,
    /// Whether the last row of `phi` is the flat function-word topic.
    pub includes_function_topic: bool,
}

impl GroundTruthModel {
    pub fn num_topics(&self) -> usize {
        self.phi.nrows()
    }

    /// Checks stochasticity, the function-topic layout and theta sparsity
    /// (at most `max_active` nonzero entries per document).
    pub fn validate(&self, vocab: &Vocabulary, max_active: usize) -> Result<()> {
        if self.phi.ncols() != vocab.size() {
            return Err(Error::Internal(
                "phi width differs from the vocabulary".into(),
            ));
        }
        for (name, m) in [("phi", &self.phi), ("theta", &self.theta)] {
            for (i, row) in m.rows().into_iter().enumerate() {
                if row.iter().any(|x| x.is_nan() || *x < 0.0) {
                    return Err(Error::Internal(format!(
                        "{name} row {i} has a negative entry"
                    )));
                }
                let err = row_sum_error(row);
                if err > 1e-12 {
                    return Err(Error::Internal(format!(
                        "{name} row {i} sums to 1 {err:+e}"
                    )));
                }
            }
        }
        if self.includes_function_topic {
            let block = vocab.function_block();
            let row = self.phi.row(self.num_topics() - 1);
            let flat = 1.0 / block.len() as f64;
            for (v, &p) in row.iter().enumerate() {
                let want = if block.contains(&v) { flat } else { 0.0 };
                if p != want {
                    return Err(Error::Internal(format!(
                        "function topic has mass {p} at word {v}"
                    )));
                }
            }
        }
        for (m, row) in self.theta.rows().into_iter().enumerate() {
            let active = row.iter().filter(|x| **x > 0.0).count();
            if active > max_active {
                return Err(Error::Internal(format!(
                    "document {m} mixes {active} topics, limit {max_active}"
                )));
            }
        }
        Ok(())
    }
}

/// Token-index documents together with their provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub docs: Vec<Vec<usize>>,
    pub vocab: Vocabulary,
    pub seed: u64,
    pub gen_params: GeneratorConfig,
}

impl Corpus {
    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.size()
    }

    pub fn total_tokens(&self) -> usize {
        self.docs.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// Corpus-wide frequency of each word.
    pub fn word_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.vocab_size()];
        for &w in self.docs.iter().flatten() {
            counts[w] += 1;
        }
        counts
    }

    /// Checks token range and document lengths.
    pub fn validate(&self) -> Result<()> {
        let v = self.vocab_size();
        for (m, doc) in self.docs.iter().enumerate() {
            if doc.len() != self.gen_params.n {
                return Err(Error::Input(format!(
                    "document {m} has {} tokens, expected {}",
                    doc.len(),
                    self.gen_params.n
                )));
            }
            if let Some(w) = doc.iter().find(|&&w| w >= v) {
                return Err(Error::Input(format!(
                    "document {m} has token {w} outside 0..{v}"
                )));
            }
        }
        Ok(())
    }
}

/// Per-token topic labels with the count tables they imply.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignments {
    pub z: Vec<Vec<usize>>,
    /// `M x K`
    pub count_doc_topic: Array2<u32>,
    /// `K x V`
    pub count_topic_word: Array2<u32>,
    pub count_topic: Vec<u64>,
}

impl Assignments {
    /// Tallies the count tables implied by `z` over `docs`.
    pub fn recount(z: Vec<Vec<usize>>, docs: &[Vec<usize>], k: usize, v: usize) -> Result<Self> {
        if z.len() != docs.len() {
            return Err(Error::Input(
                "assignment and corpus document counts differ".into(),
            ));
        }
        let mut count_doc_topic = Array2::zeros((docs.len(), k));
        let mut count_topic_word = Array2::zeros((k, v));
        let mut count_topic = vec![0u64; k];
        for (m, (labels, doc)) in z.iter().zip(docs).enumerate() {
            if labels.len() != doc.len() {
                return Err(Error::Input(format!(
                    "document {m} has mismatched assignment length"
                )));
            }
            for (&t, &w) in labels.iter().zip(doc) {
                if t >= k || w >= v {
                    return Err(Error::Input(format!("label {t} or word {w} out of range")));
                }
                count_doc_topic[[m, t]] += 1;
                count_topic_word[[t, w]] += 1;
                count_topic[t] += 1;
            }
        }
        Ok(Self {
            z,
            count_doc_topic,
            count_topic_word,
            count_topic,
        })
    }

    pub fn num_topics(&self) -> usize {
        self.count_topic.len()
    }
}
