use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smoothing added to extracted topics before taking divergences.
pub const DEFAULT_SMOOTHING: f64 = 1e-12;

/// Forward Kullback-Leibler divergence `Σ p_i ln(p_i / q_i)` in nats.
///
/// Terms with `p_i = 0` contribute nothing. Fails if `q_i = 0` where `p_i > 0`.
pub fn kld(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Input(format!(
            "lengths differ: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    let mut total = 0.0;
    for (i, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if pi > 0.0 {
            if qi <= 0.0 {
                return Err(Error::Divergence { index: i });
            }
            total += pi * (pi / qi).ln();
        }
    }
    Ok(total.max(0.0))
}

/// `(q + epsilon)` renormalized to a probability vector.
pub fn smooth_distribution(q: &[f64], epsilon: f64) -> Result<Vec<f64>> {
    if q.iter().any(|x| !(*x >= 0.0 && x.is_finite())) || epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::Input(
            "smoothing needs a finite nonnegative vector".into(),
        ));
    }
    let total: f64 = q.iter().map(|x| x + epsilon).sum();
    if total <= 0.0 {
        return Err(Error::Input("cannot normalize an all-zero vector".into()));
    }
    Ok(q.iter().map(|x| (x + epsilon) / total).collect())
}

/// Result of matching every ground-truth topic to its nearest extracted topic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// `alignment[k]` is the extracted topic chosen for ground-truth topic `k`.
    pub alignment: Vec<usize>,
    pub per_topic_kld: Vec<f64>,
    pub average_kld: f64,
}

/// Aligns with [`DEFAULT_SMOOTHING`].
pub fn align_topics(truth_phi: &Array2<f64>, fit_phi: &Array2<f64>) -> Result<EvalReport> {
    align_topics_with(truth_phi, fit_phi, DEFAULT_SMOOTHING)
}

/// For each ground-truth row picks the extracted row with the smallest
/// forward KLD (lowest index on ties). Extracted topics may be picked more
/// than once.
pub fn align_topics_with(
    truth_phi: &Array2<f64>,
    fit_phi: &Array2<f64>,
    epsilon: f64,
) -> Result<EvalReport> {
    if truth_phi.ncols() != fit_phi.ncols() {
        return Err(Error::Input(format!(
            "vocabulary sizes differ: truth {} vs fit {}",
            truth_phi.ncols(),
            fit_phi.ncols()
        )));
    }
    if truth_phi.nrows() == 0 || fit_phi.nrows() == 0 {
        return Err(Error::Input(
            "both topic matrices need at least one row".into(),
        ));
    }
    let smoothed: Vec<Vec<f64>> = fit_phi
        .rows()
        .into_iter()
        .map(|q| smooth_distribution(&q.to_vec(), epsilon))
        .collect::<Result<_>>()?;
    let mut alignment = Vec::with_capacity(truth_phi.nrows());
    let mut per_topic_kld = Vec::with_capacity(truth_phi.nrows());
    for p in truth_phi.rows() {
        let p = p.to_vec();
        let mut best = (0, f64::INFINITY);
        for (j, q) in smoothed.iter().enumerate() {
            let d = kld(&p, q)?;
            if d < best.1 {
                best = (j, d);
            }
        }
        alignment.push(best.0);
        per_topic_kld.push(best.1);
    }
    let average_kld = per_topic_kld.iter().sum::<f64>() / per_topic_kld.len() as f64;
    Ok(EvalReport {
        alignment,
        per_topic_kld,
        average_kld,
    })
}
