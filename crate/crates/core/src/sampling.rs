//! Dirichlet and categorical draws.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};

/// Draws `ln X` for `X ~ Gamma(shape, 1)`.
///
/// Shapes below one use the boost `X = Y * U^(1/shape)` with
/// `Y ~ Gamma(shape + 1, 1)`, kept in log space so that tiny shapes do not
/// underflow to zero.
fn log_gamma_variate<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape >= 1.0 {
        let gamma = Gamma::new(shape, 1.0).expect("shape checked positive");
        gamma.sample(rng).ln()
    } else {
        let gamma = Gamma::new(shape + 1.0, 1.0).expect("shape checked positive");
        let y: f64 = gamma.sample(rng);
        // 1 - U lies in (0, 1], so the log is finite.
        let u = 1.0 - rng.random::<f64>();
        y.ln() + u.ln() / shape
    }
}

/// Samples a probability vector from `Dirichlet(concentration)`.
pub fn sample_dirichlet<R: Rng + ?Sized>(concentration: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    if concentration.is_empty() {
        return Err(Error::Parameter(
            "Dirichlet needs at least one component".into(),
        ));
    }
    if let Some((i, a)) = concentration
        .iter()
        .enumerate()
        .find(|(_, a)| !(a.is_finite() && **a > 0.0))
    {
        return Err(Error::Parameter(format!(
            "Dirichlet concentration[{i}] = {a} must be positive and finite"
        )));
    }
    let logs: Vec<f64> = concentration
        .iter()
        .map(|&a| log_gamma_variate(a, rng))
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    normalize_in_place(&mut out);
    Ok(out)
}

/// Divides by the sum. Callers guarantee a positive sum.
pub(crate) fn normalize_in_place(v: &mut [f64]) {
    let total: f64 = v.iter().sum();
    for x in v.iter_mut() {
        *x /= total;
    }
}

/// Draws an index from a probability vector.
///
/// `p` must be nonnegative and sum to one within `1e-9`. The returned index
/// always has `p[i] > 0`.
pub fn sample_categorical<R: Rng + ?Sized>(p: &[f64], rng: &mut R) -> Result<usize> {
    if p.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::Parameter(
            "categorical probabilities must be finite and nonnegative".into(),
        ));
    }
    let total: f64 = p.iter().sum();
    if total == 0.0 {
        return Err(Error::Parameter(
            "categorical distribution has no mass".into(),
        ));
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Parameter(format!(
            "categorical probabilities sum to {total}, expected 1"
        )));
    }
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &pi) in p.iter().enumerate() {
        if pi > 0.0 {
            acc += pi;
            last_positive = i;
            if u < acc {
                return Ok(i);
            }
        }
    }
    Ok(last_positive)
}

/// Cumulative table for repeated draws from one fixed weight vector.
#[derive(Debug, Clone)]
pub struct CumulativeTable {
    cdf: Vec<f64>,
    last_positive: usize,
}

impl CumulativeTable {
    pub fn new(weights: &[f64]) -> Result<Self> {
        let mut cdf = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        let mut last_positive = None;
        for (i, &w) in weights.iter().enumerate() {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::Parameter(format!(
                    "weight[{i}] = {w} is not a valid mass"
                )));
            }
            if w > 0.0 {
                last_positive = Some(i);
            }
            acc += w;
            cdf.push(acc);
        }
        let last_positive = last_positive
            .ok_or_else(|| Error::Parameter("categorical distribution has no mass".into()))?;
        Ok(Self { cdf, last_positive })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = self.cdf[self.cdf.len() - 1];
        let u = rng.random::<f64>() * total;
        let i = self.cdf.partition_point(|&c| c <= u);
        i.min(self.last_positive)
    }
}
