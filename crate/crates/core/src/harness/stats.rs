//! Box-plot statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::Algorithm;

/// Five-number summary plus Tukey outliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

/// Statistics for one (M, algorithm) group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    #[serde(rename = "M")]
    pub m: usize,
    pub algorithm: Algorithm,
    /// Per-corpus values in corpus-index order.
    pub values: Vec<f64>,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

impl GroupSummary {
    pub fn new(m: usize, algorithm: Algorithm, values: Vec<f64>) -> Result<Self> {
        let s = boxplot_stats(&values)?;
        Ok(Self {
            m,
            algorithm,
            values,
            median: s.median,
            q1: s.q1,
            q3: s.q3,
            whisker_low: s.whisker_low,
            whisker_high: s.whisker_high,
            outliers: s.outliers,
        })
    }

    pub fn stats(&self) -> BoxStats {
        BoxStats {
            median: self.median,
            q1: self.q1,
            q3: self.q3,
            whisker_low: self.whisker_low,
            whisker_high: self.whisker_high,
            outliers: self.outliers.clone(),
        }
    }
}

/// Type-7 quantile of already sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Quartiles by type-7 interpolation, whiskers at the most extreme points
/// within 1.5 IQR of the box, everything beyond listed (ascending) as outliers.
pub fn boxplot_stats(values: &[f64]) -> Result<BoxStats> {
    if values.is_empty() {
        return Err(Error::Input(
            "box-plot statistics need at least one value".into(),
        ));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("box-plot values must be finite".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let median = quantile_sorted(&sorted, 0.5);
    let q3 = quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside = |v: &f64| *v >= lo_fence && *v <= hi_fence;
    // The median is always inside the fences, so both finds succeed.
    let whisker_low = *sorted
        .iter()
        .find(|v| inside(v))
        .expect("median lies inside");
    let whisker_high = *sorted
        .iter()
        .rev()
        .find(|v| inside(v))
        .expect("median lies inside");
    let outliers = sorted.iter().copied().filter(|v| !inside(v)).collect();
    Ok(BoxStats {
        median,
        q1,
        q3,
        whisker_low,
        whisker_high,
        outliers,
    })
}

/// Median by the same interpolation rule.
pub fn median(values: &[f64]) -> Result<f64> {
    Ok(boxplot_stats(values)?.median)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_values() {
        let s = boxplot_stats(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!((s.median, s.q1, s.q3), (2.5, 1.75, 3.25));
        assert!(s.outliers.is_empty());
        assert_eq!((s.whisker_low, s.whisker_high), (1.0, 4.0));
    }

    #[test]
    fn constant_values() {
        let s = boxplot_stats(&[0.3; 6]).unwrap();
        assert_eq!((s.median, s.q1, s.q3), (0.3, 0.3, 0.3));
        assert!(s.outliers.is_empty());
    }

    #[test]
    fn far_point_is_an_outlier() {
        let s = boxplot_stats(&[1.0, 1.0, 1.0, 1.0, 100.0]).unwrap();
        assert_eq!(s.outliers, vec![100.0]);
        assert_eq!(s.whisker_high, 1.0);
    }

    #[test]
    fn singleton_and_errors() {
        let g = GroupSummary::new(50, Algorithm::Gibbs, vec![0.2]).unwrap();
        assert_eq!(
            (g.median, g.q1, g.q3, g.whisker_low, g.whisker_high),
            (0.2, 0.2, 0.2, 0.2, 0.2)
        );
        assert!(matches!(boxplot_stats(&[]), Err(Error::Input(_))));
        assert!(boxplot_stats(&[f64::NAN]).is_err());
    }

    #[test]
    fn summary_field_names() {
        let g = GroupSummary::new(50, Algorithm::Vb, vec![1.0, 2.0]).unwrap();
        let v = serde_json::to_value(&g).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(
            keys,
            [
                "M",
                "algorithm",
                "median",
                "outliers",
                "q1",
                "q3",
                "values",
                "whisker_high",
                "whisker_low"
            ]
        );
        assert_eq!(v["algorithm"], "vb");
    }
}
