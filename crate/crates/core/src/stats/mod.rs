//! Dispersion measures, one-sample Kolmogorov-Smirnov against a Gaussian, and
//! Benjamini-Hochberg step-up correction.

mod ks;

pub use ks::{kolmogorov_sf, ks_test, KsResult};

use serde::Serialize;

use crate::error::{Error, Result};

/// Gaussian CDF at `x` for `N(mean, variance)`.
pub fn normal_cdf(x: f64, mean: f64, variance: f64) -> Result<f64> {
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(Error::param("variance", format!("must be finite and > 0, got {variance}")));
    }
    Ok(std_normal_cdf((x - mean) / variance.sqrt()))
}

pub(crate) fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Result of a Benjamini-Hochberg step-up procedure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BhOutcome {
    /// Per hypothesis, in input order.
    pub rejected: Vec<bool>,
    /// Largest rank `k` with `p_(k) <= k alpha / m`; 0 when nothing is rejected.
    pub adjusted_threshold_rank: usize,
    pub alpha: f64,
}

impl BhOutcome {
    pub fn rejection_count(&self) -> usize {
        self.adjusted_threshold_rank
    }
}

/// Benjamini-Hochberg FDR control at level `alpha`. Equal p-values are
/// ordered by input index.
pub fn bh_correct(p_values: &[f64], alpha: f64) -> Result<BhOutcome> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("alpha", format!("must lie in (0, 1), got {alpha}")));
    }
    if let Some(p) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::param("p_values", format!("{p} is not a probability")));
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]).then(a.cmp(&b)));
    let k = (1..=m)
        .rev()
        .find(|&k| p_values[order[k - 1]] <= k as f64 * alpha / m as f64)
        .unwrap_or(0);
    let mut rejected = vec![false; m];
    for &i in &order[..k] {
        rejected[i] = true;
    }
    Ok(BhOutcome { rejected, adjusted_threshold_rank: k, alpha })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Dispersion {
    /// Mean-square deviation from the sample mean (divides by n).
    pub msd: f64,
    /// Median absolute deviation from the sample median (unscaled).
    pub mad: f64,
}

pub fn dispersion(samples: &[f64]) -> Result<Dispersion> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("dispersion of an empty sample".into()));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let msd = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let med = median(samples.to_vec());
    let mad = median(samples.iter().map(|x| (x - med).abs()).collect());
    Ok(Dispersion { msd, mad })
}

/// Median of a non-empty sample; the mean of the two middle values when even.
pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_values() {
        assert_eq!(normal_cdf(2.0, 2.0, 3.0).unwrap(), 0.5);
        assert!((normal_cdf(1.0, 0.0, 1.0).unwrap() - 0.841_344_746_068_542_9).abs() < 1e-12);
        assert_eq!(normal_cdf(f64::NEG_INFINITY, 0.0, 1.0).unwrap(), 0.0);
        assert!(normal_cdf(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn bh_examples() {
        let all = bh_correct(&[0.005, 0.01, 0.03, 0.04], 0.05).unwrap();
        assert_eq!(all.rejected, vec![true; 4]);
        assert_eq!(bh_correct(&[0.9, 0.95], 0.05).unwrap().adjusted_threshold_rank, 0);
        assert!(bh_correct(&[0.04], 0.05).unwrap().rejected[0]);
        assert!(bh_correct(&[0.04], 1.0).is_err());
    }

    #[test]
    fn bh_step_up_rescues_earlier_ranks() {
        // p_(1) = 0.02 > 0.05/3 but p_(2) = 0.03 <= 2 * 0.05 / 3
        let out = bh_correct(&[0.3, 0.03, 0.02], 0.05).unwrap();
        assert_eq!(out.rejected, vec![false, true, true]);
    }

    #[test]
    fn bh_ties_follow_input_order() {
        let out = bh_correct(&[0.01, 0.01, 0.5], 0.05).unwrap();
        assert_eq!(out.rejected, vec![true, true, false]);
    }

    #[test]
    fn dispersion_examples() {
        assert_eq!(dispersion(&[3.0; 5]).unwrap(), Dispersion { msd: 0.0, mad: 0.0 });
        assert_eq!(dispersion(&[-1.0, 1.0]).unwrap(), Dispersion { msd: 1.0, mad: 1.0 });
        assert!(dispersion(&[]).is_err());
    }
}
