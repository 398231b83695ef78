use serde::Serialize;

use super::std_normal_cdf;
use crate::error::{Error, Result};

const SERIES_TERMS: usize = 20;

/// One-sample Kolmogorov-Smirnov result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub d_stat: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Tests `samples` against a fully specified `N(mean, variance)`.
pub fn ks_test(samples: &[f64], mean: f64, variance: f64) -> Result<KsResult> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("KS test on an empty sample".into()));
    }
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(Error::param("variance", format!("must be finite and > 0, got {variance}")));
    }
    let sd = variance.sqrt();
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, x) in sorted.iter().enumerate() {
        let g = std_normal_cdf((x - mean) / sd);
        d = d.max((i + 1) as f64 / nf - g).max(g - i as f64 / nf);
    }
    let d = d.clamp(0.0, 1.0);
    Ok(KsResult { d_stat: d, p_value: kolmogorov_sf(nf.sqrt() * d), n })
}

/// Survival function of the Kolmogorov distribution, `P(K > lambda)`.
///
/// The alternating series converges slowly for small `lambda`, where the
/// Jacobi-theta form of the CDF is used instead.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let p = if lambda < 1.18 {
        let pi2 = std::f64::consts::PI.powi(2);
        let cdf: f64 = (1..=SERIES_TERMS)
            .map(|k| {
                let odd = (2 * k - 1) as f64;
                (-odd * odd * pi2 / (8.0 * lambda * lambda)).exp()
            })
            .sum::<f64>()
            * (2.0 * std::f64::consts::PI).sqrt()
            / lambda;
        1.0 - cdf
    } else {
        2.0 * (1..=SERIES_TERMS)
            .map(|k| {
                let kf = k as f64;
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * kf * kf * lambda * lambda).exp()
            })
            .sum::<f64>()
    };
    p.clamp(0.0, 1.0)
}
