use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use super::ols::least_squares;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrangerResult {
    pub f_stat: f64,
    pub p_value: f64,
    pub df1: usize,
    pub df2: usize,
}

/// Lagged design: intercept, `lag` lags of `y`, then (when given) `lag` lags
/// of `x`. Row `r` predicts `y[lag + r]`.
fn design(y: &[f64], x: Option<&[f64]>, lag: usize) -> DMatrix<f64> {
    let rows = y.len() - lag;
    let cols = 1 + lag * if x.is_some() { 2 } else { 1 };
    DMatrix::from_fn(rows, cols, |r, c| {
        let t = lag + r;
        match c {
            0 => 1.0,
            c if c <= lag => y[t - c],
            c => x.expect("x lags requested")[t - (c - lag)],
        }
    })
}

/// Joint F-test that lags `1..=max_lag` of `x` add nothing to an
/// autoregression of `y` on its own lags.
pub fn granger_test(x: &[f64], y: &[f64], max_lag: usize) -> Result<GrangerResult> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: y.len(), got: x.len() });
    }
    if max_lag == 0 {
        return Err(Error::param("max_lag", "must be >= 1"));
    }
    let len = y.len();
    if len <= 3 * max_lag + 3 {
        return Err(Error::InsufficientData(format!("series of length {len} for max_lag {max_lag}")));
    }
    let target = DVector::from_column_slice(&y[max_lag..]);
    let (_, resid_r, _) = least_squares(&design(y, None, max_lag), &target)?;
    let (_, resid_u, _) = least_squares(&design(y, Some(x), max_lag), &target)?;
    let rss_r = resid_r.norm_squared();
    let rss_u = resid_u.norm_squared();
    let df1 = max_lag;
    let df2 = len - max_lag - 2 * max_lag - 1;
    let f_stat = (((rss_r - rss_u) / df1 as f64) / (rss_u / df2 as f64)).max(0.0);
    let p_value = if rss_u == 0.0 {
        if rss_r > 0.0 {
            0.0
        } else {
            1.0
        }
    } else {
        let dist = FisherSnedecor::new(df1 as f64, df2 as f64).map_err(|e| Error::InsufficientData(e.to_string()))?;
        dist.sf(f_stat).clamp(0.0, 1.0)
    };
    Ok(GrangerResult { f_stat, p_value, df1, df2 })
}

/// p-value of [`granger_test`].
pub fn granger_pvalue(x: &[f64], y: &[f64], max_lag: usize) -> Result<f64> {
    granger_test(x, y, max_lag).map(|r| r.p_value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rng_from_seed(seed);
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    #[test]
    fn strong_lagged_signal() {
        let x = noise(500, 1);
        let e = noise(500, 2);
        let y: Vec<f64> = (0..500).map(|t| if t == 0 { e[0] } else { 0.8 * x[t - 1] + 0.1 * e[t] }).collect();
        assert!(granger_pvalue(&x, &y, 2).unwrap() < 1e-6);
    }

    #[test]
    fn identical_series_are_collinear() {
        let x = noise(200, 3);
        assert!(matches!(granger_pvalue(&x, &x, 2), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn short_series_rejected() {
        let x = noise(9, 4);
        assert!(matches!(granger_pvalue(&x, &x, 2), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn degrees_of_freedom() {
        let r = granger_test(&noise(100, 5), &noise(100, 6), 3).unwrap();
        assert_eq!((r.df1, r.df2), (3, 100 - 3 - 7));
    }
}
