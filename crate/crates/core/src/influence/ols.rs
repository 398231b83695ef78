use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Columns whose scaled QR pivot falls below this fraction of the largest
/// pivot are treated as linearly dependent.
pub(crate) const RANK_TOL: f64 = 1e-10;

/// Ordinary least squares fit with classical (homoskedastic) inference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionFit {
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub p_values: Vec<f64>,
    /// `1 - SSR/SST` clamped to [0, 1]; 0 when the response is constant.
    pub r_squared: f64,
    pub residuals: Vec<f64>,
    pub ssr: f64,
    pub n: usize,
}

/// Least squares on column-normalised `x` via Householder QR. Returns the
/// coefficients, residuals and `(X^T X)^{-1}` in the original scaling.
pub(crate) fn least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>, DMatrix<f64>)> {
    let (n, k) = x.shape();
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    if n <= k {
        return Err(Error::InsufficientData(format!("{n} observations for {k} coefficients")));
    }
    let scale: Vec<f64> = x.column_iter().map(|c| c.norm()).collect();
    let mut xs = x.clone();
    for (j, s) in scale.iter().enumerate() {
        if *s > 0.0 {
            xs.column_mut(j).unscale_mut(*s);
        }
    }
    let qr = xs.qr();
    let r = qr.r();
    let pivots: Vec<f64> = (0..k).map(|i| r[(i, i)].abs()).collect();
    let largest = pivots.iter().cloned().fold(0.0, f64::max);
    let rank = pivots.iter().filter(|p| **p > RANK_TOL * largest).count();
    if rank < k || scale.contains(&0.0) {
        return Err(Error::RankDeficient { cols: k, rank: rank.min(scale.iter().filter(|s| **s > 0.0).count()) });
    }
    let qty = qr.q().transpose() * y;
    let beta_s = r.solve_upper_triangular(&qty).ok_or_else(|| Error::Singular("R factor".into()))?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or_else(|| Error::Singular("R factor".into()))?;
    let cov_s = &r_inv * r_inv.transpose();
    let beta = DVector::from_iterator(k, beta_s.iter().zip(&scale).map(|(b, s)| b / s));
    let cov = DMatrix::from_fn(k, k, |i, j| cov_s[(i, j)] / (scale[i] * scale[j]));
    let resid = y - x * &beta;
    Ok((beta, resid, cov))
}

/// Fits `y = X w + e`. `x` must already contain an intercept column if one
/// is wanted.
pub fn fit_ols(x: &DMatrix<f64>, y: &[f64]) -> Result<RegressionFit> {
    let yv = DVector::from_column_slice(y);
    let (beta, resid, cov) = least_squares(x, &yv)?;
    let (n, k) = x.shape();
    let df = (n - k) as f64;
    let ssr = resid.norm_squared();
    let sigma2 = ssr / df;
    let mean = yv.mean();
    let sst: f64 = yv.iter().map(|v| (v - mean).powi(2)).sum();
    let r_squared = if sst > 0.0 { (1.0 - ssr / sst).clamp(0.0, 1.0) } else { 0.0 };
    let t_dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::InsufficientData(e.to_string()))?;

    let mut std_errors = Vec::with_capacity(k);
    let mut t_stats = Vec::with_capacity(k);
    let mut p_values = Vec::with_capacity(k);
    for j in 0..k {
        let se = (sigma2 * cov[(j, j)]).sqrt();
        let t = beta[j] / se;
        let p = if t.is_nan() { 1.0 } else { (2.0 * t_dist.sf(t.abs())).min(1.0) };
        std_errors.push(se);
        t_stats.push(t);
        p_values.push(p);
    }
    Ok(RegressionFit {
        coefficients: beta.iter().copied().collect(),
        std_errors,
        t_stats,
        p_values,
        r_squared,
        residuals: resid.iter().copied().collect(),
        ssr,
        n,
    })
}
