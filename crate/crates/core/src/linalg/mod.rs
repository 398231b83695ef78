//! Dense eigenvalue solvers on row-major `n x n` slices.

mod hessenberg;
mod symmetric;

pub use hessenberg::general_eigenvalues;
pub use symmetric::symmetric_eigenvalues;

/// Sweep budget shared by both solvers: `100 * n` QR sweeps in total.
pub(crate) fn sweep_budget(n: usize) -> usize {
    100 * n.max(1)
}

/// Householder vector for `x`: returns `(v, beta, alpha)` such that
/// `(I - beta v v^T) x = alpha e_0`. `beta = 0` when `x` is already aligned.
pub(crate) fn householder(x: &[f64]) -> (Vec<f64>, f64, f64) {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || x[1..].iter().all(|&v| v == 0.0) {
        return (vec![0.0; x.len()], 0.0, x[0]);
    }
    // scaling keeps the squares clear of underflow and overflow
    let mut v: Vec<f64> = x.iter().map(|a| a / scale).collect();
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let alpha = if v[0] > 0.0 { -norm } else { norm };
    v[0] -= alpha;
    let vv: f64 = v.iter().map(|a| a * a).sum();
    (v, 2.0 / vv, alpha * scale)
}
