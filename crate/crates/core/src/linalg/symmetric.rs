use super::{householder, sweep_budget};
use crate::error::{Error, Result};

/// Eigenvalues of a symmetric matrix, sorted descending.
///
/// Householder reduction to tridiagonal form followed by implicit QL sweeps
/// with Wilkinson-type shifts. Only the lower triangle is trusted to be
/// symmetric with the upper one; callers pass exactly symmetric input.
pub fn symmetric_eigenvalues(a: &[f64], n: usize) -> Result<Vec<f64>> {
    if a.len() != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, got: a.len() });
    }
    let (mut d, mut e) = tridiagonalize(a.to_vec(), n);
    implicit_ql(&mut d, &mut e)?;
    d.sort_by(|x, y| y.total_cmp(x));
    Ok(d)
}

/// Returns the diagonal and the super-diagonal (`e[i]` couples `i` and `i+1`,
/// `e[n-1] = 0`).
fn tridiagonalize(mut a: Vec<f64>, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut p = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let x: Vec<f64> = (k + 1..n).map(|i| a[i * n + k]).collect();
        let (v, beta, alpha) = householder(&x);
        if beta == 0.0 {
            continue;
        }
        let m = n - k - 1;
        let off = k + 1;
        // p = beta * A22 v
        for i in 0..m {
            p[i] = beta * (0..m).map(|j| a[(off + i) * n + off + j] * v[j]).sum::<f64>();
        }
        // w = p - (beta/2)(p.v) v ; A22 -= v w^T + w v^T
        let kappa = 0.5 * beta * (0..m).map(|i| p[i] * v[i]).sum::<f64>();
        for i in 0..m {
            p[i] -= kappa * v[i];
        }
        for i in 0..m {
            for j in 0..m {
                a[(off + i) * n + off + j] -= v[i] * p[j] + p[i] * v[j];
            }
        }
        a[off * n + k] = alpha;
        a[k * n + off] = alpha;
        for i in off + 1..n {
            a[i * n + k] = 0.0;
            a[k * n + i] = 0.0;
        }
    }
    let d = (0..n).map(|i| a[i * n + i]).collect();
    let e = (0..n).map(|i| if i + 1 < n { a[(i + 1) * n + i] } else { 0.0 }).collect();
    (d, e)
}

fn implicit_ql(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    let budget = sweep_budget(n);
    let mut sweeps = 0;
    for l in 0..n {
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > budget {
                return Err(Error::NoConvergence(budget));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
