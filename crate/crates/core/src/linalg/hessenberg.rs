use super::{householder, sweep_budget};
use crate::error::{Error, Result};

/// Eigenvalues `(re, im)` of a general real matrix, sorted by real part
/// descending, then imaginary part descending.
///
/// Householder reduction to upper Hessenberg form followed by Francis
/// double-shift QR. Complex eigenvalues come out in conjugate pairs.
pub fn general_eigenvalues(a: &[f64], n: usize) -> Result<Vec<(f64, f64)>> {
    if a.len() != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, got: a.len() });
    }
    let mut h = a.to_vec();
    reduce_hessenberg(&mut h, n);
    let mut ev = francis_qr(h, n)?;
    ev.sort_by(|x, y| y.0.total_cmp(&x.0).then(y.1.total_cmp(&x.1)));
    Ok(ev)
}

fn reduce_hessenberg(a: &mut [f64], n: usize) {
    for k in 0..n.saturating_sub(2) {
        let x: Vec<f64> = (k + 1..n).map(|i| a[i * n + k]).collect();
        let (v, beta, _) = householder(&x);
        if beta == 0.0 {
            continue;
        }
        let off = k + 1;
        // A <- P A : rows off.., all columns from k
        for j in k..n {
            let s = beta * (0..v.len()).map(|i| v[i] * a[(off + i) * n + j]).sum::<f64>();
            for i in 0..v.len() {
                a[(off + i) * n + j] -= s * v[i];
            }
        }
        // A <- A P : all rows, columns off..
        for i in 0..n {
            let s = beta * (0..v.len()).map(|j| a[i * n + off + j] * v[j]).sum::<f64>();
            for j in 0..v.len() {
                a[i * n + off + j] -= s * v[j];
            }
        }
        for i in off + 1..n {
            a[i * n + k] = 0.0;
        }
    }
}

/// Double-shift QR on an upper Hessenberg matrix (1-based indexing inside
/// to keep the deflation bookkeeping readable).
fn francis_qr(mut h: Vec<f64>, n: usize) -> Result<Vec<(f64, f64)>> {
    let idx = |i: usize, j: usize| (i - 1) * n + (j - 1);
    let mut wr = vec![0.0; n + 1];
    let mut wi = vec![0.0; n + 1];
    let budget = sweep_budget(n);
    let mut sweeps = 0usize;

    let mut anorm = 0.0;
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm += h[idx(i, j)].abs();
        }
    }
    let mut nn = n;
    let mut t = 0.0;
    while nn >= 1 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l >= 2 {
                // normwise test: a relative one never deflates blocks of
                // numerically zero eigenvalues
                let s = (h[idx(l - 1, l - 1)].abs() + h[idx(l, l)].abs()).max(anorm);
                if h[idx(l, l - 1)].abs() <= f64::EPSILON * s {
                    h[idx(l, l - 1)] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = h[idx(nn, nn)];
            if l == nn {
                wr[nn] = x + t;
                wi[nn] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = h[idx(nn - 1, nn - 1)];
            let mut w = h[idx(nn, nn - 1)] * h[idx(nn - 1, nn)];
            if l == nn - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + z.copysign(p);
                    wr[nn - 1] = x + z;
                    wr[nn] = if z != 0.0 { x - w / z } else { x + z };
                    wi[nn - 1] = 0.0;
                    wi[nn] = 0.0;
                } else {
                    wr[nn - 1] = x + p;
                    wr[nn] = x + p;
                    wi[nn - 1] = z;
                    wi[nn] = -z;
                }
                nn -= 2;
                break;
            }
            sweeps += 1;
            if sweeps > budget || its >= 60 {
                return Err(Error::NoConvergence(budget));
            }
            if its == 10 || its == 20 || its == 40 {
                // exceptional shift
                t += x;
                for i in 1..=nn {
                    h[idx(i, i)] -= x;
                }
                let s = h[idx(nn, nn - 1)].abs() + h[idx(nn - 1, nn - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;

            let (mut p, mut q, mut r);
            let mut m = nn - 2;
            loop {
                let z = h[idx(m, m)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / h[idx(m + 1, m)] + h[idx(m, m + 1)];
                q = h[idx(m + 1, m + 1)] - z - rr - ss;
                r = h[idx(m + 2, m + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = h[idx(m, m - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (h[idx(m - 1, m - 1)].abs() + z.abs() + h[idx(m + 1, m + 1)].abs());
                if u <= f64::EPSILON * v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nn {
                h[idx(i, i - 2)] = 0.0;
                if i != m + 2 {
                    h[idx(i, i - 3)] = 0.0;
                }
            }
            for k in m..nn {
                if k != m {
                    p = h[idx(k, k - 1)];
                    q = h[idx(k + 1, k - 1)];
                    r = if k != nn - 1 { h[idx(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s == 0.0 {
                    continue;
                }
                if k == m {
                    if l != m {
                        h[idx(k, k - 1)] = -h[idx(k, k - 1)];
                    }
                } else {
                    h[idx(k, k - 1)] = -s * x;
                }
                p += s;
                x = p / s;
                y = q / s;
                let z = r / s;
                q /= p;
                r /= p;
                for j in k..=nn {
                    let mut pp = h[idx(k, j)] + q * h[idx(k + 1, j)];
                    if k != nn - 1 {
                        pp += r * h[idx(k + 2, j)];
                        h[idx(k + 2, j)] -= pp * z;
                    }
                    h[idx(k + 1, j)] -= pp * y;
                    h[idx(k, j)] -= pp * x;
                }
                let mmin = nn.min(k + 3);
                for i in l..=mmin {
                    let mut pp = x * h[idx(i, k)] + y * h[idx(i, k + 1)];
                    if k != nn - 1 {
                        pp += z * h[idx(i, k + 2)];
                        h[idx(i, k + 2)] -= pp * r;
                    }
                    h[idx(i, k + 1)] -= pp * q;
                    h[idx(i, k)] -= pp;
                }
            }
            if l >= nn - 1 {
                break;
            }
        }
    }
    Ok((1..=n).map(|i| (wr[i], wi[i])).collect())
}
