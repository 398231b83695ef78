use rand::Rng;
use rand_distr::StandardNormal;

use super::Noise;
use crate::error::{Error, Result};
use crate::graph::TrustMatrix;

/// Per-agent noise variances given the previous opinions.
pub fn noise_variances(noise: &Noise, y_prev: &[f64], a: &TrustMatrix, out: &mut [f64]) -> Result<()> {
    let n = a.n();
    if y_prev.len() != n || out.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y_prev.len().min(out.len()) });
    }
    match *noise {
        Noise::None => out.fill(0.0),
        Noise::Iid { sigma2 } => out.fill(sigma2),
        Noise::GlobalUniqueness { sigma2, beta } => {
            let mean = y_prev.iter().sum::<f64>() / n as f64;
            for (o, y) in out.iter_mut().zip(y_prev) {
                *o = sigma2 * (-beta * (y - mean).powi(2)).exp();
            }
        }
        Noise::LocalUniqueness { sigma2, beta } => {
            for (i, o) in out.iter_mut().enumerate() {
                let yi = y_prev[i];
                let w: f64 = a.row(i).iter().map(|&(j, aij)| aij * (-beta * (yi - y_prev[j]).powi(2)).exp()).sum();
                *o = sigma2 * w;
            }
        }
    }
    Ok(())
}

/// Draws one noise vector. Exactly `n` standard normals are consumed for any
/// noisy regime and none for `Noise::None`.
pub fn sample_noise<R: Rng + ?Sized>(noise: &Noise, y_prev: &[f64], a: &TrustMatrix, rng: &mut R) -> Result<Vec<f64>> {
    let mut var = vec![0.0; a.n()];
    noise_variances(noise, y_prev, a, &mut var)?;
    if matches!(noise, Noise::None) {
        return Ok(var);
    }
    Ok(var.iter().map(|v| v.sqrt() * rng.sample::<f64, _>(StandardNormal)).collect())
}
