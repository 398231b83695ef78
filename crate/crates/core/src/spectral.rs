//! Eigenvalues of trust matrices and the closed-form diversity predictions
//! built from them.

use std::io::Write;

use nalgebra::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::TrustMatrix;
use crate::linalg;

/// Imaginary parts at or below this magnitude count as zero.
const IMAG_TOL: f64 = 1e-12;

/// Eigenvalues sorted by real part, largest first.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Spectrum {
    /// A real spectrum; values are sorted descending.
    pub fn from_real(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        let im = vec![0.0; values.len()];
        Spectrum { re: values, im }
    }

    /// A possibly complex spectrum given as `(re, im)` pairs.
    pub fn from_complex(mut values: Vec<(f64, f64)>) -> Self {
        values.sort_by(|x, y| y.0.total_cmp(&x.0).then(y.1.total_cmp(&x.1)));
        let (re, im) = values.into_iter().unzip();
        Spectrum { re, im }
    }

    pub fn n(&self) -> usize {
        self.re.len()
    }

    /// Real parts, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.re
    }

    pub fn imaginary_parts(&self) -> &[f64] {
        &self.im
    }

    pub fn is_real(&self) -> bool {
        self.im.iter().all(|v| v.abs() <= IMAG_TOL)
    }

    /// The spectrum with imaginary parts discarded.
    pub fn real_parts(&self) -> Spectrum {
        Spectrum::from_real(self.re.clone())
    }

    pub fn sum(&self) -> f64 {
        self.re.iter().sum()
    }

    /// Writes a CSV with header `eigenvalue`, or `re,im` when complex.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        if self.is_real() {
            out.write_record(["eigenvalue"])?;
            for v in &self.re {
                out.write_record([v.to_string()])?;
            }
        } else {
            out.write_record(["re", "im"])?;
            for (r, i) in self.re.iter().zip(&self.im) {
                out.write_record([r.to_string(), i.to_string()])?;
            }
        }
        out.flush()?;
        Ok(())
    }

    fn complex(&self) -> impl Iterator<Item = Complex<f64>> + '_ {
        self.re.iter().zip(&self.im).map(|(&r, &i)| Complex::new(r, i))
    }
}

/// Eigenvalues of `a`.
///
/// Reversible matrices (every row-normalised undirected graph) are similar to
/// the symmetric `sqrt(A_ij A_ji)`, so their spectrum is computed with the
/// symmetric solver and is exactly real. Anything else goes through the
/// general solver.
pub fn spectrum(a: &TrustMatrix) -> Result<Spectrum> {
    let n = a.n();
    if a.is_directed() {
        Ok(Spectrum::from_complex(linalg::general_eigenvalues(a.as_slice(), n)?))
    } else {
        Ok(Spectrum::from_real(linalg::symmetric_eigenvalues(&a.symmetrized(), n)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiversityKind {
    ExactUndirected,
    /// Not a guaranteed bound: sparse non-normal matrices can exceed it.
    UpperBoundDirected,
}

/// A predicted stationary opinion diversity and the inputs that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiversityPrediction {
    pub d: f64,
    pub kind: DiversityKind,
    pub sigma2: f64,
    pub susceptibility: Option<f64>,
    pub xi2: Option<f64>,
}

fn check_sigma2(sigma2: f64) -> Result<()> {
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(Error::param("sigma2", format!("must be finite and >= 0, got {sigma2}")));
    }
    Ok(())
}

fn real_checked(s: &Spectrum) -> Result<&[f64]> {
    if !s.is_real() {
        return Err(Error::ComplexSpectrum);
    }
    if s.n() == 0 {
        return Err(Error::param("spectrum", "is empty"));
    }
    if let Some(l) = s.re.iter().find(|l| l.abs() >= 1.0) {
        return Err(Error::NonStationary(format!("eigenvalue {l} has modulus >= 1")));
    }
    Ok(&s.re)
}

/// `1 / (1 - lambda^2)` per eigenvalue, in spectrum order.
pub fn marginal_contributions(s: &Spectrum) -> Result<Vec<f64>> {
    Ok(real_checked(s)?.iter().map(|l| 1.0 / (1.0 - l * l)).collect())
}

/// Stationary diversity of noisy DeGroot dynamics:
/// `sigma2 / N * sum 1 / (1 - lambda_i^2)`.
pub fn diversity_degroot(s: &Spectrum, sigma2: f64) -> Result<DiversityPrediction> {
    check_sigma2(sigma2)?;
    let total: f64 = marginal_contributions(s)?.iter().sum();
    Ok(DiversityPrediction {
        d: sigma2 * (total / s.n() as f64),
        kind: DiversityKind::ExactUndirected,
        sigma2,
        susceptibility: None,
        xi2: None,
    })
}

/// Stationary diversity of noisy Friedkin-Johnsen dynamics with uniform
/// susceptibility and i.i.d. prejudices of variance `xi2`:
/// `(sigma2 + (1 - s)^2 xi2) / N * sum 1 / (1 - s^2 lambda_i^2)`.
pub fn diversity_fj(s: &Spectrum, sigma2: f64, xi2: f64, susceptibility: f64) -> Result<DiversityPrediction> {
    check_sigma2(sigma2)?;
    if !(xi2 >= 0.0 && xi2.is_finite()) {
        return Err(Error::param("xi2", format!("must be finite and >= 0, got {xi2}")));
    }
    if !(0.0..=1.0).contains(&susceptibility) {
        return Err(Error::param("susceptibility", format!("must lie in [0, 1], got {susceptibility}")));
    }
    if !s.is_real() {
        return Err(Error::ComplexSpectrum);
    }
    if s.n() == 0 {
        return Err(Error::param("spectrum", "is empty"));
    }
    let s2 = susceptibility * susceptibility;
    let mut total = 0.0;
    for l in &s.re {
        let x = s2 * l * l;
        if x >= 1.0 {
            return Err(Error::NonStationary(format!("s * lambda = {} has modulus >= 1", susceptibility * l)));
        }
        total += 1.0 / (1.0 - x);
    }
    let scale = sigma2 + (1.0 - susceptibility).powi(2) * xi2;
    Ok(DiversityPrediction {
        d: scale * (total / s.n() as f64),
        kind: DiversityKind::ExactUndirected,
        sigma2,
        susceptibility: Some(susceptibility),
        xi2: Some(xi2),
    })
}

/// Spectral upper estimate of stationary DeGroot diversity for a directed
/// substochastic matrix: `sigma2 / N * sum_i sum_j 1 / (1 - lambda_i lambda_j)`.
///
/// The double sum runs over the complex spectrum; it equals
/// `sum_k (Tr A^k)^2` and is therefore real. It dominates the exact value for
/// normal matrices and for dense random ones, but strongly non-normal sparse
/// matrices can exceed it.
pub fn diversity_directed_bound(s: &Spectrum, sigma2: f64) -> Result<DiversityPrediction> {
    check_sigma2(sigma2)?;
    if s.n() == 0 {
        return Err(Error::param("spectrum", "is empty"));
    }
    let ev: Vec<Complex<f64>> = s.complex().collect();
    let one = Complex::new(1.0, 0.0);
    let mut total = Complex::new(0.0, 0.0);
    for li in &ev {
        for lj in &ev {
            let prod = li * lj;
            if prod.norm() >= 1.0 {
                return Err(Error::NonStationary(format!("eigenvalue product {prod} has modulus >= 1")));
            }
            total += one / (one - prod);
        }
    }
    Ok(DiversityPrediction {
        d: sigma2 * (total.re / s.n() as f64),
        kind: DiversityKind::UpperBoundDirected,
        sigma2,
        susceptibility: None,
        xi2: None,
    })
}
