use std::io::Write;

use nalgebra::DMatrix;
use serde::Serialize;

use super::ols::{fit_ols, RegressionFit};
use crate::error::{Error, Result};
use crate::graph::NetworkFeatures;

/// One network's covariates and response.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkObservation {
    pub id: String,
    pub features: NetworkFeatures,
    pub predicted_d: f64,
    pub realized_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelFit {
    pub name: &'static str,
    /// Term names aligned with the fit's coefficient vector.
    pub terms: Vec<&'static str>,
    pub fit: RegressionFit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionReport {
    /// M1 (topology), M2 (predicted diversity), M3 (both).
    pub models: Vec<ModelFit>,
    /// Observations used by all three models.
    pub used: Vec<String>,
    pub dropped: Vec<String>,
}

impl RegressionReport {
    pub fn model(&self, name: &str) -> Option<&ModelFit> {
        self.models.iter().find(|m| m.name == name)
    }

    /// Writes `model,term,coef,stderr,tstat,pvalue`, then one `r2` row per
    /// model carrying R^2 in the `coef` column.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["model", "term", "coef", "stderr", "tstat", "pvalue"])?;
        for m in &self.models {
            for (j, term) in m.terms.iter().enumerate() {
                out.write_record([
                    m.name.to_string(),
                    term.to_string(),
                    m.fit.coefficients[j].to_string(),
                    m.fit.std_errors[j].to_string(),
                    m.fit.t_stats[j].to_string(),
                    m.fit.p_values[j].to_string(),
                ])?;
            }
        }
        for m in &self.models {
            out.write_record([m.name, "r2", &m.fit.r_squared.to_string(), "", "", ""])?;
        }
        out.flush()?;
        Ok(())
    }
}

const M1_TERMS: [&str; 5] = ["intercept", "avg_shortest_path", "size", "avg_clustering", "density"];
const M2_TERMS: [&str; 2] = ["intercept", "predicted_d"];
const M3_TERMS: [&str; 6] = ["intercept", "avg_shortest_path", "size", "avg_clustering", "density", "predicted_d"];

/// Fits `log y` on topology (M1), on predicted diversity (M2) and on both
/// (M3) over the common set of usable networks. Networks without a defined
/// average path length or with non-positive `y` are dropped from all three.
pub fn run_regressions(observations: &[NetworkObservation]) -> Result<RegressionReport> {
    let mut rows = Vec::new();
    let mut used = Vec::new();
    let mut dropped = Vec::new();
    for o in observations {
        match o.features.avg_shortest_path {
            Some(l) if o.realized_y > 0.0 && o.predicted_d.is_finite() => {
                rows.push([l, o.features.size as f64, o.features.avg_clustering, o.features.density, o.predicted_d, o.realized_y.ln()]);
                used.push(o.id.clone());
            }
            _ => {
                log::warn!("network {}: dropped from regressions (disconnected or non-positive diversity)", o.id);
                dropped.push(o.id.clone());
            }
        }
    }
    if rows.len() <= M3_TERMS.len() {
        return Err(Error::InsufficientData(format!(
            "{} usable networks; the full model needs at least {}",
            rows.len(),
            M3_TERMS.len() + 1
        )));
    }
    let n = rows.len();
    let y: Vec<f64> = rows.iter().map(|r| r[5]).collect();
    let design = |cols: &[usize]| DMatrix::from_fn(n, cols.len() + 1, |i, j| if j == 0 { 1.0 } else { rows[i][cols[j - 1]] });
    let models = vec![
        ModelFit { name: "M1", terms: M1_TERMS.to_vec(), fit: fit_ols(&design(&[0, 1, 2, 3]), &y)? },
        ModelFit { name: "M2", terms: M2_TERMS.to_vec(), fit: fit_ols(&design(&[4]), &y)? },
        ModelFit { name: "M3", terms: M3_TERMS.to_vec(), fit: fit_ols(&design(&[0, 1, 2, 3, 4]), &y)? },
    ];
    Ok(RegressionReport { models, used, dropped })
}
