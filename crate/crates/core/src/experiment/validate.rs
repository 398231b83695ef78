use super::sweep::{er, run_cells, GraphResult, SweepCell};
use super::{ExperimentConfig, ExperimentKind, Table};
use crate::dynamics::{ModelSpec, Noise};
use crate::error::{Error, Result};
use crate::stats::{bh_correct, ks_test, KsResult};

/// KS outcomes for one graph's pooled terminal opinions.
#[derive(Debug, Clone)]
pub struct ValidateRow {
    pub p: f64,
    pub graph: GraphResult,
    /// Against `N(0, sigma2)`.
    pub ks_noise: KsResult,
    /// Against `N(0, predicted d)`.
    pub ks_predicted: KsResult,
    pub reject_noise: bool,
    pub reject_predicted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateSummary {
    /// `None` for the row pooling every p.
    pub p: Option<f64>,
    pub graphs: usize,
    pub reject_noise_rate: f64,
    pub reject_predicted_rate: f64,
    pub mean_predicted_d: f64,
    pub mean_realized_d: f64,
}

#[derive(Debug, Clone)]
pub struct ValidateOutcome {
    pub rows: Vec<ValidateRow>,
    pub alpha: f64,
}

impl ValidateOutcome {
    fn summarize(p: Option<f64>, rows: &[&ValidateRow]) -> ValidateSummary {
        let k = rows.len() as f64;
        let rate = |f: &dyn Fn(&ValidateRow) -> bool| rows.iter().filter(|r| f(r)).count() as f64 / k;
        ValidateSummary {
            p,
            graphs: rows.len(),
            reject_noise_rate: rate(&|r| r.reject_noise),
            reject_predicted_rate: rate(&|r| r.reject_predicted),
            mean_predicted_d: rows.iter().map(|r| r.graph.predicted_d().unwrap_or(f64::NAN)).sum::<f64>() / k,
            mean_realized_d: rows.iter().map(|r| r.graph.ensemble.mean_realized_d()).sum::<f64>() / k,
        }
    }

    /// One summary per p in sweep order, then the pooled summary.
    pub fn summaries(&self) -> Vec<ValidateSummary> {
        let mut ps: Vec<f64> = Vec::new();
        for r in &self.rows {
            if !ps.contains(&r.p) {
                ps.push(r.p);
            }
        }
        let mut out: Vec<ValidateSummary> =
            ps.iter().map(|&p| Self::summarize(Some(p), &self.rows.iter().filter(|r| r.p == p).collect::<Vec<_>>())).collect();
        out.push(Self::summarize(None, &self.rows.iter().collect::<Vec<_>>()));
        out
    }

    pub fn tables(&self) -> Vec<Table> {
        let mut units = Table::new(
            "units",
            &[
                "p",
                "graph",
                "graph_seed",
                "sim_seed",
                "predicted_d",
                "realized_d",
                "centered_d",
                "mad",
                "ks_d_noise",
                "ks_p_noise",
                "reject_noise",
                "ks_d_predicted",
                "ks_p_predicted",
                "reject_predicted",
            ],
        );
        for r in &self.rows {
            let g = &r.graph;
            units.push(vec![
                r.p.to_string(),
                g.graph.to_string(),
                g.graph_seed.to_string(),
                g.sim_seed.to_string(),
                super::fmt_opt(g.predicted_d()),
                g.ensemble.mean_realized_d().to_string(),
                g.ensemble.mean_centered_d().to_string(),
                g.ensemble.mean_mad().to_string(),
                r.ks_noise.d_stat.to_string(),
                r.ks_noise.p_value.to_string(),
                r.reject_noise.to_string(),
                r.ks_predicted.d_stat.to_string(),
                r.ks_predicted.p_value.to_string(),
                r.reject_predicted.to_string(),
            ]);
        }
        let mut summary = Table::new(
            "summary",
            &["p", "graphs", "reject_noise_pct", "reject_predicted_pct", "mean_predicted_d", "mean_realized_d"],
        );
        for s in self.summaries() {
            summary.push(vec![
                s.p.map(|p| p.to_string()).unwrap_or_else(|| "all".into()),
                s.graphs.to_string(),
                (100.0 * s.reject_noise_rate).to_string(),
                (100.0 * s.reject_predicted_rate).to_string(),
                s.mean_predicted_d.to_string(),
                s.mean_realized_d.to_string(),
            ]);
        }
        vec![units, summary]
    }
}

/// For every graph, pools terminal opinions over replicas and KS-tests them
/// against `N(0, sigma2)` and `N(0, predicted d)`; each family of tests is
/// BH-corrected over all graphs.
pub fn cmd_validate_spectral(cfg: &ExperimentConfig) -> Result<ValidateOutcome> {
    cfg.validate()?;
    if cfg.experiment != ExperimentKind::ValidateSpectral {
        return Err(Error::param("experiment", "expected validate-spectral"));
    }
    let sigma2 = cfg.model.sigma2;
    let cells: Vec<SweepCell> = cfg
        .sweep
        .values
        .iter()
        .map(|&p| SweepCell {
            value: p,
            beta: None,
            noise: None,
            generator: er(cfg.network.n, p),
            model: ModelSpec::degroot(Noise::Iid { sigma2 }),
            connected: true,
        })
        .collect();
    let graphs = run_cells(cfg, &cells, true)?;
    let mut ks_noise = Vec::with_capacity(graphs.len());
    let mut ks_pred = Vec::with_capacity(graphs.len());
    for g in &graphs {
        let d = g.predicted_d().ok_or_else(|| Error::param("network", "no spectral prediction for an undirected graph"))?;
        ks_noise.push(ks_test(&g.ensemble.pooled_terminal, 0.0, sigma2)?);
        ks_pred.push(ks_test(&g.ensemble.pooled_terminal, 0.0, d)?);
    }
    let bh_noise = bh_correct(&ks_noise.iter().map(|k| k.p_value).collect::<Vec<_>>(), cfg.model.alpha)?;
    let bh_pred = bh_correct(&ks_pred.iter().map(|k| k.p_value).collect::<Vec<_>>(), cfg.model.alpha)?;
    let rows = graphs
        .into_iter()
        .enumerate()
        .map(|(i, mut g)| {
            g.ensemble.pooled_terminal = Vec::new();
            ValidateRow {
                p: cells[g.cell].value,
                graph: g,
                ks_noise: ks_noise[i],
                ks_predicted: ks_pred[i],
                reject_noise: bh_noise.rejected[i],
                reject_predicted: bh_pred.rejected[i],
            }
        })
        .collect();
    Ok(ValidateOutcome { rows, alpha: cfg.model.alpha })
}
