//! Influence networks inferred from opinion panels by pairwise Granger tests,
//! and regressions of realized diversity on network features.

mod granger;
mod ols;
mod panel;
mod regress;

pub use granger::{granger_pvalue, granger_test, GrangerResult};
pub use ols::{fit_ols, RegressionFit};
pub use panel::{empirical_diversity, read_long, read_wide, OpinionPanel};
pub use regress::{run_regressions, ModelFit, NetworkObservation, RegressionReport};

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{run, ModelSpec, Noise, Record, SimulationConfig};
use crate::error::{Error, Result};
use crate::graph::{features, trust_matrix_directed, DirectedGraph, NetworkFeatures, TrustMatrix, DEFAULT_ETA};
use crate::spectral::{self, DiversityPrediction};
use crate::stats::bh_correct;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrangerConfig {
    pub max_lag: usize,
    /// FDR level for the Benjamini-Hochberg correction within one topic.
    pub alpha: f64,
}

impl Default for GrangerConfig {
    fn default() -> Self {
        GrangerConfig { max_lag: 5, alpha: 0.05 }
    }
}

impl GrangerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_lag == 0 {
            return Err(Error::param("max_lag", "must be >= 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::param("alpha", format!("must lie in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }
}

/// Outcome of one ordered-pair test: does `src` Granger-cause `dst`?
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairTest {
    pub src: usize,
    pub dst: usize,
    pub f_stat: f64,
    pub p_value: f64,
    pub rejected: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceNetwork {
    pub topic: String,
    pub sources: Vec<String>,
    /// Edge `u -> v` means `u` influences `v`.
    pub graph: DirectedGraph,
    pub tests: Vec<PairTest>,
}

impl InfluenceNetwork {
    /// Trust matrix with uniform weights over each node's influencers and
    /// itself.
    pub fn trust_matrix(&self, eta: f64) -> Result<TrustMatrix> {
        trust_matrix_directed(&self.graph, eta)
    }

    /// Writes accepted edges as `src,dst,weight,pvalue` with source names and
    /// trust weights.
    pub fn write_csv<W: Write>(&self, eta: f64, w: W) -> Result<()> {
        let a = self.trust_matrix(eta)?;
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["src", "dst", "weight", "pvalue"])?;
        for t in self.tests.iter().filter(|t| t.rejected) {
            out.write_record([
                self.sources[t.src].clone(),
                self.sources[t.dst].clone(),
                a.get(t.dst, t.src).to_string(),
                t.p_value.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Tests every ordered source pair and keeps the edges that survive
/// Benjamini-Hochberg correction over the topic's `N (N - 1)` tests.
pub fn build_influence_network(panel: &OpinionPanel, cfg: &GrangerConfig) -> Result<InfluenceNetwork> {
    cfg.validate()?;
    let n = panel.n_sources();
    if n >= 2 && panel.n_times() < 10 * cfg.max_lag {
        return Err(Error::InsufficientData(format!(
            "topic {} has {} time rows, need at least {}",
            panel.topic,
            panel.n_times(),
            10 * cfg.max_lag
        )));
    }
    let series: Vec<Vec<f64>> = (0..n).map(|i| panel.series(i)).collect();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    let results: Vec<GrangerResult> = pairs
        .par_iter()
        .map(|&(i, j)| granger_test(&series[i], &series[j], cfg.max_lag))
        .collect::<Result<_>>()?;
    let p: Vec<f64> = results.iter().map(|r| r.p_value).collect();
    let rejected = if p.is_empty() { Vec::new() } else { bh_correct(&p, cfg.alpha)?.rejected };
    let tests: Vec<PairTest> = pairs
        .iter()
        .zip(&results)
        .zip(&rejected)
        .map(|((&(src, dst), r), &rej)| PairTest { src, dst, f_stat: r.f_stat, p_value: r.p_value, rejected: rej })
        .collect();
    let edges: Vec<(usize, usize)> = tests.iter().filter(|t| t.rejected).map(|t| (t.src, t.dst)).collect();
    Ok(InfluenceNetwork {
        topic: panel.topic.clone(),
        sources: panel.sources.clone(),
        graph: DirectedGraph::from_edges(n, &edges)?,
        tests,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmpiricalConfig {
    pub granger: GrangerConfig,
    pub eta: f64,
}

impl Default for EmpiricalConfig {
    fn default() -> Self {
        EmpiricalConfig { granger: GrangerConfig::default(), eta: DEFAULT_ETA }
    }
}

/// Everything the regression stage needs from one topic.
#[derive(Debug, Clone)]
pub struct TopicAnalysis {
    pub network: InfluenceNetwork,
    /// Topology of the inferred network with edge directions dropped.
    pub features: NetworkFeatures,
    /// DeGroot diversity at unit noise from the real parts of the spectrum.
    pub predicted: DiversityPrediction,
    pub bound: DiversityPrediction,
    pub realized_y: f64,
}

impl TopicAnalysis {
    pub fn observation(&self) -> NetworkObservation {
        NetworkObservation {
            id: self.network.topic.clone(),
            features: self.features,
            predicted_d: self.predicted.d,
            realized_y: self.realized_y,
        }
    }
}

pub fn analyze_topic(panel: &OpinionPanel, cfg: &EmpiricalConfig) -> Result<TopicAnalysis> {
    let realized_y = empirical_diversity(panel)?;
    let network = build_influence_network(panel, &cfg.granger)?;
    let spec = spectral::spectrum(&network.trust_matrix(cfg.eta)?)?;
    let predicted = spectral::diversity_degroot(&spec.real_parts(), 1.0)?;
    let bound = spectral::diversity_directed_bound(&spec, 1.0)?;
    let features = features(&network.graph.to_undirected(true));
    Ok(TopicAnalysis { network, features, predicted, bound, realized_y })
}

/// Panel of noisy DeGroot opinions on `a`: times `burn_in + 1 ..= steps`,
/// sources named `s0, s1, ...`.
pub fn synthetic_panel(topic: &str, a: &TrustMatrix, sigma2: f64, steps: usize, burn_in: usize, seed: u64) -> Result<OpinionPanel> {
    let cfg = SimulationConfig { steps, burn_in, replicas: 1, seed, record: Record::FullTrajectory, initial_variance: None };
    let tr = run(&ModelSpec::degroot(Noise::Iid { sigma2 }), a, &cfg)?;
    let n = a.n();
    let first = burn_in + 1;
    let times = (first..=steps).map(|t| t.to_string()).collect();
    let values = tr.opinions[first * n..].to_vec();
    OpinionPanel::new(topic, times, (0..n).map(|i| format!("s{i}")).collect(), values)
}
