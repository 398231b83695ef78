use rayon::prelude::*;

use super::{fmt_opt, ExperimentConfig, ExperimentKind, Table};
use crate::dynamics::{run_ensemble, EnsembleResult, ModelSpec, Noise, Prejudice, Record, SimulationConfig};
use crate::error::{Error, Result};
use crate::graph::{generate, generate_connected, trust_matrix, Generator, GeneratorConfig};
use crate::rng::{derive, tag};

/// One point of a sweep: the network ensemble and the model run on it.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub value: f64,
    pub beta: Option<f64>,
    pub noise: Option<&'static str>,
    pub generator: Generator,
    pub model: ModelSpec,
    /// Redraw graphs until connected.
    pub connected: bool,
}

/// Ensemble outcome for one graph of one cell.
#[derive(Debug, Clone)]
pub struct GraphResult {
    pub cell: usize,
    pub graph: usize,
    /// Seed that regenerates the graph with `generate`.
    pub graph_seed: u64,
    /// Master seed of the replica ensemble.
    pub sim_seed: u64,
    pub ensemble: EnsembleResult,
}

impl GraphResult {
    pub fn predicted_d(&self) -> Option<f64> {
        self.ensemble.predicted.map(|p| p.d)
    }
}

/// Seed of graph `g`. It does not depend on the cell, so every cell sees
/// graphs drawn from the same random numbers.
pub(crate) fn graph_seed(cfg: &ExperimentConfig, g: usize) -> u64 {
    derive(cfg.seed, &[tag::GRAPH, g as u64])
}

/// Master seed of every ensemble in the experiment, shared across graphs and
/// cells so that comparisons between them are paired.
pub(crate) fn sim_seed(cfg: &ExperimentConfig) -> u64 {
    derive(cfg.seed, &[tag::REPLICA])
}

pub(crate) fn run_cells(cfg: &ExperimentConfig, cells: &[SweepCell], keep_pooled: bool) -> Result<Vec<GraphResult>> {
    let graphs = cfg.network.graphs;
    let sim = SimulationConfig {
        steps: cfg.simulation.steps,
        burn_in: cfg.simulation.burn_in,
        replicas: cfg.simulation.replicas,
        seed: sim_seed(cfg),
        record: Record::WindowedDiversity,
        initial_variance: None,
    };
    let units: Vec<(usize, usize)> = (0..cells.len()).flat_map(|c| (0..graphs).map(move |g| (c, g))).collect();
    units
        .par_iter()
        .map(|&(c, g)| {
            let cell = &cells[c];
            let gc = GeneratorConfig { generator: cell.generator.clone(), seed: graph_seed(cfg, g) };
            let (graph, seed) = if cell.connected { generate_connected(&gc)? } else { (generate(&gc)?, gc.seed) };
            let a = trust_matrix(&graph, cfg.network.eta)?;
            let mut ensemble = run_ensemble(&cell.model, &a, &sim)?;
            if !keep_pooled {
                ensemble.pooled_terminal = Vec::new();
            }
            log::debug!("cell {c} graph {g}: realized d {}", ensemble.mean_realized_d());
            Ok(GraphResult { cell: c, graph: g, graph_seed: seed, sim_seed: sim.seed, ensemble })
        })
        .collect()
}

pub(crate) fn er(n: usize, p: f64) -> Generator {
    Generator::ErdosRenyi { n, p }
}

fn cells_for(cfg: &ExperimentConfig) -> Result<Vec<SweepCell>> {
    let net = &cfg.network;
    let sigma2 = cfg.model.sigma2;
    let iid = Noise::Iid { sigma2 };
    let plain = |value: f64, generator: Generator, model: ModelSpec, connected: bool| SweepCell {
        value,
        beta: None,
        noise: None,
        generator,
        model,
        connected,
    };
    let values = &cfg.sweep.values;
    let cells = match cfg.experiment {
        ExperimentKind::SweepSusceptibility => values
            .iter()
            .map(|&s| plain(s, er(net.n, net.p), ModelSpec::fj(s, Prejudice::Random { variance: cfg.model.xi2 }, iid), true))
            .collect(),
        ExperimentKind::SweepConnectivity => values.iter().map(|&p| plain(p, er(net.n, p), ModelSpec::degroot(iid), true)).collect(),
        ExperimentKind::SweepClustering => values
            .iter()
            .map(|&q| plain(q, Generator::WattsStrogatz { n: net.n, k: net.k, q }, ModelSpec::degroot(iid), true))
            .collect(),
        ExperimentKind::SweepCommunities => {
            let sizes = vec![net.n / 2, net.n - net.n / 2];
            values
                .iter()
                .map(|&pi| {
                    let inter = 2.0 * net.mean_degree_fraction - pi;
                    let generator = Generator::StochasticBlock { sizes: sizes.clone(), probs: vec![vec![pi, inter], vec![inter, pi]] };
                    // pi = 1 at k = N/2 is two disjoint cliques
                    plain(pi, generator, ModelSpec::degroot(iid), false)
                })
                .collect()
        }
        ExperimentKind::SweepUniqueness => {
            let mut cells = Vec::new();
            for &p in values {
                for &beta in &cfg.sweep.betas {
                    for (name, noise) in
                        [("gu", Noise::GlobalUniqueness { sigma2, beta }), ("lu", Noise::LocalUniqueness { sigma2, beta })]
                    {
                        cells.push(SweepCell {
                            value: p,
                            beta: Some(beta),
                            noise: Some(name),
                            generator: er(net.n, p),
                            model: ModelSpec::degroot(noise),
                            connected: true,
                        });
                    }
                }
            }
            cells
        }
        other => return Err(Error::param("experiment", format!("{} is not a sweep", other.name()))),
    };
    Ok(cells)
}

/// Per-cell averages over graphs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSummary {
    pub cell: usize,
    pub graphs: usize,
    pub mean_predicted_d: Option<f64>,
    pub mean_realized_d: f64,
    pub mean_centered_d: f64,
    pub mean_mad: f64,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub kind: ExperimentKind,
    pub cells: Vec<SweepCell>,
    /// Ordered by cell, then graph.
    pub graphs: Vec<GraphResult>,
}

impl SweepOutcome {
    pub fn axis(&self) -> &'static str {
        match self.kind {
            ExperimentKind::SweepSusceptibility => "s",
            ExperimentKind::SweepClustering => "q",
            ExperimentKind::SweepCommunities => "pi",
            _ => "p",
        }
    }

    pub fn cell_graphs(&self, cell: usize) -> impl Iterator<Item = &GraphResult> {
        self.graphs.iter().filter(move |g| g.cell == cell)
    }

    pub fn summaries(&self) -> Vec<CellSummary> {
        (0..self.cells.len())
            .map(|c| {
                let gs: Vec<&GraphResult> = self.cell_graphs(c).collect();
                let k = gs.len() as f64;
                let mean = |f: &dyn Fn(&GraphResult) -> f64| gs.iter().map(|g| f(g)).sum::<f64>() / k;
                let predicted: Option<Vec<f64>> = gs.iter().map(|g| g.predicted_d()).collect();
                CellSummary {
                    cell: c,
                    graphs: gs.len(),
                    mean_predicted_d: predicted.map(|v| v.iter().sum::<f64>() / k),
                    mean_realized_d: mean(&|g| g.ensemble.mean_realized_d()),
                    mean_centered_d: mean(&|g| g.ensemble.mean_centered_d()),
                    mean_mad: mean(&|g| g.ensemble.mean_mad()),
                }
            })
            .collect()
    }

    /// Cell index whose summary minimises `key`; ties keep the first.
    pub fn argmin_by(&self, key: impl Fn(&CellSummary) -> f64) -> Option<usize> {
        self.summaries().iter().min_by(|a, b| key(a).total_cmp(&key(b))).map(|s| s.cell)
    }

    fn label(&self, cell: usize) -> Vec<String> {
        let c = &self.cells[cell];
        let mut v = vec![c.value.to_string()];
        if self.kind == ExperimentKind::SweepUniqueness {
            v.push(fmt_opt(c.beta));
            v.push(c.noise.unwrap_or_default().to_string());
        }
        v
    }

    fn header(&self, rest: &[&'static str]) -> Vec<&'static str> {
        let mut h = vec![self.axis()];
        if self.kind == ExperimentKind::SweepUniqueness {
            h.extend(["beta", "noise"]);
        }
        h.extend_from_slice(rest);
        h
    }

    pub fn tables(&self) -> Vec<Table> {
        let mut units = Table::new(
            "units",
            &self.header(&["graph", "graph_seed", "replica", "replica_seed", "predicted_d", "realized_d", "centered_d", "mad"]),
        );
        let mut graphs = Table::new("graphs", &self.header(&["graph", "graph_seed", "sim_seed", "predicted_d", "realized_d", "centered_d", "mad"]));
        for g in &self.graphs {
            let predicted = fmt_opt(g.predicted_d());
            for r in &g.ensemble.replicas {
                let mut row = self.label(g.cell);
                row.extend([
                    g.graph.to_string(),
                    g.graph_seed.to_string(),
                    r.replica.to_string(),
                    r.seed.to_string(),
                    predicted.clone(),
                    r.realized_d.to_string(),
                    r.centered_d.to_string(),
                    r.mad.to_string(),
                ]);
                units.push(row);
            }
            let mut row = self.label(g.cell);
            row.extend([
                g.graph.to_string(),
                g.graph_seed.to_string(),
                g.sim_seed.to_string(),
                predicted,
                g.ensemble.mean_realized_d().to_string(),
                g.ensemble.mean_centered_d().to_string(),
                g.ensemble.mean_mad().to_string(),
            ]);
            graphs.push(row);
        }
        let mut summary = Table::new("summary", &self.header(&["graphs", "mean_predicted_d", "mean_realized_d", "mean_centered_d", "mean_mad"]));
        for s in self.summaries() {
            let mut row = self.label(s.cell);
            row.extend([
                s.graphs.to_string(),
                fmt_opt(s.mean_predicted_d),
                s.mean_realized_d.to_string(),
                s.mean_centered_d.to_string(),
                s.mean_mad.to_string(),
            ]);
            summary.push(row);
        }
        vec![units, graphs, summary]
    }
}

/// Runs any of the five sweeps.
pub fn cmd_sweep(cfg: &ExperimentConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    let cells = cells_for(cfg)?;
    let graphs = run_cells(cfg, &cells, false)?;
    Ok(SweepOutcome { kind: cfg.experiment, cells, graphs })
}
