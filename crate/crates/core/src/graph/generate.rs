use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{DirectedGraph, UndirectedGraph};
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, split};

/// Attempts made by [`generate_connected`] before giving up.
pub const CONNECT_ATTEMPTS: usize = 1000;

/// Random graph ensembles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    /// G(n, p).
    ErdosRenyi { n: usize, p: f64 },
    /// Ring lattice with `k` nearest neighbours, each edge rewired with probability `q`.
    WattsStrogatz { n: usize, k: usize, q: f64 },
    /// Stochastic block model with group `sizes` and symmetric edge probabilities `probs`.
    StochasticBlock { sizes: Vec<usize>, probs: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    #[serde(flatten)]
    pub generator: Generator,
    pub seed: u64,
}

fn check_prob(name: &'static str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::param(name, format!("{x} is not a probability")))
    }
}

impl Generator {
    pub fn n(&self) -> usize {
        match self {
            Generator::ErdosRenyi { n, .. } | Generator::WattsStrogatz { n, .. } => *n,
            Generator::StochasticBlock { sizes, .. } => sizes.iter().sum(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n() == 0 {
            return Err(Error::param("n", "graph must have at least one node"));
        }
        if self.n() > super::MAX_DENSE_NODES {
            return Err(Error::TooLarge(self.n()));
        }
        match self {
            Generator::ErdosRenyi { p, .. } => check_prob("p", *p),
            Generator::WattsStrogatz { n, k, q } => {
                check_prob("q", *q)?;
                if k % 2 != 0 {
                    return Err(Error::param("k", format!("{k} must be even")));
                }
                if k >= n {
                    return Err(Error::param("k", format!("{k} must be smaller than n = {n}")));
                }
                Ok(())
            }
            Generator::StochasticBlock { sizes, probs } => {
                let m = sizes.len();
                if probs.len() != m || probs.iter().any(|row| row.len() != m) {
                    return Err(Error::param("probs", format!("must be a {m}x{m} matrix")));
                }
                for (i, row) in probs.iter().enumerate() {
                    for (j, &x) in row.iter().enumerate() {
                        check_prob("probs", x)?;
                        if x != probs[j][i] {
                            return Err(Error::param("probs", format!("not symmetric at ({i}, {j})")));
                        }
                    }
                }
                Ok(())
            }
        }
    }
}

/// Draws one graph from the configured ensemble. Every node gets a self-loop.
pub fn generate(config: &GeneratorConfig) -> Result<UndirectedGraph> {
    config.generator.validate()?;
    let mut rng = rng_from_seed(config.seed);
    let n = config.generator.n();
    let mut adj = vec![Vec::new(); n];
    match &config.generator {
        Generator::ErdosRenyi { p, .. } => {
            for u in 0..n {
                for v in u + 1..n {
                    if rng.random::<f64>() < *p {
                        adj[u].push(v);
                        adj[v].push(u);
                    }
                }
            }
        }
        Generator::StochasticBlock { sizes, probs } => {
            let group: Vec<usize> = sizes.iter().enumerate().flat_map(|(g, &s)| std::iter::repeat_n(g, s)).collect();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.random::<f64>() < probs[group[u]][group[v]] {
                        adj[u].push(v);
                        adj[v].push(u);
                    }
                }
            }
        }
        Generator::WattsStrogatz { k, q, .. } => {
            let mut dense = vec![false; n * n];
            let link = |d: &mut [bool], u: usize, v: usize, on: bool| {
                d[u * n + v] = on;
                d[v * n + u] = on;
            };
            let mut degree = vec![*k; n];
            for u in 0..n {
                for j in 1..=k / 2 {
                    link(&mut dense, u, (u + j) % n, true);
                }
            }
            let nodes: Vec<usize> = (0..n).collect();
            // Rewire lattice edge (u, u+j) to (u, w), as in the original construction.
            for j in 1..=k / 2 {
                for u in 0..n {
                    let v = (u + j) % n;
                    if !dense[u * n + v] || rng.random::<f64>() >= *q {
                        continue;
                    }
                    if degree[u] >= n - 1 {
                        continue;
                    }
                    let mut w = *nodes.choose(&mut rng).expect("n > 0");
                    while w == u || dense[u * n + w] {
                        w = *nodes.choose(&mut rng).expect("n > 0");
                    }
                    link(&mut dense, u, v, false);
                    link(&mut dense, u, w, true);
                    degree[v] -= 1;
                    degree[w] += 1;
                }
            }
            for u in 0..n {
                adj[u] = (0..n).filter(|&v| dense[u * n + v]).collect();
            }
        }
    }
    for l in &mut adj {
        l.sort_unstable();
    }
    Ok(UndirectedGraph::from_adjacency(adj, true))
}

/// Like [`generate`], retrying with derived seeds until the graph is
/// connected. Returns the graph and the seed that produced it.
pub fn generate_connected(config: &GeneratorConfig) -> Result<(UndirectedGraph, u64)> {
    for attempt in 0..CONNECT_ATTEMPTS {
        let seed = if attempt == 0 { config.seed } else { split(config.seed, attempt as u64) };
        let g = generate(&GeneratorConfig { generator: config.generator.clone(), seed })?;
        if g.is_connected() {
            return Ok((g, seed));
        }
    }
    Err(Error::NotConnected(CONNECT_ATTEMPTS))
}

/// Random directed graph: every ordered pair `u -> v` independently with probability `p`.
pub fn gnp_directed(n: usize, p: f64, seed: u64) -> Result<DirectedGraph> {
    check_prob("p", p)?;
    let mut rng = rng_from_seed(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    DirectedGraph::from_edges(n, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(generator: Generator, seed: u64) -> GeneratorConfig {
        GeneratorConfig { generator, seed }
    }

    #[test]
    fn er_p_one_is_complete() {
        let g = generate(&cfg(Generator::ErdosRenyi { n: 4, p: 1.0 }, 1)).unwrap();
        assert_eq!(g.edge_count(), 6);
        assert!(g.has_self_loops());
        assert!((0..4).all(|i| g.has_edge(i, i)));
    }

    #[test]
    fn er_p_zero_is_empty() {
        let g = generate(&cfg(Generator::ErdosRenyi { n: 5, p: 0.0 }, 1)).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn ws_without_rewiring_is_the_ring_lattice() {
        let a = generate(&cfg(Generator::WattsStrogatz { n: 20, k: 4, q: 0.0 }, 1)).unwrap();
        let b = generate(&cfg(Generator::WattsStrogatz { n: 20, k: 4, q: 0.0 }, 999)).unwrap();
        assert_eq!(a, b);
        for i in 0..20 {
            assert_eq!(a.neighbors(i).len(), 4);
            assert!(a.has_edge(i, (i + 1) % 20) && a.has_edge(i, (i + 2) % 20));
        }
    }

    #[test]
    fn ws_rewiring_preserves_edge_count() {
        for seed in 0..20 {
            let g = generate(&cfg(Generator::WattsStrogatz { n: 30, k: 6, q: 0.7 }, seed)).unwrap();
            assert_eq!(g.edge_count(), 90);
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = [
            Generator::ErdosRenyi { n: 10, p: 1.5 },
            Generator::ErdosRenyi { n: 0, p: 0.5 },
            Generator::WattsStrogatz { n: 10, k: 3, q: 0.1 },
            Generator::WattsStrogatz { n: 10, k: 10, q: 0.1 },
            Generator::WattsStrogatz { n: 10, k: 4, q: -0.1 },
            Generator::StochasticBlock { sizes: vec![5, 5], probs: vec![vec![0.5, 0.1], vec![0.2, 0.5]] },
            Generator::StochasticBlock { sizes: vec![5, 5], probs: vec![vec![0.5, 0.1]] },
            Generator::ErdosRenyi { n: 2001, p: 0.1 },
        ];
        for g in bad {
            assert!(generate(&cfg(g.clone(), 0)).is_err(), "{g:?} accepted");
        }
    }

    #[test]
    fn connected_retry_fails_loudly() {
        let err = generate_connected(&cfg(Generator::ErdosRenyi { n: 10, p: 0.0 }, 3)).unwrap_err();
        assert!(matches!(err, Error::NotConnected(CONNECT_ATTEMPTS)));
    }

    #[test]
    fn connected_retry_reports_the_winning_seed() {
        let c = cfg(Generator::ErdosRenyi { n: 40, p: 0.08 }, 5);
        let (g, seed) = generate_connected(&c).unwrap();
        assert!(g.is_connected());
        assert_eq!(generate(&cfg(c.generator, seed)).unwrap(), g);
    }
}
