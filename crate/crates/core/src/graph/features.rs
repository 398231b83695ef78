use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::UndirectedGraph;

/// Topology covariates. Self-loops are ignored throughout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkFeatures {
    /// Mean BFS distance over ordered pairs; `None` when disconnected or `n < 2`.
    pub avg_shortest_path: Option<f64>,
    pub size: usize,
    /// Mean local clustering; nodes of degree < 2 contribute 0.
    pub avg_clustering: f64,
    pub density: f64,
    pub avg_degree: f64,
    pub connected: bool,
}

pub fn features(g: &UndirectedGraph) -> NetworkFeatures {
    let n = g.n();
    let m = g.edge_count();
    let connected = g.is_connected();
    let density = if n > 1 { 2.0 * m as f64 / (n as f64 * (n as f64 - 1.0)) } else { 0.0 };
    let avg_degree = if n > 0 { 2.0 * m as f64 / n as f64 } else { 0.0 };
    let avg_shortest_path = (connected && n > 1).then(|| mean_distance(g));
    let avg_clustering = if n > 0 { (0..n).map(|i| local_clustering(g, i)).sum::<f64>() / n as f64 } else { 0.0 };
    NetworkFeatures { avg_shortest_path, size: n, avg_clustering, density, avg_degree, connected }
}

fn mean_distance(g: &UndirectedGraph) -> f64 {
    let n = g.n();
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::with_capacity(n);
    let mut total: u64 = 0;
    for s in 0..n {
        dist.fill(usize::MAX);
        dist[s] = 0;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbors(u) {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    total += dist[v] as u64;
                    queue.push_back(v);
                }
            }
        }
    }
    total as f64 / (n as f64 * (n as f64 - 1.0))
}

fn local_clustering(g: &UndirectedGraph, i: usize) -> f64 {
    let nb = g.neighbors(i);
    let k = nb.len();
    if k < 2 {
        return 0.0;
    }
    let mut links = 0usize;
    for (a, &u) in nb.iter().enumerate() {
        // both lists sorted: count common members of nb[a+1..] and neighbors(u)
        let (mut x, mut y) = (a + 1, 0);
        let nu = g.neighbors(u);
        while x < k && y < nu.len() {
            match nb[x].cmp(&nu[y]) {
                std::cmp::Ordering::Less => x += 1,
                std::cmp::Ordering::Greater => y += 1,
                std::cmp::Ordering::Equal => {
                    links += 1;
                    x += 1;
                    y += 1;
                }
            }
        }
    }
    2.0 * links as f64 / (k as f64 * (k as f64 - 1.0))
}
