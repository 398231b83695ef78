//! Synthetic networks, trust matrices and topology features.

mod features;
mod generate;
pub mod io;
mod trust;

pub use features::{features, NetworkFeatures};
pub use generate::{generate, generate_connected, gnp_directed, Generator, GeneratorConfig, CONNECT_ATTEMPTS};
pub use trust::{trust_matrix, trust_matrix_directed, TrustMatrix, DEFAULT_ETA};

use crate::error::{Error, Result};

/// Dense trust matrices are refused above this many nodes.
pub const MAX_DENSE_NODES: usize = 2000;

/// Simple undirected graph on nodes `0..n`.
///
/// Neighbour lists are sorted and never contain the node itself; self-loops
/// are tracked by a single flag because they are all-or-nothing here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedGraph {
    adj: Vec<Vec<usize>>,
    self_loops: bool,
}

impl UndirectedGraph {
    pub fn empty(n: usize, self_loops: bool) -> Self {
        UndirectedGraph { adj: vec![Vec::new(); n], self_loops }
    }

    /// Builds a graph from unordered pairs. Duplicates and `(i, i)` pairs are
    /// rejected; use the `self_loops` flag instead.
    pub fn from_edges(n: usize, edges: &[(usize, usize)], self_loops: bool) -> Result<Self> {
        let mut g = UndirectedGraph::empty(n, self_loops);
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::param("edges", format!("node index out of range in ({u}, {v}) for n = {n}")));
            }
            if u == v {
                return Err(Error::param("edges", format!("explicit self-edge ({u}, {u}); set self_loops instead")));
            }
            if g.adj[u].contains(&v) {
                return Err(Error::param("edges", format!("duplicate edge ({u}, {v})")));
            }
            g.adj[u].push(v);
            g.adj[v].push(u);
        }
        for list in &mut g.adj {
            list.sort_unstable();
        }
        Ok(g)
    }

    pub(crate) fn from_adjacency(adj: Vec<Vec<usize>>, self_loops: bool) -> Self {
        UndirectedGraph { adj, self_loops }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn has_self_loops(&self) -> bool {
        self.self_loops
    }

    pub fn with_self_loops(mut self, on: bool) -> Self {
        self.self_loops = on;
        self
    }

    /// Neighbours of `i`, excluding `i` itself.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    /// Degree of `i`, excluding the self-loop.
    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        if u == v {
            return self.self_loops;
        }
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Number of edges between distinct nodes.
    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges between distinct nodes as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn is_connected(&self) -> bool {
        let n = self.n();
        if n <= 1 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == n
    }
}

/// Directed graph whose edge `u -> v` means "u influences v".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
}

impl DirectedGraph {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n || u == v {
                return Err(Error::param("edges", format!("invalid directed edge ({u}, {v}) for n = {n}")));
            }
            if out[u].contains(&v) {
                return Err(Error::param("edges", format!("duplicate edge ({u}, {v})")));
            }
            out[u].push(v);
            inc[v].push(u);
        }
        out.iter_mut().chain(inc.iter_mut()).for_each(|l| l.sort_unstable());
        Ok(DirectedGraph { out, inc })
    }

    pub fn n(&self) -> usize {
        self.out.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out.iter().enumerate().flat_map(|(u, l)| l.iter().map(move |&v| (u, v)))
    }

    /// Nodes that influence `v`.
    pub fn influencers(&self, v: usize) -> &[usize] {
        &self.inc[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.out[u].binary_search(&v).is_ok()
    }

    /// Forgets direction: `u - v` whenever either `u -> v` or `v -> u`.
    pub fn to_undirected(&self, self_loops: bool) -> UndirectedGraph {
        let n = self.n();
        let mut adj = vec![Vec::new(); n];
        for (u, v) in self.edges() {
            adj[u].push(v);
            adj[v].push(u);
        }
        for l in &mut adj {
            l.sort_unstable();
            l.dedup();
        }
        UndirectedGraph::from_adjacency(adj, self_loops)
    }
}
