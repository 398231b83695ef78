use super::{DirectedGraph, UndirectedGraph, MAX_DENSE_NODES};
use crate::error::{Error, Result};

/// Default slack: rows sum to `1 / (1 + DEFAULT_ETA)`.
pub const DEFAULT_ETA: f64 = 0.01;

/// Row-(sub)stochastic influence matrix `A`; `A[i][j]` is the weight agent
/// `i` places on agent `j`'s previous opinion.
///
/// Every row sums to `1 / (1 + eta)`. `eta = 0` gives a row-stochastic matrix,
/// usable only by the noiseless dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct TrustMatrix {
    n: usize,
    eta: f64,
    directed: bool,
    dense: Vec<f64>,
    rows: Vec<Vec<(usize, f64)>>,
}

/// Uniform weights `1 / (k_i (1 + eta))` over the neighbours of each node,
/// where `k_i` counts the self-loop.
pub fn trust_matrix(g: &UndirectedGraph, eta: f64) -> Result<TrustMatrix> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::param("eta", format!("{eta} must be > 0 for a strictly substochastic matrix")));
    }
    TrustMatrix::from_undirected(g, eta)
}

/// Trust matrix of an influence graph: agent `v` averages over itself and
/// every `u` with `u -> v`.
pub fn trust_matrix_directed(g: &DirectedGraph, eta: f64) -> Result<TrustMatrix> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::param("eta", format!("{eta} must be > 0 for a strictly substochastic matrix")));
    }
    let rows = (0..g.n())
        .map(|v| {
            let mut idx = g.influencers(v).to_vec();
            idx.push(v);
            idx.sort_unstable();
            idx
        })
        .collect::<Vec<_>>();
    TrustMatrix::uniform_rows(rows, eta, true)
}

impl TrustMatrix {
    fn from_undirected(g: &UndirectedGraph, eta: f64) -> Result<Self> {
        let rows = (0..g.n())
            .map(|i| {
                let mut idx = g.neighbors(i).to_vec();
                if g.has_self_loops() {
                    idx.push(i);
                    idx.sort_unstable();
                }
                idx
            })
            .collect::<Vec<_>>();
        if let Some(i) = rows.iter().position(Vec::is_empty) {
            return Err(Error::param("graph", format!("node {i} has degree 0")));
        }
        Self::uniform_rows(rows, eta, false)
    }

    /// Row-stochastic matrix (`eta = 0`) for the deterministic models.
    pub fn stochastic(g: &UndirectedGraph) -> Result<Self> {
        Self::from_undirected(g, 0.0)
    }

    fn uniform_rows(support: Vec<Vec<usize>>, eta: f64, directed: bool) -> Result<Self> {
        let n = support.len();
        if n > MAX_DENSE_NODES {
            return Err(Error::TooLarge(n));
        }
        let mut dense = vec![0.0; n * n];
        let rows = support
            .into_iter()
            .enumerate()
            .map(|(i, idx)| {
                let w = 1.0 / (idx.len() as f64 * (1.0 + eta));
                idx.into_iter()
                    .map(|j| {
                        dense[i * n + j] = w;
                        (j, w)
                    })
                    .collect()
            })
            .collect();
        Ok(TrustMatrix { n, eta, directed, dense, rows })
    }

    /// Wraps an arbitrary dense row-major matrix. All rows must be non-negative
    /// and share one row sum `r <= 1`, from which `eta = 1/r - 1` is inferred.
    /// The matrix is marked undirected only if it is reversible, i.e. similar to
    /// a symmetric matrix through a positive diagonal scaling.
    pub fn from_dense(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: values.len() });
        }
        if n == 0 {
            return Err(Error::param("n", "empty matrix"));
        }
        if n > MAX_DENSE_NODES {
            return Err(Error::TooLarge(n));
        }
        if values.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(Error::param("matrix", "weights must be finite and non-negative"));
        }
        let sums: Vec<f64> = values.chunks(n).map(|r| r.iter().sum()).collect();
        let r = sums[0];
        if let Some(i) = sums.iter().position(|s| (s - r).abs() > 1e-12) {
            return Err(Error::param("matrix", format!("row {i} sums to {} but row 0 sums to {r}", sums[i])));
        }
        if !(r > 0.0 && r <= 1.0 + 1e-12) {
            return Err(Error::param("matrix", format!("row sum {r} outside (0, 1]")));
        }
        let eta = (1.0 / r - 1.0).max(0.0);
        let rows = values
            .chunks(n)
            .map(|row| row.iter().enumerate().filter(|(_, &w)| w > 0.0).map(|(j, &w)| (j, w)).collect())
            .collect();
        let mut m = TrustMatrix { n, eta, directed: true, dense: values, rows };
        m.directed = !m.is_reversible();
        Ok(m)
    }

    /// Checks detailed balance `pi_i A_ij = pi_j A_ji` for some positive `pi`.
    fn is_reversible(&self) -> bool {
        let n = self.n;
        let mut pi = vec![0.0; n];
        for root in 0..n {
            if pi[root] != 0.0 {
                continue;
            }
            pi[root] = 1.0;
            let mut stack = vec![root];
            while let Some(i) = stack.pop() {
                for &(j, a_ij) in &self.rows[i] {
                    if j == i {
                        continue;
                    }
                    let a_ji = self.get(j, i);
                    if a_ji == 0.0 {
                        return false;
                    }
                    let want = pi[i] * a_ij / a_ji;
                    if pi[j] == 0.0 {
                        pi[j] = want;
                        stack.push(j);
                    } else if (pi[j] - want).abs() > 1e-9 * want.max(pi[j]) {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Common row sum, `1 / (1 + eta)`.
    pub fn row_sum(&self) -> f64 {
        1.0 / (1.0 + self.eta)
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn is_substochastic(&self) -> bool {
        self.eta > 0.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.dense[i * self.n + j]
    }

    /// Dense row-major storage.
    pub fn as_slice(&self) -> &[f64] {
        &self.dense
    }

    /// Non-zero entries of row `i` as `(column, weight)`.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// `out = A x`.
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o = row.iter().map(|&(j, w)| w * x[j]).sum();
        }
    }

    /// Symmetric matrix similar to `A`, `S_ij = sqrt(A_ij A_ji)`.
    /// Only meaningful when `A` is reversible.
    pub(crate) fn symmetrized(&self) -> Vec<f64> {
        let n = self.n;
        let mut s = vec![0.0; n * n];
        for i in 0..n {
            for &(j, w) in &self.rows[i] {
                s[i * n + j] = (w * self.get(j, i)).sqrt();
            }
        }
        s
    }
}
