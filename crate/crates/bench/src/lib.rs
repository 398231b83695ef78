//! Fixtures shared by the benchmarks.

use opdiv_core::graph::{generate_connected, trust_matrix, Generator, GeneratorConfig, TrustMatrix};
use opdiv_core::rng::rng_from_seed;
use rand::Rng;
use rand_distr::StandardNormal;

pub fn er_trust(n: usize, p: f64, seed: u64) -> TrustMatrix {
    let (g, _) = generate_connected(&GeneratorConfig { generator: Generator::ErdosRenyi { n, p }, seed }).expect("connected draw");
    trust_matrix(&g, 0.01).expect("valid trust matrix")
}

/// Row-substochastic matrix with i.i.d. uniform weights.
pub fn dense_directed(n: usize, seed: u64) -> TrustMatrix {
    let mut rng = rng_from_seed(seed);
    let mut w = Vec::with_capacity(n * n);
    for _ in 0..n {
        let row: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let total = row.iter().sum::<f64>() * 1.01;
        w.extend(row.iter().map(|x| x / total));
    }
    TrustMatrix::from_dense(n, w).expect("valid dense matrix")
}

pub fn normal_sample(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}
