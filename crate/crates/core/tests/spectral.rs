use opdiv_core::graph::{generate, gnp_directed, trust_matrix, trust_matrix_directed, Generator, GeneratorConfig, TrustMatrix, UndirectedGraph};
use opdiv_core::rng::{derive, rng_from_seed};
use opdiv_core::spectral::{diversity_degroot, diversity_directed_bound, diversity_fj, marginal_contributions, spectrum, Spectrum};
use proptest::prelude::*;
use rand::Rng;

fn er(n: usize, p: f64, seed: u64) -> UndirectedGraph {
    generate(&GeneratorConfig { generator: Generator::ErdosRenyi { n, p }, seed }).unwrap()
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// `Tr A^k` for `k = 1..=kmax` by repeated dense multiplication.
fn power_traces(a: &TrustMatrix, kmax: usize) -> Vec<f64> {
    let m = nalgebra::DMatrix::from_row_slice(a.n(), a.n(), a.as_slice());
    let mut p = m.clone();
    let mut out = Vec::new();
    for _ in 0..kmax {
        out.push(p.trace());
        p = &p * &m;
    }
    out
}

/// `Re sum lambda^k` over the spectrum.
fn power_sums(s: &Spectrum, kmax: usize) -> Vec<f64> {
    let pairs: Vec<(f64, f64)> = s.eigenvalues().iter().copied().zip(s.imaginary_parts().iter().copied()).collect();
    (1..=kmax)
        .map(|k| {
            pairs
                .iter()
                .map(|&(re, im)| {
                    let (mut x, mut y) = (1.0, 0.0);
                    for _ in 0..k {
                        (x, y) = (x * re - y * im, x * im + y * re);
                    }
                    x
                })
                .sum()
        })
        .collect()
}

/// Exact stationary diversity `Tr(sum_k A^k A^kT) sigma2 / N`, summed until
/// the terms stop contributing.
fn lyapunov_diversity(a: &TrustMatrix, sigma2: f64) -> f64 {
    let n = a.n();
    let m = nalgebra::DMatrix::from_row_slice(n, n, a.as_slice());
    let mut p = nalgebra::DMatrix::<f64>::identity(n, n);
    let mut total = 0.0;
    for _ in 0..200_000 {
        let term = p.norm_squared();
        total += term;
        if term < 1e-15 * total {
            break;
        }
        p = &m * &p;
    }
    sigma2 * total / n as f64
}

#[test]
fn paired_denser_graphs_predict_lower_diversity() {
    let (n, p, extra) = (40, 0.15, 0.2);
    let mut diffs = Vec::new();
    for s in 0..100u64 {
        let sparse = er(n, p, derive(5, &[s]));
        let mut rng = rng_from_seed(derive(5, &[s, 1]));
        let mut edges: Vec<(usize, usize)> = sparse.edges().collect();
        for u in 0..n {
            for v in u + 1..n {
                if !sparse.has_edge(u, v) && rng.random::<f64>() < extra {
                    edges.push((u, v));
                }
            }
        }
        let dense = UndirectedGraph::from_edges(n, &edges, true).unwrap();
        let d = |g: &UndirectedGraph| diversity_degroot(&spectrum(&trust_matrix(g, 0.01).unwrap()).unwrap(), 1.0).unwrap().d;
        diffs.push(d(&dense) - d(&sparse));
    }
    let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
    assert!(mean < 0.0, "adding edges raised mean predicted d by {mean}");
}

#[test]
fn directed_bound_can_undershoot_on_sparse_digraphs() {
    // non-normal sparse matrices exceed the spectral estimate; dense ones do not
    let mut counterexamples = 0;
    for s in 0..60u64 {
        let a = trust_matrix_directed(&gnp_directed(20, 0.15, derive(6, &[s])).unwrap(), 0.01).unwrap();
        let bound = diversity_directed_bound(&spectrum(&a).unwrap(), 1.0).unwrap().d;
        if lyapunov_diversity(&a, 1.0) > bound * (1.0 + 1e-9) {
            counterexamples += 1;
        }
    }
    assert!(counterexamples > 0);
    for s in 0..20u64 {
        let a = trust_matrix_directed(&gnp_directed(20, 0.7, derive(7, &[s])).unwrap(), 0.01).unwrap();
        let bound = diversity_directed_bound(&spectrum(&a).unwrap(), 1.0).unwrap().d;
        assert!(lyapunov_diversity(&a, 1.0) <= bound);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn undirected_spectrum_matches_nalgebra(n in 2usize..40, p in 0.0f64..=1.0, seed in any::<u64>(), eta in 1e-3f64..1.0) {
        let g = er(n, p, seed);
        let a = trust_matrix(&g, eta).unwrap();
        let ours = spectrum(&a).unwrap();
        prop_assert!(ours.is_real());
        // nalgebra's unbounded complex Schur can stall on repeated eigenvalues
        let sym = nalgebra::DMatrix::from_fn(n, n, |i, j| (a.get(i, j) * a.get(j, i)).sqrt());
        let eig = sym.try_symmetric_eigen(1e-14, 10_000).expect("oracle converges");
        let mut oracle: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        oracle.sort_by(|x, y| y.total_cmp(x));
        for (x, y) in ours.eigenvalues().iter().zip(&oracle) {
            prop_assert!((x - y).abs() < 1e-8, "{} vs {}", x, y);
        }
        prop_assert!((ours.sum() - a.trace()).abs() < 1e-8);
        let top = 1.0 / (1.0 + eta);
        prop_assert!(ours.eigenvalues().iter().all(|l| l.abs() <= top + 1e-10));
        if g.is_connected() {
            prop_assert!((ours.eigenvalues()[0] - top).abs() < 1e-8);
        }
    }

    #[test]
    fn directed_spectrum_reproduces_power_traces(n in 2usize..30, p in 0.05f64..=1.0, seed in any::<u64>()) {
        let a = trust_matrix_directed(&gnp_directed(n, p, seed).unwrap(), 0.1).unwrap();
        let s = spectrum(&a).unwrap();
        prop_assert_eq!(s.n(), n);
        for (k, (x, y)) in power_sums(&s, 4).iter().zip(power_traces(&a, 4)).enumerate() {
            prop_assert!((x - y).abs() < 1e-8, "k = {}: {} vs {}", k + 1, x, y);
        }
        let bound = diversity_directed_bound(&s, 1.0).unwrap().d;
        prop_assert!(bound.is_finite() && bound > 0.0);
    }

    #[test]
    fn fj_reduces_to_degroot_and_to_noise_plus_prejudice(
        n in 2usize..30, p in 0.0f64..=1.0, seed in any::<u64>(), sigma2 in 0.01f64..5.0, xi2 in 0.0f64..5.0,
    ) {
        let s = spectrum(&trust_matrix(&er(n, p, seed), 0.01).unwrap()).unwrap();
        let degroot = diversity_degroot(&s, sigma2).unwrap().d;
        let at_one = diversity_fj(&s, sigma2, xi2, 1.0).unwrap().d;
        prop_assert!(rel_close(at_one, degroot, 1e-12), "{} vs {}", at_one, degroot);
        prop_assert_eq!(diversity_fj(&s, sigma2, xi2, 0.0).unwrap().d, sigma2 + xi2);
        let contributions: f64 = marginal_contributions(&s).unwrap().iter().sum();
        prop_assert!(rel_close(contributions * sigma2 / n as f64, degroot, 1e-12));
    }

    #[test]
    fn bound_dominates_degroot_for_symmetric_inputs(values in prop::collection::vec(-0.99f64..0.99, 1..40), sigma2 in 0.01f64..5.0) {
        let s = Spectrum::from_real(values);
        let d = diversity_degroot(&s, sigma2).unwrap().d;
        let bound = diversity_directed_bound(&s, sigma2).unwrap().d;
        prop_assert!(bound >= d * (1.0 - 1e-12), "{} < {}", bound, d);
    }

    #[test]
    fn diversity_is_positive_with_noise(values in prop::collection::vec(-0.99f64..0.99, 1..40), sigma2 in 1e-6f64..5.0) {
        prop_assert!(diversity_degroot(&Spectrum::from_real(values), sigma2).unwrap().d > 0.0);
    }
}
