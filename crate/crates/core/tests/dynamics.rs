use opdiv_core::dynamics::{run, run_ensemble, ModelSpec, Noise, Record, SimulationConfig};
use opdiv_core::graph::{generate_connected, trust_matrix, Generator, GeneratorConfig, TrustMatrix, UndirectedGraph};
use opdiv_core::rng::{derive, split};
use opdiv_core::spectral::{diversity_degroot, spectrum};
use opdiv_core::stats::ks_test;

fn er_trust(n: usize, p: f64, seed: u64) -> TrustMatrix {
    let (g, _) = generate_connected(&GeneratorConfig { generator: Generator::ErdosRenyi { n, p }, seed }).unwrap();
    trust_matrix(&g, 0.01).unwrap()
}

fn predicted(a: &TrustMatrix) -> f64 {
    diversity_degroot(&spectrum(a).unwrap(), 1.0).unwrap().d
}

fn config(steps: usize, burn_in: usize, replicas: usize, seed: u64) -> SimulationConfig {
    SimulationConfig { steps, burn_in, replicas, seed, record: Record::WindowedDiversity, initial_variance: None }
}

fn iid() -> ModelSpec {
    ModelSpec::degroot(Noise::Iid { sigma2: 1.0 })
}

#[test]
fn isolated_nodes_are_independent_ar1_processes() {
    let n = 50;
    let a = trust_matrix(&UndirectedGraph::empty(n, true), 0.01).unwrap();
    let lambda = 1.0 / 1.01f64;
    let variance = 1.0 / (1.0 - lambda * lambda);
    let mut passes = 0;
    for rep in 0..100u64 {
        let res = run_ensemble(&iid(), &a, &config(500, 100, 5, derive(20, &[rep]))).unwrap();
        assert_eq!(res.pooled_terminal.len(), 5 * n);
        if ks_test(&res.pooled_terminal, 0.0, variance).unwrap().p_value >= 0.05 {
            passes += 1;
        }
    }
    assert!(passes >= 90, "{passes}/100 passed");
}

#[test]
fn pooled_terminal_opinions_are_gaussian_with_predicted_variance() {
    let mut passes = 0;
    let mut total = 0;
    for (k, p) in [0.4, 0.6, 0.8].into_iter().enumerate() {
        for g in 0..10u64 {
            let a = er_trust(100, p, derive(21, &[k as u64, g]));
            let res = run_ensemble(&iid(), &a, &config(500, 100, 20, derive(21, &[99, g]))).unwrap();
            if ks_test(&res.pooled_terminal, 0.0, predicted(&a)).unwrap().p_value >= 0.05 {
                passes += 1;
            }
            total += 1;
        }
    }
    assert!(passes * 10 >= total * 9, "{passes}/{total} passed");
}

#[test]
fn one_agent_per_replica_follows_the_predicted_marginal() {
    let n = 50;
    let mut passes = 0;
    for g in 0..10u64 {
        let a = er_trust(n, 0.5, derive(22, &[g]));
        let replicas = 300;
        let res = run_ensemble(&iid(), &a, &config(500, 100, replicas, derive(22, &[99, g]))).unwrap();
        let draws: Vec<f64> = (0..replicas).map(|r| res.pooled_terminal[r * n + (r % n)]).collect();
        if ks_test(&draws, 0.0, predicted(&a)).unwrap().p_value >= 0.05 {
            passes += 1;
        }
    }
    assert!(passes >= 9, "{passes}/10 passed");
}

#[test]
fn realized_diversity_does_not_drift() {
    let a = er_trust(100, 0.5, 23);
    let early = run_ensemble(&iid(), &a, &config(2000, 1000, 10, 23)).unwrap().mean_realized_d();
    let late = run_ensemble(&iid(), &a, &config(2000, 1500, 10, 23)).unwrap().mean_realized_d();
    assert!((early - late).abs() < 0.1 * late, "{early} vs {late}");
}

#[test]
fn ensemble_mean_opinion_stays_near_zero() {
    let (n, steps, replicas) = (30, 200, 400);
    let a = er_trust(n, 0.3, 24);
    let runs: Vec<_> = (0..replicas)
        .map(|r| {
            let cfg = SimulationConfig { record: Record::FullTrajectory, ..config(steps, 100, 1, split(24, r as u64)) };
            run(&iid(), &a, &cfg).unwrap()
        })
        .collect();
    for k in 0..runs[0].times.len() {
        let means: Vec<f64> = runs.iter().map(|t| t.row(k).iter().sum::<f64>() / n as f64).collect();
        let m = means.iter().sum::<f64>() / replicas as f64;
        let sd = (means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (replicas - 1) as f64).sqrt();
        let se = sd / (replicas as f64).sqrt();
        assert!(m.abs() <= 3.0 * se, "t = {}: mean {m}, se {se}", runs[0].times[k]);
    }
}

#[test]
fn single_runs_track_the_prediction() {
    let model = iid();
    let (mut within, mut total) = (0, 0);
    let mut worst: f64 = 0.0;
    for g in 0..5u64 {
        let a = er_trust(100, 0.5, derive(25, &[g]));
        let d = predicted(&a);
        for r in 0..10u64 {
            let t = run(&model, &a, &config(500, 400, 1, derive(25, &[g, r]))).unwrap();
            let err = (t.window.realized_d - d).abs() / d;
            worst = worst.max(err);
            within += usize::from(err < 0.1);
            total += 1;
        }
    }
    assert_eq!(within, total, "{within}/{total} runs within 10%, worst relative error {worst:.3}");
}

#[test]
fn local_uniqueness_is_below_global_uniqueness() {
    let beta = 1.0;
    let mut diffs = Vec::new();
    for g in 0..50u64 {
        let a = er_trust(30, 0.3, derive(26, &[g]));
        let cfg = config(300, 100, 10, 26);
        let gu = run_ensemble(&ModelSpec::degroot(Noise::GlobalUniqueness { sigma2: 1.0, beta }), &a, &cfg).unwrap();
        let lu = run_ensemble(&ModelSpec::degroot(Noise::LocalUniqueness { sigma2: 1.0, beta }), &a, &cfg).unwrap();
        diffs.push(lu.mean_realized_d() - gu.mean_realized_d());
    }
    let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
    assert!(mean <= 0.0, "LU exceeds GU by {mean} on average");
}
