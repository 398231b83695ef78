use nalgebra::DMatrix;
use opdiv_core::graph::NetworkFeatures;
use opdiv_core::influence::{
    build_influence_network, empirical_diversity, fit_ols, granger_test, run_regressions, GrangerConfig, NetworkObservation, OpinionPanel,
};
use opdiv_core::rng::{derive, rng_from_seed, SimRng};
use opdiv_core::Error;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, StudentsT};

fn normals(rng: &mut SimRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn panel(columns: &[Vec<f64>]) -> OpinionPanel {
    let t = columns[0].len();
    let values = (0..t).flat_map(|r| columns.iter().map(move |c| c[r])).collect();
    OpinionPanel::new(
        "topic",
        (0..t).map(|i| i.to_string()).collect(),
        (0..columns.len()).map(|i| format!("s{i}")).collect(),
        values,
    )
    .unwrap()
}

/// `x_1` white noise, `x_{i+1,t} = 0.8 x_{i,t-1} + e`.
fn chain(rng: &mut SimRng, n: usize, t: usize) -> Vec<Vec<f64>> {
    let mut cols = vec![normals(rng, t)];
    for i in 1..n {
        let e = normals(rng, t);
        let prev = &cols[i - 1];
        let col = (0..t).map(|s| if s == 0 { e[0] } else { 0.8 * prev[s - 1] + e[s] }).collect();
        cols.push(col);
    }
    cols
}

#[test]
fn granger_is_calibrated_under_independence() {
    let trials = 500;
    let mut rejections = 0;
    for k in 0..trials {
        let mut rng = rng_from_seed(derive(40, &[k]));
        let (x, y) = (normals(&mut rng, 2000), normals(&mut rng, 2000));
        if granger_test(&x, &y, 2).unwrap().p_value < 0.05 {
            rejections += 1;
        }
    }
    let rate = rejections as f64 / trials as f64;
    assert!((0.03..=0.07).contains(&rate), "{rate}");
}

#[test]
fn independent_sources_yield_few_edges() {
    let cfg = GrangerConfig { max_lag: 2, alpha: 0.05 };
    let (mut edges, mut pairs) = (0, 0);
    for k in 0..100 {
        let mut rng = rng_from_seed(derive(41, &[k]));
        let cols: Vec<Vec<f64>> = (0..5).map(|_| normals(&mut rng, 200)).collect();
        let net = build_influence_network(&panel(&cols), &cfg).unwrap();
        edges += net.graph.edge_count();
        pairs += net.tests.len();
    }
    let fraction = edges as f64 / pairs as f64;
    assert!(fraction <= 0.05, "{fraction}");
}

#[test]
fn planted_chain_is_recovered() {
    let cfg = GrangerConfig { max_lag: 1, alpha: 0.05 };
    let mut clean = 0;
    for k in 0..100 {
        let mut rng = rng_from_seed(derive(42, &[k]));
        let net = build_influence_network(&panel(&chain(&mut rng, 5, 200)), &cfg).unwrap();
        let found = (0..4).filter(|&i| net.graph.has_edge(i, i + 1)).count();
        let spurious = net.graph.edge_count() - found;
        if found == 4 && spurious <= 1 {
            clean += 1;
        }
    }
    assert!(clean >= 90, "{clean}/100 panels");
}

#[test]
fn ols_matches_textbook_formulas() {
    let mut rng = rng_from_seed(43);
    let (n, k) = (20, 3);
    let x = DMatrix::from_fn(n, k, |_, j| if j == 0 { 1.0 } else { rng.random::<f64>() * 4.0 - 2.0 });
    let y: Vec<f64> = (0..n).map(|i| 0.5 - 1.5 * x[(i, 1)] + 0.25 * x[(i, 2)] + 0.3 * rng.sample::<f64, _>(StandardNormal)).collect();
    let fit = fit_ols(&x, &y).unwrap();

    // (X'X)^-1 by Gauss-Jordan elimination
    let xtx = x.transpose() * &x;
    let mut aug = DMatrix::from_fn(k, 2 * k, |i, j| if j < k { xtx[(i, j)] } else if j - k == i { 1.0 } else { 0.0 });
    for c in 0..k {
        let piv = aug[(c, c)];
        for j in 0..2 * k {
            aug[(c, j)] /= piv;
        }
        for r in 0..k {
            if r != c {
                let f = aug[(r, c)];
                for j in 0..2 * k {
                    aug[(r, j)] -= f * aug[(c, j)];
                }
            }
        }
    }
    let inv = aug.columns(k, k).into_owned();
    let xty = x.transpose() * DMatrix::from_column_slice(n, 1, &y);
    let beta = &inv * xty;
    let resid: Vec<f64> = (0..n).map(|i| y[i] - (0..k).map(|j| x[(i, j)] * beta[j]).sum::<f64>()).collect();
    let ssr: f64 = resid.iter().map(|r| r * r).sum();
    let s2 = ssr / (n - k) as f64;
    let t_dist = StudentsT::new(0.0, 1.0, (n - k) as f64).unwrap();
    for j in 0..k {
        let se = (s2 * inv[(j, j)]).sqrt();
        let t = beta[j] / se;
        let p = 2.0 * (1.0 - t_dist.cdf(t.abs()));
        assert!((fit.coefficients[j] - beta[j]).abs() < 1e-8);
        assert!((fit.std_errors[j] - se).abs() < 1e-8);
        assert!((fit.t_stats[j] - t).abs() < 1e-8);
        assert!((fit.p_values[j] - p).abs() < 1e-8);
    }
    let mean = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    assert!((fit.r_squared - (1.0 - ssr / sst)).abs() < 1e-10);
}

#[test]
fn duplicated_regressor_is_rank_deficient() {
    let mut rng = rng_from_seed(44);
    let d: Vec<f64> = (0..12).map(|_| rng.random::<f64>()).collect();
    let x = DMatrix::from_fn(12, 7, |i, j| match j {
        0 => 1.0,
        5 | 6 => d[i],
        _ => rng.random::<f64>(),
    });
    let y: Vec<f64> = (0..12).map(|_| rng.random::<f64>()).collect();
    assert!(matches!(fit_ols(&x, &y), Err(Error::RankDeficient { .. })));
}

fn observation(id: usize, rng: &mut SimRng, d: f64, log_y: f64) -> NetworkObservation {
    let size = rng.random_range(10..60);
    let density = rng.random::<f64>() * 0.8 + 0.1;
    NetworkObservation {
        id: format!("n{id}"),
        features: NetworkFeatures {
            avg_shortest_path: Some(1.0 + rng.random::<f64>() * 2.0),
            size,
            avg_clustering: rng.random::<f64>(),
            density,
            avg_degree: density * (size - 1) as f64,
            connected: true,
        },
        predicted_d: d,
        realized_y: log_y.exp(),
    }
}

#[test]
fn predicted_diversity_model_recovers_its_generating_line() {
    let mut rng = rng_from_seed(45);
    let obs: Vec<_> = (0..80)
        .map(|i| {
            let d = 1.0 + rng.random::<f64>() * 4.0;
            let noise: f64 = rng.sample(StandardNormal);
            observation(i, &mut rng, d, -2.14 + 0.49 * d + 0.3 * noise)
        })
        .collect();
    let report = run_regressions(&obs).unwrap();
    let m2 = &report.model("M2").unwrap().fit;
    assert!((m2.coefficients[0] + 2.14).abs() < 2.0 * m2.std_errors[0], "{:?}", m2.coefficients);
    assert!((m2.coefficients[1] - 0.49).abs() < 2.0 * m2.std_errors[1], "{:?}", m2.coefficients);
}

#[test]
fn unrelated_responses_give_insignificant_slopes() {
    // per-coefficient rate: requiring every slope of all three models to pass jointly
    // would be capped near 0.95^10 even for a perfectly calibrated test
    let reps = 200;
    let mut passes: Vec<Vec<usize>> = Vec::new();
    for k in 0..reps {
        let mut rng = rng_from_seed(derive(46, &[k]));
        let obs: Vec<_> = (0..40)
            .map(|i| {
                let d = 1.0 + rng.random::<f64>() * 4.0;
                let noise: f64 = rng.sample(StandardNormal);
                observation(i, &mut rng, d, noise)
            })
            .collect();
        let report = run_regressions(&obs).unwrap();
        for (m, model) in report.models.iter().enumerate() {
            if passes.len() <= m {
                passes.push(vec![0; model.terms.len()]);
            }
            for (j, p) in model.fit.p_values.iter().enumerate().skip(1) {
                passes[m][j] += usize::from(*p > 0.05);
            }
        }
    }
    for (m, counts) in passes.iter().enumerate() {
        for (j, &c) in counts.iter().enumerate().skip(1) {
            assert!(c * 10 >= reps as usize * 9, "model {m}, term {j}: {c}/{reps}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ols_residuals_are_orthogonal_to_the_design(seed in any::<u64>(), n in 8usize..40, k in 1usize..5, scale in 0.01f64..100.0) {
        let mut rng = rng_from_seed(seed);
        let x = DMatrix::from_fn(n, k, |_, j| if j == 0 { 1.0 } else { scale * rng.sample::<f64, _>(StandardNormal) });
        let y: Vec<f64> = (0..n).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
        let fit = fit_ols(&x, &y).unwrap();
        for j in 0..k {
            let dot: f64 = (0..n).map(|i| x[(i, j)] * fit.residuals[i]).sum();
            let norm = (0..n).map(|i| x[(i, j)].powi(2)).sum::<f64>().sqrt() * y.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!(dot.abs() < 1e-8 * norm.max(1.0), "column {}: {}", j, dot);
        }
        prop_assert!((0.0..=1.0).contains(&fit.r_squared));
    }

    #[test]
    fn full_model_fits_at_least_as_well_as_either_part(seed in any::<u64>(), n in 8usize..40) {
        let mut rng = rng_from_seed(seed);
        let obs: Vec<_> = (0..n)
            .map(|i| {
                let d = rng.random::<f64>() * 5.0;
                let y = rng.sample::<f64, _>(StandardNormal);
                observation(i, &mut rng, d, y)
            })
            .collect();
        let report = run_regressions(&obs).unwrap();
        let r2 = |m: &str| report.model(m).unwrap().fit.r_squared;
        prop_assert!(r2("M3") >= r2("M1").max(r2("M2")) - 1e-12);
    }

    #[test]
    fn empirical_diversity_ignores_labels_and_shifts(seed in any::<u64>(), n in 2usize..8, t in 2usize..30, shift in -100.0f64..100.0) {
        let mut rng = rng_from_seed(seed);
        let cols: Vec<Vec<f64>> = (0..n).map(|_| normals(&mut rng, t)).collect();
        let base = empirical_diversity(&panel(&cols)).unwrap();
        let mut moved: Vec<Vec<f64>> = cols.iter().map(|c| c.iter().map(|v| v + shift).collect()).collect();
        moved.rotate_left(1);
        moved.reverse();
        let other = empirical_diversity(&panel(&moved)).unwrap();
        prop_assert!((base - other).abs() < 1e-9 * base.max(1.0), "{} vs {}", base, other);
    }

    #[test]
    fn granger_network_ignores_affine_rescaling(seed in any::<u64>(), scales in prop::collection::vec((0.01f64..100.0, -50.0f64..50.0), 4)) {
        let mut rng = rng_from_seed(seed);
        let cols = chain(&mut rng, 4, 120);
        let cfg = GrangerConfig { max_lag: 2, alpha: 0.05 };
        let base = build_influence_network(&panel(&cols), &cfg).unwrap();
        let moved: Vec<Vec<f64>> = cols.iter().zip(&scales).map(|(c, &(a, b))| c.iter().map(|v| a * v + b).collect()).collect();
        let other = build_influence_network(&panel(&moved), &cfg).unwrap();
        for (x, y) in base.tests.iter().zip(&other.tests) {
            prop_assert!((x.f_stat - y.f_stat).abs() < 1e-8 * x.f_stat.max(1.0), "{} vs {}", x.f_stat, y.f_stat);
        }
        prop_assert_eq!(base.graph, other.graph);
    }
}
