use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::Serialize;

use super::{noise_variances, Dynamics, ModelSpec, Noise, Prejudice, Record, SimulationConfig};
use crate::error::{Error, Result};
use crate::graph::TrustMatrix;
use crate::rng::{derive, rng_from_seed, tag, SimRng};

/// Generator for the noise of step `t` of the run seeded with `seed`.
///
/// Each step reads its own ChaCha stream, so any row of a trajectory can be
/// regenerated from the previous row without replaying earlier draws.
pub fn step_rng(seed: u64, t: usize) -> SimRng {
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream(t as u64);
    rng.set_word_pos(0);
    rng
}

/// Update rule with prejudices resolved, plus scratch space.
struct Kernel<'a> {
    a: &'a TrustMatrix,
    s: f64,
    /// `(1 - s) rho`, empty for DeGroot.
    offset: Vec<f64>,
    noise: Noise,
    var: Vec<f64>,
}

impl<'a> Kernel<'a> {
    fn new(model: &ModelSpec, a: &'a TrustMatrix) -> Result<Self> {
        let n = a.n();
        model.validate(Some(n))?;
        let (s, offset) = match &model.dynamics {
            Dynamics::DeGroot => (1.0, Vec::new()),
            Dynamics::FriedkinJohnsen { susceptibility, prejudice: Prejudice::Explicit { values } } => {
                (*susceptibility, values.iter().map(|r| (1.0 - susceptibility) * r).collect())
            }
            Dynamics::FriedkinJohnsen { prejudice: Prejudice::Random { .. }, .. } => {
                return Err(Error::param("prejudice", "random prejudices must be drawn with ModelSpec::realize before stepping"));
            }
        };
        if model.noise.sigma2() > 0.0 && s * a.row_sum() >= 1.0 {
            return Err(Error::NonStationary(format!(
                "noisy dynamics need s * (row sum) < 1, got {} * {}",
                s,
                a.row_sum()
            )));
        }
        Ok(Kernel { a, s, offset, noise: model.noise, var: vec![0.0; n] })
    }

    fn apply<R: Rng + ?Sized>(&mut self, y_prev: &[f64], out: &mut [f64], rng: &mut R) -> Result<()> {
        self.a.mul_vec_into(y_prev, out);
        if self.s != 1.0 {
            for o in out.iter_mut() {
                *o *= self.s;
            }
        }
        for (o, c) in out.iter_mut().zip(&self.offset) {
            *o += c;
        }
        if !matches!(self.noise, Noise::None) {
            noise_variances(&self.noise, y_prev, self.a, &mut self.var)?;
            for (o, v) in out.iter_mut().zip(&self.var) {
                let z: f64 = rng.sample(StandardNormal);
                *o += v.sqrt() * z;
            }
        }
        Ok(())
    }
}

/// One synchronous update of every agent.
pub fn step<R: Rng + ?Sized>(model: &ModelSpec, a: &TrustMatrix, y_prev: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    if y_prev.len() != a.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), got: y_prev.len() });
    }
    let mut kernel = Kernel::new(model, a)?;
    let mut out = vec![0.0; a.n()];
    kernel.apply(y_prev, &mut out, rng)?;
    Ok(out)
}

/// Deterministic fixed point `(I - s A)^{-1} (1 - s) rho` of the
/// Friedkin-Johnsen update.
pub fn fj_fixed_point(a: &TrustMatrix, s: f64, rho: &[f64]) -> Result<Vec<f64>> {
    let n = a.n();
    if rho.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: rho.len() });
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::param("susceptibility", format!("must lie in [0, 1], got {s}")));
    }
    // uniform row sums make the row sum the spectral radius
    if s * a.row_sum() >= 1.0 {
        return Err(Error::Singular(format!("s * lambda_1 = {} >= 1", s * a.row_sum())));
    }
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } - s * a.get(i, j));
    let b = nalgebra::DVector::from_iterator(n, rho.iter().map(|r| (1.0 - s) * r));
    let y = m.lu().solve(&b).ok_or_else(|| Error::Singular("I - sA".into()))?;
    Ok(y.iter().copied().collect())
}

/// Diversity statistics averaged over the measurement window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowStats {
    /// Mean square deviation from the process mean (0, or the
    /// Friedkin-Johnsen fixed point for explicit prejudices).
    pub realized_d: f64,
    /// Mean square deviation from the per-step sample mean.
    pub centered_d: f64,
    /// Median absolute deviation from the per-step sample median.
    pub mad: f64,
    /// Number of time steps averaged.
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub n: usize,
    pub seed: u64,
    /// The model with any random prejudices replaced by the drawn values.
    pub model: ModelSpec,
    /// Time index of every stored row.
    pub times: Vec<usize>,
    /// Stored rows, row-major `times.len() x n`.
    pub opinions: Vec<f64>,
    pub terminal: Vec<f64>,
    pub window: WindowStats,
}

impl Trajectory {
    pub fn row(&self, k: usize) -> &[f64] {
        &self.opinions[k * self.n..(k + 1) * self.n]
    }

    /// Writes stored rows as `t,node,opinion`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "node", "opinion"])?;
        for (k, t) in self.times.iter().enumerate() {
            for (i, y) in self.row(k).iter().enumerate() {
                out.write_record([t.to_string(), i.to_string(), y.to_string()])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

struct WindowAccumulator {
    center: Vec<f64>,
    scratch: Vec<f64>,
    sum_d: f64,
    sum_centered: f64,
    sum_mad: f64,
    samples: usize,
}

impl WindowAccumulator {
    fn push(&mut self, y: &[f64]) {
        let n = y.len() as f64;
        self.sum_d += y.iter().zip(&self.center).map(|(a, c)| (a - c).powi(2)).sum::<f64>() / n;
        let mean = y.iter().sum::<f64>() / n;
        self.sum_centered += y.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
        self.scratch.clear();
        self.scratch.extend_from_slice(y);
        let med = median_in_place(&mut self.scratch);
        for v in self.scratch.iter_mut() {
            *v = (*v - med).abs();
        }
        self.sum_mad += median_in_place(&mut self.scratch);
        self.samples += 1;
    }

    fn finish(self) -> WindowStats {
        let k = self.samples as f64;
        WindowStats { realized_d: self.sum_d / k, centered_d: self.sum_centered / k, mad: self.sum_mad / k, samples: self.samples }
    }
}

fn median_in_place(v: &mut [f64]) -> f64 {
    v.sort_unstable_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Simulates one trajectory seeded by `config.seed`.
///
/// Initial opinions are i.i.d. Gaussian; step `t` draws its noise from
/// [`step_rng`]`(seed, t)`.
pub fn run(model: &ModelSpec, a: &TrustMatrix, config: &SimulationConfig) -> Result<Trajectory> {
    config.validate()?;
    let n = a.n();
    model.validate(Some(n))?;
    let seed = config.seed;
    let realized = model.realize(n, seed)?;
    let mut kernel = Kernel::new(&realized, a)?;

    let center = match &model.dynamics {
        Dynamics::FriedkinJohnsen { susceptibility, prejudice: Prejudice::Explicit { values } } => {
            fj_fixed_point(a, *susceptibility, values)?
        }
        _ => vec![0.0; n],
    };

    let init_sd = config.initial_variance_for(&model.noise).sqrt();
    let normal = Normal::new(0.0, init_sd).map_err(|e| Error::param("initial_variance", e.to_string()))?;
    let mut init_rng = rng_from_seed(derive(seed, &[tag::INITIAL]));
    let mut y: Vec<f64> = (0..n).map(|_| normal.sample(&mut init_rng)).collect();
    let mut next = vec![0.0; n];

    let mut acc = WindowAccumulator { center, scratch: Vec::with_capacity(n), sum_d: 0.0, sum_centered: 0.0, sum_mad: 0.0, samples: 0 };
    let mut times = Vec::new();
    let mut opinions = Vec::new();
    let keep = |t: usize, y: &[f64], times: &mut Vec<usize>, opinions: &mut Vec<f64>| {
        if config.record == Record::FullTrajectory || (config.record == Record::TerminalState && t == config.steps) {
            times.push(t);
            opinions.extend_from_slice(y);
        }
    };

    keep(0, &y, &mut times, &mut opinions);
    if config.burn_in == 0 {
        acc.push(&y);
    }
    for t in 1..=config.steps {
        let mut rng = step_rng(seed, t);
        kernel.apply(&y, &mut next, &mut rng)?;
        std::mem::swap(&mut y, &mut next);
        if t >= config.burn_in {
            acc.push(&y);
        }
        keep(t, &y, &mut times, &mut opinions);
    }

    Ok(Trajectory { n, seed, model: realized, times, opinions, terminal: y, window: acc.finish() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_connected, trust_matrix, Generator, GeneratorConfig, UndirectedGraph};

    fn er(n: usize, p: f64, seed: u64) -> TrustMatrix {
        let (g, _) = generate_connected(&GeneratorConfig { generator: Generator::ErdosRenyi { n, p }, seed }).unwrap();
        trust_matrix(&g, 0.01).unwrap()
    }

    #[test]
    fn consensus_is_a_fixed_point_of_stochastic_degroot() {
        let g = UndirectedGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (0, 2)], true).unwrap();
        let a = TrustMatrix::stochastic(&g).unwrap();
        let mut rng = rng_from_seed(0);
        let y = step(&ModelSpec::degroot(Noise::None), &a, &[2.5; 4], &mut rng).unwrap();
        for v in y {
            assert!((v - 2.5).abs() < 1e-14);
        }
    }

    #[test]
    fn fj_without_susceptibility_returns_prejudice() {
        let a = er(10, 0.4, 3);
        let rho: Vec<f64> = (0..10).map(|i| i as f64 - 4.5).collect();
        let model = ModelSpec::fj(0.0, Prejudice::Explicit { values: rho.clone() }, Noise::None);
        let y = step(&model, &a, &[7.0; 10], &mut rng_from_seed(0)).unwrap();
        assert_eq!(y, rho);
    }

    #[test]
    fn noisy_step_on_stochastic_matrix_is_refused() {
        let g = UndirectedGraph::from_edges(2, &[(0, 1)], true).unwrap();
        let a = TrustMatrix::stochastic(&g).unwrap();
        let err = step(&ModelSpec::degroot(Noise::Iid { sigma2: 1.0 }), &a, &[0.0; 2], &mut rng_from_seed(0));
        assert!(matches!(err, Err(Error::NonStationary(_))));
        assert!(step(&ModelSpec::degroot(Noise::None), &a, &[0.0; 3], &mut rng_from_seed(0)).is_err());
    }

    #[test]
    fn negligible_influence_is_pure_noise() {
        // A = 1e-12 stands in for A = 0, which is not a trust matrix
        let a = trust_matrix(&UndirectedGraph::empty(1, true), 1e12).unwrap();
        let model = ModelSpec::degroot(Noise::Iid { sigma2: 1.0 });
        let mut y = vec![0.0];
        let (mut s, mut s2) = (0.0, 0.0);
        let steps = 100_000;
        for t in 0..steps {
            y = step(&model, &a, &y, &mut step_rng(9, t)).unwrap();
            s += y[0];
            s2 += y[0] * y[0];
        }
        let mean = s / steps as f64;
        let var = s2 / steps as f64 - mean * mean;
        assert!((var - 1.0).abs() < 0.03, "{var}");
    }

    #[test]
    fn fixed_point_examples() {
        let a = er(10, 0.5, 1);
        let rho: Vec<f64> = (0..10).map(|i| (i as f64).sin()).collect();
        assert_eq!(fj_fixed_point(&a, 0.0, &rho).unwrap(), rho);
        assert!(fj_fixed_point(&a, 0.7, &[0.0; 10]).unwrap().iter().all(|v| *v == 0.0));
        let y = fj_fixed_point(&a, 0.7, &rho).unwrap();
        let model = ModelSpec::fj(0.7, Prejudice::Explicit { values: rho }, Noise::None);
        let z = step(&model, &a, &y, &mut rng_from_seed(0)).unwrap();
        let resid = y.iter().zip(&z).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(resid < 1e-10);
    }

    #[test]
    fn fixed_point_refuses_unit_spectral_radius() {
        let g = UndirectedGraph::from_edges(2, &[(0, 1)], true).unwrap();
        let a = TrustMatrix::stochastic(&g).unwrap();
        assert!(matches!(fj_fixed_point(&a, 1.0, &[1.0, 0.0]), Err(Error::Singular(_))));
    }

    #[test]
    fn noiseless_degroot_reaches_consensus() {
        let (g, _) = generate_connected(&GeneratorConfig { generator: Generator::ErdosRenyi { n: 30, p: 0.2 }, seed: 5 }).unwrap();
        let a = TrustMatrix::stochastic(&g).unwrap();
        let cfg = SimulationConfig { steps: 10_000, burn_in: 0, replicas: 1, seed: 2, ..Default::default() };
        let tr = run(&ModelSpec::degroot(Noise::None), &a, &cfg).unwrap();
        let first = tr.terminal[0];
        assert!(tr.terminal.iter().all(|v| (v - first).abs() < 1e-6));
    }

    #[test]
    fn runs_are_reproducible_and_replayable() {
        let a = er(20, 0.3, 8);
        let model = ModelSpec::degroot(Noise::LocalUniqueness { sigma2: 1.0, beta: 2.0 });
        let cfg = SimulationConfig { steps: 50, burn_in: 10, seed: 77, record: Record::FullTrajectory, ..Default::default() };
        let r1 = run(&model, &a, &cfg).unwrap();
        let r2 = run(&model, &a, &cfg).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(r1.times.len(), 51);
        for t in [1usize, 17, 50] {
            let y = step(&model, &a, r1.row(t - 1), &mut step_rng(77, t)).unwrap();
            assert_eq!(y.as_slice(), r1.row(t));
        }
    }

    #[test]
    fn zero_noise_matches_deterministic_run() {
        let a = er(15, 0.4, 4);
        let cfg = SimulationConfig { steps: 40, burn_in: 1, seed: 3, initial_variance: Some(1.0), record: Record::FullTrajectory, ..Default::default() };
        let noisy = run(&ModelSpec::degroot(Noise::Iid { sigma2: 0.0 }), &a, &cfg).unwrap();
        let quiet = run(&ModelSpec::degroot(Noise::None), &a, &cfg).unwrap();
        assert_eq!(noisy.opinions, quiet.opinions);
    }

    #[test]
    fn record_modes() {
        let a = er(5, 0.8, 1);
        let model = ModelSpec::degroot(Noise::Iid { sigma2: 1.0 });
        let mut cfg = SimulationConfig { steps: 10, burn_in: 5, seed: 1, ..Default::default() };
        let t = run(&model, &a, &cfg).unwrap();
        assert_eq!(t.times, vec![10]);
        assert_eq!(t.row(0), t.terminal.as_slice());
        assert_eq!(t.window.samples, 6);
        cfg.record = Record::WindowedDiversity;
        assert!(run(&model, &a, &cfg).unwrap().times.is_empty());
        cfg.burn_in = 10;
        assert!(run(&model, &a, &cfg).is_err());
    }

    #[test]
    fn trajectory_csv_layout() {
        let a = er(2, 1.0, 0);
        let cfg = SimulationConfig { steps: 1, burn_in: 0, seed: 1, record: Record::FullTrajectory, ..Default::default() };
        let t = run(&ModelSpec::degroot(Noise::None), &a, &cfg).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,node,opinion\n0,0,"));
        assert_eq!(text.lines().count(), 5);
    }
}
