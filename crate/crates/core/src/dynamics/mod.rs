//! DeGroot and Friedkin-Johnsen opinion dynamics, with optional i.i.d. or
//! state-dependent Gaussian noise.

mod ensemble;
mod noise;
mod simulate;

pub use ensemble::{predict, run_ensemble, EnsembleResult, ReplicaSummary};
pub use noise::{noise_variances, sample_noise};
pub use simulate::{fj_fixed_point, run, step, step_rng, Trajectory, WindowStats};

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive, rng_from_seed, tag};

/// Update rule applied to the previous opinion vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Dynamics {
    /// `y_t = A y_{t-1}`
    DeGroot,
    /// `y_t = s A y_{t-1} + (1 - s) rho`
    FriedkinJohnsen { susceptibility: f64, prejudice: Prejudice },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Prejudice {
    Explicit { values: Vec<f64> },
    /// Drawn i.i.d. `N(0, variance)` once per replica.
    Random { variance: f64 },
}

/// Additive noise regime. `GlobalUniqueness` shrinks the variance of agents
/// far from the population mean, `LocalUniqueness` of agents far from their
/// neighbours.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Noise {
    None,
    Iid { sigma2: f64 },
    GlobalUniqueness { sigma2: f64, beta: f64 },
    LocalUniqueness { sigma2: f64, beta: f64 },
}

impl Noise {
    pub fn sigma2(&self) -> f64 {
        match *self {
            Noise::None => 0.0,
            Noise::Iid { sigma2 } | Noise::GlobalUniqueness { sigma2, .. } | Noise::LocalUniqueness { sigma2, .. } => sigma2,
        }
    }

    pub fn is_adaptive(&self) -> bool {
        matches!(self, Noise::GlobalUniqueness { .. } | Noise::LocalUniqueness { .. })
    }

    pub fn validate(&self) -> Result<()> {
        let s2 = self.sigma2();
        if !(s2 >= 0.0 && s2.is_finite()) {
            return Err(Error::param("sigma2", format!("must be finite and >= 0, got {s2}")));
        }
        if let Noise::GlobalUniqueness { beta, .. } | Noise::LocalUniqueness { beta, .. } = *self {
            if !(beta >= 0.0 && beta.is_finite()) {
                return Err(Error::param("beta", format!("must be finite and >= 0, got {beta}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub dynamics: Dynamics,
    pub noise: Noise,
}

impl ModelSpec {
    pub fn degroot(noise: Noise) -> Self {
        ModelSpec { dynamics: Dynamics::DeGroot, noise }
    }

    pub fn fj(susceptibility: f64, prejudice: Prejudice, noise: Noise) -> Self {
        ModelSpec { dynamics: Dynamics::FriedkinJohnsen { susceptibility, prejudice }, noise }
    }

    /// Checks parameter ranges; with `n` given, also the prejudice length.
    pub fn validate(&self, n: Option<usize>) -> Result<()> {
        self.noise.validate()?;
        if let Dynamics::FriedkinJohnsen { susceptibility, prejudice } = &self.dynamics {
            if !(0.0..=1.0).contains(susceptibility) {
                return Err(Error::param("susceptibility", format!("must lie in [0, 1], got {susceptibility}")));
            }
            match prejudice {
                Prejudice::Explicit { values } => {
                    if let Some(n) = n {
                        if values.len() != n {
                            return Err(Error::DimensionMismatch { expected: n, got: values.len() });
                        }
                    }
                    if values.iter().any(|v| !v.is_finite()) {
                        return Err(Error::param("prejudice", "values must be finite"));
                    }
                }
                Prejudice::Random { variance } => {
                    if !(*variance >= 0.0 && variance.is_finite()) {
                        return Err(Error::param("prejudice.variance", format!("must be finite and >= 0, got {variance}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Uniform susceptibility; 1 for DeGroot.
    pub fn susceptibility(&self) -> f64 {
        match &self.dynamics {
            Dynamics::DeGroot => 1.0,
            Dynamics::FriedkinJohnsen { susceptibility, .. } => *susceptibility,
        }
    }

    /// Replaces random prejudices by a concrete draw for `n` agents. The draw
    /// depends only on `seed`.
    pub fn realize(&self, n: usize, seed: u64) -> Result<ModelSpec> {
        match &self.dynamics {
            Dynamics::FriedkinJohnsen { susceptibility, prejudice: Prejudice::Random { variance } } => {
                let mut rng = rng_from_seed(derive(seed, &[tag::PREJUDICE]));
                let normal = Normal::new(0.0, variance.sqrt())
                    .map_err(|e| Error::param("prejudice.variance", e.to_string()))?;
                let values = (0..n).map(|_| normal.sample(&mut rng)).collect();
                Ok(ModelSpec::fj(*susceptibility, Prejudice::Explicit { values }, self.noise))
            }
            _ => Ok(self.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Record {
    FullTrajectory,
    #[default]
    TerminalState,
    WindowedDiversity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub steps: usize,
    /// Diversity is averaged over `t` in `burn_in..=steps`.
    pub burn_in: usize,
    pub replicas: usize,
    pub seed: u64,
    pub record: Record,
    /// Variance of the i.i.d. Gaussian initial opinions. Defaults to the noise
    /// variance, or 1 for noiseless models.
    pub initial_variance: Option<f64>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig { steps: 500, burn_in: 100, replicas: 100, seed: 0, record: Record::TerminalState, initial_variance: None }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.steps {
            return Err(Error::param("burn_in", format!("must be < steps ({}), got {}", self.steps, self.burn_in)));
        }
        if self.replicas == 0 {
            return Err(Error::param("replicas", "must be >= 1"));
        }
        if let Some(v) = self.initial_variance {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param("initial_variance", format!("must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    pub(crate) fn initial_variance_for(&self, noise: &Noise) -> f64 {
        self.initial_variance.unwrap_or_else(|| {
            let s2 = noise.sigma2();
            if s2 > 0.0 {
                s2
            } else {
                1.0
            }
        })
    }
}
