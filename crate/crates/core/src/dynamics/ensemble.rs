use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::{run, Dynamics, ModelSpec, Prejudice, Record, SimulationConfig};
use crate::error::Result;
use crate::graph::TrustMatrix;
use crate::rng::split;
use crate::spectral::{self, DiversityPrediction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReplicaSummary {
    pub replica: usize,
    pub seed: u64,
    pub realized_d: f64,
    pub centered_d: f64,
    pub mad: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub replicas: Vec<ReplicaSummary>,
    /// Terminal opinions of every replica, concatenated in replica order.
    pub pooled_terminal: Vec<f64>,
    pub predicted: Option<DiversityPrediction>,
}

impl EnsembleResult {
    fn mean_of(&self, f: impl Fn(&ReplicaSummary) -> f64) -> f64 {
        self.replicas.iter().map(f).sum::<f64>() / self.replicas.len() as f64
    }

    pub fn mean_realized_d(&self) -> f64 {
        self.mean_of(|r| r.realized_d)
    }

    pub fn mean_centered_d(&self) -> f64 {
        self.mean_of(|r| r.centered_d)
    }

    pub fn mean_mad(&self) -> f64 {
        self.mean_of(|r| r.mad)
    }

    /// Writes `replica,realized_d,centered_d,mad,predicted_d,seed`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["replica", "realized_d", "centered_d", "mad", "predicted_d", "seed"])?;
        let predicted = self.predicted.map(|p| p.d.to_string()).unwrap_or_default();
        for r in &self.replicas {
            out.write_record([
                r.replica.to_string(),
                r.realized_d.to_string(),
                r.centered_d.to_string(),
                r.mad.to_string(),
                predicted.clone(),
                r.seed.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Closed-form stationary diversity for `model` on `a`, when one exists.
///
/// Adaptive noise has no closed form; its prediction is the i.i.d. value at
/// the same `sigma2`. Explicit prejudices contribute no variance. Complex
/// spectra fall back to the directed upper bound for DeGroot and to `None`
/// for Friedkin-Johnsen.
pub fn predict(model: &ModelSpec, a: &TrustMatrix) -> Result<Option<DiversityPrediction>> {
    let spec = spectral::spectrum(a)?;
    let sigma2 = model.noise.sigma2();
    let prediction = match &model.dynamics {
        Dynamics::DeGroot if spec.is_real() => Some(spectral::diversity_degroot(&spec, sigma2)?),
        Dynamics::DeGroot => Some(spectral::diversity_directed_bound(&spec, sigma2)?),
        Dynamics::FriedkinJohnsen { .. } if !spec.is_real() => None,
        Dynamics::FriedkinJohnsen { susceptibility, prejudice } => {
            let xi2 = match prejudice {
                Prejudice::Random { variance } => *variance,
                Prejudice::Explicit { .. } => 0.0,
            };
            Some(spectral::diversity_fj(&spec, sigma2, xi2, *susceptibility)?)
        }
    };
    Ok(prediction)
}

/// Runs `config.replicas` independent trajectories. Replica `r` is seeded
/// with `split(config.seed, r)`, so results do not depend on scheduling and
/// two graphs simulated under the same master seed share noise streams.
pub fn run_ensemble(model: &ModelSpec, a: &TrustMatrix, config: &SimulationConfig) -> Result<EnsembleResult> {
    config.validate()?;
    model.validate(Some(a.n()))?;
    let predicted = predict(model, a)?;
    let runs: Vec<_> = (0..config.replicas)
        .into_par_iter()
        .map(|r| {
            let cfg = SimulationConfig { seed: split(config.seed, r as u64), record: Record::WindowedDiversity, ..config.clone() };
            run(model, a, &cfg).map(|t| (r, t))
        })
        .collect::<Result<_>>()?;
    let mut replicas = Vec::with_capacity(runs.len());
    let mut pooled_terminal = Vec::with_capacity(runs.len() * a.n());
    for (r, t) in runs {
        replicas.push(ReplicaSummary {
            replica: r,
            seed: t.seed,
            realized_d: t.window.realized_d,
            centered_d: t.window.centered_d,
            mad: t.window.mad,
        });
        pooled_terminal.extend_from_slice(&t.terminal);
    }
    Ok(EnsembleResult { replicas, pooled_terminal, predicted })
}
