use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::DEFAULT_ETA;
use crate::influence::GrangerConfig;

/// Version of the configuration schema understood by this build.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    ValidateSpectral,
    SweepSusceptibility,
    SweepConnectivity,
    SweepClustering,
    SweepCommunities,
    SweepUniqueness,
    Empirical,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::ValidateSpectral,
        ExperimentKind::SweepSusceptibility,
        ExperimentKind::SweepConnectivity,
        ExperimentKind::SweepClustering,
        ExperimentKind::SweepCommunities,
        ExperimentKind::SweepUniqueness,
        ExperimentKind::Empirical,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::ValidateSpectral => "validate-spectral",
            ExperimentKind::SweepSusceptibility => "sweep-susceptibility",
            ExperimentKind::SweepConnectivity => "sweep-connectivity",
            ExperimentKind::SweepClustering => "sweep-clustering",
            ExperimentKind::SweepCommunities => "sweep-communities",
            ExperimentKind::SweepUniqueness => "sweep-uniqueness",
            ExperimentKind::Empirical => "empirical",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn is_sweep(self) -> bool {
        !matches!(self, ExperimentKind::ValidateSpectral | ExperimentKind::Empirical)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Desk,
    Paper,
}

/// Network ensemble shared by the synthetic experiments. Which fields are
/// read depends on the experiment: `p` for Erdos-Renyi at a fixed density,
/// `k` for Watts-Strogatz, `mean_degree_fraction` for the two-block model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSettings {
    pub n: usize,
    pub p: f64,
    pub k: usize,
    pub mean_degree_fraction: f64,
    /// Graphs drawn per sweep value.
    pub graphs: usize,
    pub eta: f64,
}

impl Default for NetworkSettings {
    fn default() -> Self {
        NetworkSettings { n: 100, p: 0.5, k: 10, mean_degree_fraction: 0.5, graphs: 10, eta: DEFAULT_ETA }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSettings {
    pub sigma2: f64,
    /// Prejudice variance for Friedkin-Johnsen sweeps.
    pub xi2: f64,
    /// Significance level for KS tests and the BH correction.
    pub alpha: f64,
}

impl Default for ModelSettings {
    fn default() -> Self {
        ModelSettings { sigma2: 1.0, xi2: 0.5, alpha: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSettings {
    pub steps: usize,
    pub burn_in: usize,
    pub replicas: usize,
}

impl Default for SimulationSettings {
    fn default() -> Self {
        SimulationSettings { steps: 500, burn_in: 100, replicas: 20 }
    }
}

/// The swept axis: edge probability for `validate-spectral`,
/// `sweep-connectivity` and `sweep-uniqueness`; susceptibility; rewiring
/// probability; or intra-group probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSettings {
    pub values: Vec<f64>,
    /// Uniqueness strengths for `sweep-uniqueness`.
    pub betas: Vec<f64>,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings { values: Vec::new(), betas: vec![0.0, 1.0, 100.0] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PanelFormat {
    #[default]
    Long,
    Wide,
}

/// Panels simulated from noisy DeGroot dynamics on known Erdos-Renyi graphs
/// whose size and density are spread evenly over the given ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSuite {
    pub graphs: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub eta: f64,
    pub sigma2: f64,
    pub steps: usize,
    pub burn_in: usize,
}

impl Default for SyntheticSuite {
    fn default() -> Self {
        SyntheticSuite { graphs: 30, n_min: 8, n_max: 16, p_min: 0.15, p_max: 0.85, eta: 0.5, sigma2: 1.0, steps: 1100, burn_in: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmpiricalSettings {
    /// A panel CSV, or a directory whose `*.csv` files are read in name order.
    pub panels: Option<PathBuf>,
    pub format: PanelFormat,
    /// Used instead of `panels` when set.
    pub synthetic: Option<SyntheticSuite>,
    pub granger: GrangerConfig,
    /// Slack used to normalise inferred networks.
    pub eta: f64,
}

impl Default for EmpiricalSettings {
    fn default() -> Self {
        EmpiricalSettings { panels: None, format: PanelFormat::Long, synthetic: None, granger: GrangerConfig::default(), eta: DEFAULT_ETA }
    }
}

/// One experiment, fully described.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; `None` uses every core. Output does not depend on it.
    #[serde(default)]
    pub jobs: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub network: NetworkSettings,
    #[serde(default)]
    pub model: ModelSettings,
    #[serde(default)]
    pub simulation: SimulationSettings,
    #[serde(default)]
    pub sweep: SweepSettings,
    #[serde(default)]
    pub empirical: EmpiricalSettings,
}

fn grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    // rounded so that presets print as 0.1, 0.2, ... rather than 0.30000000000000004
    (0..points).map(|i| ((lo + (hi - lo) * i as f64 / (points - 1) as f64) * 1e9).round() / 1e9).collect()
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Parse { path: PathBuf::from("<config>"), reason: e.to_string() })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).map_err(|e| Error::Parse { path: path.to_path_buf(), reason: e.to_string() })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// Shipped presets. Desk scale finishes in minutes on one core; full
    /// scale (100 graphs x 100 replicas) takes hours.
    pub fn preset(kind: ExperimentKind, scale: Scale) -> Self {
        let paper = scale == Scale::Paper;
        let mut cfg = ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            experiment: kind,
            seed: 2024,
            jobs: None,
            out: None,
            network: NetworkSettings { graphs: if paper { 100 } else { 10 }, ..Default::default() },
            model: ModelSettings::default(),
            simulation: SimulationSettings { replicas: if paper { 100 } else { 20 }, ..Default::default() },
            sweep: SweepSettings::default(),
            empirical: EmpiricalSettings::default(),
        };
        match kind {
            ExperimentKind::ValidateSpectral | ExperimentKind::SweepConnectivity => cfg.sweep.values = grid(0.1, 0.9, 9),
            ExperimentKind::SweepSusceptibility => {
                cfg.sweep.values = grid(0.0, 1.0, 6);
                cfg.model.sigma2 = 0.5;
                cfg.model.xi2 = 0.5;
                cfg.network.graphs = if paper { 20 } else { 10 };
            }
            ExperimentKind::SweepClustering => {
                cfg.sweep.values = grid(0.0, 1.0, 6);
                cfg.network.graphs = if paper { 100 } else { 20 };
            }
            ExperimentKind::SweepCommunities => cfg.sweep.values = grid(0.0, 1.0, 11),
            ExperimentKind::SweepUniqueness => {
                cfg.sweep.values = if paper { grid(0.1, 0.9, 9) } else { vec![0.1, 0.5, 0.9] };
            }
            ExperimentKind::Empirical => {
                let suite = SyntheticSuite::default();
                cfg.empirical.eta = suite.eta;
                cfg.empirical.granger.max_lag = 2;
                cfg.empirical.synthetic = Some(SyntheticSuite { graphs: if paper { 161 } else { 30 }, ..suite });
            }
        }
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::param(
                "schema_version",
                format!("this build reads version {SCHEMA_VERSION}, got {}", self.schema_version),
            ));
        }
        if self.jobs == Some(0) {
            return Err(Error::param("jobs", "must be >= 1"));
        }
        let net = &self.network;
        if net.n == 0 || net.graphs == 0 {
            return Err(Error::param("network", "n and graphs must be >= 1"));
        }
        if !(net.eta > 0.0 && net.eta.is_finite()) {
            return Err(Error::param("network.eta", format!("must be > 0, got {}", net.eta)));
        }
        let m = &self.model;
        if !(m.sigma2 >= 0.0 && m.sigma2.is_finite() && m.xi2 >= 0.0 && m.xi2.is_finite()) {
            return Err(Error::param("model", "sigma2 and xi2 must be finite and >= 0"));
        }
        if !(m.alpha > 0.0 && m.alpha < 1.0) {
            return Err(Error::param("model.alpha", format!("must lie in (0, 1), got {}", m.alpha)));
        }
        let s = &self.simulation;
        if s.burn_in >= s.steps || s.replicas == 0 {
            return Err(Error::param("simulation", "need burn_in < steps and replicas >= 1"));
        }
        let unit = |name: &'static str, v: &[f64]| -> Result<()> {
            if v.is_empty() {
                return Err(Error::param(name, "must list at least one value"));
            }
            if let Some(x) = v.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                return Err(Error::param(name, format!("{x} is outside [0, 1]")));
            }
            Ok(())
        };
        match self.experiment {
            ExperimentKind::ValidateSpectral => {
                unit("sweep.values", &self.sweep.values)?;
                if m.sigma2 <= 0.0 {
                    return Err(Error::param("model.sigma2", "must be > 0: the KS reference N(0, sigma2) is degenerate otherwise"));
                }
            }
            ExperimentKind::SweepSusceptibility | ExperimentKind::SweepConnectivity | ExperimentKind::SweepClustering => {
                unit("sweep.values", &self.sweep.values)?
            }
            ExperimentKind::SweepCommunities => {
                unit("sweep.values", &self.sweep.values)?;
                if net.n < 2 {
                    return Err(Error::param("network.n", "two blocks need n >= 2"));
                }
                let f = net.mean_degree_fraction;
                if let Some(pi) = self.sweep.values.iter().find(|pi| !(0.0..=1.0).contains(&(2.0 * f - **pi))) {
                    return Err(Error::param("sweep.values", format!("intra probability {pi} makes 2k/N - pi leave [0, 1]")));
                }
            }
            ExperimentKind::SweepUniqueness => {
                unit("sweep.values", &self.sweep.values)?;
                if self.sweep.betas.is_empty() || self.sweep.betas.iter().any(|b| !(*b >= 0.0 && b.is_finite())) {
                    return Err(Error::param("sweep.betas", "must list finite values >= 0"));
                }
            }
            ExperimentKind::Empirical => {
                let e = &self.empirical;
                e.granger.validate()?;
                if !(e.eta > 0.0 && e.eta.is_finite()) {
                    return Err(Error::param("empirical.eta", format!("must be > 0, got {}", e.eta)));
                }
                match (&e.synthetic, &e.panels) {
                    (None, None) => return Err(Error::NoInput("empirical experiments need `panels` or `synthetic`".into())),
                    (Some(s), _) => {
                        if s.graphs == 0 || s.n_min < 2 || s.n_min > s.n_max || s.burn_in >= s.steps {
                            return Err(Error::param("empirical.synthetic", "need graphs >= 1, 2 <= n_min <= n_max, burn_in < steps"));
                        }
                        if !(0.0..=1.0).contains(&s.p_min) || !(0.0..=1.0).contains(&s.p_max) || s.p_min > s.p_max {
                            return Err(Error::param("empirical.synthetic", "need 0 <= p_min <= p_max <= 1"));
                        }
                        if !(s.eta > 0.0) || !(s.sigma2 > 0.0) {
                            return Err(Error::param("empirical.synthetic", "eta and sigma2 must be > 0"));
                        }
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_round_trip() {
        for kind in ExperimentKind::ALL {
            for scale in [Scale::Desk, Scale::Paper] {
                let cfg = ExperimentConfig::preset(kind, scale);
                cfg.validate().unwrap();
                assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
            }
            assert_eq!(ExperimentKind::parse(kind.name()), Some(kind));
        }
    }

    #[test]
    fn preset_grids_are_clean() {
        let cfg = ExperimentConfig::preset(ExperimentKind::SweepConnectivity, Scale::Desk);
        assert_eq!(cfg.sweep.values, vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = ExperimentConfig::preset(ExperimentKind::ValidateSpectral, Scale::Desk);
        cfg.model.sigma2 = 0.0;
        assert!(cfg.validate().unwrap_err().is_validation());
        let mut cfg = ExperimentConfig::preset(ExperimentKind::Empirical, Scale::Desk);
        cfg.empirical.synthetic = None;
        assert!(matches!(cfg.validate(), Err(Error::NoInput(_))));
        let text = "schema_version = 2\nexperiment = \"empirical\"\n";
        assert!(ExperimentConfig::from_toml(text).is_err());
        let text = "schema_version = 1\nexperiment = \"sweep-connectivity\"\nbogus = 1\n";
        assert!(matches!(ExperimentConfig::from_toml(text), Err(Error::Parse { .. })));
    }

    #[test]
    fn minimal_file_uses_defaults() {
        let text = "schema_version = 1\nexperiment = \"sweep-clustering\"\nseed = 9\n[sweep]\nvalues = [0.0, 1.0]\n";
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(cfg.network.k, 10);
        assert_eq!(cfg.simulation.steps, 500);
        assert_eq!(cfg.seed, 9);
    }
}
