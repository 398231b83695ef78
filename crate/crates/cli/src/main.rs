use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use opdiv_core::dynamics::{run, run_ensemble, ModelSpec, Noise, Prejudice, Record, SimulationConfig};
use opdiv_core::experiment::{
    cmd_empirical, read_observations, run_experiment, write_report, write_tables, ExperimentConfig, ExperimentKind, PanelFormat, Scale,
    Table,
};
use opdiv_core::graph::{
    features, generate, generate_connected, io, trust_matrix, Generator, GeneratorConfig, TrustMatrix, DEFAULT_ETA,
};
use opdiv_core::influence::run_regressions;
use opdiv_core::rng::split;
use opdiv_core::spectral::{diversity_degroot, diversity_directed_bound, diversity_fj, marginal_contributions, spectrum};
use serde::Serialize;

mod error;

use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "opdiv", version, about = "Noisy opinion dynamics on networks: simulation and spectral diversity")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Experiment configuration (TOML). Flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed. Overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Preset used when no --config is given.
    #[arg(long, global = true, value_enum, default_value_t = ScaleArg::Desk)]
    scale: ScaleArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScaleArg {
    Desk,
    Paper,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw a random graph and write its edge list, trust matrix and features.
    Generate(GenerateArgs),
    /// Simulate an ensemble of noisy runs on a network.
    Simulate(SimulateArgs),
    /// Closed-form diversity and spectrum of a network.
    Diversity(DiversityArgs),
    /// KS validation of predicted diversity over Erdos-Renyi ensembles.
    ValidateSpectral,
    /// Sweep one network or model parameter.
    Sweep(SweepArgs),
    /// Infer Granger influence networks from opinion panels.
    Granger(PanelArgs),
    /// Regress realized diversity on topology and predicted diversity.
    Regress(RegressArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GeneratorKind {
    Er,
    Ws,
    Sbm,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value_t = GeneratorKind::Er)]
    generator: GeneratorKind,
    #[arg(long)]
    n: Option<usize>,
    /// Edge probability (Erdos-Renyi).
    #[arg(long)]
    p: Option<f64>,
    /// Lattice degree (Watts-Strogatz).
    #[arg(long)]
    k: Option<usize>,
    /// Rewiring probability (Watts-Strogatz).
    #[arg(long, default_value_t = 0.0)]
    q: f64,
    /// Block sizes, comma separated (two-block model).
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    /// Within-block probability.
    #[arg(long)]
    pi: Option<f64>,
    /// Between-block probability; defaults to `2 f - pi` for the configured
    /// mean degree fraction `f`.
    #[arg(long)]
    inter: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    /// Keep the first draw even if it is disconnected.
    #[arg(long)]
    allow_disconnected: bool,
    /// Also write the dense trust matrix.
    #[arg(long)]
    dense: bool,
}

#[derive(Debug, Args)]
struct NetworkInput {
    /// Undirected edge list (`src,dst,weight`).
    #[arg(long, conflicts_with = "matrix")]
    graph: Option<PathBuf>,
    /// Dense trust matrix with a header row.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Slack for edge-list input.
    #[arg(long, default_value_t = DEFAULT_ETA)]
    eta: f64,
}

impl NetworkInput {
    fn load(&self) -> Result<TrustMatrix, CliError> {
        match (&self.graph, &self.matrix) {
            (Some(path), None) => {
                let g = io::read_graph(open(path)?, None)?.with_self_loops(true);
                Ok(trust_matrix(&g, self.eta)?)
            }
            (None, Some(path)) => Ok(io::read_dense(open(path)?)?),
            _ => Err(CliError::Usage("pass exactly one of --graph or --matrix".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum NoiseKind {
    None,
    Iid,
    Gu,
    Lu,
}

#[derive(Debug, Args, Serialize)]
struct ModelArgs {
    /// Susceptibility; selects the Friedkin-Johnsen model when given.
    #[arg(long)]
    susceptibility: Option<f64>,
    /// Variance of random prejudices.
    #[arg(long, default_value_t = 0.0)]
    xi2: f64,
    #[arg(long, value_enum, default_value_t = NoiseKind::Iid)]
    noise: NoiseKind,
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    /// Uniqueness strength for gu and lu noise.
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
}

impl ModelArgs {
    fn spec(&self) -> ModelSpec {
        let sigma2 = self.sigma2;
        let beta = self.beta;
        let noise = match self.noise {
            NoiseKind::None => Noise::None,
            NoiseKind::Iid => Noise::Iid { sigma2 },
            NoiseKind::Gu => Noise::GlobalUniqueness { sigma2, beta },
            NoiseKind::Lu => Noise::LocalUniqueness { sigma2, beta },
        };
        match self.susceptibility {
            Some(s) => ModelSpec::fj(s, Prejudice::Random { variance: self.xi2 }, noise),
            None => ModelSpec::degroot(noise),
        }
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    input: NetworkInput,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 500)]
    steps: usize,
    #[arg(long, default_value_t = 100)]
    burn_in: usize,
    #[arg(long, default_value_t = 100)]
    replicas: usize,
    /// Also write every step of replica 0.
    #[arg(long)]
    trajectory: bool,
}

#[derive(Debug, Args)]
struct DiversityArgs {
    #[command(flatten)]
    input: NetworkInput,
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    #[arg(long)]
    susceptibility: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    xi2: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SweepKind {
    Susceptibility,
    Connectivity,
    Clustering,
    Communities,
    Uniqueness,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Required unless --config names a sweep.
    #[arg(long, value_enum)]
    kind: Option<SweepKind>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Long,
    Wide,
}

#[derive(Debug, Args)]
struct PanelArgs {
    /// Panel CSV or directory of them; without it the synthetic suite of the
    /// preset is used.
    #[arg(long)]
    panels: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long)]
    max_lag: Option<usize>,
    /// False discovery rate for edges.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
}

#[derive(Debug, Args)]
struct RegressArgs {
    /// Topic table from `granger`; skips network inference.
    #[arg(long, conflicts_with = "panels")]
    observations: Option<PathBuf>,
    #[command(flatten)]
    panels: PanelArgs,
}

fn open(path: &Path) -> Result<std::fs::File, CliError> {
    std::fs::File::open(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn table_from(name: &str, write: impl FnOnce(&mut Vec<u8>) -> opdiv_core::Result<()>) -> Result<Table, CliError> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(Table::from_csv(name, &buf)?)
}

fn out_dir(common: &Common, cfg_out: Option<&Path>, default: &str) -> PathBuf {
    common.out.clone().or_else(|| cfg_out.map(Path::to_path_buf)).unwrap_or_else(|| PathBuf::from("opdiv-out").join(default))
}

fn load_config(common: &Common, kind: ExperimentKind) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => {
            let cfg = ExperimentConfig::load(path)?;
            if cfg.experiment != kind {
                return Err(CliError::Usage(format!(
                    "{} describes a {} experiment, not {}",
                    path.display(),
                    cfg.experiment.name(),
                    kind.name()
                )));
            }
            cfg
        }
        None => ExperimentConfig::preset(
            kind,
            match common.scale {
                ScaleArg::Desk => Scale::Desk,
                ScaleArg::Paper => Scale::Paper,
            },
        ),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if common.jobs.is_some() {
        cfg.jobs = common.jobs;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn install_jobs(jobs: Option<usize>) -> Result<(), CliError> {
    if let Some(j) = jobs {
        if j == 0 {
            return Err(CliError::Usage("--jobs must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(j).build_global().map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    Ok(())
}

fn experiment(common: &Common, kind: ExperimentKind) -> Result<Vec<PathBuf>, CliError> {
    let cfg = load_config(common, kind)?;
    let dir = out_dir(common, cfg.out.as_deref(), kind.name());
    let report = run_experiment(&cfg)?;
    Ok(write_report(&report, &cfg, &dir)?)
}

fn apply_panel_args(cfg: &mut ExperimentConfig, args: &PanelArgs) -> Result<(), CliError> {
    let e = &mut cfg.empirical;
    if let Some(path) = &args.panels {
        e.panels = Some(path.clone());
        e.synthetic = None;
    }
    if let Some(f) = args.format {
        e.format = match f {
            FormatArg::Long => PanelFormat::Long,
            FormatArg::Wide => PanelFormat::Wide,
        };
    }
    if let Some(l) = args.max_lag {
        e.granger.max_lag = l;
    }
    if let Some(a) = args.alpha {
        e.granger.alpha = a;
    }
    if let Some(eta) = args.eta {
        e.eta = eta;
    }
    Ok(cfg.validate()?)
}

#[derive(Serialize)]
struct GenerateRecord<'a> {
    generator: &'a Generator,
    seed: u64,
    eta: f64,
    connected: bool,
}

fn cmd_generate(common: &Common, args: &GenerateArgs) -> Result<Vec<PathBuf>, CliError> {
    let net = match &common.config {
        Some(path) => ExperimentConfig::load(path)?.network,
        None => Default::default(),
    };
    let n = args.n.unwrap_or(net.n);
    let generator = match args.generator {
        GeneratorKind::Er => Generator::ErdosRenyi { n, p: args.p.unwrap_or(net.p) },
        GeneratorKind::Ws => Generator::WattsStrogatz { n, k: args.k.unwrap_or(net.k), q: args.q },
        GeneratorKind::Sbm => {
            let sizes = if args.sizes.is_empty() { vec![n / 2, n - n / 2] } else { args.sizes.clone() };
            let pi = args.pi.ok_or_else(|| CliError::Usage("--pi is required for the two-block model".into()))?;
            let inter = args.inter.unwrap_or(2.0 * net.mean_degree_fraction - pi);
            let probs = (0..sizes.len()).map(|a| (0..sizes.len()).map(|b| if a == b { pi } else { inter }).collect()).collect();
            Generator::StochasticBlock { sizes, probs }
        }
    };
    let eta = args.eta.unwrap_or(net.eta);
    let cfg = GeneratorConfig { generator, seed: common.seed.unwrap_or(0) };
    let (g, seed) = if args.allow_disconnected { (generate(&cfg)?, cfg.seed) } else { generate_connected(&cfg)? };
    let a = trust_matrix(&g, eta)?;
    let f = features(&g);
    let mut tables = vec![
        table_from("graph", |w| io::write_graph(&g, w))?,
        table_from("trust", |w| io::write_trust_edges(&a, w))?,
    ];
    let mut feat = Table::new("features", &["avg_shortest_path", "size", "avg_clustering", "density", "avg_degree", "connected"]);
    feat.push(vec![
        f.avg_shortest_path.map(|x| x.to_string()).unwrap_or_default(),
        f.size.to_string(),
        f.avg_clustering.to_string(),
        f.density.to_string(),
        f.avg_degree.to_string(),
        f.connected.to_string(),
    ]);
    tables.push(feat);
    if args.dense {
        tables.push(table_from("trust_dense", |w| io::write_dense(&a, w))?);
    }
    let record = GenerateRecord { generator: &cfg.generator, seed, eta, connected: !args.allow_disconnected };
    Ok(write_tables(&tables, "generate", Some(seed), &record, &out_dir(common, None, "generate"))?)
}

#[derive(Serialize)]
struct SimulateRecord<'a> {
    network: Option<&'a Path>,
    model: &'a ModelSpec,
    steps: usize,
    burn_in: usize,
    replicas: usize,
    seed: u64,
}

fn cmd_simulate(common: &Common, args: &SimulateArgs) -> Result<Vec<PathBuf>, CliError> {
    let a = args.input.load()?;
    let model = args.model.spec();
    let seed = common.seed.unwrap_or(0);
    let config = SimulationConfig {
        steps: args.steps,
        burn_in: args.burn_in,
        replicas: args.replicas,
        seed,
        record: Record::WindowedDiversity,
        initial_variance: None,
    };
    let ensemble = run_ensemble(&model, &a, &config)?;
    let mut tables = vec![table_from("replicas", |w| ensemble.write_csv(w))?];
    if args.trajectory {
        let single = SimulationConfig { replicas: 1, seed: split(seed, 0), record: Record::FullTrajectory, ..config };
        let tr = run(&model, &a, &single)?;
        tables.push(table_from("trajectory", |w| tr.write_csv(w))?);
    }
    let record = SimulateRecord {
        network: args.input.graph.as_deref().or(args.input.matrix.as_deref()),
        model: &model,
        steps: args.steps,
        burn_in: args.burn_in,
        replicas: args.replicas,
        seed,
    };
    Ok(write_tables(&tables, "simulate", Some(seed), &record, &out_dir(common, None, "simulate"))?)
}

#[derive(Serialize)]
struct DiversityRecord<'a> {
    network: Option<&'a Path>,
    sigma2: f64,
    susceptibility: Option<f64>,
    xi2: f64,
}

fn cmd_diversity(common: &Common, args: &DiversityArgs) -> Result<Vec<PathBuf>, CliError> {
    let a = args.input.load()?;
    let spec = spectrum(&a)?;
    let mut rows = Table::new("diversity", &["kind", "d", "sigma2", "susceptibility", "xi2"]);
    let mut push = |p: opdiv_core::DiversityPrediction| {
        let kind = match p.kind {
            opdiv_core::DiversityKind::ExactUndirected => "exact_undirected",
            opdiv_core::DiversityKind::UpperBoundDirected => "upper_bound_directed",
        };
        rows.push(vec![
            kind.to_string(),
            p.d.to_string(),
            p.sigma2.to_string(),
            p.susceptibility.map(|s| s.to_string()).unwrap_or_default(),
            p.xi2.map(|s| s.to_string()).unwrap_or_default(),
        ]);
    };
    let mut tables = Vec::new();
    if spec.is_real() {
        push(match args.susceptibility {
            Some(s) => diversity_fj(&spec, args.sigma2, args.xi2, s)?,
            None => diversity_degroot(&spec, args.sigma2)?,
        });
        let mut contrib = Table::new("contributions", &["index", "eigenvalue", "contribution"]);
        for (i, (l, c)) in spec.eigenvalues().iter().zip(marginal_contributions(&spec)?).enumerate() {
            contrib.push(vec![i.to_string(), l.to_string(), c.to_string()]);
        }
        tables.push(contrib);
    } else {
        log::warn!("complex spectrum: only the directed bound is reported");
    }
    push(diversity_directed_bound(&spec, args.sigma2)?);
    tables.insert(0, rows);
    tables.push(table_from("spectrum", |w| spec.write_csv(w))?);
    let record = DiversityRecord {
        network: args.input.graph.as_deref().or(args.input.matrix.as_deref()),
        sigma2: args.sigma2,
        susceptibility: args.susceptibility,
        xi2: args.xi2,
    };
    Ok(write_tables(&tables, "diversity", None, &record, &out_dir(common, None, "diversity"))?)
}

fn cmd_granger(common: &Common, args: &PanelArgs) -> Result<Vec<PathBuf>, CliError> {
    let mut cfg = load_config(common, ExperimentKind::Empirical)?;
    apply_panel_args(&mut cfg, args)?;
    let out = cmd_empirical(&cfg)?;
    let tables: Vec<Table> = out.tables().into_iter().filter(|t| t.name != "regression").collect();
    let dir = out_dir(common, cfg.out.as_deref(), "granger");
    Ok(write_tables(&tables, "granger", Some(cfg.seed), &cfg, &dir)?)
}

fn cmd_regress(common: &Common, args: &RegressArgs) -> Result<Vec<PathBuf>, CliError> {
    let Some(path) = &args.observations else {
        let mut cfg = load_config(common, ExperimentKind::Empirical)?;
        apply_panel_args(&mut cfg, &args.panels)?;
        let dir = out_dir(common, cfg.out.as_deref(), "regress");
        let report = run_experiment(&cfg)?;
        return Ok(write_report(&report, &cfg, &dir)?);
    };
    let observations = read_observations(open(path)?, path)?;
    let report = run_regressions(&observations)?;
    let tables = [table_from("regression", |w| report.write_csv(w))?];
    #[derive(Serialize)]
    struct Record<'a> {
        observations: &'a Path,
    }
    Ok(write_tables(&tables, "regress", None, &Record { observations: path }, &out_dir(common, None, "regress"))?)
}

fn dispatch(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let common = &cli.common;
    match &cli.command {
        Command::ValidateSpectral => experiment(common, ExperimentKind::ValidateSpectral),
        Command::Sweep(args) => {
            let kind = match (args.kind, &common.config) {
                (Some(k), _) => match k {
                    SweepKind::Susceptibility => ExperimentKind::SweepSusceptibility,
                    SweepKind::Connectivity => ExperimentKind::SweepConnectivity,
                    SweepKind::Clustering => ExperimentKind::SweepClustering,
                    SweepKind::Communities => ExperimentKind::SweepCommunities,
                    SweepKind::Uniqueness => ExperimentKind::SweepUniqueness,
                },
                (None, Some(path)) => ExperimentConfig::load(path)?.experiment,
                (None, None) => return Err(CliError::Usage("pass --kind or a sweep --config".into())),
            };
            if !kind.is_sweep() {
                return Err(CliError::Usage(format!("{} is not a sweep", kind.name())));
            }
            experiment(common, kind)
        }
        other => {
            install_jobs(common.jobs)?;
            match other {
                Command::Generate(a) => cmd_generate(common, a),
                Command::Simulate(a) => cmd_simulate(common, a),
                Command::Diversity(a) => cmd_diversity(common, a),
                Command::Granger(a) => cmd_granger(common, a),
                Command::Regress(a) => cmd_regress(common, a),
                Command::ValidateSpectral | Command::Sweep(_) => unreachable!(),
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
