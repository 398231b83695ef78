use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{fmt_opt, ExperimentConfig, PanelFormat, SyntheticSuite, Table};
use crate::error::{Error, Result};
use crate::graph::{generate_connected, trust_matrix, Generator, GeneratorConfig, NetworkFeatures};
use crate::influence::{analyze_topic, read_long, read_wide, run_regressions, synthetic_panel, EmpiricalConfig, NetworkObservation, OpinionPanel, RegressionReport, TopicAnalysis};
use crate::rng::{derive, tag};

/// Provenance of a synthetic topic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticOrigin {
    pub n: usize,
    pub p: f64,
    pub graph_seed: u64,
    pub panel_seed: u64,
}

#[derive(Debug, Clone)]
pub struct TopicRow {
    pub analysis: TopicAnalysis,
    pub n_times: usize,
    pub origin: Option<SyntheticOrigin>,
}

#[derive(Debug, Clone)]
pub struct EmpiricalOutcome {
    pub topics: Vec<TopicRow>,
    /// Topics that could not be analysed, with the reason.
    pub skipped: Vec<(String, String)>,
    /// `None` when too few topics survive to fit the full model.
    pub regression: Option<RegressionReport>,
    pub eta: f64,
}

impl EmpiricalOutcome {
    pub fn tables(&self) -> Vec<Table> {
        let mut topics = Table::new(
            "topics",
            &[
                "topic",
                "sources",
                "times",
                "edges",
                "avg_shortest_path",
                "size",
                "avg_clustering",
                "density",
                "predicted_d",
                "bound_d",
                "realized_y",
                "generator_n",
                "generator_p",
                "graph_seed",
                "panel_seed",
            ],
        );
        let mut edges = Table::new("edges", &["topic", "src", "dst", "weight", "pvalue"]);
        for row in &self.topics {
            let a = &row.analysis;
            let f = &a.features;
            let o = row.origin;
            topics.push(vec![
                a.network.topic.clone(),
                a.network.sources.len().to_string(),
                row.n_times.to_string(),
                a.network.graph.edge_count().to_string(),
                fmt_opt(f.avg_shortest_path),
                f.size.to_string(),
                f.avg_clustering.to_string(),
                f.density.to_string(),
                a.predicted.d.to_string(),
                a.bound.d.to_string(),
                a.realized_y.to_string(),
                o.map(|o| o.n.to_string()).unwrap_or_default(),
                fmt_opt(o.map(|o| o.p)),
                o.map(|o| o.graph_seed.to_string()).unwrap_or_default(),
                o.map(|o| o.panel_seed.to_string()).unwrap_or_default(),
            ]);
            // trust matrix of a network that was already analysed
            let w = a.network.trust_matrix(self.eta).expect("analysed network has a trust matrix");
            for t in a.network.tests.iter().filter(|t| t.rejected) {
                edges.push(vec![
                    a.network.topic.clone(),
                    a.network.sources[t.src].clone(),
                    a.network.sources[t.dst].clone(),
                    w.get(t.dst, t.src).to_string(),
                    t.p_value.to_string(),
                ]);
            }
        }
        let mut regression = Table::new("regression", &["model", "term", "coef", "stderr", "tstat", "pvalue"]);
        if let Some(rep) = &self.regression {
            for m in &rep.models {
                for (j, term) in m.terms.iter().enumerate() {
                    regression.push(vec![
                        m.name.to_string(),
                        term.to_string(),
                        m.fit.coefficients[j].to_string(),
                        m.fit.std_errors[j].to_string(),
                        m.fit.t_stats[j].to_string(),
                        m.fit.p_values[j].to_string(),
                    ]);
                }
            }
            for m in &rep.models {
                regression.push(vec![m.name.to_string(), "r2".into(), m.fit.r_squared.to_string(), String::new(), String::new(), String::new()]);
            }
        }
        vec![topics, regression, edges]
    }
}

/// Density of synthetic graph `i`. Densities form an even grid over
/// `[p_min, p_max]` visited with a stride coprime to the suite size, so they
/// do not move in step with the size cycle of `synthetic_n`.
pub(crate) fn synthetic_p(suite: &SyntheticSuite, i: usize) -> f64 {
    let m = suite.graphs;
    if m < 2 {
        return 0.5 * (suite.p_min + suite.p_max);
    }
    let stride = (7..).find(|&s| gcd(s, m) == 1).expect("coprime stride exists");
    suite.p_min + (suite.p_max - suite.p_min) * ((i * stride) % m) as f64 / (m - 1) as f64
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn synthetic_n(suite: &SyntheticSuite, i: usize) -> usize {
    suite.n_min + i % (suite.n_max - suite.n_min + 1)
}

fn synthetic_panels(seed: u64, suite: &SyntheticSuite) -> Result<Vec<(OpinionPanel, Option<SyntheticOrigin>)>> {
    (0..suite.graphs)
        .into_par_iter()
        .map(|i| {
            let (n, p) = (synthetic_n(suite, i), synthetic_p(suite, i));
            let gc = GeneratorConfig { generator: Generator::ErdosRenyi { n, p }, seed: derive(seed, &[tag::GRAPH, i as u64]) };
            let (graph, graph_seed) = generate_connected(&gc)?;
            let a = trust_matrix(&graph, suite.eta)?;
            let panel_seed = derive(seed, &[tag::PANEL, i as u64]);
            let panel = synthetic_panel(&format!("g{i:03}"), &a, suite.sigma2, suite.steps, suite.burn_in, panel_seed)?;
            Ok((panel, Some(SyntheticOrigin { n, p, graph_seed, panel_seed })))
        })
        .collect()
}

fn panel_files(path: &Path) -> Result<Vec<PathBuf>> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(path)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    Ok(files)
}

/// Reads every panel under `path`; wide files take their stem as topic.
pub fn load_panels(path: &Path, format: PanelFormat) -> Result<Vec<OpinionPanel>> {
    let mut panels = Vec::new();
    for file in panel_files(path)? {
        let reader = std::fs::File::open(&file)?;
        match format {
            PanelFormat::Long => panels.extend(read_long(reader, &file)?),
            PanelFormat::Wide => {
                let topic = file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                panels.push(read_wide(reader, &file, &topic)?);
            }
        }
    }
    if panels.is_empty() {
        return Err(Error::NoInput(format!("no panels found under {}", path.display())));
    }
    Ok(panels)
}

/// Reads regression inputs from a `topics` table as written by
/// `EmpiricalOutcome::tables`.
pub fn read_observations<R: std::io::Read>(reader: R, path: &Path) -> Result<Vec<NetworkObservation>> {
    let parse_err = |reason: String| Error::Parse { path: path.to_path_buf(), reason };
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers()?.clone();
    let col = |name: &str| header.iter().position(|h| h == name).ok_or_else(|| parse_err(format!("missing column `{name}`")));
    let cols = [col("topic")?, col("avg_shortest_path")?, col("size")?, col("avg_clustering")?, col("density")?, col("predicted_d")?, col("realized_y")?];
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let num = |k: usize| -> Result<f64> {
            rec[cols[k]].trim().parse().map_err(|_| parse_err(format!("row {}: `{}` is not a number", line + 1, &rec[cols[k]])))
        };
        let l = if rec[cols[1]].trim().is_empty() { None } else { Some(num(1)?) };
        let size = num(2)?;
        if !(size >= 0.0 && size.fract() == 0.0) {
            return Err(parse_err(format!("row {}: size must be a whole number", line + 1)));
        }
        let density = num(4)?;
        out.push(NetworkObservation {
            id: rec[cols[0]].to_string(),
            features: NetworkFeatures {
                avg_shortest_path: l,
                size: size as usize,
                avg_clustering: num(3)?,
                density,
                avg_degree: density * (size - 1.0).max(0.0),
                connected: l.is_some(),
            },
            predicted_d: num(5)?,
            realized_y: num(6)?,
        });
    }
    Ok(out)
}

/// Infers a network per topic, predicts its diversity and regresses the
/// realized diversity on topology and prediction.
pub fn cmd_empirical(cfg: &ExperimentConfig) -> Result<EmpiricalOutcome> {
    cfg.validate()?;
    let e = &cfg.empirical;
    let panels = match (&e.synthetic, &e.panels) {
        (Some(suite), _) => synthetic_panels(cfg.seed, suite)?,
        (None, Some(path)) => load_panels(path, e.format)?.into_iter().map(|p| (p, None)).collect(),
        (None, None) => return Err(Error::NoInput("set empirical.panels or empirical.synthetic".into())),
    };
    let ecfg = EmpiricalConfig { granger: e.granger, eta: e.eta };
    let results: Vec<Result<TopicAnalysis>> = panels
        .par_iter()
        .map(|(panel, _)| {
            if panel.n_sources() < 2 {
                return Err(Error::InsufficientData(format!("{} source(s), need at least 2", panel.n_sources())));
            }
            analyze_topic(panel, &ecfg)
        })
        .collect();
    let mut topics = Vec::new();
    let mut skipped = Vec::new();
    for ((panel, origin), res) in panels.iter().zip(results) {
        match res {
            Ok(analysis) => topics.push(TopicRow { analysis, n_times: panel.n_times(), origin: *origin }),
            Err(err) => {
                log::warn!("topic {}: skipped: {err}", panel.topic);
                skipped.push((panel.topic.clone(), err.to_string()));
            }
        }
    }
    let observations: Vec<_> = topics.iter().map(|t| t.analysis.observation()).collect();
    let regression = match run_regressions(&observations) {
        Ok(r) => Some(r),
        Err(err @ (Error::InsufficientData(_) | Error::RankDeficient { .. })) => {
            log::warn!("regressions not fitted: {err}");
            None
        }
        Err(err) => return Err(err),
    };
    Ok(EmpiricalOutcome { topics, skipped, regression, eta: e.eta })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_densities_cover_the_grid_once() {
        for graphs in [1, 2, 7, 30, 161] {
            let suite = SyntheticSuite { graphs, ..Default::default() };
            let mut ps: Vec<f64> = (0..graphs).map(|i| synthetic_p(&suite, i)).collect();
            ps.sort_by(f64::total_cmp);
            if graphs > 1 {
                assert!((ps[0] - suite.p_min).abs() < 1e-12);
                assert!((ps[graphs - 1] - suite.p_max).abs() < 1e-12);
                assert!(ps.windows(2).all(|w| w[1] > w[0]));
            }
            assert!(ps.iter().all(|p| (suite.p_min..=suite.p_max).contains(p)));
        }
    }

    #[test]
    fn wide_directory_uses_file_stems() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("b.csv"), "time,x,y\n1,0.1,0.2\n2,0.3,0.1\n").unwrap();
        std::fs::write(dir.path().join("a.csv"), "time,x,y\n1,0.5,0.2\n2,0.3,0.4\n").unwrap();
        std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        let panels = load_panels(dir.path(), PanelFormat::Wide).unwrap();
        let topics: Vec<_> = panels.iter().map(|p| p.topic.as_str()).collect();
        assert_eq!(topics, ["a", "b"]);
    }

    #[test]
    fn observations_round_trip_through_topics_table() {
        let mut cfg = ExperimentConfig::preset(crate::experiment::ExperimentKind::Empirical, crate::experiment::Scale::Desk);
        let suite = cfg.empirical.synthetic.as_mut().unwrap();
        suite.graphs = 4;
        suite.steps = 300;
        let out = cmd_empirical(&cfg).unwrap();
        let bytes = out.tables()[0].to_csv_bytes();
        let obs = read_observations(&bytes[..], Path::new("topics.csv")).unwrap();
        let direct: Vec<_> = out.topics.iter().map(|t| t.analysis.observation()).collect();
        assert_eq!(obs.len(), direct.len());
        for (a, b) in obs.iter().zip(&direct) {
            assert_eq!(a.id, b.id);
            assert_eq!(a.predicted_d, b.predicted_d);
            assert_eq!(a.realized_y, b.realized_y);
            assert_eq!(a.features.avg_shortest_path, b.features.avg_shortest_path);
            assert_eq!(a.features.density, b.features.density);
        }
    }

    #[test]
    fn observations_need_every_column() {
        let err = read_observations(&b"topic,size\nx,3\n"[..], Path::new("t.csv")).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn empty_directory_is_no_input() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_panels(dir.path(), PanelFormat::Long), Err(Error::NoInput(_))));
    }
}
