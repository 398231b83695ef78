use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Opinions of `N` sources on one topic at `T` ordered times, with no gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct OpinionPanel {
    pub topic: String,
    pub times: Vec<String>,
    pub sources: Vec<String>,
    /// Row-major `T x N`.
    values: Vec<f64>,
}

impl OpinionPanel {
    pub fn new(topic: impl Into<String>, times: Vec<String>, sources: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let expected = times.len() * sources.len();
        if values.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("values", "panel cells must be finite"));
        }
        Ok(OpinionPanel { topic: topic.into(), times, sources, values })
    }

    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    pub fn n_sources(&self) -> usize {
        self.sources.len()
    }

    pub fn row(&self, t: usize) -> &[f64] {
        let n = self.n_sources();
        &self.values[t * n..(t + 1) * n]
    }

    /// Time series of source `i`.
    pub fn series(&self, i: usize) -> Vec<f64> {
        (0..self.n_times()).map(|t| self.values[t * self.n_sources() + i]).collect()
    }

    /// Writes `time,<source>...`.
    pub fn write_wide<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(std::iter::once("time").chain(self.sources.iter().map(String::as_str)))?;
        for (t, time) in self.times.iter().enumerate() {
            out.write_record(std::iter::once(time.clone()).chain(self.row(t).iter().map(|v| v.to_string())))?;
        }
        out.flush()?;
        Ok(())
    }
}

fn parse_cell(cell: &str) -> Option<f64> {
    let c = cell.trim();
    if c.is_empty() || c.eq_ignore_ascii_case("na") || c.eq_ignore_ascii_case("nan") {
        return None;
    }
    c.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn sort_times(times: &mut [String]) {
    if times.iter().all(|t| t.trim().parse::<f64>().is_ok()) {
        times.sort_by(|a, b| a.trim().parse::<f64>().unwrap().total_cmp(&b.trim().parse::<f64>().unwrap()));
    } else {
        times.sort();
    }
}

/// Drops every time row holding a missing cell (`NaN` marks missing).
fn listwise_delete(topic: &str, times: Vec<String>, sources: Vec<String>, cells: Vec<f64>) -> Result<OpinionPanel> {
    let n = sources.len();
    let total = times.len();
    let mut kept_times = Vec::with_capacity(total);
    let mut kept = Vec::with_capacity(cells.len());
    for (t, time) in times.into_iter().enumerate() {
        let row = &cells[t * n..(t + 1) * n];
        if row.iter().all(|v| !v.is_nan()) {
            kept_times.push(time);
            kept.extend_from_slice(row);
        }
    }
    let dropped = total - kept_times.len();
    if dropped > 0 {
        log::warn!("topic {topic}: dropped {dropped} of {total} time rows with missing values");
    }
    OpinionPanel::new(topic, kept_times, sources, kept)
}

fn parse_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Parse { path: path.to_path_buf(), reason: reason.into() }
}

/// Reads long-format `time,source,topic,sentiment` rows into one panel per
/// topic, ordered by topic name. Sources are ordered by name.
pub fn read_long<R: Read>(reader: R, path: &Path) -> Result<Vec<OpinionPanel>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h.trim() == name).ok_or_else(|| parse_err(path, format!("missing column `{name}`")))
    };
    let (ct, cs, ck, cv) = (col("time")?, col("source")?, col("topic")?, col("sentiment")?);

    let mut by_topic: BTreeMap<String, BTreeMap<(String, String), Option<f64>>> = BTreeMap::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or("").trim().to_string();
        let (time, source, topic) = (field(ct), field(cs), field(ck));
        let raw = field(cv);
        let value = parse_cell(&raw);
        if value.is_none() && !raw.is_empty() && !raw.eq_ignore_ascii_case("na") && !raw.eq_ignore_ascii_case("nan") {
            return Err(parse_err(path, format!("row {}: sentiment `{raw}` is not a number", line + 2)));
        }
        let cells = by_topic.entry(topic.clone()).or_default();
        if cells.insert((time.clone(), source.clone()), value).is_some() {
            return Err(parse_err(path, format!("duplicate cell for topic `{topic}`, time `{time}`, source `{source}`")));
        }
    }

    let mut panels = Vec::with_capacity(by_topic.len());
    for (topic, cells) in by_topic {
        let sources: Vec<String> = cells.keys().map(|(_, s)| s.clone()).collect::<BTreeSet<_>>().into_iter().collect();
        let mut times: Vec<String> = cells.keys().map(|(t, _)| t.clone()).collect::<BTreeSet<_>>().into_iter().collect();
        sort_times(&mut times);
        let mut grid = Vec::with_capacity(times.len() * sources.len());
        for t in &times {
            for s in &sources {
                grid.push(cells.get(&(t.clone(), s.clone())).copied().flatten().unwrap_or(f64::NAN));
            }
        }
        panels.push(listwise_delete(&topic, times, sources, grid)?);
    }
    Ok(panels)
}

/// Reads a wide `time,<source>...` table for one topic. Empty and `NA`
/// cells are missing.
pub fn read_wide<R: Read>(reader: R, path: &Path, topic: &str) -> Result<OpinionPanel> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.get(0).map(str::trim) != Some("time") {
        return Err(parse_err(path, "first column must be `time`"));
    }
    let sources: Vec<String> = headers.iter().skip(1).map(|h| h.trim().to_string()).collect();
    if sources.iter().collect::<BTreeSet<_>>().len() != sources.len() {
        return Err(parse_err(path, "duplicate source column"));
    }
    let mut rows: Vec<(String, Vec<f64>)> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != sources.len() + 1 {
            return Err(parse_err(path, format!("row {} has {} fields, expected {}", line + 2, rec.len(), sources.len() + 1)));
        }
        let mut vals = Vec::with_capacity(sources.len());
        for cell in rec.iter().skip(1) {
            match parse_cell(cell) {
                Some(v) => vals.push(v),
                None if cell.trim().is_empty() || cell.trim().eq_ignore_ascii_case("na") || cell.trim().eq_ignore_ascii_case("nan") => {
                    vals.push(f64::NAN)
                }
                None => return Err(parse_err(path, format!("row {}: `{cell}` is not a number", line + 2))),
            }
        }
        rows.push((rec[0].trim().to_string(), vals));
    }
    let mut times: Vec<String> = rows.iter().map(|r| r.0.clone()).collect();
    if times.iter().collect::<BTreeSet<_>>().len() != times.len() {
        return Err(parse_err(path, "duplicate time stamp"));
    }
    sort_times(&mut times);
    let index: BTreeMap<&String, &Vec<f64>> = rows.iter().map(|(t, v)| (t, v)).collect();
    let grid: Vec<f64> = times.iter().flat_map(|t| index[t].iter().copied()).collect();
    listwise_delete(topic, times, sources, grid)
}

/// Population variance across sources at each time, averaged over time.
pub fn empirical_diversity(panel: &OpinionPanel) -> Result<f64> {
    let n = panel.n_sources();
    if n < 2 {
        return Err(Error::InsufficientData(format!("topic {} has {n} source(s)", panel.topic)));
    }
    if panel.n_times() == 0 {
        return Err(Error::InsufficientData(format!("topic {} has no complete time rows", panel.topic)));
    }
    let total: f64 = (0..panel.n_times())
        .map(|t| {
            let row = panel.row(t);
            let mean = row.iter().sum::<f64>() / n as f64;
            row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64
        })
        .sum();
    Ok(total / panel.n_times() as f64)
}
