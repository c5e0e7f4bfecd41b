//! Deterministic report files and CSV data exchange.
//!
//! Reports are pretty-printed JSON with fields in declaration order, so the
//! same inputs give byte-identical files. Wall-clock data goes to a separate
//! `metadata.json`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ExteriorRule, Grid, SampledFunction};
use crate::moving_planes::{radial_profile, SweepReport};
use crate::solver::Checkpoint;

pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Common envelope of every JSON report.
#[derive(Serialize)]
pub struct Report<'a, T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub seed: u64,
    pub config_hash: &'a str,
    pub result: &'a T,
}

impl<'a, T: Serialize> Report<'a, T> {
    pub fn new(command: &'a str, seed: u64, config_hash: &'a str, result: &'a T) -> Self {
        Report {
            tool: TOOL,
            version: VERSION,
            command,
            seed,
            config_hash,
            result,
        }
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialises");
    s.push('\n');
    s
}

/// Non-deterministic run information, kept out of the reports.
#[derive(Debug, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub args: Vec<String>,
    pub config_hash: String,
    pub seed: u64,
    pub threads: usize,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub elapsed_seconds: f64,
}

impl Metadata {
    pub fn new(command: &str, args: Vec<String>, config_hash: &str, seed: u64, started: SystemTime) -> Self {
        let finished = SystemTime::now();
        let unix = |t: SystemTime| t.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
        Metadata {
            tool: TOOL,
            version: VERSION,
            command: command.into(),
            args,
            config_hash: config_hash.into(),
            seed,
            threads: rayon::current_num_threads(),
            started_unix: unix(started),
            finished_unix: unix(finished),
            elapsed_seconds: finished.duration_since(started).map(|d| d.as_secs_f64()).unwrap_or(0.0),
        }
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &to_json(value))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    csv::Writer::from_path(path).map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse(format!("{}: {other:?}", path.display())),
    }
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

/// `lambda,min_w` for the coarse and refined planes, sorted by `λ`. Planes
/// with an empty cap leave `min_w` blank.
pub fn write_sweep_csv(path: &Path, sweep: &SweepReport) -> Result<()> {
    let mut rows: Vec<(f64, Option<f64>)> = sweep
        .lambda_grid
        .iter()
        .copied()
        .zip(sweep.min_w.iter().copied())
        .chain(
            sweep
                .refined_grid
                .iter()
                .copied()
                .zip(sweep.refined_min_w.iter().copied()),
        )
        .collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    rows.dedup_by(|a, b| a.0 == b.0);
    let mut w = csv_writer(path)?;
    w.write_record(["lambda", "min_w"]).map_err(|e| csv_error(path, e))?;
    for (l, m) in rows {
        w.write_record([num(l), m.map(num).unwrap_or_default()])
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `r,u` pairs about `center`, sorted by radius.
pub fn write_radial_csv(path: &Path, u: &SampledFunction, center: &[f64]) -> Result<()> {
    let profile = radial_profile(u, center)?;
    let mut w = csv_writer(path)?;
    w.write_record(["r", "u"]).map_err(|e| csv_error(path, e))?;
    for (r, v) in profile {
        w.write_record([num(r), num(v)]).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_residual_csv(path: &Path, history: &[Checkpoint]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["iteration", "residual_sup"])
        .map_err(|e| csv_error(path, e))?;
    for c in history {
        w.write_record([c.iteration.to_string(), num(c.residual_sup)])
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Header line of a sampled-function CSV file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampledHeader {
    pub dimension: usize,
    pub nodes_per_axis: usize,
    pub half_width: f64,
    pub exterior_rule: String,
    #[serde(default = "default_smoothness")]
    pub smoothness: usize,
}

fn default_smoothness() -> usize {
    3
}

/// Writes `# {header json}` followed by `x[,y],u` rows in node order.
pub fn write_sampled_csv(path: &Path, u: &SampledFunction) -> Result<()> {
    let g = u.grid();
    let header = SampledHeader {
        dimension: g.dimension,
        nodes_per_axis: g.nodes_per_axis,
        half_width: g.half_width,
        exterior_rule: u.exterior().label(),
        smoothness: u.smoothness(),
    };
    let mut text = format!("# {}\n", serde_json::to_string(&header).expect("header serialises"));
    text.push_str(if g.dimension == 1 { "x,u\n" } else { "x,y,u\n" });
    for (i, v) in u.values().iter().enumerate() {
        for c in g.node(i) {
            text.push_str(&num(c));
            text.push(',');
        }
        text.push_str(&num(*v));
        text.push('\n');
    }
    write_text(path, &text)
}

pub fn read_sampled_csv(path: &Path) -> Result<SampledFunction> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sampled_csv(&text).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        e => e,
    })
}

/// Parses the format of [`write_sampled_csv`]. Node coordinates must match the
/// grid described by the header.
pub fn parse_sampled_csv(text: &str) -> Result<SampledFunction> {
    let first = text.lines().next().unwrap_or_default();
    let json = first
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse("missing `# {...}` header line".into()))?;
    let header: SampledHeader = serde_json::from_str(json.trim()).map_err(|e| Error::Parse(format!("header: {e}")))?;
    let grid = Grid::new(header.dimension, header.nodes_per_axis, header.half_width)?;
    let exterior = ExteriorRule::parse(&header.exterior_rule)?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let cols = grid.dimension + 1;
    let tol = 1e-9 * grid.step();
    let mut values = Vec::with_capacity(grid.len());
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("row {}: {e}", i + 1)))?;
        if rec.len() != cols {
            return Err(Error::Parse(format!(
                "row {}: expected {cols} columns, got {}",
                i + 1,
                rec.len()
            )));
        }
        let field: Vec<f64> = rec
            .iter()
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("row {}: bad number {s:?}", i + 1)))
            })
            .collect::<Result<_>>()?;
        if i >= grid.len() {
            return Err(Error::Parse(format!("more than {} rows", grid.len())));
        }
        let node = grid.node(i);
        if node.iter().zip(&field).any(|(a, b)| (a - b).abs() > tol) {
            return Err(Error::Parse(format!(
                "row {}: coordinates do not match node {node:?}",
                i + 1
            )));
        }
        values.push(field[cols - 1]);
    }
    if values.len() != grid.len() {
        return Err(Error::Parse(format!(
            "expected {} rows, got {}",
            grid.len(),
            values.len()
        )));
    }
    SampledFunction::new(grid, values, exterior, header.smoothness)
}

/// Writes `name.json` for a report under `dir` and returns its path.
pub fn write_report<T: Serialize>(
    dir: &Path,
    name: &str,
    command: &str,
    seed: u64,
    config_hash: &str,
    result: &T,
) -> Result<PathBuf> {
    let path = dir.join(format!("{name}.json"));
    write_text(&path, &Report::new(command, seed, config_hash, result).to_json())?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampled_csv_round_trip() {
        let g = Grid::new(2, 7, 1.5).unwrap();
        let u = SampledFunction::from_fn(g, ExteriorRule::Constant(0.25), 2, |x| x[0] - 0.1 * x[1]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("u.csv");
        write_sampled_csv(&p, &u).unwrap();
        let v = read_sampled_csv(&p).unwrap();
        assert_eq!(v.values(), u.values());
        assert_eq!(v.grid(), u.grid());
        assert_eq!(v.exterior().label(), "constant:0.25");
        assert_eq!(v.smoothness(), 2);
    }

    #[test]
    fn malformed_csv_is_a_parse_error() {
        assert!(matches!(parse_sampled_csv("x,u\n0,1\n"), Err(Error::Parse(_))));
        let head =
            "# {\"dimension\":1,\"nodes_per_axis\":5,\"half_width\":1.0,\"exterior_rule\":\"zero_outside_box\"}\nx,u\n";
        assert!(matches!(
            parse_sampled_csv(&format!("{head}-1,0\n")),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            parse_sampled_csv(&format!("{head}-1,0\n-0.4,0\n0,0\n0.5,0\n1,0\n")),
            Err(Error::Parse(_))
        ));
        assert!(parse_sampled_csv(&format!("{head}-1,0\n-0.5,0\n0,1\n0.5,0\n1,0\n")).is_ok());
    }

    #[test]
    fn empty_sweep_csv_has_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sweep.csv");
        let r = SweepReport {
            mode: crate::moving_planes::SweepMode::Ball,
            direction: vec![1.0],
            lambda_grid: vec![],
            min_w: vec![],
            refined_grid: vec![],
            refined_min_w: vec![],
            lambda0_estimate: None,
            tol: 1e-5,
            tol_lambda: 1e-3,
            opposite_lambda0: None,
            decay: None,
            symmetric_verdict: false,
            monotone_verdict: None,
        };
        write_sweep_csv(&p, &r).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "lambda,min_w\n");
    }
}
