//! Scenario files, sweeps and CSV emission behind the `cylcov` binary.
//!
//! A scenario file is JSON:
//!
//! ```json
//! {
//!   "version": 1,
//!   "scenario": { "nodes": 10, "radius": 120, "height": 20, "alpha": 3, "m": 2, "beta_db": 0 },
//!   "sweep": [ { "param": "nodes", "values": [5, 10, 20] },
//!              { "param": "height", "values": [20, 60, 120] } ],
//!   "method": "all",
//!   "simulation": { "trials": 100000, "seed": 42 },
//!   "output": { "format": "csv", "path": "fig3.csv", "grid_size": 2048 }
//! }
//! ```
//!
//! Exactly one of `beta` / `beta_db` is given. Sweep axes form a cartesian
//! product, the last axis varying fastest, and rows come out in that order.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::coverage::{coverage_probability, CoverageResult, Method};
use crate::distance::{cylinder_pair_pdf_closed, cylinder_pair_pdf_numeric};
use crate::error::{Error, Result};
use crate::model::{db_to_linear, ChannelModel, CylinderGeometry, NetworkScenario};
use crate::par::{self, Execution};
use crate::ppp::{ppp_coverage, PppModel};
use crate::simulation::{empirical_distance_histogram, simulate_coverage, DEFAULT_SEED};
use crate::tabulated::{build_cdf, TabulatedDistribution, DEFAULT_GRID_SIZE};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DEFAULT_TRIALS: u64 = 100_000;
pub const DEFAULT_PDF_POINTS: usize = 512;
pub const DEFAULT_PAIRS: usize = 1_000_000;

const PPP_NOTE: &str = "ppp-baseline: infinite 3D Poisson field, lambda = N/(pi R^2 H), nearest-node association, all other nodes interfere";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub version: u32,
    pub scenario: ScenarioParams,
    #[serde(default)]
    pub sweep: Vec<SweepAxis>,
    #[serde(default)]
    pub method: MethodSelection,
    #[serde(default)]
    pub simulation: SimulationControls,
    #[serde(default)]
    pub output: OutputControls,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioParams {
    pub nodes: u32,
    pub radius: f64,
    pub height: f64,
    pub alpha: f64,
    pub m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_db: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Nodes,
    Radius,
    Height,
    Alpha,
    M,
    Beta,
    BetaDb,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Nodes => "nodes",
            SweepParam::Radius => "radius",
            SweepParam::Height => "height",
            SweepParam::Alpha => "alpha",
            SweepParam::M => "m",
            SweepParam::Beta => "beta",
            SweepParam::BetaDb => "beta_db",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MethodSelection {
    #[default]
    Analytic,
    Simulate,
    Ppp,
    All,
}

impl MethodSelection {
    fn methods(self) -> &'static [Method] {
        match self {
            MethodSelection::Analytic => &[Method::Analytic],
            MethodSelection::Simulate => &[Method::MonteCarlo],
            MethodSelection::Ppp => &[Method::PppBaseline],
            MethodSelection::All => &[Method::Analytic, Method::MonteCarlo, Method::PppBaseline],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationControls {
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl Default for SimulationControls {
    fn default() -> Self {
        SimulationControls {
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
        }
    }
}

fn default_trials() -> u64 {
    DEFAULT_TRIALS
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_grid_size() -> usize {
    DEFAULT_GRID_SIZE
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputControls {
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default = "default_grid_size")]
    pub grid_size: usize,
}

impl Default for OutputControls {
    fn default() -> Self {
        OutputControls {
            format: OutputFormat::Csv,
            path: None,
            grid_size: DEFAULT_GRID_SIZE,
        }
    }
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." { "<root>".to_string() } else { path };
            Error::parse(field, e.into_inner().to_string())
        })?;
        file.validate()?;
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != SCHEMA_VERSION {
            return Err(Error::parse(
                "version",
                format!("unrecognized schema version {} (expected {SCHEMA_VERSION})", self.version),
            ));
        }
        match (self.scenario.beta, self.scenario.beta_db) {
            (Some(_), Some(_)) => return Err(Error::parse("scenario.beta", "give either beta or beta_db, not both")),
            (None, None) => return Err(Error::parse("scenario.beta", "one of beta or beta_db is required")),
            _ => {}
        }
        let mut seen = HashSet::new();
        for (i, axis) in self.sweep.iter().enumerate() {
            let field = format!("sweep[{i}]");
            if !seen.insert(axis.param) {
                return Err(Error::parse(format!("{field}.param"), format!("`{}` swept twice", axis.param.name())));
            }
            if axis.values.is_empty() {
                return Err(Error::parse(format!("{field}.values"), "empty value list"));
            }
            if axis.param == SweepParam::Nodes && axis.values.iter().any(|v| v.fract() != 0.0 || *v < 2.0 || *v > f64::from(u32::MAX)) {
                return Err(Error::parse(format!("{field}.values"), "node counts must be integers >= 2"));
            }
        }
        if seen.contains(&SweepParam::Beta) && seen.contains(&SweepParam::BetaDb) {
            return Err(Error::parse("sweep", "sweep beta or beta_db, not both"));
        }
        if self.simulation.trials == 0 {
            return Err(Error::parse("simulation.trials", "must be >= 1"));
        }
        Ok(())
    }

    /// Every sweep point in output order, with its axis values.
    pub fn sweep_points(&self) -> Result<Vec<SweepPoint>> {
        let mut combos: Vec<Vec<f64>> = vec![Vec::new()];
        for axis in &self.sweep {
            combos = combos
                .into_iter()
                .flat_map(|prefix| {
                    axis.values.iter().map(move |&v| {
                        let mut c = prefix.clone();
                        c.push(v);
                        c
                    })
                })
                .collect();
        }
        combos
            .into_iter()
            .map(|values| {
                let mut p = self.scenario.clone();
                for (axis, &v) in self.sweep.iter().zip(&values) {
                    match axis.param {
                        SweepParam::Nodes => p.nodes = v as u32,
                        SweepParam::Radius => p.radius = v,
                        SweepParam::Height => p.height = v,
                        SweepParam::Alpha => p.alpha = v,
                        SweepParam::M => p.m = v,
                        SweepParam::Beta => {
                            p.beta = Some(v);
                            p.beta_db = None;
                        }
                        SweepParam::BetaDb => {
                            p.beta_db = Some(v);
                            p.beta = None;
                        }
                    }
                }
                let beta = match (p.beta, p.beta_db) {
                    (Some(b), _) => b,
                    (None, Some(db)) => db_to_linear(db),
                    (None, None) => unreachable!("validated"),
                };
                let geometry = CylinderGeometry::new(p.radius, p.height)?;
                let scenario = NetworkScenario::new(p.nodes, geometry, ChannelModel::new(p.alpha, p.m)?, beta)?;
                Ok(SweepPoint { values, scenario })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub values: Vec<f64>,
    pub scenario: NetworkScenario,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRow {
    pub sweep: Vec<f64>,
    pub result: CoverageResult,
    pub wall_time_s: f64,
}

/// Command-line overrides and run settings not stored in the scenario file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub cdf_cache: Option<PathBuf>,
    pub omit_timing: bool,
}

/// Distance tables for every distinct geometry of the sweep, in first-use order.
fn distance_tables(points: &[SweepPoint], grid_size: usize, cache: Option<&Path>) -> Result<Vec<TabulatedDistribution>> {
    let mut geoms: Vec<CylinderGeometry> = Vec::new();
    for p in points {
        if !geoms.contains(p.scenario.geometry()) {
            geoms.push(*p.scenario.geometry());
        }
    }
    geoms
        .iter()
        .map(|g| match cache {
            Some(path) => TabulatedDistribution::load(path, g),
            None => build_cdf(g, grid_size),
        })
        .collect()
}

/// Evaluates every sweep point with the selected methods. Points run
/// concurrently; rows come back in sweep order.
pub fn run_coverage(file: &ScenarioFile, opts: &RunOptions) -> Result<Vec<CoverageRow>> {
    file.validate()?;
    let points = file.sweep_points()?;
    let methods = file.method.methods();
    let tables = if methods.contains(&Method::Analytic) {
        distance_tables(&points, file.output.grid_size, opts.cdf_cache.as_deref())?
    } else {
        Vec::new()
    };
    let sim = &file.simulation;
    let per_point = par::map_slice(Execution::default(), &points, |point| {
        methods
            .iter()
            .map(|&method| {
                let start = Instant::now();
                let s = &point.scenario;
                let result = match method {
                    Method::Analytic => {
                        let table = tables
                            .iter()
                            .find(|t| t.geometry() == s.geometry())
                            .expect("table per geometry");
                        coverage_probability(s, table)?
                    }
                    Method::MonteCarlo => {
                        let e = simulate_coverage(s, sim.trials, sim.seed)?;
                        CoverageResult {
                            pc: e.mean,
                            method,
                            error_estimate: e.ci_half_width,
                            scenario: Some(*s),
                            trials: Some(e.trials),
                            seed: Some(e.seed),
                        }
                    }
                    Method::PppBaseline => CoverageResult {
                        scenario: Some(*s),
                        ..ppp_coverage(&PppModel::matched(s))?
                    },
                };
                Ok(CoverageRow {
                    sweep: point.values.clone(),
                    result,
                    wall_time_s: if opts.omit_timing { f64::NAN } else { start.elapsed().as_secs_f64() },
                })
            })
            .collect::<Result<Vec<_>>>()
    });
    let mut rows = Vec::new();
    for r in per_point {
        rows.extend(r?);
    }
    Ok(rows)
}

fn na_or<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

pub fn render_coverage_csv(file: &ScenarioFile, rows: &[CoverageRow]) -> String {
    let mut out = String::new();
    // the destination does not affect the contents
    let mut echoed = file.clone();
    echoed.output.path = None;
    let echo = serde_json::to_string(&echoed).expect("scenario serializes");
    let _ = writeln!(out, "# cylcov coverage schema={SCHEMA_VERSION}");
    let _ = writeln!(out, "# tool_version={TOOL_VERSION}");
    let _ = writeln!(out, "# scenario={echo}");
    let _ = writeln!(out, "# seed={}", file.simulation.seed);
    let _ = writeln!(out, "# {PPP_NOTE}");
    let mut cols: Vec<&str> = file.sweep.iter().map(|a| a.param.name()).collect();
    cols.extend(["method", "pc", "err", "trials", "seed", "wall_time_s"]);
    let _ = writeln!(out, "{}", cols.join(","));
    for row in rows {
        let r = &row.result;
        let mut fields: Vec<String> = row.sweep.iter().map(f64::to_string).collect();
        fields.push(r.method.tag().to_string());
        fields.push(r.pc.to_string());
        fields.push(r.error_estimate.to_string());
        fields.push(na_or(r.trials));
        fields.push(na_or(r.seed));
        fields.push(if row.wall_time_s.is_nan() { "NA".to_string() } else { format!("{:.6}", row.wall_time_s) });
        let _ = writeln!(out, "{}", fields.join(","));
    }
    out
}

/// Pair-distance histogram request for the pdf table.
#[derive(Debug, Clone, Copy)]
pub struct HistogramRequest {
    pub pairs: usize,
    pub seed: u64,
}

/// Pair-distance density on `points` equally spaced distances spanning
/// `[0, d_max]`, by numeric integration and in closed form. With a histogram
/// request two more columns hold bin centers and empirical densities
/// (one bin per row).
pub fn render_pdf_csv(geom: &CylinderGeometry, points: usize, histogram: Option<HistogramRequest>) -> Result<String> {
    if points < 2 {
        return Err(Error::domain("pdf points", format!("{points} < 2")));
    }
    let d_max = geom.max_distance();
    let rows = par::map_range(Execution::default(), points, |i| {
        let l = d_max * i as f64 / (points - 1) as f64;
        let closed = cylinder_pair_pdf_closed(l, geom);
        (l, cylinder_pair_pdf_numeric(l, geom), closed)
    });
    let hist = histogram
        .map(|h| empirical_distance_histogram(geom, h.pairs, points, h.seed))
        .transpose()?;
    let mut out = String::new();
    let _ = writeln!(out, "# cylcov pdf schema={SCHEMA_VERSION}");
    let _ = writeln!(out, "# tool_version={TOOL_VERSION}");
    let _ = writeln!(out, "# radius={} height={} points={points}", geom.radius(), geom.height());
    match &histogram {
        Some(h) => {
            let _ = writeln!(out, "# histogram pairs={} bins={points} seed={}", h.pairs, h.seed);
            let _ = writeln!(out, "l,f_numeric,f_closed,bin_center,f_empirical");
        }
        None => {
            let _ = writeln!(out, "l,f_numeric,f_closed");
        }
    }
    for (i, (l, numeric, closed)) in rows.into_iter().enumerate() {
        let closed = closed?;
        let _ = write!(out, "{l},{numeric},{closed}");
        if let Some(h) = &hist {
            let _ = write!(out, ",{},{}", h.bin_centers[i], h.density[i]);
        }
        out.push('\n');
    }
    Ok(out)
}

/// Builds a distance table and writes it to `path`.
pub fn run_cache(geom: &CylinderGeometry, grid_size: usize, path: &Path) -> Result<TabulatedDistribution> {
    let table = build_cdf(geom, grid_size)?;
    table.save(path)?;
    Ok(table)
}

/// Writes `contents` to `path`, or stdout when `path` is `None`.
pub fn write_output(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, contents).map_err(|e| Error::io(p, e)),
        None => std::io::stdout()
            .lock()
            .write_all(contents.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "version": 1,
        "scenario": {"nodes": 6, "radius": 20, "height": 60, "alpha": 3, "m": 2, "beta": 1},
        "sweep": [{"param": "nodes", "values": [3, 5]}, {"param": "beta_db", "values": [-10, 0, 10]}],
        "method": "analytic",
        "output": {"grid_size": 256}
    }"#;

    fn field_of(e: Error) -> String {
        match e {
            Error::Parse { field, .. } => field,
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn parses_and_expands_sweep() {
        let f = ScenarioFile::from_json(BASE).unwrap();
        assert_eq!(f.simulation, SimulationControls::default());
        let pts = f.sweep_points().unwrap();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[1].values, vec![3.0, 0.0]);
        assert_eq!(pts[4].scenario.nodes(), 5);
        assert!((pts[5].scenario.beta() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn parse_errors_name_the_field() {
        let bad_type = BASE.replace(r#""nodes": 6"#, r#""nodes": "six""#);
        assert_eq!(field_of(ScenarioFile::from_json(&bad_type).unwrap_err()), "scenario.nodes");
        let unknown = BASE.replace(r#""m": 2"#, r#""m": 2, "gain": 1"#);
        assert!(field_of(ScenarioFile::from_json(&unknown).unwrap_err()).starts_with("scenario"));
        let both = BASE.replace(r#""beta": 1"#, r#""beta": 1, "beta_db": 0"#);
        assert_eq!(field_of(ScenarioFile::from_json(&both).unwrap_err()), "scenario.beta");
        let version = BASE.replace(r#""version": 1"#, r#""version": 7"#);
        assert_eq!(field_of(ScenarioFile::from_json(&version).unwrap_err()), "version");
        let param = BASE.replace(r#""param": "nodes""#, r#""param": "width""#);
        assert_eq!(field_of(ScenarioFile::from_json(&param).unwrap_err()), "sweep[0].param");
        let frac = BASE.replace("[3, 5]", "[3.5]");
        assert_eq!(field_of(ScenarioFile::from_json(&frac).unwrap_err()), "sweep[0].values");
    }

    #[test]
    fn coverage_rows_in_sweep_order() {
        let f = ScenarioFile::from_json(BASE).unwrap();
        let rows = run_coverage(&f, &RunOptions { omit_timing: true, ..Default::default() }).unwrap();
        assert_eq!(rows.len(), 6);
        for pair in rows.chunks(3) {
            assert!(pair[0].result.pc > pair[1].result.pc && pair[1].result.pc > pair[2].result.pc);
        }
        let csv = render_coverage_csv(&f, &rows);
        let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
        assert_eq!(header, "nodes,beta_db,method,pc,err,trials,seed,wall_time_s");
        assert!(csv.lines().last().unwrap().starts_with("5,10,analytic,"));
        assert!(csv.lines().last().unwrap().ends_with(",NA,NA,NA"));
    }

    #[test]
    fn all_methods_emit_three_rows() {
        let json = BASE
            .replace(r#""method": "analytic""#, r#""method": "all", "simulation": {"trials": 2000, "seed": 5}"#)
            .replace(r#""sweep": [{"param": "nodes", "values": [3, 5]}, {"param": "beta_db", "values": [-10, 0, 10]}],"#, "");
        let f = ScenarioFile::from_json(&json).unwrap();
        let rows = run_coverage(&f, &RunOptions::default()).unwrap();
        let tags: Vec<&str> = rows.iter().map(|r| r.result.method.tag()).collect();
        assert_eq!(tags, ["analytic", "monte-carlo", "ppp-baseline"]);
        assert_eq!(rows[1].result.trials, Some(2000));
        assert_eq!(rows[1].result.seed, Some(5));
    }

    #[test]
    fn pdf_table_shape() {
        let g = CylinderGeometry::new(20.0, 120.0).unwrap();
        let csv = render_pdf_csv(&g, 64, None).unwrap();
        let data: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
        assert_eq!(data.len(), 64);
        let last: f64 = data[63].split(',').next().unwrap().parse().unwrap();
        assert!((last - (4.0f64 * 400.0 + 14400.0).sqrt()).abs() < 1e-12);
        for row in data {
            let v: Vec<f64> = row.split(',').map(|x| x.parse().unwrap()).collect();
            assert!((v[1] - v[2]).abs() < 1e-6);
        }
    }

    #[test]
    fn unwritable_output_names_the_path() {
        let err = write_output(Some(Path::new("/nonexistent-dir/x.csv")), "x").unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x.csv"));
    }
}
