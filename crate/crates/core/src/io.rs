//! Run configuration files, snapshot and diagnostics output.
//!
//! A config file names a preset and overrides any subset of its resolved
//! defaults. Tables carrying a `kind` or `mode` tag (background, boundary)
//! replace the default table instead of being merged into it.
//!
//! Output directory layout:
//!
//! ```text
//! config.toml            fully resolved config
//! diagnostics.jsonl      one JSON record per sampled step
//! snapshot_000000.csv    per-cell fields every `snapshot_every` steps
//! final.csv              last valid state
//! summary.json           completion status
//! ```
//!
//! A snapshot starts with a one-line JSON header followed by a CSV table in
//! row-major cell order. Floats use the shortest round-trip representation;
//! velocities of vacuum cells are written as `nan`.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::grid::Boundary;
use crate::orchestrator::{run_steps, ModelKind, OutputPlan, Record, RunState};
use crate::scenarios::{generate, Preset, ScenarioConfig};

/// Environment variable giving the default output directory.
pub const OUT_DIR_ENV: &str = "DWP_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "dwp_out";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub diagnostics_every: u64,
    pub snapshot_every: u64,
    pub out_dir: PathBuf,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            diagnostics_every: 1,
            snapshot_every: 0,
            out_dir: std::env::var_os(OUT_DIR_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
        }
    }
}

/// A scenario plus its output plan.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub output: OutputSpec,
}

impl RunConfig {
    pub fn from_preset(preset: Preset) -> Self {
        Self {
            scenario: ScenarioConfig::defaults(preset),
            output: OutputSpec::default(),
        }
    }

    /// Fully resolved config as TOML; parsing it gives back `self`.
    pub fn to_toml(&self) -> Result<String> {
        let mut table = to_table(&self.scenario)?;
        table.insert("output".into(), Value::Table(to_table(&self.output)?));
        toml::to_string(&table).map_err(|e| Error::config("", e.to_string()))
    }

    pub fn plan(&self) -> OutputPlan {
        OutputPlan {
            diagnostics_every: self.output.diagnostics_every,
            snapshot_every: self.output.snapshot_every,
        }
    }
}

fn to_table<T: Serialize>(value: &T) -> Result<Table> {
    match Value::try_from(value) {
        Ok(Value::Table(t)) => Ok(t),
        Ok(_) => Err(Error::config("", "expected a table")),
        Err(e) => Err(Error::config("", e.to_string())),
    }
}

/// Parses and validates config text. Errors name the offending key.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let user: Table =
        toml::from_str(text).map_err(|e| Error::config(span_key(text, e.span()), e.message()))?;
    let preset = match user.get("preset") {
        Some(Value::String(name)) => Preset::from_name(name)?,
        Some(_) => return Err(Error::config("preset", "must be a string")),
        None => {
            return Err(Error::config(
                "preset",
                "missing; run `dwp preset list` for the names",
            ))
        }
    };
    let defaults = RunConfig::from_preset(preset);
    let mut merged = to_table(&defaults.scenario)?;
    merged.insert("output".into(), Value::Table(to_table(&defaults.output)?));
    merge(&mut merged, user, "")?;

    let output = merged.remove("output").expect("default output table");
    let output: OutputSpec = deserialize(output, "output")?;
    let scenario: ScenarioConfig = deserialize(Value::Table(merged), "")?;
    scenario.validate()?;
    Ok(RunConfig { scenario, output })
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

fn merge(base: &mut Table, over: Table, prefix: &str) -> Result<()> {
    for (key, value) in over {
        let path = if prefix.is_empty() {
            key.clone()
        } else {
            format!("{prefix}.{key}")
        };
        let Some(slot) = base.get_mut(&key) else {
            return Err(Error::config(path, "unknown key"));
        };
        match (slot, value) {
            (Value::Table(b), Value::Table(o))
                if !(o.contains_key("kind") || o.contains_key("mode")) =>
            {
                merge(b, o, &path)?
            }
            (slot, value) => *slot = value,
        }
    }
    Ok(())
}

/// Deserializes `value`, reporting the failing key via a round trip through text.
fn deserialize<T: for<'de> Deserialize<'de>>(value: Value, prefix: &str) -> Result<T> {
    let text = match &value {
        Value::Table(t) => toml::to_string(t).map_err(|e| Error::config(prefix, e.to_string()))?,
        _ => return Err(Error::config(prefix, "expected a table")),
    };
    toml::from_str(&text).map_err(|e| {
        let key = span_key(&text, e.span());
        let key = match (prefix.is_empty(), key.is_empty()) {
            (true, _) => key,
            (false, true) => prefix.to_string(),
            (false, false) => format!("{prefix}.{key}"),
        };
        Error::config(key, e.message())
    })
}

/// Dotted key of the line containing `span` (section header plus key).
fn span_key(text: &str, span: Option<std::ops::Range<usize>>) -> String {
    let Some(span) = span else {
        return String::new();
    };
    let mut section = String::new();
    let mut offset = 0;
    for line in text.lines() {
        let end = offset + line.len() + 1;
        let trimmed = line.trim();
        if trimmed.starts_with('[') {
            section = trimmed
                .trim_matches(|c| c == '[' || c == ']')
                .trim()
                .to_string();
        }
        if span.start < end {
            if let Some((key, _)) = trimmed.split_once('=') {
                let key = key.trim().trim_matches('"');
                return if section.is_empty() {
                    key.to_string()
                } else {
                    format!("{section}.{key}")
                };
            }
            return section;
        }
        offset = end;
    }
    section
}

/// Header line of a snapshot file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub n: u64,
    pub t: f64,
    pub a: f64,
    pub preset: Preset,
    pub model: ModelKind,
    pub shape: Vec<usize>,
    pub h: f64,
    pub boundary: Boundary,
    pub fluids: usize,
}

/// A parsed snapshot: header, column names and one row per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub header: SnapshotHeader,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Snapshot {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

const AXES: [&str; 3] = ["x", "y", "z"];
const INDICES: [&str; 3] = ["i", "j", "k"];

fn columns(dim: usize, fluids: usize, with_phi: bool) -> Vec<String> {
    let mut cols: Vec<String> = INDICES[..dim].iter().map(|s| s.to_string()).collect();
    for f in 0..fluids {
        cols.push(format!("rho{f}"));
        cols.extend(AXES[..dim].iter().map(|a| format!("u{f}_{a}")));
        cols.extend(AXES[..dim].iter().map(|a| format!("mom{f}_{a}")));
    }
    if with_phi {
        cols.push("phi".into());
    }
    cols
}

fn float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:?}")
    }
}

pub fn write_snapshot<W: Write>(out: &mut W, cfg: &ScenarioConfig, run: &RunState) -> Result<()> {
    let grid = &run.grid;
    let phi = run.potential.as_ref().filter(|_| cfg.physics.g > 0.0);
    let header = SnapshotHeader {
        n: run.n,
        t: run.t,
        a: run.bg.scale_at(run.t)?,
        preset: cfg.preset,
        model: cfg.preset.model(),
        shape: grid.shape().to_vec(),
        h: grid.h(),
        boundary: grid.boundary(),
        fluids: run.fluids.len(),
    };
    let io = |e| Error::io("<snapshot>", e);
    let line = serde_json::to_string(&header).map_err(|e| Error::config("", e.to_string()))?;
    writeln!(out, "{line}").map_err(io)?;
    writeln!(
        out,
        "{}",
        columns(grid.dim(), run.fluids.len(), phi.is_some()).join(",")
    )
    .map_err(io)?;
    let mut row = String::new();
    for c in 0..grid.len() {
        row.clear();
        let idx = grid.unravel(c);
        row.push_str(
            &idx.iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        for f in &run.fluids {
            row.push(',');
            row.push_str(&float(f.rho()[c]));
            for ax in 0..grid.dim() {
                row.push(',');
                row.push_str(&float(f.velocity(ax, c).unwrap_or(f64::NAN)));
            }
            for ax in 0..grid.dim() {
                row.push(',');
                row.push_str(&float(f.mom(ax)[c]));
            }
        }
        if let Some(p) = phi {
            row.push(',');
            row.push_str(&float(p.phi[c]));
        }
        writeln!(out, "{row}").map_err(io)?;
    }
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let bad = |message: String| Error::Format {
        path: path.to_path_buf(),
        message,
    };
    let mut lines = BufReader::new(file).lines();
    let mut next = |what: &str| -> Result<String> {
        match lines.next() {
            Some(Ok(l)) => Ok(l),
            Some(Err(e)) => Err(Error::io(path, e)),
            None => Err(bad(format!("missing {what}"))),
        }
    };
    let header: SnapshotHeader =
        serde_json::from_str(&next("header")?).map_err(|e| bad(e.to_string()))?;
    let columns: Vec<String> = next("column names")?
        .split(',')
        .map(str::to_string)
        .collect();
    let cells: usize = header.shape.iter().product();
    let mut rows = Vec::with_capacity(cells);
    for r in 0..cells {
        let line = next("row")?;
        let row = line
            .split(',')
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|e| bad(format!("row {r}: `{v}`: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != columns.len() {
            return Err(bad(format!(
                "row {r} has {} values, expected {}",
                row.len(),
                columns.len()
            )));
        }
        rows.push(row);
    }
    Ok(Snapshot {
        header,
        columns,
        rows,
    })
}

pub fn write_diagnostics<W: Write>(out: &mut W, history: &[Record]) -> Result<()> {
    for rec in history {
        let line = serde_json::to_string(rec).map_err(|e| Error::config("", e.to_string()))?;
        writeln!(out, "{line}").map_err(|e| Error::io("<diagnostics>", e))?;
    }
    Ok(())
}

/// Completion status written to `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub preset: Preset,
    pub seed: u64,
    pub steps_requested: u64,
    pub steps_completed: u64,
    pub t: f64,
    pub a: f64,
    pub error: Option<ErrorReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub kind: String,
    pub message: String,
}

impl From<&Error> for ErrorReport {
    fn from(e: &Error) -> Self {
        Self {
            kind: e.kind().into(),
            message: e.to_string(),
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn finish<W: Write>(mut w: W, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

/// Generates and runs `cfg`, writing every output file into `cfg.output.out_dir`.
/// A failing step still leaves the last valid state, the diagnostics so far and
/// a summary carrying the error; the error is then returned.
pub fn execute(cfg: &RunConfig) -> Result<RunSummary> {
    let dir = &cfg.output.out_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let config_path = dir.join("config.toml");
    fs::write(&config_path, cfg.to_toml()?).map_err(|e| Error::io(&config_path, e))?;

    let mut scenario = generate(&cfg.scenario)?;
    let steps = cfg.scenario.steps;
    let outcome = run_steps(
        &mut scenario.run,
        &scenario.params,
        steps,
        cfg.plan(),
        |run| {
            let path = dir.join(format!("snapshot_{:06}.csv", run.n));
            let mut w = create(&path)?;
            write_snapshot(&mut w, &cfg.scenario, run)?;
            finish(w, &path)
        },
    );

    let run = &scenario.run;
    let path = dir.join("diagnostics.jsonl");
    let mut w = create(&path)?;
    write_diagnostics(&mut w, &run.history)?;
    finish(w, &path)?;
    let path = dir.join("final.csv");
    let mut w = create(&path)?;
    write_snapshot(&mut w, &cfg.scenario, run)?;
    finish(w, &path)?;

    let summary = RunSummary {
        preset: cfg.scenario.preset,
        seed: cfg.scenario.seed,
        steps_requested: steps,
        steps_completed: run.n,
        t: run.t,
        a: run.bg.scale_at(run.t)?,
        error: outcome.as_ref().err().map(ErrorReport::from),
    };
    let path = dir.join("summary.json");
    let text =
        serde_json::to_string_pretty(&summary).map_err(|e| Error::config("", e.to_string()))?;
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    outcome.map(|()| summary)
}
