//! Durable results: one JSON object per experiment, CSV for sweeps.
//!
//! Floats are written as `{:.16e}` (17 significant digits), which parses
//! back to the identical `f64`; non-finite values become `null`. Files are
//! written to a temporary sibling and renamed into place.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use gluskin_core::measure::CalibrationConstants;
use gluskin_core::Seed;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub const SCHEMA_VERSION: u64 = 1;
/// Overrides the default output directory (`results`).
pub const OUT_DIR_ENV: &str = "GLUSKIN_OUT_DIR";

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub name: String,
    pub parameters: Map<String, Value>,
    pub seed: Seed,
    pub trials: u64,
    pub empirical_rate: f64,
    pub bound_value: f64,
    pub constants: CalibrationConstants,
    /// The harness's stated comparison holds.
    pub passed: bool,
    /// `passed` is a claim the run stands behind; record-only harnesses
    /// leave this false.
    pub asserted: bool,
    pub details: Map<String, Value>,
    pub wall_time: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Persisted {
    schema_version: u64,
    name: String,
    parameters: Map<String, Value>,
    seed: Seed,
    results: Value,
    wall_time: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Results {
    trials: u64,
    empirical_rate: Option<f64>,
    bound_value: Option<f64>,
    passed: bool,
    asserted: bool,
    constants: CalibrationConstants,
    details: Map<String, Value>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl ExperimentRecord {
    pub fn new(name: &str, seed: Seed, constants: CalibrationConstants) -> Self {
        Self {
            name: name.into(),
            parameters: Map::new(),
            seed,
            trials: 0,
            empirical_rate: f64::NAN,
            bound_value: f64::NAN,
            constants,
            passed: false,
            asserted: false,
            details: Map::new(),
            wall_time: None,
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.parameters.insert(key.into(), serde_json::to_value(value).expect("serializable parameter"));
        self
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) {
        self.details.insert(key.into(), serde_json::to_value(value).expect("serializable detail"));
    }

    /// Asserted harness failed.
    pub fn failed_assertion(&self) -> bool {
        self.asserted && !self.passed
    }

    /// The `results` object: everything replay must reproduce.
    pub fn results(&self) -> Value {
        let r = Results {
            trials: self.trials,
            empirical_rate: finite(self.empirical_rate),
            bound_value: finite(self.bound_value),
            passed: self.passed,
            asserted: self.asserted,
            constants: self.constants,
            details: self.details.clone(),
        };
        serde_json::to_value(r).expect("results serialize")
    }

    pub fn to_json(&self) -> String {
        let p = Persisted {
            schema_version: SCHEMA_VERSION,
            name: self.name.clone(),
            parameters: self.parameters.clone(),
            seed: self.seed,
            results: self.results(),
            wall_time: self.wall_time,
        };
        let mut out = to_exact_json(&p);
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let p: Persisted = serde_json::from_str(text).context("malformed experiment record")?;
        if p.schema_version != SCHEMA_VERSION {
            bail!("unsupported schema_version {}", p.schema_version);
        }
        let r: Results = serde_json::from_value(p.results).context("malformed results object")?;
        Ok(Self {
            name: p.name,
            parameters: p.parameters,
            seed: p.seed,
            trials: r.trials,
            empirical_rate: r.empirical_rate.unwrap_or(f64::NAN),
            bound_value: r.bound_value.unwrap_or(f64::NAN),
            constants: r.constants,
            passed: r.passed,
            asserted: r.asserted,
            details: r.details,
            wall_time: p.wall_time,
        })
    }

    /// `results` as it reads back from disk, for bit-exact comparison.
    pub fn persisted_results(&self) -> Value {
        serde_json::from_str(&to_exact_json(&self.results())).expect("own output parses")
    }
}

struct ExactFloats;

impl serde_json::ser::Formatter for ExactFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{}", format_f64(value))
    }
}

/// 17 significant digits; empty for non-finite values.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

pub fn to_exact_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ExactFloats);
    value.serialize(&mut ser).expect("in-memory serialization");
    String::from_utf8(buf).expect("json is utf-8")
}

/// `--out`, else `$GLUSKIN_OUT_DIR`, else `results`.
pub fn out_dir(explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results"))
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_record(path: &Path, record: &ExperimentRecord) -> anyhow::Result<()> {
    write_atomic(path, record.to_json().as_bytes())
}

pub fn read_record(path: &Path) -> anyhow::Result<ExperimentRecord> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ExperimentRecord::from_json(&text)
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_f64() => format_f64(n.as_f64().expect("f64")),
        other => other.to_string(),
    }
}

/// Writes rows (JSON objects sharing `columns`) as CSV with the same float
/// text as the JSON record.
pub fn write_csv(path: &Path, columns: &[&str], rows: &[Value]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(columns)?;
    for row in rows {
        w.write_record(columns.iter().map(|c| csv_cell(row.get(*c).unwrap_or(&Value::Null))))?;
    }
    write_atomic(path, &w.into_inner()?)
}
