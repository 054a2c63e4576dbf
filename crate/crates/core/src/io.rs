//! Plain-text data formats: cost and risk tables in, result tables out.
//!
//! CSV is comma-separated with a header row, LF line endings and `.` as the
//! decimal point. Floats are written with 17 significant digits so that
//! every table reads back bit-for-bit; the infeasible-threshold sentinel is
//! the literal `inf`.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dual::Stability;
use crate::error::{Error, Result};
use crate::sample::CostSample;

/// Formats a float with 17 significant digits, or `inf` / `-inf` / `nan`.
pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Parses a float, accepting the `inf` sentinel.
pub fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    match s.trim() {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        t => t.parse::<f64>().map_err(|e| format!("'{t}' is not a number ({e})")),
    }
}

/// Serde adapter writing `f64::INFINITY` as the string `"inf"`.
pub mod sentinel {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};
    use std::fmt;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&super::format_f64(*v))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = f64;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
                Ok(v)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
                Ok(v as f64)
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
                Ok(v as f64)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
                super::parse_f64(v).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

fn csv_reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(r)
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.kind() {
        csv::ErrorKind::Io(io) => Error::Io(io.to_string()),
        _ => Error::Parse { line, message: e.to_string() },
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

fn column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.eq_ignore_ascii_case(name))
}

fn read_column<R: Read>(reader: R, name: &str) -> Result<(Vec<f64>, Vec<Option<String>>)> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let idx = column(&headers, name)
        .ok_or_else(|| Error::Parse { line: 1, message: format!("missing required column '{name}'") })?;
    let group_idx = column(&headers, "group").or_else(|| if headers.len() == 2 { Some(1 - idx) } else { None });
    let mut values = Vec::new();
    let mut groups = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let field = rec.get(idx).ok_or_else(|| Error::Parse { line, message: format!("missing '{name}' field") })?;
        let v = parse_f64(field).map_err(|m| Error::Parse { line, message: m })?;
        if !v.is_finite() {
            return Err(Error::Parse { line, message: format!("{name} must be finite, got {field}") });
        }
        values.push(v);
        groups.push(group_idx.and_then(|g| rec.get(g)).map(str::to_string));
    }
    if values.is_empty() {
        return Err(Error::Parse { line: 1, message: "table has no data rows".into() });
    }
    Ok((values, groups))
}

/// Reads a single-column cost table with header `cost`.
pub fn read_costs<R: Read>(reader: R) -> Result<CostSample> {
    let (values, _) = read_column(reader, "cost")?;
    CostSample::new(values)
}

/// One row of a risk table: a group key and its conditional risk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskRow {
    pub group: String,
    pub risk: f64,
}

/// Conditional-risk values per group; each row is one cost observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskTable {
    rows: Vec<RiskRow>,
}

impl RiskTable {
    pub fn new(rows: Vec<RiskRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("risk table must have at least one row"));
        }
        if let Some(r) = rows.iter().find(|r| !r.risk.is_finite()) {
            return Err(Error::invalid(format!("risk for group '{}' is not finite", r.group)));
        }
        Ok(RiskTable { rows })
    }

    pub fn rows(&self) -> &[RiskRow] {
        &self.rows
    }

    pub fn to_sample(&self) -> CostSample {
        CostSample::new(self.rows.iter().map(|r| r.risk).collect()).expect("validated rows")
    }
}

/// Reads a table with a `risk` column and an optional `group` column.
/// Rows without a group key are numbered.
pub fn read_risk_table<R: Read>(reader: R) -> Result<RiskTable> {
    let (values, groups) = read_column(reader, "risk")?;
    let rows = values
        .into_iter()
        .zip(groups)
        .enumerate()
        .map(|(i, (risk, g))| RiskRow { group: g.unwrap_or_else(|| i.to_string()), risk })
        .collect();
    RiskTable::new(rows)
}

/// Reads either a `cost` table or a `risk` table, chosen by header.
pub fn read_sample<R: Read>(mut reader: R) -> Result<CostSample> {
    let mut text = String::new();
    reader.read_to_string(&mut text).map_err(io_err)?;
    let header = text.lines().next().unwrap_or("");
    let has = |name: &str| header.split(',').any(|h| h.trim().eq_ignore_ascii_case(name));
    if has("cost") {
        read_costs(text.as_bytes())
    } else if has("risk") {
        Ok(read_risk_table(text.as_bytes())?.to_sample())
    } else {
        Err(Error::Parse { line: 1, message: "expected a 'cost' or 'risk' column".into() })
    }
}

pub fn write_costs<W: Write>(w: W, sample: &CostSample) -> Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(["cost"]).map_err(csv_err)?;
    for v in sample.values() {
        wtr.write_record([format_f64(*v)]).map_err(csv_err)?;
    }
    wtr.flush().map_err(io_err)
}

/// One point of a threshold sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub y: f64,
    pub stability: Stability,
    #[serde(with = "sentinel")]
    pub lambda_star: f64,
}

pub fn write_sweep<W: Write>(w: W, rows: &[SweepRow]) -> Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(["y", "stability", "lambda_star"]).map_err(csv_err)?;
    for r in rows {
        wtr.write_record([format_f64(r.y), format_f64(r.stability.value()), format_f64(r.lambda_star)])
            .map_err(csv_err)?;
    }
    wtr.flush().map_err(io_err)
}

fn parse_field(rec: &csv::StringRecord, i: usize) -> Result<f64> {
    let line = rec.position().map(|p| p.line()).unwrap_or(0);
    let f = rec.get(i).ok_or_else(|| Error::Parse { line, message: format!("missing field {i}") })?;
    parse_f64(f).map_err(|m| Error::Parse { line, message: m })
}

fn parse_u64(rec: &csv::StringRecord, i: usize) -> Result<u64> {
    let line = rec.position().map(|p| p.line()).unwrap_or(0);
    let f = rec.get(i).ok_or_else(|| Error::Parse { line, message: format!("missing field {i}") })?;
    f.parse().map_err(|e| Error::Parse { line, message: format!("'{f}' is not an integer ({e})") })
}

pub fn read_sweep<R: Read>(r: R) -> Result<Vec<SweepRow>> {
    csv_reader(r)
        .records()
        .map(|rec| {
            let rec = rec.map_err(csv_err)?;
            Ok(SweepRow {
                y: parse_field(&rec, 0)?,
                stability: Stability::from_f64(parse_field(&rec, 1)?),
                lambda_star: parse_field(&rec, 2)?,
            })
        })
        .collect()
}

/// One row of a queue batch: the cumulative cost of a sample path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathCostRow {
    pub path_id: u64,
    pub policy: String,
    pub scenario: String,
    pub cumulative_cost: f64,
}

pub fn write_path_costs<W: Write>(w: W, rows: &[PathCostRow]) -> Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(["path_id", "policy", "scenario", "cumulative_cost"]).map_err(csv_err)?;
    for r in rows {
        wtr.write_record([r.path_id.to_string(), r.policy.clone(), r.scenario.clone(), format_f64(r.cumulative_cost)])
            .map_err(csv_err)?;
    }
    wtr.flush().map_err(io_err)
}

pub fn read_path_costs<R: Read>(r: R) -> Result<Vec<PathCostRow>> {
    csv_reader(r)
        .records()
        .map(|rec| {
            let rec = rec.map_err(csv_err)?;
            Ok(PathCostRow {
                path_id: parse_u64(&rec, 0)?,
                policy: rec.get(1).unwrap_or_default().to_string(),
                scenario: rec.get(2).unwrap_or_default().to_string(),
                cumulative_cost: parse_field(&rec, 3)?,
            })
        })
        .collect()
}

/// One row of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: u64,
    pub mse: f64,
    pub mean_error: f64,
    pub sd_error: f64,
    pub boundary_count: u64,
}

pub fn write_convergence<W: Write>(w: W, rows: &[ConvergenceRow]) -> Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(["n", "mse", "mean_error", "sd_error", "boundary_count"]).map_err(csv_err)?;
    for r in rows {
        wtr.write_record([
            r.n.to_string(),
            format_f64(r.mse),
            format_f64(r.mean_error),
            format_f64(r.sd_error),
            r.boundary_count.to_string(),
        ])
        .map_err(csv_err)?;
    }
    wtr.flush().map_err(io_err)
}

pub fn read_convergence<R: Read>(r: R) -> Result<Vec<ConvergenceRow>> {
    csv_reader(r)
        .records()
        .map(|rec| {
            let rec = rec.map_err(csv_err)?;
            Ok(ConvergenceRow {
                n: parse_u64(&rec, 0)?,
                mse: parse_field(&rec, 1)?,
                mean_error: parse_field(&rec, 2)?,
                sd_error: parse_field(&rec, 3)?,
                boundary_count: parse_u64(&rec, 4)?,
            })
        })
        .collect()
}

/// Record of one command invocation, written next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub seed: u64,
    pub tool_version: String,
    pub outputs: Vec<String>,
    pub hash: String,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, seed: u64, tool_version: impl Into<String>) -> Self {
        let mut m = RunManifest {
            command: command.into(),
            parameters: BTreeMap::new(),
            seed,
            tool_version: tool_version.into(),
            outputs: Vec::new(),
            hash: String::new(),
        };
        m.hash = m.compute_hash();
        m
    }

    pub fn with_parameter(mut self, key: impl Into<String>, value: impl Serialize) -> Self {
        let value = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.parameters.insert(key.into(), value);
        self.hash = self.compute_hash();
        self
    }

    pub fn with_output(mut self, path: impl Into<String>) -> Self {
        self.outputs.push(path.into());
        self.hash = self.compute_hash();
        self
    }

    /// SHA-256 over the canonical JSON of every field except the hash.
    pub fn compute_hash(&self) -> String {
        let body = serde_json::json!({
            "command": self.command,
            "parameters": self.parameters,
            "seed": self.seed,
            "tool_version": self.tool_version,
            "outputs": self.outputs,
        });
        let digest = Sha256::digest(body.to_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}
