//! Report emission. CSV tables carry their provenance as leading `#` lines;
//! JSON reports carry it as top-level fields.

use serde_json::{json, Value};
use std::fmt;

pub const TOOL: &str = "a4count";

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub version: String,
    pub command: String,
    pub config_hash: String,
    /// `None` when timing is switched off for byte-reproducible output.
    pub runtime_seconds: Option<f64>,
}

impl Provenance {
    pub fn new(command: &str, config_hash: String) -> Self {
        Provenance {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config_hash,
            runtime_seconds: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

#[derive(Debug)]
pub struct ReportError(pub String);

impl fmt::Display for ReportError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ReportError {}

/// Float text that parses back to the same bits.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn runtime_text(r: Option<f64>) -> String {
    r.map(num).unwrap_or_else(|| "none".into())
}

pub fn write_csv(prov: &Provenance, table: &Table) -> Result<String, ReportError> {
    let mut out = String::new();
    out.push_str(&format!("# {TOOL} {}\n", prov.version));
    out.push_str(&format!("# command: {}\n", prov.command));
    out.push_str(&format!("# config_hash: {}\n", prov.config_hash));
    out.push_str(&format!("# runtime_seconds: {}\n", runtime_text(prov.runtime_seconds)));
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(&table.header).map_err(|e| ReportError(e.to_string()))?;
    for r in &table.rows {
        w.write_record(r).map_err(|e| ReportError(e.to_string()))?;
    }
    let body = w.into_inner().map_err(|e| ReportError(e.to_string()))?;
    out.push_str(&String::from_utf8(body).map_err(|e| ReportError(e.to_string()))?);
    Ok(out)
}

/// Inverse of [`write_csv`].
pub fn parse_csv(text: &str) -> Result<(Provenance, Table), ReportError> {
    let mut lines = text.split_inclusive('\n');
    let mut meta = Vec::new();
    let mut consumed = 0;
    for l in lines.by_ref() {
        match l.strip_prefix('#') {
            Some(c) => {
                meta.push(c.trim().to_string());
                consumed += l.len();
            }
            None => break,
        }
    }
    let Some((tool, version)) = meta.first().and_then(|m| m.split_once(' ')) else {
        return Err(ReportError("missing provenance line".into()));
    };
    if tool != TOOL {
        return Err(ReportError(format!("unexpected producer `{tool}`")));
    }
    let field = |key: &str| -> Result<String, ReportError> {
        meta.iter()
            .find_map(|m| m.strip_prefix(key).and_then(|r| r.strip_prefix(": ")))
            .map(str::to_string)
            .ok_or_else(|| ReportError(format!("missing provenance field `{key}`")))
    };
    let runtime = field("runtime_seconds")?;
    let prov = Provenance {
        version: version.to_string(),
        command: field("command")?,
        config_hash: field("config_hash")?,
        runtime_seconds: if runtime == "none" {
            None
        } else {
            Some(runtime.parse().map_err(|_| ReportError(format!("bad runtime `{runtime}`")))?)
        },
    };
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text[consumed..].as_bytes());
    let header: Vec<String> = rdr.headers().map_err(|e| ReportError(e.to_string()))?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        rows.push(rec.map_err(|e| ReportError(e.to_string()))?.iter().map(str::to_string).collect());
    }
    Ok((prov, Table { header, rows }))
}

pub fn json_report(prov: &Provenance, results: Value, residuals: Value) -> Value {
    json!({
        "tool": TOOL,
        "version": prov.version,
        "command": prov.command,
        "config_hash": prov.config_hash,
        "results": results,
        "residuals": residuals,
        "runtime_seconds": prov.runtime_seconds,
    })
}

pub fn write_json(prov: &Provenance, results: Value, residuals: Value) -> String {
    let mut s = serde_json::to_string_pretty(&json_report(prov, results, residuals)).expect("JSON values always serialize");
    s.push('\n');
    s
}
