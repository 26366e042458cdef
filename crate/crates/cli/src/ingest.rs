//! Reader for quartic-field tables exported from public databases.
//!
//! Expected layout: a header `label,disc,resolvent_conductor`, then one row
//! per A4-quartic field with its absolute discriminant and the conductor of
//! its cyclic cubic resolvent.

use a4count_core::cubicfield::fields_of_conductor;
use std::collections::HashMap;
use std::fmt;
use std::path::Path;

pub const HEADER: [&str; 3] = ["label", "disc", "resolvent_conductor"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LmfdbQuarticRow {
    pub label: String,
    pub disc_l: u128,
    pub resolvent_conductor: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestError {
    /// 1-based line in the file, when the error is tied to one.
    pub line: Option<u64>,
    pub message: String,
}

impl fmt::Display for IngestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for IngestError {}

fn at(line: u64, message: impl Into<String>) -> IngestError {
    IngestError { line: Some(line), message: message.into() }
}

pub fn ingest_lmfdb_csv(path: &Path) -> Result<Vec<LmfdbQuarticRow>, IngestError> {
    let bytes = std::fs::read(path)
        .map_err(|e| IngestError { line: None, message: format!("cannot read {}: {e}", path.display()) })?;
    let text = String::from_utf8(bytes).map_err(|e| IngestError { line: None, message: format!("not UTF-8: {e}") })?;
    parse_lmfdb_csv(&text)
}

/// Parses, validates and sorts by `(disc, label)`. An empty input yields no
/// rows; anything else must start with the header.
pub fn parse_lmfdb_csv(text: &str) -> Result<Vec<LmfdbQuarticRow>, IngestError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| at(1, format!("unreadable header: {e}")))?.clone();
    if header.iter().collect::<Vec<_>>() != HEADER {
        return Err(at(1, format!("header must be `{}`, found `{}`", HEADER.join(","), header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut rows = Vec::new();
    let mut labels: HashMap<String, u64> = HashMap::new();
    let mut admissible: HashMap<u64, bool> = HashMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            at(line, format!("malformed row: {e}"))
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let label = rec[0].to_string();
        if label.is_empty() {
            return Err(at(line, "empty label"));
        }
        let disc: i128 = rec[1].parse().map_err(|_| at(line, format!("disc `{}` is not an integer", &rec[1])))?;
        if disc <= 0 {
            return Err(at(line, format!("disc must be positive, found {disc}")));
        }
        let f: u64 = rec[2]
            .parse()
            .map_err(|_| at(line, format!("resolvent_conductor `{}` is not a positive integer", &rec[2])))?;
        let ok = match admissible.get(&f) {
            Some(&ok) => ok,
            None => {
                let ok = fields_of_conductor(f).map(|v| !v.is_empty()).unwrap_or(false);
                admissible.insert(f, ok);
                ok
            }
        };
        if !ok {
            return Err(at(line, format!("{f} is not the conductor of a cyclic cubic field")));
        }
        if let Some(first) = labels.insert(label.clone(), line) {
            return Err(at(line, format!("duplicate label `{label}` (first on line {first})")));
        }
        rows.push(LmfdbQuarticRow { label, disc_l: disc as u128, resolvent_conductor: f });
    }
    rows.sort_by(|a, b| (a.disc_l, &a.label).cmp(&(b.disc_l, &b.label)));
    Ok(rows)
}
