//! Run configuration: a flat `key = value` file, overlaid by command-line
//! flags, overlaid by `QC_THREADS` for the thread count.

use a4count_core::cubicfield::admissible_divisor;
use a4count_core::idealcount::Subgroup;
use a4count_core::quartic::CountMode;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

pub const THREADS_ENV: &str = "QC_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub origin: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.origin, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(origin: &str, message: impl Into<String>) -> ConfigError {
    ConfigError { origin: origin.to_string(), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Constant {
    Alpha,
    Beta,
    CF,
    Tamagawa,
}

impl Constant {
    pub fn name(self) -> &'static str {
        match self {
            Constant::Alpha => "alpha",
            Constant::Beta => "beta",
            Constant::CF => "c_f",
            Constant::Tamagawa => "tamagawa",
        }
    }
}

/// Every recognised key. Keys under `output.` and `run.threads` do not enter
/// the config hash: they change where and how fast, not what.
pub const KEYS: &[&str] = &[
    "run.x",
    "run.conductor",
    "run.d",
    "run.m",
    "run.threads",
    "cubic.include_ramified_3",
    "ideal.subgroup",
    "lfunc.truncation",
    "euler.truncation",
    "charsum.a",
    "charsum.identity",
    "quartic.mode",
    "quartic.epsilon",
    "quartic.enforce_precondition",
    "constants.which",
    "fixture.path",
    "output.path",
    "output.witnesses",
    "output.record_time",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub x: Option<f64>,
    pub conductor: Option<u64>,
    pub d: u64,
    pub m: Option<u64>,
    pub threads: Option<usize>,
    pub include_ramified_3: bool,
    pub subgroup: Subgroup,
    /// `T`: partial-sum length for L-values; `None` picks per conductor.
    pub lfunc_truncation: Option<u64>,
    /// `P`: Euler products run over `p ≤ P`.
    pub euler_truncation: u64,
    /// `A`: the small/large cutoff is `log(X)^A`.
    pub charsum_a: f64,
    pub charsum_identity: bool,
    pub quartic_mode: CountMode,
    pub quartic_epsilon: f64,
    pub quartic_precondition: bool,
    pub constants_which: Vec<Constant>,
    pub fixture_path: Option<PathBuf>,
    pub output_path: Option<PathBuf>,
    pub witnesses_path: Option<PathBuf>,
    pub record_time: bool,
    /// Key → origin of the value, for later error messages.
    origins: BTreeMap<&'static str, String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            x: None,
            conductor: None,
            d: 1,
            m: None,
            threads: None,
            include_ramified_3: false,
            subgroup: Subgroup::Full,
            lfunc_truncation: None,
            euler_truncation: 1_000_000,
            charsum_a: 2.0,
            charsum_identity: false,
            quartic_mode: CountMode::Exact,
            quartic_epsilon: 1.0,
            quartic_precondition: true,
            constants_which: vec![Constant::Alpha, Constant::Beta],
            fixture_path: None,
            output_path: None,
            witnesses_path: None,
            record_time: true,
            origins: BTreeMap::new(),
        }
    }
}

/// Integer that may be written in float notation (`1e7`).
pub fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !v.is_finite() || v < 0.0 || v.fract() != 0.0 || v >= 1.8e19 {
        return Err(format!("`{s}` is not a non-negative integer"));
    }
    Ok(v as u64)
}

fn parse_positive_count(s: &str) -> Result<u64, String> {
    match parse_count(s)? {
        0 => Err("must be positive".into()),
        n => Ok(n),
    }
}

fn parse_positive_real(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !v.is_finite() || v <= 0.0 {
        return Err(format!("`{s}` must be a positive finite number"));
    }
    Ok(v)
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("`{s}` is not a boolean")),
    }
}

fn parse_which(s: &str) -> Result<Vec<Constant>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let c = match part.to_ascii_lowercase().as_str() {
            "alpha" => Constant::Alpha,
            "beta" => Constant::Beta,
            "c_f" | "cf" => Constant::CF,
            "tamagawa" => Constant::Tamagawa,
            _ => return Err(format!("unknown constant `{part}` (expected alpha, beta, c_f, tamagawa)")),
        };
        if !out.contains(&c) {
            out.push(c);
        }
    }
    if out.is_empty() {
        return Err("empty constant list".into());
    }
    out.sort();
    Ok(out)
}

impl RunConfig {
    /// Parses and validates one value. `origin` names the file line or flag.
    pub fn set(&mut self, key: &str, raw: &str, origin: &str) -> Result<(), ConfigError> {
        let Some(&key) = KEYS.iter().find(|k| **k == key) else {
            return Err(err(origin, format!("unknown key `{key}`")));
        };
        let v = raw.trim();
        let wrap = |r: Result<(), String>| r.map_err(|m| err(origin, format!("{key}: {m}")));
        wrap(match key {
            "run.x" => parse_positive_real(v).map(|x| self.x = Some(x)),
            "run.conductor" => parse_positive_count(v).map(|c| self.conductor = Some(c)),
            "run.d" => parse_positive_count(v).and_then(|d| {
                if admissible_divisor(d) {
                    self.d = d;
                    Ok(())
                } else {
                    Err(format!("{d} is not squarefree with all prime factors ≡ 1 mod 3"))
                }
            }),
            "run.m" => parse_positive_count(v).map(|m| self.m = Some(m)),
            "run.threads" => parse_positive_count(v).map(|t| self.threads = Some(t as usize)),
            "cubic.include_ramified_3" => parse_bool(v).map(|b| self.include_ramified_3 = b),
            "ideal.subgroup" => v.parse::<Subgroup>().map(|s| self.subgroup = s).map_err(|e| e.to_string()),
            "lfunc.truncation" => parse_positive_count(v).map(|t| self.lfunc_truncation = Some(t)),
            "euler.truncation" => parse_positive_count(v).and_then(|p| {
                if p < 3 {
                    Err("must be at least 3".into())
                } else {
                    self.euler_truncation = p;
                    Ok(())
                }
            }),
            "charsum.a" => parse_positive_real(v).map(|a| self.charsum_a = a),
            "charsum.identity" => parse_bool(v).map(|b| self.charsum_identity = b),
            "quartic.mode" => v.parse::<CountMode>().map(|m| self.quartic_mode = m).map_err(|e| e.to_string()),
            "quartic.epsilon" => parse_positive_real(v).map(|e| self.quartic_epsilon = e),
            "quartic.enforce_precondition" => parse_bool(v).map(|b| self.quartic_precondition = b),
            "constants.which" => parse_which(v).map(|w| self.constants_which = w),
            "fixture.path" => non_empty(v).map(|p| self.fixture_path = Some(p)),
            "output.path" => non_empty(v).map(|p| self.output_path = Some(p)),
            "output.witnesses" => non_empty(v).map(|p| self.witnesses_path = Some(p)),
            "output.record_time" => parse_bool(v).map(|b| self.record_time = b),
            _ => unreachable!("key table and match disagree on `{key}`"),
        })?;
        self.origins.insert(key, origin.to_string());
        Ok(())
    }

    /// Parses a config file body. Blank lines and lines starting with `#` are
    /// skipped; a key may appear at most once.
    pub fn parse_str(&mut self, text: &str, name: &str) -> Result<(), ConfigError> {
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let origin = format!("{name}:{lineno}");
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let Some((k, v)) = t.split_once('=') else {
                return Err(err(&origin, format!("expected `key = value`, found `{t}`")));
            };
            let k = k.trim();
            if k.is_empty() {
                return Err(err(&origin, "missing key before `=`"));
            }
            if let Some(first) = seen.insert(k.to_string(), lineno) {
                return Err(err(&origin, format!("duplicate key `{k}` (first set on line {first})")));
            }
            let v = v.trim();
            let v = v.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(v);
            self.set(k, v, &origin)?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<RunConfig, ConfigError> {
        let name = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| err(&name, format!("cannot read config: {e}")))?;
        let mut cfg = RunConfig::default();
        cfg.parse_str(&text, &name)?;
        Ok(cfg)
    }

    /// Applies `QC_THREADS` if set.
    pub fn apply_env(&mut self) -> Result<(), ConfigError> {
        if let Ok(v) = std::env::var(THREADS_ENV) {
            self.set("run.threads", &v, &format!("environment {THREADS_ENV}"))?;
        }
        Ok(())
    }

    pub fn origin(&self, key: &str) -> Option<&str> {
        self.origins.get(key).map(String::as_str)
    }

    pub fn require_x(&self) -> Result<f64, ConfigError> {
        self.x.ok_or_else(|| err("config", "run.x (--x) is required"))
    }

    /// `run.x` as an integer bound.
    pub fn require_x_count(&self) -> Result<u64, ConfigError> {
        let x = self.require_x()?;
        let origin = self.origin("run.x").unwrap_or("config").to_string();
        if x.fract() != 0.0 || x >= 1.8e19 {
            return Err(err(&origin, format!("run.x: {x} must be an integer here")));
        }
        Ok(x as u64)
    }

    pub fn require_conductor(&self) -> Result<u64, ConfigError> {
        self.conductor.ok_or_else(|| err("config", "run.conductor (--conductor) is required"))
    }

    /// Canonical text of every value that affects results.
    pub fn canonical(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
        let which: Vec<&str> = self.constants_which.iter().map(|c| c.name()).collect();
        let rows = [
            ("run.x", opt(self.x.map(|v| format!("{v:e}")))),
            ("run.conductor", opt(self.conductor.map(|v| v.to_string()))),
            ("run.d", self.d.to_string()),
            ("run.m", opt(self.m.map(|v| v.to_string()))),
            ("cubic.include_ramified_3", self.include_ramified_3.to_string()),
            ("ideal.subgroup", self.subgroup.to_string()),
            ("lfunc.truncation", opt(self.lfunc_truncation.map(|v| v.to_string()))),
            ("euler.truncation", self.euler_truncation.to_string()),
            ("charsum.a", format!("{:e}", self.charsum_a)),
            ("charsum.identity", self.charsum_identity.to_string()),
            ("quartic.mode", self.quartic_mode.to_string()),
            ("quartic.epsilon", format!("{:e}", self.quartic_epsilon)),
            ("quartic.enforce_precondition", self.quartic_precondition.to_string()),
            ("constants.which", which.join(",")),
            ("fixture.path", opt(self.fixture_path.as_ref().map(|p| p.display().to_string()))),
        ];
        rows.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// SHA-256 of the command name and [`canonical`](Self::canonical), hex.
    pub fn hash(&self, command: &str) -> String {
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        h.update(b"\n");
        h.update(self.canonical().as_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn non_empty(v: &str) -> Result<PathBuf, String> {
    if v.is_empty() {
        Err("empty path".into())
    } else {
        Ok(PathBuf::from(v))
    }
}
