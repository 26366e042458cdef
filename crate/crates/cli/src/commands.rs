//! The subcommands. Each turns a validated [`RunConfig`] into an [`Outcome`];
//! rendering and file output live in the caller.

use crate::config::{ConfigError, Constant, RunConfig};
use crate::ingest::{ingest_lmfdb_csv, IngestError};
use crate::report::{num, ReportError, Table};
use a4count_core::charsum::{average_residue, s_d_split, verify_charsum_identity, PART_KEYS};
use a4count_core::constants::{alpha_route_discrepancy, beta_d, c_f, verify_tamagawa_matches_cf};
use a4count_core::cubicfield::{enumerate_fields, fields_of_conductor, CyclicCubicField};
use a4count_core::idealcount::count_with_truncation;
use a4count_core::lfunc::{zeta_residue, zeta_residue_with};
use a4count_core::quartic::{count_quartics, enumerate_quartics, CountMode, QuarticConfig};
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    EnumerateCubics,
    ZetaResidues,
    ClassGroups,
    AvgResidue,
    CountIdeals,
    CountQuartics,
    Charsum,
    Constants,
    ValidateFixture,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::EnumerateCubics => "enumerate-cubics",
            Command::ZetaResidues => "zeta-residues",
            Command::ClassGroups => "class-groups",
            Command::AvgResidue => "avg-residue",
            Command::CountIdeals => "count-ideals",
            Command::CountQuartics => "count-quartics",
            Command::Charsum => "charsum",
            Command::Constants => "constants",
            Command::ValidateFixture => "validate-fixture",
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Ingest(IngestError),
    Core(a4count_core::Error),
    Report(ReportError),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Ingest(e) => write!(f, "fixture error: {e}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Report(e) => write!(f, "report error: {e}"),
            CliError::Io(e) => write!(f, "I/O error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}
impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::Ingest(e)
    }
}
impl From<a4count_core::Error> for CliError {
    fn from(e: a4count_core::Error) -> Self {
        CliError::Core(e)
    }
}
impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        CliError::Report(e)
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_CHECK: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use a4count_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Ingest(_) => EXIT_CONFIG,
            CliError::Core(E::InvalidInput(_)) => EXIT_CONFIG,
            CliError::Core(E::Certificate(_) | E::Consistency(_) | E::Precision(_)) => EXIT_CHECK,
            CliError::Core(E::LimitExceeded(_)) => EXIT_RESOURCE,
            CliError::Report(_) => EXIT_CHECK,
            CliError::Io(_) => EXIT_RESOURCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Csv(Table),
    Json { results: Value, residuals: Value },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub body: Body,
    /// Extra CSV tables to write, with their destination.
    pub side_tables: Vec<(PathBuf, Table)>,
    pub warnings: Vec<String>,
    pub exit: i32,
}

impl Outcome {
    fn csv(t: Table) -> Self {
        Outcome { body: Body::Csv(t), side_tables: Vec::new(), warnings: Vec::new(), exit: EXIT_OK }
    }
    fn json(results: Value, residuals: Value) -> Self {
        Outcome { body: Body::Json { results, residuals }, side_tables: Vec::new(), warnings: Vec::new(), exit: EXIT_OK }
    }
}

type Res<T> = Result<T, CliError>;

pub fn execute(cmd: Command, cfg: &RunConfig) -> Res<Outcome> {
    match cmd {
        Command::EnumerateCubics => enumerate_cubics(cfg),
        Command::ZetaResidues => zeta_residues(cfg),
        Command::ClassGroups => class_groups(cfg),
        Command::AvgResidue => avg_residue(cfg),
        Command::CountIdeals => count_ideals(cfg),
        Command::CountQuartics => quartics(cfg),
        Command::Charsum => charsum(cfg),
        Command::Constants => constants(cfg),
        Command::ValidateFixture => validate_fixture(cfg),
    }
}

fn conductor_fields(f: u64) -> Res<Vec<CyclicCubicField>> {
    let fields = fields_of_conductor(f)?;
    if fields.is_empty() {
        return Err(ConfigError { origin: "run.conductor".into(), message: format!("no cyclic cubic field has conductor {f}") }.into());
    }
    Ok(fields)
}

/// Fields of `run.conductor` if given, otherwise all with `Δ_F ≤ run.x`.
fn selected_fields(cfg: &RunConfig) -> Res<Vec<CyclicCubicField>> {
    if let Some(f) = cfg.conductor {
        return conductor_fields(f);
    }
    Ok(enumerate_fields(cfg.require_x()?, !cfg.include_ramified_3, cfg.d)?)
}

fn enumerate_cubics(cfg: &RunConfig) -> Res<Outcome> {
    let fields = selected_fields(cfg)?;
    let bases = fields.par_iter().map(|f| f.integral_basis()).collect::<Result<Vec<_>, _>>()?;
    let mut per: BTreeMap<u64, usize> = BTreeMap::new();
    for f in &fields {
        *per.entry(f.conductor()).or_default() += 1;
    }
    let mut t = Table::new(&["conductor", "discriminant", "defining_cubic_coeffs", "num_fields_at_conductor"]);
    for (f, b) in fields.iter().zip(&bases) {
        let [c0, c1, c2] = b.defining_cubic;
        t.push(vec![
            f.conductor().to_string(),
            f.discriminant().to_string(),
            format!("1 {c2} {c1} {c0}"),
            per[&f.conductor()].to_string(),
        ]);
    }
    Ok(Outcome::csv(t))
}

fn zeta_residues(cfg: &RunConfig) -> Res<Outcome> {
    let fields = selected_fields(cfg)?;
    let res = fields
        .par_iter()
        .map(|f| match cfg.lfunc_truncation {
            Some(t) => zeta_residue_with(f, t),
            None => zeta_residue(f),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(&["conductor", "zeta_residue", "method_residual"]);
    for z in res {
        t.push(vec![z.conductor.to_string(), num(z.value.to_f64()), num(z.residual)]);
    }
    Ok(Outcome::csv(t))
}

fn class_groups(cfg: &RunConfig) -> Res<Outcome> {
    let fields = selected_fields(cfg)?;
    let groups = fields.par_iter().map(|f| f.class_group()).collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(&["conductor", "h", "elementary_divisors", "two_torsion", "regulator", "certificate_residual"]);
    for g in groups {
        let divs: Vec<String> = g.elementary_divisors.iter().map(u64::to_string).collect();
        t.push(vec![
            g.conductor.to_string(),
            g.h.to_string(),
            divs.join(" "),
            g.two_torsion_size().to_string(),
            num(g.regulator),
            num(g.certificate_residual),
        ]);
    }
    Ok(Outcome::csv(t))
}

fn avg_residue(cfg: &RunConfig) -> Res<Outcome> {
    let r = average_residue(cfg.require_x()?, cfg.d)?;
    let mut t = Table::new(&["X", "sum_residues", "predicted", "ratio"]);
    t.push(vec![num(r.x), num(r.sum_residues), num(r.predicted), num(r.ratio)]);
    Ok(Outcome::csv(t))
}

fn count_ideals(cfg: &RunConfig) -> Res<Outcome> {
    let fields = conductor_fields(cfg.require_conductor()?)?;
    let x = cfg.require_x_count()?;
    let m = cfg.m.unwrap_or(1);
    let mut results = Vec::new();
    let mut residuals = Vec::new();
    for (i, f) in fields.iter().enumerate() {
        let r = count_with_truncation(f, m, cfg.subgroup, x, cfg.euler_truncation)?;
        results.push(json!({
            "conductor": r.conductor,
            "field_index": i,
            "x": r.x,
            "m": r.m,
            "subgroup": r.subgroup.to_string(),
            "exact_count": r.exact_count,
            "main_term": r.main_term,
            "ratio": r.ratio,
            "density": r.density,
            "zeta_residue": r.zeta_residue,
            "l_gamma": r.l_gamma,
        }));
        residuals.push(json!({ "field_index": i, "l_gamma_tail_bound": r.l_gamma_tail }));
    }
    Ok(Outcome::json(Value::Array(results), Value::Array(residuals)))
}

fn quartic_config(cfg: &RunConfig) -> QuarticConfig {
    QuarticConfig {
        epsilon: cfg.quartic_epsilon,
        enforce_precondition: cfg.quartic_precondition,
        euler_truncation: cfg.euler_truncation,
    }
}

pub const WITNESS_HEADER: [&str; 6] = ["conductor_F", "disc_L", "norm_a", "u_index", "c_norm", "fiber_id"];

fn quartics(cfg: &RunConfig) -> Res<Outcome> {
    let fields = conductor_fields(cfg.require_conductor()?)?;
    let x = cfg.require_x_count()?;
    let qc = quartic_config(cfg);
    let mut results = Vec::new();
    let mut witnesses = Table::new(&WITNESS_HEADER);
    for (i, f) in fields.iter().enumerate() {
        let r = count_quartics(f, x, cfg.quartic_mode, &qc)?;
        let by_c: Map<String, Value> = r.by_c_norm.iter().map(|(n, c)| (n.to_string(), json!(c))).collect();
        results.push(json!({
            "conductor": r.conductor,
            "field_index": i,
            "x": r.x,
            "mode": r.mode.to_string(),
            "count": r.count,
            "main_term": r.main_term,
            "ratio": r.ratio,
            "two_torsion": r.two_torsion,
            "ideal_count": r.ideal_count,
            "by_c_norm": by_c,
            "min_disc": r.min_disc.map(|d| d.to_string()),
        }));
        if cfg.witnesses_path.is_some() {
            for row in enumerate_quartics(f, x)?.rows() {
                witnesses.push(vec![
                    row.0.to_string(),
                    row.1.to_string(),
                    row.2.to_string(),
                    row.3.to_string(),
                    row.4.to_string(),
                    row.5.to_string(),
                ]);
            }
        }
    }
    let mut out = Outcome::json(Value::Array(results), json!({}));
    if let Some(p) = &cfg.witnesses_path {
        out.side_tables.push((p.clone(), witnesses));
    }
    Ok(out)
}

fn charsum(cfg: &RunConfig) -> Res<Outcome> {
    let x = cfg.require_x()?;
    if cfg.charsum_identity {
        let r = verify_charsum_identity(x, cfg.d)?;
        let results = json!({
            "x": r.x,
            "d": r.d,
            "fields": r.fields,
            "sum_residues": r.lhs,
            "sum_residues_truncated": r.lhs_truncated,
            "half_s_d": r.rhs,
            "half_s_d_matched": r.rhs_matched,
        });
        let residuals = json!({
            "difference": r.difference,
            "scaled": r.scaled,
            "bound": r.bound,
            "within_bound": r.difference.abs() <= r.bound,
        });
        return Ok(Outcome::json(results, residuals));
    }
    let r = s_d_split(cfg.d, x, cfg.charsum_a)?;
    let parts: Map<String, Value> = r.split_parts.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
    let resum: f64 = PART_KEYS.iter().filter_map(|k| r.split_parts.get(*k)).sum();
    let results = json!({
        "d": r.d,
        "x": r.x,
        "s_d": r.s_d,
        "predicted": r.predicted,
        "ratio": r.s_d / r.predicted,
        "split_parts": parts,
        "cutoff_a": r.cutoff_a,
        "ideals": r.ideals,
        "inner_length": r.inner_length,
    });
    let residuals = json!({
        "imaginary_part": r.imag,
        "resummation": (resum - r.s_d).abs(),
    });
    Ok(Outcome::json(results, residuals))
}

fn constants(cfg: &RunConfig) -> Res<Outcome> {
    let p = cfg.euler_truncation;
    let mut results = Map::new();
    let mut residuals = Map::new();
    for c in &cfg.constants_which {
        match c {
            Constant::Alpha => {
                let (closed, assembled, rel) = alpha_route_discrepancy(p)?;
                results.insert(
                    "alpha".into(),
                    json!({
                        "value": closed.value,
                        "tail_bound": closed.tail_bound,
                        "truncation": closed.truncation,
                        "assembled": assembled.value,
                        "assembled_tail_bound": assembled.tail_bound,
                    }),
                );
                residuals.insert("alpha_routes_relative".into(), json!(rel));
            }
            Constant::Beta => {
                let b = beta_d(cfg.d)?;
                let v = a4count_core::constants::beta_d_f64(cfg.d)?;
                results.insert("beta".into(), json!({ "d": cfg.d, "exact": b.to_string(), "value": v }));
            }
            Constant::CF | Constant::Tamagawa => {
                let fields = conductor_fields(cfg.require_conductor()?)?;
                let mut rows = Vec::new();
                let mut worst = 0f64;
                for (i, f) in fields.iter().enumerate() {
                    if *c == Constant::CF {
                        let e = c_f(f, p)?;
                        rows.push(json!({
                            "conductor": f.conductor(),
                            "field_index": i,
                            "value": e.value,
                            "tail_bound": e.tail_bound,
                            "truncation": e.truncation,
                        }));
                    } else {
                        let r = verify_tamagawa_matches_cf(f, p)?;
                        worst = worst.max(r.residual);
                        rows.push(json!({
                            "conductor": r.conductor,
                            "field_index": i,
                            "primes_checked": r.primes_checked,
                            "exact": r.exact,
                            "residual": r.residual,
                            "unchecked_places": r.unchecked_places,
                        }));
                    }
                }
                results.insert(c.name().into(), Value::Array(rows));
                if *c == Constant::Tamagawa {
                    residuals.insert("tamagawa_max".into(), json!(worst));
                }
            }
        }
    }
    Ok(Outcome::json(Value::Object(results), Value::Object(residuals)))
}

fn validate_fixture(cfg: &RunConfig) -> Res<Outcome> {
    let f = cfg.require_conductor()?;
    let x = cfg.require_x_count()?;
    let path = cfg
        .fixture_path
        .clone()
        .ok_or_else(|| ConfigError { origin: "config".into(), message: "fixture.path (--fixture) is required".into() })?;
    let rows = ingest_lmfdb_csv(&path)?;
    if rows.is_empty() {
        let mut out = Outcome::json(
            json!({ "conductor": f, "x": x, "fixture_count": 0, "internal_count": null, "matches": null }),
            json!({}),
        );
        out.warnings.push(format!("fixture {} has no rows; nothing to compare", path.display()));
        return Ok(out);
    }
    let mut fixture: Vec<u128> =
        rows.iter().filter(|r| r.resolvent_conductor == f && r.disc_l <= x as u128).map(|r| r.disc_l).collect();
    fixture.sort_unstable();
    let fields = conductor_fields(f)?;
    let qc = quartic_config(cfg);
    let mut internal_count = 0;
    for field in &fields {
        internal_count += count_quartics(field, x, CountMode::Exact, &qc)?.count;
    }
    let matches = internal_count == fixture.len() as u64;
    let mut results = json!({
        "conductor": f,
        "x": x,
        "fixture_count": fixture.len(),
        "internal_count": internal_count,
        "matches": matches,
    });
    let mut out_exit = EXIT_OK;
    if !matches {
        out_exit = EXIT_CHECK;
        let mut internal: Vec<u128> = Vec::new();
        for field in &fields {
            let e = enumerate_quartics(field, x)?;
            internal.extend(e.fibers.iter().map(|fib| e.witnesses[fib[0]].disc_l));
        }
        internal.sort_unstable();
        let (missing, extra) = multiset_difference(&fixture, &internal);
        results["discs_only_in_fixture"] = json!(missing.iter().map(u128::to_string).collect::<Vec<_>>());
        results["discs_only_internal"] = json!(extra.iter().map(u128::to_string).collect::<Vec<_>>());
    }
    let mut out = Outcome::json(results, json!({ "count_difference": internal_count as i64 - fixture.len() as i64 }));
    out.exit = out_exit;
    Ok(out)
}

/// `(a − b, b − a)` for sorted multisets.
fn multiset_difference(a: &[u128], b: &[u128]) -> (Vec<u128>, Vec<u128>) {
    let (mut i, mut j) = (0, 0);
    let (mut only_a, mut only_b) = (Vec::new(), Vec::new());
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] < b[j]) {
            only_a.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j] < a[i] {
            only_b.push(b[j]);
            j += 1;
        } else {
            i += 1;
            j += 1;
        }
    }
    (only_a, only_b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiset_difference_counts_repeats() {
        let (a, b) = multiset_difference(&[1, 2, 2, 5], &[2, 3, 5, 5]);
        assert_eq!(a, vec![1, 2]);
        assert_eq!(b, vec![3, 5]);
    }
}
