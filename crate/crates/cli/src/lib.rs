//! Command-line driver: argument parsing, configuration layering, thread pool
//! ownership and report output.

pub mod commands;
pub mod config;
pub mod ingest;
pub mod report;

use clap::{Args, Parser, Subcommand};
use commands::{execute, Body, CliError, Command, EXIT_CONFIG};
use config::{ConfigError, RunConfig};
use report::{write_csv, write_json, Provenance};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser, Debug)]
#[command(name = "a4count", version, about = "Cyclic cubic fields, zeta residues and A4-quartic counts")]
pub struct Cli {
    /// Flat `key = value` configuration file; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads (QC_THREADS overrides).
    #[arg(long, global = true)]
    pub threads: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<String>,
    /// Omit wall time so that reports are byte-reproducible.
    #[arg(long, global = true)]
    pub no_time: bool,
    /// Any configuration key, e.g. `--set lfunc.truncation=1000000`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Args, Debug, Default)]
pub struct FieldArgs {
    /// Discriminant bound.
    #[arg(long)]
    pub x: Option<String>,
    #[arg(long)]
    pub conductor: Option<String>,
    /// Keep fields whose discriminant is divisible by d.
    #[arg(long)]
    pub d: Option<String>,
    /// Include conductors divisible by 9.
    #[arg(long)]
    pub include_ramified_3: bool,
    /// Partial-sum length for L-values.
    #[arg(long)]
    pub truncation: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct AvgArgs {
    #[arg(long)]
    pub x: Option<String>,
    #[arg(long)]
    pub d: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct IdealArgs {
    #[arg(long)]
    pub conductor: Option<String>,
    #[arg(long)]
    pub m: Option<String>,
    #[arg(long)]
    pub x: Option<String>,
    /// cl, 2cl or trivial.
    #[arg(long)]
    pub subgroup: Option<String>,
    /// Euler product truncation P.
    #[arg(long)]
    pub p: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct QuarticArgs {
    #[arg(long)]
    pub conductor: Option<String>,
    #[arg(long)]
    pub x: Option<String>,
    /// exact or lower_bound.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub epsilon: Option<String>,
    /// Skip the `X ≥ 64·Δ^{1+1/ε}` check.
    #[arg(long)]
    pub no_precondition: bool,
    /// Witness CSV destination.
    #[arg(long, value_name = "FILE")]
    pub witnesses: Option<String>,
    #[arg(long)]
    pub p: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct CharsumArgs {
    #[arg(long)]
    pub d: Option<String>,
    #[arg(long)]
    pub x: Option<String>,
    /// Exponent A of the `log(X)^A` cutoff.
    #[arg(long)]
    pub a: Option<String>,
    /// Compare the residue sum up to X with half the character sum.
    #[arg(long)]
    pub identity: bool,
}

#[derive(Args, Debug, Default)]
pub struct ConstantsArgs {
    /// Comma list of alpha, beta, c_f, tamagawa.
    #[arg(long)]
    pub which: Option<String>,
    #[arg(long)]
    pub d: Option<String>,
    /// Euler product truncation P.
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub conductor: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct FixtureArgs {
    #[arg(long)]
    pub conductor: Option<String>,
    #[arg(long)]
    pub x: Option<String>,
    #[arg(long, value_name = "FILE")]
    pub fixture: Option<String>,
    #[arg(long)]
    pub epsilon: Option<String>,
    #[arg(long)]
    pub no_precondition: bool,
}

#[derive(Subcommand, Debug)]
pub enum Sub {
    /// Cyclic cubic fields with defining polynomials.
    EnumerateCubics(FieldArgs),
    /// Residues of the Dedekind zeta function at s = 1.
    ZetaResidues(FieldArgs),
    /// Class groups and regulators.
    ClassGroups(FieldArgs),
    /// Summed zeta residues against the predicted main term.
    AvgResidue(AvgArgs),
    /// Squarefree-norm ideals in a class subgroup.
    CountIdeals(IdealArgs),
    /// A4-quartic fields with a given cubic resolvent.
    CountQuartics(QuarticArgs),
    /// The cubic character sum and its split parts.
    Charsum(CharsumArgs),
    /// Euler-product constants.
    Constants(ConstantsArgs),
    /// Compare quartic counts against an exported table.
    ValidateFixture(FixtureArgs),
}

type Overrides = Vec<(&'static str, String, &'static str)>;

fn push(v: &mut Overrides, key: &'static str, flag: &'static str, val: &Option<String>) {
    if let Some(s) = val {
        v.push((key, s.clone(), flag));
    }
}

impl Sub {
    fn command(&self) -> Command {
        match self {
            Sub::EnumerateCubics(_) => Command::EnumerateCubics,
            Sub::ZetaResidues(_) => Command::ZetaResidues,
            Sub::ClassGroups(_) => Command::ClassGroups,
            Sub::AvgResidue(_) => Command::AvgResidue,
            Sub::CountIdeals(_) => Command::CountIdeals,
            Sub::CountQuartics(_) => Command::CountQuartics,
            Sub::Charsum(_) => Command::Charsum,
            Sub::Constants(_) => Command::Constants,
            Sub::ValidateFixture(_) => Command::ValidateFixture,
        }
    }

    /// Flag values as `(key, raw value, flag name)`.
    fn overrides(&self) -> Overrides {
        let mut v = Vec::new();
        let t = || "true".to_string();
        let f = || "false".to_string();
        match self {
            Sub::EnumerateCubics(a) | Sub::ZetaResidues(a) | Sub::ClassGroups(a) => {
                push(&mut v, "run.x", "--x", &a.x);
                push(&mut v, "run.conductor", "--conductor", &a.conductor);
                push(&mut v, "run.d", "--d", &a.d);
                push(&mut v, "lfunc.truncation", "--truncation", &a.truncation);
                if a.include_ramified_3 {
                    v.push(("cubic.include_ramified_3", t(), "--include-ramified-3"));
                }
            }
            Sub::AvgResidue(a) => {
                push(&mut v, "run.x", "--x", &a.x);
                push(&mut v, "run.d", "--d", &a.d);
            }
            Sub::CountIdeals(a) => {
                push(&mut v, "run.conductor", "--conductor", &a.conductor);
                push(&mut v, "run.m", "--m", &a.m);
                push(&mut v, "run.x", "--x", &a.x);
                push(&mut v, "ideal.subgroup", "--subgroup", &a.subgroup);
                push(&mut v, "euler.truncation", "--p", &a.p);
            }
            Sub::CountQuartics(a) => {
                push(&mut v, "run.conductor", "--conductor", &a.conductor);
                push(&mut v, "run.x", "--x", &a.x);
                push(&mut v, "quartic.mode", "--mode", &a.mode);
                push(&mut v, "quartic.epsilon", "--epsilon", &a.epsilon);
                push(&mut v, "output.witnesses", "--witnesses", &a.witnesses);
                push(&mut v, "euler.truncation", "--p", &a.p);
                if a.no_precondition {
                    v.push(("quartic.enforce_precondition", f(), "--no-precondition"));
                }
            }
            Sub::Charsum(a) => {
                push(&mut v, "run.d", "--d", &a.d);
                push(&mut v, "run.x", "--x", &a.x);
                push(&mut v, "charsum.a", "--a", &a.a);
                if a.identity {
                    v.push(("charsum.identity", t(), "--identity"));
                }
            }
            Sub::Constants(a) => {
                push(&mut v, "constants.which", "--which", &a.which);
                push(&mut v, "run.d", "--d", &a.d);
                push(&mut v, "euler.truncation", "--p", &a.p);
                push(&mut v, "run.conductor", "--conductor", &a.conductor);
            }
            Sub::ValidateFixture(a) => {
                push(&mut v, "run.conductor", "--conductor", &a.conductor);
                push(&mut v, "run.x", "--x", &a.x);
                push(&mut v, "fixture.path", "--fixture", &a.fixture);
                push(&mut v, "quartic.epsilon", "--epsilon", &a.epsilon);
                if a.no_precondition {
                    v.push(("quartic.enforce_precondition", f(), "--no-precondition"));
                }
            }
        }
        v
    }
}

/// File, then `--set`, then dedicated flags, then `QC_THREADS`.
pub fn build_config(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    for kv in &cli.set {
        let origin = format!("--set {kv}");
        let Some((k, v)) = kv.split_once('=') else {
            return Err(ConfigError { origin, message: "expected KEY=VALUE".into() });
        };
        cfg.set(k.trim(), v, &origin)?;
    }
    if let Some(t) = &cli.threads {
        cfg.set("run.threads", t, "--threads")?;
    }
    if let Some(o) = &cli.out {
        cfg.set("output.path", o, "--out")?;
    }
    if cli.no_time {
        cfg.set("output.record_time", "false", "--no-time")?;
    }
    for (k, v, flag) in cli.command.overrides() {
        cfg.set(k, &v, flag)?;
    }
    cfg.apply_env()?;
    Ok(cfg)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Runs one invocation and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    match run_cli(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run_cli(cli: &Cli) -> Result<i32, CliError> {
    let cfg = build_config(cli)?;
    let cmd = cli.command.command();
    let threads = cfg.threads.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Io(format!("cannot start {threads} threads: {e}")))?;
    let start = Instant::now();
    let outcome = pool.install(|| execute(cmd, &cfg))?;
    let mut prov = Provenance::new(cmd.name(), cfg.hash(cmd.name()));
    if cfg.record_time {
        prov.runtime_seconds = Some(start.elapsed().as_secs_f64());
    }
    let text = match &outcome.body {
        Body::Csv(t) => write_csv(&prov, t)?,
        Body::Json { results, residuals } => write_json(&prov, results.clone(), residuals.clone()),
    };
    match &cfg.output_path {
        Some(p) => write_file(p, &text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    for (path, table) in &outcome.side_tables {
        write_file(path, &write_csv(&prov, table)?)?;
    }
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    Ok(outcome.exit)
}
