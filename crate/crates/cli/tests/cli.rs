use a4count_cli::config::{parse_count, RunConfig};
use a4count_cli::ingest::parse_lmfdb_csv;
use a4count_cli::report::{num, parse_csv, write_csv, Provenance, Table};
use a4count_core::idealcount::Subgroup;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_a4count"));
    c.env_remove("QC_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn run_threads(threads: &str, args: &[&str]) -> Output {
    bin().env("QC_THREADS", threads).args(args).output().unwrap()
}

#[test]
fn config_file_parses_and_validates() {
    let mut cfg = RunConfig::default();
    cfg.parse_str(
        "# sweep\nrun.x = 1e7\nrun.conductor = 7\n\nideal.subgroup = 2cl\nlfunc.truncation = 1000000\noutput.record_time = false\n",
        "run.cfg",
    )
    .unwrap();
    assert_eq!(cfg.x, Some(1e7));
    assert_eq!(cfg.conductor, Some(7));
    assert_eq!(cfg.subgroup, Subgroup::Squares);
    assert_eq!(cfg.lfunc_truncation, Some(1_000_000));
    assert!(!cfg.record_time);
    assert_eq!(cfg.origin("run.x"), Some("run.cfg:2"));
}

#[test]
fn config_errors_name_the_line() {
    let cases = [
        ("run.x = 1e6\nrun.x = 2e6\n", "cfg:2", "duplicate key"),
        ("run.x = 1e6\n\nbogus.key = 3\n", "cfg:3", "unknown key"),
        ("run.conductor = -7\n", "cfg:1", "run.conductor"),
        ("run.x = 0\n", "cfg:1", "positive"),
        ("run.d = 14\n", "cfg:1", "squarefree"),
        ("just some words\n", "cfg:1", "key = value"),
        ("quartic.mode = maybe\n", "cfg:1", "quartic.mode"),
    ];
    for (text, origin, needle) in cases {
        let e = RunConfig::default().parse_str(text, "cfg").unwrap_err();
        assert_eq!(e.origin, origin, "{text:?}");
        assert!(e.message.contains(needle), "{text:?}: {}", e.message);
    }
}

#[test]
fn count_values_accept_float_notation() {
    assert_eq!(parse_count("1e7"), Ok(10_000_000));
    assert_eq!(parse_count("153664"), Ok(153_664));
    assert!(parse_count("1.5").is_err());
    assert!(parse_count("-3").is_err());
}

#[test]
fn flags_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "run.x = 1e4\nrun.d = 7\noutput.record_time = false\n").unwrap();
    let from_file = run(&["avg-residue", "--config", cfg.to_str().unwrap()]);
    let overridden = run(&["avg-residue", "--config", cfg.to_str().unwrap(), "--x", "1e5"]);
    assert!(from_file.status.success() && overridden.status.success());
    let a = parse_csv(&String::from_utf8(from_file.stdout).unwrap()).unwrap().1;
    let b = parse_csv(&String::from_utf8(overridden.stdout).unwrap()).unwrap().1;
    assert_eq!(a.rows[0][0], "10000");
    assert_eq!(b.rows[0][0], "100000");
}

#[test]
fn config_error_exit_code_and_message() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "run.x = 1e4\nrun.threads = zero\n").unwrap();
    let o = run(&["avg-residue", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("bad.cfg:2"), "{err}");
    assert_eq!(run(&["count-quartics", "--x", "1e6"]).status.code(), Some(1));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
}

#[test]
fn resource_and_check_exit_codes() {
    assert_eq!(run(&["charsum", "--x", "1e6", "--no-time"]).status.code(), Some(3));
    // below 64·Δ^2 the count is refused as invalid input
    assert_eq!(run(&["count-quartics", "--conductor", "7", "--x", "1e5"]).status.code(), Some(1));
}

#[test]
fn ingest_accepts_and_sorts() {
    let rows =
        parse_lmfdb_csv("label,disc,resolvent_conductor\n4.4.3136.1,3136,7\n4.4.26569.1,26569,163\n4.4.3969.1,3969,63\n")
            .unwrap();
    assert_eq!(rows.len(), 3);
    let discs: Vec<u128> = rows.iter().map(|r| r.disc_l).collect();
    assert_eq!(discs, vec![3136, 3969, 26569]);
    assert_eq!(rows[0].label, "4.4.3136.1");
}

#[test]
fn ingest_rejections_carry_line_numbers() {
    let h = "label,disc,resolvent_conductor\n";
    let cases = [
        (format!("{h}a,3136,7\nb,0,7\n"), 3, "positive"),
        (format!("{h}a,3136,7\nb,-49,7\n"), 3, "positive"),
        (format!("{h}a,3136,7\na,3969,7\n"), 3, "duplicate label"),
        (format!("{h}a,3136,8\n"), 2, "conductor"),
        (format!("{h}a,31x6,7\n"), 2, "not an integer"),
        (format!("{h}a,3136\n"), 2, "malformed"),
        ("name,disc,conductor\na,1,7\n".to_string(), 1, "header"),
    ];
    for (text, line, needle) in cases {
        let e = parse_lmfdb_csv(&text).unwrap_err();
        assert_eq!(e.line, Some(line), "{text:?}: {e}");
        assert!(e.message.contains(needle), "{text:?}: {e}");
    }
    assert!(parse_lmfdb_csv("").unwrap().is_empty());
    assert!(parse_lmfdb_csv("label,disc,resolvent_conductor\n").unwrap().is_empty());
}

#[test]
fn csv_round_trips() {
    let prov = Provenance {
        version: "0.1.0".into(),
        command: "zeta-residues".into(),
        config_hash: "ab".repeat(32),
        runtime_seconds: Some(0.125),
    };
    let mut t = Table::new(&["conductor", "value", "note"]);
    t.push(vec!["7".into(), num(0.1 + 0.2), "a,b \"q\"".into()]);
    t.push(vec!["9".into(), num(1.1102230246251565e-16), String::new()]);
    t.push(vec!["13".into(), num(6.02e23), "#x".into()]);
    let text = write_csv(&prov, &t).unwrap();
    let (p2, t2) = parse_csv(&text).unwrap();
    assert_eq!(p2, prov);
    assert_eq!(t2, t);
    let v: f64 = t2.rows[1][1].parse().unwrap();
    assert_eq!(v, 1.1102230246251565e-16);
    assert_eq!(write_csv(&p2, &t2).unwrap(), text);
}

#[test]
fn emitted_csv_round_trips() {
    for args in [
        vec!["enumerate-cubics", "--x", "1e5", "--include-ramified-3"],
        vec!["zeta-residues", "--x", "2e4"],
        vec!["class-groups", "--x", "1e5"],
        vec!["avg-residue", "--x", "1e6", "--d", "7"],
    ] {
        let o = run(&args);
        assert!(o.status.success(), "{args:?}");
        let text = String::from_utf8(o.stdout).unwrap();
        let (prov, table) = parse_csv(&text).unwrap();
        assert_eq!(prov.command, args[0]);
        assert!(prov.runtime_seconds.is_some());
        assert!(!table.rows.is_empty());
        assert_eq!(write_csv(&prov, &table).unwrap(), text, "{args:?}");
    }
}

#[test]
fn enumerate_cubics_columns() {
    let o = run(&["enumerate-cubics", "--x", "1e4", "--include-ramified-3", "--no-time"]);
    let (_, t) = parse_csv(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(t.header, ["conductor", "discriminant", "defining_cubic_coeffs", "num_fields_at_conductor"]);
    let first: Vec<&str> = t.rows[0].iter().map(String::as_str).collect();
    assert_eq!(first, ["7", "49", "1 1 -2 -1", "1"]);
    assert!(t.rows.iter().any(|r| r[0] == "9"));
    let c = t.rows.iter().filter(|r| r[0] == "63").count();
    assert_eq!(c, 2);
    assert!(t.rows.iter().filter(|r| r[0] == "63").all(|r| r[3] == "2"));
}

/// Same config, different thread counts: identical bytes.
#[test]
fn output_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let jobs: Vec<Vec<String>> = vec![
        vec!["zeta-residues", "--x", "1e5"],
        vec!["avg-residue", "--x", "1e6"],
        vec!["charsum", "--x", "2000", "--d", "7"],
        vec!["count-quartics", "--conductor", "7", "--x", "1e6", "--no-precondition"],
        vec!["count-ideals", "--conductor", "163", "--m", "163", "--x", "1e5", "--subgroup", "2cl"],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .collect();
    for (i, job) in jobs.iter().enumerate() {
        let mut outs = Vec::new();
        for t in ["1", "4"] {
            let w = dir.path().join(format!("w{i}_{t}.csv"));
            let mut args: Vec<&str> = job.iter().map(String::as_str).collect();
            args.push("--no-time");
            let wstr = w.to_str().unwrap().to_string();
            if job[0] == "count-quartics" {
                args.extend(["--witnesses", &wstr]);
            }
            let o = run_threads(t, &args);
            assert!(o.status.success(), "{job:?}: {}", String::from_utf8_lossy(&o.stderr));
            let side = if w.exists() { std::fs::read(&w).unwrap() } else { Vec::new() };
            outs.push((o.stdout, side));
        }
        assert_eq!(outs[0], outs[1], "{job:?}");
    }
}

#[test]
fn config_hash_ignores_threads_and_output() {
    let mut a = RunConfig::default();
    a.parse_str("run.x = 1e6\nrun.threads = 2\noutput.path = a.csv\n", "a").unwrap();
    let mut b = RunConfig::default();
    b.parse_str("run.x = 1000000\nrun.threads = 8\n", "b").unwrap();
    assert_eq!(a.hash("avg-residue"), b.hash("avg-residue"));
    assert_ne!(a.hash("avg-residue"), a.hash("zeta-residues"));
    b.parse_str("run.d = 7\n", "b").unwrap();
    assert_ne!(a.hash("avg-residue"), b.hash("avg-residue"));
}

fn fixture(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn empty_fixture_warns_and_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    for body in ["", "label,disc,resolvent_conductor\n"] {
        let f = fixture(dir.path(), "empty.csv", body);
        let o = run(&["validate-fixture", "--conductor", "7", "--x", "1e6", "--fixture", &f, "--no-time"]);
        assert_eq!(o.status.code(), Some(0));
        assert!(String::from_utf8(o.stderr).unwrap().contains("warning"));
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["results"]["fixture_count"], 0);
    }
}

/// Fixtures written from the internal witness list match; dropping one row
/// is reported with exit code 2 and the missing discriminant.
#[test]
fn fixture_match_and_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("w.csv");
    let o = run(&["count-quartics", "--conductor", "7", "--x", "1e6", "--witnesses", w.to_str().unwrap()]);
    assert!(o.status.success());
    let (_, t) = parse_csv(&std::fs::read_to_string(&w).unwrap()).unwrap();
    let (di, fi) = (t.column("disc_L").unwrap(), t.column("fiber_id").unwrap());
    let mut discs: Vec<(String, String)> = t.rows.iter().map(|r| (r[fi].clone(), r[di].clone())).collect();
    discs.sort();
    discs.dedup();
    let body: String = std::iter::once("label,disc,resolvent_conductor\n".to_string())
        .chain(discs.iter().map(|(id, d)| format!("q{id},{d},7\n")))
        .collect();
    let full = fixture(dir.path(), "full.csv", &body);
    let o = run(&["validate-fixture", "--conductor", "7", "--x", "1e6", "--fixture", &full]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["results"]["internal_count"], 14);
    assert_eq!(v["results"]["matches"], true);

    let short: String = body.lines().take(body.lines().count() - 1).map(|l| format!("{l}\n")).collect();
    let short = fixture(dir.path(), "short.csv", &short);
    let o = run(&["validate-fixture", "--conductor", "7", "--x", "1e6", "--fixture", &short]);
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["results"]["matches"], false);
    assert_eq!(v["results"]["discs_only_internal"].as_array().unwrap().len(), 1);
}

#[test]
fn json_reports_carry_provenance() {
    let o = run(&["constants", "--which", "beta", "--d", "91"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for k in ["command", "config_hash", "results", "residuals", "runtime_seconds"] {
        assert!(v.get(k).is_some(), "{k}");
    }
    assert_eq!(v["command"], "constants");
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
    assert!(v["runtime_seconds"].as_f64().unwrap() >= 0.0);
    assert!(v["results"]["beta"]["exact"].as_str().unwrap().contains('/'));
}
