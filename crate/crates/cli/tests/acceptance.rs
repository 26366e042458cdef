//! End-to-end acceptance checks. Each test prints one PASS/FAIL line straight
//! to stderr (bypassing capture) and fails when its criterion fails.

use a4count_cli::ingest::ingest_lmfdb_csv;
use a4count_core::charsum::{average_residue, verify_charsum_identity};
use a4count_core::constants::{alpha, alpha_beta_assembled, leading_constant, verify_tamagawa_matches_cf};
use a4count_core::cubicfield::{enumerate_fields, fields_of_conductor, CyclicCubicField};
use a4count_core::idealcount::{count_squarefree_norm_ideals, Subgroup};
use a4count_core::lfunc::zeta_residue;
use a4count_core::qmult::{
    gamma_closed, gamma_definitional, ideals_up_to, l_gamma, l_gamma_direct, sqfree_coprime_indicator, DIVISOR_CAP,
};
use a4count_core::quartic::{aggregate_counts, count_quartics, CountMode, QuarticConfig};
use rayon::prelude::*;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

fn report(n: u32, name: &str, pass: bool, detail: String, start: Instant) {
    let line = format!(
        "acceptance {n} [{}] {name}: {detail} ({:.1}s)",
        if pass { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64()
    );
    let _ = writeln!(std::io::stderr(), "{line}");
    assert!(pass, "{line}");
}

fn field7() -> CyclicCubicField {
    CyclicCubicField::of_prime_conductor(7).unwrap()
}

#[test]
fn c1_gamma_ground_truth() {
    let t = Instant::now();
    let mut checked = 0usize;
    let mut bad = Vec::new();
    for f in [7u64, 9, 13, 91] {
        for field in fields_of_conductor(f).unwrap() {
            let ideals = ideals_up_to(&field, 10_000);
            for m in [1, field.discriminant(), 30] {
                let errs: Vec<String> = ideals
                    .par_iter()
                    .filter_map(|a| {
                        let s: i64 = a.divisors(DIVISOR_CAP).unwrap().iter().map(|b| gamma_closed(b, m)).sum();
                        let closed = gamma_closed(a, m);
                        let def = gamma_definitional(a, m, DIVISOR_CAP).unwrap();
                        (s != sqfree_coprime_indicator(a, m) || closed != def)
                            .then(|| format!("f = {f}, M = {m}, N = {}", a.norm()))
                    })
                    .collect();
                checked += ideals.len();
                bad.extend(errs);
            }
        }
    }
    let detail = format!("{checked} (ideal, M) pairs, {} mismatches {:?}", bad.len(), bad.iter().take(3).collect::<Vec<_>>());
    report(1, "gamma divisor sums and closed form", bad.is_empty(), detail, t);
}

#[test]
fn c2_class_number_formula() {
    let t = Instant::now();
    let fields = enumerate_fields(1e6, false, 1).unwrap();
    let rows: Vec<(u64, f64)> = fields
        .par_iter()
        .map(|field| {
            let cg = field.class_group().unwrap();
            let z = zeta_residue(field).unwrap();
            let via_units = 4.0 * cg.h as f64 * cg.regulator / field.conductor() as f64;
            (field.conductor(), (via_units - z.value.to_f64()).abs())
        })
        .collect();
    let (worst_f, worst) = rows.iter().fold((0, 0.0f64), |acc, &(f, r)| if r > acc.1 { (f, r) } else { acc });
    let detail = format!("{} fields with conductor ≤ 1000, worst |4hR/f − |L(1,χ)|²| = {worst:.2e} at f = {worst_f}", rows.len());
    report(2, "class number formula", worst <= 1e-6 && rows.len() >= 150, detail, t);
}

#[test]
fn c3_euler_product_vs_direct_series() {
    let t = Instant::now();
    let field = field7();
    let e = l_gamma(&field, 49, 10_000_000).unwrap();
    let d = l_gamma_direct(&field, 49, 100_000_000).unwrap();
    let diff = (e.value - d.value).abs();
    let tol = e.tail_bound + d.tail_bound;
    let detail = format!("product {:.12} (±{:.1e}), series {:.12} (±{:.1e}), diff {diff:.2e}", e.value, e.tail_bound, d.value, d.tail_bound);
    report(3, "L(γ) Euler product vs series to 1e8", diff <= tol, detail, t);
}

#[test]
fn c4_ideal_count_main_term() {
    let t = Instant::now();
    let r = count_squarefree_norm_ideals(&field7(), 7, Subgroup::Full, 10_000_000).unwrap();
    let ok_a = (r.ratio - 1.0).abs() <= 0.05;
    let even = enumerate_fields(1e8, false, 1)
        .unwrap()
        .into_iter()
        .find(|f| f.class_group().unwrap().h % 2 == 0)
        .unwrap();
    let f = even.conductor();
    let full = count_squarefree_norm_ideals(&even, f, Subgroup::Full, 1_000_000).unwrap();
    let sq = count_squarefree_norm_ideals(&even, f, Subgroup::Squares, 1_000_000).unwrap();
    let observed = sq.exact_count as f64 / full.exact_count as f64;
    let ok_b = (observed / sq.density - 1.0).abs() <= 0.10;
    let detail = format!(
        "F7 Cl: {} vs {:.1} (ratio {:.4}); f = {f} 2Cl/Cl = {observed:.4} vs #H/#Cl = {}",
        r.exact_count, r.main_term, r.ratio, sq.density
    );
    report(4, "ideal counts in Cl and 2Cl", ok_a && ok_b, detail, t);
}

const FIXTURE: &str = "tests/fixtures/a4_quartics_resolvent_7.csv";

#[test]
fn c5_quartic_count_fixed_resolvent() {
    let t = Instant::now();
    let field = field7();
    let x = 10_000_000u64;
    let cfg = QuarticConfig::default();
    let exact = count_quartics(&field, x, CountMode::Exact, &cfg).unwrap();
    let lower = count_quartics(&field, x, CountMode::LowerBound, &cfg).unwrap();
    let ok_a = lower.count <= exact.count;
    let ok_b = (0.8..=1.25).contains(&exact.ratio);
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join(FIXTURE);
    let (ok_c, c_text) = if path.exists() {
        let rows = ingest_lmfdb_csv(&path).unwrap();
        let n = rows.iter().filter(|r| r.resolvent_conductor == 7 && r.disc_l <= x as u128).count() as u64;
        (n == exact.count, format!("fixture {n}"))
    } else {
        (true, "fixture absent, (c) skipped".to_string())
    };
    let detail = format!(
        "(a) lower {} ≤ exact {}: {ok_a}; (b) exact/main = {}/{:.2} = {:.3} in [0.8, 1.25]: {ok_b}; (c) {c_text}",
        lower.count, exact.count, exact.count, exact.main_term, exact.ratio
    );
    report(5, "A4 quartics with resolvent of conductor 7", ok_a && ok_b && ok_c, detail, t);
}

#[test]
fn c6_average_residue() {
    let t = Instant::now();
    let x = 1e8;
    let all = average_residue(x, 1).unwrap();
    let d7 = average_residue(x, 7).unwrap();
    // the stated main terms, recomputed here from their factors
    let main = leading_constant() * alpha(1_000_000).value * x.sqrt();
    let main7 = main * a4count_core::constants::beta_d_f64(7).unwrap() * 2.0 / 7.0;
    let r1 = all.sum_residues / main;
    let r7 = d7.sum_residues / main7;
    let ok = (0.9..=1.1).contains(&r1) && (0.85..=1.15).contains(&r7);
    let detail = format!(
        "{} fields: Σζ* = {:.3}, ratio {r1:.4}; d = 7: {} fields, ratio {r7:.4} (against half the main term: {:.4}, {:.4})",
        all.fields,
        all.sum_residues,
        d7.fields,
        2.0 * r1,
        2.0 * r7
    );
    report(6, "average zeta residue at 1e8", ok, detail, t);
}

#[test]
fn c7_charsum_identity() {
    let t = Instant::now();
    let x = 1e6f64;
    let r = verify_charsum_identity(x, 1).unwrap();
    let diff = (r.lhs - r.rhs).abs();
    let bound = 10.0 * x.powf(0.25) * x.ln().powi(2);
    let detail = format!("Σζ* = {:.4}, ½S_1(X^1/2) = {:.4}, |diff| = {diff:.3} ≤ {bound:.1}", r.lhs, r.rhs);
    report(7, "residue sum vs half character sum at 1e6", diff <= bound, detail, t);
}

#[test]
fn c8_constants_consistency() {
    let t = Instant::now();
    let p = 1_000_000;
    let closed = alpha(p).value;
    let assembled = alpha_beta_assembled(1, p).unwrap().value;
    let rel = (closed - assembled).abs() / closed;
    let mut worst = 0.0f64;
    let mut all_exact = true;
    for f in [7u64, 9, 13, 91] {
        for field in fields_of_conductor(f).unwrap() {
            let r = verify_tamagawa_matches_cf(&field, 100_000).unwrap();
            worst = worst.max(r.residual);
            all_exact &= r.exact;
        }
    }
    let ok = rel <= 1e-9 && worst <= 1e-12 && all_exact;
    let detail = format!(
        "α closed {closed:.10} vs assembled {assembled:.10}, rel {rel:.2e} (≤ 1e-9); Tamagawa residual {worst:.1e}, exact {all_exact}"
    );
    report(8, "α routes and Tamagawa identity", ok, detail, t);
}

#[test]
fn c9_aggregate_trend() {
    let t = Instant::now();
    let a6 = aggregate_counts(1_000_000).unwrap();
    let a7 = aggregate_counts(10_000_000).unwrap();
    let ok = a7.statistic >= 0.8 * a6.statistic;
    let detail = format!(
        "1e6: {} fields, total {}, stat {:.3e}; 1e7: fields {:?}, total {}, stat {:.3e}",
        a6.fields.len(),
        a6.total,
        a6.statistic,
        a7.fields,
        a7.total,
        a7.statistic
    );
    report(9, "aggregate count trend", ok, detail, t);
}
