use a4count_core::cubicfield::CyclicCubicField;
use a4count_core::idealcount::{
    class_histogram, count_all, count_by_character_twist, count_squarefree_norm_ideals, enumerate_squarefree_norm_ideals,
    Subgroup,
};
use a4count_core::qmult::{ideals_up_to, sqfree_coprime_indicator};
use std::collections::HashSet;
use std::time::Instant;

/// Filter of all ideals of norm ≤ x, built from factored norms.
fn brute_force(field: &CyclicCubicField, m: u64, subgroup: Subgroup, x: u64) -> u64 {
    let cg = field.class_group().unwrap();
    ideals_up_to(field, x)
        .into_iter()
        .filter(|a| sqfree_coprime_indicator(a, m) == 1)
        .filter(|a| subgroup.contains(&cg, &cg.class_of(a).unwrap()))
        .count() as u64
}

#[test]
fn dfs_matches_brute_force() {
    for f in [7u64, 13, 163] {
        let field = CyclicCubicField::of_prime_conductor(f).unwrap();
        for m in [1u64, f, 30, f * f] {
            for sg in [Subgroup::Full, Subgroup::Squares, Subgroup::Trivial] {
                let x = 10_000;
                let dfs = count_squarefree_norm_ideals(&field, m, sg, x).unwrap().exact_count;
                assert_eq!(dfs, brute_force(&field, m, sg, x), "f = {f}, M = {m}, H = {sg}");
            }
        }
    }
}

#[test]
fn enumeration_audit_and_monotonicity() {
    let field = CyclicCubicField::of_prime_conductor(7).unwrap();
    let all = enumerate_squarefree_norm_ideals(&field, 7, 200_000).unwrap();
    let set: HashSet<_> = all.iter().collect();
    assert_eq!(set.len(), all.len(), "an ideal was produced twice");
    assert_eq!(all.len() as u64, count_all(&field, 7, 200_000).unwrap());
    let mut last = 0;
    for x in [1u64, 10, 100, 1000, 10_000, 100_000] {
        let c = count_all(&field, 7, x).unwrap();
        assert!(c >= last);
        last = c;
    }
}

#[test]
fn character_orthogonality_recovers_subgroup_counts() {
    let field = CyclicCubicField::of_prime_conductor(163).unwrap();
    let cg = field.class_group().unwrap();
    let x = 100_000;
    let hist = class_histogram(&field, 163, x).unwrap();
    let trivial = count_by_character_twist(&field, 163, &cg.zero_class(), x).unwrap();
    assert_eq!(trivial.0.round() as u64, hist.total());
    assert!(trivial.1.abs() < 1e-6);
    for sg in [Subgroup::Full, Subgroup::Squares, Subgroup::Trivial] {
        let chars = sg.annihilator(&cg);
        let mut re = 0.0;
        for chi in &chars {
            re += count_by_character_twist(&field, 163, chi, x).unwrap().0;
        }
        let assembled = re * sg.order(&cg) as f64 / cg.h as f64;
        let direct = count_squarefree_norm_ideals(&field, 163, sg, x).unwrap().exact_count;
        assert!((assembled - direct as f64).abs() < 1e-6, "{sg}: {assembled} vs {direct}");
        assert_eq!(assembled.round() as u64, direct);
    }
}

#[test]
fn ratio_approaches_one() {
    let field = CyclicCubicField::of_prime_conductor(7).unwrap();
    let mut last = f64::INFINITY;
    for x in [100_000u64, 1_000_000, 10_000_000] {
        let t = Instant::now();
        let r = count_squarefree_norm_ideals(&field, 7, Subgroup::Full, x).unwrap();
        let dev = (r.ratio - 1.0).abs();
        println!("X = {x}: count {}, main {:.1}, ratio {:.5} ({:.2?})", r.exact_count, r.main_term, r.ratio, t.elapsed());
        assert!(dev <= last, "|ratio − 1| increased at X = {x}");
        last = dev;
    }
}

#[test]
fn subgroup_proportion_on_even_class_number_field() {
    let field = CyclicCubicField::of_prime_conductor(163).unwrap();
    let t = Instant::now();
    let full = count_squarefree_norm_ideals(&field, 163, Subgroup::Full, 1_000_000).unwrap();
    let sq = count_squarefree_norm_ideals(&field, 163, Subgroup::Squares, 1_000_000).unwrap();
    let prop = sq.exact_count as f64 / full.exact_count as f64;
    println!("f = 163: full {} (ratio {:.4}), 2Cl {} (ratio {:.4}), proportion {prop:.4} ({:.2?})",
        full.exact_count, full.ratio, sq.exact_count, sq.ratio, t.elapsed());
    assert!((prop / sq.density - 1.0).abs() < 0.1);
}
