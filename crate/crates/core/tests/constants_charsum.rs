use a4count_core::charsum::*;
use a4count_core::constants::*;
use a4count_core::cubicfield::{fields_of_conductor, CyclicCubicField};
use a4count_core::qmult::{local_factor_series, prime_square_tail};
use num_traits::ToPrimitive;

#[test]
fn truncation_pairs_agree_within_tail() {
    let a6 = alpha(1_000_000);
    let a7 = alpha(10_000_000);
    assert!((a6.value - a7.value).abs() <= a6.tail_bound);
    for f in [7u64, 9, 163] {
        let field = &fields_of_conductor(f).unwrap()[0];
        let c5 = c_f(field, 100_000).unwrap();
        let c6 = c_f(field, 1_000_000).unwrap();
        assert!((c5.value - c6.value).abs() <= c5.tail_bound);
        assert!(c6.tail_bound <= c5.tail_bound);
    }
    let b5 = alpha_beta_assembled(1, 100_000).unwrap();
    let b6 = alpha_beta_assembled(1, 1_000_000).unwrap();
    assert!((b5.value - b6.value).abs() <= b5.tail_bound);
}

/// The per-factor constants behind the tail bounds.
#[test]
fn stated_tail_constants_hold() {
    let field = CyclicCubicField::of_prime_conductor(7).unwrap();
    for p in a4count_core::arith::primes_up_to(200_000) {
        let x2 = 1.0 / (p as f64 * p as f64);
        if p >= 17 {
            let v = c_f_local(&field, p).to_f64().unwrap();
            assert!(v.ln().abs() <= 7.0 * x2, "c_F at {p}");
        }
        if p >= 7 {
            let a = alpha(p).value / alpha(p - 1).value;
            assert!(a.ln().abs() <= 3.0 * x2 * 1.0001, "alpha at {p}");
        }
        if p > 5000 {
            break;
        }
    }
    // the tail sum bound itself
    let direct: f64 = a4count_core::arith::primes_up_to(10_000_000).iter().filter(|&&p| p > 1000).map(|&p| 1.0 / (p as f64).powi(2)).sum();
    assert!(direct <= prime_square_tail(1000));
}

#[test]
fn c_f_factors_match_the_gamma_series() {
    for f in [7u64, 9, 13] {
        let field = &fields_of_conductor(f).unwrap()[0];
        for p in a4count_core::arith::primes_up_to(100) {
            assert_eq!(c_f_local(field, p), local_factor_series(field, p, field.discriminant()), "f = {f}, p = {p}");
        }
    }
}

#[test]
fn beta_is_multiplicative_and_in_unit_interval() {
    let b7 = beta_d(7).unwrap();
    let b13 = beta_d(13).unwrap();
    assert_eq!(beta_d(91).unwrap(), &b7 * &b13);
    for p in [7u64, 13, 19, 31, 37, 43, 1009] {
        let v = beta_d_f64(p).unwrap();
        assert!(v > 0.0 && v < 1.0, "β_{p} = {v}");
    }
}

#[test]
fn tamagawa_identity() {
    for f in [7u64, 9, 13, 63, 163] {
        for field in fields_of_conductor(f).unwrap() {
            let r = verify_tamagawa_matches_cf(&field, 100_000).unwrap();
            assert!(r.exact, "f = {f}");
            assert!(r.residual <= 1e-12);
            assert_eq!(r.unchecked_places, vec!["2".to_string(), "infinity".to_string()]);
        }
    }
}

#[test]
fn s_d_prediction_and_restrictions() {
    let r = s_d_split(1, 1e4, 2.0).unwrap();
    let ratio = r.s_d / r.predicted;
    assert!((ratio - 1.0).abs() <= 0.2, "ratio {ratio}");
    assert!(r.imag.abs() <= 1e-9 * r.s_d);
    // pinned from the first run
    assert!((r.s_d - 5272.478217193).abs() < 1e-6);
    // d = 7 restricts to 7 | N(I): compare with the literal double sum
    let fast = s_d(7, 300.0).unwrap();
    let (re, im) = s_d_double_sum(7, 300.0).unwrap();
    assert!((fast - re).abs() <= 1e-10 * re.abs());
    assert!(im.abs() < 1e-9);
}

#[test]
fn split_parts_resum_and_shrink() {
    let mut last = f64::INFINITY;
    for a in [1.0, 2.0, 3.0] {
        let r = s_d_split(1, 1e4, a).unwrap();
        let total: f64 = r.split_parts.values().sum();
        assert!((total - r.s_d).abs() <= 1e-12 * r.s_d.abs());
        let both = r.split_parts["{1,2}"].abs();
        assert!(both <= last);
        last = both;
    }
    // log(10^4)^3 > 100 = X^{1/2}: every n is small
    let r = s_d_split(1, 1e4, 3.0).unwrap();
    assert_eq!(r.split_parts["{}"], r.s_d);
}

#[test]
fn empty_part_main_term() {
    let r = s_d_split(1, 1e5, 2.0).unwrap();
    let pred = s_empty_predicted(1, 1e5, 2.0).unwrap();
    let ratio = r.split_parts["{}"] / pred;
    assert!((ratio - 1.0).abs() <= 0.1, "ratio {ratio}");
}

#[test]
fn cube_pair_parametrization() {
    assert_eq!(cube_pairs(10_000), cube_pairs_direct(10_000));
}

#[test]
fn charsum_identity_small_cases() {
    let r = verify_charsum_identity(1e6, 1).unwrap();
    assert!(r.difference <= r.bound);
    // at matched inner length the two sides differ only by the trivial ideal
    let h: f64 = (1..=1000).map(|n| 1.0 / n as f64).sum();
    assert!((r.rhs_matched - r.lhs_truncated - 0.5 * h * h).abs() < 1e-8 * r.rhs_matched);
    let empty = verify_charsum_identity(40.0, 1).unwrap();
    assert_eq!(empty.fields, 0);
    assert_eq!(empty.lhs, 0.0);
    let r7 = verify_charsum_identity(1e6, 7).unwrap();
    assert!(r7.fields > 0 && r7.fields < r.fields);
    let r7_matched_gap = r7.rhs_matched - r7.lhs_truncated;
    assert!(r7_matched_gap.abs() < 1e-8 * r7.rhs_matched);
}

#[test]
fn eta_examples() {
    use num_rational::BigRational;
    use num_traits::One;
    assert!(eta(1).unwrap().is_one());
    assert_eq!(eta(7).unwrap(), BigRational::new(7.into(), 9.into()));
    assert_eq!(eta(49).unwrap(), eta(7).unwrap());
    assert_eq!(eta(91).unwrap(), BigRational::new(91.into(), 135.into()));
}
