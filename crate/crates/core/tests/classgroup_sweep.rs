use a4count_core::arith::exact_sqrt;
use a4count_core::classgroup::{compute_class_group, factor_principal, ClassGroupConfig};
use a4count_core::cubicfield::{enumerate_fields, to_big, CyclicCubicField};
use a4count_core::qmult::FactoredIdeal;
use num_bigint::BigInt;
use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[test]
fn certificate_and_two_rank_up_to_conductor_1000() {
    let fields = enumerate_fields(1e6, false, 1).unwrap();
    let rows: Vec<(u64, u64, Vec<u64>, f64, f64)> = fields
        .par_iter()
        .map(|field| {
            let cg = field.class_group().unwrap_or_else(|e| panic!("f = {}: {e}", field.conductor()));
            (field.conductor(), cg.h, cg.elementary_divisors.clone(), cg.regulator, cg.certificate_residual)
        })
        .collect();
    let mut worst = 0.0f64;
    for (f, h, d, reg, res) in &rows {
        worst = worst.max(*res);
        assert!(*res <= 1e-6, "f = {f}: residual {res:e}");
        assert!(*reg > 0.0);
        assert_eq!(d.iter().product::<u64>(), *h);
        let two: u64 = d.iter().map(|x| if x % 2 == 0 { 2 } else { 1 }).product();
        assert!(exact_sqrt(&BigInt::from(two)).is_some(), "f = {f}: #Cl[2] = {two}");
    }
    let first_even = rows.iter().find(|r| r.1 % 2 == 0).map(|r| (r.0, r.2.clone()));
    println!("{} fields, worst residual {worst:.2e}, first even class number {first_even:?}", rows.len());
}

#[test]
fn class_map_is_a_homomorphism_and_kills_principal_ideals() {
    let fields: Vec<CyclicCubicField> =
        enumerate_fields(1e6, false, 1).unwrap().into_iter().filter(|f| f.class_group().unwrap().h > 1).take(4).collect();
    for field in fields {
        let cg = field.class_group().unwrap();
        let nf = cg.order().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(field.conductor());
        let mut pairs = 0;
        while pairs < 100 {
            let x: [i64; 3] = std::array::from_fn(|_| rng.gen_range(-30..=30));
            let y: [i64; 3] = std::array::from_fn(|_| rng.gen_range(-30..=30));
            let (Ok(a), Ok(b)) = (factor_principal(&nf, &to_big(&x)), factor_principal(&nf, &to_big(&y))) else {
                continue;
            };
            // split the principal ideals into non-principal halves
            let fa = a.factors();
            let (a1, a2) = fa.split_at(fa.len() / 2);
            let a1 = FactoredIdeal::new(a1.to_vec());
            let a2 = FactoredIdeal::new(a2.to_vec());
            let c1 = cg.class_of(&a1).unwrap();
            let c2 = cg.class_of(&a2).unwrap();
            assert_eq!(cg.add_classes(&c1, &c2), cg.zero_class());
            let ab = a1.mul(&b);
            assert_eq!(cg.class_of(&ab).unwrap(), cg.add_classes(&c1, &cg.class_of(&b).unwrap()));
            pairs += 1;
        }
    }
}

#[test]
fn regulator_is_seed_independent() {
    let field = CyclicCubicField::of_prime_conductor(163).unwrap();
    let a = field.class_group().unwrap();
    let cfg = ClassGroupConfig { seed: 12345, ..Default::default() };
    let b = compute_class_group(&field, &cfg).unwrap();
    assert!((a.regulator - b.regulator).abs() < 1e-9);
    assert_eq!(a.elementary_divisors, b.elementary_divisors);
    for u in a.units.iter().chain(b.units.iter()) {
        assert!(a.order().norm_big(u).abs().is_one());
    }
}
