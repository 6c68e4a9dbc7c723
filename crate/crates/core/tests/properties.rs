//! Randomized algebraic invariants: series ring axioms, the Frobenius
//! substitution as a ring homomorphism, valuation additivity, and the
//! equivalence-relation laws of the coboundary oracle.

use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kisin_weights::algebra::{FqField, TruncatedSeries, UValuation};
use kisin_weights::combinat::JSet;
use kisin_weights::extension::{coboundary_equivalent, ExtensionData, ExtensionType};

/// The (field, truncation) configurations exercised below.
fn configs() -> Vec<(Arc<FqField>, usize)> {
    vec![
        (FqField::prime(3).unwrap(), 9),
        (FqField::prime(5).unwrap(), 10),
        (FqField::extension(3, &[1, 0, 1]).unwrap(), 6), // F_9
        (FqField::extension(5, &[2, 0, 1]).unwrap(), 5), // F_25
    ]
}

fn build(cfg: usize, raw: &[u64]) -> TruncatedSeries {
    let (field, trunc) = &configs()[cfg];
    let coeffs: Vec<_> = raw
        .iter()
        .map(|&v| {
            // decode v in base p into a coefficient vector
            let p = field.p() as u64;
            let mut digits = Vec::new();
            let mut x = v;
            for _ in 0..field.m() {
                digits.push((x % p) as i64);
                x /= p;
            }
            field.element(&digits).unwrap()
        })
        .collect();
    TruncatedSeries::new(field, *trunc, coeffs).unwrap()
}

type Raw = Vec<u64>;

fn pair_strategy() -> impl Strategy<Value = (usize, Raw, Raw)> {
    (0usize..4).prop_flat_map(|cfg| {
        let (field, trunc) = &configs()[cfg];
        let q = field.order();
        (
            Just(cfg),
            proptest::collection::vec(0..q, trunc + 1),
            proptest::collection::vec(0..q, trunc + 1),
        )
    })
}

fn triple_strategy() -> impl Strategy<Value = (usize, Raw, Raw, Raw)> {
    (0usize..4).prop_flat_map(|cfg| {
        let (field, trunc) = &configs()[cfg];
        let q = field.order();
        (
            Just(cfg),
            proptest::collection::vec(0..q, trunc + 1),
            proptest::collection::vec(0..q, trunc + 1),
            proptest::collection::vec(0..q, trunc + 1),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn series_ring_axioms((cfg, a, b, d) in triple_strategy()) {
        let sa = build(cfg, &a);
        let sb = build(cfg, &b);
        let sd = build(cfg, &d);
        // commutativity
        prop_assert_eq!(sa.mul(&sb).unwrap(), sb.mul(&sa).unwrap());
        // associativity
        prop_assert_eq!(
            sa.mul(&sb).unwrap().mul(&sd).unwrap(),
            sa.mul(&sb.mul(&sd).unwrap()).unwrap()
        );
        // distributivity
        prop_assert_eq!(
            sa.mul(&sb.add(&sd).unwrap()).unwrap(),
            sa.mul(&sb).unwrap().add(&sa.mul(&sd).unwrap()).unwrap()
        );
    }

    #[test]
    fn frobenius_is_a_ring_homomorphism((cfg, a, b) in pair_strategy()) {
        let sa = build(cfg, &a);
        let sb = build(cfg, &b);
        let p = sa.field().p() as usize;
        let n = sa.trunc();
        let safe = (n / p) * p;
        let lhs = sa.mul(&sb).unwrap().frobenius_substitute().truncate_to(safe).unwrap();
        let rhs = sa
            .frobenius_substitute()
            .mul(&sb.frobenius_substitute())
            .unwrap()
            .truncate_to(safe)
            .unwrap();
        prop_assert_eq!(lhs, rhs);
        let lhs = sa.add(&sb).unwrap().frobenius_substitute().truncate_to(safe).unwrap();
        let rhs = sa
            .frobenius_substitute()
            .add(&sb.frobenius_substitute())
            .unwrap()
            .truncate_to(safe)
            .unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn valuation_is_additive((cfg, a, b) in pair_strategy()) {
        let sa = build(cfg, &a);
        let sb = build(cfg, &b);
        let n = sa.trunc();
        if let (UValuation::Finite(va), UValuation::Finite(vb)) = (sa.u_valuation(), sb.u_valuation()) {
            if va + vb <= n {
                prop_assert_eq!(sa.mul(&sb).unwrap().u_valuation(), UValuation::Finite(va + vb));
            }
        }
    }

    #[test]
    fn series_json_round_trip((cfg, a, _b) in pair_strategy()) {
        let s = build(cfg, &a);
        prop_assert_eq!(TruncatedSeries::from_json(&s.to_json()).unwrap(), s);
    }
}

/// Seeded sample of extension data over a fixed type.
fn random_extension<R: Rng>(ty: &ExtensionType, trunc: usize, rng: &mut R) -> ExtensionData {
    let field = ty.field().clone();
    let x = (0..ty.f())
        .map(|_| {
            let coeffs: Vec<_> = (0..=trunc).map(|_| field.random(rng)).collect();
            TruncatedSeries::new(&field, trunc, coeffs).unwrap()
        })
        .collect();
    ExtensionData::new(ty.clone(), x).unwrap()
}

#[test]
fn oracle_is_an_equivalence_relation() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let f3 = FqField::prime(3).unwrap();
    let f5 = FqField::prime(5).unwrap();
    let types = vec![
        ExtensionType::new(
            3,
            1,
            vec![2],
            JSet::from_indices(1, &[0]).unwrap(),
            f3.from_int(1),
            f3.from_int(1),
        )
        .unwrap(),
        ExtensionType::new(
            3,
            2,
            vec![1, 3],
            JSet::from_indices(2, &[1]).unwrap(),
            f3.from_int(2),
            f3.from_int(1),
        )
        .unwrap(),
        ExtensionType::new(
            5,
            2,
            vec![4, 5],
            JSet::from_indices(2, &[0, 1]).unwrap(),
            f5.from_int(3),
            f5.from_int(3),
        )
        .unwrap(),
    ];
    for ty in &types {
        let n = (ty.p() * ty.p()) as usize;
        for _ in 0..60 {
            let e1 = random_extension(ty, n, &mut rng);
            let e2 = random_extension(ty, n, &mut rng);
            let e3 = random_extension(ty, n, &mut rng);
            // reflexive
            assert!(coboundary_equivalent(&e1, &e1).unwrap().is_some());
            // symmetric, with verified witnesses both ways
            let w12 = coboundary_equivalent(&e1, &e2).unwrap();
            let w21 = coboundary_equivalent(&e2, &e1).unwrap();
            assert_eq!(w12.is_some(), w21.is_some());
            if let Some(w) = &w12 {
                assert_eq!(e1.apply_basis_change(w).unwrap(), e2);
            }
            if let Some(w) = &w21 {
                assert_eq!(e2.apply_basis_change(w).unwrap(), e1);
            }
            // transitive
            let w23 = coboundary_equivalent(&e2, &e3).unwrap();
            if w12.is_some() && w23.is_some() {
                assert!(coboundary_equivalent(&e1, &e3).unwrap().is_some());
            }
        }
        // equivalent pairs exist by construction: perturb by a coboundary
        let e = random_extension(ty, n, &mut rng);
        let (red, _) = e.reduce_normal_form().unwrap();
        assert!(coboundary_equivalent(&e, &red).unwrap().is_some());
    }
}
