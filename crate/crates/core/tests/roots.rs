mod common;

use std::collections::BTreeSet;

use common::{field, r};
use isolab::roots::{enumerate_cocharacters, GroupType, RootDatumWithCochar};
use isolab::{Error, Mat, PadicScalar, SlopeMultiset};
use num_rational::Rational64;
use proptest::prelude::*;

fn datum(group: GroupType, nu: &[(i64, i64)]) -> RootDatumWithCochar {
    RootDatumWithCochar::new(group, nu.len(), nu.iter().map(|&(a, b)| r(a, b)).collect()).unwrap()
}

fn ints(v: &[i64]) -> Vec<(i64, i64)> {
    v.iter().map(|&x| (x, 1)).collect()
}

/// Slopes of Lie U_ν in GL(n) straight from coordinate differences.
fn gl_slopes_oracle(nu: &[Rational64]) -> SlopeMultiset {
    let mut pairs = Vec::new();
    for i in 0..nu.len() {
        for j in i + 1..nu.len() {
            if nu[i] > nu[j] {
                pairs.push((nu[j] - nu[i], 1));
            }
        }
    }
    SlopeMultiset::from_pairs(pairs)
}

#[test]
fn slope_examples() {
    let d = datum(GroupType::GL, &[(0, 1), (-1, 2), (-1, 1)]);
    assert_eq!(d.slope_multiset(), SlopeMultiset::from_pairs([(r(-1, 1), 1), (r(-1, 2), 2)]));
    assert!(datum(GroupType::GL, &ints(&[-1, -1, -1])).slope_multiset().is_empty());
    let gl2 = datum(GroupType::GL, &ints(&[0, -1]));
    assert_eq!(gl2.slope_multiset(), SlopeMultiset::from_pairs([(r(-1, 1), 1)]));
}

#[test]
fn leaf_dimension_examples() {
    assert_eq!(datum(GroupType::GL, &ints(&[0, -1])).leaf_dimension(), r(1, 1));
    let ordinary = datum(GroupType::GSp, &ints(&[0, 0, -1, -1]));
    assert_eq!(ordinary.positive_roots().len(), 4);
    assert_eq!(ordinary.leaf_dimension(), r(3, 1));
    assert!(ordinary.dimension_identity().unwrap().in_pdiv_range);
    assert_eq!(datum(GroupType::GSp, &ints(&[-1, -1, -1, -1])).leaf_dimension(), r(0, 1));
}

#[test]
fn two_rho_is_sum_of_positive_roots() {
    let d = datum(GroupType::GSp, &ints(&[0, 0, -1, -1]));
    assert_eq!(d.two_rho(), &[3, 0, -2, -1]);
    // ⟨2ρ, ν⟩ only depends on ν through the torus
    assert_eq!(d.leaf_dimension(), r(3, 1));
    let d = datum(GroupType::SO, &ints(&[0, 0, 0, 0, 0]));
    assert_eq!(d.two_rho(), &[3, 0, -2, -1, 0]);
}

#[test]
fn nilpotency_examples() {
    assert_eq!(datum(GroupType::GL, &ints(&[0, -1, -2, -3])).unipotent_nilpotency().unwrap(), 3);
    assert_eq!(datum(GroupType::GL, &ints(&[0, 0, -1, -1])).unipotent_nilpotency().unwrap(), 1);
    assert_eq!(datum(GroupType::GL, &ints(&[3, -5])).unipotent_nilpotency().unwrap(), 1);
    assert_eq!(datum(GroupType::GL, &ints(&[0, 0])).unipotent_nilpotency().unwrap(), 0);
    // regular ν: class is the height of the highest root, h - 1
    assert_eq!(datum(GroupType::GSp, &ints(&[0, -1, -2, -3])).unipotent_nilpotency().unwrap(), 3);
    assert_eq!(datum(GroupType::SO, &ints(&[0, -1, -2, -3, -4])).unipotent_nilpotency().unwrap(), 3);
    assert_eq!(datum(GroupType::SO, &ints(&[0, -1, -2, -4, -5, -6])).unipotent_nilpotency().unwrap(), 3);
}

#[test]
fn coxeter_gate_examples() {
    let gl4 = datum(GroupType::GL, &ints(&[0, -1, -2, -3]));
    let gate = gl4.coxeter_gate(5).unwrap();
    assert_eq!((gate.h, gate.n_class), (4, 3));
    for d in enumerate_cocharacters(GroupType::GSp, 4, &[0, -1, -2]) {
        let gate = d.coxeter_gate(5).unwrap();
        assert_eq!(gate.h, 4);
        assert!(gate.p_ge_h && gate.p_gt_n, "{:?}", d.nu());
    }
    let gl2 = datum(GroupType::GL, &ints(&[0, -1]));
    let gate = gl2.coxeter_gate(2).unwrap();
    assert!(gate.p_gt_n && gate.p_ge_h && gate.n_class == 1);
    // the tabulated value 2(m-1) is below the class for regular ν in SO(2m+1)
    let so5 = datum(GroupType::SO, &ints(&[0, -1, -2, -3, -4]));
    let gate = so5.coxeter_gate(5).unwrap();
    assert_eq!((gate.h, gate.h_classical, gate.n_class), (2, 4, 3));
    assert!(!gate.class_within_table_bound);
}

#[test]
fn class_bounded_by_coxeter_number_exhaustively() {
    let values = [0, -1, -2, -3];
    let cases: Vec<(GroupType, usize)> = vec![
        (GroupType::GL, 2),
        (GroupType::GL, 3),
        (GroupType::GL, 4),
        (GroupType::GSp, 2),
        (GroupType::GSp, 4),
        (GroupType::SO, 3),
        (GroupType::SO, 4),
        (GroupType::SO, 5),
        (GroupType::SO, 6),
    ];
    for (g, n) in cases {
        let all = enumerate_cocharacters(g, n, &values);
        assert!(!all.is_empty());
        for d in all {
            let gate = d.coxeter_gate(2).unwrap();
            assert!(gate.n_class < gate.h_classical.max(1), "{g}({n}) {:?}", d.nu());
            d.dimension_identity().unwrap();
        }
    }
}

#[test]
fn adjoint_examples() {
    let spec = field(3, 1, 48);
    let gl2 = datum(GroupType::GL, &ints(&[0, -1]));
    let b = gl2.diagonal_b(&spec).unwrap();
    assert_eq!(gl2.adjoint_negative_slopes(&b).unwrap(), SlopeMultiset::from_pairs([(r(-1, 1), 1)]));
    let gl3 = datum(GroupType::GL, &ints(&[0, -1, -2]));
    let b = gl3.diagonal_b(&spec).unwrap();
    assert_eq!(gl3.adjoint_negative_slopes(&b).unwrap(), SlopeMultiset::from_pairs([(r(-2, 1), 1), (r(-1, 1), 2)]));
    assert!(gl3.adjoint_negative_slopes(&Mat::identity(&spec, 3)).unwrap().is_empty());
}

#[test]
fn adjoint_matches_roots_for_symplectic_and_orthogonal() {
    for d in [
        datum(GroupType::GSp, &ints(&[0, 0, -1, -1])),
        datum(GroupType::GSp, &ints(&[0, -1, -1, -2])),
        datum(GroupType::SO, &ints(&[0, -1, -1, -2])),
        datum(GroupType::SO, &ints(&[0, -1, -1, -1, -2])),
    ] {
        let spec = field(5, 1, d.adjoint_working_precision());
        let b = d.diagonal_b(&spec).unwrap();
        assert_eq!(d.adjoint_negative_slopes(&b).unwrap(), d.slope_multiset(), "{:?}", d.nu());
    }
}

#[test]
fn adjoint_matches_roots_for_all_small_gl() {
    for n in 1..=4 {
        for d in enumerate_cocharacters(GroupType::GL, n, &[0, -1, -2]) {
            let spec = field(3, 1, d.adjoint_working_precision());
            let b = d.diagonal_b(&spec).unwrap();
            assert_eq!(d.adjoint_negative_slopes(&b).unwrap(), d.slope_multiset(), "{:?}", d.nu());
        }
    }
}

#[test]
fn adjoint_rejects_elements_outside_the_group() {
    let spec = field(5, 1, 16);
    let d = datum(GroupType::GSp, &ints(&[0, 0, -1, -1]));
    let one = PadicScalar::one(&spec);
    let p = PadicScalar::p_power(&spec, 1);
    let b = Mat::diag(&spec, &[p, one.clone(), one.clone(), one]);
    assert!(matches!(d.adjoint_isocrystal(&b), Err(Error::NotInGroup(_))));
}

#[test]
fn invalid_data() {
    let bad = RootDatumWithCochar::new(GroupType::GL, 2, vec![r(-1, 1), r(0, 1)]);
    assert!(matches!(bad, Err(Error::NotDominant(_))));
    let bad = RootDatumWithCochar::new(GroupType::SO, 4, vec![r(0, 1), r(0, 1), r(-1, 1), r(-2, 1)]);
    assert!(matches!(bad, Err(Error::InvalidRootDatum(_))));
    let bad = RootDatumWithCochar::new(GroupType::GSp, 3, vec![r(0, 1); 3]);
    assert!(matches!(bad, Err(Error::InvalidRootDatum(_))));
    assert!(matches!(GroupType::parse("E8"), Err(Error::UnsupportedType(_))));
}

#[test]
fn json_round_trip() {
    let d = datum(GroupType::GSp, &[(0, 1), (-1, 2), (-1, 2), (-1, 1)]);
    let v = d.to_json();
    assert_eq!(v.to_string(), r#"{"n":4,"nu":["0","-1/2","-1/2","-1"],"type":"GSp"}"#);
    assert_eq!(RootDatumWithCochar::from_json(&v).unwrap(), d);
}

fn dominant_gl(len: usize) -> impl Strategy<Value = Vec<Rational64>> {
    prop::collection::vec((-8i64..=0, 1i64..=3), len).prop_map(|v| {
        let mut nu: Vec<Rational64> = v.into_iter().map(|(a, b)| Rational64::new(a, b)).collect();
        nu.sort_by(|a, b| b.cmp(a));
        nu
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gl_data_match_coordinate_oracles(nu in (1usize..=5).prop_flat_map(dominant_gl)) {
        let n = nu.len();
        let d = RootDatumWithCochar::new(GroupType::GL, n, nu.clone()).unwrap();
        prop_assert_eq!(d.slope_multiset(), gl_slopes_oracle(&nu));
        let sum: Rational64 = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| nu[i] - nu[j]).sum();
        prop_assert_eq!(d.leaf_dimension(), sum);
        prop_assert_eq!(d.dimension_identity().unwrap().leaf_dimension, sum);
        let distinct: BTreeSet<Rational64> = nu.iter().copied().collect();
        prop_assert_eq!(d.unipotent_nilpotency().unwrap(), distinct.len() - 1);
    }

    #[test]
    fn leaf_dimension_is_monotone_in_dominance_order(
        nu in (2usize..=5).prop_flat_map(dominant_gl),
        i in 0usize..5,
        j in 0usize..5,
        t in 1i64..=3,
    ) {
        let n = nu.len();
        let (i, j) = (i % n, j % n);
        prop_assume!(i < j);
        let mut bigger = nu.clone();
        bigger[i] += Rational64::new(t, 2);
        bigger[j] -= Rational64::new(t, 2);
        let d = RootDatumWithCochar::new(GroupType::GL, n, nu).unwrap();
        if let Ok(e) = RootDatumWithCochar::new(GroupType::GL, n, bigger) {
            prop_assert!(e.leaf_dimension() >= d.leaf_dimension());
        }
    }
}
