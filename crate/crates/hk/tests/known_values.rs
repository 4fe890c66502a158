//! Fixed inputs with values worked out by hand or by the oracles in `common`.

mod common;

use common::*;
use hk::diagrams::Diagram;
use hk::division::{divide, DivisionProblem};
use hk::exponents::MonomialOrder;
use hk::jacobians::macaulay_resultant;
use hk::stanley::phi;
use hk::stdbasis::{hilbert_samuel_at, standard_basis, IdealPresentation};
use num_traits::{Signed, Zero};

#[test]
fn phi_matches_pascal() {
    let mut row = [1u128; 12];
    for k in 0..6u32 {
        for (m, &v) in row.iter().enumerate() {
            assert_eq!(phi(m as i64, k), v, "phi({m}, {k})");
        }
        for m in 1..row.len() {
            row[m] += row[m - 1];
        }
    }
    assert_eq!(phi(-1, 3), 0);
}

#[test]
fn staircase_profile() {
    let dg = Diagram::from_exponents(2, [exp(&[2, 0]), exp(&[0, 3])]).unwrap();
    assert_eq!(dg.hs_profile(6).unwrap(), vec![1, 3, 5, 6, 6, 6, 6]);
    let line = Diagram::from_exponents(2, [exp(&[2, 0])]).unwrap();
    assert_eq!(line.hs_profile(4).unwrap(), vec![1, 3, 5, 7, 9]);
}

#[test]
fn cusp_hilbert_samuel() {
    let cusp = vec![poly("x^2 - y^3", 2)];
    let ideal = IdealPresentation::standard(cusp.clone(), 9).unwrap();
    let at_origin = hilbert_samuel_at(&ideal, &[q(0), q(0)], 8).unwrap();
    for s in 0..=8u32 {
        assert_eq!(at_origin[s as usize], 2 * u128::from(s) + 1);
        assert_eq!(at_origin[s as usize], quotient_dim(&cusp, 2, s) as u128);
    }
    // (1, 1) is a smooth point of the curve.
    let smooth = hilbert_samuel_at(&ideal, &[q(1), q(1)], 5).unwrap();
    assert_eq!(smooth, vec![1, 2, 3, 4, 5, 6]);
}

#[test]
fn cusp_standard_basis() {
    let ideal = IdealPresentation::standard(vec![poly("x^2 - y^3", 2)], 8).unwrap();
    let report = standard_basis(&ideal).unwrap();
    assert_eq!(report.diagram.vertices(), &[exp(&[2, 0])]);
    assert!(report.basis[0].same_terms(&poly("x^2 - y^3", 2)));
}

#[test]
fn division_of_a_cube() {
    // x³ = x·(x² − y³) + x·y³
    let p = DivisionProblem::new(&MonomialOrder::standard(2), vec![(poly("x^2 - y^3", 2), exp(&[2, 0]))], 12).unwrap();
    let out = divide(&p, &poly("x^3", 2)).unwrap();
    assert!(out.quotients[0].same_terms(&poly("x", 2)));
    assert!(out.remainder.same_terms(&poly("x*y^3", 2)));
}

#[test]
fn binary_resultants() {
    let cases = [("x^2 - y^2", 2, "x - 2*y", 1), ("x^2 + x*y + 3*y^2", 2, "2*x^2 - y^2", 2), ("x*y", 2, "x^2 + x*y", 2)];
    for (f, a, g, b) in cases {
        let (f, g) = (poly(f, 2), poly(g, 2));
        let res = macaulay_resultant(&[f.clone(), g.clone()], 7).unwrap();
        assert_eq!(res, sylvester(&f, a, &g, b));
    }
    // x − 2y vanishes at (2, 1), where x² − y² is 3.
    let res = macaulay_resultant(&[poly("x^2 - y^2", 2), poly("x - 2*y", 2)], 0).unwrap();
    assert_eq!(res.abs(), q(3));
    let shared = macaulay_resultant(&[poly("x*y", 2), poly("x^2 + x*y", 2)], 0).unwrap();
    assert!(shared.is_zero());
}
