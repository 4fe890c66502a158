mod common;

use common::*;
use hk::diagrams::Diagram;
use hk::division::{divide, DivisionProblem};
use hk::exponents::{Exponent, MonomialOrder};
use hk::series::{parse, Series, POLY};
use hk::stanley::phi;
use proptest::prelude::*;
use std::cmp::Ordering;

fn exponent(n: usize, max: u32) -> impl Strategy<Value = Exponent> {
    prop::collection::vec(0..=max, n).prop_map(Exponent::new)
}

fn terms(n: usize, deg: u32) -> impl Strategy<Value = Vec<(Vec<u32>, i64)>> {
    prop::collection::vec((prop::collection::vec(0..=deg, n), -4i64..=4), 0..6)
}

fn build(n: usize, trunc: u32, terms: &[(Vec<u32>, i64)]) -> Series {
    let mut s = Series::zero(Q, n, trunc);
    for (e, c) in terms {
        s.add_term(Exponent::new(e.clone()), &q(*c));
    }
    s
}

fn staircase(n: usize) -> impl Strategy<Value = Diagram> {
    prop::collection::vec(prop::collection::vec(0u32..=3, n), 1..4).prop_filter_map("origin only", move |vs| {
        let vs: Vec<Exponent> = vs.into_iter().filter(|v| v.iter().any(|&x| x > 0)).map(Exponent::new).collect();
        (!vs.is_empty()).then(|| Diagram::from_exponents(n, vs).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exponent_order_is_total_and_additive(a in exponent(3, 4), b in exponent(3, 4), c in exponent(3, 4)) {
        let ab = a.cmp(&b);
        prop_assert_eq!(ab == Ordering::Equal, a == b);
        prop_assert_eq!(b.cmp(&a), ab.reverse());
        prop_assert_eq!(a.add(&c).cmp(&b.add(&c)), ab);
    }

    #[test]
    fn standard_order_is_graded_and_additive(a in exponent(3, 4), b in exponent(3, 4), c in exponent(3, 4)) {
        let order = MonomialOrder::standard(3);
        let ab = order.compare(&a, &b).unwrap();
        prop_assert_eq!(ab == Ordering::Equal, a == b);
        if a.degree() != b.degree() {
            prop_assert_eq!(ab, a.degree().cmp(&b.degree()));
        }
        prop_assert_eq!(order.compare(&a.add(&c), &b.add(&c)).unwrap(), ab);
    }

    #[test]
    fn hilbert_samuel_counts_the_complement(dg in staircase(3)) {
        let profile = dg.hs_profile(8).unwrap();
        for s in 0..profile.len() {
            prop_assert_eq!(profile[s], monomials_upto(3, s as u32).iter()
                .filter(|a| !dg.contains(&exp(a))).count() as u128);
            if s > 0 {
                prop_assert!(profile[s] >= profile[s - 1]);
            }
        }
    }

    #[test]
    fn partition_certificate_accepts(dg in staircase(3)) {
        if dg.is_finite_type() {
            prop_assert!(dg.partition_certificate(6).is_ok());
        }
    }

    #[test]
    fn phi_satisfies_pascal(m in 0i64..30, k in 1u32..6) {
        let sum: u128 = (0..=m).map(|j| phi(j, k - 1)).sum();
        prop_assert_eq!(phi(m, k), sum);
    }

    #[test]
    fn division_is_linear(tail in terms(2, 4), g1 in terms(2, 5), g2 in terms(2, 5)) {
        const T: u32 = 8;
        let mut f = build(2, T, &tail);
        // Keep x² as the leading exponent by clearing everything at or below it.
        for (e, c) in tail.iter() {
            if e.iter().sum::<u32>() <= 2 {
                f.add_term(Exponent::new(e.clone()), &-q(*c));
            }
        }
        f.add_term(exp(&[2, 0]), &q(1));
        let p = DivisionProblem::new(&MonomialOrder::standard(2), vec![(f, exp(&[2, 0]))], T).unwrap();
        let (g1, g2) = (build(2, T, &g1), build(2, T, &g2));
        let (a, b, ab) = (divide(&p, &g1).unwrap(), divide(&p, &g2).unwrap(), divide(&p, &g1.add(&g2)).unwrap());
        prop_assert!(p.defect(&g1, &a).is_zero());
        prop_assert!(p.contracts_hold(&a).is_ok());
        prop_assert!(ab.remainder.same_terms(&a.remainder.add(&b.remainder)));
        prop_assert!(ab.quotients[0].same_terms(&a.quotients[0].add(&b.quotients[0])));
    }

    #[test]
    fn render_parses_back(t in terms(3, 4)) {
        let s = build(3, POLY, &t);
        let text = s.render(None);
        let back = parse(&text, Q, 3, 0, POLY).unwrap();
        prop_assert!(back.same_terms(&s), "{} reparsed differently", text);
    }
}
