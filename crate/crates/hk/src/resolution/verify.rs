use num_traits::Zero;
use serde::Serialize;

use super::driver::{NodeStatus, ResolutionTrace, TraceNode};
use super::ops::{controlled_transform, derivative_ideal, strict_transform, unit_certificate, vanish_on, MarkedIdeal};
use crate::field::{Coeff, FieldSpec};
use crate::series::Series;
use crate::stdbasis::{hilbert_samuel_at, IdealPresentation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Treat the input as the ideal of a variety and run the Hilbert-Samuel probes.
    pub variety_checks: bool,
    pub hs_window: u32,
    /// Sample points range over `{−grid, …, grid}ⁿ`.
    pub grid: i64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { variety_checks: true, hs_window: 6, grid: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Hilbert-Samuel profile `H(0..=s_max)` of the ideal at a point.
pub fn hs_at(gens: &[Series], point: &[Coeff], s_max: u32) -> Vec<u128> {
    let ideal = IdealPresentation::standard(gens.to_vec(), s_max).expect("nonzero generators");
    hilbert_samuel_at(&ideal, point, s_max).expect("truncated diagram")
}

fn same(a: &[Series], b: &[Series]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.same_terms(y))
}

fn dominated(a: &[u128], b: &[u128]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn grid_points(field: &FieldSpec, n: usize, g: i64) -> Vec<Vec<Coeff>> {
    let mut pts = vec![Vec::new()];
    for _ in 0..n {
        pts = pts
            .into_iter()
            .flat_map(|p: Vec<Coeff>| {
                (-g..=g).map(move |t| {
                    let mut q = p.clone();
                    q.push(field.from_int(t));
                    q
                })
            })
            .collect();
    }
    pts
}

fn on_variety(gens: &[Series], q: &[Coeff]) -> bool {
    gens.iter().all(|g| g.evaluate(q).is_ok_and(|v| v.is_zero()))
}

fn record(checks: &mut Vec<Check>, name: &'static str, failures: Vec<String>, ok_detail: String) {
    let passed = failures.is_empty();
    let detail = if passed { ok_detail } else { failures.join("; ") };
    checks.push(Check { name, passed, detail });
}

/// Replays every blow-up of the trace and checks the recorded invariants.
pub fn verify_resolution(trace: &ResolutionTrace, original: &MarkedIdeal, opts: VerifyOptions) -> VerificationReport {
    let mu = trace.mu;
    let mut checks = Vec::new();
    let root = &trace.nodes[0];
    record(
        &mut checks,
        "root",
        if same(&root.ideal, &original.generators) && mu == original.mu {
            vec![]
        } else {
            vec!["root chart does not hold the input".into()]
        },
        "root chart holds the input".into(),
    );

    let interior: Vec<&TraceNode> = trace.nodes.iter().filter(|n| n.center.is_some()).collect();
    let mut fails = Vec::new();
    for node in &interior {
        let center = node.center.as_ref().expect("interior");
        let der = derivative_ideal(&node.changed_ideal(), mu - 1);
        if !vanish_on(&der, center) {
            fails.push(format!("node {}: {} leaves the cosupport", node.id, trace.render_center(center)));
        }
    }
    record(&mut checks, "centers_in_cosupport", fails, format!("{} centers", interior.len()));

    let (mut ctl, mut strict, mut snc, mut order) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for node in &interior {
        let center = node.center.as_ref().expect("interior");
        let ideal = node.changed_ideal();
        let st = node.changed_strict();
        let mut new_ids = Vec::new();
        for &cid in &node.children {
            let child = &trace.nodes[cid];
            let j = child.chart_coord.unwrap_or(usize::MAX);
            match controlled_transform(&ideal, mu, center, j) {
                Ok(t) if same(&t, &child.ideal) => {}
                Ok(_) => ctl.push(format!("node {cid}: recorded transform differs")),
                Err(e) => ctl.push(format!("node {cid}: {e}")),
            }
            if !same(&strict_transform(&st, center, j), &child.strict) {
                strict.push(format!("node {cid}: strict transform differs"));
            }
            let survivors: Vec<(usize, usize)> =
                node.e.iter().filter(|d| d.coord != j).map(|d| (d.coord, d.id)).collect();
            let mut coords: Vec<usize> = child.e.iter().map(|d| d.coord).collect();
            coords.sort_unstable();
            coords.dedup();
            let fresh: Vec<_> = child.e.iter().filter(|d| !survivors.contains(&(d.coord, d.id))).collect();
            let consistent = coords.len() == child.e.len()
                && survivors.iter().all(|s| child.e.iter().any(|d| (d.coord, d.id) == *s))
                && fresh.len() == 1
                && fresh[0].coord == j
                && !node.e.iter().any(|d| d.id == fresh[0].id);
            if consistent {
                new_ids.push(fresh[0].id);
            } else {
                snc.push(format!("node {cid}: exceptional records inconsistent"));
            }
            if child.root_order > node.root_order {
                order.push(format!("node {cid}: order {} after {}", child.root_order, node.root_order));
            }
        }
        new_ids.dedup();
        if new_ids.len() > 1 {
            snc.push(format!("node {}: charts disagree on the new divisor", node.id));
        }
    }
    record(&mut checks, "controlled_transforms", ctl, "σ*(I) divisible by the μ-th power in every chart".into());
    record(&mut checks, "strict_transforms", strict, "strict transforms replay".into());
    record(&mut checks, "exceptional_snc", snc, "divisors are distinct coordinate hyperplanes".into());
    record(&mut checks, "order_monotone", order, "order of N(I) never increases".into());

    let mut fails = Vec::new();
    let leaves: Vec<&TraceNode> = trace.leaves().collect();
    for leaf in &leaves {
        let der = derivative_ideal(&leaf.changed_ideal(), mu - 1);
        let certified = matches!(leaf.status, NodeStatus::Resolved { .. }) && unit_certificate(&der, 16).is_some();
        if !certified {
            fails.push(format!("leaf {}: cosupport not certified empty", leaf.id));
        }
    }
    record(&mut checks, "leaves_empty", fails, format!("{} leaves certified", leaves.len()));

    if opts.variety_checks {
        variety_checks(trace, opts, &mut checks);
    }
    VerificationReport { checks }
}

fn variety_checks(trace: &ResolutionTrace, opts: VerifyOptions, checks: &mut Vec<Check>) {
    let n = trace.n;
    let s = opts.hs_window;
    let grid = grid_points(&trace.field, n, opts.grid);
    let profiles = |gens: &[Series]| -> Vec<Vec<u128>> {
        grid.iter().filter(|q| on_variety(gens, q)).map(|q| hs_at(gens, q, s)).collect()
    };

    let root = profiles(&trace.nodes[0].strict);
    let mut root_max = vec![0u128; s as usize + 1];
    for p in &root {
        for (m, v) in root_max.iter_mut().zip(p) {
            *m = (*m).max(*v);
        }
    }
    let mut fails = Vec::new();
    for node in trace.nodes.iter().skip(1) {
        for p in profiles(&node.strict) {
            if !dominated(&p, &root_max) {
                fails.push(format!("node {}: H = {p:?} exceeds {root_max:?}", node.id));
                break;
            }
        }
    }
    record(checks, "bennett", fails, format!("strict transforms stay below {root_max:?}"));

    let (mut flat, mut stratum) = (Vec::new(), Vec::new());
    for node in trace.nodes.iter().filter(|n| n.center.is_some()) {
        let center = node.center.as_ref().expect("interior");
        let st = node.changed_strict();
        let origin = vec![Coeff::zero(); n];
        let h0 = hs_at(&st, &origin, s);
        if center.len() < n {
            for t in 1..=2 {
                let q: Vec<Coeff> =
                    (0..n).map(|i| if center.contains(&i) { Coeff::zero() } else { trace.field.from_int(t) }).collect();
                if !on_variety(&st, &q) || hs_at(&st, &q, s) != h0 {
                    flat.push(format!("node {}: H varies along {}", node.id, trace.render_center(center)));
                    break;
                }
            }
        }
        if profiles(&st).iter().any(|p| !dominated(p, &h0)) {
            stratum.push(format!("node {}: {} misses the top stratum", node.id, trace.render_center(center)));
        }
    }
    record(checks, "normal_flatness", flat, "H constant at sampled points of each center".into());
    record(checks, "samuel_stratum", stratum, "centers lie in the top Hilbert-Samuel stratum".into());
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resolution::{resolve_marked, Limits};
    use crate::series::{parse, POLY};

    fn p(t: &str, n: usize) -> Series {
        parse(t, FieldSpec::Rationals, n, 0, POLY).unwrap()
    }

    #[test]
    fn cusp_needs_one_blowup() {
        let m = MarkedIdeal::new(vec![p("x^2 - y^3", 2)], 2, vec![]).unwrap();
        let t = resolve_marked(&m, Limits::default(), 0).unwrap();
        assert_eq!(t.blowups, 1, "{:?}", t.summary());
        let r = verify_resolution(&t, &m, VerifyOptions::default());
        assert!(r.all_passed(), "{r:?}");
    }

    #[test]
    fn monomial_depth() {
        let m = MarkedIdeal::with_divisor_coords(vec![p("x^3*y^2", 2)], 4, &[0, 1]).unwrap();
        let t = resolve_marked(&m, Limits::default(), 0).unwrap();
        assert!(t.max_depth() <= 2, "{:?}", t.summary());
        let opts = VerifyOptions { variety_checks: false, ..Default::default() };
        assert!(verify_resolution(&t, &m, opts).all_passed());
    }

    #[test]
    fn smooth_hypersurface() {
        let m = MarkedIdeal::new(vec![p("x", 2)], 1, vec![]).unwrap();
        let t = resolve_marked(&m, Limits::default(), 0).unwrap();
        assert_eq!(t.blowups, 1);
        assert_eq!(t.centers()[0].1, vec![0]);
        assert!(verify_resolution(&t, &m, VerifyOptions::default()).all_passed());
    }

    #[test]
    fn umbrella_terminates() {
        let m = MarkedIdeal::new(vec![p("x^2 - z*y^2", 3)], 2, vec![]).unwrap();
        let t = resolve_marked(&m, Limits::default(), 0).unwrap();
        assert_eq!(t.centers()[0].1, vec![0, 1, 2]);
        let r = verify_resolution(&t, &m, VerifyOptions::default());
        assert!(r.all_passed(), "{r:?}\n{:#?}", t.summary());
    }

    #[test]
    fn corrupted_center_is_flagged() {
        let m = MarkedIdeal::new(vec![p("x^2 - y^3", 2)], 2, vec![]).unwrap();
        let mut t = resolve_marked(&m, Limits::default(), 0).unwrap();
        t.nodes[0].center = Some(vec![1]);
        let r = verify_resolution(&t, &m, VerifyOptions::default());
        assert!(!r.get("centers_in_cosupport").unwrap().passed);
        assert!(!r.all_passed());
    }
}
