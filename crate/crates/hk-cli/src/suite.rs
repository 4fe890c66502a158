//! Fixed-seed release gate: a scaled-down run of every acceptance criterion
//! using the library's own cross-checks. The JSON form is byte-stable.

use hk::diagrams::Diagram;
use hk::division::{divide, formal_divide, DivisionProblem, Schedule};
use hk::exponents::{monomials_of_degree, Exponent, MonomialOrder};
use hk::jacobians::{full_rank_at_degree, macaulay_parts, macaulay_resultant, JacobianProblem, Variant};
use hk::resolution::{resolve_marked, verify_resolution, Limits, MarkedIdeal, VerifyOptions};
use hk::series::{parse, Series, POLY};
use hk::stanley::{hilbert_brute, perturbed_candidates, stabilization_check, stanley_decomposition, GradedModule};
use hk::stdbasis::{check_samuel_basis, hilbert_samuel_at, truncated_initial_diagram, IdealPresentation};
use hk::{Coeff, FieldSpec};
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::Report;

const Q: FieldSpec = FieldSpec::Rationals;
const D: u32 = 10;

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn p(text: &str, n: usize) -> Series {
    parse(text, Q, n, 0, POLY).expect("literal parses")
}

fn coeff(rng: &mut ChaCha8Rng, nonzero: bool) -> Coeff {
    loop {
        let v: i64 = rng.gen_range(-3..=3);
        if v != 0 || !nonzero {
            return Q.from_int(v);
        }
    }
}

fn pick(rng: &mut ChaCha8Rng, n: usize, d: u32) -> Exponent {
    monomials_of_degree(n, d).choose(rng).expect("nonempty").clone()
}

fn division(seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..60 {
        let n = rng.gen_range(1..=3);
        let m = rng.gen_range(0..=1);
        let mut alphas: Vec<Exponent> = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            let deg = rng.gen_range(1..=3);
            let a = pick(&mut rng, n, deg);
            if !alphas.iter().any(|b| a.dominates(b) || b.dominates(&a)) {
                alphas.push(a);
            }
        }
        let mut divisors = Vec::new();
        for a in &alphas {
            let mut f = Series::zero_with_params(Q, n, m, D);
            f.add_term(a.resized(n + m), &coeff(&mut rng, true));
            for _ in 0..rng.gen_range(0..=3) {
                let deg = rng.gen_range(a.degree() + 1..=a.degree() + 3);
                f.add_term(pick(&mut rng, n, deg).resized(n + m), &coeff(&mut rng, false));
            }
            if m > 0 && rng.gen_bool(0.5) {
                let deg = rng.gen_range(0..=2);
                let mut e = pick(&mut rng, n + m, deg);
                e.set(n, e.get(n) + 1);
                f.add_term(e, &coeff(&mut rng, false));
            }
            divisors.push((f, a.clone()));
        }
        let mut g = Series::zero_with_params(Q, n, m, D);
        for _ in 0..rng.gen_range(1..=6) {
            let deg = rng.gen_range(0..=6);
            g.add_term(pick(&mut rng, n + m, deg), &coeff(&mut rng, true));
        }
        let problem = DivisionProblem::new(&MonomialOrder::standard(n), divisors, D).map_err(|e| format!("case {case}: {e}"))?;
        let out = divide(&problem, &g).map_err(|e| format!("case {case}: {e}"))?;
        check(problem.defect(&g, &out).is_zero(), || format!("case {case}: identity fails"))?;
        problem.contracts_hold(&out).map_err(|e| format!("case {case}: {e}"))?;
        for schedule in [Schedule::Batch, Schedule::TermByTerm] {
            let other = formal_divide(&problem, &g, schedule).map_err(|e| format!("case {case}: {e}"))?;
            let same = other.remainder.same_terms(&out.remainder)
                && other.quotients.iter().zip(&out.quotients).all(|(a, b)| a.same_terms(b));
            check(same, || format!("case {case}: {schedule:?} disagrees"))?;
        }
    }
    Ok("60 problems: identity, supports, schedule independence".into())
}

fn diagrams(seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut accepted, mut points) = (0, 0);
    while accepted < 100 {
        let n = rng.gen_range(1..=4);
        let mut verts: Vec<Exponent> = Vec::new();
        if rng.gen_bool(0.5) {
            verts.extend((0..n).map(|i| {
                let mut e = Exponent::zero(n);
                e.set(i, rng.gen_range(1..=4));
                e
            }));
        }
        for _ in 0..rng.gen_range(1..=4) {
            verts.push(Exponent::new((0..n).map(|_| rng.gen_range(0..=3)).collect()));
        }
        verts.retain(|v| !v.is_zero());
        if verts.is_empty() {
            continue;
        }
        let dg = Diagram::from_exponents(n, verts).map_err(|e| e.to_string())?;
        check(dg.is_finite_type() == dg.finite_type_closed_form(), || "finite-type criteria disagree".into())?;
        if dg.is_finite_type() {
            points += dg.partition_certificate(10).map_err(|e| e.to_string())?;
            accepted += 1;
        }
    }
    Ok(format!("100 finite-type diagrams, {points} points partitioned"))
}

fn hilbert_samuel(seed: u64) -> Outcome {
    const S: u32 = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..10 {
        let n = rng.gen_range(1..=3);
        let gens: Vec<Series> = (0..rng.gen_range(1..=3))
            .map(|_| {
                let mut g = Series::zero(Q, n, POLY);
                for _ in 0..rng.gen_range(1..=3) {
                    let deg = rng.gen_range(1..=4);
                    g.add_term(pick(&mut rng, n, deg), &coeff(&mut rng, true));
                }
                g
            })
            .filter(|g| !g.is_zero())
            .collect();
        if gens.is_empty() {
            continue;
        }
        let ideal = IdealPresentation::standard(gens.clone(), S + 1).map_err(|e| e.to_string())?;
        let hs = hilbert_samuel_at(&ideal, &vec![Coeff::zero(); n], S).map_err(|e| e.to_string())?;
        for s in 0..=S {
            // Generators of order above s already lie in m^{s+1}.
            let low: Vec<Series> = gens.iter().filter(|g| g.ord().is_ok_and(|o| o <= s)).cloned().collect();
            let direct = if low.is_empty() {
                Diagram::empty(n).hilbert_samuel(u64::from(s))
            } else {
                let cut = IdealPresentation::standard(low, s).map_err(|e| e.to_string())?;
                truncated_initial_diagram(&cut).map_err(|e| e.to_string())?.0.hilbert_samuel(u64::from(s))
            }
            .map_err(|e| e.to_string())?;
            check(hs[s as usize] == direct, || format!("ideal {case}: H({s}) = {} vs {direct}", hs[s as usize]))?;
        }
    }
    let cusp = IdealPresentation::standard(vec![p("x^2 - y^3", 2)], S + 1).map_err(|e| e.to_string())?;
    let hs = hilbert_samuel_at(&cusp, &[Q.zero(), Q.zero()], S).map_err(|e| e.to_string())?;
    check(hs.iter().enumerate().all(|(s, h)| *h == 2 * s as u128 + 1), || format!("cusp {hs:?}"))?;
    Ok("10 ideals agree with per-degree truncations; cusp H(s) = 2s+1".into())
}

fn stanley(seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut modules = vec![GradedModule::new(Q, 2, 1, vec![vec![p("x^2", 2)]]).map_err(|e| e.to_string())?];
    while modules.len() < 6 {
        let n = rng.gen_range(1..=3);
        let rank = rng.gen_range(1..=2);
        let rels: Vec<Vec<Series>> = (0..rng.gen_range(1..=2))
            .map(|_| {
                let deg = rng.gen_range(1..=3);
                (0..rank)
                    .map(|_| {
                        let mut f = Series::zero(Q, n, POLY);
                        for e in monomials_of_degree(n, deg) {
                            f.add_term(e, &coeff(&mut rng, false));
                        }
                        f
                    })
                    .collect()
            })
            .collect();
        if let Ok(m) = GradedModule::new(Q, n, rank, rels) {
            modules.push(m);
        }
    }
    let mut bases = Vec::new();
    for (k, m) in modules.iter().enumerate() {
        let b = stanley_decomposition(m, seed + k as u64).map_err(|e| format!("module {k}: {e}"))?;
        for s in 0..=6 {
            check(b.hilbert(s) == hilbert_brute(&b.module, s), || format!("module {k}: Σφ differs at s={s}"))?;
        }
        bases.push(b);
    }
    check((0..=6).all(|s| bases[0].hilbert(s) == u128::from(2 * s + 1)), || "R/(x²) is not 2s+1".into())?;
    let mut passes = 0;
    for i in 0..50 {
        let b = &bases[i % bases.len()];
        let cands = perturbed_candidates(b, &mut rng, i % 3 != 0);
        let v = stabilization_check(b, &cands, None).map_err(|e| e.to_string())?;
        check(v.consistent(), || format!("instance {i}: threshold passed, oracle failed"))?;
        passes += usize::from(v.threshold_pass());
    }
    Ok(format!("{} modules; 50 stabilization instances ({passes} pass the threshold), 0 oracle failures", bases.len()))
}

fn macaulay(seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let axis = |degs: &[u32]| -> Vec<Exponent> {
        (0..degs.len())
            .map(|i| {
                let mut e = Exponent::zero(degs.len());
                e.set(i, degs[i]);
                e
            })
            .collect()
    };
    for case in 0..20 {
        let a: Vec<Coeff> = (0..4).map(|_| coeff(&mut rng, false)).collect();
        let f1 = Series::zero(Q, 2, POLY).add(&p("x", 2).scale(&a[0])).add(&p("y", 2).scale(&a[1]));
        let f2 = Series::zero(Q, 2, POLY).add(&p("x", 2).scale(&a[2])).add(&p("y", 2).scale(&a[3]));
        let jp = JacobianProblem::new(&[f1, f2], &axis(&[1, 1]), &[Q.zero(), Q.zero()]).map_err(|e| e.to_string())?;
        let (j1, j2) = (jp.det(1, Variant::Full), jp.det(2, Variant::Full));
        check(j2 == &a[0] * &j1, || format!("pair {case}: J² ≠ a₁₁·J¹"))?;
    }
    for case in 0..20u64 {
        let k = if case % 2 == 0 { 2 } else { 3 };
        let degs: Vec<u32> = (0..k).map(|_| rng.gen_range(1..=if k == 2 { 3 } else { 2 })).collect();
        let forms: Vec<Series> = degs
            .iter()
            .map(|&d| {
                let mut f = Series::zero(Q, k, POLY);
                for e in monomials_of_degree(k, d) {
                    f.add_term(e, &coeff(&mut rng, false));
                }
                f
            })
            .collect();
        if forms.iter().any(Series::is_zero) {
            continue;
        }
        let res = macaulay_resultant(&forms, seed + case).map_err(|e| e.to_string())?;
        let parts = macaulay_parts(&forms).map_err(|e| e.to_string())?;
        let jp = JacobianProblem::new(&forms, &axis(&degs), &vec![Q.zero(); k]).map_err(|e| e.to_string())?;
        let jd = jp.det(parts.degree, Variant::Full);
        if !parts.extraneous.is_zero() {
            check(jd == &res * &parts.extraneous, || format!("system {case}: J^d ≠ Res·minor"))?;
        }
        check(res.is_zero() != full_rank_at_degree(&forms, parts.degree), || format!("system {case}: rank disagrees"))?;
    }
    let bezout = [p("x^2", 2), p("y^3", 2)];
    let res = macaulay_resultant(&bezout, seed).map_err(|e| e.to_string())?;
    let ideal = IdealPresentation::standard(bezout.to_vec(), 8).map_err(|e| e.to_string())?;
    let length = hilbert_samuel_at(&ideal, &[Q.zero(), Q.zero()], 6).map_err(|e| e.to_string())?[6];
    check(res == Q.one() && length == 6, || format!("(x², y³): Res {res}, length {length}"))?;
    Ok("20 linear pairs, 20 systems, (x², y³) → 6".into())
}

fn resolution(seed: u64) -> Outcome {
    let cases: [(&str, usize, u32, &[usize], bool); 3] =
        [("x^2 - y^3", 2, 2, &[], true), ("x^3*y^2", 2, 4, &[0, 1], false), ("x^2 - z*y^2", 3, 2, &[], true)];
    let mut parts = Vec::new();
    let mut shape = Vec::new();
    for (text, n, mu, e, variety) in cases {
        let m = MarkedIdeal::with_divisor_coords(vec![p(text, n)], mu, e).map_err(|e| e.to_string())?;
        let trace = resolve_marked(&m, Limits::default(), seed).map_err(|e| format!("{text}: {e}"))?;
        let report = verify_resolution(&trace, &m, VerifyOptions { variety_checks: variety, ..Default::default() });
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        check(failed.is_empty(), || format!("{text}: {failed:?}"))?;
        parts.push(format!("{text}: blow-ups {}, depth {}", trace.blowups, trace.max_depth()));
        shape.push((trace.blowups, trace.max_depth()));
    }
    check(shape[0].0 == 1, || format!("cusp used {} blow-ups", shape[0].0))?;
    check(shape[1].1 <= 2, || format!("monomial depth {}", shape[1].1))?;
    Ok(parts.join("; "))
}

fn samuel_basis(seed: u64) -> Outcome {
    let cusp = [p("x^2 - y^3", 2)];
    let origin = [vec![Q.zero(), Q.zero()]];
    let exp = |v: &[u32]| Exponent::new(v.to_vec());
    let good = check_samuel_basis(&cusp, &[exp(&[2])], &origin, seed).map_err(|e| e.to_string())?;
    check(good[0].all_pass(), || format!("cusp basis: {:?}", good[0].first_failure))?;
    let bad = check_samuel_basis(&cusp, &[exp(&[2, 0]), exp(&[0, 3])], &origin, seed).map_err(|e| e.to_string())?;
    match &bad[0].first_failure {
        Some((1, why)) => Ok(format!("cusp passes; {{(2,0),(0,3)}} fails condition 1: {why}")),
        other => Err(format!("wrong diagram verdict {other:?}")),
    }
}

fn criteria(seed: u64) -> Vec<(u8, &'static str, Outcome)> {
    vec![
        (1, "division", division(seed ^ 1)),
        (2, "diagram partition", diagrams(seed ^ 2)),
        (3, "Hilbert-Samuel two ways", hilbert_samuel(seed ^ 3)),
        (4, "Stanley decompositions", stanley(seed ^ 4)),
        (5, "Macaulay identities", macaulay(seed ^ 5)),
        (6, "resolution", resolution(seed)),
        (7, "standard basis along the stratum", samuel_basis(seed)),
    ]
}

fn row(id: u8, name: &str, outcome: &Outcome) -> Value {
    match outcome {
        Ok(detail) => json!({"criterion": id, "name": name, "passed": true, "detail": detail}),
        Err(detail) => json!({"criterion": id, "name": name, "passed": false, "detail": detail}),
    }
}

pub fn run_suite(seed: u64) -> Report {
    let mut rows: Vec<Value> = criteria(seed).iter().map(|(id, name, o)| row(*id, name, o)).collect();
    let again = json!([row(1, "division", &division(seed ^ 1)), row(6, "resolution", &resolution(seed))]);
    let first = json!([rows[0].clone(), rows[5].clone()]);
    let repeat: Outcome = if again == first {
        Ok("division and resolution reproduce byte-for-byte in-process".into())
    } else {
        Err("a repeated run differs".into())
    };
    rows.push(row(8, "determinism", &repeat));
    let ok = rows.iter().all(|r| r["passed"] == json!(true));
    let text = rows
        .iter()
        .map(|r| {
            format!(
                "{} {} {:<34} {}",
                if r["passed"] == json!(true) { "PASS" } else { "FAIL" },
                r["criterion"],
                r["name"].as_str().unwrap_or(""),
                r["detail"].as_str().unwrap_or("")
            )
        })
        .collect();
    Report { result: json!({"criteria": rows, "all_passed": ok}), text, ok }
}
