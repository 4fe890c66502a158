//! One test per acceptance criterion. Each prints a single `PASS`/`FAIL` line
//! (visible with `--nocapture`) and asserts on the same outcome.

#[path = "../../hk/tests/common/mod.rs"]
mod common;

use std::collections::BTreeMap;
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use hk::diagrams::Diagram;
use hk::division::{divide, formal_divide, DivisionProblem, Schedule};
use hk::exponents::{Exponent, MonomialOrder};
use hk::jacobians::{macaulay_parts, macaulay_resultant, JacobianProblem, Variant};
use hk::resolution::{resolve_marked, verify_resolution, Limits, MarkedIdeal, VerifyOptions};
use hk::series::Series;
use hk::stanley::{perturbed_candidates, stabilization_check, stanley_decomposition, GradedModule};
use hk::stdbasis::{check_samuel_basis, hilbert_samuel_at, IdealPresentation};
use hk::Coeff;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(criterion: u8, title: &str, outcome: Result<String, String>) {
    match &outcome {
        Ok(detail) => println!("PASS criterion {criterion} ({title}): {detail}"),
        Err(detail) => println!("FAIL criterion {criterion} ({title}): {detail}"),
    }
    if let Err(detail) = outcome {
        panic!("criterion {criterion} failed: {detail}");
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------- division

const D: u32 = 10;

fn random_alphas(rng: &mut ChaCha8Rng, n: usize) -> Vec<Exponent> {
    let count = rng.gen_range(1..=3);
    let mut raw: Vec<Vec<u32>> = Vec::new();
    while raw.len() < count {
        let deg = rng.gen_range(1..=3);
        let cands = monomials(n, deg);
        let pick = cands.choose(rng).unwrap().clone();
        if !raw.contains(&pick) {
            raw.push(pick);
        }
    }
    let dominated = |a: &Vec<u32>, b: &Vec<u32>| a != b && a.iter().zip(b).all(|(x, y)| x >= y);
    raw.iter()
        .filter(|a| !raw.iter().any(|b| dominated(a, b)))
        .map(|a| Exponent::new(a.clone()))
        .collect()
}

fn random_divisor(rng: &mut ChaCha8Rng, alpha: &Exponent, n: usize, m: usize) -> Series {
    let mut f = Series::zero_with_params(Q, n, m, D);
    f.add_term(alpha.resized(n + m), &nonzero_coeff(rng));
    for _ in 0..rng.gen_range(0..=3) {
        let deg = rng.gen_range(alpha.degree() + 1..=alpha.degree() + 3);
        let mut e = monomials(n, deg).choose(rng).unwrap().clone();
        e.extend(std::iter::repeat_n(0, m));
        f.add_term(Exponent::new(e), &small_coeff(rng));
    }
    if m > 0 {
        for _ in 0..rng.gen_range(0..=2) {
            let deg = rng.gen_range(1..=3);
            let mut e = monomials(n + m, deg).choose(rng).unwrap().clone();
            if e[n..].iter().all(|&t| t == 0) {
                e[n] += 1;
            }
            f.add_term(Exponent::new(e), &small_coeff(rng));
        }
    }
    f
}

fn random_dividend(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Series {
    let mut g = Series::zero_with_params(Q, n, m, D);
    for _ in 0..rng.gen_range(1..=6) {
        let deg = rng.gen_range(0..=6);
        g.add_term(Exponent::new(monomials(n + m, deg).choose(rng).unwrap().clone()), &nonzero_coeff(rng));
    }
    g
}

/// `g − Σ hᵢfᵢ − r` cut at total degree `D`, multiplied out term by term.
fn identity_defect(g: &Series, hs: &[Series], fs: &[Series], r: &Series) -> BTreeMap<Vec<u32>, Coeff> {
    let mut acc: BTreeMap<Vec<u32>, Coeff> = BTreeMap::new();
    let mut add = |e: Vec<u32>, c: Coeff| {
        if e.iter().sum::<u32>() <= D {
            *acc.entry(e).or_insert_with(Coeff::zero) += c;
        }
    };
    for (e, c) in g.terms() {
        add(e.coords().to_vec(), c.clone());
    }
    for (e, c) in r.terms() {
        add(e.coords().to_vec(), -c.clone());
    }
    for (h, f) in hs.iter().zip(fs) {
        for (a, x) in h.terms() {
            for (b, y) in f.terms() {
                let e: Vec<u32> = a.coords().iter().zip(b.coords()).map(|(u, v)| u + v).collect();
                add(e, -(x * y));
            }
        }
    }
    acc.retain(|_, c| !c.is_zero());
    acc
}

/// Cells are assigned to the first dominated vertex in reverse-lex order.
fn owner(alphas: &[Exponent], main: &[u32]) -> Option<usize> {
    let mut order: Vec<usize> = (0..alphas.len()).collect();
    order.sort_by(|&a, &b| alphas[a].cmp(&alphas[b]));
    order.into_iter().find(|&j| main.iter().zip(alphas[j].coords()).all(|(x, a)| x >= a))
}

fn division_problem(seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut engines = BTreeMap::new();
    for case in 0..200 {
        let n = rng.gen_range(1..=3);
        let m = rng.gen_range(0..=1);
        let alphas = random_alphas(&mut rng, n);
        let divisors: Vec<(Series, Exponent)> =
            alphas.iter().map(|a| (random_divisor(&mut rng, a, n, m), a.clone())).collect();
        let g = random_dividend(&mut rng, n, m);
        let p = DivisionProblem::new(&MonomialOrder::standard(n), divisors, D).map_err(|e| format!("case {case}: {e}"))?;
        let out = divide(&p, &g).map_err(|e| format!("case {case}: {e}"))?;
        *engines.entry(format!("{:?}", out.engine)).or_insert(0) += 1;

        let defect = identity_defect(&g, &out.quotients, p.divisors(), &out.remainder);
        ensure(defect.is_empty(), || format!("case {case}: identity defect {defect:?}"))?;
        for (j, h) in out.quotients.iter().enumerate() {
            for (e, _) in h.terms() {
                let main: Vec<u32> = e.coords()[..n].iter().zip(alphas[j].coords()).map(|(x, a)| x + a).collect();
                ensure(owner(&alphas, &main) == Some(j), || format!("case {case}: quotient {j} has {e}"))?;
            }
        }
        for (e, _) in out.remainder.terms() {
            ensure(owner(&alphas, &e.coords()[..n]).is_none(), || format!("case {case}: remainder has {e}"))?;
        }

        let batch = formal_divide(&p, &g, Schedule::Batch).map_err(|e| format!("case {case}: {e}"))?;
        let single = formal_divide(&p, &g, Schedule::TermByTerm).map_err(|e| format!("case {case}: {e}"))?;
        for other in [&batch, &single] {
            let same = other.remainder.same_terms(&out.remainder)
                && other.quotients.iter().zip(&out.quotients).all(|(a, b)| a.same_terms(b));
            ensure(same, || format!("case {case}: schedules disagree"))?;
        }
    }
    Ok(format!("200 problems, engines {engines:?}"))
}

#[test]
fn criterion_1_division() {
    report(1, "division", division_problem(0x5eed_0001));
}

// ---------------------------------------------------------------- diagrams

fn dominates(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x >= y)
}

/// Points `a ∈ [0, bound]^i` whose slab `a × ℕ^{n−i}` avoids the diagram while
/// the previous prefix does not.
fn slab_bases(vertices: &[Vec<u32>], i: usize, bound: u32) -> Vec<Vec<u32>> {
    let clears = |a: &[u32]| !vertices.iter().any(|v| dominates(a, &v[..a.len()]));
    let mut out: Vec<Vec<u32>> = monomials_upto(i, bound * i as u32)
        .into_iter()
        .filter(|a| a.iter().all(|&x| x <= bound))
        .filter(|a| clears(a) && (i == 1 || !clears(&a[..i - 1])))
        .collect();
    out.sort();
    out
}

fn diagram_criterion(seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut accepted, mut points) = (0, 0usize);
    let mut attempts = 0;
    while accepted < 100 {
        attempts += 1;
        ensure(attempts < 20_000, || "could not sample 100 finite-type diagrams".into())?;
        let n = rng.gen_range(1..=4);
        let mut verts: Vec<Vec<u32>> = Vec::new();
        if rng.gen_bool(0.5) {
            for i in 0..n {
                let mut v = vec![0; n];
                v[i] = rng.gen_range(1..=4);
                verts.push(v);
            }
        }
        for _ in 0..rng.gen_range(1..=4) {
            verts.push((0..n).map(|_| rng.gen_range(0..=3)).collect());
        }
        verts.retain(|v| v.iter().any(|&x| x > 0));
        if verts.is_empty() {
            continue;
        }
        let dg = Diagram::from_exponents(n, verts.iter().map(|v| Exponent::new(v.clone()))).map_err(|e| e.to_string())?;
        ensure(dg.is_finite_type() == dg.finite_type_closed_form(), || format!("finite-type tests disagree on {verts:?}"))?;
        if !dg.is_finite_type() {
            continue;
        }
        accepted += 1;
        let vs: Vec<Vec<u32>> = dg.vertices().iter().map(|v| v.coords().to_vec()).collect();
        let bound = vs.iter().flatten().copied().max().unwrap_or(0) + 1;
        let dec = dg.decomposition().map_err(|e| e.to_string())?;
        for i in 1..=n {
            let expect = slab_bases(&vs, i, bound);
            ensure(expect.iter().all(|a| a.iter().all(|&x| x < bound)), || format!("{vs:?}: A_{i} leaves the box"))?;
            let mut got: Vec<Vec<u32>> = dec.a[i - 1].iter().map(|a| a.coords()[..i].to_vec()).collect();
            got.sort();
            ensure(got == expect, || format!("{vs:?}: A_{i} is {got:?}, expected {expect:?}"))?;
        }
        for a in monomials_upto(n, 10) {
            points += 1;
            let slabs = (1..=n).filter(|&i| dec.a[i - 1].iter().any(|b| b.coords()[..i] == a[..i])).count();
            let cells: Vec<_> = dec
                .cells
                .iter()
                .filter(|c| {
                    let k = c.level - 1;
                    (0..n).all(|l| if l < k { a[l] == c.base.get(l) } else { a[l] >= c.base.get(l) })
                })
                .collect();
            let in_delta = vs.iter().any(|v| dominates(&a, v));
            let ok = if in_delta {
                slabs == 0 && cells.len() == 1 && dominates(&a, &vs[cells[0].vertex])
            } else {
                slabs == 1 && cells.is_empty()
            };
            ensure(ok, || format!("{vs:?}: {a:?} lies in {slabs} slabs and {} cells", cells.len()))?;
        }
    }
    Ok(format!("100 diagrams ({attempts} sampled), {points} points partitioned"))
}

#[test]
fn criterion_2_diagrams() {
    report(2, "diagram partition", diagram_criterion(0x5eed_0002));
}

// ---------------------------------------------------------------- Hilbert-Samuel

fn random_ideal(rng: &mut ChaCha8Rng, n: usize) -> Vec<Series> {
    (0..rng.gen_range(1..=3))
        .map(|_| {
            let mut g = Series::zero(Q, n, hk::series::POLY);
            while g.is_zero() {
                for _ in 0..rng.gen_range(1..=3) {
                    let deg = rng.gen_range(1..=4);
                    g.add_term(Exponent::new(monomials(n, deg).choose(rng).unwrap().clone()), &nonzero_coeff(rng));
                }
            }
            g
        })
        .collect()
}

fn hs_criterion(seed: u64) -> Result<String, String> {
    const S: u32 = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ideals: Vec<(usize, Vec<Series>)> = (0..10)
        .map(|_| {
            let n = rng.gen_range(1..=3);
            (n, random_ideal(&mut rng, n))
        })
        .collect();
    ideals.push((2, vec![poly("x^2 - y^3", 2)]));
    for (k, (n, gens)) in ideals.iter().enumerate() {
        let ideal = IdealPresentation::standard(gens.clone(), S + 1).map_err(|e| e.to_string())?;
        let hs = hilbert_samuel_at(&ideal, &vec![Coeff::zero(); *n], S).map_err(|e| e.to_string())?;
        for s in 0..=S {
            let oracle = quotient_dim(gens, *n, s) as u128;
            ensure(hs[s as usize] == oracle, || format!("ideal {k}: H({s}) = {} but rank gives {oracle}", hs[s as usize]))?;
        }
    }
    let cusp = &ideals.last().unwrap().1;
    let ideal = IdealPresentation::standard(cusp.clone(), S + 1).map_err(|e| e.to_string())?;
    let hs = hilbert_samuel_at(&ideal, &[q(0), q(0)], S).map_err(|e| e.to_string())?;
    let expect: Vec<u128> = (0..=S).map(|s| 2 * u128::from(s) + 1).collect();
    ensure(hs == expect, || format!("cusp gives {hs:?}"))?;
    Ok(format!("10 random ideals and the cusp agree with the rank oracle for s ≤ {S}"))
}

#[test]
fn criterion_3_hilbert_samuel() {
    report(3, "Hilbert-Samuel two ways", hs_criterion(0x5eed_0003));
}

// ---------------------------------------------------------------- Stanley

fn random_module(rng: &mut ChaCha8Rng) -> (usize, usize, Vec<(u32, Vec<Series>)>) {
    let n = rng.gen_range(1..=3);
    let rank = rng.gen_range(1..=2);
    let rels = (0..rng.gen_range(0..=3))
        .map(|_| {
            let deg = rng.gen_range(1..=3);
            let mut entries: Vec<Series> = (0..rank).map(|_| random_form(rng, n, deg)).collect();
            if entries.iter().all(Series::is_zero) {
                entries[0] = Series::monomial(Q, Exponent::unit(n, 0).resized(n), q(1), hk::series::POLY).pow(deg);
            }
            (deg, entries)
        })
        .collect();
    (n, rank, rels)
}

fn stanley_criterion(seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut modules = vec![(2usize, 1usize, vec![(2u32, vec![poly("x^2", 2)])])];
    for _ in 0..8 {
        modules.push(random_module(&mut rng));
    }
    let mut bases = Vec::new();
    for (k, (n, rank, rels)) in modules.iter().enumerate() {
        let m = GradedModule::new(Q, *n, *rank, rels.iter().map(|(_, e)| e.clone()).collect())
            .map_err(|e| format!("module {k}: {e}"))?;
        let basis = stanley_decomposition(&m, seed + k as u64).map_err(|e| format!("module {k}: {e}"))?;
        for s in 0..=7 {
            let brute = graded_quotient_cumulative(*n, *rank, rels, s);
            ensure(basis.hilbert(s) == brute, || format!("module {k}: Σφ = {} at s={s}, brute {brute}", basis.hilbert(s)))?;
        }
        bases.push(basis);
    }
    let square: Vec<u128> = (0..=7).map(|s| bases[0].hilbert(s)).collect();
    ensure(square == (0..=7).map(|s| 2 * s + 1).collect::<Vec<u128>>(), || format!("R/(x²) gives {square:?}"))?;

    let (mut threshold_passes, mut instances) = (0, 0);
    while instances < 50 {
        let basis = &bases[instances % bases.len()];
        let candidates = perturbed_candidates(basis, &mut rng, instances % 3 != 0);
        let v = stabilization_check(basis, &candidates, None).map_err(|e| e.to_string())?;
        ensure(v.consistent(), || format!("instance {instances}: threshold passed, oracle failed at {:?}", v.oracle_failure))?;
        threshold_passes += usize::from(v.threshold_pass());
        instances += 1;
    }
    Ok(format!("{} modules match brute force; 50 stabilization instances, {threshold_passes} pass the threshold, 0 oracle failures", bases.len()))
}

#[test]
fn criterion_4_stanley() {
    report(4, "Stanley decompositions", stanley_criterion(0x5eed_0004));
}

// ---------------------------------------------------------------- Macaulay

fn axis_alphas(degrees: &[u32]) -> Vec<Exponent> {
    let k = degrees.len();
    (0..k)
        .map(|i| {
            let mut e = Exponent::zero(k);
            e.set(i, degrees[i]);
            e
        })
        .collect()
}

/// Minor of `J^s` on the indices divisible by at least two `x_i^{d_i}`.
fn extraneous_minor(jp: &JacobianProblem, s: u32, degrees: &[u32]) -> Coeff {
    let (idx, m) = jp.matrix(s, Variant::Full);
    let keep: Vec<usize> = (0..idx.len())
        .filter(|&r| (0..degrees.len()).filter(|&i| idx[r].get(i) >= degrees[i]).count() >= 2)
        .collect();
    dense_det(keep.iter().map(|&r| keep.iter().map(|&c| m[r][c].clone()).collect()).collect())
}

fn random_matrix(rng: &mut ChaCha8Rng, k: usize) -> (Vec<Vec<Coeff>>, Coeff) {
    loop {
        let a: Vec<Vec<Coeff>> = (0..k).map(|_| (0..k).map(|_| small_coeff(rng)).collect()).collect();
        let det = dense_det(a.clone());
        if !det.is_zero() {
            return (a, det);
        }
    }
}

fn macaulay_criterion(seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..20 {
        let a: Vec<Coeff> = (0..4).map(|_| small_coeff(&mut rng)).collect();
        let mut f1 = Series::zero(Q, 2, hk::series::POLY);
        let mut f2 = f1.clone();
        f1.add_term(exp(&[1, 0]), &a[0]);
        f1.add_term(exp(&[0, 1]), &a[1]);
        f2.add_term(exp(&[1, 0]), &a[2]);
        f2.add_term(exp(&[0, 1]), &a[3]);
        let jp = JacobianProblem::new(&[f1, f2], &axis_alphas(&[1, 1]), &[q(0), q(0)]).map_err(|e| e.to_string())?;
        let j1 = jp.det(1, Variant::Full);
        let hand = &a[0] * &a[3] - &a[1] * &a[2];
        ensure(j1 == hand, || format!("pair {case}: J¹ = {j1}, expected {hand}"))?;
        let j2 = jp.det(2, Variant::Full);
        ensure(j2 == &a[0] * &j1, || format!("pair {case}: J² = {j2}, a₁₁·J¹ = {}", &a[0] * &j1))?;
    }

    let (mut zero, mut nonzero) = (0, 0);
    for case in 0..20 {
        let k = if case % 2 == 0 { 2 } else { 3 };
        let degrees: Vec<u32> = (0..k).map(|_| rng.gen_range(1..=if k == 2 { 3 } else { 2 })).collect();
        let degenerate = rng.gen_bool(0.25);
        let forms: Vec<Series> = degrees
            .iter()
            .map(|&d| {
                let f = random_form(&mut rng, k, d);
                if degenerate {
                    let mut pure = Exponent::zero(k);
                    pure.set(0, d);
                    f.sub(&Series::monomial(Q, pure.clone(), f.coeff(&pure), hk::series::POLY))
                } else {
                    f
                }
            })
            .collect();
        let res = macaulay_resultant(&forms, seed + case).map_err(|e| format!("system {case}: {e}"))?;
        let big_d = degrees.iter().sum::<u32>() + 1 - k as u32;
        let jp = JacobianProblem::new(&forms, &axis_alphas(&degrees), &vec![q(0); k]).map_err(|e| e.to_string())?;
        for s in [big_d, big_d + 1] {
            let js = jp.det(s, Variant::Full);
            let minor = extraneous_minor(&jp, s, &degrees);
            ensure(js == &res * &minor, || format!("system {case}: J^{s} = {js} but Res·minor = {}", &res * &minor))?;
        }
        let parts = macaulay_parts(&forms).map_err(|e| e.to_string())?;
        ensure(parts.full == dense_det(jp.matrix(big_d, Variant::Full).1), || format!("system {case}: Macaulay matrix differs from J^d"))?;

        if k == 2 {
            let syl = sylvester(&forms[0], degrees[0], &forms[1], degrees[1]);
            ensure(res == syl, || format!("system {case}: Res = {res}, Sylvester {syl}"))?;
        } else {
            let (a, det_a) = random_matrix(&mut rng, k);
            let moved: Vec<Series> = forms.iter().map(|f| linear_change(f, &a)).collect();
            let res_moved = macaulay_resultant(&moved, seed + 100 + case).map_err(|e| e.to_string())?;
            let weight: u32 = degrees.iter().product();
            ensure(res_moved == &pow(&det_a, weight) * &res, || format!("system {case}: covariance fails"))?;
        }
        let product: u32 = degrees.iter().product();
        let length = artinian_length(&forms, &degrees, big_d);
        ensure((!res.is_zero()) == (length == Some(product as usize)), || {
            format!("system {case}: Res = {res} but dim K[x]/(F) = {length:?}, ∏dᵢ = {product}")
        })?;
        if res.is_zero() {
            zero += 1;
        } else {
            nonzero += 1;
        }
    }

    let bezout = [poly("x^2", 2), poly("y^3", 2)];
    let res = macaulay_resultant(&bezout, seed).map_err(|e| e.to_string())?;
    let length = artinian_length(&bezout, &[2, 3], 4);
    ensure(res == q(1) && length == Some(6), || format!("(x², y³): Res = {res}, length {length:?}"))?;
    Ok(format!("20 linear pairs; 20 systems ({nonzero} regular, {zero} degenerate); (x², y³) has length 6"))
}

#[test]
fn criterion_5_macaulay() {
    report(5, "Macaulay identities", macaulay_criterion(0x5eed_0005));
}

// ---------------------------------------------------------------- resolution

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn resolution_criterion() -> Result<String, String> {
    let budget = Duration::from_secs(10);
    let mut lines = Vec::new();

    let cusp = MarkedIdeal::new(vec![poly("x^2 - y^3", 2)], 2, vec![]).map_err(|e| e.to_string())?;
    let ((trace, report), took) = timed(|| {
        let t = resolve_marked(&cusp, Limits::default(), 0);
        let r = t.as_ref().ok().map(|t| verify_resolution(t, &cusp, VerifyOptions::default()));
        (t, r)
    });
    let trace = trace.map_err(|e| format!("cusp: {e}"))?;
    ensure(trace.blowups == 1, || format!("cusp used {} blow-ups", trace.blowups))?;
    ensure(report.unwrap().all_passed(), || "cusp trace fails verification".into())?;
    ensure(took < budget, || format!("cusp took {took:?}"))?;
    lines.push(format!("cusp 1 blow-up in {took:.2?}"));

    let mono = MarkedIdeal::with_divisor_coords(vec![poly("x^3*y^2", 2)], 4, &[0, 1]).map_err(|e| e.to_string())?;
    let ((trace, report), took) = timed(|| {
        let t = resolve_marked(&mono, Limits::default(), 0);
        let opts = VerifyOptions { variety_checks: false, ..Default::default() };
        let r = t.as_ref().ok().map(|t| verify_resolution(t, &mono, opts));
        (t, r)
    });
    let trace = trace.map_err(|e| format!("monomial: {e}"))?;
    let depths: Vec<usize> = trace.leaves().map(|l| l.depth).collect();
    ensure(depths.iter().all(|&d| d <= 2), || format!("monomial leaf depths {depths:?}"))?;
    ensure(report.unwrap().all_passed(), || "monomial trace fails verification".into())?;
    ensure(took < budget, || format!("monomial took {took:?}"))?;
    lines.push(format!("monomial leaf depths {depths:?} in {took:.2?}"));

    let umbrella = MarkedIdeal::new(vec![poly("x^2 - z*y^2", 3)], 2, vec![]).map_err(|e| e.to_string())?;
    let ((trace, report), took) = timed(|| {
        let t = resolve_marked(&umbrella, Limits::default(), 0);
        let r = t.as_ref().ok().map(|t| verify_resolution(t, &umbrella, VerifyOptions::default()));
        (t, r)
    });
    let trace = trace.map_err(|e| format!("umbrella: {e}"))?;
    let report = report.unwrap();
    for name in ["samuel_stratum", "normal_flatness", "bennett"] {
        let check = report.get(name).ok_or_else(|| format!("umbrella: no {name} check"))?;
        ensure(check.passed, || format!("umbrella {name}: {}", check.detail))?;
    }
    ensure(report.all_passed(), || format!("umbrella: {:?}", report.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>()))?;
    ensure(took < budget, || format!("umbrella took {took:?}"))?;
    lines.push(format!("umbrella {} blow-ups in {took:.2?}", trace.blowups));
    Ok(lines.join("; "))
}

#[test]
fn criterion_6_resolution() {
    report(6, "resolution", resolution_criterion());
}

// ---------------------------------------------------------------- standard basis along the stratum

fn samuel_basis_criterion() -> Result<String, String> {
    let cusp = vec![poly("x^2 - y^3", 2)];
    let origin = vec![vec![q(0), q(0)]];
    let good = check_samuel_basis(&cusp, &[exp(&[2])], &origin, 7).map_err(|e| e.to_string())?;
    ensure(good.iter().all(|v| v.all_pass()), || format!("cusp basis fails: {good:?}"))?;
    let wrong = check_samuel_basis(&cusp, &[exp(&[2, 0]), exp(&[0, 3])], &origin, 7).map_err(|e| e.to_string())?;
    let (cond, witness) = wrong[0].first_failure.clone().ok_or("wrong diagram accepted")?;
    ensure(cond == 1 && !wrong[0].conditions[0], || format!("wrong diagram fails condition {cond} first"))?;
    ensure(witness.starts_with("H(3) = 7") && witness.ends_with("gives 6"), || format!("witness {witness}"))?;
    let claimed = Diagram::from_exponents(2, [exp(&[2, 0]), exp(&[0, 3])]).map_err(|e| e.to_string())?;
    let profile = claimed.hs_profile(3).map_err(|e| e.to_string())?;
    let actual: Vec<u128> = (0..=3).map(|s| quotient_dim(&cusp, 2, s) as u128).collect();
    ensure(profile == vec![1, 3, 5, 6] && actual == vec![1, 3, 5, 7], || format!("{profile:?} vs {actual:?}"))?;
    Ok(format!("cusp passes all five; {{(2,0),(0,3)}} fails condition 1 at s=3 ({profile:?} vs {actual:?})"))
}

#[test]
fn criterion_7_samuel_basis() {
    report(7, "standard basis along the stratum", samuel_basis_criterion());
}

// ---------------------------------------------------------------- determinism

fn determinism_criterion() -> Result<String, String> {
    let run = || -> Result<Vec<u8>, String> {
        let out = Command::new(env!("CARGO_BIN_EXE_hk"))
            .args(["suite", "--json"])
            .env_remove("HK_SEED")
            .output()
            .map_err(|e| e.to_string())?;
        ensure(out.status.success(), || format!("hk suite exited with {}", out.status))?;
        Ok(out.stdout)
    };
    let (a, b) = (run()?, run()?);
    ensure(!a.is_empty() && a == b, || "two runs differ".into())?;
    let parsed: serde_json::Value = serde_json::from_slice(&a).map_err(|e| e.to_string())?;
    ensure(parsed.get("schema_version").is_some(), || "missing schema_version".into())?;
    Ok(format!("{} identical bytes", a.len()))
}

#[test]
fn criterion_8_determinism() {
    report(8, "determinism", determinism_criterion());
}

