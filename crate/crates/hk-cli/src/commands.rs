use hk::diagrams::Diagram;
use hk::division::{divide as run_division, DivisionProblem};
use hk::exponents::{Exponent, MonomialOrder};
use hk::field::format_coeff;
use hk::jacobians::{jr_condition, macaulay_parts, macaulay_resultant, JacobianProblem, Variant};
use hk::resolution::{resolve_marked, verify_resolution, Limits, MarkedIdeal, ResolutionTrace, VerifyOptions};
use hk::series::{default_names, Series, POLY};
use hk::stanley::{hilbert_brute, stanley_decomposition, GradedModule};
use hk::stdbasis::{check_samuel_basis, generic_coordinates, hilbert_samuel_at, standard_basis, IdealPresentation};
use hk::Coeff;
use serde_json::{json, Value};

use crate::input;
use crate::{CliError, DiagramArgs, DivideArgs, HilbertArgs, IdealArgs, JacobianArgs, Report, ResolveArgs, RunConfig, StanleyArgs, VerifyArgs};

fn coords(e: &Exponent) -> Value {
    json!(e.coords())
}

fn series_value(s: &Series, names: &[String]) -> Value {
    json!({"text": s.render(Some(names)), "series": s.to_json()})
}

fn matrix_value(m: &[Vec<Coeff>]) -> Value {
    json!(m.iter().map(|r| r.iter().map(format_coeff).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn order_for(text: Option<&str>, n: usize) -> Result<MonomialOrder, CliError> {
    Ok(match text {
        Some(t) => MonomialOrder::parse(n, t)?,
        None => MonomialOrder::standard(n),
    })
}

fn profile_text(hs: &[u128]) -> String {
    hs.iter().map(u128::to_string).collect::<Vec<_>>().join(", ")
}

pub fn diagram(a: &DiagramArgs) -> Result<Report, CliError> {
    let verts = input::exponents(&a.vertices)?;
    let n = verts[0].dim();
    let dg = Diagram::from_exponents(n, verts)?;
    let mut text = vec![format!(
        "vertices: {}",
        dg.vertices().iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
    )];
    let mut result = json!({
        "n": n,
        "vertices": dg.vertices().iter().map(coords).collect::<Vec<_>>(),
        "finite_type": dg.is_finite_type(),
        "monotone": dg.is_monotone(),
    });
    let vmax = dg.vertices().iter().map(Exponent::degree).max().unwrap_or(0);
    let default_s = match dg.decomposition() {
        Ok(dec) => {
            let a_sets: Vec<Vec<Value>> = dec
                .a
                .iter()
                .enumerate()
                .map(|(i, set)| set.iter().map(|e| json!(&e.coords()[..=i])).collect())
                .collect();
            let bbar: Vec<Vec<Value>> = (1..=n).map(|l| dec.bbar(l).iter().map(coords).collect()).collect();
            let d = dg.d_of()?;
            for (i, set) in a_sets.iter().enumerate() {
                text.push(format!("A_{}: {}", i + 1, serde_json::to_string(set).expect("json")));
            }
            for (i, set) in bbar.iter().enumerate() {
                text.push(format!("B_{}: {}", i + 1, serde_json::to_string(set).expect("json")));
            }
            text.push(format!("d = {d}"));
            result["a"] = json!(a_sets);
            result["bbar"] = json!(bbar);
            result["cells"] = json!(dec.cells);
            result["d"] = json!(d);
            u64::from(d.max(vmax)) + n as u64 + 1
        }
        Err(e) => {
            text.push(format!("not of finite type: {e}"));
            u64::from(vmax) + n as u64 + 1
        }
    };
    let hs = dg.hs_profile(a.s_max.unwrap_or(default_s))?;
    text.push(format!("H(0..): {}", profile_text(&hs)));
    result["hilbert_samuel"] = json!(hs);
    Ok(Report { result, text, ok: true })
}

pub fn divide(a: &DivideArgs, cfg: &RunConfig) -> Result<Report, CliError> {
    let divisor_text: Vec<String> = a.divisors.iter().map(|d| input::load(d)).collect::<Result<_, _>>()?;
    let dividend = input::load(&a.dividend)?;
    let mut all: Vec<&str> = divisor_text.iter().map(String::as_str).collect();
    all.push(&dividend);
    let (n_inferred, m) = input::infer_vars(&all);
    let n = a.n.unwrap_or(n_inferred);
    let order = order_for(a.order.as_deref(), n)?;
    let complete = order.completed();
    let mut divisors = Vec::new();
    for text in &divisor_text {
        for f in input::polys(text, cfg.field, n, m, cfg.trunc)? {
            let (lead, _) = f.params_to_zero().leading(&complete)?;
            let alpha = Exponent::new(lead.coords()[..n].to_vec());
            divisors.push((f, alpha));
        }
    }
    let g = input::polys(&dividend, cfg.field, n, m, cfg.trunc)?.remove(0);
    let problem = DivisionProblem::new(&order, divisors, cfg.trunc)?;
    let out = run_division(&problem, &g)?;
    let names = default_names(n, m);
    let identity = problem.defect(&g, &out).is_zero();
    let supports = problem.contracts_hold(&out);
    let mut text = vec![format!("engine: {:?}", out.engine)];
    for (j, (h, alpha)) in out.quotients.iter().zip(problem.alphas()).enumerate() {
        text.push(format!("h{} (α = {alpha}): {}", j + 1, h.render(Some(&names))));
    }
    text.push(format!("r: {}", out.remainder.render(Some(&names))));
    text.push(format!("identity: {identity}; supports: {}", supports.as_ref().map_or_else(|e| e.clone(), |_| "ok".into())));
    let result = json!({
        "n": n,
        "m": m,
        "engine": out.engine,
        "alphas": problem.alphas().iter().map(coords).collect::<Vec<_>>(),
        "quotients": out.quotients.iter().map(|h| series_value(h, &names)).collect::<Vec<_>>(),
        "remainder": series_value(&out.remainder, &names),
        "contracts": {"identity": identity, "supports": supports.is_ok(), "detail": supports.err()},
    });
    let ok = identity && result["contracts"]["supports"] == json!(true);
    Ok(Report { result, text, ok })
}

pub fn stdbasis(a: &IdealArgs, cfg: &RunConfig) -> Result<Report, CliError> {
    let text_in = input::load(&a.ideal)?;
    let n = a.n.unwrap_or(input::infer_vars(&[&text_in]).0);
    let gens = input::polys(&text_in, cfg.field, n, 0, cfg.trunc)?;
    let mut ideal = IdealPresentation::new(gens, &order_for(a.order.as_deref(), n)?, cfg.trunc)?;
    let mut change = None;
    if a.generic {
        let (c, moved, _) = generic_coordinates(&ideal, cfg.seed)?;
        change = Some(c);
        ideal = moved;
    }
    let report = standard_basis(&ideal)?;
    let names = default_names(n, 0);
    let hs = report.diagram.hs_profile(u64::from(cfg.trunc))?;
    let mut text = vec![format!(
        "diagram: {}",
        report.diagram.vertices().iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
    )];
    for (v, f) in report.diagram.vertices().iter().zip(&report.basis) {
        text.push(format!("{v}: {}", f.render(Some(&names))));
    }
    text.push(format!("H(0..{}): {}", cfg.trunc, profile_text(&hs)));
    text.push(format!("exact through degree {}", report.certificate.complete_to_degree));
    let result = json!({
        "n": n,
        "change": change.as_deref().map(matrix_value),
        "vertices": report.diagram.vertices().iter().map(coords).collect::<Vec<_>>(),
        "monotone": report.diagram.is_monotone(),
        "basis": report.basis.iter().map(|f| series_value(f, &names)).collect::<Vec<_>>(),
        "hilbert_samuel": hs,
        "certificate": report.certificate,
    });
    Ok(Report { result, text, ok: true })
}

pub fn hilbert(a: &HilbertArgs, cfg: &RunConfig) -> Result<Report, CliError> {
    let text_in = input::load(&a.ideal)?;
    let n = a.n.unwrap_or(input::infer_vars(&[&text_in]).0);
    let gens = input::polys(&text_in, cfg.field, n, 0, POLY)?;
    let q = input::point(a.point.as_deref(), cfg.field, n)?;
    let ideal = IdealPresentation::standard(gens, cfg.trunc.max(a.s_max + 1))?;
    let hs = hilbert_samuel_at(&ideal, &q, a.s_max)?;
    let result = json!({
        "n": n,
        "point": q.iter().map(format_coeff).collect::<Vec<_>>(),
        "hilbert_samuel": hs,
    });
    Ok(Report { result, text: vec![format!("H(0..{}): {}", a.s_max, profile_text(&hs))], ok: true })
}

pub fn stanley(a: &StanleyArgs, cfg: &RunConfig) -> Result<Report, CliError> {
    let module = GradedModule::from_json(&input::load(&a.module)?, cfg.field)?;
    let basis = stanley_decomposition(&module, cfg.seed)?;
    let n = module.nvars();
    let ring = |i: usize| -> String {
        let names = default_names(n, 0);
        format!("K[{}]", names[n - i..].join(","))
    };
    let mut text: Vec<String> = basis
        .entries
        .iter()
        .map(|e| format!("{} · {} (degree {})", e.render(), ring(e.ring_index), e.degree))
        .collect();
    text.push(format!("verified through degree {}", basis.verified_to));
    let mut ok = true;
    let mut brute = Value::Null;
    if let Some(bound) = a.bound {
        let rows: Vec<Value> = (0..=bound)
            .map(|s| {
                let (stanley, direct) = (basis.hilbert(s), hilbert_brute(&basis.module, s));
                ok &= stanley == direct;
                json!({"s": s, "stanley": stanley, "brute": direct})
            })
            .collect();
        text.push(format!("Σφ matches brute force through {bound}: {ok}"));
        brute = json!(rows);
    }
    let result = json!({
        "change": matrix_value(&basis.change),
        "entries": basis.entries.iter().map(|e| json!({
            "generator": e.render(),
            "ring_index": e.ring_index,
            "degree": e.degree,
        })).collect::<Vec<_>>(),
        "verified_to": basis.verified_to,
        "brute_force": brute,
    });
    Ok(Report { result, text, ok })
}

pub fn jacobian(a: &JacobianArgs, cfg: &RunConfig) -> Result<Report, CliError> {
    let text_in = input::load(&a.functions)?;
    let n = a.n.unwrap_or(input::infer_vars(&[&text_in]).0);
    let fs = input::polys(&text_in, cfg.field, n, 0, POLY)?;
    if a.resultant {
        let parts = macaulay_parts(&fs)?;
        let res = macaulay_resultant(&fs, cfg.seed)?;
        let result = json!({
            "degree": parts.degree,
            "macaulay_determinant": format_coeff(&parts.full),
            "extraneous_minor": format_coeff(&parts.extraneous),
            "resultant": format_coeff(&res),
        });
        let text = vec![
            format!("Macaulay degree {}: det = {}, extraneous = {}", parts.degree, format_coeff(&parts.full), format_coeff(&parts.extraneous)),
            format!("Res = {}", format_coeff(&res)),
        ];
        return Ok(Report { result, text, ok: true });
    }
    let alphas = input::exponents(a.alphas.as_deref().ok_or_else(|| CliError::Usage("--alphas is required".into()))?)?;
    let q = input::point(a.point.as_deref(), cfg.field, n)?;
    let jp = JacobianProblem::new(&fs, &alphas, &q)?;
    let s_max = match a.s_max {
        Some(s) => s,
        None => jp.diagram().d_of()? + 1,
    };
    let mut text = Vec::new();
    let rows: Vec<Value> = (0..=s_max)
        .map(|s| {
            let (full, reduced) = (jp.det(s, Variant::Full), jp.det(s, Variant::Reduced));
            text.push(format!("s = {s}: J = {}, J⁰ = {}", format_coeff(&full), format_coeff(&reduced)));
            let mut row = json!({"s": s, "full": format_coeff(&full), "reduced": format_coeff(&reduced)});
            if a.matrices {
                let (idx, m) = jp.matrix(s, Variant::Full);
                for (e, r) in idx.iter().zip(&m) {
                    let cells: Vec<String> = r.iter().map(format_coeff).collect();
                    text.push(format!("  {e}: [{}]", cells.join(", ")));
                }
                row["index"] = json!(idx.iter().map(coords).collect::<Vec<_>>());
                row["matrix"] = matrix_value(&m);
            }
            row
        })
        .collect();
    let jr = jr_condition(&fs, &alphas, &q, cfg.seed);
    text.push(match &jr {
        Ok(v) => format!("JR = {}", format_coeff(v)),
        Err(e) => format!("JR unavailable: {e}"),
    });
    let result = json!({
        "table": rows,
        "jr": jr.as_ref().ok().map(format_coeff),
        "jr_error": jr.as_ref().err().map(|e| json!({"code": e.code(), "message": e.to_string()})),
    });
    Ok(Report { result, text, ok: true })
}

fn marked_input(a: &ResolveArgs, cfg: &RunConfig) -> Result<(MarkedIdeal, Limits), CliError> {
    let text_in = input::load(&a.ideal)?;
    let n = a.n.unwrap_or(input::infer_vars(&[&text_in]).0);
    let gens = input::polys(&text_in, cfg.field, n, 0, POLY)?;
    let names = default_names(n, 0);
    let e = match &a.e {
        Some(t) => input::coordinates(t, &names)?,
        None => Vec::new(),
    };
    let marked = MarkedIdeal::with_divisor_coords(gens, a.mu, &e)?;
    let mut limits = Limits::default();
    if let Some(v) = a.max_blowups {
        limits.max_blowups = v;
    }
    if let Some(v) = a.max_depth {
        limits.max_depth = v;
    }
    if let Some(v) = a.max_charts {
        limits.max_charts = v;
    }
    Ok((marked, limits))
}

fn trace_text(trace: &ResolutionTrace) -> Vec<String> {
    let mut text = vec![format!("blow-ups: {}, max depth {}", trace.blowups, trace.max_depth())];
    for (node, center) in trace.centers() {
        text.push(format!("node {node}: center {}", trace.render_center(&center)));
    }
    text.extend(trace.summary());
    text
}

pub fn resolve(a: &ResolveArgs, cfg: &RunConfig) -> Result<Report, CliError> {
    let (marked, limits) = marked_input(a, cfg)?;
    let trace = resolve_marked(&marked, limits, cfg.seed)?;
    let mut result = trace.to_json();
    result["summary"] = json!(trace.summary());
    Ok(Report { text: trace_text(&trace), ok: trace.all_resolved(), result })
}

pub fn verify(a: &VerifyArgs, cfg: &RunConfig) -> Result<Report, CliError> {
    if let Some(alphas) = &a.alphas {
        let text_in = input::load(&a.marked.ideal)?;
        let n = a.marked.n.unwrap_or(input::infer_vars(&[&text_in]).0);
        let basis = input::polys(&text_in, cfg.field, n, 0, POLY)?;
        let alphas = input::exponents(alphas)?;
        let pts = input::points(a.points.as_deref(), cfg.field, n)?;
        let verdicts = check_samuel_basis(&basis, &alphas, &pts, cfg.seed)?;
        let ok = verdicts.iter().all(|v| v.all_pass());
        let text = verdicts
            .iter()
            .map(|v| match &v.first_failure {
                None => format!("({}): all five conditions hold", v.point.join(", ")),
                Some((c, why)) => format!("({}): condition {c} fails: {why}", v.point.join(", ")),
            })
            .collect();
        return Ok(Report { result: json!({"points": verdicts}), text, ok });
    }
    let (marked, limits) = marked_input(&a.marked, cfg)?;
    let trace = resolve_marked(&marked, limits, cfg.seed)?;
    let opts = VerifyOptions { variety_checks: !a.skip_variety, ..Default::default() };
    let report = verify_resolution(&trace, &marked, opts);
    let mut text = trace_text(&trace);
    for c in &report.checks {
        text.push(format!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail));
    }
    let result = json!({"blowups": trace.blowups, "summary": trace.summary(), "checks": report.checks});
    Ok(Report { result, text, ok: report.all_passed() })
}
