//! Division by a family of series with prescribed initial exponents.
//!
//! Two engines share one [`DivisionProblem`]:
//!
//! * [`formal_divide`] runs the monomial-split fixed point. Every term of the
//!   residual is either sent to the remainder (its main-variable part lies in Γ)
//!   or absorbed by the divisor owning its cell, and the residual is replaced by
//!   what the divisor tails push back. Terms are ranked by an order in which each
//!   divisor's leading monomial is `x^{αⱼ}`, with parameters weighted heavily
//!   enough to make that true, so the residual strictly climbs and leaves the
//!   degree-`D` window.
//! * [`generalized_divide`] solves one square linear system per total degree.
//!   It needs every divisor to have no terms below degree `|αⱼ|`, and reports the
//!   first degree whose system is singular.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::exponents::{monomials_of_degree, Exponent, MonomialOrder};
use crate::field::{Coeff, FieldSpec};
use crate::linalg::{solve_sparse, SparseRow};
use crate::series::{Series, SeriesError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DivisionError {
    #[error("no divisors given")]
    NoDivisors,
    #[error("the order must be positive and normalized")]
    BadOrder,
    #[error("divisor {index}: initial exponent is {found}, expected {expected}")]
    InitialExponentMismatch { index: usize, expected: Exponent, found: Exponent },
    #[error("divisor {index} vanishes when the parameters are set to zero")]
    ZeroDivisor { index: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("linear system at degree {0} is singular")]
    JacobianSingular(u32),
    #[error("divisor {index} has terms of degree below its initial exponent")]
    OrderDeficit { index: usize },
    #[error("quotient {index} is not a unit at the origin")]
    UnitQuotientCheckFailed { index: usize },
    #[error("prepared generators fail to regenerate divisor {index}")]
    CertificationFailed { index: usize },
    #[error("internal identity check failed: {0}")]
    IdentityFailed(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

impl DivisionError {
    pub fn code(&self) -> &'static str {
        match self {
            DivisionError::NoDivisors => "division.no_divisors",
            DivisionError::BadOrder => "division.bad_order",
            DivisionError::InitialExponentMismatch { .. } => "division.initial_exponent_mismatch",
            DivisionError::ZeroDivisor { .. } => "division.zero_divisor",
            DivisionError::Shape(_) => "division.shape",
            DivisionError::JacobianSingular(_) => "division.jacobian_singular",
            DivisionError::OrderDeficit { .. } => "division.order_deficit",
            DivisionError::UnitQuotientCheckFailed { .. } => "division.unit_quotient_check_failed",
            DivisionError::CertificationFailed { .. } => "division.certification_failed",
            DivisionError::IdentityFailed(_) => "division.identity_failed",
            DivisionError::Series(e) => e.code(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DivisionProblem {
    field: FieldSpec,
    order: MonomialOrder,
    n_main: usize,
    n_param: usize,
    trunc: u32,
    divisors: Vec<Series>,
    alphas: Vec<Exponent>,
    /// Divisor indices sorted reverse-lex by initial exponent (stable).
    scan: Vec<usize>,
    param_weight: u64,
}

/// Which fixed-point schedule to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    /// Process the whole residual each round.
    Batch,
    /// Process only the smallest residual term each round.
    TermByTerm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Engine {
    FixedPoint,
    Graded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivisionOutput {
    pub quotients: Vec<Series>,
    pub remainder: Series,
    pub engine: Engine,
}

impl DivisionProblem {
    /// `divisors` are `(f, α)` pairs; `order` acts on the main variables.
    pub fn new(order: &MonomialOrder, divisors: Vec<(Series, Exponent)>, trunc: u32) -> Result<Self, DivisionError> {
        let flags = order.flags();
        if !flags.positive || !flags.normalized {
            return Err(DivisionError::BadOrder);
        }
        let order = order.completed();
        let first = divisors.first().ok_or(DivisionError::NoDivisors)?;
        let (field, n_main, n_param) = (first.0.field(), first.0.n_main(), first.0.n_param());
        if order.dim() != n_main {
            return Err(DivisionError::Shape(format!("order has {} variables, divisors {n_main}", order.dim())));
        }
        let mut fs = Vec::new();
        let mut alphas = Vec::new();
        for (index, (f, alpha)) in divisors.into_iter().enumerate() {
            if f.field() != field || f.n_main() != n_main || f.n_param() != n_param || alpha.dim() != n_main {
                return Err(DivisionError::Shape(format!("divisor {index} has a different shape")));
            }
            let f = f.with_trunc(trunc);
            let at_zero = f.params_to_zero();
            let (lead, c) = at_zero.leading(&order).map_err(|_| DivisionError::ZeroDivisor { index })?;
            let lead_main = Exponent::new(lead.coords()[..n_main].to_vec());
            if lead_main != alpha {
                return Err(DivisionError::InitialExponentMismatch { index, expected: alpha, found: lead_main });
            }
            let inv = field.inv(&c).map_err(|_| DivisionError::ZeroDivisor { index })?;
            fs.push(f.scale(&inv));
            alphas.push(alpha);
        }
        let mut scan: Vec<usize> = (0..alphas.len()).collect();
        scan.sort_by(|&a, &b| alphas[a].cmp(&alphas[b]));
        let param_weight = alphas.iter().map(|a| order.values(a)[0]).max().unwrap_or(0) + 1;
        Ok(DivisionProblem {
            field,
            order,
            n_main,
            n_param,
            trunc,
            divisors: fs,
            alphas,
            scan,
            param_weight,
        })
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn order(&self) -> &MonomialOrder {
        &self.order
    }

    pub fn divisors(&self) -> &[Series] {
        &self.divisors
    }

    pub fn alphas(&self) -> &[Exponent] {
        &self.alphas
    }

    pub fn n_main(&self) -> usize {
        self.n_main
    }

    pub fn n_param(&self) -> usize {
        self.n_param
    }

    fn main_part(&self, e: &Exponent) -> Exponent {
        Exponent::new(e.coords()[..self.n_main].to_vec())
    }

    fn full_alpha(&self, j: usize) -> Exponent {
        self.alphas[j].resized(self.n_main + self.n_param)
    }

    /// The divisor whose cell contains the main-variable exponent, if any.
    pub fn locate(&self, main: &Exponent) -> Option<usize> {
        self.scan.iter().copied().find(|&j| main.dominates(&self.alphas[j]))
    }

    /// Whether the main part of `e` shifted by `αⱼ` lands in divisor `j`'s cell.
    pub fn in_quotient_support(&self, j: usize, e: &Exponent) -> bool {
        self.locate(&self.main_part(e).add(&self.alphas[j])) == Some(j)
    }

    pub fn in_remainder_support(&self, e: &Exponent) -> bool {
        self.locate(&self.main_part(e)).is_none()
    }

    /// Sort key in which each divisor's leading monomial is `x^{αⱼ}`.
    fn key(&self, e: &Exponent) -> (Vec<u64>, Exponent) {
        let main = self.main_part(e);
        let v: u64 = e.coords()[self.n_main..].iter().map(|&a| u64::from(a)).sum();
        let mut vals = self.order.values(&main);
        vals[0] += self.param_weight * v;
        vals.push(v);
        (vals, e.clone())
    }

    fn shell(&self) -> Series {
        Series::zero_with_params(self.field, self.n_main, self.n_param, self.trunc)
    }

    fn check_input(&self, g: &Series) -> Result<Series, DivisionError> {
        if g.field() != self.field || g.n_main() != self.n_main || g.n_param() != self.n_param {
            return Err(DivisionError::Shape("dividend shape differs from the divisors".into()));
        }
        Ok(g.with_trunc(self.trunc))
    }

    /// `g − Σ hᵢ fᵢ − r` modulo the truncation.
    pub fn defect(&self, g: &Series, out: &DivisionOutput) -> Series {
        let mut acc = g.with_trunc(self.trunc).sub(&out.remainder);
        for (h, f) in out.quotients.iter().zip(&self.divisors) {
            acc = acc.sub(&h.mul(f));
        }
        acc
    }

    /// Checks the support contracts on quotients and remainder.
    pub fn contracts_hold(&self, out: &DivisionOutput) -> Result<(), String> {
        for (j, h) in out.quotients.iter().enumerate() {
            if let Some(bad) = h.supd().into_iter().find(|e| !self.in_quotient_support(j, e)) {
                return Err(format!("quotient {j} has {bad} in its differential support"));
            }
        }
        if let Some(bad) = out.remainder.supd().into_iter().find(|e| !self.in_remainder_support(e)) {
            return Err(format!("remainder has {bad} in its differential support"));
        }
        Ok(())
    }

    fn finish(&self, g: &Series, out: DivisionOutput) -> Result<DivisionOutput, DivisionError> {
        let defect = self.defect(g, &out);
        if !defect.is_zero() {
            return Err(DivisionError::IdentityFailed(format!("nonzero defect {defect}")));
        }
        self.contracts_hold(&out).map_err(DivisionError::IdentityFailed)?;
        Ok(out)
    }
}

/// Fixed-point division; see the module docs.
pub fn formal_divide(p: &DivisionProblem, g: &Series, schedule: Schedule) -> Result<DivisionOutput, DivisionError> {
    let g = p.check_input(g)?;
    let mut exact = g.is_exact() && p.divisors.iter().all(Series::is_exact);
    let tails: Vec<Series> = (0..p.divisors.len())
        .map(|j| {
            let mut t = p.divisors[j].clone();
            t.add_term(p.full_alpha(j), &p.field.from_int(-1));
            t
        })
        .collect();
    let mut residual: BTreeMap<(Vec<u64>, Exponent), Coeff> =
        g.terms().map(|(e, c)| (p.key(e), c.clone())).collect();
    let mut quotients = vec![p.shell(); p.divisors.len()];
    let mut remainder = p.shell();
    let mut last_min: Option<(Vec<u64>, Exponent)> = None;
    let budget = 4 * crate::diagrams::lattice_count(p.n_main + p.n_param, i128::from(p.trunc.min(64))) as usize + 16;
    let mut rounds = 0usize;
    let push = |residual: &mut BTreeMap<(Vec<u64>, Exponent), Coeff>, exact: &mut bool, e: Exponent, c: Coeff| {
        if e.degree() > p.trunc {
            *exact = false;
            return;
        }
        let k = p.key(&e);
        let v = residual.entry(k.clone()).or_insert_with(Coeff::zero);
        *v = p.field.add(v, &c);
        if v.is_zero() {
            residual.remove(&k);
        }
    };
    while let Some((min_key, _)) = residual.iter().next() {
        let min_key = min_key.clone();
        if let Some(prev) = &last_min {
            if &min_key <= prev {
                return Err(DivisionError::JacobianSingular(min_key.1.degree()));
            }
        }
        rounds += 1;
        if rounds > budget {
            return Err(DivisionError::JacobianSingular(min_key.1.degree()));
        }
        let batch: Vec<((Vec<u64>, Exponent), Coeff)> = match schedule {
            Schedule::Batch => std::mem::take(&mut residual).into_iter().collect(),
            Schedule::TermByTerm => {
                let c = residual.remove(&min_key).expect("present");
                vec![(min_key.clone(), c)]
            }
        };
        last_min = Some(min_key);
        let mut fresh: BTreeMap<(Vec<u64>, Exponent), Coeff> = BTreeMap::new();
        for ((_, beta), c) in batch {
            match p.locate(&p.main_part(&beta)) {
                None => remainder.add_term(beta, &c),
                Some(j) => {
                    let gamma = beta.checked_sub(&p.full_alpha(j)).expect("cell member dominates α");
                    quotients[j].add_term(gamma.clone(), &c);
                    let minus_c = p.field.neg(&c);
                    for (t, tc) in tails[j].terms() {
                        push(&mut fresh, &mut exact, gamma.add(t), p.field.mul(&minus_c, tc));
                    }
                }
            }
        }
        for (k, c) in fresh {
            push(&mut residual, &mut exact, k.1, c);
        }
    }
    if !exact {
        for q in quotients.iter_mut() {
            q.mark_inexact();
        }
        remainder.mark_inexact();
    }
    p.finish(&g, DivisionOutput { quotients, remainder, engine: Engine::FixedPoint })
}

/// Degree-by-degree linear solve; see the module docs.
pub fn generalized_divide(p: &DivisionProblem, g: &Series) -> Result<DivisionOutput, DivisionError> {
    let g = p.check_input(g)?;
    let n = p.n_main + p.n_param;
    for (index, f) in p.divisors.iter().enumerate() {
        if f.ord()? < p.alphas[index].degree() {
            return Err(DivisionError::OrderDeficit { index });
        }
    }
    let mut quotients = vec![p.shell(); p.divisors.len()];
    let mut remainder = p.shell();
    let mut residual = g.clone();
    let top = if p.trunc == crate::series::POLY {
        return Err(DivisionError::Shape("graded division needs a finite truncation".into()));
    } else {
        p.trunc
    };
    for s in 0..=top {
        let rows_idx: Vec<Exponent> = monomials_of_degree(n, s);
        let row_of: BTreeMap<&Exponent, usize> = rows_idx.iter().enumerate().map(|(i, e)| (e, i)).collect();
        // Columns: (Some(j), γ) for quotient j, (None, β) for the remainder.
        let mut cols: Vec<(Option<usize>, Exponent)> = Vec::new();
        for (j, alpha) in p.alphas.iter().enumerate() {
            let d = alpha.degree();
            if d > s {
                continue;
            }
            for gamma in monomials_of_degree(n, s - d) {
                if p.in_quotient_support(j, &gamma) {
                    cols.push((Some(j), gamma));
                }
            }
        }
        for beta in &rows_idx {
            if p.in_remainder_support(beta) {
                cols.push((None, beta.clone()));
            }
        }
        if cols.len() != rows_idx.len() {
            return Err(DivisionError::IdentityFailed(format!(
                "degree {s}: {} unknowns for {} equations",
                cols.len(),
                rows_idx.len()
            )));
        }
        let mut rows: Vec<SparseRow> = vec![SparseRow::new(); rows_idx.len()];
        for (k, (who, e)) in cols.iter().enumerate() {
            match who {
                None => {
                    rows[row_of[e]].insert(k, Coeff::one());
                }
                Some(j) => {
                    let f = &p.divisors[*j];
                    for (t, c) in f.terms() {
                        if t.degree() != p.alphas[*j].degree() {
                            continue;
                        }
                        let target = e.add(t);
                        let entry = rows[row_of[&target]].entry(k).or_insert_with(Coeff::zero);
                        *entry = p.field.add(entry, c);
                    }
                }
            }
        }
        for r in rows.iter_mut() {
            r.retain(|_, v| !v.is_zero());
        }
        let rhs: Vec<Coeff> = rows_idx.iter().map(|e| residual.coeff(e)).collect();
        if rhs.iter().all(Zero::is_zero) {
            continue;
        }
        let x = solve_sparse(&p.field, rows, rhs, cols.len()).ok_or(DivisionError::JacobianSingular(s))?;
        for ((who, e), v) in cols.into_iter().zip(x) {
            if v.is_zero() {
                continue;
            }
            match who {
                None => {
                    remainder.add_term(e.clone(), &v);
                    residual.add_term(e, &p.field.neg(&v));
                }
                Some(j) => {
                    quotients[j].add_term(e.clone(), &v);
                    residual = residual.sub(&p.divisors[j].mul_monomial(&e, &v));
                }
            }
        }
    }
    if !g.is_exact() || !residual.is_exact() {
        for q in quotients.iter_mut() {
            q.mark_inexact();
        }
        remainder.mark_inexact();
    }
    p.finish(&g, DivisionOutput { quotients, remainder, engine: Engine::Graded })
}

/// Fixed point without parameters or when a divisor has low-degree parameter
/// terms; graded solve otherwise.
pub fn divide(p: &DivisionProblem, g: &Series) -> Result<DivisionOutput, DivisionError> {
    if p.n_param == 0 {
        return formal_divide(p, g, Schedule::Batch);
    }
    match generalized_divide(p, g) {
        Err(DivisionError::OrderDeficit { .. }) => formal_divide(p, g, Schedule::Batch),
        other => other,
    }
}

/// Replaces each divisor by `x^{αᵢ} − r(x^{αᵢ})`, certified to generate the same
/// ideal modulo the truncation.
pub fn prepare(p: &DivisionProblem) -> Result<Vec<Series>, DivisionError> {
    let n = p.n_main + p.n_param;
    let mut prepared = Vec::new();
    for i in 0..p.divisors.len() {
        let mono = Series::monomial(p.field, p.full_alpha(i), Coeff::one(), p.trunc).with_blocks(p.n_main);
        let out = divide(p, &mono)?;
        let unit = out.quotients[i].coeff(&Exponent::zero(n));
        if unit.is_zero() {
            return Err(DivisionError::UnitQuotientCheckFailed { index: i });
        }
        prepared.push(mono.sub(&out.remainder));
    }
    let q = DivisionProblem::new(
        &p.order,
        prepared.iter().cloned().zip(p.alphas.iter().cloned()).collect(),
        p.trunc,
    )?;
    for (index, f) in p.divisors.iter().enumerate() {
        let out = divide(&q, f)?;
        if !out.remainder.is_zero() {
            return Err(DivisionError::CertificationFailed { index });
        }
    }
    Ok(prepared)
}
