//! Truncated power series with exact coefficients.
//!
//! A [`Series`] is a finite map from exponents to nonzero coefficients with a
//! truncation degree `D`: only terms of total degree `≤ D` are kept, so the
//! value represents a class modulo `m^{D+1}`. The `exact` flag records whether
//! the map is also a genuine polynomial, i.e. no operation has discarded a term.
//! Polynomials that should never be truncated use [`POLY`] as their degree.
//!
//! Variables come in two blocks: `n_main` main variables followed by
//! `n_param` parameters. Most operations ignore the split; division and the
//! Jacobian code use it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exponents::{Exponent, MonomialOrder};
use crate::field::{format_coeff, parse_coeff, Coeff, FieldError, FieldSpec};
use crate::linalg::determinant;

/// Truncation degree used for genuine polynomials.
pub const POLY: u32 = u32::MAX;

/// Truncation degree used when none is given.
pub const DEFAULT_TRUNC: u32 = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("operation requires a nonzero series")]
    ZeroSeries,
    #[error("variable count mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(FieldSpec, FieldSpec),
    #[error("substitution matrix is singular")]
    SingularMatrix,
    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("malformed series JSON: {0}")]
    Json(String),
}

impl SeriesError {
    pub fn code(&self) -> &'static str {
        match self {
            SeriesError::ZeroSeries => "series.zero",
            SeriesError::DimensionMismatch(..) => "series.dimension_mismatch",
            SeriesError::FieldMismatch(..) => "series.field_mismatch",
            SeriesError::SingularMatrix => "series.singular_matrix",
            SeriesError::Parse { .. } => "series.parse",
            SeriesError::Field(_) => "series.field",
            SeriesError::Json(_) => "series.json",
        }
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct Series {
    field: FieldSpec,
    n_main: usize,
    n_param: usize,
    trunc: u32,
    terms: BTreeMap<Exponent, Coeff>,
    exact: bool,
}

impl Series {
    pub fn zero(field: FieldSpec, n: usize, trunc: u32) -> Self {
        Series::zero_with_params(field, n, 0, trunc)
    }

    pub fn zero_with_params(field: FieldSpec, n_main: usize, n_param: usize, trunc: u32) -> Self {
        Series { field, n_main, n_param, trunc, terms: BTreeMap::new(), exact: true }
    }

    /// A zero series sharing the shape (field, blocks, truncation) of `self`.
    pub fn zero_like(&self) -> Self {
        Series::zero_with_params(self.field, self.n_main, self.n_param, self.trunc)
    }

    pub fn monomial(field: FieldSpec, exp: Exponent, c: Coeff, trunc: u32) -> Self {
        let n = exp.dim();
        let mut s = Series::zero(field, n, trunc);
        s.add_term(exp, &c);
        s
    }

    pub fn constant(field: FieldSpec, n: usize, c: Coeff, trunc: u32) -> Self {
        Series::monomial(field, Exponent::zero(n), c, trunc)
    }

    pub fn variable(field: FieldSpec, n: usize, i: usize, trunc: u32) -> Self {
        Series::monomial(field, Exponent::unit(n, i), Coeff::one(), trunc)
    }

    pub fn from_terms<I>(field: FieldSpec, n: usize, trunc: u32, terms: I) -> Result<Self, SeriesError>
    where
        I: IntoIterator<Item = (Exponent, Coeff)>,
    {
        let mut s = Series::zero(field, n, trunc);
        for (e, c) in terms {
            if e.dim() != n {
                return Err(SeriesError::DimensionMismatch(n, e.dim()));
            }
            let c = field.reduce(&c)?;
            s.add_term(e, &c);
        }
        Ok(s)
    }

    /// Adds `c·x^e`, dropping it (and clearing `exact`) when above the truncation.
    pub fn add_term(&mut self, e: Exponent, c: &Coeff) {
        if c.is_zero() {
            return;
        }
        if e.degree() > self.trunc {
            self.exact = false;
            return;
        }
        match self.terms.get_mut(&e) {
            Some(v) => {
                *v = self.field.add(v, c);
                if v.is_zero() {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, c.clone());
            }
        }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn nvars(&self) -> usize {
        self.n_main + self.n_param
    }

    pub fn n_main(&self) -> usize {
        self.n_main
    }

    pub fn n_param(&self) -> usize {
        self.n_param
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn mark_inexact(&mut self) {
        self.exact = false;
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Coeff)> {
        self.terms.iter()
    }

    /// Equality of the term maps, ignoring truncation and exactness.
    pub fn same_terms(&self, other: &Series) -> bool {
        self.terms == other.terms
    }

    pub fn coeff(&self, e: &Exponent) -> Coeff {
        self.terms.get(e).cloned().unwrap_or_else(Coeff::zero)
    }

    pub fn constant_term(&self) -> Coeff {
        self.coeff(&Exponent::zero(self.nvars()))
    }

    /// Reinterprets the variables as `n_main` main variables and the rest as parameters.
    pub fn with_blocks(mut self, n_main: usize) -> Self {
        let n = self.nvars();
        assert!(n_main <= n, "block split beyond variable count");
        self.n_main = n_main;
        self.n_param = n - n_main;
        self
    }

    /// Same terms, new truncation degree.
    pub fn with_trunc(&self, trunc: u32) -> Self {
        let mut out = Series { trunc, terms: BTreeMap::new(), ..self.clone() };
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c);
        }
        out
    }

    fn check_compat(&self, other: &Series) -> Result<(), SeriesError> {
        if self.field != other.field {
            return Err(SeriesError::FieldMismatch(self.field, other.field));
        }
        if self.nvars() != other.nvars() {
            return Err(SeriesError::DimensionMismatch(self.nvars(), other.nvars()));
        }
        Ok(())
    }

    fn combined_shell(&self, other: &Series) -> Series {
        let trunc = self.trunc.min(other.trunc);
        let exact = self.exact && other.exact;
        Series { trunc, exact, terms: BTreeMap::new(), ..self.clone() }
    }

    pub fn try_add(&self, other: &Series) -> Result<Series, SeriesError> {
        self.check_compat(other)?;
        let mut out = self.combined_shell(other);
        for (e, c) in self.terms.iter().chain(other.terms.iter()) {
            out.add_term(e.clone(), c);
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Series) -> Result<Series, SeriesError> {
        self.check_compat(other)?;
        let mut out = self.combined_shell(other);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e = e1.add(e2);
                if e.degree() > out.trunc {
                    out.exact = false;
                    continue;
                }
                out.add_term(e, &self.field.mul(c1, c2));
            }
        }
        Ok(out)
    }

    /// Addition; panics on incompatible operands (use [`Series::try_add`] otherwise).
    pub fn add(&self, other: &Series) -> Series {
        self.try_add(other).expect("compatible series")
    }

    pub fn sub(&self, other: &Series) -> Series {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Series) -> Series {
        self.try_mul(other).expect("compatible series")
    }

    pub fn neg(&self) -> Series {
        self.scale(&self.field.from_int(-1))
    }

    pub fn scale(&self, c: &Coeff) -> Series {
        let mut out = Series { terms: BTreeMap::new(), ..self.clone() };
        if c.is_zero() {
            return out;
        }
        for (e, v) in &self.terms {
            out.terms.insert(e.clone(), self.field.mul(v, c));
        }
        out
    }

    /// Multiplication by `c·x^e`.
    pub fn mul_monomial(&self, e: &Exponent, c: &Coeff) -> Series {
        let mut out = Series { terms: BTreeMap::new(), ..self.clone() };
        if c.is_zero() {
            return out;
        }
        for (f, v) in &self.terms {
            out.add_term(f.add(e), &self.field.mul(v, c));
        }
        out
    }

    pub fn pow(&self, k: u32) -> Series {
        let mut acc = Series::constant(self.field, self.nvars(), Coeff::one(), self.trunc)
            .with_blocks(self.n_main);
        acc.exact = true;
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Hasse derivative `D_{x^α}`: the coefficient of `x^{β−α}` is `C(β,α)·c_β`.
    pub fn hasse(&self, alpha: &Exponent) -> Series {
        let mut out = Series { terms: BTreeMap::new(), ..self.clone() };
        if !self.exact && self.trunc != POLY {
            out.trunc = self.trunc.saturating_sub(alpha.degree());
        }
        for (b, c) in &self.terms {
            let Some(diff) = b.checked_sub(alpha) else { continue };
            let mut coeff = c.clone();
            for (bi, ai) in b.coords().iter().zip(alpha.coords()) {
                if *ai > 0 {
                    coeff = self.field.mul(&coeff, &self.field.binomial(*bi, *ai));
                }
            }
            out.add_term(diff, &coeff);
        }
        out
    }

    pub fn supp(&self) -> Vec<Exponent> {
        self.terms.keys().cloned().collect()
    }

    /// Exponents α with `D_{x^α} f ≠ 0`, read off the Hasse coefficients.
    pub fn supd(&self) -> BTreeSet<Exponent> {
        let mut out = BTreeSet::new();
        for b in self.terms.keys() {
            for a in dominated_by(b) {
                if out.contains(&a) {
                    continue;
                }
                let nonzero = b
                    .coords()
                    .iter()
                    .zip(a.coords())
                    .all(|(bi, ai)| !self.field.binomial(*bi, *ai).is_zero());
                if nonzero {
                    out.insert(a);
                }
            }
        }
        out
    }

    pub fn ord(&self) -> Result<u32, SeriesError> {
        self.terms.keys().map(Exponent::degree).min().ok_or(SeriesError::ZeroSeries)
    }

    /// Order with respect to the main variables only.
    pub fn main_ord(&self) -> Result<u32, SeriesError> {
        self.terms
            .keys()
            .map(|e| e.coords()[..self.n_main].iter().sum())
            .min()
            .ok_or(SeriesError::ZeroSeries)
    }

    /// The order-minimal term. The order may cover all variables or just a
    /// leading block; remaining ties fall back to reverse-lex.
    pub fn leading(&self, order: &MonomialOrder) -> Result<(Exponent, Coeff), SeriesError> {
        let k = order.dim();
        if k > self.nvars() {
            return Err(SeriesError::DimensionMismatch(k, self.nvars()));
        }
        let best = self
            .terms
            .iter()
            .min_by(|(a, _), (b, _)| {
                let (ha, hb) = (Exponent::new(a.coords()[..k].to_vec()), Exponent::new(b.coords()[..k].to_vec()));
                order.cmp_unchecked(&ha, &hb).then_with(|| a.cmp(b))
            })
            .ok_or(SeriesError::ZeroSeries)?;
        Ok((best.0.clone(), best.1.clone()))
    }

    /// Terms whose parameter block vanishes, i.e. `f(u, 0)`.
    pub fn params_to_zero(&self) -> Series {
        let mut out = Series { terms: BTreeMap::new(), ..self.clone() };
        for (e, c) in &self.terms {
            if e.coords()[self.n_main..].iter().all(|&a| a == 0) {
                out.terms.insert(e.clone(), c.clone());
            }
        }
        out
    }

    pub fn homogeneous_part(&self, d: u32) -> Series {
        let mut out = Series { terms: BTreeMap::new(), ..self.clone() };
        for (e, c) in &self.terms {
            if e.degree() == d {
                out.terms.insert(e.clone(), c.clone());
            }
        }
        out
    }

    /// Lowest-degree homogeneous part; zero for the zero series.
    pub fn initial_form(&self) -> Series {
        match self.ord() {
            Ok(d) => self.homogeneous_part(d),
            Err(_) => self.clone(),
        }
    }

    /// Lowest-degree homogeneous part after recentering at `q`.
    pub fn initial_form_at(&self, q: &[Coeff]) -> Result<Series, SeriesError> {
        Ok(self.translate(q)?.initial_form())
    }

    pub fn evaluate(&self, q: &[Coeff]) -> Result<Coeff, SeriesError> {
        if q.len() != self.nvars() {
            return Err(SeriesError::DimensionMismatch(self.nvars(), q.len()));
        }
        let q: Vec<Coeff> = q.iter().map(|c| self.field.reduce(c)).collect::<Result<_, _>>()?;
        let mut acc = Coeff::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (qi, &a) in q.iter().zip(e.coords()) {
                if a > 0 {
                    t = self.field.mul(&t, &self.field.pow(qi, a));
                }
            }
            acc = self.field.add(&acc, &t);
        }
        Ok(acc)
    }

    /// Recenters at `q`: the result `g` satisfies `g(x) = f(x + q)`.
    pub fn translate(&self, q: &[Coeff]) -> Result<Series, SeriesError> {
        let n = self.nvars();
        if q.len() != n {
            return Err(SeriesError::DimensionMismatch(n, q.len()));
        }
        let images: Vec<Series> = (0..n)
            .map(|i| {
                let mut s = Series::variable(self.field, n, i, POLY);
                s.add_term(Exponent::zero(n), &self.field.reduce(&q[i])?);
                Ok(s)
            })
            .collect::<Result<_, SeriesError>>()?;
        let mut out = self.substitute(&images)?;
        if !self.exact && q.iter().any(|c| !c.is_zero()) {
            out.exact = false;
        }
        Ok(out)
    }

    /// Substitutes `xᵢ ↦ images[i]`. The result keeps `self`'s truncation and block split
    /// when the image count matches, otherwise takes the images' shape.
    pub fn substitute(&self, images: &[Series]) -> Result<Series, SeriesError> {
        if images.len() != self.nvars() {
            return Err(SeriesError::DimensionMismatch(self.nvars(), images.len()));
        }
        let m = images.first().map(Series::nvars).unwrap_or(0);
        for im in images {
            if im.nvars() != m {
                return Err(SeriesError::DimensionMismatch(m, im.nvars()));
            }
            if im.field != self.field {
                return Err(SeriesError::FieldMismatch(self.field, im.field));
            }
        }
        let (n_main, n_param) = if m == self.nvars() {
            (self.n_main, self.n_param)
        } else {
            (images.first().map(|s| s.n_main).unwrap_or(0), images.first().map(|s| s.n_param).unwrap_or(0))
        };
        let trunc = self.trunc;
        let mut out = Series::zero_with_params(self.field, n_main, n_param, trunc);
        out.exact = self.exact && images.iter().all(|s| s.exact);
        let images: Vec<Series> = images.iter().map(|s| s.with_trunc(trunc).with_blocks(n_main)).collect();
        let mut powers: Vec<Vec<Series>> = images
            .iter()
            .map(|s| vec![Series::constant(self.field, m, Coeff::one(), trunc).with_blocks(n_main), s.clone()])
            .collect();
        for (e, c) in &self.terms {
            let mut t = Series::constant(self.field, m, c.clone(), trunc).with_blocks(n_main);
            for (i, &a) in e.coords().iter().enumerate() {
                if a == 0 {
                    continue;
                }
                while powers[i].len() <= a as usize {
                    let next = powers[i].last().expect("nonempty").mul(&images[i]);
                    powers[i].push(next);
                }
                t = t.mul(&powers[i][a as usize]);
                if t.is_zero() {
                    break;
                }
            }
            if !t.exact {
                out.exact = false;
            }
            for (f, v) in &t.terms {
                out.add_term(f.clone(), v);
            }
        }
        Ok(out)
    }

    /// Linear change `xᵢ ↦ Σⱼ M[i][j]·xⱼ`.
    pub fn substitute_linear(&self, matrix: &[Vec<Coeff>]) -> Result<Series, SeriesError> {
        let n = self.nvars();
        if matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
            return Err(SeriesError::DimensionMismatch(n, matrix.len()));
        }
        if determinant(&self.field, matrix).is_zero() {
            return Err(SeriesError::SingularMatrix);
        }
        let images: Vec<Series> = matrix
            .iter()
            .map(|row| {
                let mut s = Series::zero(self.field, n, POLY);
                for (j, c) in row.iter().enumerate() {
                    s.add_term(Exponent::unit(n, j), &self.field.reduce(c)?);
                }
                Ok(s)
            })
            .collect::<Result<_, SeriesError>>()?;
        self.substitute(&images)
    }

    /// Largest `k` with `x_var^k` dividing every term.
    pub fn var_valuation(&self, var: usize) -> Option<u32> {
        self.terms.keys().map(|e| e.get(var)).min()
    }

    /// Exact division by `x_var^k`; `None` if some term has a smaller power.
    pub fn divide_var_power(&self, var: usize, k: u32) -> Option<Series> {
        let mut out = Series { terms: BTreeMap::new(), ..self.clone() };
        for (e, c) in &self.terms {
            if e.get(var) < k {
                return None;
            }
            let mut f = e.clone();
            f.set(var, e.get(var) - k);
            out.terms.insert(f, c.clone());
        }
        Some(out)
    }

    /// Embeds into a ring with `extra` more trailing variables.
    pub fn extended(&self, extra: usize) -> Series {
        let n = self.nvars() + extra;
        let mut out = Series {
            n_main: self.n_main,
            n_param: self.n_param + extra,
            terms: BTreeMap::new(),
            ..self.clone()
        };
        for (e, c) in &self.terms {
            out.terms.insert(e.resized(n), c.clone());
        }
        out
    }

    /// Drops variables whose exponents are all zero (checked), keeping the listed ones.
    pub fn restrict_vars(&self, keep: &[usize]) -> Series {
        let n = keep.len();
        let mut out = Series::zero(self.field, n, self.trunc);
        out.exact = self.exact;
        for (e, c) in &self.terms {
            let f = Exponent::new(keep.iter().map(|&i| e.get(i)).collect());
            out.add_term(f, c);
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<TermJson> = self
            .terms
            .iter()
            .map(|(e, c)| TermJson { exp: e.coords().to_vec(), coeff: format_coeff(c) })
            .collect();
        serde_json::to_value(SeriesJson {
            field: self.field.to_string(),
            n: self.n_main,
            m: self.n_param,
            trunc: (self.trunc != POLY).then_some(self.trunc),
            exact: self.exact,
            terms,
        })
        .expect("serializable")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Series, SeriesError> {
        let raw: SeriesJson = serde_json::from_value(value.clone()).map_err(|e| SeriesError::Json(e.to_string()))?;
        let field: FieldSpec = raw.field.parse()?;
        let mut s = Series::zero_with_params(field, raw.n, raw.m, raw.trunc.unwrap_or(POLY));
        for t in raw.terms {
            if t.exp.len() != raw.n + raw.m {
                return Err(SeriesError::DimensionMismatch(raw.n + raw.m, t.exp.len()));
            }
            let c = parse_coeff(&t.coeff).ok_or_else(|| SeriesError::Json(format!("bad coefficient `{}`", t.coeff)))?;
            s.add_term(Exponent::new(t.exp), &field.reduce(&c)?);
        }
        s.exact = raw.exact;
        Ok(s)
    }

    /// Renders with the given variable names (defaults when `None`).
    pub fn render(&self, names: Option<&[String]>) -> String {
        let defaults = default_names(self.n_main, self.n_param);
        let names = names.unwrap_or(&defaults);
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut keys: Vec<&Exponent> = self.terms.keys().collect();
        keys.sort_by(|a, b| a.degree().cmp(&b.degree()).then_with(|| a.cmp(b)));
        let mut out = String::new();
        for (k, e) in keys.into_iter().enumerate() {
            let c = &self.terms[e];
            let mut text = format_coeff(c);
            let negative = text.starts_with('-');
            if negative {
                text.remove(0);
            }
            if k == 0 {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            let mono: Vec<String> = e
                .coords()
                .iter()
                .enumerate()
                .filter(|(_, &a)| a > 0)
                .map(|(i, &a)| if a == 1 { names[i].clone() } else { format!("{}^{a}", names[i]) })
                .collect();
            if mono.is_empty() {
                out.push_str(&text);
            } else {
                if text != "1" {
                    out.push_str(&text);
                    out.push('*');
                }
                out.push_str(&mono.join("*"));
            }
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    exp: Vec<u32>,
    coeff: String,
}

#[derive(Serialize, Deserialize)]
struct SeriesJson {
    field: String,
    n: usize,
    m: usize,
    trunc: Option<u32>,
    exact: bool,
    terms: Vec<TermJson>,
}

/// All exponents `≤ b` coordinatewise.
pub(crate) fn dominated_by(b: &Exponent) -> Vec<Exponent> {
    let mut out = vec![Vec::with_capacity(b.dim())];
    for &bi in b.coords() {
        let mut next = Vec::with_capacity(out.len() * (bi as usize + 1));
        for prefix in &out {
            for a in 0..=bi {
                let mut p: Vec<u32> = prefix.clone();
                p.push(a);
                next.push(p);
            }
        }
        out = next;
    }
    out.into_iter().map(Exponent::new).collect()
}

pub fn default_names(n_main: usize, n_param: usize) -> Vec<String> {
    let mut names: Vec<String> = if n_main + n_param <= 3 && n_param == 0 {
        ["x", "y", "z"][..n_main].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=n_main).map(|i| format!("x{i}")).collect()
    };
    if n_param == 1 {
        names.push("v".into());
    } else {
        names.extend((1..=n_param).map(|i| format!("v{i}")));
    }
    names
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(None))
    }
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Series[{}; D={}; {}]", self.render(None), self.trunc, if self.exact { "exact" } else { "mod" })
    }
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Coeff),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, SeriesError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |column: usize, message: &str| SeriesError::Parse { column, message: message.to_string() };
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push((Tok::Plus, col));
                i += 1
            }
            '-' => {
                out.push((Tok::Minus, col));
                i += 1
            }
            '*' => {
                out.push((Tok::Star, col));
                i += 1
            }
            '^' => {
                out.push((Tok::Caret, col));
                i += 1
            }
            '(' => {
                out.push((Tok::LParen, col));
                i += 1
            }
            ')' => {
                out.push((Tok::RParen, col));
                i += 1
            }
            d if d.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i + 1 < chars.len() && chars[i] == '/' && chars[i + 1].is_ascii_digit() {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                let lit: String = chars[start..i].iter().collect();
                let v = parse_coeff(&lit).ok_or_else(|| err(col, "bad number literal"))?;
                out.push((Tok::Num(v), col));
            }
            a if a.is_ascii_alphabetic() || a == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), col));
            }
            _ => return Err(err(col, &format!("unexpected character `{c}`"))),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_col: usize,
    field: FieldSpec,
    n: usize,
    trunc: u32,
    resolve: &'a dyn Fn(&str) -> Option<usize>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.end_col)
    }

    fn err(&self, message: &str) -> SeriesError {
        SeriesError::Parse { column: self.col(), message: message.to_string() }
    }

    fn expr(&mut self) -> Result<Series, SeriesError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Series, SeriesError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?);
                }
                Some(Tok::Num(_)) | Some(Tok::Ident(_)) | Some(Tok::LParen) => {
                    acc = acc.mul(&self.unary()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Series, SeriesError> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            return Ok(self.unary()?.neg());
        }
        if self.peek() == Some(&Tok::Plus) {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Series, SeriesError> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            match self.peek().cloned() {
                Some(Tok::Num(v)) if v.is_integer() && v >= Coeff::zero() => {
                    self.pos += 1;
                    let k: u32 = v.to_integer().try_into().map_err(|_| self.err("exponent too large"))?;
                    return Ok(base.pow(k));
                }
                _ => return Err(self.err("expected a nonnegative integer exponent")),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Series, SeriesError> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                let c = self.field.reduce(&v)?;
                Ok(Series::constant(self.field, self.n, c, self.trunc))
            }
            Some(Tok::Ident(name)) => {
                let idx = (self.resolve)(&name).ok_or_else(|| self.err(&format!("unknown variable `{name}`")))?;
                self.pos += 1;
                Ok(Series::variable(self.field, self.n, idx, self.trunc))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            _ => Err(self.err("expected a number, variable or `(`")),
        }
    }
}

fn parse_impl(
    text: &str,
    field: FieldSpec,
    n: usize,
    trunc: u32,
    resolve: &dyn Fn(&str) -> Option<usize>,
) -> Result<Series, SeriesError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, end_col: text.chars().count() + 1, field, n, trunc, resolve };
    if p.toks.is_empty() {
        return Err(p.err("empty expression"));
    }
    let s = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(s)
}

/// Parses a polynomial in `n_main` main variables followed by `n_param` parameters.
///
/// Accepted names: `x1…`, `x, y, z` when there are at most three main variables
/// and no parameters, and `v1…` (or `v` alone) for parameters.
pub fn parse(text: &str, field: FieldSpec, n_main: usize, n_param: usize, trunc: u32) -> Result<Series, SeriesError> {
    let n = n_main + n_param;
    let resolve = |name: &str| -> Option<usize> {
        if let Some(rest) = name.strip_prefix('v') {
            if rest.is_empty() {
                return (n_param == 1).then_some(n_main);
            }
            let k: usize = rest.parse().ok()?;
            return (1..=n_param).contains(&k).then_some(n_main + k - 1);
        }
        crate::exponents::parse_var_index(name, n_main)
    };
    Ok(parse_impl(text, field, n, trunc, &resolve)?.with_blocks(n_main))
}

/// Parses with an explicit variable list; the first `n_main` names are main variables.
pub fn parse_with_names(
    text: &str,
    field: FieldSpec,
    names: &[String],
    n_main: usize,
    trunc: u32,
) -> Result<Series, SeriesError> {
    let resolve = |name: &str| names.iter().position(|v| v == name);
    Ok(parse_impl(text, field, names.len(), trunc, &resolve)?.with_blocks(n_main))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(text: &str, n: usize) -> Series {
        parse(text, FieldSpec::Rationals, n, 0, 5).unwrap()
    }

    fn e(v: &[u32]) -> Exponent {
        Exponent::new(v.to_vec())
    }

    #[test]
    fn ring_operations() {
        assert_eq!(p("(x+y)*(x-y)", 2), p("x^2 - y^2", 2));
        let xy = parse("x*y", FieldSpec::Rationals, 2, 0, 1).unwrap();
        assert!(xy.is_zero());
        assert!(!xy.is_exact());
        let q = parse("3/4 x1^2 x2 - 2", FieldSpec::Rationals, 2, 0, 8).unwrap();
        assert_eq!(q.coeff(&e(&[2, 1])), parse_coeff("3/4").unwrap());
    }

    #[test]
    fn linear_substitution() {
        let f = p("x^2", 2);
        let one = Coeff::one();
        let zero = Coeff::zero();
        let m = vec![vec![one.clone(), one.clone()], vec![zero.clone(), one.clone()]];
        assert_eq!(f.substitute_linear(&m).unwrap(), p("x^2 + 2 x y + y^2", 2));
        let sing = vec![vec![one.clone(), one.clone()], vec![one.clone(), one]];
        assert_eq!(f.substitute_linear(&sing), Err(SeriesError::SingularMatrix));
    }

    #[test]
    fn hasse_derivatives() {
        let f = p("x^2", 1);
        assert_eq!(f.hasse(&e(&[1])), p("2x", 1));
        assert_eq!(f.hasse(&e(&[2])), p("1", 1));
        let f2 = parse("x^2", FieldSpec::prime(2).unwrap(), 1, 0, 5).unwrap();
        assert!(f2.hasse(&e(&[1])).is_zero());
        assert_eq!(f2.hasse(&e(&[2])).constant_term(), Coeff::one());
        assert_eq!(f2.supd(), [e(&[0]), e(&[2])].into_iter().collect());
        let g = p("x^3 - x y + 2", 2);
        assert_eq!(g.hasse(&e(&[0, 0])), g);
    }

    #[test]
    fn supports_and_leading() {
        let f = parse("x^4", FieldSpec::Rationals, 1, 0, 8).unwrap();
        assert_eq!(f.supd().len(), 5);
        let g = p("x^2 - y^3", 2);
        let t = MonomialOrder::standard(2);
        assert_eq!(g.leading(&t).unwrap().0, e(&[2, 0]));
        assert_eq!(g.ord().unwrap(), 2);
        assert_eq!(g.zero_like().ord(), Err(SeriesError::ZeroSeries));
    }

    #[test]
    fn translation_and_initial_forms() {
        let g = p("x^2 - y^3", 2);
        assert_eq!(g.initial_form(), p("x^2", 2));
        let one = Coeff::one();
        let at = g.initial_form_at(&[one.clone(), one]).unwrap();
        assert_eq!(at, p("2x - 3y", 2));
        assert_eq!(p("5", 2).initial_form(), p("5", 2));
    }

    #[test]
    fn parse_errors_carry_columns() {
        match parse("x + * y", FieldSpec::Rationals, 2, 0, 5) {
            Err(SeriesError::Parse { column, .. }) => assert_eq!(column, 5),
            other => panic!("{other:?}"),
        }
        assert!(parse("w", FieldSpec::Rationals, 2, 0, 5).is_err());
        assert!(parse("(x", FieldSpec::Rationals, 2, 0, 5).is_err());
    }

    #[test]
    fn params_and_names() {
        let f = parse("u^2 - v*w", FieldSpec::Rationals, 0, 0, 5);
        assert!(f.is_err());
        let names: Vec<String> = ["t", "x"].iter().map(|s| s.to_string()).collect();
        let f = parse_with_names("t^2 - x", FieldSpec::Rationals, &names, 1, 10).unwrap();
        assert_eq!(f.n_main(), 1);
        assert_eq!(f.n_param(), 1);
        let g = parse("x1^2 + v*x2^2", FieldSpec::Rationals, 2, 1, 10).unwrap();
        assert_eq!(g.coeff(&e(&[0, 2, 1])), Coeff::one());
    }

    #[test]
    fn json_roundtrip() {
        let g = parse("1/2 x^2 - 3 y^3 + 7", FieldSpec::Rationals, 2, 0, 9).unwrap();
        let back = Series::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
        assert_eq!(g.to_string(), "7 + 1/2*x^2 - 3*y^3");
    }
}
