//! Exponent vectors in ℕⁿ and monomial gradings given by tuples of linear forms.
//!
//! A [`MonomialOrder`] compares exponents by the lexicographic order on their
//! value vectors `(T₁(α), …, T_k(α))`. The initial exponent of a series is the
//! minimum of its support under this comparison.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::parse_coeff;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExponentError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("an order needs at least one linear form")]
    EmptyOrder,
    #[error("linear form {form} has a negative coefficient")]
    NegativeWeight { form: usize },
    #[error("cannot parse order literal `{0}`")]
    BadLiteral(String),
}

/// A point of ℕⁿ.
///
/// The `Ord` impl is reverse-lexicographic: the last coordinate is compared
/// first. Sorted containers of exponents therefore iterate in reverse-lex
/// order, which is the order used for diagram vertices.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Exponent(Vec<u32>);

impl Exponent {
    pub fn new(coords: Vec<u32>) -> Self {
        Exponent(coords)
    }

    pub fn zero(n: usize) -> Self {
        Exponent(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        Exponent(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// `self ≥ other` coordinatewise, i.e. `other` divides `self`.
    pub fn dominates(&self, other: &Exponent) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }

    pub fn add(&self, other: &Exponent) -> Exponent {
        Exponent(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn checked_sub(&self, other: &Exponent) -> Option<Exponent> {
        let mut out = Vec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            out.push(a.checked_sub(*b)?);
        }
        Some(Exponent(out))
    }

    /// Coordinatewise maximum (exponent of the lcm).
    pub fn join(&self, other: &Exponent) -> Exponent {
        Exponent(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect())
    }

    /// Keeps the first `i` coordinates and zeroes the rest.
    pub fn truncate_to(&self, i: usize) -> Exponent {
        let mut v = self.0.clone();
        for a in v.iter_mut().skip(i) {
            *a = 0;
        }
        Exponent(v)
    }

    /// Pads with zeros (or cuts) to dimension `n`.
    pub fn resized(&self, n: usize) -> Exponent {
        let mut v = self.0.clone();
        v.resize(n, 0);
        Exponent(v)
    }

    /// The transfer move that adds coordinate `j` onto coordinate `i` and zeroes `j`.
    pub fn transfer(&self, i: usize, j: usize) -> Exponent {
        let mut v = self.0.clone();
        v[i] += v[j];
        v[j] = 0;
        Exponent(v)
    }

    pub fn set(&mut self, i: usize, value: u32) {
        self.0[i] = value;
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    pub fn into_vec(self) -> Vec<u32> {
        self.0
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .iter()
            .rev()
            .cmp(other.0.iter().rev())
            .then_with(|| self.0.len().cmp(&other.0.len()))
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, a) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<u32>> for Exponent {
    fn from(v: Vec<u32>) -> Self {
        Exponent(v)
    }
}

impl<const N: usize> From<[u32; N]> for Exponent {
    fn from(v: [u32; N]) -> Self {
        Exponent(v.to_vec())
    }
}

/// All exponents of ℕⁿ with total degree exactly `d`, in reverse-lex order.
pub fn monomials_of_degree(n: usize, d: u32) -> Vec<Exponent> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    fn rec(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Exponent>) {
        let n = cur.len();
        if pos + 1 == n {
            cur[pos] = left;
            out.push(Exponent(cur.clone()));
            return;
        }
        for a in (0..=left).rev() {
            cur[pos] = a;
            rec(pos + 1, left - a, cur, out);
        }
        cur[pos] = 0;
    }
    if n == 0 {
        if d == 0 {
            out.push(Exponent(vec![]));
        }
        return out;
    }
    rec(0, d, &mut cur, &mut out);
    out.sort();
    out
}

/// All exponents of ℕⁿ with total degree at most `d`, grouped by degree.
pub fn monomials_up_to(n: usize, d: u32) -> Vec<Exponent> {
    (0..=d).flat_map(|k| monomials_of_degree(n, k)).collect()
}

/// Predicates derived from the forms of an order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderFlags {
    pub positive: bool,
    pub normalized: bool,
    pub total: bool,
    pub monotone: bool,
}

/// A positive tuple of linear forms with nonnegative rational coefficients,
/// stored with each form scaled to integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonomialOrder {
    n: usize,
    forms: Vec<Vec<u64>>,
    flags: OrderFlags,
}

impl MonomialOrder {
    pub fn new(n: usize, forms: Vec<Vec<BigRational>>) -> Result<Self, ExponentError> {
        if forms.is_empty() {
            return Err(ExponentError::EmptyOrder);
        }
        let mut int_forms = Vec::with_capacity(forms.len());
        for (k, form) in forms.iter().enumerate() {
            if form.len() != n {
                return Err(ExponentError::DimensionMismatch { expected: n, found: form.len() });
            }
            if form.iter().any(|c| c.is_negative()) {
                return Err(ExponentError::NegativeWeight { form: k });
            }
            let lcm = form.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
            let ints: Vec<u64> = form
                .iter()
                .map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer().to_u64().unwrap_or(u64::MAX))
                .collect();
            int_forms.push(ints);
        }
        let normalized = forms[0].iter().all(|c| c.is_one());
        Ok(Self::from_int_forms(n, int_forms, normalized))
    }

    fn from_int_forms(n: usize, forms: Vec<Vec<u64>>, normalized: bool) -> Self {
        let positive = (0..n).all(|j| forms.iter().any(|f| f[j] > 0));
        let total = int_rank(&forms, n) == n;
        let mut order = MonomialOrder {
            n,
            forms,
            flags: OrderFlags { positive, normalized, total, monotone: false },
        };
        order.flags.monotone = (0..n).all(|i| {
            (i + 1..n).all(|j| {
                order.values(&Exponent::unit(n, i)) <= order.values(&Exponent::unit(n, j))
            })
        });
        order
    }

    /// The order `(x₁+…+xₙ, x₂+…+xₙ, …, xₙ)`: total degree first, ties go to
    /// the exponent with more weight on early coordinates.
    pub fn standard(n: usize) -> Self {
        let forms = (0..n)
            .map(|i| (0..n).map(|j| u64::from(j >= i)).collect())
            .collect();
        Self::from_int_forms(n, forms, true)
    }

    /// Parses `"x1+x2; 2*x2"` style literals (one form per `;`).
    pub fn parse(n: usize, text: &str) -> Result<Self, ExponentError> {
        let bad = || ExponentError::BadLiteral(text.to_string());
        let mut forms = Vec::new();
        for part in text.split(';') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let mut form = vec![BigRational::zero(); n];
            for term in part.split('+') {
                let term = term.trim();
                let (coeff, var) = match term.split_once('*') {
                    Some((c, v)) => (parse_coeff(c).ok_or_else(bad)?, v.trim()),
                    None => (BigRational::one(), term),
                };
                let idx = parse_var_index(var, n).ok_or_else(bad)?;
                form[idx] += coeff;
            }
            forms.push(form);
        }
        Self::new(n, forms)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn forms(&self) -> &[Vec<u64>] {
        &self.forms
    }

    pub fn flags(&self) -> OrderFlags {
        self.flags
    }

    pub fn values(&self, a: &Exponent) -> Vec<u64> {
        self.forms
            .iter()
            .map(|f| f.iter().zip(a.coords()).map(|(w, &x)| w * u64::from(x)).sum())
            .collect()
    }

    pub fn compare(&self, a: &Exponent, b: &Exponent) -> Result<Ordering, ExponentError> {
        for e in [a, b] {
            if e.dim() != self.n {
                return Err(ExponentError::DimensionMismatch { expected: self.n, found: e.dim() });
            }
        }
        Ok(self.cmp_unchecked(a, b))
    }

    /// Comparison without the dimension check; callers guarantee matching sizes.
    pub fn cmp_unchecked(&self, a: &Exponent, b: &Exponent) -> Ordering {
        for f in &self.forms {
            let va: u64 = f.iter().zip(a.coords()).map(|(w, &x)| w * u64::from(x)).sum();
            let vb: u64 = f.iter().zip(b.coords()).map(|(w, &x)| w * u64::from(x)).sum();
            match va.cmp(&vb) {
                Ordering::Equal => continue,
                other => return other,
            }
        }
        Ordering::Equal
    }

    /// Appends the reverse-lex forms `xₙ, …, x₁` when the order is not total.
    pub fn completed(&self) -> Self {
        if self.flags.total {
            return self.clone();
        }
        let mut forms = self.forms.clone();
        for j in (0..self.n).rev() {
            forms.push((0..self.n).map(|k| u64::from(k == j)).collect());
        }
        Self::from_int_forms(self.n, forms, self.flags.normalized)
    }

    /// Sorts exponents ascending in this order (ties fall back to reverse-lex).
    pub fn sort(&self, exps: &mut [Exponent]) {
        exps.sort_by(|a, b| self.cmp_unchecked(a, b).then_with(|| a.cmp(b)));
    }
}

pub(crate) fn parse_var_index(var: &str, n: usize) -> Option<usize> {
    let var = var.trim();
    let idx = match var {
        "x" if n <= 3 => 0,
        "y" if n <= 3 => 1,
        "z" if n <= 3 => 2,
        _ => var.strip_prefix('x')?.parse::<usize>().ok()?.checked_sub(1)?,
    };
    (idx < n).then_some(idx)
}

/// Rank of an integer matrix (rows = forms) via exact rational elimination.
fn int_rank(rows: &[Vec<u64>], n: usize) -> usize {
    let mut m: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect())
        .collect();
    let mut rank = 0;
    for col in 0..n {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else { continue };
        m.swap(rank, p);
        let pivot = m[rank][col].clone();
        for r in 0..m.len() {
            if r != rank && !m[r][col].is_zero() {
                let factor = &m[r][col] / &pivot;
                for c in col..n {
                    let delta = &factor * &m[rank][c];
                    m[r][c] -= delta;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(v: &[u32]) -> Exponent {
        Exponent::new(v.to_vec())
    }

    #[test]
    fn compare_examples() {
        let t = MonomialOrder::parse(2, "x1+x2").unwrap();
        assert_eq!(t.compare(&e(&[1, 0]), &e(&[0, 2])).unwrap(), Ordering::Less);
        let t = MonomialOrder::parse(2, "x1+x2; x2").unwrap();
        assert_eq!(t.compare(&e(&[2, 0]), &e(&[1, 1])).unwrap(), Ordering::Less);
        assert_eq!(t.compare(&e(&[1, 1]), &e(&[1, 1])).unwrap(), Ordering::Equal);
        assert!(t.compare(&e(&[1]), &e(&[1, 1])).is_err());
    }

    #[test]
    fn classify_examples() {
        let std3 = MonomialOrder::standard(3);
        let fl = std3.flags();
        assert!(fl.positive && fl.normalized && fl.total && fl.monotone);
        let t = MonomialOrder::parse(2, "x1").unwrap();
        assert!(!t.flags().positive);
        let t = MonomialOrder::parse(2, "x1+x2; x1").unwrap();
        assert!(!t.flags().monotone);
        assert!(t.flags().total);
    }

    #[test]
    fn completion_appends_reverse_lex() {
        let t = MonomialOrder::parse(3, "x1+x2+x3").unwrap();
        assert!(!t.flags().total);
        let c = t.completed();
        assert!(c.flags().total);
        assert_eq!(c.forms().len(), 4);
        assert_eq!(c.forms()[1], vec![0, 0, 1]);
    }

    #[test]
    fn rational_weights_are_cleared() {
        let t = MonomialOrder::parse(2, "1/2*x1 + 1/3*x2").unwrap();
        assert_eq!(t.forms()[0], vec![3, 2]);
        assert!(MonomialOrder::new(2, vec![]).is_err());
    }

    #[test]
    fn reverse_lex_ord_and_enumeration() {
        let mut v = vec![e(&[0, 3]), e(&[2, 0]), e(&[1, 1])];
        v.sort();
        assert_eq!(v, vec![e(&[2, 0]), e(&[1, 1]), e(&[0, 3])]);
        assert_eq!(monomials_of_degree(3, 2).len(), 6);
        assert_eq!(monomials_up_to(2, 3).len(), 10);
    }
}
