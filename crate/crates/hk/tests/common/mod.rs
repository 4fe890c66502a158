//! Independent oracles for the integration and acceptance tests. Nothing here
//! calls into the library's linear algebra, Hilbert-Samuel or resultant code.
#![allow(dead_code)]

use hk::exponents::Exponent;
use hk::series::{parse, Series, POLY};
use hk::{Coeff, FieldSpec};
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const Q: FieldSpec = FieldSpec::Rationals;

pub fn q(v: i64) -> Coeff {
    Coeff::from_integer(v.into())
}

pub fn poly(text: &str, n: usize) -> Series {
    parse(text, Q, n, 0, POLY).unwrap()
}

pub fn exp(v: &[u32]) -> Exponent {
    Exponent::new(v.to_vec())
}

/// All exponents in `n` variables of total degree exactly `d`, any order.
pub fn monomials(n: usize, d: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return if d == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=d {
        for mut rest in monomials(n - 1, d - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

pub fn monomials_upto(n: usize, d: u32) -> Vec<Vec<u32>> {
    (0..=d).flat_map(|k| monomials(n, k)).collect()
}

/// Rank by plain Gaussian elimination over ℚ.
pub fn dense_rank(mut rows: Vec<Vec<Coeff>>) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else { continue };
        rows.swap(rank, p);
        let pivot = rows[rank][col].clone();
        for r in 0..rows.len() {
            if r != rank && !rows[r][col].is_zero() {
                let f = &rows[r][col] / &pivot;
                for c in col..ncols {
                    let v = &rows[rank][c] * &f;
                    rows[r][c] -= v;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Determinant by Gaussian elimination over ℚ.
pub fn dense_det(mut m: Vec<Vec<Coeff>>) -> Coeff {
    let n = m.len();
    let mut det = Coeff::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !m[r][col].is_zero()) else { return Coeff::zero() };
        if p != col {
            m.swap(p, col);
            det = -det;
        }
        let pivot = m[col][col].clone();
        det *= &pivot;
        for r in col + 1..n {
            let f = &m[r][col] / &pivot;
            for c in col..n {
                let v = &m[col][c] * &f;
                m[r][c] -= v;
            }
        }
    }
    det
}

fn term_list(f: &Series) -> Vec<(Vec<u32>, Coeff)> {
    f.terms().map(|(e, c)| (e.coords().to_vec(), c.clone())).collect()
}

fn shifted(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// `dim K[[x]]/(I + m^{s+1})`: monomials of degree ≤ s minus the rank of all
/// multiples `x^γ·g` cut at degree s.
pub fn quotient_dim(gens: &[Series], n: usize, s: u32) -> usize {
    let cols = monomials_upto(n, s);
    let index = |e: &[u32]| cols.iter().position(|c| c == e);
    let mut rows = Vec::new();
    for g in gens {
        let terms = term_list(g);
        for gamma in &cols {
            let mut row = vec![Coeff::zero(); cols.len()];
            let mut any = false;
            for (e, c) in &terms {
                if let Some(i) = index(&shifted(e, gamma)) {
                    row[i] += c;
                    any = true;
                }
            }
            if any {
                rows.push(row);
            }
        }
    }
    cols.len() - dense_rank(rows)
}

/// Cumulative `Σ_{t≤s} dim M_t` for `M = R^rank / (relations)`, relations
/// homogeneous with the given component vectors.
pub fn graded_quotient_cumulative(n: usize, rank: usize, relations: &[(u32, Vec<Series>)], s: u32) -> u128 {
    let mut total = 0u128;
    for t in 0..=s {
        let monos = monomials(n, t);
        let ncols = rank * monos.len();
        let index = |c: usize, e: &[u32]| monos.iter().position(|m| m == e).map(|i| c * monos.len() + i);
        let mut rows = Vec::new();
        for (deg, entries) in relations {
            if *deg > t {
                continue;
            }
            for gamma in monomials(n, t - deg) {
                let mut row = vec![Coeff::zero(); ncols];
                for (c, comp) in entries.iter().enumerate() {
                    for (e, v) in term_list(comp) {
                        row[index(c, &shifted(&e, &gamma)).expect("homogeneous")] += v;
                    }
                }
                rows.push(row);
            }
        }
        total += (ncols - dense_rank(rows)) as u128;
    }
    total
}

/// Coefficients of a binary form of degree `d`, from `x^d` down to `y^d`.
fn binary_coeffs(f: &Series, d: u32) -> Vec<Coeff> {
    (0..=d).map(|i| f.coeff(&exp(&[d - i, i]))).collect()
}

fn sylvester_raw(f: &[Coeff], g: &[Coeff]) -> Coeff {
    let (a, b) = (f.len() - 1, g.len() - 1);
    let size = a + b;
    let mut m = vec![vec![Coeff::zero(); size]; size];
    for r in 0..b {
        for (i, c) in f.iter().enumerate() {
            m[r][r + i] = c.clone();
        }
    }
    for r in 0..a {
        for (i, c) in g.iter().enumerate() {
            m[b + r][r + i] = c.clone();
        }
    }
    dense_det(m)
}

/// Sylvester resultant of two binary forms, normalized so that
/// `Res(x^a, y^b) = 1`.
pub fn sylvester(f: &Series, a: u32, g: &Series, b: u32) -> Coeff {
    let raw = sylvester_raw(&binary_coeffs(f, a), &binary_coeffs(g, b));
    let mut xa = vec![Coeff::zero(); a as usize + 1];
    xa[0] = Coeff::one();
    let mut yb = vec![Coeff::zero(); b as usize + 1];
    yb[b as usize] = Coeff::one();
    raw / sylvester_raw(&xa, &yb)
}

/// `dim K[x]/(F)` for homogeneous forms whose ideal contains every form of
/// degree `top`; `None` when it does not.
pub fn artinian_length(forms: &[Series], degrees: &[u32], top: u32) -> Option<usize> {
    let k = forms.len();
    let mut total = 0;
    for t in 0..=top {
        let monos = monomials(k, t);
        let mut rows = Vec::new();
        for (f, &d) in forms.iter().zip(degrees) {
            if d > t {
                continue;
            }
            for gamma in monomials(k, t - d) {
                let mut row = vec![Coeff::zero(); monos.len()];
                for (e, c) in term_list(f) {
                    let pos = monos.iter().position(|m| *m == shifted(&e, &gamma)).unwrap();
                    row[pos] += c;
                }
                rows.push(row);
            }
        }
        let free = monos.len() - dense_rank(rows);
        if t == top && free != 0 {
            return None;
        }
        total += free;
    }
    Some(total)
}

pub fn small_coeff(rng: &mut ChaCha8Rng) -> Coeff {
    q(rng.gen_range(-3..=3))
}

pub fn nonzero_coeff(rng: &mut ChaCha8Rng) -> Coeff {
    loop {
        let v: i64 = rng.gen_range(-3..=3);
        if v != 0 {
            return q(v);
        }
    }
}

/// Random homogeneous form of degree `d` in `k` variables.
pub fn random_form(rng: &mut ChaCha8Rng, k: usize, d: u32) -> Series {
    let mut f = Series::zero(Q, k, POLY);
    for e in monomials(k, d) {
        f.add_term(Exponent::new(e), &small_coeff(rng));
    }
    f
}

/// `F(A·x)`, substituting `x_i ↦ Σ_j A[i][j] x_j`.
pub fn linear_change(f: &Series, a: &[Vec<Coeff>]) -> Series {
    let k = a.len();
    let images: Vec<Series> = a
        .iter()
        .map(|row| {
            let mut s = Series::zero(Q, k, POLY);
            for (j, c) in row.iter().enumerate() {
                s.add_term(Exponent::unit(k, j), c);
            }
            s
        })
        .collect();
    let mut out = Series::zero(Q, k, POLY);
    for (e, c) in f.terms() {
        let mut m = Series::constant(Q, k, c.clone(), POLY);
        for (i, &p) in e.coords().iter().enumerate() {
            m = m.mul(&images[i].pow(p));
        }
        out = out.add(&m);
    }
    out
}

pub fn pow(c: &Coeff, e: u32) -> Coeff {
    (0..e).fold(Coeff::one(), |acc, _| acc * c)
}
