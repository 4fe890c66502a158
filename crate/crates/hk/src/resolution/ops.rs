//! Operations on marked ideals `(I, μ)` in a chart with coordinate-hyperplane
//! exceptional divisors.

use std::collections::HashMap;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::ResolutionError;
use crate::exponents::{monomials_of_degree, monomials_up_to, Exponent};
use crate::field::{Coeff, FieldSpec};
use crate::linalg::{Echelon, SparseRow};
use crate::series::{Series, POLY};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExceptionalDivisor {
    /// The divisor is `V(x_coord)` in its chart.
    pub coord: usize,
    pub id: usize,
    pub birth: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedIdeal {
    pub n: usize,
    pub generators: Vec<Series>,
    pub e: Vec<ExceptionalDivisor>,
    pub mu: u32,
}

impl MarkedIdeal {
    pub fn new(generators: Vec<Series>, mu: u32, e: Vec<ExceptionalDivisor>) -> Result<Self, ResolutionError> {
        let generators: Vec<Series> = generators.into_iter().filter(|g| !g.is_zero()).collect();
        let n = generators.first().map(Series::nvars).ok_or(ResolutionError::EmptyIdeal)?;
        if mu == 0 {
            return Err(ResolutionError::Unsupported("the marking must be at least 1".into()));
        }
        if generators.iter().any(|g| g.nvars() != n || !g.is_exact()) {
            return Err(ResolutionError::Unsupported("generators must be polynomials in one chart".into()));
        }
        let mut coords: Vec<usize> = e.iter().map(|d| d.coord).collect();
        coords.sort_unstable();
        coords.dedup();
        if coords.len() != e.len() || coords.iter().any(|&c| c >= n) {
            return Err(ResolutionError::Unsupported("exceptional divisors must sit on distinct coordinates".into()));
        }
        let generators = generators.into_iter().map(|g| g.with_blocks(n)).collect();
        Ok(MarkedIdeal { n, generators, e, mu })
    }

    /// Divisors on the given coordinates, all born at step 0.
    pub fn with_divisor_coords(generators: Vec<Series>, mu: u32, coords: &[usize]) -> Result<Self, ResolutionError> {
        let e = coords.iter().enumerate().map(|(id, &coord)| ExceptionalDivisor { coord, id, birth: 0 }).collect();
        Self::new(generators, mu, e)
    }

    pub fn field(&self) -> FieldSpec {
        self.generators[0].field()
    }
}

/// K-linear span pruning: keeps members not in the span of earlier ones.
pub(crate) fn prune_span(items: Vec<Series>) -> Vec<Series> {
    let Some(field) = items.first().map(Series::field) else { return items };
    let mut index: HashMap<Exponent, usize> = HashMap::new();
    let mut ech = Echelon::new(field);
    let mut kept = Vec::new();
    for s in items {
        if s.is_zero() {
            continue;
        }
        let row: SparseRow = s
            .terms()
            .map(|(e, c)| {
                let next = index.len();
                (*index.entry(e.clone()).or_insert(next), c.clone())
            })
            .collect();
        if ech.insert(row).is_some() {
            kept.push(s);
        }
    }
    kept
}

/// Drops monomials divisible by another kept monomial.
pub(crate) fn prune_monomial_multiples(items: Vec<Series>) -> Vec<Series> {
    let monos: Vec<Exponent> = items.iter().filter(|s| s.len() == 1).filter_map(|s| s.supp().pop()).collect();
    items
        .into_iter()
        .filter(|s| {
            if s.len() != 1 {
                return true;
            }
            let e = s.supp().pop().expect("single term");
            !monos.iter().any(|m| m != &e && e.dominates(m))
        })
        .collect()
}

/// Generators together with all Hasse derivatives of order `≤ order`.
pub fn derivative_ideal(gens: &[Series], order: u32) -> Vec<Series> {
    let Some(n) = gens.first().map(Series::nvars) else { return Vec::new() };
    let alphas = monomials_up_to(n, order);
    let mut out = Vec::new();
    for g in gens {
        for a in &alphas {
            out.push(g.hasse(a));
        }
    }
    prune_span(out)
}

/// Whether every generator has order `≥ μ` at the origin.
pub(crate) fn origin_in_cosupport(gens: &[Series], mu: u32) -> bool {
    gens.iter().all(|g| g.ord().map_or(true, |o| o >= mu))
}

pub(crate) fn vanish_on(gens: &[Series], coords: &[usize]) -> bool {
    gens.iter().all(|g| g.terms().all(|(e, _)| coords.iter().any(|&c| e.get(c) > 0)))
}

/// Sets the listed coordinates to zero.
pub(crate) fn restrict(g: &Series, coords: &[usize]) -> Series {
    let mut out = g.zero_like();
    for (e, c) in g.terms() {
        if coords.iter().all(|&k| e.get(k) == 0) {
            out.add_term(e.clone(), c);
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct Cosupport {
    pub generators: Vec<Series>,
}

impl Cosupport {
    pub fn of(m: &MarkedIdeal) -> Self {
        Cosupport { generators: derivative_ideal(&m.generators, m.mu - 1) }
    }

    pub fn contains(&self, point: &[Coeff]) -> bool {
        self.generators.iter().all(|g| g.evaluate(point).is_ok_and(|v| v.is_zero()))
    }

    /// Smallest tried degree at which `1` lies in the span of the multiples
    /// `x^β·g` of degree `≤ B`; `None` if no tried degree up to `cap` works.
    pub fn certify_empty(&self, cap: u32) -> Option<u32> {
        unit_certificate(&self.generators, cap)
    }
}

pub(crate) fn unit_certificate(gens: &[Series], cap: u32) -> Option<u32> {
    let gens: Vec<&Series> = gens.iter().filter(|g| !g.is_zero()).collect();
    let first = gens.first()?;
    if gens.iter().any(|g| g.ord() == Ok(0) && g.len() == 1) {
        return Some(0);
    }
    let (n, field) = (first.nvars(), first.field());
    let d0 = gens.iter().filter_map(|g| g.terms().map(|(e, _)| e.degree()).max()).max().unwrap_or(0);
    let mut tries = vec![d0, d0 + 2, 2 * d0, cap];
    tries.retain(|&b| b <= cap.max(d0));
    tries.dedup();
    for bound in tries {
        let mut monos = monomials_up_to(n, bound);
        monos.reverse();
        let index: HashMap<Exponent, usize> = monos.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        let mut ech = Echelon::new(field);
        for g in &gens {
            let deg = g.terms().map(|(e, _)| e.degree()).max().unwrap_or(0);
            if deg > bound {
                continue;
            }
            for beta in monomials_up_to(n, bound - deg) {
                let row: SparseRow = g.terms().map(|(e, c)| (index[&e.add(&beta)], c.clone())).collect();
                ech.insert(row);
            }
        }
        let unit: SparseRow = [(index[&Exponent::zero(n)], Coeff::one())].into_iter().collect();
        if ech.contains(&unit) {
            return Some(bound);
        }
    }
    None
}

/// Pullback under the chart `x_i = x_i'·x_j` for `i ∈ center \ {j}`.
pub fn pullback(f: &Series, center: &[usize], j: usize) -> Series {
    let mut out = f.zero_like();
    for (e, c) in f.terms() {
        let mut g = e.clone();
        let total: u32 = center.iter().map(|&i| e.get(i)).sum();
        g.set(j, total);
        out.add_term(g, c);
    }
    out
}

/// `σ*(f) / x_j^μ` for every generator.
pub fn controlled_transform(gens: &[Series], mu: u32, center: &[usize], j: usize) -> Result<Vec<Series>, ResolutionError> {
    gens.iter()
        .map(|g| {
            pullback(g, center, j)
                .divide_var_power(j, mu)
                .ok_or_else(|| ResolutionError::InadmissibleCenter { center: center.to_vec(), mu })
        })
        .collect()
}

/// `σ*(f)` divided by its own maximal power of `x_j`.
pub fn strict_transform(gens: &[Series], center: &[usize], j: usize) -> Vec<Series> {
    gens.iter()
        .map(|g| {
            let p = pullback(g, center, j);
            let k = p.var_valuation(j).unwrap_or(0);
            p.divide_var_power(j, k).expect("valuation divides")
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CompanionTag {
    MaximalOrder,
    NeedsMonomialStep,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    /// Exponent of the exceptional monomial `M(I)` (zero off the divisor coordinates).
    pub monomial: Exponent,
    /// Generators of `N(I) = I / M(I)`.
    pub rest: Vec<Series>,
    /// Order of `N(I)` at the origin.
    pub rest_order: u32,
}

pub fn factor_exceptional(gens: &[Series], e_coords: &[usize]) -> Factorization {
    let n = gens.first().map(Series::nvars).unwrap_or(0);
    let mut monomial = Exponent::zero(n);
    for &c in e_coords {
        monomial.set(c, gens.iter().filter_map(|g| g.var_valuation(c)).min().unwrap_or(0));
    }
    let rest: Vec<Series> = gens
        .iter()
        .map(|g| {
            let mut out = g.clone();
            for &c in e_coords {
                out = out.divide_var_power(c, monomial.get(c)).expect("minimal valuation divides");
            }
            out
        })
        .collect();
    let rest_order = rest.iter().filter_map(|g| g.ord().ok()).min().unwrap_or(0);
    Factorization { monomial, rest, rest_order }
}

/// All products of `k` generators (multisets), pruned by span.
pub(crate) fn ideal_power(gens: &[Series], k: u32) -> Vec<Series> {
    let Some(first) = gens.first() else { return Vec::new() };
    let mut layer = vec![(0usize, Series::constant(first.field(), first.nvars(), Coeff::one(), POLY))];
    for _ in 0..k {
        let mut next = Vec::new();
        for (start, p) in &layer {
            for (i, g) in gens.iter().enumerate().skip(*start) {
                next.push((i, p.mul(g)));
            }
        }
        layer = next;
    }
    prune_span(layer.into_iter().map(|(_, p)| p).collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Companion {
    pub tag: CompanionTag,
    pub generators: Vec<Series>,
    pub mu: u32,
    pub factorization: Factorization,
}

/// Companion ideal at the origin: `(N, o)` when `o ≥ μ`, else
/// `(N^{μ−o} + M^{o}, o(μ−o))`. When `N` is a unit the monomial part `(M, μ)` is returned.
pub fn companion(gens: &[Series], mu: u32, e_coords: &[usize]) -> Companion {
    let factorization = factor_exceptional(gens, e_coords);
    let o = factorization.rest_order;
    let field = gens[0].field();
    let m_series = |k: u32| {
        let e = Exponent::new(factorization.monomial.coords().iter().map(|a| a * k).collect());
        Series::monomial(field, e, Coeff::one(), POLY)
    };
    if o == 0 {
        return Companion { tag: CompanionTag::NeedsMonomialStep, generators: vec![m_series(1)], mu, factorization };
    }
    let (generators, mu_j) = if o >= mu {
        (prune_span(factorization.rest.clone()), o)
    } else {
        let mut g = ideal_power(&factorization.rest, mu - o);
        if !factorization.monomial.is_zero() {
            g.push(m_series(o));
        }
        (prune_span(g), o * (mu - o))
    };
    Companion { tag: CompanionTag::MaximalOrder, generators, mu: mu_j, factorization }
}

pub fn companion_ideal(m: &MarkedIdeal) -> (MarkedIdeal, CompanionTag) {
    let coords: Vec<usize> = m.e.iter().map(|d| d.coord).collect();
    let c = companion(&m.generators, m.mu, &coords);
    let ideal = MarkedIdeal { n: m.n, generators: c.generators, e: m.e.clone(), mu: c.mu };
    (ideal, c.tag)
}

fn factorial(m: u32) -> u32 {
    (1..=m).product()
}

/// Generators of the degree-`μ!` part of the differential Rees algebra of
/// `(I, μ)`, restricted to `V(x_fixed)`; returns them with the new marking.
pub fn coefficient_capacitor(gens: &[Series], mu: u32, fixed: &[usize]) -> Result<(Vec<Series>, u32), ResolutionError> {
    if mu > 3 {
        return Err(ResolutionError::GuardExceeded(mu));
    }
    let Some(n) = gens.first().map(Series::nvars) else { return Ok((Vec::new(), 1)) };
    let c = factorial(mu);
    // pools[w-1]: derivatives of order μ−w, weight w
    let pools: Vec<Vec<Series>> = (1..=mu)
        .map(|w| {
            let alphas = monomials_of_degree(n, mu - w);
            let items = gens.iter().flat_map(|g| alphas.iter().map(move |a| restrict(&g.hasse(a), fixed))).collect();
            prune_span(items)
        })
        .collect();
    let mut multisets = Vec::new();
    weight_multisets(mu, c, &mut Vec::new(), &mut multisets);
    let mut out = Vec::new();
    for ms in multisets {
        let mut layer: Vec<(usize, usize, Series)> =
            vec![(usize::MAX, 0, Series::constant(gens[0].field(), n, Coeff::one(), POLY))];
        for &w in &ms {
            let pool = &pools[w as usize - 1];
            let mut next = Vec::new();
            for (prev_w, start, p) in &layer {
                let from = if *prev_w == w as usize { *start } else { 0 };
                for (i, g) in pool.iter().enumerate().skip(from) {
                    next.push((w as usize, i, p.mul(g)));
                }
            }
            layer = next;
        }
        out.extend(layer.into_iter().map(|(_, _, p)| p));
    }
    Ok((prune_monomial_multiples(prune_span(out)), c))
}

/// Non-increasing weight lists with sum `≥ c` that drop below `c` when the last entry is removed.
fn weight_multisets(max_w: u32, c: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    let sum: u32 = cur.iter().sum();
    if sum >= c {
        if sum - cur.last().copied().unwrap_or(0) < c {
            out.push(cur.clone());
        }
        return;
    }
    let top = cur.last().copied().unwrap_or(max_w);
    for w in (1..=top).rev() {
        cur.push(w);
        weight_multisets(max_w, c, cur, out);
        cur.pop();
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TangentDirection {
    pub coord: usize,
    pub u: Series,
    /// `x_coord ↦ replacement` makes `u` a multiple of the coordinate; `None` when it already is.
    pub replacement: Option<Series>,
}

fn linear_coeff(u: &Series, k: usize) -> Coeff {
    u.coeff(&Exponent::unit(u.nvars(), k))
}

fn pure_coordinate(u: &Series) -> Option<usize> {
    let mut terms = u.terms();
    let (e, _) = terms.next()?;
    (terms.next().is_none() && e.degree() == 1).then(|| e.coords().iter().position(|&a| a == 1).expect("degree one"))
}

/// A hypersurface of maximal contact through the origin taken from `D^{μ−1}(I)`.
pub fn tangent_direction(
    gens: &[Series],
    mu: u32,
    fixed: &[usize],
    e_coords: &[usize],
    prefer: &[usize],
    seed: u64,
) -> Result<TangentDirection, ResolutionError> {
    let cands: Vec<Series> = derivative_ideal(gens, mu - 1)
        .into_iter()
        .filter(|u| u.constant_term().is_zero() && u.ord() == Ok(1))
        .collect();
    let pure: Vec<(usize, &Series)> =
        cands.iter().filter_map(|u| pure_coordinate(u).map(|k| (k, u))).filter(|(k, _)| !fixed.contains(k)).collect();
    if let Some((k, u)) = pure.iter().find(|(k, _)| prefer.contains(k)).or_else(|| pure.first()) {
        return Ok(TangentDirection { coord: *k, u: (*u).clone(), replacement: None });
    }
    let n = gens[0].nvars();
    let field = gens[0].field();
    let triangular = |u: &Series| -> Option<TangentDirection> {
        (0..n).filter(|k| !fixed.contains(k) && !e_coords.contains(k)).find_map(|k| {
            let c = linear_coeff(u, k);
            if c.is_zero() {
                return None;
            }
            let mut h = u.clone();
            h.add_term(Exponent::unit(n, k), &field.neg(&c));
            if h.terms().any(|(e, _)| e.get(k) > 0) {
                return None;
            }
            let inv = field.inv(&c).ok()?;
            let xk = Series::variable(field, n, k, POLY);
            let replacement = xk.sub(&h).scale(&inv);
            Some(TangentDirection { coord: k, u: u.clone(), replacement: Some(replacement) })
        })
    };
    if let Some(t) = cands.iter().find_map(&triangular) {
        return Ok(t);
    }
    let pool = derivative_ideal(gens, mu - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..8 {
        let mut u = gens[0].zero_like();
        for g in &pool {
            u = u.add(&g.scale(&field.from_int(rng.gen_range(-3..=3))));
        }
        if u.constant_term().is_zero() && u.ord() == Ok(1) {
            if let Some(t) = triangular(&u) {
                return Ok(t);
            }
        }
    }
    Err(ResolutionError::NoTangentDirection)
}

/// Minimal subsets `S` of divisor coordinates with `Σ_S a ≥ μ`; the one whose
/// divisors are oldest (lexicographically on sorted ages) wins.
pub fn monomial_center(exponents: &[(usize, u32, usize)], mu: u32) -> Result<Vec<usize>, ResolutionError> {
    let live: Vec<&(usize, u32, usize)> = exponents.iter().filter(|(_, a, _)| *a > 0).collect();
    let mut best: Option<(Vec<usize>, Vec<usize>)> = None;
    for mask in 1u32..(1 << live.len()) {
        let chosen: Vec<&(usize, u32, usize)> =
            live.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, d)| *d).collect();
        let sum: u32 = chosen.iter().map(|d| d.1).sum();
        let min = chosen.iter().map(|d| d.1).min().unwrap_or(0);
        if sum < mu || sum - min >= mu {
            continue;
        }
        let mut ages: Vec<usize> = chosen.iter().map(|d| d.2).collect();
        ages.sort_unstable();
        let mut coords: Vec<usize> = chosen.iter().map(|d| d.0).collect();
        coords.sort_unstable();
        let better = match &best {
            None => true,
            Some((a, c)) => (&ages, &coords) < (a, c),
        };
        if better {
            best = Some((ages, coords));
        }
    }
    best.map(|(_, c)| c).ok_or(ResolutionError::EmptyCosupport)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::parse;

    fn p(t: &str, n: usize) -> Series {
        parse(t, FieldSpec::Rationals, n, 0, POLY).unwrap()
    }

    #[test]
    fn derivatives_and_cosupport() {
        let d = derivative_ideal(&[p("x^2 - y^3", 2)], 1);
        assert_eq!(d.len(), 3);
        let m = MarkedIdeal::new(vec![p("x", 2)], 2, vec![]).unwrap();
        assert_eq!(Cosupport::of(&m).certify_empty(4), Some(0));
        let cusp = MarkedIdeal::new(vec![p("x^2 - y^3", 2)], 2, vec![]).unwrap();
        let cs = Cosupport::of(&cusp);
        assert!(cs.contains(&[Coeff::zero(), Coeff::zero()]));
        assert_eq!(cs.certify_empty(8), None);
        let f2 = FieldSpec::Prime(2);
        let sq = parse("x^2", f2, 1, 0, POLY).unwrap();
        assert_eq!(derivative_ideal(&[sq], 1).len(), 1);
    }

    #[test]
    fn charts_and_transforms() {
        let f = [p("x^2 - y^3", 2)];
        let yc = controlled_transform(&f, 2, &[0, 1], 1).unwrap();
        assert!(yc[0].same_terms(&p("x^2 - y", 2)));
        let xc = controlled_transform(&f, 2, &[0, 1], 0).unwrap();
        assert!(xc[0].same_terms(&p("1 - x*y^3", 2)));
        let m = controlled_transform(&[p("x^3*y^2", 2)], 4, &[0, 1], 1).unwrap();
        assert!(m[0].same_terms(&p("x^3*y", 2)));
        assert!(controlled_transform(&f, 3, &[0, 1], 1).is_err());
        assert!(strict_transform(&f, &[0, 1], 1)[0].same_terms(&p("x^2 - y", 2)));
    }

    #[test]
    fn companions() {
        let c = companion(&[p("x^3*(x + y^2)", 2)], 5, &[0]);
        assert_eq!(c.mu, 4);
        assert_eq!(c.factorization.rest_order, 1);
        let expected = [p("(x + y^2)^4", 2), p("x^3", 2)];
        assert_eq!(prune_span([c.generators.clone(), expected.to_vec()].concat()).len(), 2);
        let c = companion(&[p("x^2 + y^2", 2)], 2, &[]);
        assert_eq!((c.tag, c.mu), (CompanionTag::MaximalOrder, 2));
        let c = companion(&[p("x^3*y^2", 2)], 4, &[0, 1]);
        assert_eq!(c.tag, CompanionTag::NeedsMonomialStep);
    }

    #[test]
    fn capacitors() {
        let (g, c) = coefficient_capacitor(&[p("x", 2)], 1, &[]).unwrap();
        assert_eq!((g.len(), c), (1, 1));
        let (g, c) = coefficient_capacitor(&[p("x^2 - y^3", 2)], 2, &[]).unwrap();
        assert_eq!(c, 2);
        let z = [Coeff::zero(), Coeff::zero()];
        assert!(origin_in_cosupport(&g, 2));
        let cs = Cosupport { generators: derivative_ideal(&g, 1) };
        assert!(cs.contains(&z));
        assert!(!cs.contains(&[Coeff::one(), Coeff::one()]));
        assert!(matches!(coefficient_capacitor(&[p("x^4", 1)], 4, &[]), Err(ResolutionError::GuardExceeded(4))));
    }

    #[test]
    fn tangents_and_monomial_centers() {
        let t = tangent_direction(&[p("x^2 - y^3", 2)], 2, &[], &[], &[], 0).unwrap();
        assert_eq!((t.coord, t.replacement.is_none()), (0, true));
        let t = tangent_direction(&[p("x + y^2", 2)], 1, &[], &[], &[], 0).unwrap();
        assert_eq!(t.coord, 0);
        assert!(t.replacement.unwrap().same_terms(&p("x - y^2", 2)));
        let t = tangent_direction(&[p("x^2 + y^2", 2)], 2, &[], &[], &[], 0).unwrap();
        assert_eq!(t.coord, 0);
        assert_eq!(monomial_center(&[(0, 3, 0), (1, 2, 1)], 4).unwrap(), vec![0, 1]);
        assert_eq!(monomial_center(&[(0, 5, 0)], 4).unwrap(), vec![0]);
        assert!(matches!(monomial_center(&[(0, 3, 0)], 4), Err(ResolutionError::EmptyCosupport)));
    }
}
