//! Staircases in ℕⁿ.
//!
//! A [`Diagram`] is stored by its minimal vertices in reverse-lex order. The
//! complement Γ splits as a disjoint union of slabs `Aᵢ × ℕ^{n−i}` and the
//! diagram itself as a disjoint union of cells `β + span(eᵢ, …, eₙ)` with β in
//! `B̄ᵢ`. Both splittings come from one sweep over the coordinates: at level
//! `i`, every point `c` of `C_{i−1}` (prefixes whose fibre meets both Δ and Γ)
//! shoots a ray along `eᵢ` and the ray is cut at two thresholds.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::exponents::{monomials_up_to, Exponent};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagramError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("diagram is not of finite type: prefix {prefix} has no closing vertex at level {level}")]
    NotFiniteType { prefix: Exponent, level: usize },
    #[error("operation undefined for the empty diagram")]
    EmptyDiagram,
    #[error("too many vertices for exact Hilbert-Samuel counting ({0} > 20)")]
    TooManyVertices(usize),
    #[error("partition check failed at {point}: {reason}")]
    PartitionFailed { point: Exponent, reason: String },
}

impl DiagramError {
    pub fn code(&self) -> &'static str {
        match self {
            DiagramError::DimensionMismatch { .. } => "diagram.dimension_mismatch",
            DiagramError::NotFiniteType { .. } => "diagram.not_finite_type",
            DiagramError::EmptyDiagram => "diagram.empty",
            DiagramError::TooManyVertices(_) => "diagram.too_many_vertices",
            DiagramError::PartitionFailed { .. } => "diagram.partition_failed",
        }
    }
}

/// Where a point sits relative to the subdivision `ℕⁿ = Δ₀ ⊔ Δ₁ ⊔ … ⊔ Γ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Location {
    Gamma,
    /// Index into [`Diagram::vertices`] of the first vertex dominating the point.
    DeltaPart(usize),
}

/// A cell `base + span(e_level, …, eₙ)` (levels are 1-based).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cell {
    pub level: usize,
    pub base: Exponent,
    pub vertex: usize,
}

impl Cell {
    pub fn contains(&self, a: &Exponent) -> bool {
        let k = self.level - 1;
        (0..a.dim()).all(|l| {
            let (x, b) = (a.get(l), self.base.get(l));
            if l < k {
                x == b
            } else {
                x >= b
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    /// `a[i-1]` holds `Aᵢ`, embedded in ℕⁿ with zero trailing coordinates.
    pub a: Vec<Vec<Exponent>>,
    /// `c[i-1]` holds `Cᵢ`; `C_n` is always empty.
    pub c: Vec<Vec<Exponent>>,
    /// All cells; `B̄ᵢ` is the set of bases of cells at level `i`.
    pub cells: Vec<Cell>,
}

impl Decomposition {
    pub fn bbar(&self, level: usize) -> Vec<Exponent> {
        self.cells.iter().filter(|c| c.level == level).map(|c| c.base.clone()).collect()
    }

    /// Cells assigned to vertex `j` (the sets `B̄_{i,j}` for all `i`).
    pub fn cells_of_vertex(&self, j: usize) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(move |c| c.vertex == j)
    }

    pub fn gamma_slab_of(&self, a: &Exponent) -> Option<usize> {
        (1..=a.dim()).find(|&i| {
            let head = a.truncate_to(i);
            self.a[i - 1].binary_search(&head).is_ok()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagram {
    n: usize,
    vertices: Vec<Exponent>,
    decomposition: Result<Decomposition, DiagramError>,
}

impl Diagram {
    pub fn from_exponents<I>(n: usize, exps: I) -> Result<Self, DiagramError>
    where
        I: IntoIterator<Item = Exponent>,
    {
        let mut all: BTreeSet<Exponent> = BTreeSet::new();
        for e in exps {
            if e.dim() != n {
                return Err(DiagramError::DimensionMismatch { expected: n, found: e.dim() });
            }
            all.insert(e);
        }
        let vertices: Vec<Exponent> = all
            .iter()
            .filter(|v| !all.iter().any(|w| w != *v && v.dominates(w)))
            .cloned()
            .collect();
        let decomposition = decompose(n, &vertices);
        Ok(Diagram { n, vertices, decomposition })
    }

    pub fn empty(n: usize) -> Self {
        Diagram { n, vertices: Vec::new(), decomposition: Err(DiagramError::EmptyDiagram) }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> &[Exponent] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, a: &Exponent) -> bool {
        self.vertices.iter().any(|v| a.dominates(v))
    }

    pub fn locate(&self, a: &Exponent) -> Location {
        match self.vertices.iter().position(|v| a.dominates(v)) {
            Some(j) => Location::DeltaPart(j),
            None => Location::Gamma,
        }
    }

    /// Every transfer `R_{ij}(v)` of a vertex stays in Δ.
    pub fn is_monotone(&self) -> bool {
        self.vertices.iter().all(|v| {
            (0..self.n).all(|i| (i + 1..self.n).all(|j| self.contains(&v.transfer(i, j))))
        })
    }

    pub fn is_finite_type(&self) -> bool {
        self.decomposition.is_ok()
    }

    /// The closed-form finite-type criterion, evaluated vertex by vertex.
    pub fn finite_type_closed_form(&self) -> bool {
        if self.is_empty() {
            return false;
        }
        self.vertices.iter().all(|alpha| {
            (0..self.n).all(|i| {
                (i + 1..self.n).all(|j| {
                    alpha.get(j) == 0
                        || self.vertices.iter().any(|v| {
                            v.get(j) == 0
                                && (0..self.n).all(|l| l == i || l == j || v.get(l) <= alpha.get(l))
                        })
                })
            })
        })
    }

    pub fn decomposition(&self) -> Result<&Decomposition, DiagramError> {
        self.decomposition.as_ref().map_err(Clone::clone)
    }

    pub fn gamma_decomposition(&self) -> Result<&[Vec<Exponent>], DiagramError> {
        Ok(&self.decomposition()?.a)
    }

    /// Largest total degree among all `Aᵢ` and `B̄ᵢ` elements.
    pub fn d_of(&self) -> Result<u32, DiagramError> {
        let dec = self.decomposition()?;
        let a = dec.a.iter().flatten().map(Exponent::degree);
        let b = dec.cells.iter().map(|c| c.base.degree());
        Ok(a.chain(b).max().unwrap_or(0))
    }

    /// Checks that every `|α| ≤ bound` lies in exactly one slab or cell, and that
    /// slabs are exactly the complement.
    pub fn partition_certificate(&self, bound: u32) -> Result<usize, DiagramError> {
        let dec = self.decomposition()?;
        let mut checked = 0;
        for a in monomials_up_to(self.n, bound) {
            let slabs = (1..=self.n)
                .filter(|&i| dec.a[i - 1].binary_search(&a.truncate_to(i)).is_ok())
                .count();
            let cells: Vec<&Cell> = dec.cells.iter().filter(|c| c.contains(&a)).collect();
            let fail = |reason: String| DiagramError::PartitionFailed { point: a.clone(), reason };
            if slabs + cells.len() != 1 {
                return Err(fail(format!("{slabs} slabs and {} cells", cells.len())));
            }
            match self.locate(&a) {
                Location::Gamma if slabs != 1 => return Err(fail("Γ point in a cell".into())),
                Location::DeltaPart(j) if cells.len() != 1 || cells[0].vertex != j => {
                    return Err(fail("Δ point outside its subdivision cell".into()))
                }
                _ => {}
            }
            checked += 1;
        }
        Ok(checked)
    }

    /// `#{α ∉ Δ : |α| ≤ s}` by inclusion-exclusion over vertex joins.
    pub fn hilbert_samuel(&self, s: u64) -> Result<u128, DiagramError> {
        if self.vertices.len() > 20 {
            return Err(DiagramError::TooManyVertices(self.vertices.len()));
        }
        let total = lattice_count(self.n, s as i128);
        let mut inside: i128 = 0;
        let zero = Exponent::zero(self.n);
        dfs_joins(&self.vertices, 0, &zero, 0, s as i128, self.n, &mut inside);
        Ok((total - inside) as u128)
    }

    pub fn hs_profile(&self, s_max: u64) -> Result<Vec<u128>, DiagramError> {
        (0..=s_max).map(|s| self.hilbert_samuel(s)).collect()
    }

    /// Lexicographic comparison of Hilbert-Samuel sequences, decided by a
    /// finite window; returns the ordering and the window end `s*`.
    pub fn hs_compare(&self, other: &Diagram) -> Result<(Ordering, u64), DiagramError> {
        if self.n != other.n {
            return Err(DiagramError::DimensionMismatch { expected: self.n, found: other.n });
        }
        let d = |x: &Diagram| -> u64 {
            let dd = x.d_of().map(u64::from).unwrap_or(0);
            let vmax = x.vertices.iter().map(|v| u64::from(v.degree())).max().unwrap_or(0);
            dd.max(vmax)
        };
        let s_star = d(self).max(d(other)) + self.n as u64 + 1;
        for s in 0..=s_star {
            let (a, b) = (self.hilbert_samuel(s)?, other.hilbert_samuel(s)?);
            if a != b {
                return Ok((a.cmp(&b), s_star));
            }
        }
        Ok((Ordering::Equal, s_star))
    }

    /// The diagram `Δ × ℕ^{extra}` in ℕ^{n+extra}.
    pub fn extended(&self, extra: usize) -> Diagram {
        let n = self.n + extra;
        if self.is_empty() {
            return Diagram::empty(n);
        }
        Diagram::from_exponents(n, self.vertices.iter().map(|v| v.resized(n))).expect("dimensions agree")
    }
}

/// Number of exponents in ℕⁿ with degree at most s: C(s+n, n).
pub(crate) fn lattice_count(n: usize, s: i128) -> i128 {
    if s < 0 {
        return 0;
    }
    let mut acc: i128 = 1;
    for k in 1..=n as i128 {
        acc = acc * (s + k) / k;
    }
    acc
}

fn dfs_joins(vs: &[Exponent], start: usize, join: &Exponent, depth: usize, s: i128, n: usize, acc: &mut i128) {
    for k in start..vs.len() {
        let j = join.join(&vs[k]);
        let deg = i128::from(j.degree());
        if deg > s {
            continue;
        }
        let sign = if depth.is_multiple_of(2) { 1 } else { -1 };
        *acc += sign * lattice_count(n, s - deg);
        dfs_joins(vs, k + 1, &j, depth + 1, s, n, acc);
    }
}

fn decompose(n: usize, vertices: &[Exponent]) -> Result<Decomposition, DiagramError> {
    if vertices.is_empty() {
        return Err(DiagramError::EmptyDiagram);
    }
    let mut a_sets = vec![Vec::new(); n];
    let mut c_sets: Vec<Vec<Exponent>> = vec![Vec::new(); n];
    let mut cells = Vec::new();
    let mut prev = vec![Exponent::zero(n)];
    for level in 1..=n {
        let k = level - 1;
        let mut next = Vec::new();
        for c in &prev {
            let below: Vec<&Exponent> = vertices
                .iter()
                .filter(|v| (0..k).all(|l| v.get(l) <= c.get(l)))
                .collect();
            let a = below.iter().map(|v| v.get(k)).min().expect("prefix lies under Δ");
            let b = below
                .iter()
                .filter(|v| (level..n).all(|l| v.get(l) == 0))
                .map(|v| v.get(k))
                .min()
                .ok_or_else(|| DiagramError::NotFiniteType { prefix: c.clone(), level })?;
            for t in 0..a {
                let mut p = c.clone();
                p.set(k, t);
                a_sets[k].push(p);
            }
            for t in a..b {
                let mut p = c.clone();
                p.set(k, t);
                next.push(p);
            }
            let mut base = c.clone();
            base.set(k, b);
            let vertex = vertices.iter().position(|v| base.dominates(v)).expect("base lies in Δ");
            cells.push(Cell { level, base, vertex });
        }
        a_sets[k].sort();
        next.sort();
        c_sets[k] = next.clone();
        prev = next;
    }
    Ok(Decomposition { a: a_sets, c: c_sets, cells })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(v: &[u32]) -> Exponent {
        Exponent::new(v.to_vec())
    }

    fn diag(n: usize, vs: &[&[u32]]) -> Diagram {
        Diagram::from_exponents(n, vs.iter().map(|v| e(v))).unwrap()
    }

    #[test]
    fn minimal_vertices() {
        let d = diag(2, &[&[2, 0], &[3, 0], &[0, 3]]);
        assert_eq!(d.vertices(), &[e(&[2, 0]), e(&[0, 3])]);
        assert!(Diagram::from_exponents(2, vec![]).unwrap().is_empty());
        assert!(Diagram::from_exponents(2, vec![e(&[1])]).is_err());
    }

    #[test]
    fn locate_examples() {
        let d = diag(2, &[&[2, 0], &[0, 3]]);
        assert_eq!(d.locate(&e(&[2, 3])), Location::DeltaPart(0));
        assert_eq!(d.locate(&e(&[1, 1])), Location::Gamma);
        assert_eq!(d.locate(&e(&[0, 5])), Location::DeltaPart(1));
    }

    #[test]
    fn structural_predicates() {
        assert!(diag(2, &[&[2, 0], &[0, 3]]).is_monotone());
        assert!(!diag(2, &[&[1, 1]]).is_monotone());
        assert!(diag(2, &[&[1, 0]]).is_monotone());
        assert!(!diag(2, &[&[1, 1]]).is_finite_type());
        assert!(!diag(2, &[&[1, 1]]).finite_type_closed_form());
        assert!(diag(2, &[&[1, 0], &[0, 1]]).is_finite_type());
    }

    #[test]
    fn staircase_decomposition() {
        let d = diag(2, &[&[2, 0], &[0, 3]]);
        let dec = d.decomposition().unwrap();
        assert!(dec.a[0].is_empty());
        assert_eq!(dec.a[1].len(), 6);
        assert_eq!(dec.bbar(1), vec![e(&[2, 0])]);
        assert_eq!(dec.bbar(2), vec![e(&[0, 3]), e(&[1, 3])]);
        assert_eq!(dec.c[0], vec![e(&[0, 0]), e(&[1, 0])]);
        assert_eq!(d.partition_certificate(10).unwrap(), 66);

        let d = diag(2, &[&[2, 0]]);
        let dec = d.decomposition().unwrap();
        assert_eq!(dec.a[0], vec![e(&[0, 0]), e(&[1, 0])]);
        assert!(dec.a[1].is_empty());

        let d = diag(1, &[&[1]]);
        assert_eq!(d.decomposition().unwrap().bbar(1), vec![e(&[1])]);
        assert!(matches!(
            diag(2, &[&[0, 2]]).decomposition(),
            Err(DiagramError::NotFiniteType { .. })
        ));
        assert!(matches!(Diagram::empty(2).decomposition(), Err(DiagramError::EmptyDiagram)));
    }

    #[test]
    fn hilbert_samuel_counts() {
        let d = diag(2, &[&[2, 0], &[0, 3]]);
        assert_eq!(d.hs_profile(4).unwrap(), vec![1, 3, 5, 6, 6]);
        let empty = Diagram::empty(3);
        assert_eq!(empty.hilbert_samuel(4).unwrap(), 35);
        assert_eq!(diag(2, &[&[0, 0]]).hilbert_samuel(7).unwrap(), 0);
    }

    #[test]
    fn degree_bound_and_comparison() {
        assert_eq!(diag(2, &[&[2, 0], &[0, 2]]).d_of().unwrap(), 3);
        assert_eq!(diag(3, &[&[2, 0, 0], &[0, 3, 0], &[0, 0, 2]]).d_of().unwrap(), 5);
        assert_eq!(diag(1, &[&[1]]).d_of().unwrap(), 1);
        let d1 = diag(2, &[&[2, 0], &[0, 3]]);
        let d2 = diag(2, &[&[2, 0], &[0, 2]]);
        assert_eq!(d2.hs_compare(&d1).unwrap().0, Ordering::Less);
        assert_eq!(d1.hs_compare(&d1).unwrap().0, Ordering::Equal);
        assert_eq!(d1.hs_compare(&Diagram::empty(2)).unwrap().0, Ordering::Less);
    }
}
