//! Stanley decompositions of finitely presented graded modules.
//!
//! A module is `R^k / N` with `N` spanned by homogeneous relation vectors and
//! all free generators in degree 0. A basis entry `(b, i, d)` stands for the
//! free summand `Rᵢ·b` with `Rᵢ = K[x_{n−i+1}, …, xₙ]` (so `R₀ = K`).
//!
//! All checks are degree-wise linear algebra in `R^k_t`: the multiples `x^β·b`
//! of the entries, with `β` in the variables of their ring, must project onto a
//! basis of `M_t = R^k_t / N_t`.

use std::collections::HashMap;

use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use thiserror::Error;

use crate::diagrams::{Diagram, DiagramError};
use crate::exponents::{monomials_of_degree, Exponent, MonomialOrder};
use crate::field::{Coeff, FieldSpec};
use crate::linalg::{Echelon, SparseRow};
use crate::series::{default_names, parse, Series, SeriesError, POLY};
use crate::stdbasis::random_unimodular;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StanleyError {
    #[error("relation {index} is not homogeneous")]
    NotHomogeneous { index: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("no finite-type coordinates found after {0} attempts")]
    RetryExhausted(usize),
    #[error("basis verification failed in degree {degree}: {reason}")]
    VerificationFailed { degree: u32, reason: String },
    #[error("malformed module JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

impl StanleyError {
    pub fn code(&self) -> &'static str {
        match self {
            StanleyError::NotHomogeneous { .. } => "stanley.not_homogeneous",
            StanleyError::Shape(_) => "stanley.shape",
            StanleyError::RetryExhausted(_) => "stanley.retry_exhausted",
            StanleyError::VerificationFailed { .. } => "stanley.verification_failed",
            StanleyError::Json(_) => "stanley.json",
            StanleyError::Series(e) => e.code(),
            StanleyError::Diagram(e) => e.code(),
        }
    }
}

/// `C(m+k, k)` for `m ≥ 0`, else 0.
pub fn phi(m: i64, k: u32) -> u128 {
    if m < 0 {
        return 0;
    }
    let m = m as u128;
    (1..=u128::from(k)).fold(1u128, |acc, j| acc * (m + j) / j)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub degree: u32,
    pub entries: Vec<Series>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedModule {
    field: FieldSpec,
    n: usize,
    rank: usize,
    relations: Vec<Relation>,
}

#[derive(Deserialize)]
struct ModuleJson {
    n: usize,
    rank: usize,
    #[serde(default)]
    relations: Vec<Vec<String>>,
}

fn homogeneous_degree(s: &Series) -> Option<Option<u32>> {
    let mut degs = s.terms().map(|(e, _)| e.degree());
    match degs.next() {
        None => Some(None),
        Some(d) => degs.all(|x| x == d).then_some(Some(d)),
    }
}

impl GradedModule {
    pub fn new(field: FieldSpec, n: usize, rank: usize, relations: Vec<Vec<Series>>) -> Result<Self, StanleyError> {
        let mut rels = Vec::new();
        for (index, vector) in relations.into_iter().enumerate() {
            if vector.len() != rank {
                return Err(StanleyError::Shape(format!("relation {index} has length {}, rank is {rank}", vector.len())));
            }
            let mut degree = None;
            for s in &vector {
                if s.nvars() != n || s.field() != field {
                    return Err(StanleyError::Shape(format!("relation {index} has the wrong ring")));
                }
                match homogeneous_degree(s) {
                    None => return Err(StanleyError::NotHomogeneous { index }),
                    Some(None) => {}
                    Some(Some(d)) if degree.is_none_or(|x| x == d) => degree = Some(d),
                    Some(Some(_)) => return Err(StanleyError::NotHomogeneous { index }),
                }
            }
            if let Some(degree) = degree {
                rels.push(Relation { degree, entries: vector });
            }
        }
        Ok(GradedModule { field, n, rank, relations: rels })
    }

    /// `{"n": 2, "rank": 1, "relations": [["x^2"]]}`
    pub fn from_json(text: &str, field: FieldSpec) -> Result<Self, StanleyError> {
        let raw: ModuleJson = serde_json::from_str(text).map_err(|e| StanleyError::Json(e.to_string()))?;
        let relations = raw
            .relations
            .iter()
            .map(|v| v.iter().map(|t| parse(t, field, raw.n, 0, POLY)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(field, raw.n, raw.rank, relations)
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn max_relation_degree(&self) -> u32 {
        self.relations.iter().map(|r| r.degree).max().unwrap_or(0)
    }

    /// The module after the variable substitution `x ↦ A·x`.
    pub fn transformed(&self, change: &[Vec<Coeff>]) -> Result<Self, StanleyError> {
        let relations = self
            .relations
            .iter()
            .map(|r| {
                let entries = r.entries.iter().map(|s| s.substitute_linear(change)).collect::<Result<Vec<_>, _>>()?;
                Ok(Relation { degree: r.degree, entries })
            })
            .collect::<Result<Vec<_>, SeriesError>>()?;
        Ok(GradedModule { relations, ..self.clone() })
    }

    /// Standard unit vector `x^γ·e_c`.
    pub fn monomial_element(&self, c: usize, gamma: &Exponent) -> Vec<Series> {
        (0..self.rank)
            .map(|j| {
                if j == c {
                    Series::monomial(self.field, gamma.clone(), Coeff::one(), POLY)
                } else {
                    Series::zero(self.field, self.n, POLY)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StanleyEntry {
    pub generator: Vec<Series>,
    pub ring_index: usize,
    pub degree: u32,
}

impl StanleyEntry {
    pub fn render(&self) -> String {
        let n = self.generator.first().map(Series::nvars).unwrap_or(0);
        let names = default_names(n, 0);
        let parts: Vec<String> = self.generator.iter().map(|s| s.render(Some(&names))).collect();
        if parts.len() == 1 {
            parts[0].clone()
        } else {
            format!("({})", parts.join(", "))
        }
    }
}

#[derive(Debug, Clone)]
pub struct StanleyBasis {
    /// Variable substitution under which `module` and the entries are expressed.
    pub change: Vec<Vec<Coeff>>,
    pub module: GradedModule,
    pub entries: Vec<StanleyEntry>,
    pub verified_to: u32,
}

impl StanleyBasis {
    pub fn d_max(&self) -> u32 {
        self.entries.iter().map(|e| e.degree).max().unwrap_or(0)
    }

    pub fn hilbert(&self, s: u32) -> u128 {
        hilbert_from_basis(&self.entries, s)
    }
}

/// `Σ φ(s − d, i)` over the entries: the cumulative count `dim M/m^{s+1}M`.
pub fn hilbert_from_basis(entries: &[StanleyEntry], s: u32) -> u128 {
    entries.iter().map(|e| phi(i64::from(s) - i64::from(e.degree), e.ring_index as u32)).sum()
}

/// Coordinates on `R^k_t`, components outermost.
struct DegreeSpace {
    monos: Vec<Exponent>,
    index: HashMap<Exponent, usize>,
    rank: usize,
}

impl DegreeSpace {
    fn new(n: usize, rank: usize, t: u32) -> Self {
        let mut monos = monomials_of_degree(n, t);
        MonomialOrder::standard(n).completed().sort(&mut monos);
        let index = monos.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        DegreeSpace { monos, index, rank }
    }

    fn dim(&self) -> usize {
        self.monos.len() * self.rank
    }

    fn row(&self, element: &[Series]) -> SparseRow {
        let m = self.monos.len();
        let mut row = SparseRow::new();
        for (c, s) in element.iter().enumerate() {
            for (e, v) in s.terms() {
                if let Some(&i) = self.index.get(e) {
                    row.insert(c * m + i, v.clone());
                }
            }
        }
        row
    }

    fn relation_echelon(&self, module: &GradedModule, t: u32) -> Echelon {
        let mut ech = Echelon::new(module.field);
        for r in &module.relations {
            if r.degree > t {
                continue;
            }
            for beta in monomials_of_degree(module.n, t - r.degree) {
                let shifted: Vec<Series> = r.entries.iter().map(|s| s.mul_monomial(&beta, &Coeff::one())).collect();
                ech.insert(self.row(&shifted));
            }
        }
        ech
    }
}

/// Monomials of degree `t` in the last `i` of `n` variables.
fn tail_monomials(n: usize, i: usize, t: u32) -> Vec<Exponent> {
    monomials_of_degree(i, t)
        .into_iter()
        .map(|b| {
            let mut v = vec![0; n - i];
            v.extend_from_slice(b.coords());
            Exponent::new(v)
        })
        .collect()
}

fn entry_rows(space: &DegreeSpace, entries: &[StanleyEntry], n: usize, t: u32) -> Vec<SparseRow> {
    let mut rows = Vec::new();
    for e in entries.iter().filter(|e| e.degree <= t) {
        for beta in tail_monomials(n, e.ring_index, t - e.degree) {
            let shifted: Vec<Series> = e.generator.iter().map(|s| s.mul_monomial(&beta, &Coeff::one())).collect();
            rows.push(space.row(&shifted));
        }
    }
    rows
}

/// `dim M_t` for `t ≤ bound`, by ranks of the relation spans.
pub fn graded_dims(module: &GradedModule, bound: u32) -> Vec<u128> {
    (0..=bound)
        .map(|t| {
            let space = DegreeSpace::new(module.n, module.rank, t);
            (space.dim() - space.relation_echelon(module, t).rank()) as u128
        })
        .collect()
}

/// Cumulative `dim M/m^{s+1}M`.
pub fn hilbert_brute(module: &GradedModule, s: u32) -> u128 {
    graded_dims(module, s).iter().sum()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisVerdict {
    pub bound: u32,
    pub failure: Option<(u32, String)>,
}

impl BasisVerdict {
    pub fn ok(&self) -> bool {
        self.failure.is_none()
    }
}

/// Spanning and independence of the entry multiples modulo `N_t`, degree by degree.
pub fn check_basis(module: &GradedModule, entries: &[StanleyEntry], bound: u32) -> BasisVerdict {
    for t in 0..=bound {
        let space = DegreeSpace::new(module.n, module.rank, t);
        let mut ech = space.relation_echelon(module, t);
        let base = ech.rank();
        let rows = entry_rows(&space, entries, module.n, t);
        let count = rows.len();
        for r in rows {
            ech.insert(r);
        }
        let added = ech.rank() - base;
        let failure = if added < count {
            Some(format!("{} of {count} multiples are dependent", count - added))
        } else if ech.rank() < space.dim() {
            Some(format!("span misses {} dimensions", space.dim() - ech.rank()))
        } else {
            None
        };
        if let Some(reason) = failure {
            return BasisVerdict { bound, failure: Some((t, reason)) };
        }
    }
    BasisVerdict { bound, failure: None }
}

/// Whether the entry multiples span `M_t`.
fn generates_in_degree(module: &GradedModule, entries: &[StanleyEntry], t: u32) -> bool {
    let space = DegreeSpace::new(module.n, module.rank, t);
    let mut ech = space.relation_echelon(module, t);
    for r in entry_rows(&space, entries, module.n, t) {
        ech.insert(r);
    }
    ech.rank() == space.dim()
}

fn profile(entries: &[StanleyEntry]) -> Vec<(usize, u32)> {
    let mut p: Vec<(usize, u32)> = entries.iter().map(|e| (e.ring_index, e.degree)).collect();
    p.sort_unstable();
    p
}

/// `B` has the same (ring, degree) profile as `A` and generates `M` up to `bound`.
pub fn majorizes(module: &GradedModule, a: &[StanleyEntry], b: &[StanleyEntry], bound: u32) -> bool {
    profile(a) == profile(b) && (0..=bound).all(|t| generates_in_degree(module, b, t))
}

pub fn verification_bound(module: &GradedModule, d_max: u32) -> u32 {
    (2 * d_max + 5).max(module.max_relation_degree() + module.n as u32 + 1)
}

/// Initial exponents of `N` per component, collected up to `bound`.
fn initial_diagrams(module: &GradedModule, bound: u32) -> Result<Vec<Diagram>, StanleyError> {
    let mut per_component: Vec<Vec<Exponent>> = vec![Vec::new(); module.rank];
    for t in 0..=bound {
        let space = DegreeSpace::new(module.n, module.rank, t);
        let m = space.monos.len();
        for p in space.relation_echelon(module, t).pivots() {
            per_component[p / m].push(space.monos[p % m].clone());
        }
    }
    per_component.into_iter().map(|v| Ok(Diagram::from_exponents(module.n, v)?)).collect()
}

/// Γ-slab entries of each component; `None` when some diagram is not of finite type.
fn slab_entries(module: &GradedModule, diagrams: &[Diagram]) -> Option<Vec<StanleyEntry>> {
    let n = module.n;
    let mut entries = Vec::new();
    for (c, diagram) in diagrams.iter().enumerate() {
        if diagram.is_empty() {
            entries.push(StanleyEntry { generator: module.monomial_element(c, &Exponent::zero(n)), ring_index: n, degree: 0 });
            continue;
        }
        let slabs = diagram.gamma_decomposition().ok()?;
        for (level, a) in slabs.iter().enumerate() {
            for base in a {
                entries.push(StanleyEntry {
                    generator: module.monomial_element(c, base),
                    ring_index: n - (level + 1),
                    degree: base.degree(),
                });
            }
        }
    }
    Some(entries)
}

pub fn stanley_decomposition(module: &GradedModule, seed: u64) -> Result<StanleyBasis, StanleyError> {
    const ATTEMPTS: usize = 32;
    let n = module.n;
    let field = module.field;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut change: Vec<Vec<Coeff>> =
        (0..n).map(|i| (0..n).map(|j| field.from_int(i64::from(i == j))).collect()).collect();
    for _ in 0..ATTEMPTS {
        let local = module.transformed(&change)?;
        let mut bound = local.max_relation_degree() + n as u32 + 1;
        loop {
            let diagrams = initial_diagrams(&local, bound)?;
            let Some(entries) = slab_entries(&local, &diagrams) else { break };
            let d_max = entries.iter().map(|e| e.degree).max().unwrap_or(0);
            let needed = verification_bound(&local, d_max);
            if needed > bound {
                bound = needed;
                continue;
            }
            let verdict = check_basis(&local, &entries, bound);
            if let Some((degree, reason)) = verdict.failure {
                return Err(StanleyError::VerificationFailed { degree, reason });
            }
            return Ok(StanleyBasis { change, module: local, entries, verified_to: bound });
        }
        change = random_unimodular(&field, n, &mut rng);
    }
    Err(StanleyError::RetryExhausted(ATTEMPTS))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizationVerdict {
    pub d_m: u32,
    pub threshold: u32,
    /// First degree `≤ d(M)+1` where the candidates fail to generate.
    pub threshold_failure: Option<u32>,
    pub oracle_bound: u32,
    pub oracle_failure: Option<u32>,
}

impl StabilizationVerdict {
    pub fn threshold_pass(&self) -> bool {
        self.threshold_failure.is_none()
    }

    pub fn oracle_pass(&self) -> bool {
        self.oracle_failure.is_none()
    }

    /// Passing the threshold but failing the oracle would refute stabilization.
    pub fn consistent(&self) -> bool {
        !self.threshold_pass() || self.oracle_pass()
    }
}

/// Generation test at degrees `≤ d(M)+1`, then independently up to the oracle bound.
pub fn stabilization_check(
    known: &StanleyBasis,
    candidates: &[StanleyEntry],
    oracle_bound: Option<u32>,
) -> Result<StabilizationVerdict, StanleyError> {
    if profile(&known.entries) != profile(candidates) {
        return Err(StanleyError::Shape("candidates are not degree-matched to the basis".into()));
    }
    let module = &known.module;
    let d_m = known.d_max();
    let threshold = d_m + 1;
    let oracle_bound = oracle_bound.unwrap_or(2 * d_m + 5);
    let threshold_failure = (0..=threshold).find(|&t| !generates_in_degree(module, candidates, t));
    let oracle_failure = (0..=oracle_bound).find(|&t| !generates_in_degree(module, candidates, t));
    Ok(StabilizationVerdict { d_m, threshold, threshold_failure, oracle_bound, oracle_failure })
}

/// Adds random same-degree terms to each generator: with `higher_only`, only
/// monomials after the generator's leading term in each component.
pub fn perturbed_candidates(basis: &StanleyBasis, rng: &mut ChaCha8Rng, higher_only: bool) -> Vec<StanleyEntry> {
    let module = &basis.module;
    let order = MonomialOrder::standard(module.n).completed();
    basis
        .entries
        .iter()
        .map(|e| {
            let lead = e
                .generator
                .iter()
                .enumerate()
                .find_map(|(c, s)| s.terms().next().map(|(x, _)| (c, x.clone())));
            let mut generator = e.generator.clone();
            for (c, comp) in generator.iter_mut().enumerate() {
                for mono in monomials_of_degree(module.n, e.degree) {
                    let after = match &lead {
                        Some((lc, lx)) => c > *lc || (c == *lc && order.cmp_unchecked(&mono, lx).is_gt()),
                        None => true,
                    };
                    if (after || !higher_only) && rng.gen_bool(0.4) {
                        let v = module.field.from_int(rng.gen_range(-3..=3));
                        *comp = comp.add(&Series::monomial(module.field, mono, v, POLY));
                    }
                }
            }
            StanleyEntry { generator, ..e.clone() }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn module(n: usize, rank: usize, rels: &[&[&str]]) -> GradedModule {
        let f = FieldSpec::Rationals;
        let rels = rels
            .iter()
            .map(|v| v.iter().map(|t| parse(t, f, n, 0, POLY).unwrap()).collect())
            .collect();
        GradedModule::new(f, n, rank, rels).unwrap()
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi(-1, 3), 0);
        assert_eq!(phi(0, 5), 1);
        assert_eq!(phi(2, 2), 6);
        assert_eq!(phi(7, 0), 1);
    }

    #[test]
    fn quotient_by_square() {
        let m = module(2, 1, &[&["x^2"]]);
        let b = stanley_decomposition(&m, 0).unwrap();
        let mut got: Vec<(String, usize, u32)> = b.entries.iter().map(|e| (e.render(), e.ring_index, e.degree)).collect();
        got.sort();
        assert_eq!(got, vec![("1".into(), 1, 0), ("x".into(), 1, 1)]);
        for s in 0..8 {
            assert_eq!(b.hilbert(s), u128::from(2 * s + 1));
            assert_eq!(hilbert_brute(&m, s), u128::from(2 * s + 1));
        }
    }

    #[test]
    fn free_and_artinian() {
        let free = module(2, 2, &[]);
        let b = stanley_decomposition(&free, 0).unwrap();
        assert!(b.entries.iter().all(|e| e.ring_index == 2 && e.degree == 0));
        assert_eq!(b.entries.len(), 2);
        let art = module(2, 1, &[&["x^2"], &["x*y"], &["y^2"]]);
        let b = stanley_decomposition(&art, 0).unwrap();
        assert_eq!(profile(&b.entries), vec![(0, 0), (0, 1), (0, 1)]);
        assert_eq!(graded_dims(&art, 4), vec![1, 2, 0, 0, 0]);
    }

    #[test]
    fn needs_change_of_coordinates() {
        let m = module(2, 1, &[&["y"]]);
        let b = stanley_decomposition(&m, 3).unwrap();
        assert!(check_basis(&b.module, &b.entries, 6).ok());
        assert_eq!(b.hilbert(5), 6);
    }

    #[test]
    fn stabilization_examples() {
        let m = module(2, 1, &[&["x^2"]]);
        let b = stanley_decomposition(&m, 0).unwrap();
        let entry = |t: &str, d| StanleyEntry {
            generator: vec![parse(t, FieldSpec::Rationals, 2, 0, POLY).unwrap()],
            ring_index: 1,
            degree: d,
        };
        let good = stabilization_check(&b, &[entry("1", 0), entry("x + y", 1)], Some(7)).unwrap();
        assert!(good.threshold_pass() && good.oracle_pass());
        let bad = stabilization_check(&b, &[entry("1", 0), entry("y", 1)], None).unwrap();
        assert_eq!(bad.threshold_failure, Some(1));
        assert!(majorizes(&m, &b.entries, &b.entries, 6));
        assert!(!majorizes(&m, &b.entries, &[entry("1", 0)], 6));
    }
}
