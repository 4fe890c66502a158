//! Initial diagrams and standard bases of ideals in the truncated ring
//! `K[x]/m^{D+1}`, Hilbert-Samuel functions at points, and a checker for
//! standard bases along a Samuel stratum.
//!
//! The image of an ideal in `K[x]/m^{D+1}` is spanned by the products `x^β·g`
//! of degree at most `D`. Row-reducing those products with columns sorted by
//! the (total, degree-first) order leaves pivots that are exactly the initial
//! exponents of degree `≤ D`.

use std::collections::HashMap;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::diagrams::{Diagram, DiagramError};
use crate::division::{formal_divide, DivisionError, DivisionProblem, Schedule};
use crate::exponents::{monomials_up_to, Exponent, MonomialOrder};
use crate::field::{Coeff, FieldSpec};
use crate::jacobians::{jr_condition, JacobianError, JacobianProblem};
use crate::linalg::{Echelon, SparseRow};
use crate::series::{Series, SeriesError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StdBasisError {
    #[error("ideal needs at least one nonzero generator")]
    NoGenerators,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("the order must be positive and normalized")]
    BadOrder,
    #[error("generator {index} has order {ord} beyond the truncation {trunc}")]
    TruncationTooSmall { index: usize, ord: u32, trunc: u32 },
    #[error("no monotone coordinate system found after {0} attempts")]
    RetryExhausted(usize),
    #[error("generator {index} does not reduce to zero against the basis")]
    RegenerationFailed { index: usize },
    #[error(transparent)]
    Division(#[from] DivisionError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Jacobian(#[from] JacobianError),
}

impl StdBasisError {
    pub fn code(&self) -> &'static str {
        match self {
            StdBasisError::NoGenerators => "stdbasis.no_generators",
            StdBasisError::Shape(_) => "stdbasis.shape",
            StdBasisError::BadOrder => "stdbasis.bad_order",
            StdBasisError::TruncationTooSmall { .. } => "stdbasis.truncation_too_small",
            StdBasisError::RetryExhausted(_) => "stdbasis.retry_exhausted",
            StdBasisError::RegenerationFailed { .. } => "stdbasis.regeneration_failed",
            StdBasisError::Division(e) => e.code(),
            StdBasisError::Series(e) => e.code(),
            StdBasisError::Diagram(e) => e.code(),
            StdBasisError::Jacobian(e) => e.code(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct IdealPresentation {
    pub field: FieldSpec,
    pub n: usize,
    pub order: MonomialOrder,
    pub trunc: u32,
    pub generators: Vec<Series>,
}

impl IdealPresentation {
    pub fn new(generators: Vec<Series>, order: &MonomialOrder, trunc: u32) -> Result<Self, StdBasisError> {
        let generators: Vec<Series> = generators.into_iter().filter(|g| !g.is_zero()).collect();
        let first = generators.first().ok_or(StdBasisError::NoGenerators)?;
        let (field, n) = (first.field(), first.nvars());
        if generators.iter().any(|g| g.field() != field || g.nvars() != n) {
            return Err(StdBasisError::Shape("generators disagree on field or variables".into()));
        }
        if order.dim() != n {
            return Err(StdBasisError::Shape(format!("order on {} variables, ideal on {n}", order.dim())));
        }
        let flags = order.flags();
        if !flags.positive || !flags.normalized {
            return Err(StdBasisError::BadOrder);
        }
        let generators = generators.into_iter().map(|g| g.with_blocks(n)).collect();
        Ok(IdealPresentation { field, n, order: order.completed(), trunc, generators })
    }

    /// Default degree-first order.
    pub fn standard(generators: Vec<Series>, trunc: u32) -> Result<Self, StdBasisError> {
        let n = generators.first().map(Series::nvars).ok_or(StdBasisError::NoGenerators)?;
        Self::new(generators, &MonomialOrder::standard(n), trunc)
    }

    pub fn translated(&self, point: &[Coeff]) -> Result<Self, StdBasisError> {
        let generators = self.generators.iter().map(|g| g.translate(point)).collect::<Result<_, _>>()?;
        Ok(IdealPresentation { generators, ..self.clone() })
    }

    pub fn with_trunc(&self, trunc: u32) -> Self {
        IdealPresentation { trunc, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TruncationCertificate {
    /// The diagram is exact in all degrees up to this bound.
    pub complete_to_degree: u32,
    pub pivots: usize,
    pub rows: usize,
}

/// Monomials of degree `≤ D` in increasing order, with a lookup table.
struct Columns {
    monos: Vec<Exponent>,
    index: HashMap<Exponent, usize>,
}

impl Columns {
    fn new(order: &MonomialOrder, n: usize, trunc: u32) -> Self {
        let mut monos = monomials_up_to(n, trunc);
        order.sort(&mut monos);
        let index = monos.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        Columns { monos, index }
    }

    fn row(&self, s: &Series) -> SparseRow {
        s.terms().filter_map(|(e, c)| self.index.get(e).map(|&i| (i, c.clone()))).collect()
    }
}

fn reduce_ideal(ideal: &IdealPresentation, shuffle: Option<u64>) -> Result<(Columns, Echelon, usize), StdBasisError> {
    let d = ideal.trunc;
    let cols = Columns::new(&ideal.order, ideal.n, d);
    let mut products = Vec::new();
    for (index, g) in ideal.generators.iter().enumerate() {
        let g = g.with_trunc(d);
        let ord = g.ord().map_err(|_| StdBasisError::TruncationTooSmall { index, ord: d + 1, trunc: d })?;
        for beta in monomials_up_to(ideal.n, d - ord) {
            products.push((beta, index));
        }
    }
    if let Some(seed) = shuffle {
        products.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let mut ech = Echelon::new(ideal.field);
    let gens: Vec<Series> = ideal.generators.iter().map(|g| g.with_trunc(d)).collect();
    for (beta, index) in &products {
        let row = gens[*index].mul_monomial(beta, &Coeff::one());
        ech.insert(cols.row(&row));
    }
    Ok((cols, ech, products.len()))
}

/// Initial diagram of the ideal, exact up to the truncation degree.
pub fn truncated_initial_diagram(ideal: &IdealPresentation) -> Result<(Diagram, TruncationCertificate), StdBasisError> {
    let (cols, ech, rows) = reduce_ideal(ideal, None)?;
    let pivots: Vec<Exponent> = ech.pivots().map(|p| cols.monos[p].clone()).collect();
    let cert = TruncationCertificate { complete_to_degree: ideal.trunc, pivots: pivots.len(), rows };
    Ok((Diagram::from_exponents(ideal.n, pivots)?, cert))
}

#[derive(Debug, Clone)]
pub struct StandardBasisReport {
    pub diagram: Diagram,
    pub basis: Vec<Series>,
    pub certificate: TruncationCertificate,
}

/// Reduced standard basis `x^{αᵢ} + rᵢ` with tails supported in Γ, regenerating
/// every input generator. `shuffle` permutes the product rows (for uniqueness tests).
pub fn standard_basis_with(ideal: &IdealPresentation, shuffle: Option<u64>) -> Result<StandardBasisReport, StdBasisError> {
    for (index, g) in ideal.generators.iter().enumerate() {
        let ord = g.ord()?;
        if ord > ideal.trunc {
            return Err(StdBasisError::TruncationTooSmall { index, ord, trunc: ideal.trunc });
        }
    }
    let (cols, mut ech, rows) = reduce_ideal(ideal, shuffle)?;
    ech.reduce_tails();
    let pivots: Vec<Exponent> = ech.pivots().map(|p| cols.monos[p].clone()).collect();
    let diagram = Diagram::from_exponents(ideal.n, pivots.clone())?;
    let certificate = TruncationCertificate { complete_to_degree: ideal.trunc, pivots: pivots.len(), rows };
    let mut basis = Vec::new();
    for v in diagram.vertices() {
        let row = ech.row(cols.index[v]).expect("vertex is a pivot");
        let mut f = Series::zero(ideal.field, ideal.n, ideal.trunc);
        for (c, val) in row {
            f.add_term(cols.monos[*c].clone(), val);
        }
        f.mark_inexact();
        debug_assert_eq!(f.ord().ok(), Some(v.degree()));
        basis.push(f);
    }
    let problem = DivisionProblem::new(
        &ideal.order,
        basis.iter().cloned().zip(diagram.vertices().iter().cloned()).collect(),
        ideal.trunc,
    )?;
    for (index, g) in ideal.generators.iter().enumerate() {
        let out = formal_divide(&problem, g, Schedule::Batch)?;
        if !out.remainder.is_zero() {
            return Err(StdBasisError::RegenerationFailed { index });
        }
    }
    Ok(StandardBasisReport { diagram, basis, certificate })
}

pub fn standard_basis(ideal: &IdealPresentation) -> Result<StandardBasisReport, StdBasisError> {
    standard_basis_with(ideal, None)
}

/// `H(s)` for `s ≤ s_max` of the ideal localized at `q`.
pub fn hilbert_samuel_at(ideal: &IdealPresentation, point: &[Coeff], s_max: u32) -> Result<Vec<u128>, StdBasisError> {
    let local = ideal.translated(point)?.with_trunc(s_max);
    let gens: Vec<Series> = local.generators.iter().filter(|g| g.with_trunc(s_max).ord().is_ok()).cloned().collect();
    if gens.is_empty() {
        return Ok(Diagram::empty(ideal.n).hs_profile(u64::from(s_max))?);
    }
    let local = IdealPresentation { generators: gens, ..local };
    let (diagram, _) = truncated_initial_diagram(&local)?;
    Ok(diagram.hs_profile(u64::from(s_max))?)
}

/// Unit lower-triangular times unit upper-triangular integer matrix (determinant 1).
pub fn random_unimodular(field: &FieldSpec, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<Coeff>> {
    let mut lower = vec![vec![Coeff::zero(); n]; n];
    let mut upper = vec![vec![Coeff::zero(); n]; n];
    for i in 0..n {
        lower[i][i] = Coeff::one();
        upper[i][i] = Coeff::one();
        for j in 0..i {
            lower[i][j] = field.from_int(rng.gen_range(-2..=2));
            upper[j][i] = field.from_int(rng.gen_range(-2..=2));
        }
    }
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).fold(Coeff::zero(), |acc, k| field.add(&acc, &field.mul(&lower[i][k], &upper[k][j]))))
                .collect()
        })
        .collect()
}

/// Applies seeded unimodular changes until the initial diagram is monotone.
/// Returns the change (identity first) and the transformed ideal.
pub fn generic_coordinates(
    ideal: &IdealPresentation,
    seed: u64,
) -> Result<(Vec<Vec<Coeff>>, IdealPresentation, Diagram), StdBasisError> {
    const ATTEMPTS: usize = 32;
    let n = ideal.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let identity: Vec<Vec<Coeff>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { Coeff::one() } else { Coeff::zero() }).collect()).collect();
    let mut change = identity;
    for _ in 0..ATTEMPTS {
        let gens = ideal.generators.iter().map(|g| g.substitute_linear(&change)).collect::<Result<Vec<_>, _>>()?;
        let candidate = IdealPresentation { generators: gens, ..ideal.clone() };
        let (diagram, _) = truncated_initial_diagram(&candidate)?;
        if diagram.is_monotone() {
            return Ok((change, candidate, diagram));
        }
        change = random_unimodular(&ideal.field, n, &mut rng);
    }
    Err(StdBasisError::RetryExhausted(ATTEMPTS))
}

/// Outcome of the five standard-basis conditions at one point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PointVerdict {
    pub point: Vec<String>,
    pub conditions: [bool; 5],
    /// First failing condition (1-based) with a witness.
    pub first_failure: Option<(u8, String)>,
}

impl PointVerdict {
    pub fn all_pass(&self) -> bool {
        self.first_failure.is_none()
    }
}

fn essential_extension(alphas: &[Exponent], n: usize) -> Result<Diagram, StdBasisError> {
    let e = alphas.first().map(Exponent::dim).unwrap_or(0);
    if e > n || alphas.iter().any(|a| a.dim() != e) {
        return Err(StdBasisError::Shape("claimed vertices exceed the ambient dimension".into()));
    }
    Ok(Diagram::from_exponents(n, alphas.iter().map(|a| a.resized(n)))?)
}

fn hs_window(claimed: &Diagram) -> u32 {
    let d = claimed.d_of().unwrap_or(0);
    let vmax = claimed.vertices().iter().map(Exponent::degree).max().unwrap_or(0);
    d.max(vmax) + claimed.dim() as u32 + 1
}

/// Checks the five conditions for `basis` against vertices `alphas ⊂ ℕ^e`
/// (the first `e` variables are the essential ones) at each point.
pub fn check_samuel_basis(
    basis: &[Series],
    alphas: &[Exponent],
    points: &[Vec<Coeff>],
    seed: u64,
) -> Result<Vec<PointVerdict>, StdBasisError> {
    let first = basis.first().ok_or(StdBasisError::NoGenerators)?;
    let n = first.nvars();
    let claimed = essential_extension(alphas, n)?;
    let window = hs_window(&claimed);
    let ideal = IdealPresentation::standard(basis.to_vec(), window)?;
    let mut out = Vec::new();
    for q in points {
        let mut conds = [false; 5];
        let mut witness: Vec<Option<String>> = vec![None; 5];

        let local = hilbert_samuel_at(&ideal, q, window)?;
        let expected = claimed.hs_profile(u64::from(window))?;
        match local.iter().zip(&expected).position(|(a, b)| a != b) {
            None => conds[0] = true,
            Some(s) => witness[0] = Some(format!("H({s}) = {} but the diagram gives {}", local[s], expected[s])),
        }

        let centered: Vec<Series> = basis.iter().map(|f| f.translate(q)).collect::<Result<_, _>>()?;
        if centered.len() != alphas.len() {
            witness[1] = Some(format!("{} functions for {} vertices", centered.len(), alphas.len()));
        } else {
            match (0..alphas.len()).find(|&i| centered[i].ord().ok() != Some(alphas[i].degree())) {
                None => conds[1] = true,
                Some(i) => {
                    let ord = centered[i].ord().map(|o| o.to_string()).unwrap_or_else(|_| "∞".into());
                    witness[1] = Some(format!("ord(f{}) = {ord}, expected {}", i + 1, alphas[i].degree()))
                }
            }
        }

        if centered.len() == alphas.len() {
            let mut fail = None;
            for (i, f) in centered.iter().enumerate() {
                let a = alphas[i].resized(n);
                if let Some(bad) = f.supd().into_iter().find(|b| b != &a && claimed.contains(b)) {
                    fail = Some(format!("supd(f{}) contains {bad} in Δ", i + 1));
                    break;
                }
                if !f.coeff(&a).is_one() {
                    fail = Some(format!("D_u^{a} f{} = {} at the point", i + 1, f.coeff(&a)));
                    break;
                }
            }
            match fail {
                None => conds[2] = true,
                Some(w) => witness[2] = Some(w),
            }

            let jp = JacobianProblem::new(basis, alphas, q)?;
            let rows = jp.check_conditions()?;
            match rows.iter().find(|r| !r.full_invertible) {
                None => conds[3] = true,
                Some(r) => witness[3] = Some(format!("J^{} vanishes", r.s)),
            }

            match jr_condition(basis, alphas, q, seed) {
                Ok(v) if !v.is_zero() => conds[4] = true,
                Ok(_) => witness[4] = Some("JR vanishes".into()),
                Err(err) => witness[4] = Some(err.to_string()),
            }
        } else {
            witness[2] = Some("function/vertex count mismatch".into());
            witness[3] = witness[2].clone();
            witness[4] = witness[2].clone();
        }

        let first_failure = (0..5).find(|&k| !conds[k]).map(|k| (k as u8 + 1, witness[k].clone().unwrap_or_default()));
        out.push(PointVerdict {
            point: q.iter().map(crate::field::format_coeff).collect(),
            conditions: conds,
            first_failure,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StratumVerdict {
    pub point: Vec<String>,
    pub orders: Vec<Option<u32>>,
    pub in_stratum: bool,
    pub hs_matches: bool,
    pub unit_ideal: bool,
}

/// Top-stratum membership by `ord_y(fᵢ) = |αᵢ|`, with the Hilbert-Samuel comparison.
pub fn samuel_stratum_probe(
    basis: &[Series],
    alphas: &[Exponent],
    points: &[Vec<Coeff>],
) -> Result<Vec<StratumVerdict>, StdBasisError> {
    let first = basis.first().ok_or(StdBasisError::NoGenerators)?;
    let n = first.nvars();
    let claimed = essential_extension(alphas, n)?;
    let window = hs_window(&claimed);
    let ideal = IdealPresentation::standard(basis.to_vec(), window)?;
    let expected = claimed.hs_profile(u64::from(window))?;
    let mut out = Vec::new();
    for q in points {
        let orders: Vec<Option<u32>> =
            basis.iter().map(|f| f.translate(q).ok().and_then(|g| g.ord().ok())).collect();
        let in_stratum = orders.iter().zip(alphas).all(|(o, a)| *o == Some(a.degree()));
        let unit_ideal = orders.contains(&Some(0));
        let local = hilbert_samuel_at(&ideal, q, window)?;
        out.push(StratumVerdict {
            point: q.iter().map(crate::field::format_coeff).collect(),
            orders,
            in_stratum,
            hs_matches: local == expected,
            unit_ideal,
        });
    }
    Ok(out)
}
