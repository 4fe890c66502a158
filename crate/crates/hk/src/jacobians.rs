//! Generalized Jacobians over a staircase, Macaulay resultants, the resultant
//! Jacobian operator, and essential spaces of forms.
//!
//! All evaluations at a point `q` are done by recentering the functions at `q`
//! first: the Hasse derivative `D_{u^α} f (q)` is then the coefficient of `u^α`.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::diagrams::Diagram;
use crate::exponents::{monomials_of_degree, Exponent};
use crate::field::{Coeff, FieldSpec};
use crate::linalg::{dense_to_sparse, determinant, Echelon};
use crate::series::{Series, SeriesError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JacobianError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("form {index} is not homogeneous")]
    NotHomogeneous { index: usize },
    #[error("extraneous factor stayed zero after {0} coordinate changes")]
    DegenerateAfterRetries(usize),
    #[error("no vertex has a nonzero coordinate {0}")]
    NoVertexForCoordinate(usize),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

impl JacobianError {
    pub fn code(&self) -> &'static str {
        match self {
            JacobianError::Shape(_) => "jacobian.shape",
            JacobianError::NotHomogeneous { .. } => "jacobian.not_homogeneous",
            JacobianError::DegenerateAfterRetries(_) => "jacobian.degenerate_after_retries",
            JacobianError::NoVertexForCoordinate(_) => "jacobian.no_vertex_for_coordinate",
            JacobianError::Series(e) => e.code(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Variant {
    Full,
    Reduced,
}

/// Functions `fᵢ` with exponents `αᵢ` in the first `e` variables, recentered at a point.
#[derive(Debug, Clone)]
pub struct JacobianProblem {
    field: FieldSpec,
    e: usize,
    centered: Vec<Series>,
    alphas: Vec<Exponent>,
    scan: Vec<usize>,
    diagram: Diagram,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ConditionRow {
    pub s: u32,
    pub full: String,
    pub reduced: String,
    pub full_invertible: bool,
    pub reduced_invertible: bool,
}

impl JacobianProblem {
    pub fn new(functions: &[Series], alphas: &[Exponent], point: &[Coeff]) -> Result<Self, JacobianError> {
        let first = functions.first().ok_or_else(|| JacobianError::Shape("no functions".into()))?;
        if functions.len() != alphas.len() {
            return Err(JacobianError::Shape("one exponent per function".into()));
        }
        let field = first.field();
        let e = alphas[0].dim();
        if e > first.nvars() || alphas.iter().any(|a| a.dim() != e) {
            return Err(JacobianError::Shape("exponent dimension".into()));
        }
        let centered = functions.iter().map(|f| f.translate(point)).collect::<Result<Vec<_>, _>>()?;
        let mut scan: Vec<usize> = (0..alphas.len()).collect();
        scan.sort_by(|&a, &b| alphas[a].cmp(&alphas[b]));
        let diagram = Diagram::from_exponents(e, alphas.iter().cloned()).map_err(|err| JacobianError::Shape(err.to_string()))?;
        Ok(JacobianProblem { field, e, centered, alphas: alphas.to_vec(), scan, diagram })
    }

    pub fn diagram(&self) -> &Diagram {
        &self.diagram
    }

    fn owner(&self, beta: &Exponent) -> usize {
        *self.scan.iter().find(|&&j| beta.dominates(&self.alphas[j])).expect("β lies in Δ")
    }

    fn lift(&self, a: &Exponent) -> Exponent {
        a.resized(self.centered[0].nvars())
    }

    /// `D_{u^α} f (q)` for the recentered `f`.
    fn hasse_at(&self, f: &Series, alpha: &Exponent) -> Coeff {
        f.coeff(&self.lift(alpha))
    }

    /// Index set `Δ(s)` or `Δ⁰(s)` in reverse-lex order.
    pub fn index_set(&self, s: u32, variant: Variant) -> Vec<Exponent> {
        let all: Vec<Exponent> = monomials_of_degree(self.e, s).into_iter().filter(|b| self.diagram.contains(b)).collect();
        match variant {
            Variant::Full => all,
            Variant::Reduced => {
                let verts = self.diagram.vertices();
                if all.iter().any(|b| verts.contains(b)) {
                    all.into_iter().filter(|b| !verts.contains(b)).collect()
                } else {
                    Vec::new()
                }
            }
        }
    }

    /// Matrix `[D_{u^α}(f_β)(q)]` with rows `α` and columns `β`.
    pub fn matrix(&self, s: u32, variant: Variant) -> (Vec<Exponent>, Vec<Vec<Coeff>>) {
        let idx = self.index_set(s, variant);
        let mut m = vec![vec![Coeff::zero(); idx.len()]; idx.len()];
        for (c, beta) in idx.iter().enumerate() {
            let i = self.owner(beta);
            let gamma = beta.checked_sub(&self.alphas[i]).expect("owner divides");
            let shifted = self.centered[i].mul_monomial(&self.lift(&gamma), &Coeff::one());
            for (r, alpha) in idx.iter().enumerate() {
                let direct = self.hasse_at(&shifted.hasse(&self.lift(alpha)), &Exponent::zero(self.e));
                let via_owner = match alpha.add(&self.alphas[i]).checked_sub(beta) {
                    Some(k) => self.hasse_at(&self.centered[i], &k),
                    None => Coeff::zero(),
                };
                assert_eq!(direct, via_owner, "entry routes disagree at ({alpha}, {beta})");
                m[r][c] = via_owner;
            }
        }
        (idx, m)
    }

    pub fn det(&self, s: u32, variant: Variant) -> Coeff {
        let (_, m) = self.matrix(s, variant);
        determinant(&self.field, &m)
    }

    /// Determinant table for `s ≤ d(Δ) + 1`.
    pub fn check_conditions(&self) -> Result<Vec<ConditionRow>, JacobianError> {
        let d = self.diagram.d_of().map_err(|err| JacobianError::Shape(err.to_string()))?;
        Ok((0..=d + 1)
            .map(|s| {
                let full = self.det(s, Variant::Full);
                let reduced = self.det(s, Variant::Reduced);
                ConditionRow {
                    s,
                    full_invertible: !full.is_zero(),
                    reduced_invertible: !reduced.is_zero(),
                    full: crate::field::format_coeff(&full),
                    reduced: crate::field::format_coeff(&reduced),
                }
            })
            .collect())
    }
}

/// The two determinants of Macaulay's formula at degree `d = Σdᵢ − k + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MacaulayParts {
    pub degree: u32,
    pub full: Coeff,
    pub extraneous: Coeff,
}

fn form_degrees(forms: &[Series]) -> Result<Vec<u32>, JacobianError> {
    let k = forms.len();
    let mut degs = Vec::with_capacity(k);
    for (index, f) in forms.iter().enumerate() {
        if f.nvars() != k {
            return Err(JacobianError::Shape(format!("{k} forms need {k} variables")));
        }
        let d = f.ord().map_err(|_| JacobianError::NotHomogeneous { index })?;
        if f.terms().any(|(e, _)| e.degree() != d) {
            return Err(JacobianError::NotHomogeneous { index });
        }
        degs.push(d);
    }
    Ok(degs)
}

/// Macaulay matrix determinant and its extraneous minor.
pub fn macaulay_parts(forms: &[Series]) -> Result<MacaulayParts, JacobianError> {
    let degs = form_degrees(forms)?;
    let k = forms.len();
    if k == 0 {
        return Err(JacobianError::Shape("no forms".into()));
    }
    let field = forms[0].field();
    let degree = degs.iter().sum::<u32>() + 1 - k as u32;
    let monos = monomials_of_degree(k, degree);
    let owner = |b: &Exponent| (0..k).find(|&i| b.get(i) >= degs[i]).expect("pigeonhole");
    let n_div = |b: &Exponent| (0..k).filter(|&i| b.get(i) >= degs[i]).count();
    let entry = |a: &Exponent, b: &Exponent| -> Coeff {
        let i = owner(b);
        let mut shift = b.clone();
        shift.set(i, b.get(i) - degs[i]);
        match a.checked_sub(&shift) {
            Some(t) => forms[i].coeff(&t),
            None => Coeff::zero(),
        }
    };
    let build = |idx: &[&Exponent]| -> Vec<Vec<Coeff>> {
        idx.iter().map(|a| idx.iter().map(|b| entry(a, b)).collect()).collect()
    };
    let all: Vec<&Exponent> = monos.iter().collect();
    let extra: Vec<&Exponent> = monos.iter().filter(|b| n_div(b) >= 2).collect();
    Ok(MacaulayParts {
        degree,
        full: determinant(&field, &build(&all)),
        extraneous: determinant(&field, &build(&extra)),
    })
}

/// Random integer matrix with nonzero determinant, entries in `-3..=3`.
pub fn random_invertible(field: &FieldSpec, n: usize, rng: &mut ChaCha8Rng) -> (Vec<Vec<Coeff>>, Coeff) {
    loop {
        let m: Vec<Vec<Coeff>> = (0..n)
            .map(|_| (0..n).map(|_| field.from_int(rng.gen_range(-3..=3))).collect())
            .collect();
        let d = determinant(field, &m);
        if !d.is_zero() {
            return (m, d);
        }
    }
}

/// Whether `k` forms in `k` variables have full-rank degree-`d` ideal slice.
pub fn full_rank_at_degree(forms: &[Series], degree: u32) -> bool {
    let k = forms.len();
    let field = forms[0].field();
    let monos = monomials_of_degree(k, degree);
    let index = |e: &Exponent| monos.iter().position(|m| m == e).expect("degree-d monomial");
    let mut ech = Echelon::new(field);
    for f in forms {
        let d = f.ord().unwrap_or(0);
        if d > degree {
            continue;
        }
        for shift in monomials_of_degree(k, degree - d) {
            let row = f.mul_monomial(&shift, &Coeff::one());
            let mut dense = vec![Coeff::zero(); monos.len()];
            for (e, c) in row.terms() {
                dense[index(e)] = c.clone();
            }
            ech.insert(dense_to_sparse(&dense));
        }
    }
    ech.rank() == monos.len()
}

/// Resultant of `k` homogeneous forms in `k` variables, normalized by
/// `Res(x₁^{d₁}, …, x_k^{d_k}) = 1`.
pub fn macaulay_resultant(forms: &[Series], seed: u64) -> Result<Coeff, JacobianError> {
    let parts = macaulay_parts(forms)?;
    let field = forms[0].field();
    if !parts.extraneous.is_zero() {
        return Ok(field.div(&parts.full, &parts.extraneous).expect("nonzero"));
    }
    let degs = form_degrees(forms)?;
    let weight: u32 = degs.iter().product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    const RETRIES: usize = 32;
    for _ in 0..RETRIES {
        let (a, det_a) = random_invertible(&field, forms.len(), &mut rng);
        let changed: Vec<Series> = forms.iter().map(|f| f.substitute_linear(&a)).collect::<Result<_, _>>()?;
        let p = macaulay_parts(&changed)?;
        if !p.extraneous.is_zero() {
            let res_changed = field.div(&p.full, &p.extraneous).expect("nonzero");
            return Ok(field.div(&res_changed, &field.pow(&det_a, weight)).expect("nonzero"));
        }
    }
    if !full_rank_at_degree(forms, parts.degree) {
        return Ok(Coeff::zero());
    }
    Err(JacobianError::DegenerateAfterRetries(RETRIES))
}

/// `Res(Σ_{|α|=aᵢ} D_{u^α}(fᵢ)(q) X^α, …)` with derivatives in the first `s = ā.len()` variables.
pub fn jr_operator(functions: &[Series], point: &[Coeff], abar: &[u32], seed: u64) -> Result<Coeff, JacobianError> {
    let s = abar.len();
    if functions.len() != s {
        return Err(JacobianError::Shape("one degree per function".into()));
    }
    let mut forms = Vec::with_capacity(s);
    for (f, &a) in functions.iter().zip(abar) {
        if f.nvars() < s {
            return Err(JacobianError::Shape("too few variables".into()));
        }
        let centered = f.translate(point)?;
        let mut form = Series::zero(f.field(), s, crate::series::POLY);
        for alpha in monomials_of_degree(s, a) {
            form.add_term(alpha.clone(), &centered.coeff(&alpha.resized(f.nvars())));
        }
        forms.push(form);
    }
    macaulay_resultant(&forms, seed)
}

/// Transfer degrees `aᵢ` and the derivative exponents `βᵢ = α_{j(i)} − aᵢeᵢ`
/// for vertices spanning ℕ^e; `j(i)` is the lowest-degree vertex with a nonzero
/// `i`-th coordinate (reverse-lex among equals).
pub fn jr_data(alphas: &[Exponent], field: &FieldSpec) -> Result<Vec<(usize, u32, Exponent)>, JacobianError> {
    let e = alphas.first().map(Exponent::dim).unwrap_or(0);
    let p = field.characteristic();
    (0..e)
        .map(|i| {
            let j = (0..alphas.len())
                .filter(|&j| alphas[j].get(i) > 0)
                .min_by(|&a, &b| alphas[a].degree().cmp(&alphas[b].degree()).then_with(|| alphas[a].cmp(&alphas[b])))
                .ok_or(JacobianError::NoVertexForCoordinate(i))?;
            let c = alphas[j].get(i);
            let mut a = 1;
            if p > 0 {
                let mut c = c;
                while c.is_multiple_of(p) {
                    c /= p;
                    a *= p;
                }
            }
            let mut beta = alphas[j].clone();
            beta.set(i, c - a);
            Ok((j, a, beta))
        })
        .collect()
}

/// The JR condition for a basis `fᵢ` with vertices `αᵢ ⊂ ℕ^e`, at `q`.
pub fn jr_condition(functions: &[Series], alphas: &[Exponent], point: &[Coeff], seed: u64) -> Result<Coeff, JacobianError> {
    let field = functions[0].field();
    let data = jr_data(alphas, &field)?;
    let mut derived = Vec::new();
    let mut abar = Vec::new();
    for (j, a, beta) in data {
        derived.push(functions[j].hasse(&beta.resized(functions[j].nvars())));
        abar.push(a);
    }
    jr_operator(&derived, point, &abar, seed)
}

/// Basis (reduced echelon, as coefficient rows) of the span of all
/// degree-`(d−1)` Hasse derivatives of a form of degree `d`.
pub fn essential_space(form: &Series) -> Result<Vec<Vec<Coeff>>, JacobianError> {
    let n = form.nvars();
    let d = form.ord().map_err(|_| JacobianError::NotHomogeneous { index: 0 })?;
    if form.terms().any(|(e, _)| e.degree() != d) {
        return Err(JacobianError::NotHomogeneous { index: 0 });
    }
    let mut ech = Echelon::new(form.field());
    for alpha in monomials_of_degree(n, d.saturating_sub(1)) {
        let der = form.hasse(&alpha);
        let row: Vec<Coeff> = (0..n).map(|i| der.coeff(&Exponent::unit(n, i))).collect();
        ech.insert(dense_to_sparse(&row));
    }
    ech.reduce_tails();
    Ok(ech
        .into_rows()
        .into_values()
        .map(|r| (0..n).map(|i| r.get(&i).cloned().unwrap_or_else(Coeff::zero)).collect())
        .collect())
}
