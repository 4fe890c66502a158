//! Exact linear algebra over a [`FieldSpec`]: a sparse semi-echelon form keyed by
//! column index, and small dense routines (rank, determinant, solve).

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::field::{Coeff, FieldSpec};

/// Sparse row: column index to nonzero coefficient.
pub type SparseRow = BTreeMap<usize, Coeff>;

/// Rows in semi-echelon form: each stored row has a distinct leading
/// (smallest) column, normalized to 1.
#[derive(Debug, Clone)]
pub struct Echelon {
    field: FieldSpec,
    rows: BTreeMap<usize, SparseRow>,
}

pub(crate) fn axpy(field: &FieldSpec, target: &mut SparseRow, c: &Coeff, src: &SparseRow) {
    for (col, v) in src {
        let delta = field.mul(c, v);
        match target.get_mut(col) {
            Some(t) => {
                *t = field.add(t, &delta);
                if t.is_zero() {
                    target.remove(col);
                }
            }
            None => {
                if !delta.is_zero() {
                    target.insert(*col, delta);
                }
            }
        }
    }
}

impl Echelon {
    pub fn new(field: FieldSpec) -> Self {
        Echelon { field, rows: BTreeMap::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.keys().copied()
    }

    pub fn row(&self, pivot: usize) -> Option<&SparseRow> {
        self.rows.get(&pivot)
    }

    /// Reduces `row` against the stored pivots until its leading column is new.
    pub fn reduce(&self, mut row: SparseRow) -> SparseRow {
        loop {
            let Some((&lead, c)) = row.iter().next() else { return row };
            let Some(prow) = self.rows.get(&lead) else { return row };
            let c = self.field.neg(c);
            axpy(&self.field, &mut row, &c, prow);
        }
    }

    /// Reduces every entry of `row` that sits on a pivot column.
    pub fn reduce_full(&self, mut row: SparseRow) -> SparseRow {
        let mut cursor = 0usize;
        loop {
            let next = row
                .range(cursor..)
                .find(|(col, _)| self.rows.contains_key(col))
                .map(|(col, c)| (*col, c.clone()));
            let Some((col, c)) = next else { return row };
            let c = self.field.neg(&c);
            axpy(&self.field, &mut row, &c, &self.rows[&col]);
            cursor = col + 1;
        }
    }

    /// Inserts a row; returns its new pivot column, or `None` if it reduced to zero.
    pub fn insert(&mut self, row: SparseRow) -> Option<usize> {
        let mut row = self.reduce(row);
        let (&lead, c) = row.iter().next()?;
        if !c.is_one() {
            let inv = self.field.inv(c).expect("nonzero leading coefficient");
            for v in row.values_mut() {
                *v = self.field.mul(v, &inv);
            }
        }
        self.rows.insert(lead, row);
        Some(lead)
    }

    /// Brings the basis to reduced echelon form: no row has a nonzero entry on
    /// another row's pivot column.
    pub fn reduce_tails(&mut self) {
        let keys: Vec<usize> = self.rows.keys().rev().copied().collect();
        for k in keys {
            let row = self.rows.remove(&k).expect("present");
            let mut tail = row.clone();
            tail.remove(&k);
            let reduced_tail = self.reduce_full(tail);
            let mut out = reduced_tail;
            out.insert(k, row[&k].clone());
            self.rows.insert(k, out);
        }
    }

    pub fn contains(&self, row: &SparseRow) -> bool {
        self.reduce(row.clone()).is_empty()
    }

    pub fn into_rows(self) -> BTreeMap<usize, SparseRow> {
        self.rows
    }
}

/// Rank of a dense matrix.
pub fn rank(field: &FieldSpec, rows: &[Vec<Coeff>]) -> usize {
    let mut ech = Echelon::new(*field);
    for r in rows {
        ech.insert(dense_to_sparse(r));
    }
    ech.rank()
}

pub fn dense_to_sparse(row: &[Coeff]) -> SparseRow {
    row.iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| (i, c.clone()))
        .collect()
}

/// Determinant by Gaussian elimination. The empty matrix has determinant 1.
pub fn determinant(field: &FieldSpec, matrix: &[Vec<Coeff>]) -> Coeff {
    let n = matrix.len();
    let mut m: Vec<Vec<Coeff>> = matrix.to_vec();
    let mut det = Coeff::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Coeff::zero();
        };
        if p != col {
            m.swap(p, col);
            det = field.neg(&det);
        }
        let pivot = m[col][col].clone();
        det = field.mul(&det, &pivot);
        let inv = field.inv(&pivot).expect("nonzero pivot");
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = field.mul(&m[r][col], &inv);
            for c in col..n {
                let delta = field.mul(&factor, &m[col][c]);
                m[r][c] = field.sub(&m[r][c], &delta);
            }
        }
    }
    det
}

/// Solves a square sparse system `A x = b` given by rows of `A`; `None` when singular.
///
/// Pivots are chosen row by row among the sparsest candidates, which keeps fill-in
/// small for the nearly triangular systems produced by division.
pub fn solve_sparse(field: &FieldSpec, rows: Vec<SparseRow>, rhs: Vec<Coeff>, ncols: usize) -> Option<Vec<Coeff>> {
    if rows.len() != ncols {
        return None;
    }
    // Augment each row with the right-hand side stored at column `ncols`.
    let mut work: Vec<SparseRow> = rows
        .into_iter()
        .zip(rhs)
        .map(|(mut r, b)| {
            if !b.is_zero() {
                r.insert(ncols, b);
            }
            r
        })
        .collect();
    let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); ncols];
    for (i, r) in work.iter().enumerate() {
        for &c in r.keys() {
            if c < ncols {
                col_rows[c].push(i);
            }
        }
    }
    let mut used = vec![false; work.len()];
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; ncols];
    let mut order: Vec<usize> = (0..ncols).collect();
    order.sort_by_key(|&c| col_rows[c].len());
    for &col in &order {
        let cand = col_rows[col]
            .iter()
            .copied()
            .filter(|&i| !used[i] && work[i].contains_key(&col))
            .min_by_key(|&i| work[i].len())?;
        used[cand] = true;
        pivot_of_col[col] = Some(cand);
        let prow = work[cand].clone();
        let inv = field.inv(&prow[&col]).expect("nonzero");
        let targets: Vec<usize> = col_rows[col]
            .iter()
            .copied()
            .filter(|&i| i != cand && work[i].contains_key(&col))
            .collect();
        for i in targets {
            let factor = field.neg(&field.mul(&work[i][&col], &inv));
            let before: Vec<usize> = work[i].keys().copied().collect();
            axpy(field, &mut work[i], &factor, &prow);
            for &c in prow.keys() {
                if c < ncols && !before.contains(&c) && work[i].contains_key(&c) {
                    col_rows[c].push(i);
                }
            }
        }
    }
    // After elimination every pivot row only holds its pivot among columns that were
    // eliminated later; back-substitute in reverse elimination order.
    let mut x = vec![Coeff::zero(); ncols];
    for &col in order.iter().rev() {
        let i = pivot_of_col[col]?;
        let row = &work[i];
        let mut acc = row.get(&ncols).cloned().unwrap_or_else(Coeff::zero);
        for (c, v) in row.range(..ncols) {
            if *c != col {
                acc = field.sub(&acc, &field.mul(v, &x[*c]));
            }
        }
        x[col] = field.div(&acc, &row[&col]).expect("nonzero pivot");
    }
    Some(x)
}

/// Solves a dense square system; `None` when singular.
pub fn solve(field: &FieldSpec, a: &[Vec<Coeff>], b: &[Coeff]) -> Option<Vec<Coeff>> {
    let rows = a.iter().map(|r| dense_to_sparse(r)).collect();
    solve_sparse(field, rows, b.to_vec(), a.len())
}
