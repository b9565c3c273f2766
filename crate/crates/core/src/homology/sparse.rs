//! Sparse integer matrices and invariant factors by unit-pivot elimination.
//!
//! Boundary matrices of cubical sets are mostly reducible with `±1` pivots.
//! Each such pivot splits off an invariant factor of 1; whatever is left is
//! densified and handed to the full Smith normal form.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;

use super::snf::{smith_normal_form, IntMatrix, Matrix, SnfInt};
use crate::error::Result;

/// Triplet-form integer matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), i64>,
}

impl SparseMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            cols,
            entries: BTreeMap::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Adds `v` at `(r, c)`, dropping the entry if it cancels to zero.
    pub fn add(&mut self, r: usize, c: usize, v: i64) {
        assert!(r < self.rows && c < self.cols, "entry out of bounds");
        let e = self.entries.entry((r, c)).or_insert(0);
        *e += v;
        if *e == 0 {
            self.entries.remove(&(r, c));
        }
    }

    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.entries.get(&(r, c)).copied().unwrap_or(0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, i64)> + '_ {
        self.entries.iter().map(|(&(r, c), &v)| (r, c, v))
    }

    /// Nonzero `(row, value)` pairs of column `c`.
    pub fn column(&self, c: usize) -> Vec<(usize, i64)> {
        self.entries
            .iter()
            .filter(|((_, cc), _)| *cc == c)
            .map(|(&(r, _), &v)| (r, v))
            .collect()
    }

    pub fn to_dense(&self) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.rows, self.cols);
        for (&(r, c), &v) in &self.entries {
            m.set(r, c, BigInt::from(v));
        }
        m
    }

    /// Product `self * other`, exact in `i128` accumulation.
    pub fn mul(&self, other: &SparseMatrix) -> BTreeMap<(usize, usize), i128> {
        assert_eq!(self.cols, other.rows, "matrix shapes do not chain");
        let mut by_row: BTreeMap<usize, Vec<(usize, i64)>> = BTreeMap::new();
        for (&(r, c), &v) in &other.entries {
            by_row.entry(r).or_default().push((c, v));
        }
        let mut out: BTreeMap<(usize, usize), i128> = BTreeMap::new();
        for (&(i, k), &a) in &self.entries {
            if let Some(row) = by_row.get(&k) {
                for &(j, b) in row {
                    *out.entry((i, j)).or_insert(0) += i128::from(a) * i128::from(b);
                }
            }
        }
        out.retain(|_, v| *v != 0);
        out
    }
}

/// Result of the sparse pre-reduction.
struct Reduced<T> {
    unit_pivots: usize,
    core: Matrix<T>,
}

fn reduce<T: SnfInt>(m: &SparseMatrix) -> Option<Reduced<T>> {
    let mut cols: Vec<BTreeMap<usize, T>> = vec![BTreeMap::new(); m.cols];
    let mut rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m.rows];
    for (&(r, c), &v) in &m.entries {
        cols[c].insert(r, T::from_bigint(&BigInt::from(v))?);
        rows[r].insert(c);
    }
    let one = T::one();
    let minus_one = one.neg()?;
    let mut unit_pivots = 0;
    loop {
        // Markowitz-style choice among unit entries.
        let mut best: Option<(usize, usize, usize)> = None;
        'scan: for (c, col) in cols.iter().enumerate() {
            for (&r, v) in col {
                if *v != one && *v != minus_one {
                    continue;
                }
                let score = (col.len() - 1) * (rows[r].len() - 1);
                if best.map_or(true, |b| score < b.2) {
                    best = Some((r, c, score));
                    if score == 0 {
                        break 'scan;
                    }
                }
            }
        }
        let Some((pr, pc, _)) = best else { break };
        let pivot = cols[pc][&pr].clone();
        let pivot_row: Vec<(usize, T)> = rows[pr].iter().map(|&j| (j, cols[j][&pr].clone())).collect();
        let targets: Vec<(usize, T)> = cols[pc]
            .iter()
            .filter(|(&r, _)| r != pr)
            .map(|(&r, v)| (r, v.clone()))
            .collect();
        for (i, a) in targets {
            // row_i -= (a / pivot) * row_pr, and 1/pivot = pivot for units.
            let factor = a.mul(&pivot)?.neg()?;
            for (j, x) in &pivot_row {
                let delta = x.mul(&factor)?;
                let current = cols[*j].get(&i).cloned().unwrap_or_else(T::zero);
                let updated = current.add(&delta)?;
                if updated.is_zero() {
                    cols[*j].remove(&i);
                    rows[i].remove(j);
                } else {
                    cols[*j].insert(i, updated);
                    rows[i].insert(*j);
                }
            }
        }
        // Column pc now holds only the pivot; drop its row and column.
        for (j, _) in &pivot_row {
            cols[*j].remove(&pr);
        }
        rows[pr].clear();
        cols[pc].clear();
        unit_pivots += 1;
    }
    let live_rows: Vec<usize> = (0..m.rows).filter(|&r| !rows[r].is_empty()).collect();
    let live_cols: Vec<usize> = (0..m.cols).filter(|&c| !cols[c].is_empty()).collect();
    let mut core = Matrix::zeros(live_rows.len(), live_cols.len());
    for (ci, &c) in live_cols.iter().enumerate() {
        for (r, v) in &cols[c] {
            let ri = live_rows.binary_search(r).expect("live row");
            core.set(ri, ci, v.clone());
        }
    }
    Some(Reduced { unit_pivots, core })
}

/// Invariant factors (nonzero Smith diagonal, ascending under divisibility).
/// The dense remainder's Smith form is verified before use.
pub fn invariant_factors(m: &SparseMatrix) -> Result<Vec<BigInt>> {
    let (units, core) = match reduce::<i64>(m) {
        Some(r) => (r.unit_pivots, r.core.map(SnfInt::to_bigint)),
        None => {
            let r = reduce::<BigInt>(m).expect("BigInt reduction cannot overflow");
            (r.unit_pivots, r.core)
        }
    };
    let mut factors = vec![BigInt::from(1); units];
    if core.rows() > 0 && core.cols() > 0 {
        let snf = smith_normal_form(&core);
        snf.verify(&core)?;
        factors.extend(snf.invariant_factors());
    }
    Ok(factors)
}
