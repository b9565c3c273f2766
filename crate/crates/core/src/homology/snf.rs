//! Smith normal form over the integers.
//!
//! Elimination first runs on `i64` with checked arithmetic; any overflow
//! restarts the computation on `BigInt`, so results are always exact.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Integer ring operations used by the elimination. Fallible operations
/// return `None` on overflow.
pub trait SnfInt: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn abs_lt(&self, other: &Self) -> bool;
    fn add(&self, other: &Self) -> Option<Self>;
    fn sub(&self, other: &Self) -> Option<Self>;
    fn mul(&self, other: &Self) -> Option<Self>;
    fn neg(&self) -> Option<Self>;
    /// Truncating quotient.
    fn quot(&self, other: &Self) -> Option<Self>;
    fn divides(&self, other: &Self) -> bool;
    fn to_bigint(&self) -> BigInt;
    fn from_bigint(b: &BigInt) -> Option<Self>;
}

impl SnfInt for i64 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn is_negative(&self) -> bool {
        *self < 0
    }
    fn abs_lt(&self, other: &Self) -> bool {
        self.unsigned_abs() < other.unsigned_abs()
    }
    fn add(&self, other: &Self) -> Option<Self> {
        self.checked_add(*other)
    }
    fn sub(&self, other: &Self) -> Option<Self> {
        self.checked_sub(*other)
    }
    fn mul(&self, other: &Self) -> Option<Self> {
        self.checked_mul(*other)
    }
    fn neg(&self) -> Option<Self> {
        self.checked_neg()
    }
    fn quot(&self, other: &Self) -> Option<Self> {
        self.checked_div(*other)
    }
    fn divides(&self, other: &Self) -> bool {
        match *self {
            0 => false,
            -1 | 1 => true,
            d => other % d == 0,
        }
    }
    fn to_bigint(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn from_bigint(b: &BigInt) -> Option<Self> {
        b.to_i64()
    }
}

impl SnfInt for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn abs_lt(&self, other: &Self) -> bool {
        self.magnitude() < other.magnitude()
    }
    fn add(&self, other: &Self) -> Option<Self> {
        Some(self + other)
    }
    fn sub(&self, other: &Self) -> Option<Self> {
        Some(self - other)
    }
    fn mul(&self, other: &Self) -> Option<Self> {
        Some(self * other)
    }
    fn neg(&self) -> Option<Self> {
        Some(-self)
    }
    fn quot(&self, other: &Self) -> Option<Self> {
        Some(self / other)
    }
    fn divides(&self, other: &Self) -> bool {
        !Zero::is_zero(self) && Zero::is_zero(&other.mod_floor(self))
    }
    fn to_bigint(&self) -> BigInt {
        self.clone()
    }
    fn from_bigint(b: &BigInt) -> Option<Self> {
        Some(b.clone())
    }
}

/// Dense row-major integer matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

/// Arbitrary-precision integer matrix.
pub type IntMatrix = Matrix<BigInt>;

impl<T: SnfInt> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::DimensionMismatch {
                expected: c,
                got: bad.len(),
            });
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &T {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(SnfInt::is_zero)
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    fn try_map<U>(&self, f: impl Fn(&T) -> Option<U>) -> Option<Matrix<U>> {
        Some(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect::<Option<Vec<U>>>()?,
        })
    }

    /// Exact product; `None` on overflow.
    pub fn checked_mul(&self, other: &Matrix<T>) -> Option<Matrix<T>> {
        assert_eq!(self.cols, other.rows, "matrix shapes do not chain");
        let mut out: Matrix<T> = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * out.cols + j;
                    out.data[idx] = out.data[idx].add(&a.mul(b)?)?;
                }
            }
        }
        Some(out)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[target] += factor * row[source]
    fn add_row(&mut self, target: usize, source: usize, factor: &T) -> Option<()> {
        for j in 0..self.cols {
            let s = &self.data[source * self.cols + j];
            if s.is_zero() {
                continue;
            }
            let v = self.data[target * self.cols + j].add(&s.mul(factor)?)?;
            self.data[target * self.cols + j] = v;
        }
        Some(())
    }

    /// col[target] += factor * col[source]
    fn add_col(&mut self, target: usize, source: usize, factor: &T) -> Option<()> {
        for i in 0..self.rows {
            let s = &self.data[i * self.cols + source];
            if s.is_zero() {
                continue;
            }
            let v = self.data[i * self.cols + target].add(&s.mul(factor)?)?;
            self.data[i * self.cols + target] = v;
        }
        Some(())
    }

    fn negate_row(&mut self, r: usize) -> Option<()> {
        for j in 0..self.cols {
            let v = self.data[r * self.cols + j].neg()?;
            self.data[r * self.cols + j] = v;
        }
        Some(())
    }
}

impl<T: fmt::Display> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| self.data[i * self.cols + j].to_string())
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// `u * m * v = d` with `u`, `v` unimodular and `d` diagonal with
/// nonnegative entries `d_1 | d_2 | ...`. The inverses are kept so
/// unimodularity can be checked exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
    pub u_inv: IntMatrix,
    pub v_inv: IntMatrix,
}

impl SmithForm {
    /// Diagonal entries `d_ii` for `i < min(rows, cols)`.
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.rows.min(self.d.cols)).map(|i| self.d.get(i, i).clone()).collect()
    }

    /// The nonzero diagonal entries (the invariant factors).
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        self.diagonal().into_iter().filter(|x| !Zero::is_zero(x)).collect()
    }

    pub fn rank(&self) -> usize {
        self.invariant_factors().len()
    }

    /// Recomputes `u * m * v`, the inverse products and the divisibility chain.
    pub fn verify(&self, m: &IntMatrix) -> Result<()> {
        let fail = |what: &str| Err(Error::Internal(format!("Smith form check failed: {what}")));
        let (r, c) = (m.rows, m.cols);
        if (self.u.rows, self.u.cols, self.v.rows, self.v.cols) != (r, r, c, c) {
            return fail("shape");
        }
        let product = self
            .u
            .checked_mul(m)
            .and_then(|um| um.checked_mul(&self.v))
            .expect("BigInt products cannot overflow");
        if product != self.d {
            return fail("u * m * v != d");
        }
        let id_r = self.u.checked_mul(&self.u_inv).expect("BigInt");
        let id_c = self.v.checked_mul(&self.v_inv).expect("BigInt");
        if id_r != IntMatrix::identity(r) || id_c != IntMatrix::identity(c) {
            return fail("transform is not unimodular");
        }
        for i in 0..r {
            for j in 0..c {
                if i != j && !Zero::is_zero(self.d.get(i, j)) {
                    return fail("d is not diagonal");
                }
            }
        }
        let diag = self.diagonal();
        if diag.iter().any(Signed::is_negative) {
            return fail("negative diagonal entry");
        }
        for w in diag.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if Zero::is_zero(a) {
                if !Zero::is_zero(b) {
                    return fail("zero before nonzero on the diagonal");
                }
            } else if !Zero::is_zero(&b.mod_floor(a)) {
                return fail("divisibility chain broken");
            }
        }
        Ok(())
    }
}

struct Elimination<T> {
    a: Matrix<T>,
    u: Matrix<T>,
    u_inv: Matrix<T>,
    v: Matrix<T>,
    v_inv: Matrix<T>,
}

impl<T: SnfInt> Elimination<T> {
    fn new(a: Matrix<T>) -> Self {
        let (r, c) = (a.rows, a.cols);
        Elimination {
            a,
            u: Matrix::identity(r),
            u_inv: Matrix::identity(r),
            v: Matrix::identity(c),
            v_inv: Matrix::identity(c),
        }
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        self.a.swap_rows(i, j);
        self.u.swap_rows(i, j);
        self.u_inv.swap_cols(i, j);
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        self.a.swap_cols(i, j);
        self.v.swap_cols(i, j);
        self.v_inv.swap_rows(i, j);
    }

    /// row[target] += k * row[source]; the inverse subtracts the same
    /// multiple of column `target` from column `source`.
    fn add_row(&mut self, target: usize, source: usize, k: &T) -> Option<()> {
        self.a.add_row(target, source, k)?;
        self.u.add_row(target, source, k)?;
        self.u_inv.add_col(source, target, &k.neg()?)
    }

    fn add_col(&mut self, target: usize, source: usize, k: &T) -> Option<()> {
        self.a.add_col(target, source, k)?;
        self.v.add_col(target, source, k)?;
        self.v_inv.add_row(source, target, &k.neg()?)
    }

    fn negate_row(&mut self, r: usize) -> Option<()> {
        self.a.negate_row(r)?;
        self.u.negate_row(r)?;
        // Negation is its own inverse: negate the matching column of u_inv.
        for i in 0..self.u_inv.rows {
            let idx = i * self.u_inv.cols + r;
            self.u_inv.data[idx] = self.u_inv.data[idx].neg()?;
        }
        Some(())
    }

    /// Smallest-magnitude nonzero entry in the trailing block.
    fn min_entry(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for i in t..self.a.rows {
            for j in t..self.a.cols {
                let x = self.a.get(i, j);
                if x.is_zero() {
                    continue;
                }
                match best {
                    Some((bi, bj)) if !x.abs_lt(self.a.get(bi, bj)) => {}
                    _ => best = Some((i, j)),
                }
            }
        }
        best
    }

    fn run(&mut self) -> Option<()> {
        let steps = self.a.rows.min(self.a.cols);
        for t in 0..steps {
            let Some((pi, pj)) = self.min_entry(t) else { break };
            self.swap_rows(t, pi);
            self.swap_cols(t, pj);
            loop {
                let mut clean = true;
                for i in t + 1..self.a.rows {
                    if self.a.get(i, t).is_zero() {
                        continue;
                    }
                    let q = self.a.get(i, t).quot(self.a.get(t, t))?;
                    self.add_row(i, t, &q.neg()?)?;
                    if !self.a.get(i, t).is_zero() {
                        clean = false;
                    }
                }
                for j in t + 1..self.a.cols {
                    if self.a.get(t, j).is_zero() {
                        continue;
                    }
                    let q = self.a.get(t, j).quot(self.a.get(t, t))?;
                    self.add_col(j, t, &q.neg()?)?;
                    if !self.a.get(t, j).is_zero() {
                        clean = false;
                    }
                }
                if !clean {
                    // A remainder is now smaller than the pivot; promote it.
                    let mut best = (t, t);
                    for i in t + 1..self.a.rows {
                        let x = self.a.get(i, t);
                        if !x.is_zero() && x.abs_lt(self.a.get(best.0, best.1)) {
                            best = (i, t);
                        }
                    }
                    for j in t + 1..self.a.cols {
                        let x = self.a.get(t, j);
                        if !x.is_zero() && x.abs_lt(self.a.get(best.0, best.1)) {
                            best = (t, j);
                        }
                    }
                    self.swap_rows(t, best.0);
                    self.swap_cols(t, best.1);
                    continue;
                }
                // Pivot row and column are clear; enforce d_t | every later entry.
                let pivot = self.a.get(t, t).clone();
                let offender = (t + 1..self.a.rows)
                    .find(|&i| (t + 1..self.a.cols).any(|j| !pivot.divides(self.a.get(i, j))));
                match offender {
                    Some(i) => self.add_row(t, i, &T::one())?,
                    None => break,
                }
            }
            if self.a.get(t, t).is_negative() {
                self.negate_row(t)?;
            }
        }
        Some(())
    }

    fn into_bigint(self) -> SmithForm {
        let conv = |m: &Matrix<T>| m.map(SnfInt::to_bigint);
        SmithForm {
            u: conv(&self.u),
            d: conv(&self.a),
            v: conv(&self.v),
            u_inv: conv(&self.u_inv),
            v_inv: conv(&self.v_inv),
        }
    }
}

/// Smith normal form of an integer matrix.
pub fn smith_normal_form(m: &IntMatrix) -> SmithForm {
    if let Some(small) = m.try_map(i64::from_bigint) {
        let mut e = Elimination::new(small);
        if e.run().is_some() {
            return e.into_bigint();
        }
    }
    let mut e = Elimination::new(m.clone());
    e.run().expect("BigInt elimination cannot overflow");
    e.into_bigint()
}
