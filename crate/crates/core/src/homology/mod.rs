//! Cubical homology of a [`CubicalSet`] with integer coefficients.

mod snf;
mod sparse;

pub use snf::{smith_normal_form, IntMatrix, Matrix, SmithForm, SnfInt};
pub use sparse::{invariant_factors, SparseMatrix};

use std::collections::HashMap;

use num_bigint::BigInt;

use crate::cubical::{CubicalSet, ElementaryCube};
use crate::error::{Error, Result};
use crate::formula::Limits;

/// Cubes of every dimension plus the signed boundary maps between them.
#[derive(Debug, Clone)]
pub struct ChainComplex {
    cubes_by_dim: Vec<Vec<ElementaryCube>>,
    /// `boundaries[k]` is `∂_k : C_k -> C_{k-1}` for `k >= 1`; index 0 is an
    /// empty `0 x |C_0|` map.
    boundaries: Vec<SparseMatrix>,
    n: usize,
}

impl ChainComplex {
    pub fn cubes(&self, k: usize) -> &[ElementaryCube] {
        self.cubes_by_dim.get(k).map_or(&[], Vec::as_slice)
    }

    pub fn cubes_by_dim(&self) -> &[Vec<ElementaryCube>] {
        &self.cubes_by_dim
    }

    /// Highest dimension holding a cube.
    pub fn top_dim(&self) -> usize {
        self.cubes_by_dim.len() - 1
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `∂_k` as a `|C_{k-1}| x |C_k|` matrix; `None` for `k = 0` or above the top dimension.
    pub fn boundary(&self, k: usize) -> Option<&SparseMatrix> {
        if k == 0 {
            return None;
        }
        self.boundaries.get(k)
    }

    /// `true` iff `∂_k ∘ ∂_{k+1}` vanishes for every `k`.
    pub fn boundary_squared_is_zero(&self) -> bool {
        (1..self.top_dim()).all(|k| self.boundaries[k].mul(&self.boundaries[k + 1]).is_empty())
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.cubes_by_dim
            .iter()
            .enumerate()
            .map(|(k, c)| if k % 2 == 0 { c.len() as i64 } else { -(c.len() as i64) })
            .sum()
    }
}

/// Builds the cubical chain complex from all faces of the facets.
pub fn chain_complex(cs: &CubicalSet, limits: &Limits) -> Result<ChainComplex> {
    let top = cs.max_dim();
    let mut cubes_by_dim = Vec::with_capacity(top + 1);
    for k in 0..=top {
        cubes_by_dim.push(cs.faces(k, limits)?);
    }
    if cubes_by_dim[0].is_empty() {
        return Err(Error::InvalidArgument("empty cubical set".into()));
    }
    let mut boundaries = vec![SparseMatrix::new(0, cubes_by_dim[0].len())];
    for k in 1..=top {
        let index: HashMap<ElementaryCube, usize> = cubes_by_dim[k - 1]
            .iter()
            .enumerate()
            .map(|(i, c)| (*c, i))
            .collect();
        let mut m = SparseMatrix::new(cubes_by_dim[k - 1].len(), cubes_by_dim[k].len());
        for (j, cube) in cubes_by_dim[k].iter().enumerate() {
            for (face, sign) in cube.boundary() {
                let i = *index.get(&face).ok_or_else(|| {
                    Error::Internal(format!("face {face} of {cube} missing from the complex"))
                })?;
                m.add(i, j, i64::from(sign));
            }
        }
        boundaries.push(m);
    }
    Ok(ChainComplex {
        cubes_by_dim,
        boundaries,
        n: cs.n(),
    })
}

/// Betti numbers, torsion coefficients and boundary ranks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomologyResult {
    /// `β_0 .. β_{n-1}` (`β_n` of a subset of `[0,1]^n` is always zero).
    pub betti: Vec<usize>,
    /// Invariant factors of `∂_{k+1}` exceeding one, for each `k` in `0..n`.
    pub torsion: Vec<Vec<BigInt>>,
    /// `rank ∂_k` for `k` in `0..=n`.
    pub ranks: Vec<usize>,
}

pub fn homology_of(cx: &ChainComplex) -> Result<HomologyResult> {
    let n = cx.n();
    let top = cx.top_dim();
    let mut ranks = vec![0usize; n + 2];
    let mut factors: Vec<Vec<BigInt>> = vec![Vec::new(); n + 2];
    for k in 1..=top {
        let f = invariant_factors(&cx.boundaries[k])?;
        ranks[k] = f.len();
        factors[k] = f;
    }
    let one = BigInt::from(1);
    let mut betti = Vec::with_capacity(n + 1);
    let mut torsion = Vec::with_capacity(n);
    for k in 0..=n {
        let size = cx.cubes(k).len();
        betti.push(size - ranks[k] - ranks[k + 1]);
        torsion.push(factors[k + 1].iter().filter(|d| **d > one).cloned().collect());
    }
    let euler: i64 = betti
        .iter()
        .enumerate()
        .map(|(k, &b)| if k % 2 == 0 { b as i64 } else { -(b as i64) })
        .sum();
    if euler != cx.euler_characteristic() {
        return Err(Error::Internal(format!(
            "Euler characteristic mismatch: betti give {euler}, cells give {}",
            cx.euler_characteristic()
        )));
    }
    if betti[n] != 0 {
        return Err(Error::Internal(format!("nonzero top Betti number {}", betti[n])));
    }
    betti.truncate(n);
    torsion.truncate(n);
    ranks.truncate(n + 1);
    Ok(HomologyResult { betti, torsion, ranks })
}

pub fn homology(cs: &CubicalSet, limits: &Limits) -> Result<HomologyResult> {
    homology_of(&chain_complex(cs, limits)?)
}
