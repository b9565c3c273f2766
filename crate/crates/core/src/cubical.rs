//! Elementary cubes in `[0,1]^n` and the cubical set of possible
//! independent parameters: the union of all prime-implicant cubes.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::formula::{full_mask, Formula, Limits, PartialAssignment, World};
use crate::implicants::{prime_implicants, PrimeImplicantSet};
use crate::unionfind::UnionFind;

/// Tolerance used to call a float coordinate deterministic.
pub const EPS_DET: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Interval {
    Zero,
    One,
    Full,
}

/// A product of elementary intervals `{0}`, `{1}`, `[0,1]`. The fixed
/// coordinates are stored as a partial assignment; the rest are `[0,1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementaryCube {
    fixed: PartialAssignment,
    n: usize,
}

impl ElementaryCube {
    pub fn intervals(&self) -> Vec<Interval> {
        (0..self.n)
            .map(|i| match self.fixed.value(i) {
                Some(false) => Interval::Zero,
                Some(true) => Interval::One,
                None => Interval::Full,
            })
            .collect()
    }

    pub fn fixed(&self) -> PartialAssignment {
        self.fixed
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of `[0,1]` factors.
    pub fn dim(&self) -> usize {
        self.n - self.fixed.len()
    }

    /// The positions of the `[0,1]` factors, ascending.
    pub fn free_coords(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.fixed.value(i).is_none()).collect()
    }

    /// Canonical key for ordering and deduplication.
    pub fn key(&self) -> (u64, u64) {
        (self.fixed.mask(), self.fixed.bits())
    }

    pub fn is_face_of(&self, other: &ElementaryCube) -> bool {
        other.fixed.subsumes(self.fixed)
    }

    /// Squared L2 distance from `mu` to the cube (per-coordinate clamping).
    fn distance_sq(&self, mu: &[f64]) -> f64 {
        mu.iter()
            .enumerate()
            .map(|(i, &x)| {
                let r = match self.fixed.value(i) {
                    Some(v) => x - f64::from(u8::from(v)),
                    None => x - x.clamp(0.0, 1.0),
                };
                r * r
            })
            .sum()
    }

    fn linf_distance(&self, mu: &[f64]) -> f64 {
        mu.iter()
            .enumerate()
            .map(|(i, &x)| match self.fixed.value(i) {
                Some(v) => (x - f64::from(u8::from(v))).abs(),
                None => (x - x.clamp(0.0, 1.0)).abs(),
            })
            .fold(0.0, f64::max)
    }

    /// Signed codimension-one faces. For free positions `j_1 < ... < j_d`,
    /// the `m`-th contributes `(-1)^(m-1)` times (upper face minus lower face).
    pub fn boundary(&self) -> Vec<(ElementaryCube, i8)> {
        let mut out = Vec::with_capacity(2 * self.dim());
        for (m, j) in self.free_coords().into_iter().enumerate() {
            let sign: i8 = if m % 2 == 0 { 1 } else { -1 };
            out.push((cube_of(self.fixed.with(j, true), self.n), sign));
            out.push((cube_of(self.fixed.with(j, false), self.n), -sign));
        }
        out
    }
}

impl fmt::Display for ElementaryCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fixed.pattern(self.n))
    }
}

/// Cube of an implicant: `{v}` on assigned coordinates, `[0,1]` elsewhere.
pub fn cube_of(pa: PartialAssignment, n: usize) -> ElementaryCube {
    let mask = pa.mask() & full_mask(n);
    let fixed = PartialAssignment::new(pa.bits() & mask, mask).expect("bits within mask");
    ElementaryCube { fixed, n }
}

/// Parses `"0*"`-style cube notation.
pub fn parse_cube(pattern: &str) -> Result<ElementaryCube> {
    Ok(cube_of(PartialAssignment::from_pattern(pattern)?, pattern.chars().count()))
}

/// Union of cubes, one facet per prime implicant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubicalSet {
    facets: Vec<ElementaryCube>,
    n: usize,
}

impl CubicalSet {
    /// Builds from facets; rejects nested facets and mixed dimensions.
    pub fn from_facets(facets: Vec<ElementaryCube>, n: usize) -> Result<Self> {
        if facets.is_empty() {
            return Err(Error::InvalidArgument("cubical set needs at least one facet".into()));
        }
        if let Some(c) = facets.iter().find(|c| c.n != n) {
            return Err(Error::DimensionMismatch { expected: n, got: c.n });
        }
        for (i, a) in facets.iter().enumerate() {
            for (j, b) in facets.iter().enumerate() {
                if i != j && a.is_face_of(b) {
                    return Err(Error::InvalidArgument(format!("facet {a} lies inside facet {b}")));
                }
            }
        }
        Ok(CubicalSet { facets, n })
    }

    pub fn from_prime_implicants(pis: &PrimeImplicantSet) -> Self {
        CubicalSet {
            facets: pis.items().iter().map(|&p| cube_of(p, pis.n())).collect(),
            n: pis.n(),
        }
    }

    pub fn facets(&self) -> &[ElementaryCube] {
        &self.facets
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `true` iff `mu` is within L-infinity distance `eps` of some facet.
    pub fn contains(&self, mu: &[f64], eps: f64) -> bool {
        self.facets.iter().any(|c| c.linf_distance(mu) <= eps)
    }

    /// Euclidean distance from `mu` to the set.
    pub fn distance(&self, mu: &[f64]) -> f64 {
        self.nearest_facet(mu).1
    }

    /// Index of the closest facet (first in facet order on ties) and its distance.
    pub fn nearest_facet(&self, mu: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, c) in self.facets.iter().enumerate() {
            let d = c.distance_sq(mu);
            if d < best.1 {
                best = (i, d);
            }
        }
        (best.0, best.1.sqrt())
    }

    /// All distinct `k`-dimensional faces, ordered by `(mask, bits)`.
    pub fn faces(&self, k: usize, limits: &Limits) -> Result<Vec<ElementaryCube>> {
        let mut seen: BTreeSet<(u64, u64)> = BTreeSet::new();
        for facet in &self.facets {
            let free = facet.free_coords();
            if free.len() < k {
                continue;
            }
            let to_fix = free.len() - k;
            for subset in combinations(free.len(), to_fix) {
                let fix_mask: u64 = subset.iter().fold(0, |m, &s| m | 1 << free[s]);
                for values in 0..1u64 << to_fix {
                    let bits = crate::formula::deposit(values, fix_mask);
                    seen.insert((facet.fixed.mask() | fix_mask, facet.fixed.bits() | bits));
                    if seen.len() > limits.max_prime_implicants {
                        return Err(Error::PrimeImplicantOverflow {
                            limit: limits.max_prime_implicants,
                        });
                    }
                }
            }
        }
        Ok(seen
            .into_iter()
            .map(|(mask, bits)| ElementaryCube {
                fixed: PartialAssignment::new(bits, mask).expect("bits within mask"),
                n: self.n,
            })
            .collect())
    }

    pub fn max_dim(&self) -> usize {
        self.facets.iter().map(ElementaryCube::dim).max().unwrap_or(0)
    }

    /// Components of the 1-skeleton (vertices joined by 1-faces), as worlds.
    pub fn skeleton_components(&self, limits: &Limits) -> Result<Vec<Vec<World>>> {
        let vertices: Vec<World> = self
            .faces(0, limits)?
            .into_iter()
            .map(|c| World(c.fixed.bits()))
            .collect();
        let index: HashMap<World, usize> = vertices.iter().enumerate().map(|(i, &w)| (w, i)).collect();
        let mut uf = UnionFind::new(vertices.len());
        for edge in self.faces(1, limits)? {
            let ends: Vec<usize> = edge
                .fixed
                .cover(self.n)
                .map(|w| index[&w])
                .collect();
            uf.union(ends[0], ends[1]);
        }
        let mut groups: Vec<Vec<World>> = uf
            .groups()
            .into_iter()
            .map(|g| {
                let mut ws: Vec<World> = g.into_iter().map(|i| vertices[i]).collect();
                ws.sort();
                ws
            })
            .collect();
        groups.sort();
        Ok(groups)
    }

    /// Searches pairs of facet-interior points for a convex combination that
    /// leaves the set. Returns `(x, y, lambda)` when found.
    pub fn nonconvexity_witness(&self) -> Option<(Vec<f64>, Vec<f64>, f64)> {
        const LAMBDAS: [f64; 5] = [0.5, 0.25, 0.75, 0.1, 0.9];
        let interior = |c: &ElementaryCube| -> Vec<f64> {
            (0..self.n)
                .map(|i| c.fixed.value(i).map_or(0.5, |v| f64::from(u8::from(v))))
                .collect()
        };
        for (i, a) in self.facets.iter().enumerate() {
            for b in &self.facets[i + 1..] {
                let (x, y) = (interior(a), interior(b));
                for &lambda in &LAMBDAS {
                    let z: Vec<f64> = x.iter().zip(&y).map(|(p, q)| lambda * p + (1.0 - lambda) * q).collect();
                    if !self.contains(&z, 0.0) {
                        return Some((x, y, lambda));
                    }
                }
            }
        }
        None
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// The cubical set of `f`: one facet per prime implicant.
pub fn cubical_set(f: &Formula, limits: &Limits) -> Result<CubicalSet> {
    Ok(CubicalSet::from_prime_implicants(&prime_implicants(f, limits)?))
}

/// The possible independent parameters form a convex set iff there is a
/// single prime implicant.
pub fn is_convex(f: &Formula, limits: &Limits) -> Result<bool> {
    Ok(prime_implicants(f, limits)?.len() == 1)
}
