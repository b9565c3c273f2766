//! Implicants, prime implicants, minimal covers and the prime implicant graph.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::formula::{full_mask, Formula, Limits, PartialAssignment, World};
use crate::unionfind::UnionFind;

/// `true` iff every world extending `pa` satisfies `f`.
pub fn is_implicant(f: &Formula, pa: PartialAssignment, limits: &Limits) -> Result<bool> {
    let free = f.n() - (pa.mask() & full_mask(f.n())).count_ones() as usize;
    limits.check("implicant cover", free)?;
    Ok(pa.cover(f.n()).all(|w| f.eval_world(w)))
}

/// Cheap digest binding a result to the formula and variable order it came from.
pub fn formula_digest(f: &Formula) -> u64 {
    // FNV-1a over the canonical printed form and the variable list.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let text = format!("{f}|{}", f.vars().join(","));
    for b in text.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

/// All prime implicants of a formula, sorted by `|D|` then `(mask, bits)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeImplicantSet {
    items: Vec<PartialAssignment>,
    n: usize,
    source_formula_hash: u64,
}

impl PrimeImplicantSet {
    pub fn items(&self) -> &[PartialAssignment] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn source_formula_hash(&self) -> u64 {
        self.source_formula_hash
    }

    pub fn patterns(&self) -> Vec<String> {
        self.items.iter().map(|p| p.pattern(self.n)).collect()
    }

    fn check_source(&self, f: &Formula) -> Result<()> {
        if self.source_formula_hash != formula_digest(f) {
            return Err(Error::InvalidArgument(
                "prime implicant set was computed for a different formula".into(),
            ));
        }
        Ok(())
    }
}

fn sort_key(pa: &PartialAssignment) -> (usize, u64, u64) {
    (pa.len(), pa.mask(), pa.bits())
}

/// Quine-McCluskey merging: starting from the minterms, repeatedly combine
/// pairs of implicants that share a mask and differ in one assigned bit.
/// Implicants that never merge are prime.
pub fn prime_implicants(f: &Formula, limits: &Limits) -> Result<PrimeImplicantSet> {
    let n = f.n();
    let worlds = f.possible_worlds(limits)?;
    if worlds.is_empty() {
        return Err(Error::Unsatisfiable);
    }
    let cap = limits.max_prime_implicants;
    let full = full_mask(n);
    let mut generation: HashSet<PartialAssignment> = worlds
        .iter()
        .map(|&w| PartialAssignment::full(w, n))
        .collect();
    let mut primes = Vec::new();
    while !generation.is_empty() {
        let mut next: HashSet<PartialAssignment> = HashSet::new();
        let mut merged: HashSet<PartialAssignment> = HashSet::new();
        for &imp in &generation {
            let mut assigned = imp.mask() & full;
            while assigned != 0 {
                let bit = assigned & assigned.wrapping_neg();
                assigned &= assigned - 1;
                // Pair each implicant with its partner that has this bit set.
                if imp.bits() & bit != 0 {
                    continue;
                }
                let partner = PartialAssignment::new(imp.bits() | bit, imp.mask())?;
                if generation.contains(&partner) {
                    merged.insert(imp);
                    merged.insert(partner);
                    next.insert(PartialAssignment::new(imp.bits(), imp.mask() & !bit)?);
                    if next.len() > cap {
                        return Err(Error::PrimeImplicantOverflow { limit: cap });
                    }
                }
            }
        }
        primes.extend(generation.iter().filter(|imp| !merged.contains(imp)).copied());
        if primes.len() > cap {
            return Err(Error::PrimeImplicantOverflow { limit: cap });
        }
        generation = next;
    }
    primes.sort_by_key(sort_key);
    Ok(PrimeImplicantSet {
        items: primes,
        n,
        source_formula_hash: formula_digest(f),
    })
}

/// Above this many candidate implicants Petrick's expansion gives way to
/// branch and bound.
pub const PETRICK_MAX_IMPLICANTS: usize = 24;

/// A minimum-cardinality subset of `pis` whose covers union to the possible
/// worlds. Among optimal covers the lexicographically smallest index list
/// (in the set's order) is returned.
pub fn minimal_cover(
    pis: &PrimeImplicantSet,
    f: &Formula,
    limits: &Limits,
) -> Result<Vec<PartialAssignment>> {
    pis.check_source(f)?;
    let worlds = f.possible_worlds(limits)?;
    let rows: Vec<Vec<usize>> = worlds
        .iter()
        .map(|&w| {
            pis.items
                .iter()
                .enumerate()
                .filter(|(_, p)| p.covers(w))
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    let chosen = if pis.len() <= PETRICK_MAX_IMPLICANTS {
        petrick(&rows)
    } else {
        branch_and_bound(&rows, pis.len())
    };
    Ok(chosen.into_iter().map(|i| pis.items[i]).collect())
}

fn indices(mask: u64) -> Vec<usize> {
    (0..64).filter(|i| mask >> i & 1 == 1).collect()
}

/// Product-of-sums expansion with absorption. `rows[w]` lists the implicants
/// covering world `w`; products are bitsets over implicant indices.
fn petrick(rows: &[Vec<usize>]) -> Vec<usize> {
    let mut products: Vec<u64> = vec![0];
    let mut clauses: Vec<u64> = rows
        .iter()
        .map(|r| r.iter().fold(0u64, |acc, &i| acc | 1 << i))
        .collect();
    clauses.sort_unstable();
    clauses.dedup();
    // Fewest alternatives first keeps the intermediate product small.
    clauses.sort_by_key(|c| c.count_ones());
    for clause in clauses {
        let mut expanded: Vec<u64> = Vec::new();
        for &p in &products {
            if p & clause != 0 {
                expanded.push(p);
                continue;
            }
            for i in indices(clause) {
                expanded.push(p | 1 << i);
            }
        }
        expanded.sort_unstable_by_key(|p| (p.count_ones(), *p));
        expanded.dedup();
        let mut kept: Vec<u64> = Vec::with_capacity(expanded.len());
        for p in expanded {
            if !kept.iter().any(|&q| q & p == q) {
                kept.push(p);
            }
        }
        products = kept;
    }
    products
        .into_iter()
        .map(indices)
        .min_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)))
        .unwrap_or_default()
}

/// Exact set cover by depth-first branch and bound, branching on the
/// uncovered world with the fewest covering implicants.
fn branch_and_bound(rows: &[Vec<usize>], num_items: usize) -> Vec<usize> {
    let mut covers_of: Vec<Vec<usize>> = vec![Vec::new(); num_items];
    for (w, r) in rows.iter().enumerate() {
        for &i in r {
            covers_of[i].push(w);
        }
    }
    let max_cover = covers_of.iter().map(Vec::len).max().unwrap_or(1).max(1);

    struct Search<'a> {
        rows: &'a [Vec<usize>],
        covers_of: &'a [Vec<usize>],
        max_cover: usize,
        best: Option<Vec<usize>>,
    }

    impl Search<'_> {
        fn better(&self, cand: &[usize]) -> bool {
            match &self.best {
                None => true,
                Some(b) => {
                    let mut c = cand.to_vec();
                    c.sort_unstable();
                    (c.len(), &c) < (b.len(), b)
                }
            }
        }

        fn run(&mut self, covered: &mut [u32], chosen: &mut Vec<usize>, uncovered: usize) {
            if uncovered == 0 {
                if self.better(chosen) {
                    let mut c = chosen.clone();
                    c.sort_unstable();
                    self.best = Some(c);
                }
                return;
            }
            let lower = chosen.len() + uncovered.div_ceil(self.max_cover);
            if let Some(b) = &self.best {
                if lower > b.len() {
                    return;
                }
            }
            let pivot = (0..self.rows.len())
                .filter(|&w| covered[w] == 0)
                .min_by_key(|&w| self.rows[w].len())
                .expect("uncovered > 0");
            for &i in &self.rows[pivot] {
                let mut newly = 0;
                for &w in &self.covers_of[i] {
                    if covered[w] == 0 {
                        newly += 1;
                    }
                    covered[w] += 1;
                }
                chosen.push(i);
                self.run(covered, chosen, uncovered - newly);
                chosen.pop();
                for &w in &self.covers_of[i] {
                    covered[w] -= 1;
                }
            }
        }
    }

    let mut search = Search {
        rows,
        covers_of: &covers_of,
        max_cover,
        best: None,
    };
    let mut covered = vec![0u32; rows.len()];
    search.run(&mut covered, &mut Vec::new(), rows.len());
    search.best.unwrap_or_default()
}

/// Possible worlds as vertices; an edge joins two worlds that some prime
/// implicant covers together.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImplicantGraph {
    pub vertices: Vec<World>,
    pub edges: BTreeSet<(World, World)>,
}

impl ImplicantGraph {
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

pub fn implicant_graph(f: &Formula, pis: &PrimeImplicantSet, limits: &Limits) -> Result<ImplicantGraph> {
    pis.check_source(f)?;
    let vertices = f.possible_worlds(limits)?;
    let mut edges = BTreeSet::new();
    for p in &pis.items {
        let cover: Vec<World> = p.cover(f.n()).collect();
        for (a, &w1) in cover.iter().enumerate() {
            for &w2 in &cover[a + 1..] {
                edges.insert((w1.min(w2), w1.max(w2)));
            }
        }
    }
    Ok(ImplicantGraph { vertices, edges })
}

/// Connected components, each sorted, ordered by smallest member.
pub fn connected_components(g: &ImplicantGraph) -> Vec<Vec<World>> {
    let index: HashMap<World, usize> = g.vertices.iter().enumerate().map(|(i, &w)| (w, i)).collect();
    let mut uf = UnionFind::new(g.vertices.len());
    for (a, b) in &g.edges {
        uf.union(index[a], index[b]);
    }
    uf.groups()
        .into_iter()
        .map(|members| members.into_iter().map(|i| g.vertices[i]).collect())
        .collect()
}
