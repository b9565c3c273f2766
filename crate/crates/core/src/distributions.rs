//! Distributions over worlds: independent (product) distributions, dense
//! vectors on the simplex, and mixtures of independent distributions.

use crate::cubical::EPS_DET;
use crate::error::{Error, Result};
use crate::formula::{full_mask, Formula, Limits, PartialAssignment, World};
use crate::implicants::{is_implicant, minimal_cover, prime_implicants};

/// Tolerance for simplex normalization checks.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Parameters of an independent distribution: `mu[i] = p(w_i = 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndependentParams {
    mu: Vec<f64>,
}

impl IndependentParams {
    pub fn new(mu: Vec<f64>) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::NoVariables);
        }
        if let Some(x) = mu.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::InvalidArgument(format!("probability {x} outside [0, 1]")));
        }
        Ok(IndependentParams { mu })
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    /// `p_mu(w) = prod_i mu_i^{w_i} (1 - mu_i)^{1 - w_i}` for every world.
    pub fn densify(&self, limits: &Limits) -> Result<DenseDistribution> {
        limits.check("dense distribution", self.n())?;
        Ok(DenseDistribution {
            probs: product_probs(&self.mu),
            n: self.n(),
        })
    }

    /// Coordinates within `eps` of 0 or 1, rounded.
    pub fn deterministic_assignment(&self, eps: f64) -> PartialAssignment {
        let mut pa = PartialAssignment::empty();
        for (i, &m) in self.mu.iter().enumerate() {
            if m.min(1.0 - m) <= eps {
                pa = pa.with(i, m >= 0.5);
            }
        }
        pa
    }
}

pub(crate) fn product_probs(mu: &[f64]) -> Vec<f64> {
    let mut probs = Vec::with_capacity(1 << mu.len());
    probs.push(1.0);
    for &m in mu {
        let len = probs.len();
        for w in 0..len {
            probs.push(probs[w] * m);
            probs[w] *= 1.0 - m;
        }
    }
    probs
}

/// A probability vector over all `2^n` worlds, indexed by bit pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseDistribution {
    probs: Vec<f64>,
    n: usize,
}

impl DenseDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let len = probs.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "dense distribution needs 2^n entries with n >= 1, got {len}"
            )));
        }
        if probs.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::InvalidArgument("negative or NaN probability".into()));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidArgument(format!("probabilities sum to {sum}")));
        }
        Ok(DenseDistribution {
            probs,
            n: len.trailing_zeros() as usize,
        })
    }

    pub(crate) fn from_raw(probs: Vec<f64>, n: usize) -> Self {
        debug_assert_eq!(probs.len(), 1 << n);
        DenseDistribution { probs, n }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn prob(&self, w: World) -> f64 {
        self.probs[w.0 as usize]
    }

    /// `p(w_i = 1)` for each variable.
    pub fn marginals(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                self.probs
                    .iter()
                    .enumerate()
                    .filter(|(w, _)| w >> i & 1 == 1)
                    .map(|(_, p)| p)
                    .sum()
            })
            .collect()
    }

    /// Worlds with strictly positive probability.
    pub fn support(&self) -> Vec<World> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(w, _)| World(w as u64))
            .collect()
    }

    /// CSV with header `world_bits,probability`; worlds written as bit strings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("world_bits,probability\n");
        for (w, p) in self.probs.iter().enumerate() {
            out.push_str(&format!("{},{:.17e}\n", World(w as u64).pattern(self.n), p));
        }
        out
    }
}

/// A mixture `sum_m alpha_m p_{mu_m}` of independent distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureParams {
    alpha: Vec<f64>,
    components: Vec<IndependentParams>,
}

impl MixtureParams {
    pub fn new(alpha: Vec<f64>, components: Vec<IndependentParams>) -> Result<Self> {
        if alpha.is_empty() || alpha.len() != components.len() {
            return Err(Error::DimensionMismatch {
                expected: components.len().max(1),
                got: alpha.len(),
            });
        }
        if alpha.iter().any(|a| !(*a >= 0.0)) {
            return Err(Error::InvalidArgument("negative mixture weight".into()));
        }
        let sum: f64 = alpha.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidArgument(format!("mixture weights sum to {sum}")));
        }
        let n = components[0].n();
        if let Some(c) = components.iter().find(|c| c.n() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: c.n() });
        }
        Ok(MixtureParams { alpha, components })
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn components(&self) -> &[IndependentParams] {
        &self.components
    }

    pub fn k(&self) -> usize {
        self.alpha.len()
    }

    pub fn n(&self) -> usize {
        self.components[0].n()
    }

    pub fn densify(&self, limits: &Limits) -> Result<DenseDistribution> {
        limits.check("dense distribution", self.n())?;
        let mut probs = vec![0.0; 1 << self.n()];
        for (a, c) in self.alpha.iter().zip(&self.components) {
            if *a == 0.0 {
                continue;
            }
            for (acc, p) in probs.iter_mut().zip(product_probs(c.mu())) {
                *acc += a * p;
            }
        }
        Ok(DenseDistribution::from_raw(probs, self.n()))
    }
}

fn check_dims(f: &Formula, n: usize) -> Result<()> {
    if f.n() != n {
        return Err(Error::DimensionMismatch { expected: f.n(), got: n });
    }
    Ok(())
}

/// Weighted model count: the probability that `f` holds under `p`.
pub fn wmc(f: &Formula, p: &DenseDistribution) -> Result<f64> {
    check_dims(f, p.n())?;
    Ok(p.probs
        .iter()
        .enumerate()
        .filter(|(w, _)| f.eval_world(World(*w as u64)))
        .map(|(_, q)| q)
        .sum())
}

/// An independent distribution is possible iff its deterministic part is an implicant.
pub fn is_possible(f: &Formula, p: &IndependentParams, limits: &Limits) -> Result<bool> {
    check_dims(f, p.n())?;
    is_implicant(f, p.deterministic_assignment(EPS_DET), limits)
}

/// `p(w | phi = 1)`.
pub fn condition(f: &Formula, p: &DenseDistribution) -> Result<DenseDistribution> {
    let z = wmc(f, p)?;
    if z <= 0.0 {
        return Err(Error::ZeroEvidence);
    }
    let probs = p
        .probs
        .iter()
        .enumerate()
        .map(|(w, q)| if f.eval_world(World(w as u64)) { q / z } else { 0.0 })
        .collect();
    Ok(DenseDistribution::from_raw(probs, p.n))
}

/// Most specific partial assignment shared by all `worlds`.
fn common_assignment(worlds: &[World], n: usize) -> PartialAssignment {
    let full = full_mask(n);
    let Some(first) = worlds.first() else {
        return PartialAssignment::empty();
    };
    let agree = worlds.iter().fold(full, |m, w| m & !(w.0 ^ first.0));
    PartialAssignment::new(first.0 & agree, agree).expect("bits within mask")
}

/// Checks whether `w_E, phi ⊨ w_D` for some implicant `w_D`, where `w_E` is
/// the deterministic part of `p`.
pub fn conditional_entails_implicant(f: &Formula, p: &IndependentParams, limits: &Limits) -> Result<bool> {
    check_dims(f, p.n())?;
    let e = p.deterministic_assignment(EPS_DET);
    let possible: Vec<World> = e.cover(f.n()).filter(|&w| f.eval_world(w)).collect();
    if possible.is_empty() {
        return Err(Error::ZeroEvidence);
    }
    // Any implicant entailed here is a sub-assignment of the common part, and
    // shrinking an assignment only enlarges its cover.
    is_implicant(f, common_assignment(&possible, f.n()), limits)
}

/// The conditional `p(w | phi)` as an independent distribution, when one exists.
pub fn representable_conditional(
    f: &Formula,
    p: &IndependentParams,
    limits: &Limits,
) -> Result<Option<IndependentParams>> {
    let dense = p.densify(limits)?;
    let conditional = condition(f, &dense)?;
    if !conditional_entails_implicant(f, p, limits)? {
        return Ok(None);
    }
    let q = IndependentParams::new(
        conditional
            .marginals()
            .into_iter()
            .map(|m| m.clamp(0.0, 1.0))
            .collect(),
    )?;
    let rebuilt = q.densify(limits)?;
    let err = rebuilt
        .probs
        .iter()
        .zip(&conditional.probs)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if err > 1e-9 {
        return Err(Error::Internal(format!(
            "product of conditional marginals misses the conditional by {err:e}"
        )));
    }
    Ok(Some(q))
}

/// Worlds of positive mixture probability: those covered by the exact
/// deterministic assignment of some positive-weight component.
pub fn mixture_support(f: &Formula, m: &MixtureParams) -> Result<Vec<World>> {
    check_dims(f, m.n())?;
    let mut worlds: Vec<World> = m
        .alpha
        .iter()
        .zip(&m.components)
        .filter(|(a, _)| **a > 0.0)
        .flat_map(|(_, c)| c.deterministic_assignment(0.0).cover(f.n()).collect::<Vec<_>>())
        .collect();
    worlds.sort();
    worlds.dedup();
    Ok(worlds)
}

/// A mixture is possible iff every positive-weight component is possible.
pub fn mixture_is_possible(f: &Formula, m: &MixtureParams, limits: &Limits) -> Result<bool> {
    for (a, c) in m.alpha.iter().zip(&m.components) {
        if *a > 0.0 && !is_possible(f, c, limits)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MixtureBounds {
    /// Size of a minimal cover of prime implicants.
    pub min_components: usize,
    /// Number of possible worlds.
    pub upper: usize,
    /// `ceil(|W_phi| / (n + 1))`.
    pub simplex_lower: usize,
}

pub fn mixture_bounds(f: &Formula, limits: &Limits) -> Result<MixtureBounds> {
    let pis = prime_implicants(f, limits)?;
    let cover = minimal_cover(&pis, f, limits)?;
    let worlds = f.possible_worlds(limits)?.len();
    Ok(MixtureBounds {
        min_components: cover.len(),
        upper: worlds,
        simplex_lower: worlds.div_ceil(f.n() + 1),
    })
}

/// One leg of a piecewise-linear mixture path.
#[derive(Debug, Clone)]
struct Leg {
    from: MixtureParams,
    to: MixtureParams,
}

fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| (1.0 - t) * x + t * y).collect()
}

fn lerp_mixture(a: &MixtureParams, b: &MixtureParams, t: f64) -> MixtureParams {
    let alpha = lerp(&a.alpha, &b.alpha, t);
    let components = a
        .components
        .iter()
        .zip(&b.components)
        .map(|(x, y)| IndependentParams {
            mu: lerp(&x.mu, &y.mu, t).into_iter().map(|v| v.clamp(0.0, 1.0)).collect(),
        })
        .collect();
    MixtureParams { alpha, components }
}

fn unit_weights(k: usize, at: usize) -> Vec<f64> {
    let mut a = vec![0.0; k];
    a[at] = 1.0;
    a
}

/// Samples `steps` points of a path of possible mixtures from `m1` to `m2`.
///
/// Weight is first collapsed onto one component, the zero-weight components
/// are moved to their targets, weight is handed over to a component already
/// at its target, and finally re-expanded to `m2`'s weights. Every sampled
/// mixture keeps all positive-weight components inside the possible set.
pub fn mixture_path(
    f: &Formula,
    m1: &MixtureParams,
    m2: &MixtureParams,
    steps: usize,
    limits: &Limits,
) -> Result<Vec<MixtureParams>> {
    if m1.k() != m2.k() || m1.n() != m2.n() {
        return Err(Error::DimensionMismatch {
            expected: m1.k(),
            got: m2.k(),
        });
    }
    check_dims(f, m1.n())?;
    if steps < 2 {
        return Err(Error::InvalidArgument("a path needs at least 2 steps".into()));
    }
    for (name, m) in [("start", m1), ("end", m2)] {
        if !mixture_is_possible(f, m, limits)? {
            return Err(Error::NotPossible(format!(
                "{name} mixture has a positive-weight component outside the possible set"
            )));
        }
    }
    if m1 == m2 {
        return Ok(vec![m1.clone(); steps]);
    }
    let k = m1.k();
    let legs = if k == 1 {
        // Only a straight segment inside one cube is available.
        let d1 = m1.components[0].deterministic_assignment(EPS_DET);
        let d2 = m2.components[0].deterministic_assignment(EPS_DET);
        let common = PartialAssignment::new(
            d1.bits() & d2.bits() & d1.mask() & d2.mask(),
            d1.mask() & d2.mask() & !(d1.bits() ^ d2.bits()),
        )?;
        if !is_implicant(f, common, limits)? {
            return Err(Error::NotPossible(
                "a single-component path between these endpoints leaves the possible set".into(),
            ));
        }
        vec![Leg {
            from: m1.clone(),
            to: m2.clone(),
        }]
    } else {
        two_plus_component_legs(m1, m2)
    };
    let total = legs.len() as f64;
    let mut out = Vec::with_capacity(steps);
    for s in 0..steps {
        let t = s as f64 / (steps - 1) as f64 * total;
        let leg = (t.floor() as usize).min(legs.len() - 1);
        out.push(lerp_mixture(&legs[leg].from, &legs[leg].to, t - leg as f64));
    }
    Ok(out)
}

fn two_plus_component_legs(m1: &MixtureParams, m2: &MixtureParams) -> Vec<Leg> {
    let k = m1.k();
    let a = m1.alpha.iter().position(|&x| x > 0.0).expect("weights sum to 1");
    let b = m2.alpha.iter().position(|&x| x > 0.0).expect("weights sum to 1");
    let mut waypoints = vec![m1.clone()];
    let reweight = |w: &mut Vec<MixtureParams>, at: usize| {
        let mut next = w.last().expect("nonempty").clone();
        next.alpha = unit_weights(k, at);
        w.push(next);
    };
    let relocate = |w: &mut Vec<MixtureParams>, moves: &[(usize, &IndependentParams)]| {
        let mut next = w.last().expect("nonempty").clone();
        for (i, target) in moves {
            next.components[*i] = (*target).clone();
        }
        w.push(next);
    };

    // Collapse all weight onto component `a`.
    reweight(&mut waypoints, a);
    if a != b {
        // Move every idle component to its target, hand weight to `b`,
        // then move `a` to its own target.
        let idle: Vec<(usize, &IndependentParams)> =
            (0..k).filter(|&i| i != a).map(|i| (i, &m2.components[i])).collect();
        relocate(&mut waypoints, &idle);
        reweight(&mut waypoints, b);
        relocate(&mut waypoints, &[(a, &m2.components[a])]);
    } else {
        // Park a helper component on top of `a`, swap weight onto it, move
        // `a`, swap back, then release the helper.
        let c = if a == 0 { 1 } else { 0 };
        let mut moves: Vec<(usize, &IndependentParams)> = (0..k)
            .filter(|&i| i != a && i != c)
            .map(|i| (i, &m2.components[i]))
            .collect();
        moves.push((c, &m1.components[a]));
        relocate(&mut waypoints, &moves);
        reweight(&mut waypoints, c);
        relocate(&mut waypoints, &[(a, &m2.components[a])]);
        reweight(&mut waypoints, a);
        relocate(&mut waypoints, &[(c, &m2.components[c])]);
    }
    waypoints.push(m2.clone());
    waypoints
        .windows(2)
        .map(|w| Leg {
            from: w[0].clone(),
            to: w[1].clone(),
        })
        .collect()
}
