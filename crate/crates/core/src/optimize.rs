//! Gradient descent on parameterized distributions and classification of
//! where the runs end up relative to the cubical set.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::cubical::{cubical_set, CubicalSet};
use crate::distributions::{product_probs, DenseDistribution, IndependentParams};
use crate::error::{Error, Result};
use crate::formula::{Formula, Limits, PartialAssignment, World};
use crate::losses::{dense_loss, fuzzy_loss_and_grad, LossSpec};

/// Distance below which an endpoint counts as possible.
pub const POSSIBLE_TOL: f64 = 1e-3;
/// Half-L1 distance on the simplex below which an endpoint is "near" a vertex.
pub const NEAR_VERTEX: f64 = 0.15;
/// Maximum number of step halvings before a step is given up.
pub const MAX_HALVINGS: usize = 20;
/// Allowed loss increase for an accepted step.
pub const LOSS_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    IndependentSigmoid,
    ExpressiveSoftmax,
    Mixture { k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub n: usize,
}

impl ModelSpec {
    pub fn independent(n: usize) -> Self {
        ModelSpec {
            kind: ModelKind::IndependentSigmoid,
            n,
        }
    }

    pub fn expressive(n: usize) -> Self {
        ModelSpec {
            kind: ModelKind::ExpressiveSoftmax,
            n,
        }
    }

    pub fn mixture(k: usize, n: usize) -> Self {
        ModelSpec {
            kind: ModelKind::Mixture { k },
            n,
        }
    }

    pub fn param_count(&self) -> usize {
        match self.kind {
            ModelKind::IndependentSigmoid => self.n,
            ModelKind::ExpressiveSoftmax => 1 << self.n,
            ModelKind::Mixture { k } => k + k * self.n,
        }
    }

    fn validate(&self, limits: &Limits) -> Result<()> {
        limits.check("model", self.n)?;
        if let ModelKind::Mixture { k } = self.kind {
            if k == 0 {
                return Err(Error::InvalidArgument("mixture needs at least one component".into()));
            }
        }
        Ok(())
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ModelKind::IndependentSigmoid => f.write_str("independent"),
            ModelKind::ExpressiveSoftmax => f.write_str("expressive"),
            ModelKind::Mixture { k } => write!(f, "mixture{k}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitSpec {
    /// Impossible world receiving the initial mass; `None` picks the all-true
    /// world when it is impossible, otherwise the first impossible world.
    pub impossible_world: Option<World>,
    pub impossible_mass: f64,
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec {
            impossible_world: None,
            impossible_mass: 0.7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub loss: LossSpec,
    pub lr: f64,
    pub iters: usize,
    pub num_runs: usize,
    pub seed: u64,
    pub init: InitSpec,
    pub capture_trajectory: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            loss: LossSpec::Semantic,
            lr: 0.1,
            iters: 10_000,
            num_runs: 256,
            seed: 0,
            init: InitSpec::default(),
            capture_trajectory: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.loss.validate()?;
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::InvalidArgument(format!("learning rate {} must be positive", self.lr)));
        }
        if self.num_runs == 0 {
            return Err(Error::InvalidArgument("number of runs must be at least 1".into()));
        }
        Ok(())
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|x| (x - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Gradient in `mu` of `sum_w g[w] * p_mu(w)` for a product distribution.
fn product_pullback(mu: &[f64], g: &[f64]) -> Vec<f64> {
    let n = mu.len();
    (0..n)
        .map(|i| {
            let mut acc = 0.0;
            for (w, &gw) in g.iter().enumerate() {
                if gw == 0.0 {
                    continue;
                }
                let mut rest = 1.0;
                for (j, &m) in mu.iter().enumerate() {
                    if j != i {
                        rest *= if w >> j & 1 == 1 { m } else { 1.0 - m };
                    }
                }
                acc += if w >> i & 1 == 1 { gw * rest } else { -gw * rest };
            }
            acc
        })
        .collect()
}

/// A loss composed with a model parameterization.
#[derive(Debug, Clone)]
pub struct Objective {
    formula: Formula,
    phi: Vec<bool>,
    model: ModelSpec,
    loss: LossSpec,
}

impl Objective {
    pub fn new(f: &Formula, model: ModelSpec, loss: LossSpec, limits: &Limits) -> Result<Self> {
        model.validate(limits)?;
        loss.validate()?;
        if model.n != f.n() {
            return Err(Error::DimensionMismatch {
                expected: f.n(),
                got: model.n,
            });
        }
        if !loss.is_dense() && model.kind != ModelKind::IndependentSigmoid {
            return Err(Error::InvalidArgument(format!(
                "fuzzy losses need the independent model, not {model}"
            )));
        }
        Ok(Objective {
            formula: f.clone(),
            phi: f.truth_table(limits)?,
            model,
            loss,
        })
    }

    pub fn model(&self) -> ModelSpec {
        self.model
    }

    /// World probabilities of `params`.
    pub fn probs(&self, params: &[f64]) -> Vec<f64> {
        let n = self.model.n;
        match self.model.kind {
            ModelKind::IndependentSigmoid => product_probs(&params.iter().map(|&t| sigmoid(t)).collect::<Vec<_>>()),
            ModelKind::ExpressiveSoftmax => softmax(params),
            ModelKind::Mixture { k } => {
                let alpha = softmax(&params[..k]);
                let mut out = vec![0.0; 1 << n];
                for (c, a) in alpha.iter().enumerate() {
                    let mu: Vec<f64> = params[k + c * n..k + (c + 1) * n].iter().map(|&t| sigmoid(t)).collect();
                    for (o, p) in out.iter_mut().zip(product_probs(&mu)) {
                        *o += a * p;
                    }
                }
                out
            }
        }
    }

    /// Marginals of the independent model; `None` for other models.
    pub fn mu(&self, params: &[f64]) -> Option<Vec<f64>> {
        (self.model.kind == ModelKind::IndependentSigmoid).then(|| params.iter().map(|&t| sigmoid(t)).collect())
    }

    /// Loss and its gradient in the raw parameters.
    pub fn eval(&self, params: &[f64]) -> (f64, Vec<f64>) {
        let n = self.model.n;
        if let LossSpec::Fuzzy { logic, form } = self.loss {
            let mu: Vec<f64> = params.iter().map(|&t| sigmoid(t)).collect();
            let (loss, g) = fuzzy_loss_and_grad(&self.formula, &mu, logic, form).expect("dimensions checked");
            let grad = g.iter().zip(&mu).map(|(g, m)| g * m * (1.0 - m)).collect();
            return (loss, grad);
        }
        let probs = self.probs(params);
        let (loss, g) = dense_loss(&self.phi, &probs, &self.loss);
        if !loss.is_finite() {
            return (loss, vec![0.0; params.len()]);
        }
        let grad = match self.model.kind {
            ModelKind::IndependentSigmoid => {
                let mu: Vec<f64> = params.iter().map(|&t| sigmoid(t)).collect();
                product_pullback(&mu, &g)
                    .into_iter()
                    .zip(&mu)
                    .map(|(d, m)| d * m * (1.0 - m))
                    .collect()
            }
            ModelKind::ExpressiveSoftmax => {
                let mean: f64 = probs.iter().zip(&g).map(|(p, g)| p * g).sum();
                probs.iter().zip(&g).map(|(p, g)| p * (g - mean)).collect()
            }
            ModelKind::Mixture { k } => {
                let alpha = softmax(&params[..k]);
                let mut grad = vec![0.0; params.len()];
                let mut da = vec![0.0; k];
                for c in 0..k {
                    let mu: Vec<f64> = params[k + c * n..k + (c + 1) * n].iter().map(|&t| sigmoid(t)).collect();
                    da[c] = product_probs(&mu).iter().zip(&g).map(|(p, g)| p * g).sum();
                    for (i, d) in product_pullback(&mu, &g).into_iter().enumerate() {
                        grad[k + c * n + i] = alpha[c] * d * mu[i] * (1.0 - mu[i]);
                    }
                }
                let mean: f64 = alpha.iter().zip(&da).map(|(a, d)| a * d).sum();
                for c in 0..k {
                    grad[c] = alpha[c] * (da[c] - mean);
                }
                grad
            }
        };
        (loss, grad)
    }
}

/// Picks the impossible world that receives the initial mass.
pub fn default_impossible_world(f: &Formula, limits: &Limits) -> Result<World> {
    let phi = f.truth_table(limits)?;
    let all = phi.len() - 1;
    if !phi[all] {
        return Ok(World(all as u64));
    }
    phi.iter()
        .position(|&ok| !ok)
        .map(|w| World(w as u64))
        .ok_or_else(|| Error::InfeasibleInit("the constraint has no impossible world".into()))
}

/// Marginals whose product distribution puts exactly `mass` on `target`.
/// The factors are drawn one at a time: `f_i ~ U(remaining, 1)`, the last
/// one absorbs what is left.
fn independent_init<R: Rng>(n: usize, target: World, mass: f64, rng: &mut R) -> Result<Vec<f64>> {
    for _ in 0..1000 {
        let mut remaining = mass;
        let mut mu = Vec::with_capacity(n);
        for i in 0..n {
            let factor = if i + 1 == n {
                remaining
            } else {
                let x = rng.random_range(remaining..1.0);
                remaining /= x;
                x
            };
            mu.push(if target.get(i) { factor } else { 1.0 - factor });
        }
        if mu.iter().all(|&m| m > 0.0 && m < 1.0) {
            return Ok(mu);
        }
    }
    Err(Error::InfeasibleInit(format!("could not place mass {mass} on one world")))
}

/// Initial raw parameters for one run.
pub fn initialize<R: Rng>(model: ModelSpec, init: &InitSpec, target: World, rng: &mut R) -> Result<Vec<f64>> {
    let m = init.impossible_mass;
    if !(m > 0.0 && m < 1.0) {
        return Err(Error::InfeasibleInit(format!("impossible mass {m} must lie in (0, 1)")));
    }
    if target.0 >> model.n != 0 {
        return Err(Error::DimensionMismatch {
            expected: model.n,
            got: 64 - target.0.leading_zeros() as usize,
        });
    }
    match model.kind {
        ModelKind::IndependentSigmoid => {
            Ok(independent_init(model.n, target, m, rng)?.into_iter().map(logit).collect())
        }
        ModelKind::ExpressiveSoftmax => {
            let size = 1usize << model.n;
            // Dirichlet(1, ..., 1) as normalized unit exponentials.
            let draws: Vec<f64> = (0..size - 1).map(|_| rng.sample::<f64, _>(Exp1)).collect();
            let total: f64 = draws.iter().sum();
            let mut rest = draws.into_iter().map(|x| (1.0 - m) * x / total);
            Ok((0..size)
                .map(|w| if w as u64 == target.0 { m.ln() } else { rest.next().unwrap().ln() })
                .collect())
        }
        ModelKind::Mixture { k } => {
            let mut params = vec![0.0; k];
            for _ in 0..k {
                params.extend(independent_init(model.n, target, m, rng)?.into_iter().map(logit));
            }
            Ok(params)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub loss: f64,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub run_id: usize,
    pub model: ModelSpec,
    pub initial_params: Vec<f64>,
    pub final_params: Vec<f64>,
    pub initial_dense: DenseDistribution,
    pub final_dense: DenseDistribution,
    pub final_loss: f64,
    /// Independent models only.
    pub distance_to_cphi: Option<f64>,
    pub nearest_facet: Option<usize>,
    pub trajectory: Vec<Snapshot>,
    /// Steps actually taken.
    pub steps: usize,
    /// Total number of step halvings applied by the guard.
    pub halvings: usize,
    /// Step at which no halving produced a non-increasing loss.
    pub stalled_at: Option<usize>,
}

impl RunResult {
    pub fn final_mu(&self) -> Option<Vec<f64>> {
        (self.model.kind == ModelKind::IndependentSigmoid)
            .then(|| self.final_params.iter().map(|&t| sigmoid(t)).collect())
    }
}

/// Fixed-step gradient descent. A step whose loss is not finite or rises by
/// more than [`LOSS_SLACK`] is halved, up to [`MAX_HALVINGS`] times.
pub fn gd_minimize(
    objective: &Objective,
    params0: Vec<f64>,
    cfg: &RunConfig,
    cs: Option<&CubicalSet>,
    run_id: usize,
) -> Result<RunResult> {
    if params0.len() != objective.model.param_count() {
        return Err(Error::DimensionMismatch {
            expected: objective.model.param_count(),
            got: params0.len(),
        });
    }
    let (mut loss, mut grad) = objective.eval(&params0);
    if !loss.is_finite() {
        return Err(Error::InfeasibleInit("loss is infinite at the initial parameters".into()));
    }
    let every = (cfg.iters / 100).max(1);
    let mut params = params0.clone();
    let mut trajectory = Vec::new();
    let mut halvings = 0;
    let mut stalled_at = None;
    let mut steps = 0;
    if cfg.capture_trajectory {
        trajectory.push(Snapshot {
            step: 0,
            loss,
            probs: objective.probs(&params),
        });
    }
    'steps: for step in 1..=cfg.iters {
        let mut lr = cfg.lr;
        let mut saw_finite = false;
        for attempt in 0..=MAX_HALVINGS {
            let candidate: Vec<f64> = params.iter().zip(&grad).map(|(p, g)| p - lr * g).collect();
            let (l, g) = objective.eval(&candidate);
            if l.is_finite() {
                saw_finite = true;
                if l <= loss + LOSS_SLACK {
                    halvings += attempt;
                    params = candidate;
                    loss = l;
                    grad = g;
                    steps = step;
                    if cfg.capture_trajectory && (step % every == 0 || step == cfg.iters) {
                        trajectory.push(Snapshot {
                            step,
                            loss,
                            probs: objective.probs(&params),
                        });
                    }
                    continue 'steps;
                }
            }
            lr /= 2.0;
        }
        halvings += MAX_HALVINGS;
        if !saw_finite {
            return Err(Error::DivergedToInfiniteLoss { step });
        }
        stalled_at = Some(step);
        break;
    }
    let final_dense = DenseDistribution::from_raw(objective.probs(&params), objective.model.n);
    let (distance_to_cphi, nearest_facet) = match (cs, objective.mu(&params)) {
        (Some(cs), Some(mu)) => {
            let (i, d) = cs.nearest_facet(&mu);
            (Some(d), Some(i))
        }
        _ => (None, None),
    };
    Ok(RunResult {
        run_id,
        model: objective.model,
        initial_dense: DenseDistribution::from_raw(objective.probs(&params0), objective.model.n),
        initial_params: params0,
        final_params: params,
        final_dense,
        final_loss: loss,
        distance_to_cphi,
        nearest_facet,
        trajectory,
        steps,
        halvings,
        stalled_at,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum MinimumClass {
    Independent {
        facet: usize,
        facet_pattern: String,
        distance: f64,
        deterministic: PartialAssignment,
    },
    Dense {
        impossible_mass: f64,
        vertex: World,
        vertex_distance: f64,
        near_vertex: bool,
    },
}

/// Where a run ended relative to the possible set.
pub fn classify_minimum(f: &Formula, cs: &CubicalSet, r: &RunResult, limits: &Limits) -> Result<MinimumClass> {
    if let Some(mu) = r.final_mu() {
        let (facet, distance) = cs.nearest_facet(&mu);
        return Ok(MinimumClass::Independent {
            facet,
            facet_pattern: cs.facets()[facet].to_string(),
            distance,
            deterministic: IndependentParams::new(mu)?.deterministic_assignment(POSSIBLE_TOL),
        });
    }
    let phi = f.truth_table(limits)?;
    let probs = r.final_dense.probs();
    let impossible_mass = probs.iter().zip(&phi).filter(|(_, &ok)| !ok).map(|(p, _)| p).sum();
    // Half-L1 distance to vertex w is 1 - p(w).
    let (vertex, best) = phi
        .iter()
        .enumerate()
        .filter(|(_, &ok)| ok)
        .map(|(w, _)| (w, probs[w]))
        .fold((0, f64::NEG_INFINITY), |acc, (w, p)| if p > acc.1 { (w, p) } else { acc });
    let vertex_distance = 1.0 - best;
    Ok(MinimumClass::Dense {
        impossible_mass,
        vertex: World(vertex as u64),
        vertex_distance,
        near_vertex: vertex_distance < NEAR_VERTEX,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSummary {
    pub model: ModelSpec,
    pub runs: usize,
    pub failures: Vec<(usize, String)>,
    /// Fraction of completed runs within [`POSSIBLE_TOL`] of the possible set
    /// (independent: L2 distance to the cubical set; otherwise impossible mass).
    pub fraction_possible: f64,
    pub near_vertex_fraction: f64,
    pub mean_impossible_mass: f64,
    pub facet_counts: BTreeMap<String, usize>,
    pub total_halvings: usize,
    pub stalled_runs: usize,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub loss: LossSpec,
    pub seed: u64,
    pub summaries: Vec<ModelSummary>,
    pub results: Vec<RunResult>,
}

fn run_rng(seed: u64, run_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run_index as u64);
    rng
}

/// Runs `cfg.num_runs` descents per model in parallel. Each run draws from
/// its own stream of the master seed, so results do not depend on scheduling.
pub fn experiment(f: &Formula, models: &[ModelSpec], cfg: &RunConfig, limits: &Limits) -> Result<ExperimentReport> {
    cfg.validate()?;
    let cs = cubical_set(f, limits)?;
    let target = match cfg.init.impossible_world {
        Some(w) => w,
        None => default_impossible_world(f, limits)?,
    };
    let phi = f.truth_table(limits)?;
    let mut summaries = Vec::new();
    let mut results = Vec::new();
    for (mi, &model) in models.iter().enumerate() {
        let objective = Objective::new(f, model, cfg.loss, limits)?;
        let base = mi * cfg.num_runs;
        let outcomes: Vec<Result<RunResult>> = (0..cfg.num_runs)
            .into_par_iter()
            .map(|i| {
                let run_id = base + i;
                let mut rng = run_rng(cfg.seed, run_id);
                let params = initialize(model, &cfg.init, target, &mut rng)?;
                gd_minimize(&objective, params, cfg, Some(&cs), run_id)
            })
            .collect();
        let mut failures = Vec::new();
        let mut done = Vec::new();
        for (i, o) in outcomes.into_iter().enumerate() {
            match o {
                Ok(r) => done.push(r),
                Err(e) => failures.push((base + i, e.to_string())),
            }
        }
        let mut facet_counts = BTreeMap::new();
        let (mut possible, mut near, mut mass) = (0usize, 0usize, 0.0);
        for r in &done {
            match classify_minimum(f, &cs, r, limits)? {
                MinimumClass::Independent {
                    facet_pattern, distance, ..
                } => {
                    if distance < POSSIBLE_TOL {
                        possible += 1;
                    }
                    *facet_counts.entry(facet_pattern).or_insert(0) += 1;
                }
                MinimumClass::Dense {
                    impossible_mass,
                    near_vertex,
                    ..
                } => {
                    if impossible_mass < POSSIBLE_TOL {
                        possible += 1;
                    }
                    if near_vertex {
                        near += 1;
                    }
                }
            }
            mass += r.final_dense.probs().iter().zip(&phi).filter(|(_, &ok)| !ok).map(|(p, _)| p).sum::<f64>();
        }
        let count = done.len().max(1) as f64;
        summaries.push(ModelSummary {
            model,
            runs: cfg.num_runs,
            failures,
            fraction_possible: possible as f64 / count,
            near_vertex_fraction: near as f64 / count,
            mean_impossible_mass: mass / count,
            facet_counts,
            total_halvings: done.iter().map(|r| r.halvings).sum(),
            stalled_runs: done.iter().filter(|r| r.stalled_at.is_some()).count(),
        });
        results.extend(done);
    }
    Ok(ExperimentReport {
        loss: cfg.loss,
        seed: cfg.seed,
        summaries,
        results,
    })
}

fn prob_header(n: usize) -> String {
    (0..1u64 << n).map(|w| format!("p_{}", World(w).pattern(n))).collect::<Vec<_>>().join(",")
}

fn prob_cells(probs: &[f64]) -> String {
    probs.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

/// One row per completed run.
pub fn endpoints_csv(report: &ExperimentReport, cs: &CubicalSet, n: usize) -> String {
    let mut out = format!(
        "run_id,model,loss_kind,alpha,seed,final_loss,dist_Cphi,nearest_facet,{}\n",
        prob_header(n)
    );
    for r in &report.results {
        let dist = r.distance_to_cphi.map(|d| d.to_string()).unwrap_or_default();
        let facet = r.nearest_facet.map(|i| cs.facets()[i].to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.run_id,
            r.model,
            report.loss.kind_name(),
            report.loss.alpha(),
            report.seed,
            r.final_loss,
            dist,
            facet,
            prob_cells(r.final_dense.probs())
        ));
    }
    out
}

/// Initial distributions, in the same row order as [`endpoints_csv`].
pub fn initial_csv(report: &ExperimentReport, n: usize) -> String {
    let mut out = format!("run_id,model,{}\n", prob_header(n));
    for r in &report.results {
        out.push_str(&format!("{},{},{}\n", r.run_id, r.model, prob_cells(r.initial_dense.probs())));
    }
    out
}

pub fn trajectories_csv(report: &ExperimentReport, n: usize) -> String {
    let mut out = format!("run_id,step,loss,{}\n", prob_header(n));
    for r in &report.results {
        for s in &r.trajectory {
            out.push_str(&format!("{},{},{},{}\n", r.run_id, s.step, s.loss, prob_cells(&s.probs)));
        }
    }
    out
}
