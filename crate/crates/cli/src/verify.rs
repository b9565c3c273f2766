//! Randomized cross-checks of the structural results against brute force.

use std::fmt;
use std::time::{Duration, Instant};

use losscape::distributions::mixture_is_possible;
use losscape::{
    condition, connected_components, cubical_set, homology, implicant_graph, is_convex, is_possible, mixture_bounds,
    mixture_path, prime_implicants, random_formula, representable_conditional, semantic_grad_mu, semantic_loss,
    DenseDistribution, Formula, IndependentParams, Limits, LossSpec, MixtureParams, ModelSpec, Objective, World,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Possibility,
    Conditional,
    Union,
    Convexity,
    Connectivity,
    Boundary,
    Gradients,
    Jensen,
    Marginals,
    MixtureBounds,
    MixturePath,
}

/// The suites run by `verify`.
pub const CORE_SUITES: [Suite; 7] = [
    Suite::Possibility,
    Suite::Conditional,
    Suite::Union,
    Suite::Convexity,
    Suite::Connectivity,
    Suite::Boundary,
    Suite::Gradients,
];

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Possibility => "possibility",
            Suite::Conditional => "conditional",
            Suite::Union => "union-of-cubes",
            Suite::Convexity => "convexity",
            Suite::Connectivity => "connectivity",
            Suite::Boundary => "boundary",
            Suite::Gradients => "gradients",
            Suite::Jensen => "jensen",
            Suite::Marginals => "marginals",
            Suite::MixtureBounds => "mixture-bounds",
            Suite::MixturePath => "mixture-path",
        }
    }

    fn salt(self) -> u64 {
        self as u64 + 1
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub max_n: usize,
    pub cases: usize,
    pub seed: u64,
    /// Corrupts the possibility check so the harness must report failures.
    pub inject_bug: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            max_n: 6,
            cases: 200,
            seed: 0,
            inject_bug: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub suite: Suite,
    pub cases: usize,
    pub failures: Vec<String>,
    pub elapsed: Duration,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<15} {:>5} cases  {:>3} failures  {:>8.1} ms",
            self.suite.name(),
            self.cases,
            self.failures.len(),
            self.elapsed.as_secs_f64() * 1e3
        )
    }
}

struct Ctx<'a> {
    rng: ChaCha8Rng,
    opts: &'a VerifyOptions,
    limits: Limits,
    failures: Vec<String>,
}

impl Ctx<'_> {
    fn formula(&mut self) -> Formula {
        let n = self.rng.random_range(1..=self.opts.max_n);
        random_formula(&mut self.rng, n)
    }

    /// Marginals mixing exact 0/1 coordinates with interior values.
    fn mixed_mu(&mut self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|_| match self.rng.random_range(0..3) {
                0 => 0.0,
                1 => 1.0,
                _ => self.rng.random_range(0.05..0.95),
            })
            .collect()
    }

    fn fail(&mut self, f: &Formula, detail: impl fmt::Display) {
        if self.failures.len() < 20 {
            self.failures.push(format!("`{f}`: {detail}"));
        } else if self.failures.len() == 20 {
            self.failures.push("further failures suppressed".into());
        }
    }
}

fn brute_implicant(f: &Formula, bits: u64, mask: u64) -> bool {
    (0..1u64 << f.n()).filter(|w| w & mask == bits).all(|w| f.eval_world(World(w)))
}

/// All implicants as `(bits, mask)` by enumerating `3^n` partial assignments.
fn brute_implicants(f: &Formula) -> Vec<(u64, u64)> {
    let n = f.n();
    let mut out = Vec::new();
    for code in 0..3u64.pow(n as u32) {
        let (mut c, mut bits, mut mask) = (code, 0u64, 0u64);
        for i in 0..n {
            match c % 3 {
                0 => {}
                1 => mask |= 1 << i,
                _ => {
                    mask |= 1 << i;
                    bits |= 1 << i;
                }
            }
            c /= 3;
        }
        if brute_implicant(f, bits, mask) {
            out.push((bits, mask));
        }
    }
    out
}

fn pattern(bits: u64, mask: u64, n: usize) -> String {
    (0..n)
        .map(|i| match (mask >> i & 1, bits >> i & 1) {
            (0, _) => '*',
            (_, 1) => '1',
            _ => '0',
        })
        .collect()
}

fn product(mu: &[f64]) -> Vec<f64> {
    (0..1u64 << mu.len())
        .map(|w| {
            mu.iter()
                .enumerate()
                .map(|(i, &m)| if w >> i & 1 == 1 { m } else { 1.0 - m })
                .product()
        })
        .collect()
}

fn possibility(cx: &mut Ctx) -> losscape::Result<()> {
    let f = cx.formula();
    let mu = cx.mixed_mu(f.n());
    let p = IndependentParams::new(mu.clone())?;
    let mut claimed = is_possible(&f, &p, &cx.limits)?;
    if cx.opts.inject_bug {
        claimed = !claimed;
    }
    let mass: f64 = product(&mu)
        .iter()
        .enumerate()
        .filter(|(w, _)| f.eval_world(World(*w as u64)))
        .map(|(_, q)| q)
        .sum();
    let by_mass = (mass - 1.0).abs() < 1e-12;
    let by_cube = cubical_set(&f, &cx.limits)?.contains(&mu, 1e-12);
    if claimed != by_mass || claimed != by_cube {
        cx.fail(&f, format!("mu {mu:?}: is_possible {claimed}, wmc {mass}, in cubes {by_cube}"));
    }
    Ok(())
}

fn conditional(cx: &mut Ctx) -> losscape::Result<()> {
    let f = cx.formula();
    let n = f.n();
    let mu = cx.mixed_mu(n);
    let p = IndependentParams::new(mu.clone())?;
    let dense = p.densify(&cx.limits)?;
    if losscape::wmc(&f, &dense)? <= 0.0 {
        return Ok(());
    }
    let cond = condition(&f, &dense)?;
    let independent = product(&cond.marginals())
        .iter()
        .zip(cond.probs())
        .all(|(a, b)| (a - b).abs() < 1e-9);
    let (mut e_bits, mut e_mask) = (0u64, 0u64);
    for (i, &m) in mu.iter().enumerate() {
        if m == 0.0 || m == 1.0 {
            e_mask |= 1 << i;
            if m == 1.0 {
                e_bits |= 1 << i;
            }
        }
    }
    let support: Vec<u64> = (0..1u64 << n)
        .filter(|&w| w & e_mask == e_bits && f.eval_world(World(w)))
        .collect();
    let entailed = brute_implicants(&f)
        .into_iter()
        .any(|(b, m)| support.iter().all(|w| w & m == b));
    let got = representable_conditional(&f, &p, &cx.limits)?.is_some();
    if got != independent || got != entailed {
        cx.fail(
            &f,
            format!("mu {mu:?}: representable {got}, product of marginals {independent}, entailment {entailed}"),
        );
    }
    Ok(())
}

fn union(cx: &mut Ctx) -> losscape::Result<()> {
    let f = cx.formula();
    let n = f.n();
    let implicants = brute_implicants(&f);
    let mut primes: Vec<String> = implicants
        .iter()
        .filter(|&&(b, m)| {
            (0..n)
                .filter(|i| m >> i & 1 == 1)
                .all(|i| !brute_implicant(&f, b & !(1 << i), m & !(1 << i)))
        })
        .map(|&(b, m)| pattern(b, m, n))
        .collect();
    primes.sort();
    let cs = cubical_set(&f, &cx.limits)?;
    let mut facets: Vec<String> = cs.facets().iter().map(ToString::to_string).collect();
    facets.sort();
    if facets != primes {
        cx.fail(&f, format!("facets {facets:?} but prime implicants {primes:?}"));
    }
    Ok(())
}

fn convexity(cx: &mut Ctx) -> losscape::Result<()> {
    let f = cx.formula();
    let n = f.n();
    let cs = cubical_set(&f, &cx.limits)?;
    let convex = is_convex(&f, &cx.limits)?;
    let single = prime_implicants(&f, &cx.limits)?.len() == 1;
    if convex != single {
        cx.fail(&f, format!("is_convex {convex} with single prime implicant {single}"));
    }
    match cs.nonconvexity_witness() {
        Some((x, y, t)) => {
            let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| t * a + (1.0 - t) * b).collect();
            let valid = cs.contains(&x, 1e-12) && cs.contains(&y, 1e-12) && !cs.contains(&z, 1e-9);
            if convex || !valid {
                cx.fail(&f, format!("witness {x:?}, {y:?}, {t} (valid {valid}, convex {convex})"));
            }
        }
        None if !convex => cx.fail(&f, "non-convex set without a witness"),
        None => {
            for _ in 0..20 {
                let facets = cs.facets();
                let point = |cx: &mut Ctx| -> Vec<f64> {
                    let c = facets[cx.rng.random_range(0..facets.len())].fixed();
                    (0..n)
                        .map(|i| c.value(i).map_or_else(|| cx.rng.random::<f64>(), |v| f64::from(u8::from(v))))
                        .collect()
                };
                let (x, y) = (point(cx), point(cx));
                let t: f64 = cx.rng.random();
                let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| t * a + (1.0 - t) * b).collect();
                if !cs.contains(&z, 1e-12) {
                    cx.fail(&f, format!("convex set but {z:?} escapes"));
                }
            }
        }
    }
    Ok(())
}

fn connectivity(cx: &mut Ctx) -> losscape::Result<()> {
    let f = cx.formula();
    let pis = prime_implicants(&f, &cx.limits)?;
    let graph = connected_components(&implicant_graph(&f, &pis, &cx.limits)?);
    let cs = cubical_set(&f, &cx.limits)?;
    let skeleton = cs.skeleton_components(&cx.limits)?;
    let b0 = homology(&cs, &cx.limits)?.betti[0];
    if graph != skeleton || b0 != graph.len() {
        cx.fail(
            &f,
            format!("graph components {}, skeleton components {}, betti_0 {b0}", graph.len(), skeleton.len()),
        );
    }
    Ok(())
}

fn boundary(cx: &mut Ctx) -> losscape::Result<()> {
    let f = cx.formula();
    let cs = cubical_set(&f, &cx.limits)?;
    let complex = losscape::chain_complex(&cs, &cx.limits)?;
    if !complex.boundary_squared_is_zero() {
        cx.fail(&f, "boundary of a boundary is nonzero");
    }
    for k in 1..=complex.top_dim() {
        if let Some(c) = complex.cubes(k).iter().find(|c| c.boundary().len() != 2 * k) {
            cx.fail(&f, format!("cube {c} has {} boundary faces", c.boundary().len()));
        }
    }
    // Homology verifies every Smith form it computes.
    if let Err(e) = homology(&cs, &cx.limits) {
        cx.fail(&f, e);
    }
    Ok(())
}

fn relative_error(fd: f64, g: f64) -> f64 {
    (fd - g).abs() / fd.abs().max(g.abs()).max(1e-4)
}

fn gradients(cx: &mut Ctx) -> losscape::Result<()> {
    let f = cx.formula();
    let n = f.n();
    let h = 1e-6;
    let mu: Vec<f64> = (0..n).map(|_| cx.rng.random_range(0.02..0.98)).collect();
    let p = IndependentParams::new(mu.clone())?;
    if losscape::wmc(&f, &p.densify(&cx.limits)?)? > 1e-3 {
        let g = semantic_grad_mu(&f, &p, &cx.limits)?;
        let limits = cx.limits;
        let loss = |m: &[f64]| -> losscape::Result<f64> {
            semantic_loss(&f, &IndependentParams::new(m.to_vec())?.densify(&limits)?)
        };
        for i in 0..n {
            let (mut hi, mut lo) = (mu.clone(), mu.clone());
            hi[i] += h;
            lo[i] -= h;
            let fd = (loss(&hi)? - loss(&lo)?) / (2.0 * h);
            if relative_error(fd, g[i]) >= 1e-5 {
                cx.fail(&f, format!("independent mu {mu:?} coord {i}: analytic {} vs {fd}", g[i]));
            }
        }
    }
    if n <= 4 {
        let obj = Objective::new(&f, ModelSpec::expressive(n), LossSpec::Semantic, &cx.limits)?;
        let logits: Vec<f64> = (0..1 << n).map(|_| cx.rng.random_range(-2.0..2.0)).collect();
        let (_, g) = obj.eval(&logits);
        for i in 0..logits.len() {
            let (mut hi, mut lo) = (logits.clone(), logits.clone());
            hi[i] += h;
            lo[i] -= h;
            let fd = (obj.eval(&hi).0 - obj.eval(&lo).0) / (2.0 * h);
            if relative_error(fd, g[i]) >= 1e-5 {
                cx.fail(&f, format!("softmax logit {i}: analytic {} vs {fd}", g[i]));
            }
        }
    }
    Ok(())
}

fn random_dense(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..1 << n).map(|_| rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Five triples per case.
fn jensen(cx: &mut Ctx) -> losscape::Result<()> {
    let f = cx.formula();
    let n = f.n();
    for _ in 0..5 {
        let (p1, p2) = (random_dense(&mut cx.rng, n), random_dense(&mut cx.rng, n));
        let t: f64 = cx.rng.random();
        let mix: Vec<f64> = p1.iter().zip(&p2).map(|(a, b)| t * a + (1.0 - t) * b).collect();
        let loss = |p: Vec<f64>| -> losscape::Result<f64> { semantic_loss(&f, &DenseDistribution::new(p)?) };
        let (l1, l2, lm) = (loss(p1)?, loss(p2)?, loss(mix)?);
        let bound = t * l1 + (1.0 - t) * l2;
        if bound.is_finite() && lm > bound + 1e-12 {
            cx.fail(&f, format!("loss at mixture {lm} exceeds {bound}"));
        }
    }
    Ok(())
}

fn marginals(cx: &mut Ctx) -> losscape::Result<()> {
    let n = cx.rng.random_range(1..=10);
    let mu = cx.mixed_mu(n);
    let back = IndependentParams::new(mu.clone())?.densify(&cx.limits)?.marginals();
    if let Some(i) = (0..n).find(|&i| (back[i] - mu[i]).abs() > 1e-12) {
        let f = Formula::parse("x")?;
        cx.fail(&f, format!("marginal {i} of {mu:?} came back as {}", back[i]));
    }
    Ok(())
}

/// The ordering `simplex_lower <= min_components <= upper` as stated for
/// the mixture bounds.
fn bounds(cx: &mut Ctx) -> losscape::Result<()> {
    let f = cx.formula();
    let b = mixture_bounds(&f, &cx.limits)?;
    if !(b.simplex_lower <= b.min_components && b.min_components <= b.upper) {
        cx.fail(
            &f,
            format!(
                "simplex_lower {}, min_components {}, upper {}",
                b.simplex_lower, b.min_components, b.upper
            ),
        );
    }
    Ok(())
}

/// Two-component paths between random possible mixtures of the traffic light.
fn path(cx: &mut Ctx) -> losscape::Result<()> {
    let f = Formula::parse("!r | !g")?;
    let component = |cx: &mut Ctx| -> losscape::Result<IndependentParams> {
        let free: f64 = cx.rng.random();
        let fixed = cx.rng.random_bool(0.5);
        IndependentParams::new(if fixed { vec![0.0, free] } else { vec![free, 0.0] })
    };
    let mixture = |cx: &mut Ctx| -> losscape::Result<MixtureParams> {
        let a: f64 = cx.rng.random_range(0.0..=1.0);
        MixtureParams::new(vec![a, 1.0 - a], vec![component(cx)?, component(cx)?])
    };
    let (m1, m2) = (mixture(cx)?, mixture(cx)?);
    let waypoints = mixture_path(&f, &m1, &m2, 100, &cx.limits)?;
    for m in &waypoints {
        let wmc = losscape::wmc(&f, &m.densify(&cx.limits)?)?;
        if !mixture_is_possible(&f, m, &cx.limits)? || (wmc - 1.0).abs() > 1e-12 {
            cx.fail(&f, format!("waypoint {m:?} has wmc {wmc}"));
            break;
        }
    }
    Ok(())
}

/// Runs `cases` random instances of `suite`.
pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> SuiteResult {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(suite.salt());
    let mut limits = Limits::default();
    limits.max_vars = limits.max_vars.max(opts.max_n);
    let mut cx = Ctx {
        rng,
        opts,
        limits,
        failures: Vec::new(),
    };
    let case: fn(&mut Ctx) -> losscape::Result<()> = match suite {
        Suite::Possibility => possibility,
        Suite::Conditional => conditional,
        Suite::Union => union,
        Suite::Convexity => convexity,
        Suite::Connectivity => connectivity,
        Suite::Boundary => boundary,
        Suite::Gradients => gradients,
        Suite::Jensen => jensen,
        Suite::Marginals => marginals,
        Suite::MixtureBounds => bounds,
        Suite::MixturePath => path,
    };
    for _ in 0..opts.cases {
        if let Err(e) = case(&mut cx) {
            cx.failures.push(format!("error: {e}"));
        }
    }
    SuiteResult {
        suite,
        cases: opts.cases,
        failures: cx.failures,
        elapsed: start.elapsed(),
    }
}

pub fn run_verify(opts: &VerifyOptions) -> Vec<SuiteResult> {
    CORE_SUITES.iter().map(|&s| run_suite(s, opts)).collect()
}
