//! Semantic loss, its entropy-regularized variants, and fuzzy t-conorm losses.

use std::fmt;
use std::str::FromStr;

use crate::distributions::{DenseDistribution, IndependentParams};
use crate::error::{Error, Result};
use crate::formula::{BinaryOp, Expr, Formula, Limits, World};

/// Floor applied before `-log` of a fuzzy truth value.
pub const FUZZY_LOG_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FuzzyLogic {
    Product,
    Goedel,
    Lukasiewicz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FuzzyForm {
    /// `1 - value`
    OneMinus,
    /// `-log(max(value, 1e-12))`
    NegLog,
}

/// The regularizer `R` in `(1 - alpha) * L + alpha * R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntropyVariant {
    /// Cross-entropy to the uniform distribution over possible worlds:
    /// `-(1/|W|) sum_{w in W} log p(w)`.
    CrossEntropy,
    /// `-(1/|W|) sum_{w in W} p(w)`, the literal "H" of the regularized loss.
    PaperLiteral,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossSpec {
    Semantic,
    SemanticEntropy { alpha: f64, variant: EntropyVariant },
    Fuzzy { logic: FuzzyLogic, form: FuzzyForm },
}

impl LossSpec {
    pub fn validate(&self) -> Result<()> {
        if let LossSpec::SemanticEntropy { alpha, .. } = self {
            if !(0.0..=1.0).contains(alpha) {
                return Err(Error::InvalidArgument(format!("alpha {alpha} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Short name used in reports: `semantic`, `semantic-entropy`, `fuzzy-product-neglog`, ...
    pub fn kind_name(&self) -> String {
        match self {
            LossSpec::Semantic => "semantic".into(),
            LossSpec::SemanticEntropy { variant, .. } => match variant {
                EntropyVariant::CrossEntropy => "semantic-entropy".into(),
                EntropyVariant::PaperLiteral => "semantic-entropy-literal".into(),
            },
            LossSpec::Fuzzy { logic, form } => format!("fuzzy-{logic}-{form}"),
        }
    }

    pub fn alpha(&self) -> f64 {
        match self {
            LossSpec::SemanticEntropy { alpha, .. } => *alpha,
            _ => 0.0,
        }
    }

    /// `true` when the loss is a function of the world distribution alone.
    pub fn is_dense(&self) -> bool {
        !matches!(self, LossSpec::Fuzzy { .. })
    }
}

impl fmt::Display for FuzzyLogic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FuzzyLogic::Product => "product",
            FuzzyLogic::Goedel => "goedel",
            FuzzyLogic::Lukasiewicz => "lukasiewicz",
        })
    }
}

impl FromStr for FuzzyLogic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "product" => Ok(FuzzyLogic::Product),
            "goedel" | "godel" | "gödel" => Ok(FuzzyLogic::Goedel),
            "lukasiewicz" | "luk" => Ok(FuzzyLogic::Lukasiewicz),
            _ => Err(Error::InvalidArgument(format!("unknown fuzzy logic `{s}`"))),
        }
    }
}

impl fmt::Display for FuzzyForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FuzzyForm::OneMinus => "one-minus",
            FuzzyForm::NegLog => "neglog",
        })
    }
}

impl FromStr for FuzzyForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one-minus" | "one_minus" => Ok(FuzzyForm::OneMinus),
            "neglog" | "neg-log" | "neg_log" => Ok(FuzzyForm::NegLog),
            _ => Err(Error::InvalidArgument(format!("unknown fuzzy form `{s}`"))),
        }
    }
}

fn check_dims(f: &Formula, n: usize) -> Result<()> {
    if f.n() != n {
        return Err(Error::DimensionMismatch { expected: f.n(), got: n });
    }
    Ok(())
}

/// `-log wmc(f, p)`; `+inf` when the constraint has probability zero.
pub fn semantic_loss(f: &Formula, p: &DenseDistribution) -> Result<f64> {
    Ok(-crate::distributions::wmc(f, p)?.ln() + 0.0)
}

/// WMC of an independent distribution with `mu[pin]` forced to `value`.
fn pinned_wmc(f: &Formula, mu: &[f64], pin: Option<(usize, f64)>) -> f64 {
    let n = mu.len();
    let mut total = 0.0;
    for w in 0..1u64 << n {
        let world = World(w);
        if !f.eval_world(world) {
            continue;
        }
        let mut p = 1.0;
        for (i, &m) in mu.iter().enumerate() {
            let m = match pin {
                Some((j, v)) if j == i => v,
                _ => m,
            };
            p *= if world.get(i) { m } else { 1.0 - m };
        }
        total += p;
    }
    total
}

/// Gradient of the semantic loss in `mu`. The WMC is affine in each
/// coordinate, so `∂wmc/∂mu_i = wmc(mu_i = 1) - wmc(mu_i = 0)`.
pub fn semantic_grad_mu(f: &Formula, mu: &IndependentParams, limits: &Limits) -> Result<Vec<f64>> {
    check_dims(f, mu.n())?;
    limits.check("semantic gradient", mu.n())?;
    let z = pinned_wmc(f, mu.mu(), None);
    if z <= 0.0 {
        return Err(Error::ZeroEvidence);
    }
    Ok((0..mu.n())
        .map(|i| {
            let hi = pinned_wmc(f, mu.mu(), Some((i, 1.0)));
            let lo = pinned_wmc(f, mu.mu(), Some((i, 0.0)));
            -(hi - lo) / z
        })
        .collect())
}

/// `(1 - alpha) * semantic_loss + alpha * R` with `R` chosen by `variant`.
pub fn entropy_reg_loss(f: &Formula, p: &DenseDistribution, alpha: f64, variant: EntropyVariant) -> Result<f64> {
    check_dims(f, p.n())?;
    let phi: Vec<bool> = (0..p.probs().len() as u64).map(|w| f.eval_world(World(w))).collect();
    let spec = LossSpec::SemanticEntropy { alpha, variant };
    spec.validate()?;
    Ok(dense_loss(&phi, p.probs(), &spec).0)
}

/// Loss and gradient with respect to the world probabilities, for the
/// dense loss kinds. `phi[w]` is the truth table.
pub fn dense_loss(phi: &[bool], probs: &[f64], spec: &LossSpec) -> (f64, Vec<f64>) {
    let z: f64 = probs.iter().zip(phi).filter(|(_, &ok)| ok).map(|(p, _)| p).sum();
    let semantic = -z.ln() + 0.0;
    let semantic_grad = |scale: f64| -> Vec<f64> {
        phi.iter().map(|&ok| if ok { -scale / z } else { 0.0 }).collect()
    };
    match spec {
        LossSpec::Semantic => (semantic, semantic_grad(1.0)),
        LossSpec::SemanticEntropy { alpha, variant } => {
            let count = phi.iter().filter(|&&ok| ok).count() as f64;
            let mut grad = semantic_grad(1.0 - alpha);
            let reg = match variant {
                EntropyVariant::CrossEntropy => {
                    let mut r = 0.0;
                    for (w, (&ok, &p)) in phi.iter().zip(probs).enumerate() {
                        if ok {
                            r -= p.ln() / count;
                            grad[w] -= alpha / (count * p);
                        }
                    }
                    r
                }
                EntropyVariant::PaperLiteral => {
                    for (g, &ok) in grad.iter_mut().zip(phi) {
                        if ok {
                            *g -= alpha / count;
                        }
                    }
                    -z / count
                }
            };
            // Keep alpha = 0 exactly equal to the semantic loss.
            let loss = if *alpha == 0.0 {
                semantic
            } else {
                (1.0 - alpha) * semantic + alpha * reg
            };
            (loss, grad)
        }
        LossSpec::Fuzzy { .. } => panic!("fuzzy losses are not functions of the world distribution"),
    }
}

/// A truth value together with its gradient in `mu`.
#[derive(Debug, Clone)]
struct Dual {
    v: f64,
    g: Vec<f64>,
}

impl Dual {
    fn constant(v: f64, n: usize) -> Self {
        Dual { v, g: vec![0.0; n] }
    }

    fn var(i: usize, v: f64, n: usize) -> Self {
        let mut g = vec![0.0; n];
        g[i] = 1.0;
        Dual { v, g }
    }

    fn not(self) -> Self {
        Dual {
            v: 1.0 - self.v,
            g: self.g.into_iter().map(|x| -x).collect(),
        }
    }

    fn combine(a: Dual, b: Dual, v: f64, da: f64, db: f64) -> Dual {
        Dual {
            v,
            g: a.g.iter().zip(&b.g).map(|(x, y)| da * x + db * y).collect(),
        }
    }
}

fn t_norm(logic: FuzzyLogic, a: Dual, b: Dual) -> Dual {
    match logic {
        FuzzyLogic::Product => {
            let v = a.v * b.v;
            let (da, db) = (b.v, a.v);
            Dual::combine(a, b, v, da, db)
        }
        FuzzyLogic::Goedel => {
            if a.v <= b.v {
                a
            } else {
                b
            }
        }
        FuzzyLogic::Lukasiewicz => {
            let s = a.v + b.v - 1.0;
            if s > 0.0 {
                Dual::combine(a, b, s, 1.0, 1.0)
            } else {
                Dual::constant(0.0, a.g.len())
            }
        }
    }
}

fn t_conorm(logic: FuzzyLogic, a: Dual, b: Dual) -> Dual {
    match logic {
        FuzzyLogic::Product => {
            let v = a.v + b.v - a.v * b.v;
            let (da, db) = (1.0 - b.v, 1.0 - a.v);
            Dual::combine(a, b, v, da, db)
        }
        FuzzyLogic::Goedel => {
            if a.v >= b.v {
                a
            } else {
                b
            }
        }
        FuzzyLogic::Lukasiewicz => {
            let s = a.v + b.v;
            if s < 1.0 {
                Dual::combine(a, b, s, 1.0, 1.0)
            } else {
                Dual::constant(1.0, a.g.len())
            }
        }
    }
}

fn fuzzy_eval(e: &Expr, mu: &[f64], logic: FuzzyLogic) -> Dual {
    let n = mu.len();
    match e {
        Expr::Var(i) => Dual::var(*i, mu[*i], n),
        Expr::Const(b) => Dual::constant(if *b { 1.0 } else { 0.0 }, n),
        Expr::Not(x) => fuzzy_eval(x, mu, logic).not(),
        Expr::Binary(op, x, y) => {
            let a = fuzzy_eval(x, mu, logic);
            let b = fuzzy_eval(y, mu, logic);
            match op {
                BinaryOp::And => t_norm(logic, a, b),
                BinaryOp::Or => t_conorm(logic, a, b),
                BinaryOp::Implies => t_conorm(logic, a.not(), b),
                BinaryOp::Iff => {
                    let ab = t_conorm(logic, a.clone().not(), b.clone());
                    let ba = t_conorm(logic, b.not(), a);
                    t_norm(logic, ab, ba)
                }
                BinaryOp::Xor => {
                    let either = t_conorm(logic, a.clone(), b.clone());
                    let both = t_norm(logic, a, b);
                    t_norm(logic, either, both.not())
                }
            }
        }
    }
}

/// Fuzzy truth value of `f` with variable `i` true to degree `mu[i]`.
pub fn fuzzy_value(f: &Formula, mu: &IndependentParams, logic: FuzzyLogic) -> Result<f64> {
    check_dims(f, mu.n())?;
    Ok(fuzzy_eval(f.expr(), mu.mu(), logic).v)
}

fn apply_form(v: f64, g: Vec<f64>, form: FuzzyForm) -> (f64, Vec<f64>) {
    match form {
        FuzzyForm::OneMinus => (1.0 - v, g.into_iter().map(|x| -x).collect()),
        FuzzyForm::NegLog => {
            if v > FUZZY_LOG_FLOOR {
                (-v.ln(), g.into_iter().map(|x| -x / v).collect())
            } else {
                (-FUZZY_LOG_FLOOR.ln(), vec![0.0; g.len()])
            }
        }
    }
}

pub fn fuzzy_loss(f: &Formula, mu: &IndependentParams, logic: FuzzyLogic, form: FuzzyForm) -> Result<f64> {
    Ok(fuzzy_loss_and_grad(f, mu.mu(), logic, form)?.0)
}

/// Fuzzy loss and its (sub)gradient in `mu`.
pub fn fuzzy_loss_and_grad(f: &Formula, mu: &[f64], logic: FuzzyLogic, form: FuzzyForm) -> Result<(f64, Vec<f64>)> {
    check_dims(f, mu.len())?;
    let d = fuzzy_eval(f.expr(), mu, logic);
    Ok(apply_form(d.v, d.g, form))
}

/// Loss of an independent distribution under any loss kind.
pub fn independent_loss(f: &Formula, mu: &IndependentParams, spec: &LossSpec, limits: &Limits) -> Result<f64> {
    spec.validate()?;
    match spec {
        LossSpec::Fuzzy { logic, form } => fuzzy_loss(f, mu, *logic, *form),
        _ => {
            let phi = f.truth_table(limits)?;
            Ok(dense_loss(&phi, mu.densify(limits)?.probs(), spec).0)
        }
    }
}

/// One row of a two-variable loss landscape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub mu: [f64; 2],
    pub loss: f64,
}

/// Loss over the `resolution x resolution` grid on `[0,1]^2` (first
/// coordinate varies slowest). Only defined for two-variable formulas.
pub fn landscape_grid(f: &Formula, spec: &LossSpec, resolution: usize, limits: &Limits) -> Result<Vec<GridPoint>> {
    if f.n() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: f.n() });
    }
    if resolution < 2 {
        return Err(Error::InvalidArgument("grid resolution must be at least 2".into()));
    }
    let last = (resolution - 1) as f64;
    let mut out = Vec::with_capacity(resolution * resolution);
    for i in 0..resolution {
        for j in 0..resolution {
            let mu = [i as f64 / last, j as f64 / last];
            let loss = independent_loss(f, &IndependentParams::new(mu.to_vec())?, spec, limits)?;
            out.push(GridPoint { mu, loss });
        }
    }
    Ok(out)
}

/// CSV with columns `mu_0,mu_1,loss`.
pub fn landscape_csv(points: &[GridPoint]) -> String {
    let mut out = String::from("mu_0,mu_1,loss\n");
    for p in points {
        out.push_str(&format!("{},{},{}\n", p.mu[0], p.mu[1], p.loss));
    }
    out
}
