//! Argument parsing and command dispatch for the `losscape` binary.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use losscape::optimize::{endpoints_csv, initial_csv, trajectories_csv};
use losscape::{
    cubical_set, experiment, landscape_csv, landscape_grid, EntropyVariant, Error, Formula, FuzzyForm, FuzzyLogic,
    InitSpec, Limits, LossSpec, ModelSpec, PartialAssignment, RunConfig, World,
};
use serde::Serialize;

use crate::builtins::builtin;
use crate::report::{analyze, AnalyzeOptions, SCHEMA};
use crate::verify::{run_verify, VerifyOptions};

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_UNSAT: i32 = 3;
pub const EXIT_LIMIT: i32 = 4;
pub const EXIT_IO: i32 = 5;
pub const EXIT_NOT_TWO_VARS: i32 = 6;

#[derive(Debug, Parser)]
#[command(name = "losscape", version, about = "Structure of semantic-loss minima for propositional constraints")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Prime implicants, cover, convexity, components and homology as JSON.
    Analyze(AnalyzeArgs),
    /// Gradient-descent runs from impossible initial beliefs.
    Experiment(ExperimentArgs),
    /// Loss over a grid on [0,1]^2 as CSV.
    Landscape(LandscapeArgs),
    /// Randomized cross-checks against brute force.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct FormulaInput {
    /// Constraint text, e.g. "!r | !g".
    #[arg(required_unless_present = "builtin", conflicts_with = "builtin")]
    pub formula: Option<String>,
    /// traffic, xor, hole, appendix-b1 or mnist-add:M,S
    #[arg(long)]
    pub builtin: Option<String>,
    /// Variable order (comma separated); extra names become unconstrained variables.
    #[arg(long, value_delimiter = ',')]
    pub vars: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub input: FormulaInput,
    /// Leave out Betti numbers and torsion.
    #[arg(long)]
    pub skip_homology: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub pretty: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LossKind {
    Semantic,
    SemanticEntropy,
    Fuzzy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    CrossEntropy,
    PaperLiteral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LogicArg {
    Product,
    Goedel,
    Lukasiewicz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormArg {
    OneMinus,
    NegLog,
}

#[derive(Debug, Args)]
pub struct LossArgs {
    #[arg(long, value_enum, default_value = "semantic")]
    pub loss: LossKind,
    /// Regularization weight for semantic-entropy.
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value = "cross-entropy")]
    pub entropy_variant: VariantArg,
    #[arg(long, value_enum, default_value = "product")]
    pub logic: LogicArg,
    #[arg(long, value_enum, default_value = "neg-log")]
    pub form: FormArg,
}

impl LossArgs {
    pub fn spec(&self) -> LossSpec {
        match self.loss {
            LossKind::Semantic => LossSpec::Semantic,
            LossKind::SemanticEntropy => LossSpec::SemanticEntropy {
                alpha: self.alpha,
                variant: match self.entropy_variant {
                    VariantArg::CrossEntropy => EntropyVariant::CrossEntropy,
                    VariantArg::PaperLiteral => EntropyVariant::PaperLiteral,
                },
            },
            LossKind::Fuzzy => LossSpec::Fuzzy {
                logic: match self.logic {
                    LogicArg::Product => FuzzyLogic::Product,
                    LogicArg::Goedel => FuzzyLogic::Goedel,
                    LogicArg::Lukasiewicz => FuzzyLogic::Lukasiewicz,
                },
                form: match self.form {
                    FormArg::OneMinus => FuzzyForm::OneMinus,
                    FormArg::NegLog => FuzzyForm::NegLog,
                },
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub input: FormulaInput,
    /// independent, expressive or mixture:K (comma separated for several).
    #[arg(long, value_delimiter = ',', default_value = "independent")]
    pub model: Vec<String>,
    #[command(flatten)]
    pub loss: LossArgs,
    #[arg(long, default_value_t = 0.1)]
    pub lr: f64,
    #[arg(long, default_value_t = 10_000)]
    pub iters: usize,
    #[arg(long, default_value_t = 256, value_parser = clap::value_parser!(u32).range(1..))]
    pub runs: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Initial probability of the designated impossible world.
    #[arg(long, default_value_t = 0.7)]
    pub impossible_mass: f64,
    /// Pattern of the impossible world, e.g. "11"; defaults to all-true if impossible.
    #[arg(long)]
    pub impossible_world: Option<String>,
    /// Also write trajectories.csv (100 snapshots per run).
    #[arg(long)]
    pub trajectories: bool,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct LandscapeArgs {
    #[command(flatten)]
    pub input: FormulaInput,
    #[command(flatten)]
    pub loss: LossArgs,
    /// Grid points per axis.
    #[arg(long, default_value_t = 201)]
    pub resolution: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 6)]
    pub max_n: usize,
    #[arg(long, default_value_t = 200)]
    pub cases: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, hide = true)]
    pub inject_bug: bool,
}

/// A failure carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            kind: "usage",
            message: message.into(),
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Failure {
            code: EXIT_IO,
            kind: "io",
            message: format!("{}: {e}", path.display()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self.kind, "message": self.message, "exit_code": self.code }).to_string()
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::Syntax { .. } => (EXIT_USAGE, "syntax"),
            Error::UnknownVariable(_) | Error::NoVariables => (EXIT_USAGE, "syntax"),
            Error::InvalidArgument(_) | Error::InvalidRange(_) | Error::InfeasibleInit(_) => (EXIT_USAGE, "invalid"),
            Error::Unsatisfiable => (EXIT_UNSAT, "unsatisfiable"),
            Error::LimitExceeded { .. } | Error::PrimeImplicantOverflow { .. } => (EXIT_LIMIT, "limit"),
            _ => (EXIT_FAILURE, "internal"),
        };
        Failure {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<(), Failure>;

/// Enumeration limits, with `LOSSCAPE_MAX_N` overriding the variable cap.
pub fn limits_from_env() -> Result<Limits, Failure> {
    let mut limits = Limits::default();
    if let Ok(v) = std::env::var("LOSSCAPE_MAX_N") {
        limits.max_vars = v
            .trim()
            .parse()
            .map_err(|_| Failure::usage(format!("LOSSCAPE_MAX_N must be an integer, got `{v}`")))?;
    }
    Ok(limits)
}

pub fn load_formula(input: &FormulaInput) -> Result<Formula, Failure> {
    Ok(match (&input.builtin, &input.formula) {
        (Some(name), _) => builtin(name)?,
        (None, Some(text)) => Formula::parse_with_order(text, input.vars.as_deref())?,
        (None, None) => return Err(Failure::usage("give a formula or --builtin")),
    })
}

fn parse_model(text: &str, n: usize) -> Result<ModelSpec, Failure> {
    match text {
        "independent" => Ok(ModelSpec::independent(n)),
        "expressive" => Ok(ModelSpec::expressive(n)),
        _ => {
            let k = text
                .strip_prefix("mixture:")
                .and_then(|k| k.parse::<usize>().ok())
                .ok_or_else(|| Failure::usage(format!("unknown model `{text}`")))?;
            Ok(ModelSpec::mixture(k, n))
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Outcome {
    fs::write(path, contents).map_err(|e| Failure::io(path, e))
}

fn cmd_analyze(args: &AnalyzeArgs, out: &mut dyn Write) -> Outcome {
    let limits = limits_from_env()?;
    let f = load_formula(&args.input)?;
    limits.check("analysis", f.n())?;
    let opts = AnalyzeOptions {
        skip_homology: args.skip_homology,
        seed: args.seed,
    };
    let report = analyze(&f, opts, &limits)?;
    let text = if args.pretty {
        serde_json::to_string_pretty(&report)
    } else {
        serde_json::to_string(&report)
    }
    .expect("report serializes");
    writeln!(out, "{text}").map_err(|e| Failure::io(Path::new("<stdout>"), e))
}

#[derive(Debug, Serialize)]
struct ModelJson {
    model: String,
    runs: usize,
    completed: usize,
    failures: Vec<(usize, String)>,
    fraction_possible: f64,
    near_vertex_fraction: f64,
    mean_impossible_mass: f64,
    facet_counts: BTreeMap<String, usize>,
    total_halvings: usize,
    stalled_runs: usize,
}

#[derive(Debug, Serialize)]
struct ExperimentJson {
    schema: u32,
    formula: String,
    vars: Vec<String>,
    seed: u64,
    loss: String,
    alpha: f64,
    lr: f64,
    iters: usize,
    impossible_world: String,
    impossible_mass: f64,
    models: Vec<ModelJson>,
    elapsed_ms: u64,
}

fn cmd_experiment(args: &ExperimentArgs, out: &mut dyn Write) -> Outcome {
    let start = Instant::now();
    let limits = limits_from_env()?;
    let f = load_formula(&args.input)?;
    let n = f.n();
    limits.check("experiment", n)?;
    let models = args
        .model
        .iter()
        .map(|m| parse_model(m, n))
        .collect::<Result<Vec<_>, _>>()?;
    let target = match &args.impossible_world {
        Some(p) => {
            let pa = PartialAssignment::from_pattern(p)?;
            if pa.len() != n || p.chars().count() != n {
                return Err(Failure::usage(format!("impossible world `{p}` must fix all {n} variables")));
            }
            World(pa.bits())
        }
        None => losscape::optimize::default_impossible_world(&f, &limits)?,
    };
    if f.eval_world(target) {
        return Err(Failure::usage(format!("world {} satisfies the constraint", target.pattern(n))));
    }
    let cfg = RunConfig {
        loss: args.loss.spec(),
        lr: args.lr,
        iters: args.iters,
        num_runs: args.runs as usize,
        seed: args.seed,
        init: InitSpec {
            impossible_world: Some(target),
            impossible_mass: args.impossible_mass,
        },
        capture_trajectory: args.trajectories,
    };
    let report = experiment(&f, &models, &cfg, &limits)?;
    let cs = cubical_set(&f, &limits)?;
    fs::create_dir_all(&args.out_dir).map_err(|e| Failure::io(&args.out_dir, e))?;
    write_file(&args.out_dir.join("endpoints.csv"), &endpoints_csv(&report, &cs, n))?;
    write_file(&args.out_dir.join("initial.csv"), &initial_csv(&report, n))?;
    if args.trajectories {
        write_file(&args.out_dir.join("trajectories.csv"), &trajectories_csv(&report, n))?;
    }
    let summary = ExperimentJson {
        schema: SCHEMA,
        formula: f.to_string(),
        vars: f.vars().to_vec(),
        seed: args.seed,
        loss: cfg.loss.kind_name(),
        alpha: cfg.loss.alpha(),
        lr: cfg.lr,
        iters: cfg.iters,
        impossible_world: target.pattern(n),
        impossible_mass: args.impossible_mass,
        models: report
            .summaries
            .iter()
            .map(|s| ModelJson {
                model: s.model.to_string(),
                runs: s.runs,
                completed: s.runs - s.failures.len(),
                failures: s.failures.clone(),
                fraction_possible: s.fraction_possible,
                near_vertex_fraction: s.near_vertex_fraction,
                mean_impossible_mass: s.mean_impossible_mass,
                facet_counts: s.facet_counts.clone(),
                total_halvings: s.total_halvings,
                stalled_runs: s.stalled_runs,
            })
            .collect(),
        elapsed_ms: start.elapsed().as_millis() as u64,
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    write_file(&args.out_dir.join("report.json"), &json)?;
    let io = |e| Failure::io(Path::new("<stdout>"), e);
    writeln!(
        out,
        "{:<12} {:>5} {:>9} {:>11} {:>12}  facets",
        "model", "runs", "possible", "near-vertex", "mean p(imp)"
    )
    .map_err(io)?;
    for m in &summary.models {
        let facets: Vec<String> = m.facet_counts.iter().map(|(k, v)| format!("{k}:{v}")).collect();
        writeln!(
            out,
            "{:<12} {:>5} {:>9.4} {:>11.4} {:>12.3e}  {}",
            m.model,
            m.completed,
            m.fraction_possible,
            m.near_vertex_fraction,
            m.mean_impossible_mass,
            facets.join(" ")
        )
        .map_err(io)?;
    }
    writeln!(out, "wrote {}", args.out_dir.display()).map_err(io)
}

fn cmd_landscape(args: &LandscapeArgs, out: &mut dyn Write) -> Outcome {
    let limits = limits_from_env()?;
    let f = load_formula(&args.input)?;
    if f.n() != 2 {
        return Err(Failure {
            code: EXIT_NOT_TWO_VARS,
            kind: "dimension",
            message: format!("landscapes need exactly 2 variables, `{f}` has {}", f.n()),
        });
    }
    let grid = landscape_grid(&f, &args.loss.spec(), args.resolution, &limits)?;
    let csv = landscape_csv(&grid);
    match &args.out {
        Some(path) => write_file(path, &csv),
        None => out
            .write_all(csv.as_bytes())
            .map_err(|e| Failure::io(Path::new("<stdout>"), e)),
    }
}

fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Outcome {
    if args.max_n == 0 || args.max_n > 12 {
        return Err(Failure::usage("--max-n must be between 1 and 12"));
    }
    let opts = VerifyOptions {
        max_n: args.max_n,
        cases: args.cases,
        seed: args.seed,
        inject_bug: args.inject_bug,
    };
    let results = run_verify(&opts);
    let io = |e| Failure::io(Path::new("<stdout>"), e);
    let mut failures = 0;
    for r in &results {
        writeln!(out, "{r}").map_err(io)?;
        for c in &r.failures {
            writeln!(out, "  counterexample: {c}").map_err(io)?;
        }
        failures += r.failures.len();
    }
    writeln!(out, "{} suites, {failures} failures (seed {})", results.len(), args.seed).map_err(io)?;
    if failures > 0 {
        return Err(Failure {
            code: EXIT_FAILURE,
            kind: "verification",
            message: format!("{failures} property failures"),
        });
    }
    Ok(())
}

/// Runs a parsed command; returns the process exit code. Errors are written
/// to `err` as one JSON object.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let outcome = match &cli.command {
        Command::Analyze(a) => cmd_analyze(a, out),
        Command::Experiment(a) => cmd_experiment(a, out),
        Command::Landscape(a) => cmd_landscape(a, out),
        Command::Verify(a) => cmd_verify(a, out),
    };
    match outcome {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "{}", f.to_json());
            f.code
        }
    }
}
