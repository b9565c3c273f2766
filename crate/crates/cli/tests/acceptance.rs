//! One line per acceptance criterion, written straight to stdout so it shows
//! up even when the harness captures output. Each test asserts its criterion.

use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use losscape::{
    cubical_set, experiment, landscape_grid, EntropyVariant, Formula, FuzzyForm, FuzzyLogic, Limits, LossSpec,
    ModelSpec, RunConfig, World,
};
use losscape_cli::{analyze, builtin, run_suite, AnalysisReport, AnalyzeOptions, Suite, SuiteResult, VerifyOptions};

fn line(name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    writeln!(out, "\nacceptance [{tag}] {name}: {detail}").unwrap();
    out.flush().unwrap();
}

fn check(name: &str, pass: bool, detail: String) {
    line(name, pass, &detail);
    assert!(pass, "{name}: {detail}");
}

fn timed_analysis(name: &str) -> (AnalysisReport, Duration) {
    let f = builtin(name).unwrap();
    let start = Instant::now();
    let r = analyze(&f, AnalyzeOptions::default(), &Limits::default()).unwrap();
    (r, start.elapsed())
}

const GOLDEN_BUDGET: Duration = Duration::from_secs(1);

#[test]
fn golden_traffic_light() {
    let (r, t) = timed_analysis("traffic");
    let mut pis = r.prime_implicant_literals.clone();
    pis.sort();
    let pass = pis == ["!g", "!r"]
        && !r.is_convex
        && r.nonconvexity_witness.is_some()
        && r.connected_components.count == 1
        && r.betti == Some(vec![1, 0])
        && r.mixture_bounds.min_components == 2
        && t < GOLDEN_BUDGET;
    check(
        "golden traffic light",
        pass,
        format!(
            "primes {:?}, convex {}, components {}, betti {:?}, min_components {}, {:.1} ms",
            pis,
            r.is_convex,
            r.connected_components.count,
            r.betti,
            r.mixture_bounds.min_components,
            t.as_secs_f64() * 1e3
        ),
    );
}

#[test]
fn golden_xor() {
    let (r, t) = timed_analysis("xor");
    let full = r.prime_implicants.iter().all(|p| !p.contains('*'));
    let pass = r.prime_implicants.len() == 2
        && full
        && r.connected_components.count == 2
        && r.betti == Some(vec![2, 0])
        && t < GOLDEN_BUDGET;
    check(
        "golden xor",
        pass,
        format!(
            "primes {:?}, components {}, betti {:?}, {:.1} ms",
            r.prime_implicants,
            r.connected_components.count,
            r.betti,
            t.as_secs_f64() * 1e3
        ),
    );
}

fn in_cube(pattern: &str, x: &[f64]) -> bool {
    pattern.chars().zip(x).all(|(c, &v)| match c {
        '0' => v == 0.0,
        '1' => v == 1.0,
        _ => (0.0..=1.0).contains(&v),
    })
}

#[test]
fn golden_minimal_cover_gap() {
    let (r, t) = timed_analysis("appendix-b1");
    assert_eq!(r.vars, ["a", "b", "c"]);
    let mut primes = r.prime_implicants.clone();
    primes.sort();
    let mut cover = r.minimal_cover.clone();
    cover.sort();
    let point = [1.0, 1.0, 0.5];
    let f = builtin("appendix-b1").unwrap();
    let cs = cubical_set(&f, &Limits::default()).unwrap();
    let in_c = cs.contains(&point, 0.0) && primes.iter().any(|p| in_cube(p, &point));
    let in_cover = cover.iter().any(|p| in_cube(p, &point));
    let pass = primes == ["*10", "1*1", "11*"] && cover == ["*10", "1*1"] && in_c && !in_cover && t < GOLDEN_BUDGET;
    check(
        "golden minimal cover does not cover",
        pass,
        format!(
            "primes {primes:?}, cover {cover:?}, (1,1,0.5) in C_phi {in_c}, in cover {in_cover}, {:.1} ms",
            t.as_secs_f64() * 1e3
        ),
    );
}

#[test]
fn golden_hole() {
    let (r, t) = timed_analysis("hole");
    let pass = r.betti == Some(vec![1, 1, 0]) && t < GOLDEN_BUDGET;
    check(
        "golden hole",
        pass,
        format!("betti {:?}, {:.1} ms", r.betti, t.as_secs_f64() * 1e3),
    );
}

#[test]
fn golden_mnist_addition() {
    let (r, t) = timed_analysis("mnist-add:3,2");
    let pass = r.num_possible_worlds == 3
        && r.implicant_graph_edges == 0
        && r.connected_components.count == 3
        && t < GOLDEN_BUDGET;
    check(
        "golden mnist-add(3,2)",
        pass,
        format!(
            "worlds {}, edges {}, components {}, {:.1} ms",
            r.num_possible_worlds,
            r.implicant_graph_edges,
            r.connected_components.count,
            t.as_secs_f64() * 1e3
        ),
    );
}

const SUITES: [Suite; 9] = [
    Suite::Possibility,
    Suite::Conditional,
    Suite::Convexity,
    Suite::Connectivity,
    Suite::Boundary,
    Suite::Gradients,
    Suite::Jensen,
    Suite::Marginals,
    Suite::MixtureBounds,
];

/// All randomized suites, run once and shared by the tests below so the
/// time budget covers the whole set.
fn suites() -> &'static (Vec<SuiteResult>, Duration) {
    static CELL: OnceLock<(Vec<SuiteResult>, Duration)> = OnceLock::new();
    CELL.get_or_init(|| {
        let opts = VerifyOptions {
            max_n: 6,
            cases: 200,
            seed: 0,
            inject_bug: false,
        };
        let start = Instant::now();
        let mut results: Vec<SuiteResult> = SUITES.iter().map(|&s| run_suite(s, &opts)).collect();
        results.push(run_suite(Suite::MixturePath, &opts));
        (results, start.elapsed())
    })
}

fn suite_line(suite: Suite, label: &str) {
    let r = suites().0.iter().find(|r| r.suite == suite).unwrap();
    let mut detail = format!("{} cases, {} counterexamples", r.cases, r.failures.len());
    if let Some(first) = r.failures.first() {
        detail.push_str(&format!(", first: {first}"));
    }
    check(label, r.passed() && r.cases >= 200, detail);
}

#[test]
fn property_possibility() {
    suite_line(Suite::Possibility, "possibility: is_possible, wmc = 1 and cube membership agree");
}

#[test]
fn property_conditional() {
    suite_line(Suite::Conditional, "representable conditional matches brute force");
}

#[test]
fn property_convexity() {
    suite_line(Suite::Convexity, "convexity matches sampled combinations");
}

#[test]
fn property_connectivity() {
    suite_line(Suite::Connectivity, "implicant graph, 1-skeleton and betti[0] agree");
}

#[test]
fn property_boundary() {
    suite_line(Suite::Boundary, "boundary squares to zero and SNF verifies");
}

#[test]
fn property_gradients() {
    suite_line(Suite::Gradients, "gradients match central differences to 1e-5");
}

#[test]
fn property_jensen() {
    suite_line(Suite::Jensen, "semantic loss convex over the simplex (1000 triples)");
}

#[test]
fn property_marginals() {
    suite_line(Suite::Marginals, "marginals invert densify to 1e-12");
}

#[test]
fn property_mixture_bounds() {
    suite_line(Suite::MixtureBounds, "simplex_lower <= min_components <= upper");
}

#[test]
fn property_mixture_path() {
    suite_line(Suite::MixturePath, "two-component paths on the traffic light stay possible");
}

#[test]
fn property_time_budget() {
    let t = suites().1;
    check(
        "property suites under 60 s",
        t < Duration::from_secs(60),
        format!("{:.2} s", t.as_secs_f64()),
    );
}

fn traffic() -> Formula {
    builtin("traffic").unwrap()
}

/// Index of the impossible world r = g = 1.
const RG: World = World(0b11);

fn section5(model: ModelSpec, loss: LossSpec) -> (losscape::ExperimentReport, Duration) {
    let cfg = RunConfig {
        loss,
        lr: 0.1,
        iters: 10_000,
        num_runs: 256,
        seed: 7,
        ..RunConfig::default()
    };
    let start = Instant::now();
    let report = experiment(&traffic(), &[model], &cfg, &Limits::default()).unwrap();
    (report, start.elapsed())
}

const EXPERIMENT_BUDGET: Duration = Duration::from_secs(300);

#[test]
fn experiment_independent() {
    let (report, t) = section5(ModelSpec::independent(2), LossSpec::Semantic);
    let s = &report.summaries[0];
    let dists: Vec<f64> = report.results.iter().map(|r| r.distance_to_cphi.unwrap()).collect();
    let close = dists.iter().filter(|&&d| d <= 1e-3).count();
    let frac = close as f64 / dists.len() as f64;
    let min = dists.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = dists.iter().cloned().fold(0.0, f64::max);
    let both = s.facet_counts.len() == 2 && s.facet_counts.values().all(|&c| c > 0);
    let pass = s.failures.is_empty() && report.results.len() == 256 && frac >= 0.95 && both && t < EXPERIMENT_BUDGET;
    check(
        "independent endpoints within 1e-3 of C_phi",
        pass,
        format!(
            "{close}/256 within 1e-3 (need 95%), distance range [{min:.3e}, {max:.3e}], facets {:?}, {:.1} s",
            s.facet_counts,
            t.as_secs_f64()
        ),
    );
}

#[test]
fn experiment_expressive() {
    let (report, t) = section5(ModelSpec::expressive(2), LossSpec::Semantic);
    let s = &report.summaries[0];
    let masses: Vec<f64> = report.results.iter().map(|r| r.final_dense.prob(RG)).collect();
    let ok = masses.iter().filter(|&&m| m < 1e-3).count();
    let worst = masses.iter().cloned().fold(0.0, f64::max);
    let pass = s.failures.is_empty() && masses.len() == 256 && ok == 256 && t < EXPERIMENT_BUDGET;
    check(
        "expressive endpoints with p(r,g) < 1e-3",
        pass,
        format!(
            "{ok}/256, worst {worst:.3e}, near-vertex fraction {:.4}, {:.1} s",
            s.near_vertex_fraction,
            t.as_secs_f64()
        ),
    );
}

#[test]
fn entropy_regularized_mass() {
    let loss = LossSpec::SemanticEntropy {
        alpha: 0.1,
        variant: EntropyVariant::CrossEntropy,
    };
    let (report, _) = section5(ModelSpec::independent(2), loss);
    let masses: Vec<f64> = report.results.iter().map(|r| r.final_dense.prob(RG)).collect();
    let lo = masses.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = masses.iter().cloned().fold(0.0, f64::max);
    let pass = masses.len() == 256 && masses.iter().all(|m| (m - 0.023).abs() <= 0.01);
    check(
        "entropy-regularized p(r,g) = 0.023 +- 0.01",
        pass,
        format!("cross-entropy, alpha 0.1, p(r,g) in [{lo:.6}, {hi:.6}] over 256 runs"),
    );
}

const RESOLUTION: usize = 201;

#[test]
fn product_neg_log_matches_semantic() {
    let limits = Limits::default();
    let fuzzy = LossSpec::Fuzzy {
        logic: FuzzyLogic::Product,
        form: FuzzyForm::NegLog,
    };
    let a = landscape_grid(&traffic(), &fuzzy, RESOLUTION, &limits).unwrap();
    let b = landscape_grid(&traffic(), &LossSpec::Semantic, RESOLUTION, &limits).unwrap();
    let mut worst = 0.0f64;
    let mut infinite = 0;
    let mut bad_clamp = 0;
    for (p, q) in a.iter().zip(&b) {
        assert_eq!(p.mu, q.mu);
        if q.loss.is_finite() {
            worst = worst.max((p.loss - q.loss).abs());
        } else {
            // wmc = 0 here; the fuzzy log is floored at 1e-12 instead.
            infinite += 1;
            if p.loss != -(1e-12f64).ln() {
                bad_clamp += 1;
            }
        }
    }
    check(
        "product neg_log equals semantic loss on the grid",
        a.len() == b.len() && bad_clamp == 0 && worst <= 1e-12,
        format!(
            "{} points, max difference {worst:.2e}, {infinite} point(s) with infinite semantic loss where the fuzzy log is floored",
            a.len()
        ),
    );
}

#[test]
fn lukasiewicz_zero_region() {
    let spec = LossSpec::Fuzzy {
        logic: FuzzyLogic::Lukasiewicz,
        form: FuzzyForm::OneMinus,
    };
    let grid = landscape_grid(&traffic(), &spec, RESOLUTION, &Limits::default()).unwrap();
    let last = RESOLUTION - 1;
    let mut wrong = 0;
    let mut zeros = 0;
    let mut max_inside = 0.0f64;
    let mut min_outside = f64::INFINITY;
    for (k, p) in grid.iter().enumerate() {
        // Membership by grid index, so r + g <= 1 is decided exactly. The
        // grid coordinates themselves are rounded, hence the 1e-12 slack.
        let inside = k / RESOLUTION + k % RESOLUTION <= last;
        let zero = p.loss.abs() <= 1e-12;
        zeros += zero as usize;
        if inside {
            max_inside = max_inside.max(p.loss);
        } else {
            min_outside = min_outside.min(p.loss);
        }
        if inside != zero {
            wrong += 1;
        }
    }
    check(
        "lukasiewicz zero region is r + g <= 1",
        wrong == 0,
        format!(
            "{zeros} zero points of {}, {wrong} misclassified, max loss inside {max_inside:.1e}, min loss outside {min_outside:.3}; \
             note: the text states p(r)+p(g) <= 0.5, the formula gives <= 1",
            grid.len()
        ),
    );
}
