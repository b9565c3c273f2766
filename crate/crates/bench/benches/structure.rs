use criterion::{criterion_group, criterion_main, Criterion};
use losscape::{
    cubical_set, gd_minimize, homology, mnist_add_formula, prime_implicants, Formula, LossSpec, Limits, ModelSpec,
    Objective, RunConfig,
};

fn all_but_one(n: usize) -> Formula {
    let vars: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    Formula::parse(&format!("!({})", vars.join(" & "))).unwrap()
}

fn pairs(n: usize) -> Formula {
    let clauses: Vec<String> = (0..n / 2).map(|i| format!("(x{} | x{})", 2 * i, 2 * i + 1)).collect();
    Formula::parse(&clauses.join(" & ")).unwrap()
}

fn implicants(c: &mut Criterion) {
    let limits = Limits::default();
    let mut g = c.benchmark_group("prime_implicants");
    for (name, f) in [
        ("pairs-10", pairs(10)),
        ("mnist-add-4-3", mnist_add_formula(4, 3).unwrap()),
        ("all-but-one-10", all_but_one(10)),
    ] {
        g.bench_function(name, |b| b.iter(|| prime_implicants(&f, &limits).unwrap()));
    }
    g.finish();
}

fn homologies(c: &mut Criterion) {
    let limits = Limits::default();
    let mut g = c.benchmark_group("homology");
    g.sample_size(20);
    for (name, f) in [("pairs-6", pairs(6)), ("all-but-one-6", all_but_one(6))] {
        let cs = cubical_set(&f, &limits).unwrap();
        g.bench_function(name, |b| b.iter(|| homology(&cs, &limits).unwrap()));
    }
    g.finish();
}

fn descent(c: &mut Criterion) {
    let limits = Limits::default();
    let f = Formula::parse("!r | !g").unwrap();
    let cfg = RunConfig {
        iters: 1000,
        ..RunConfig::default()
    };
    let cs = cubical_set(&f, &limits).unwrap();
    let mut g = c.benchmark_group("gd_1000_steps");
    for model in [ModelSpec::independent(2), ModelSpec::expressive(2), ModelSpec::mixture(2, 2)] {
        let obj = Objective::new(&f, model, LossSpec::Semantic, &limits).unwrap();
        let start = vec![0.5; model.param_count()];
        g.bench_function(model.to_string(), |b| {
            b.iter(|| gd_minimize(&obj, start.clone(), &cfg, Some(&cs), 0).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, implicants, homologies, descent);
criterion_main!(benches);
