mod common;

use common::{all_partial, brute_implicant, covered, formula, mixed_mu};
use losscape::distributions::mixture_is_possible;
use losscape::losses::fuzzy_loss_and_grad;
use losscape::{
    condition, cubical_set, fuzzy_value, is_possible, mixture_bounds, mixture_path, mixture_support,
    representable_conditional, semantic_grad_mu, semantic_loss, wmc, DenseDistribution, Formula, FuzzyForm,
    FuzzyLogic, IndependentParams, Limits, LossSpec, MixtureParams, ModelSpec, Objective, World,
};
use proptest::prelude::*;

fn limits() -> Limits {
    Limits::default()
}

fn formula_with_mu(max_n: usize) -> impl Strategy<Value = (Formula, Vec<f64>)> {
    formula(max_n).prop_flat_map(|f| {
        let n = f.n();
        (Just(f), mixed_mu(n))
    })
}

fn interior_mu(max_n: usize) -> impl Strategy<Value = (Formula, Vec<f64>)> {
    formula(max_n).prop_flat_map(|f| {
        let n = f.n();
        (Just(f), proptest::collection::vec(0.02f64..0.98, n))
    })
}

fn dense(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.0f64..1.0, 1 << n).prop_map(|v| {
        let total: f64 = v.iter().sum::<f64>().max(1e-12);
        v.into_iter().map(|x| x / total).collect()
    })
}

/// Brute-force product of marginals.
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

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn possibility_three_ways((f, mu) in formula_with_mu(6)) {
        let l = limits();
        let p = IndependentParams::new(mu.clone()).unwrap();
        let possible = is_possible(&f, &p, &l).unwrap();
        let mass: f64 = product(&mu).iter().enumerate().filter(|(w, _)| f.eval_world(World(*w as u64))).map(|(_, q)| q).sum();
        prop_assert_eq!(possible, (mass - 1.0).abs() < 1e-12, "mass {}", mass);
        prop_assert_eq!(possible, cubical_set(&f, &l).unwrap().contains(&mu, 1e-12));
        let loss = semantic_loss(&f, &p.densify(&l).unwrap()).unwrap();
        prop_assert_eq!(possible, loss.abs() < 1e-12);
    }

    #[test]
    fn conditional_representability((f, mu) in formula_with_mu(5)) {
        let l = limits();
        let p = IndependentParams::new(mu.clone()).unwrap();
        let d = p.densify(&l).unwrap();
        prop_assume!(wmc(&f, &d).unwrap() > 0.0);
        let n = f.n();
        let cond = condition(&f, &d).unwrap();
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
        let worlds: Vec<u64> = covered(e_bits, e_mask, n).filter(|&w| f.eval_world(World(w))).collect();
        let entailed = all_partial(n)
            .into_iter()
            .any(|(b, m)| brute_implicant(&f, b, m) && worlds.iter().all(|w| w & m == b));
        let got = representable_conditional(&f, &p, &l).unwrap();
        prop_assert_eq!(independent, entailed);
        prop_assert_eq!(got.is_some(), entailed);
        if let Some(q) = got {
            let rebuilt = q.densify(&l).unwrap();
            for (a, b) in rebuilt.probs().iter().zip(cond.probs()) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn marginals_invert_densify(mu in (1usize..=6).prop_flat_map(mixed_mu)) {
        let d = IndependentParams::new(mu.clone()).unwrap().densify(&limits()).unwrap();
        for (a, b) in d.marginals().iter().zip(&mu) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn semantic_loss_is_convex_on_simplex(
        (f, p1, p2) in formula(4).prop_flat_map(|f| { let n = f.n(); (Just(f), dense(n), dense(n)) }),
        lams in proptest::collection::vec(0.0f64..1.0, 5),
    ) {
        let l1 = semantic_loss(&f, &DenseDistribution::new(p1.clone()).unwrap()).unwrap();
        let l2 = semantic_loss(&f, &DenseDistribution::new(p2.clone()).unwrap()).unwrap();
        for lam in lams {
            let mix: Vec<f64> = p1.iter().zip(&p2).map(|(a, b)| lam * a + (1.0 - lam) * b).collect();
            let total: f64 = mix.iter().sum();
            let mix: Vec<f64> = mix.into_iter().map(|x| x / total).collect();
            let lm = semantic_loss(&f, &DenseDistribution::new(mix).unwrap()).unwrap();
            let bound = lam * l1 + (1.0 - lam) * l2;
            prop_assert!(!bound.is_finite() || lm <= bound + 1e-12, "{} > {}", lm, bound);
        }
    }

    #[test]
    fn semantic_gradient_matches_differences((f, mu) in interior_mu(6)) {
        let l = limits();
        let p = IndependentParams::new(mu.clone()).unwrap();
        prop_assume!(wmc(&f, &p.densify(&l).unwrap()).unwrap() > 1e-3);
        let g = semantic_grad_mu(&f, &p, &l).unwrap();
        let loss = |m: &[f64]| semantic_loss(&f, &IndependentParams::new(m.to_vec()).unwrap().densify(&l).unwrap()).unwrap();
        for i in 0..mu.len() {
            let h = 1e-6;
            let (mut hi, mut lo) = (mu.clone(), mu.clone());
            hi[i] += h;
            lo[i] -= h;
            let fd = (loss(&hi) - loss(&lo)) / (2.0 * h);
            let scale = fd.abs().max(g[i].abs()).max(1e-4);
            prop_assert!((fd - g[i]).abs() / scale < 1e-5, "coord {}: {} vs {}", i, fd, g[i]);
        }
    }

    #[test]
    fn softmax_gradient_matches_differences(
        (f, logits) in formula(4).prop_flat_map(|f| { let n = f.n(); (Just(f), proptest::collection::vec(-2.0f64..2.0, 1 << n)) })
    ) {
        let obj = Objective::new(&f, ModelSpec::expressive(f.n()), LossSpec::Semantic, &limits()).unwrap();
        let (_, g) = obj.eval(&logits);
        for i in 0..logits.len() {
            let h = 1e-6;
            let (mut hi, mut lo) = (logits.clone(), logits.clone());
            hi[i] += h;
            lo[i] -= h;
            let fd = (obj.eval(&hi).0 - obj.eval(&lo).0) / (2.0 * h);
            let scale = fd.abs().max(g[i].abs()).max(1e-4);
            prop_assert!((fd - g[i]).abs() / scale < 1e-5, "logit {}: {} vs {}", i, fd, g[i]);
        }
    }

    #[test]
    fn fuzzy_agrees_on_vertices(f in formula(6), w in any::<u64>()) {
        let n = f.n();
        let world = World(w & ((1 << n) - 1));
        let mu: Vec<f64> = (0..n).map(|i| if world.get(i) { 1.0 } else { 0.0 }).collect();
        let p = IndependentParams::new(mu).unwrap();
        for logic in [FuzzyLogic::Product, FuzzyLogic::Goedel, FuzzyLogic::Lukasiewicz] {
            let v = fuzzy_value(&f, &p, logic).unwrap();
            prop_assert_eq!(v, if f.eval_world(world) { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn mixture_support_matches_densify(
        (f, comps, alpha) in formula(5).prop_flat_map(|f| {
            let n = f.n();
            (Just(f), proptest::collection::vec(mixed_mu(n), 1..4), proptest::collection::vec(prop_oneof![Just(0.0), 0.1f64..1.0], 3))
        })
    ) {
        let l = limits();
        let k = comps.len();
        let mut a: Vec<f64> = alpha[..k].to_vec();
        if a.iter().all(|&x| x == 0.0) {
            a[0] = 1.0;
        }
        let total: f64 = a.iter().sum();
        let a: Vec<f64> = a.into_iter().map(|x| x / total).collect();
        let m = MixtureParams::new(a, comps.into_iter().map(|c| IndependentParams::new(c).unwrap()).collect()).unwrap();
        let support = mixture_support(&f, &m).unwrap();
        let dense = m.densify(&l).unwrap();
        let positive: Vec<World> = (0..1u64 << f.n()).map(World).filter(|&w| dense.prob(w) > 0.0).collect();
        prop_assert_eq!(&support, &positive);
        let possible = mixture_is_possible(&f, &m, &l).unwrap();
        prop_assert_eq!(possible, support.iter().all(|&w| f.eval_world(w)));
    }

    #[test]
    fn mixture_bounds_below_world_count(f in formula(6)) {
        let b = mixture_bounds(&f, &limits()).unwrap();
        prop_assert!(b.simplex_lower <= b.upper);
        prop_assert!(b.min_components <= b.upper);
        prop_assert!(b.min_components >= 1);
    }

    #[test]
    fn product_neglog_is_semantic_on_traffic(r in 0.0f64..=1.0, g in 0.0f64..=1.0) {
        let f = Formula::parse("!r | !g").unwrap();
        let p = IndependentParams::new(vec![r, g]).unwrap();
        let (fl, _) = fuzzy_loss_and_grad(&f, &[r, g], FuzzyLogic::Product, FuzzyForm::NegLog).unwrap();
        let sl = semantic_loss(&f, &p.densify(&limits()).unwrap()).unwrap();
        prop_assume!(sl < 20.0);
        prop_assert!((fl - sl).abs() < 1e-12);
    }
}

#[test]
fn two_component_paths_stay_possible() {
    let l = limits();
    let f = Formula::parse("!r | !g").unwrap();
    let m = |a: f64, x: [f64; 2], y: [f64; 2]| {
        MixtureParams::new(
            vec![a, 1.0 - a],
            vec![IndependentParams::new(x.to_vec()).unwrap(), IndependentParams::new(y.to_vec()).unwrap()],
        )
        .unwrap()
    };
    let start = m(0.3, [0.0, 0.8], [0.4, 0.0]);
    let end = m(0.6, [1.0, 0.0], [0.0, 0.25]);
    let path = mixture_path(&f, &start, &end, 200, &l).unwrap();
    assert!(path.len() >= 2);
    for waypoint in &path {
        assert!(mixture_is_possible(&f, waypoint, &l).unwrap());
    }
}

#[test]
fn dimension_bound_can_exceed_cover_size() {
    // One component already reaches all 8 worlds, but filling the 7-dimensional
    // simplex needs at least two 4-dimensional images.
    let vars: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
    let f = Formula::parse_with_order("a | !a", Some(&vars)).unwrap();
    let b = mixture_bounds(&f, &limits()).unwrap();
    assert_eq!((b.min_components, b.upper, b.simplex_lower), (1, 8, 2));
}
