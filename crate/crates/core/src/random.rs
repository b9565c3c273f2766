//! Random satisfiable formulas for randomized checks.

use rand::Rng;

use crate::formula::{BinaryOp, Expr, Formula, World};

const MAX_DEPTH: usize = 4;

fn literal<R: Rng>(rng: &mut R, n: usize) -> Expr {
    let v = Expr::Var(rng.random_range(0..n));
    if rng.random_bool(0.5) {
        Expr::not(v)
    } else {
        v
    }
}

fn dnf<R: Rng>(rng: &mut R, n: usize) -> Expr {
    let terms = rng.random_range(1..=4);
    Expr::fold(
        BinaryOp::Or,
        (0..terms).map(|_| {
            let width = rng.random_range(1..=n.min(3));
            Expr::fold(BinaryOp::And, (0..width).map(|_| literal(rng, n))).unwrap()
        }),
    )
    .unwrap()
}

fn nnf<R: Rng>(rng: &mut R, n: usize, depth: usize) -> Expr {
    if depth == 0 || rng.random_bool(0.3) {
        return literal(rng, n);
    }
    let op = if rng.random_bool(0.5) { BinaryOp::And } else { BinaryOp::Or };
    Expr::binary(op, nnf(rng, n, depth - 1), nnf(rng, n, depth - 1))
}

fn general<R: Rng>(rng: &mut R, n: usize, depth: usize) -> Expr {
    if depth == 0 || rng.random_bool(0.25) {
        return literal(rng, n);
    }
    if rng.random_bool(0.1) {
        return Expr::not(general(rng, n, depth - 1));
    }
    let op = match rng.random_range(0..5) {
        0 => BinaryOp::And,
        1 => BinaryOp::Or,
        2 => BinaryOp::Xor,
        3 => BinaryOp::Implies,
        _ => BinaryOp::Iff,
    };
    Expr::binary(op, general(rng, n, depth - 1), general(rng, n, depth - 1))
}

/// A satisfiable formula over exactly `n` variables `x0..x{n-1}`, drawn as a
/// DNF, an NNF tree, or a tree over all connectives (depth at most 4).
pub fn random_formula<R: Rng>(rng: &mut R, n: usize) -> Formula {
    assert!((1..=20).contains(&n), "variable count out of range");
    let vars: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    loop {
        let expr = match rng.random_range(0..3) {
            0 => dnf(rng, n),
            1 => nnf(rng, n, MAX_DEPTH),
            _ => general(rng, n, MAX_DEPTH),
        };
        if (0..1u64 << n).any(|w| expr.eval(World(w))) {
            return Formula::new(expr, vars).expect("variables in range");
        }
    }
}
