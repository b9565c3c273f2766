#![allow(dead_code)]

use losscape::{random_formula, Formula, World};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn formula(max_n: usize) -> impl Strategy<Value = Formula> {
    (1..=max_n, any::<u64>()).prop_map(|(n, seed)| random_formula(&mut ChaCha8Rng::seed_from_u64(seed), n))
}

/// A marginal vector mixing exact 0/1 coordinates with interior values.
pub fn mixed_mu(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(prop_oneof![Just(0.0), Just(1.0), 0.05f64..0.95], n)
}

/// Every partial assignment as `(bits, mask)`, by brute force over `3^n`.
pub fn all_partial(n: usize) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for code in 0..3u64.pow(n as u32) {
        let (mut c, mut bits, mut mask) = (code, 0, 0);
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
        out.push((bits, mask));
    }
    out
}

pub fn covered(bits: u64, mask: u64, n: usize) -> impl Iterator<Item = u64> {
    (0..1u64 << n).filter(move |w| w & mask == bits)
}

/// Implicant test straight from the truth table.
pub fn brute_implicant(f: &Formula, bits: u64, mask: u64) -> bool {
    covered(bits, mask, f.n()).all(|w| f.eval_world(World(w)))
}

/// Pattern string with variable 0 first, `*` for free.
pub fn pattern(bits: u64, mask: u64, n: usize) -> String {
    (0..n)
        .map(|i| match (mask >> i & 1, bits >> i & 1) {
            (0, _) => '*',
            (_, 1) => '1',
            _ => '0',
        })
        .collect()
}
