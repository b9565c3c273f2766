//! Named constraints used throughout the examples and golden tests.

use losscape::{mnist_add_formula, Error, Formula, Result};

pub const TRAFFIC: &str = "!r | !g";
pub const XOR: &str = "(a & !b) | (!a & b)";
pub const HOLE: &str = "(!a & !b) | (!a & c) | (b & c) | (a & b) | (a & !c) | (!b & !c)";
pub const APPENDIX_B1: &str = "(a & b & c) | (a & b & !c) | (!a & b & !c) | (a & !b & c)";

pub const NAMES: &[&str] = &["traffic", "xor", "hole", "appendix-b1", "mnist-add:M,S"];

/// Resolves `traffic`, `xor`, `hole`, `appendix-b1` or `mnist-add:m,s`.
pub fn builtin(name: &str) -> Result<Formula> {
    match name {
        "traffic" => Formula::parse(TRAFFIC),
        "xor" => Formula::parse(XOR),
        "hole" => Formula::parse(HOLE),
        "appendix-b1" => Formula::parse(APPENDIX_B1),
        _ => {
            let Some(args) = name.strip_prefix("mnist-add:") else {
                return Err(Error::InvalidArgument(format!(
                    "unknown builtin `{name}` (expected one of {})",
                    NAMES.join(", ")
                )));
            };
            let parsed: Vec<usize> = args
                .split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::InvalidArgument(format!("bad mnist-add arguments `{args}`")))?;
            match parsed[..] {
                [m, s] => mnist_add_formula(m, s),
                _ => Err(Error::InvalidArgument(format!("mnist-add takes `m,s`, got `{args}`"))),
            }
        }
    }
}
