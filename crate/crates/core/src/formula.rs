//! Propositional constraints over `n` boolean variables.
//!
//! A [`Formula`] pairs an expression tree with an ordered variable list;
//! variable `i` is bit `i` of a [`World`]. Parsing follows the grammar
//!
//! ```text
//! formula := iff ; iff := imp ("<->" imp)* ; imp := or ("->" imp)? ;
//! or := xor ("|" xor)* ; xor := and ("^" and)* ; and := unary ("&" unary)* ;
//! unary := "!" unary | atom ; atom := ident | "0" | "1" | "(" formula ")" ;
//! ```

use std::fmt;

use crate::error::{Error, Result};

/// Enumeration limits shared by every operation that walks `2^n` worlds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest `n` for which worlds are enumerated.
    pub max_vars: usize,
    /// Largest number of implicants (per merge generation) or faces kept.
    pub max_prime_implicants: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_vars: 20,
            max_prime_implicants: 100_000,
        }
    }
}

impl Limits {
    pub fn check(&self, what: &'static str, n: usize) -> Result<()> {
        // Bit patterns are u64; 2^n worlds must fit in memory anyway.
        let limit = self.max_vars.min(30);
        if n > limit {
            return Err(Error::LimitExceeded { what, n, limit });
        }
        Ok(())
    }
}

/// A full assignment; bit `i` is the value of variable `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct World(pub u64);

impl World {
    #[inline]
    pub fn get(self, var: usize) -> bool {
        self.0 >> var & 1 == 1
    }

    /// Bit string with variable 0 first, e.g. `"10"` for `r=1,g=0`.
    pub fn pattern(self, n: usize) -> String {
        (0..n).map(|i| if self.get(i) { '1' } else { '0' }).collect()
    }
}

/// A partial assignment `w_D`: `mask` marks the assigned variables `D`,
/// `bits` carries their values. Unassigned positions of `bits` are zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartialAssignment {
    bits: u64,
    mask: u64,
}

impl PartialAssignment {
    pub fn new(bits: u64, mask: u64) -> Result<Self> {
        if bits & !mask != 0 {
            return Err(Error::InvalidArgument(format!(
                "partial assignment bits {bits:#b} set outside mask {mask:#b}"
            )));
        }
        Ok(PartialAssignment { bits, mask })
    }

    /// Assignment with nothing fixed; its cover is every world.
    pub const fn empty() -> Self {
        PartialAssignment { bits: 0, mask: 0 }
    }

    pub fn full(world: World, n: usize) -> Self {
        let mask = full_mask(n);
        PartialAssignment {
            bits: world.0 & mask,
            mask,
        }
    }

    /// Builds from per-variable values (`None` = unassigned).
    pub fn from_values(values: &[Option<bool>]) -> Self {
        let mut pa = PartialAssignment::empty();
        for (i, v) in values.iter().enumerate() {
            if let Some(b) = v {
                pa = pa.with(i, *b);
            }
        }
        pa
    }

    /// Parses a pattern such as `"0*"` or `"-0"` (`*`/`-` = unassigned).
    pub fn from_pattern(pattern: &str) -> Result<Self> {
        let mut pa = PartialAssignment::empty();
        for (i, c) in pattern.chars().enumerate() {
            match c {
                '0' => pa = pa.with(i, false),
                '1' => pa = pa.with(i, true),
                '*' | '-' => {}
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "bad pattern character `{c}` in `{pattern}`"
                    )))
                }
            }
        }
        Ok(pa)
    }

    #[inline]
    pub fn bits(self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn mask(self) -> u64 {
        self.mask
    }

    /// Number of assigned variables, `|D|`.
    #[inline]
    pub fn len(self) -> usize {
        self.mask.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.mask == 0
    }

    pub fn value(self, var: usize) -> Option<bool> {
        if self.mask >> var & 1 == 1 {
            Some(self.bits >> var & 1 == 1)
        } else {
            None
        }
    }

    #[must_use]
    pub fn with(self, var: usize, value: bool) -> Self {
        let bit = 1u64 << var;
        PartialAssignment {
            bits: if value { self.bits | bit } else { self.bits & !bit },
            mask: self.mask | bit,
        }
    }

    #[must_use]
    pub fn without(self, var: usize) -> Self {
        let bit = 1u64 << var;
        PartialAssignment {
            bits: self.bits & !bit,
            mask: self.mask & !bit,
        }
    }

    /// `true` if `world` agrees with every assigned variable.
    #[inline]
    pub fn covers(self, world: World) -> bool {
        world.0 & self.mask == self.bits
    }

    /// Cover containment: every world covered by `other` is covered by `self`.
    #[inline]
    pub fn subsumes(self, other: PartialAssignment) -> bool {
        self.mask & other.mask == self.mask && other.bits & self.mask == self.bits
    }

    /// The worlds of `{0,1}^n` extending this assignment, ascending.
    pub fn cover(self, n: usize) -> impl Iterator<Item = World> {
        let free = full_mask(n) & !self.mask;
        let bits = self.bits;
        // Enumerate submasks of `free` in increasing order.
        let count = 1u64 << free.count_ones();
        (0..count).map(move |k| World(bits | deposit(k, free)))
    }

    /// `'0'`, `'1'`, `'*'` per variable in variable order.
    pub fn pattern(self, n: usize) -> String {
        (0..n)
            .map(|i| match self.value(i) {
                Some(true) => '1',
                Some(false) => '0',
                None => '*',
            })
            .collect()
    }

    /// Conjunction of literals, e.g. `b & !c`; `1` for the empty assignment.
    pub fn literals(self, vars: &[String]) -> String {
        let lits: Vec<String> = (0..vars.len())
            .filter_map(|i| {
                self.value(i).map(|v| {
                    if v {
                        vars[i].clone()
                    } else {
                        format!("!{}", vars[i])
                    }
                })
            })
            .collect();
        if lits.is_empty() {
            "1".to_string()
        } else {
            lits.join(" & ")
        }
    }
}

#[inline]
pub(crate) fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Scatters the low bits of `src` onto the set bits of `mask` (software pdep).
#[inline]
pub(crate) fn deposit(mut src: u64, mut mask: u64) -> u64 {
    let mut out = 0;
    while mask != 0 {
        let low = mask & mask.wrapping_neg();
        if src & 1 == 1 {
            out |= low;
        }
        src >>= 1;
        mask &= mask - 1;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    And,
    Or,
    Xor,
    Implies,
    Iff,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::And => "&",
            BinaryOp::Or => "|",
            BinaryOp::Xor => "^",
            BinaryOp::Implies => "->",
            BinaryOp::Iff => "<->",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinaryOp::Iff => 1,
            BinaryOp::Implies => 2,
            BinaryOp::Or => 3,
            BinaryOp::Xor => 4,
            BinaryOp::And => 5,
        }
    }

    #[inline]
    pub fn apply(self, a: bool, b: bool) -> bool {
        match self {
            BinaryOp::And => a && b,
            BinaryOp::Or => a || b,
            BinaryOp::Xor => a != b,
            BinaryOp::Implies => !a || b,
            BinaryOp::Iff => a == b,
        }
    }
}

/// Expression tree; variables are indices into [`Formula::vars`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Var(usize),
    Const(bool),
    Not(Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    /// Left fold of `op` over `items`; `None` when empty.
    pub fn fold(op: BinaryOp, items: impl IntoIterator<Item = Expr>) -> Option<Expr> {
        items.into_iter().reduce(|acc, e| Expr::binary(op, acc, e))
    }

    pub fn eval(&self, world: World) -> bool {
        match self {
            Expr::Var(i) => world.get(*i),
            Expr::Const(b) => *b,
            Expr::Not(e) => !e.eval(world),
            Expr::Binary(op, a, b) => op.apply(a.eval(world), b.eval(world)),
        }
    }

    fn collect_vars(&self, out: &mut Vec<usize>) {
        match self {
            Expr::Var(i) => out.push(*i),
            Expr::Const(_) => {}
            Expr::Not(e) => e.collect_vars(out),
            Expr::Binary(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, _, _) => op.precedence(),
            _ => u8::MAX,
        }
    }

    fn write(&self, vars: &[String], f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(i) => write!(f, "{}", vars[*i]),
            Expr::Const(b) => write!(f, "{}", u8::from(*b)),
            Expr::Not(e) => {
                write!(f, "!")?;
                if matches!(**e, Expr::Binary(..)) {
                    write!(f, "(")?;
                    e.write(vars, f)?;
                    write!(f, ")")
                } else {
                    e.write(vars, f)
                }
            }
            Expr::Binary(op, a, b) => {
                let p = op.precedence();
                // Implication associates to the right, everything else left.
                let (wrap_a, wrap_b) = if *op == BinaryOp::Implies {
                    (a.precedence() <= p, b.precedence() < p)
                } else {
                    (a.precedence() < p, b.precedence() <= p)
                };
                write_wrapped(a, wrap_a, vars, f)?;
                write!(f, " {} ", op.symbol())?;
                write_wrapped(b, wrap_b, vars, f)
            }
        }
    }
}

fn write_wrapped(e: &Expr, wrap: bool, vars: &[String], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if wrap {
        write!(f, "(")?;
        e.write(vars, f)?;
        write!(f, ")")
    } else {
        e.write(vars, f)
    }
}

/// A propositional constraint `phi` over `vars.len()` variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula {
    expr: Expr,
    vars: Vec<String>,
}

impl Formula {
    /// Builds a formula from an expression; every `Var(i)` must satisfy `i < vars.len()`.
    pub fn new(expr: Expr, vars: Vec<String>) -> Result<Self> {
        if vars.is_empty() {
            return Err(Error::NoVariables);
        }
        if vars.len() > 63 {
            return Err(Error::LimitExceeded {
                what: "variables",
                n: vars.len(),
                limit: 63,
            });
        }
        let mut used = Vec::new();
        expr.collect_vars(&mut used);
        if let Some(&bad) = used.iter().find(|&&i| i >= vars.len()) {
            return Err(Error::UnknownVariable(format!("#{bad}")));
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(Error::InvalidArgument(format!("duplicate variable `{v}`")));
            }
        }
        Ok(Formula { expr, vars })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_order(text, None)
    }

    /// Parses `text`; with `var_order` the variable indices follow that list
    /// (which may name extra, unconstrained variables).
    pub fn parse_with_order(text: &str, var_order: Option<&[String]>) -> Result<Self> {
        let mut parser = Parser::new(text, var_order.map(<[String]>::to_vec));
        let expr = parser.formula()?;
        parser.expect_end()?;
        Formula::new(expr, parser.vars)
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    /// Number of variables `n`.
    pub fn n(&self) -> usize {
        self.vars.len()
    }

    pub fn eval_world(&self, world: World) -> bool {
        self.expr.eval(world)
    }

    /// `phi(w)` for every world, indexed by bit pattern.
    pub fn truth_table(&self, limits: &Limits) -> Result<Vec<bool>> {
        limits.check("truth table", self.n())?;
        Ok((0..1u64 << self.n())
            .map(|w| self.eval_world(World(w)))
            .collect())
    }

    /// All satisfying worlds in ascending bit-pattern order; may be empty.
    pub fn possible_worlds(&self, limits: &Limits) -> Result<Vec<World>> {
        limits.check("possible worlds", self.n())?;
        Ok((0..1u64 << self.n())
            .map(World)
            .filter(|&w| self.eval_world(w))
            .collect())
    }

    /// Same constraint with variables renamed/reindexed: variable `i` moves to `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Formula> {
        if perm.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: perm.len(),
            });
        }
        fn remap(e: &Expr, perm: &[usize]) -> Expr {
            match e {
                Expr::Var(i) => Expr::Var(perm[*i]),
                Expr::Const(b) => Expr::Const(*b),
                Expr::Not(x) => Expr::not(remap(x, perm)),
                Expr::Binary(op, a, b) => Expr::binary(*op, remap(a, perm), remap(b, perm)),
            }
        }
        let mut vars = vec![String::new(); self.n()];
        for (i, &p) in perm.iter().enumerate() {
            vars[p] = self.vars[i].clone();
        }
        Formula::new(remap(&self.expr, perm), vars)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.expr.write(&self.vars, f)
    }
}

/// MNIST-Addition constraint for two digits with `num_values` classes each:
/// exactly one `w1_j` and one `w2_k` true, and `j + k = target_sum`.
pub fn mnist_add_formula(num_values: usize, target_sum: usize) -> Result<Formula> {
    if !(2..=10).contains(&num_values) {
        return Err(Error::InvalidRange(format!(
            "num_values must be in 2..=10, got {num_values}"
        )));
    }
    if target_sum > 2 * (num_values - 1) {
        return Err(Error::InvalidRange(format!(
            "target_sum {target_sum} exceeds maximum {}",
            2 * (num_values - 1)
        )));
    }
    let m = num_values;
    let mut vars = Vec::with_capacity(2 * m);
    for digit in 1..=2 {
        for j in 0..m {
            vars.push(format!("w{digit}_{j}"));
        }
    }
    let exactly_one = |offset: usize| {
        Expr::fold(
            BinaryOp::Or,
            (0..m).map(|j| {
                Expr::fold(
                    BinaryOp::And,
                    (0..m).map(|k| {
                        if k == j {
                            Expr::Var(offset + k)
                        } else {
                            Expr::not(Expr::Var(offset + k))
                        }
                    }),
                )
                .expect("m >= 2")
            }),
        )
        .expect("m >= 2")
    };
    let sum = Expr::fold(
        BinaryOp::Or,
        (0..m)
            .filter(|&j| target_sum >= j && target_sum - j < m)
            .map(|j| Expr::binary(BinaryOp::And, Expr::Var(j), Expr::Var(m + target_sum - j))),
    )
    .expect("target_sum in range has a decomposition");
    let expr = Expr::binary(
        BinaryOp::And,
        Expr::binary(BinaryOp::And, exactly_one(0), exactly_one(m)),
        sum,
    );
    Formula::new(expr, vars)
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Zero,
    One,
    Not,
    And,
    Or,
    Xor,
    Implies,
    Iff,
    LParen,
    RParen,
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
    lex_error: Option<Error>,
    vars: Vec<String>,
    fixed_order: bool,
}

impl Parser {
    fn new(text: &str, var_order: Option<Vec<String>>) -> Self {
        let (tokens, lex_error) = lex(text);
        let fixed_order = var_order.is_some();
        Parser {
            tokens,
            pos: 0,
            end: text.len(),
            lex_error,
            vars: var_order.unwrap_or_default(),
            fixed_order,
        }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn error(&self, expected: &[&str]) -> Error {
        if self.pos >= self.tokens.len() {
            if let Some(e) = &self.lex_error {
                return e.clone();
            }
        }
        Error::Syntax {
            offset: self.offset(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn eat(&mut self, tok: &Token) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_end(&self) -> Result<()> {
        if self.pos < self.tokens.len() || self.lex_error.is_some() {
            Err(self.error(&["operator", "end of input"]))
        } else {
            Ok(())
        }
    }

    fn formula(&mut self) -> Result<Expr> {
        let mut lhs = self.implication()?;
        while self.eat(&Token::Iff) {
            let rhs = self.implication()?;
            lhs = Expr::binary(BinaryOp::Iff, lhs, rhs);
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<Expr> {
        let lhs = self.left_assoc(0)?;
        if self.eat(&Token::Implies) {
            let rhs = self.implication()?;
            Ok(Expr::binary(BinaryOp::Implies, lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    /// Levels 0..3 are `|`, `^`, `&`, then unary.
    fn left_assoc(&mut self, level: usize) -> Result<Expr> {
        const LEVELS: [(Token, BinaryOp); 3] = [
            (Token::Or, BinaryOp::Or),
            (Token::Xor, BinaryOp::Xor),
            (Token::And, BinaryOp::And),
        ];
        if level == LEVELS.len() {
            return self.unary();
        }
        let (tok, op) = &LEVELS[level];
        let mut lhs = self.left_assoc(level + 1)?;
        while self.eat(tok) {
            let rhs = self.left_assoc(level + 1)?;
            lhs = Expr::binary(*op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(&Token::Not) {
            return Ok(Expr::not(self.unary()?));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr> {
        let tok = match self.peek() {
            Some(t) => t.clone(),
            None => return Err(self.error(&["identifier", "0", "1", "(", "!"])),
        };
        match tok {
            Token::Ident(name) => {
                self.pos += 1;
                Ok(Expr::Var(self.var_index(&name)?))
            }
            Token::Zero => {
                self.pos += 1;
                Ok(Expr::Const(false))
            }
            Token::One => {
                self.pos += 1;
                Ok(Expr::Const(true))
            }
            Token::LParen => {
                self.pos += 1;
                let e = self.formula()?;
                if !self.eat(&Token::RParen) {
                    return Err(self.error(&[")"]));
                }
                Ok(e)
            }
            _ => Err(self.error(&["identifier", "0", "1", "(", "!"])),
        }
    }

    fn var_index(&mut self, name: &str) -> Result<usize> {
        if let Some(i) = self.vars.iter().position(|v| v == name) {
            return Ok(i);
        }
        if self.fixed_order {
            return Err(Error::UnknownVariable(name.to_string()));
        }
        self.vars.push(name.to_string());
        Ok(self.vars.len() - 1)
    }
}

fn lex(text: &str) -> (Vec<(usize, Token)>, Option<Error>) {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'!' => Token::Not,
            b'&' => Token::And,
            b'|' => Token::Or,
            b'^' => Token::Xor,
            b'(' => Token::LParen,
            b')' => Token::RParen,
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Token::Implies
            }
            b'<' if bytes.get(i + 1) == Some(&b'-') && bytes.get(i + 2) == Some(&b'>') => {
                i += 2;
                Token::Iff
            }
            b'0' | b'1' if !bytes.get(i + 1).is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_') => {
                if c == b'0' {
                    Token::Zero
                } else {
                    Token::One
                }
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i + 1 < bytes.len() && (bytes[i + 1].is_ascii_alphanumeric() || bytes[i + 1] == b'_') {
                    i += 1;
                }
                Token::Ident(text[start..=i].to_string())
            }
            _ => {
                let err = Error::Syntax {
                    offset: start,
                    expected: vec!["token".to_string()],
                };
                return (out, Some(err));
            }
        };
        out.push((start, tok));
        i += 1;
    }
    (out, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worlds(f: &Formula) -> Vec<u64> {
        f.possible_worlds(&Limits::default())
            .unwrap()
            .into_iter()
            .map(|w| w.0)
            .collect()
    }

    #[test]
    fn parses_traffic_light() {
        let f = Formula::parse("!r | !g").unwrap();
        assert_eq!(f.vars(), ["r", "g"]);
        assert_eq!(f.n(), 2);
        assert!(!f.eval_world(World(0b11)));
        assert!(f.eval_world(World(0b00)));
        assert_eq!(worlds(&f), vec![0b00, 0b01, 0b10]);
    }

    #[test]
    fn parses_xor() {
        let f = Formula::parse("(a & !b) | (!a & b)").unwrap();
        assert_eq!(f.n(), 2);
        assert_eq!(worlds(&f), vec![0b01, 0b10]);
    }

    #[test]
    fn syntax_error_at_end_of_input() {
        match Formula::parse("a & (b |") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 8),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(Formula::parse("a $ b"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(Formula::parse("a b"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(Formula::parse(""), Err(Error::Syntax { offset: 0, .. })));
    }

    #[test]
    fn tautology_and_contradiction() {
        let t = Formula::parse("a <-> a").unwrap();
        assert!((0..2).all(|w| t.eval_world(World(w))));
        let c = Formula::parse("a & !a").unwrap();
        assert!(worlds(&c).is_empty());
    }

    #[test]
    fn constants_need_a_variable() {
        assert_eq!(Formula::parse("1 | 0"), Err(Error::NoVariables));
        let f = Formula::parse("x | 0").unwrap();
        assert_eq!(worlds(&f), vec![1]);
    }

    #[test]
    fn precedence_and_associativity() {
        // ! > & > ^ > | > -> > <->
        let f = Formula::parse("a | b & c").unwrap();
        assert_eq!(f.to_string(), "a | b & c");
        assert!(f.eval_world(World(0b001)));
        let imp = Formula::parse("a -> b -> c").unwrap();
        // right associative: a -> (b -> c); false only for a=1,b=1,c=0
        let falsifying: Vec<u64> = (0..8).filter(|&w| !imp.eval_world(World(w))).collect();
        assert_eq!(falsifying, vec![0b011]);
        let x = Formula::parse("a ^ b | c").unwrap();
        assert_eq!(x.to_string(), "a ^ b | c");
        assert!(matches!(x.expr(), Expr::Binary(BinaryOp::Or, _, _)));
    }

    #[test]
    fn explicit_variable_order() {
        let order = vec!["g".to_string(), "r".to_string()];
        let f = Formula::parse_with_order("!r | !g", Some(&order)).unwrap();
        assert_eq!(f.vars(), ["g", "r"]);
        let missing = vec!["r".to_string()];
        assert_eq!(
            Formula::parse_with_order("!r | !g", Some(&missing)),
            Err(Error::UnknownVariable("g".into()))
        );
    }

    #[test]
    fn partial_assignment_cover() {
        let pa = PartialAssignment::from_pattern("0*").unwrap();
        let cover: Vec<u64> = pa.cover(2).map(|w| w.0).collect();
        assert_eq!(cover, vec![0b00, 0b10]);
        assert_eq!(pa.pattern(2), "0*");
        assert_eq!(PartialAssignment::empty().cover(3).count(), 8);
        assert!(PartialAssignment::new(0b10, 0b01).is_err());
        let vars = vec!["b".to_string(), "c".to_string()];
        assert_eq!(PartialAssignment::from_pattern("10").unwrap().literals(&vars), "b & !c");
    }

    #[test]
    fn mnist_addition_small() {
        let f = mnist_add_formula(3, 2).unwrap();
        assert_eq!(f.n(), 6);
        // Brute force: decode each possible world into its digit pair.
        let mut pairs: Vec<(usize, usize)> = worlds(&f)
            .into_iter()
            .map(|w| {
                let d1 = (0..3).find(|&j| w >> j & 1 == 1).unwrap();
                let d2 = (0..3).find(|&k| w >> (3 + k) & 1 == 1).unwrap();
                (d1, d2)
            })
            .collect();
        pairs.sort();
        assert_eq!(pairs, vec![(0, 2), (1, 1), (2, 0)]);

        let f = mnist_add_formula(2, 0).unwrap();
        assert_eq!(worlds(&f), vec![0b0101]);
        assert!(matches!(mnist_add_formula(3, 5), Err(Error::InvalidRange(_))));
        assert!(matches!(mnist_add_formula(1, 0), Err(Error::InvalidRange(_))));
    }

    #[test]
    fn mnist_addition_full_size_enumerates() {
        let f = mnist_add_formula(10, 9).unwrap();
        assert_eq!(f.n(), 20);
        assert_eq!(worlds(&f).len(), 10);
        let tight = Limits {
            max_vars: 19,
            ..Limits::default()
        };
        assert!(matches!(f.possible_worlds(&tight), Err(Error::LimitExceeded { .. })));
    }
}
