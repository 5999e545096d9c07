//! Arithmetic expression trees over instance features.
//!
//! An [`Expr`] maps a vector of named instance features (such as the bit
//! count `n`) to a single real value. Trees evolved by the tuner use the
//! operators `+ - * /` and the terminal set `{1, 2, -1, -2}` plus the
//! feature names of the problem being tuned; budget formulas additionally
//! allow `^`, `ln(..)` and the named constant `e`. The [`Dialect`] enum
//! selects which of the two languages applies.
//!
//! # Grammar
//!
//! Both dialects share one infix grammar (whitespace insignificant):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := atom ['^' atom]                  (budget dialect only)
//! atom   := '-' atom | number | ident | 'ln' '(' expr ')' | '(' expr ')'
//! ```
//!
//! `ln`, `^` and the constant `e` are rejected in the `gp` dialect. Unary
//! minus binds to the atom (so `-1^m` is `(-1)^m`) and folds into numeric
//! literals at parse time.
//!
//! # Protected evaluation
//!
//! Evaluation is total on finite inputs: any operation whose result would
//! be non-finite (division by zero, overflow, `ln` of a non-positive
//! value) evaluates to `1` instead, the classic protected-division
//! convention extended to every operator. [`Expr::eval`] therefore never
//! returns NaN or an infinity.
//!
//! Expressions are immutable once built and freely shareable across
//! threads; the variation operators in this module take an explicit
//! [`RandomStream`](crate::rng::RandomStream) so parallel callers can use
//! independent streams.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

mod parse;
mod variation;

pub use parse::{ParseError, ParseErrorKind};
pub use variation::{crossover, mutate, random_tree, InitMethod, TerminalSet};

/// The named constant `e` admitted by the budget dialect.
pub const EULER: f64 = 2.718281828459045;

/// Binary operators. `Pow` is only valid in the budget dialect.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

/// Expression language variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dialect {
    /// Evolved parameter expressions: `+ - * /`, numeric constants and
    /// feature terminals only.
    Gp,
    /// Budget formulas: additionally `^`, `ln(..)` and the constant `e`.
    Budget,
}

/// An arithmetic expression tree.
#[derive(Clone, Debug)]
pub enum Expr {
    /// A numeric constant (always finite).
    Const(f64),
    /// A named instance feature, bound at evaluation time.
    Feature(String),
    /// A binary operation.
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// Natural logarithm (budget dialect only).
    Ln(Box<Expr>),
}

/// Feature bindings for one problem instance: one row of the
/// instance-by-feature value matrix.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeatureEnv {
    bindings: Vec<(String, f64)>,
}

impl FeatureEnv {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds an environment from name/value pairs.
    pub fn from_pairs<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut env = Self::new();
        for (name, value) in pairs {
            env.bind(name, value);
        }
        env
    }

    /// Binds `name` to `value`, replacing any previous binding.
    ///
    /// Values must be finite.
    pub fn bind(&mut self, name: impl Into<String>, value: f64) {
        debug_assert!(value.is_finite(), "feature values must be finite");
        let name = name.into();
        match self.bindings.binary_search_by(|(k, _)| k.as_str().cmp(&name)) {
            Ok(i) => self.bindings[i].1 = value,
            Err(i) => self.bindings.insert(i, (name, value)),
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.bindings
            .binary_search_by(|(k, _)| k.as_str().cmp(name))
            .ok()
            .map(|i| self.bindings[i].1)
    }

    /// Bound names in sorted order.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.bindings.iter().map(|(k, _)| k.as_str())
    }

    /// Name/value pairs in sorted name order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.bindings.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// Evaluation failure: the tree referenced a feature the environment does
/// not bind.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnboundFeature {
    pub name: String,
}

impl fmt::Display for UnboundFeature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unbound feature `{}`", self.name)
    }
}

impl core::error::Error for UnboundFeature {}

fn protect(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        1.0
    }
}

fn apply_op(op: BinOp, lhs: f64, rhs: f64) -> f64 {
    let raw = match op {
        BinOp::Add => lhs + rhs,
        BinOp::Sub => lhs - rhs,
        BinOp::Mul => lhs * rhs,
        BinOp::Div => lhs / rhs,
        BinOp::Pow => libm::pow(lhs, rhs),
    };
    protect(raw)
}

impl Expr {
    pub fn constant(value: f64) -> Self {
        debug_assert!(value.is_finite());
        Expr::Const(value)
    }

    pub fn feature(name: impl Into<String>) -> Self {
        Expr::Feature(name.into())
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn ln(inner: Expr) -> Self {
        Expr::Ln(Box::new(inner))
    }

    /// Parses infix text in the given dialect.
    pub fn parse(text: &str, dialect: Dialect) -> Result<Self, ParseError> {
        parse::parse(text, dialect)
    }

    /// Evaluates the tree under `env` with protected semantics (see the
    /// module docs); the result is always finite.
    pub fn eval(&self, env: &FeatureEnv) -> Result<f64, UnboundFeature> {
        Ok(match self {
            Expr::Const(v) => protect(*v),
            Expr::Feature(name) => env.get(name).ok_or_else(|| UnboundFeature {
                name: name.clone(),
            })?,
            Expr::Binary(op, lhs, rhs) => apply_op(*op, lhs.eval(env)?, rhs.eval(env)?),
            Expr::Ln(inner) => protect(libm::log(inner.eval(env)?)),
        })
    }

    /// Total node count.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Feature(_) => 1,
            Expr::Binary(_, lhs, rhs) => 1 + lhs.size() + rhs.size(),
            Expr::Ln(inner) => 1 + inner.size(),
        }
    }

    /// Tree depth; a single terminal has depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Feature(_) => 1,
            Expr::Binary(_, lhs, rhs) => 1 + lhs.depth().max(rhs.depth()),
            Expr::Ln(inner) => 1 + inner.depth(),
        }
    }

    /// Whether the tree stays within `dialect`.
    pub fn in_dialect(&self, dialect: Dialect) -> bool {
        match self {
            Expr::Const(_) | Expr::Feature(_) => true,
            Expr::Binary(BinOp::Pow, ..) | Expr::Ln(_) => dialect == Dialect::Budget,
            Expr::Binary(_, lhs, rhs) => lhs.in_dialect(dialect) && rhs.in_dialect(dialect),
        }
    }

    /// The set of feature names referenced anywhere in the tree.
    pub fn features(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_features(&mut out);
        out
    }

    fn collect_features<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Expr::Const(_) => {}
            Expr::Feature(name) => {
                out.insert(name.as_str());
            }
            Expr::Binary(_, lhs, rhs) => {
                lhs.collect_features(out);
                rhs.collect_features(out);
            }
            Expr::Ln(inner) => inner.collect_features(out),
        }
    }

    /// Immutable access to the `index`-th node in preorder (root is 0).
    pub fn subtree(&self, index: usize) -> Option<&Expr> {
        let mut remaining = index;
        self.subtree_walk(&mut remaining)
    }

    fn subtree_walk(&self, remaining: &mut usize) -> Option<&Expr> {
        if *remaining == 0 {
            return Some(self);
        }
        *remaining -= 1;
        match self {
            Expr::Const(_) | Expr::Feature(_) => None,
            Expr::Binary(_, lhs, rhs) => lhs
                .subtree_walk(remaining)
                .or_else(|| rhs.subtree_walk(remaining)),
            Expr::Ln(inner) => inner.subtree_walk(remaining),
        }
    }

    /// Depth (root = 1) at which preorder node `index` sits.
    pub fn node_depth(&self, index: usize) -> Option<usize> {
        let mut remaining = index;
        self.node_depth_walk(&mut remaining, 1)
    }

    fn node_depth_walk(&self, remaining: &mut usize, depth: usize) -> Option<usize> {
        if *remaining == 0 {
            return Some(depth);
        }
        *remaining -= 1;
        match self {
            Expr::Const(_) | Expr::Feature(_) => None,
            Expr::Binary(_, lhs, rhs) => lhs
                .node_depth_walk(remaining, depth + 1)
                .or_else(|| rhs.node_depth_walk(remaining, depth + 1)),
            Expr::Ln(inner) => inner.node_depth_walk(remaining, depth + 1),
        }
    }

    /// Replaces the `index`-th preorder node with `replacement`; returns
    /// false (tree unchanged) if the index is out of range.
    pub fn replace_subtree(&mut self, index: usize, replacement: Expr) -> bool {
        let mut slot = Some(replacement);
        let mut remaining = index;
        self.replace_walk(&mut remaining, &mut slot);
        slot.is_none()
    }

    fn replace_walk(&mut self, remaining: &mut usize, slot: &mut Option<Expr>) {
        if slot.is_none() {
            return;
        }
        if *remaining == 0 {
            *self = slot.take().expect("slot checked above");
            return;
        }
        *remaining -= 1;
        match self {
            Expr::Const(_) | Expr::Feature(_) => {}
            Expr::Binary(_, lhs, rhs) => {
                lhs.replace_walk(remaining, slot);
                rhs.replace_walk(remaining, slot);
            }
            Expr::Ln(inner) => inner.replace_walk(remaining, slot),
        }
    }

    fn is_const_eq(&self, value: f64) -> bool {
        matches!(self, Expr::Const(v) if *v == value)
    }

    /// Rewrites the tree into its canonical form: constants folded (with
    /// protected semantics), identities `x+0`, `x-0`, `x*1`, `x/1` and
    /// `0*x` eliminated, and operands of the commutative operators ordered
    /// constants-first. Canonicalization is idempotent and preserves the
    /// evaluated value on every environment.
    pub fn canonicalize(&self) -> Expr {
        match self {
            Expr::Const(v) => Expr::Const(protect(*v)),
            Expr::Feature(name) => Expr::Feature(name.clone()),
            Expr::Ln(inner) => {
                let inner = inner.canonicalize();
                if let Expr::Const(v) = inner {
                    Expr::Const(protect(libm::log(v)))
                } else {
                    Expr::ln(inner)
                }
            }
            Expr::Binary(op, lhs, rhs) => {
                let lhs = lhs.canonicalize();
                let rhs = rhs.canonicalize();
                if let (Expr::Const(a), Expr::Const(b)) = (&lhs, &rhs) {
                    return Expr::Const(apply_op(*op, *a, *b));
                }
                match op {
                    BinOp::Add => {
                        if lhs.is_const_eq(0.0) {
                            return rhs;
                        }
                        if rhs.is_const_eq(0.0) {
                            return lhs;
                        }
                    }
                    BinOp::Sub => {
                        if rhs.is_const_eq(0.0) {
                            return lhs;
                        }
                    }
                    BinOp::Mul => {
                        if lhs.is_const_eq(0.0) || rhs.is_const_eq(0.0) {
                            return Expr::Const(0.0);
                        }
                        if lhs.is_const_eq(1.0) {
                            return rhs;
                        }
                        if rhs.is_const_eq(1.0) {
                            return lhs;
                        }
                    }
                    BinOp::Div => {
                        if rhs.is_const_eq(1.0) {
                            return lhs;
                        }
                    }
                    BinOp::Pow => {}
                }
                let commutative = matches!(op, BinOp::Add | BinOp::Mul);
                if commutative && lhs.cmp(&rhs) == Ordering::Greater {
                    Expr::binary(*op, rhs, lhs)
                } else {
                    Expr::binary(*op, lhs, rhs)
                }
            }
        }
    }

    /// Reporting form for integer-valued parameters: every non-integer
    /// constant is replaced by its floor (e.g. `3/2` becomes `1`). Expects
    /// and returns canonical trees.
    pub fn to_rls_form(&self) -> Expr {
        fn floor_consts(e: &Expr) -> Expr {
            match e {
                Expr::Const(v) => {
                    let t = libm::trunc(*v);
                    if t == *v {
                        Expr::Const(*v)
                    } else {
                        Expr::Const(libm::floor(*v))
                    }
                }
                Expr::Feature(name) => Expr::Feature(name.clone()),
                Expr::Binary(op, lhs, rhs) => {
                    Expr::binary(*op, floor_consts(lhs), floor_consts(rhs))
                }
                Expr::Ln(inner) => Expr::ln(floor_consts(inner)),
            }
        }
        floor_consts(&self.canonicalize()).canonicalize()
    }

    /// Reporting form for rate-valued parameters: additive constant terms
    /// next to non-constant terms are dropped (`1/(n+1)` becomes `1/n`,
    /// `n-2` becomes `n`); pure-constant expressions are unchanged.
    /// Expects and returns canonical trees.
    pub fn to_ea_form(&self) -> Expr {
        fn drop_additive_consts(e: &Expr) -> Expr {
            match e {
                Expr::Const(_) | Expr::Feature(_) => e.clone(),
                Expr::Ln(inner) => Expr::ln(drop_additive_consts(inner)),
                Expr::Binary(op, lhs, rhs) => {
                    let lhs = drop_additive_consts(lhs);
                    let rhs = drop_additive_consts(rhs);
                    match op {
                        BinOp::Add => match (&lhs, &rhs) {
                            (Expr::Const(_), other) if !matches!(other, Expr::Const(_)) => {
                                return other.clone()
                            }
                            (other, Expr::Const(_)) if !matches!(other, Expr::Const(_)) => {
                                return other.clone()
                            }
                            _ => {}
                        },
                        BinOp::Sub => {
                            // x - c drops the constant; c - x keeps its
                            // shape (the sign of x would flip otherwise).
                            if matches!(rhs, Expr::Const(_)) && !matches!(lhs, Expr::Const(_)) {
                                return lhs;
                            }
                        }
                        _ => {}
                    }
                    Expr::binary(*op, lhs, rhs)
                }
            }
        }
        drop_additive_consts(&self.canonicalize()).canonicalize()
    }
}

fn kind_rank(e: &Expr) -> u8 {
    match e {
        Expr::Const(_) => 0,
        Expr::Feature(_) => 1,
        Expr::Binary(..) => 2,
        Expr::Ln(_) => 3,
    }
}

/// Total structural order: constants before features before compound
/// trees, then lexicographic. This is the order behind commutative operand
/// sorting and frequency tallies.
impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        match kind_rank(self).cmp(&kind_rank(other)) {
            Ordering::Equal => {}
            ord => return ord,
        }
        match (self, other) {
            (Expr::Const(a), Expr::Const(b)) => a.total_cmp(b),
            (Expr::Feature(a), Expr::Feature(b)) => a.cmp(b),
            (Expr::Binary(op_a, la, ra), Expr::Binary(op_b, lb, rb)) => op_a
                .cmp(op_b)
                .then_with(|| la.cmp(lb))
                .then_with(|| ra.cmp(rb)),
            (Expr::Ln(a), Expr::Ln(b)) => a.cmp(b),
            _ => unreachable!("kind ranks matched"),
        }
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Expr {}

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_POW: u8 = 3;
const PREC_ATOM: u8 = 4;

fn op_prec(op: BinOp) -> u8 {
    match op {
        BinOp::Add | BinOp::Sub => PREC_ADD,
        BinOp::Mul | BinOp::Div => PREC_MUL,
        BinOp::Pow => PREC_POW,
    }
}

fn fmt_expr(e: &Expr, min_prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Const(v) => write!(f, "{v}"),
        Expr::Feature(name) => f.write_str(name),
        Expr::Ln(inner) => {
            f.write_str("ln(")?;
            fmt_expr(inner, 0, f)?;
            f.write_str(")")
        }
        Expr::Binary(op, lhs, rhs) => {
            let prec = op_prec(*op);
            let parens = prec < min_prec;
            if parens {
                f.write_str("(")?;
            }
            // All operators print left-associatively, so the right operand
            // needs strictly higher precedence to round-trip structurally.
            let (lhs_min, rhs_min) = if *op == BinOp::Pow {
                (PREC_ATOM, PREC_ATOM)
            } else {
                (prec, prec + 1)
            };
            fmt_expr(lhs, lhs_min, f)?;
            if prec == PREC_ADD {
                write!(f, " {} ", op.symbol())?;
            } else {
                f.write_str(op.symbol())?;
            }
            fmt_expr(rhs, rhs_min, f)?;
            if parens {
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}

/// Infix rendering with minimal parentheses; `parse` of the output yields
/// a structurally identical tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_expr(self, 0, f)
    }
}

/// Convenience: evaluates a budget expression and floors it to a whole
/// number of fitness evaluations.
pub fn eval_budget(budget: &Expr, env: &FeatureEnv) -> Result<f64, UnboundFeature> {
    Ok(libm::floor(budget.eval(env)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::borrow::ToOwned;
    use alloc::string::ToString;

    fn env(pairs: &[(&str, f64)]) -> FeatureEnv {
        FeatureEnv::from_pairs(pairs.iter().map(|&(k, v)| (k.to_owned(), v)))
    }

    fn gp(text: &str) -> Expr {
        Expr::parse(text, Dialect::Gp).expect(text)
    }

    fn budget(text: &str) -> Expr {
        Expr::parse(text, Dialect::Budget).expect(text)
    }

    #[test]
    fn eval_direct_arithmetic() {
        assert_eq!(gp("2/n").eval(&env(&[("n", 10.0)])).unwrap(), 0.2);
        assert_eq!(gp("1").eval(&env(&[("n", 500.0)])).unwrap(), 1.0);
        assert_eq!(
            gp("m/n").eval(&env(&[("m", 3.0), ("n", 20.0)])).unwrap(),
            0.15
        );
    }

    #[test]
    fn eval_unbound_feature_names_symbol() {
        let err = gp("m/n").eval(&env(&[("n", 20.0)])).unwrap_err();
        assert_eq!(err.name, "m");
    }

    #[test]
    fn eval_protected_division() {
        // n - n is zero for every n.
        let e = gp("1/(n-n)");
        assert_eq!(e.eval(&env(&[("n", 5.0)])).unwrap(), 1.0);
        let z = gp("(n-n)/(n-n)");
        assert_eq!(z.eval(&env(&[("n", 5.0)])).unwrap(), 1.0);
    }

    #[test]
    fn eval_protected_overflow() {
        let mut e = Expr::feature("n");
        for _ in 0..8 {
            e = Expr::binary(BinOp::Mul, e.clone(), e);
        }
        let v = e.eval(&env(&[("n", 1e300)])).unwrap();
        assert!(v.is_finite());
        assert_eq!(v, 1.0);
    }

    #[test]
    fn eval_protected_ln() {
        assert_eq!(
            budget("ln(n-n)").eval(&env(&[("n", 3.0)])).unwrap(),
            1.0
        );
    }

    #[test]
    fn budget_flooring() {
        let b = budget("2*e*n*ln(n)");
        let v = eval_budget(&b, &env(&[("n", 100.0)])).unwrap();
        assert_eq!(v, 2503.0);
        let p = budget("n^m");
        assert_eq!(
            eval_budget(&p, &env(&[("m", 2.0), ("n", 10.0)])).unwrap(),
            100.0
        );
    }

    #[test]
    fn size_counts_nodes() {
        assert_eq!(gp("n").size(), 1);
        assert_eq!(gp("1/n").size(), 3);
        assert_eq!(gp("(m/n)+1").size(), 5);
    }

    #[test]
    fn structure_of_parsed_tree() {
        let e = gp("1/(n+1)");
        let expected = Expr::binary(
            BinOp::Div,
            Expr::constant(1.0),
            Expr::binary(BinOp::Add, Expr::feature("n"), Expr::constant(1.0)),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn canonicalize_identity_elimination() {
        assert_eq!(gp("n*1").canonicalize(), Expr::feature("n"));
        assert_eq!(gp("1*n").canonicalize(), Expr::feature("n"));
        assert_eq!(gp("n+(1-1)").canonicalize(), Expr::feature("n"));
        assert_eq!(gp("n-(1-1)").canonicalize(), Expr::feature("n"));
        assert_eq!(gp("n/1").canonicalize(), Expr::feature("n"));
        assert_eq!(gp("(1-1)*n").canonicalize(), Expr::constant(0.0));
    }

    #[test]
    fn canonicalize_constant_folding() {
        assert_eq!(gp("2/(1+1)").canonicalize(), Expr::constant(1.0));
        // fold uses protected semantics
        assert_eq!(gp("2/(1-1)").canonicalize(), Expr::constant(1.0));
    }

    #[test]
    fn canonicalize_commutative_order() {
        assert_eq!(gp("n*2").canonicalize(), gp("2*n").canonicalize());
        assert_eq!(gp("n+2").canonicalize(), gp("2+n").canonicalize());
        assert_eq!(gp("n*2").canonicalize().to_string(), "2*n");
    }

    #[test]
    fn canonicalize_idempotent_samples() {
        for text in ["n*1+2*(1+1)", "(n+n)*(2/2)", "1/(n+1)", "2*n*1", "n/(m*1)"] {
            let once = gp(text).canonicalize();
            assert_eq!(once.canonicalize(), once, "{text}");
        }
    }

    #[test]
    fn rls_form_floors_constant_subtrees() {
        assert_eq!(gp("3/2").to_rls_form(), Expr::constant(1.0));
        assert_eq!(gp("m").to_rls_form(), Expr::feature("m"));
        // Constant leaves are integers already; symbolic structure untouched.
        let e = gp("2*m/4");
        assert_eq!(e.to_rls_form(), e.canonicalize());
        // Floored constants re-simplify.
        let half = Expr::binary(BinOp::Mul, Expr::constant(1.5), Expr::feature("n"));
        assert_eq!(half.to_rls_form(), Expr::feature("n"));
    }

    #[test]
    fn ea_form_drops_additive_constants() {
        assert_eq!(gp("1/(n+1)").to_ea_form(), gp("1/n"));
        assert_eq!(gp("2/n").to_ea_form(), gp("2/n"));
        assert_eq!(gp("1/(n-2)").to_ea_form(), gp("1/n"));
        // Pure constants survive.
        assert_eq!(gp("1+2").to_ea_form(), Expr::constant(3.0));
        // Nested additive constants are pruned recursively.
        assert_eq!(gp("1/((n+1)+2)").to_ea_form(), gp("1/n"));
    }

    #[test]
    fn display_examples() {
        assert_eq!(gp("2/n").to_string(), "2/n");
        assert_eq!(
            Expr::binary(BinOp::Add, Expr::feature("n"), Expr::constant(1.0)).to_string(),
            "n + 1"
        );
        assert_eq!(budget("2*e*n*ln(n)").to_string(), "2*2.718281828459045*n*ln(n)");
    }

    #[test]
    fn display_preserves_structure_over_associativity() {
        let right = Expr::binary(
            BinOp::Add,
            Expr::feature("n"),
            Expr::binary(BinOp::Add, Expr::constant(1.0), Expr::constant(2.0)),
        );
        assert_eq!(right.to_string(), "n + (1 + 2)");
        assert_eq!(Expr::parse(&right.to_string(), Dialect::Gp).unwrap(), right);
        let left = gp("n + 1 + 2");
        assert_eq!(left.to_string(), "n + 1 + 2");
        assert_ne!(left, right);
    }

    #[test]
    fn features_collects_names() {
        let e = gp("m/(n+m)");
        let names: Vec<&str> = e.features().into_iter().collect();
        assert_eq!(names, ["m", "n"]);
    }

    #[test]
    fn dialect_checks() {
        assert!(gp("1/(n+1)").in_dialect(Dialect::Gp));
        assert!(!budget("n^m").in_dialect(Dialect::Gp));
        assert!(budget("n^m").in_dialect(Dialect::Budget));
    }

    #[test]
    fn subtree_access_is_preorder() {
        let e = gp("1/n");
        assert_eq!(e.subtree(0), Some(&e));
        assert_eq!(e.subtree(1), Some(&Expr::constant(1.0)));
        assert_eq!(e.subtree(2), Some(&Expr::feature("n")));
        assert_eq!(e.subtree(3), None);
        assert_eq!(e.node_depth(0), Some(1));
        assert_eq!(e.node_depth(2), Some(2));
    }

    #[test]
    fn replace_subtree_swaps_node() {
        let mut e = gp("1/n");
        assert!(e.replace_subtree(2, Expr::constant(2.0)));
        assert_eq!(e, gp("1/2"));
        assert!(!e.replace_subtree(9, Expr::constant(2.0)));
    }
}
