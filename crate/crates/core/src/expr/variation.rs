//! Tree initialization and genetic variation operators.

use alloc::string::String;
use alloc::vec::Vec;
use rand::Rng;

use super::{BinOp, Expr};
use crate::rng::RandomStream;

/// Constants every evolved tree may use as leaves.
pub const GP_CONSTANTS: [f64; 4] = [1.0, 2.0, -1.0, -2.0];

const GP_OPERATORS: [BinOp; 4] = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div];

/// Classic tree generators: `Full` puts every leaf at the maximum depth,
/// `Grow` allows ragged shapes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitMethod {
    Grow,
    Full,
}

/// The terminal alphabet for evolved trees: the fixed constants plus the
/// feature names of the problem being tuned.
#[derive(Clone, Debug)]
pub struct TerminalSet {
    features: Vec<String>,
}

impl TerminalSet {
    pub fn new<I, S>(features: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            features: features.into_iter().map(Into::into).collect(),
        }
    }

    /// Number of distinct terminals (constants plus features).
    pub fn len(&self) -> usize {
        GP_CONSTANTS.len() + self.features.len()
    }

    /// Draws one terminal uniformly.
    pub fn sample(&self, rng: &mut RandomStream) -> Expr {
        let i = rng.random_range(0..self.len());
        if i < GP_CONSTANTS.len() {
            Expr::Const(GP_CONSTANTS[i])
        } else {
            Expr::Feature(self.features[i - GP_CONSTANTS.len()].clone())
        }
    }
}

fn sample_op(rng: &mut RandomStream) -> BinOp {
    GP_OPERATORS[rng.random_range(0..GP_OPERATORS.len())]
}

/// Generates a random tree of depth at most `max_depth` (exactly
/// `max_depth` to every leaf for [`InitMethod::Full`]). Terminals are
/// drawn uniformly from the terminal set and operators uniformly from
/// `{+, -, *, /}`.
pub fn random_tree(
    method: InitMethod,
    max_depth: usize,
    terminals: &TerminalSet,
    rng: &mut RandomStream,
) -> Expr {
    debug_assert!(max_depth >= 1);
    grow_at(method, 1, max_depth.max(1), terminals, rng)
}

fn grow_at(
    method: InitMethod,
    depth: usize,
    max_depth: usize,
    terminals: &TerminalSet,
    rng: &mut RandomStream,
) -> Expr {
    let make_leaf = if depth >= max_depth {
        true
    } else {
        match method {
            InitMethod::Full => false,
            // grow picks uniformly from the combined primitive set
            InitMethod::Grow => {
                rng.random_range(0..terminals.len() + GP_OPERATORS.len()) < terminals.len()
            }
        }
    };
    if make_leaf {
        terminals.sample(rng)
    } else {
        let op = sample_op(rng);
        let lhs = grow_at(method, depth + 1, max_depth, terminals, rng);
        let rhs = grow_at(method, depth + 1, max_depth, terminals, rng);
        Expr::binary(op, lhs, rhs)
    }
}

/// Mutates one uniformly chosen node: a leaf is replaced by a fresh random
/// terminal; an internal node either has its operator resampled or its
/// whole subtree replaced by a small random tree (equal probability).
/// Replacements that would exceed `max_depth` degrade to a terminal, so
/// the depth bound always holds.
pub fn mutate(
    expr: &Expr,
    terminals: &TerminalSet,
    max_depth: usize,
    rng: &mut RandomStream,
) -> Expr {
    let index = rng.random_range(0..expr.size());
    let node = expr.subtree(index).expect("index < size");
    let node_depth = expr.node_depth(index).expect("index < size");
    let replacement = match node {
        Expr::Const(_) | Expr::Feature(_) => terminals.sample(rng),
        Expr::Binary(_, lhs, rhs) => {
            if rng.random_range(0..2) == 0 {
                Expr::binary(sample_op(rng), (**lhs).clone(), (**rhs).clone())
            } else {
                let sub = random_tree(InitMethod::Grow, 2, terminals, rng);
                if node_depth + sub.depth() - 1 > max_depth {
                    terminals.sample(rng)
                } else {
                    sub
                }
            }
        }
        // Ln never occurs in evolved trees; treat like a leaf for totality.
        Expr::Ln(_) => terminals.sample(rng),
    };
    let mut out = expr.clone();
    out.replace_subtree(index, replacement);
    out
}

/// Sub-tree gluing crossover: a uniformly chosen subtree of a copy of `a`
/// is replaced by a uniformly chosen subtree of `b`. Offspring deeper than
/// `max_depth` are rejected and redrawn up to five times, after which a
/// copy of `a` is returned.
pub fn crossover(a: &Expr, b: &Expr, max_depth: usize, rng: &mut RandomStream) -> Expr {
    for _ in 0..5 {
        let target = rng.random_range(0..a.size());
        let donor = rng.random_range(0..b.size());
        let graft = b.subtree(donor).expect("index < size").clone();
        let mut child = a.clone();
        child.replace_subtree(target, graft);
        if child.depth() <= max_depth {
            return child;
        }
    }
    a.clone()
}
