//! Random tree generation.

use rand::Rng;

use crate::evolution::ConfigError;
use crate::expr::{BinaryOp, Expr, Terminal, UnaryOp};

/// Depth limits and leaf bias for tree generation.
///
/// Invariant: `1 <= min_init_depth <= max_init_depth <= hard_max_depth`,
/// and `terminal_probability` is in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthParams {
    min_init_depth: usize,
    max_init_depth: usize,
    hard_max_depth: usize,
    terminal_probability: f64,
}

impl Default for GrowthParams {
    /// Ramped half-and-half over depths 2 to 5, hard limit 8.
    fn default() -> Self {
        GrowthParams {
            min_init_depth: 2,
            max_init_depth: 5,
            hard_max_depth: 8,
            terminal_probability: 0.3,
        }
    }
}

impl GrowthParams {
    pub fn new(
        min_init_depth: usize,
        max_init_depth: usize,
        hard_max_depth: usize,
        terminal_probability: f64,
    ) -> Result<Self, ConfigError> {
        if min_init_depth < 1 {
            return Err(ConfigError::new("min_init_depth must be at least 1"));
        }
        if min_init_depth > max_init_depth {
            return Err(ConfigError::new("min_init_depth exceeds max_init_depth"));
        }
        if max_init_depth > hard_max_depth {
            return Err(ConfigError::new("max_init_depth exceeds hard_max_depth"));
        }
        if !(0.0..=1.0).contains(&terminal_probability) {
            return Err(ConfigError::new("terminal_probability must lie in [0, 1]"));
        }
        Ok(GrowthParams {
            min_init_depth,
            max_init_depth,
            hard_max_depth,
            terminal_probability,
        })
    }

    pub fn min_init_depth(&self) -> usize {
        self.min_init_depth
    }

    pub fn max_init_depth(&self) -> usize {
        self.max_init_depth
    }

    pub fn hard_max_depth(&self) -> usize {
        self.hard_max_depth
    }

    pub fn terminal_probability(&self) -> f64 {
        self.terminal_probability
    }
}

/// Grows a tree by ramped half-and-half: the target depth is uniform in
/// `[min_init_depth, max_init_depth]` and the tree is built by the "full"
/// or "grow" method with equal probability.
pub fn random_expression<R: Rng + ?Sized>(params: &GrowthParams, rng: &mut R) -> Expr {
    let depth = rng.random_range(params.min_init_depth..=params.max_init_depth);
    if rng.random_bool(0.5) {
        full(depth, rng)
    } else {
        grow(depth, params.terminal_probability, true, rng)
    }
}

/// Every branch reaches exactly `depth`.
fn full<R: Rng + ?Sized>(depth: usize, rng: &mut R) -> Expr {
    if depth <= 1 {
        return Expr::Leaf(random_terminal(rng));
    }
    random_node(rng, |rng| full(depth - 1, rng))
}

/// Branches stop early with `terminal_probability`; depth is at most
/// `max_depth`. With `operator_root` the root is an operator whenever there
/// is room for one.
pub(crate) fn grow<R: Rng + ?Sized>(
    max_depth: usize,
    terminal_probability: f64,
    operator_root: bool,
    rng: &mut R,
) -> Expr {
    let leaf = max_depth <= 1 || (!operator_root && rng.random_bool(terminal_probability));
    if leaf {
        return Expr::Leaf(random_terminal(rng));
    }
    random_node(rng, |rng| grow(max_depth - 1, terminal_probability, false, rng))
}

fn random_node<R: Rng + ?Sized>(rng: &mut R, mut child: impl FnMut(&mut R) -> Expr) -> Expr {
    let pick = rng.random_range(0..BinaryOp::ALL.len() + UnaryOp::ALL.len());
    match BinaryOp::ALL.get(pick) {
        Some(&op) => {
            let lhs = child(rng);
            Expr::binary(op, lhs, child(rng))
        }
        None => Expr::unary(UnaryOp::ALL[pick - BinaryOp::ALL.len()], child(rng)),
    }
}

/// Uniform over the five terminal kinds; constants uniform in `[-1, 1)`.
pub(crate) fn random_terminal<R: Rng + ?Sized>(rng: &mut R) -> Terminal {
    match rng.random_range(0..Terminal::KIND_COUNT) {
        0 => Terminal::Constant(rng.random_range(-1.0..1.0)),
        1 => Terminal::X,
        2 => Terminal::Y,
        3 => Terminal::Z,
        _ => Terminal::Time,
    }
}
