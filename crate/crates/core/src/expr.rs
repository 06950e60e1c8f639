//! Expression trees: the genome.

use alloc::boxed::Box;
use core::hash::{Hash, Hasher};

/// Operators of arity two.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Operators of arity one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnaryOp {
    Neg,
    Ceil,
    Floor,
    Sqrt,
    Log,
    Sin,
    Cos,
}

impl BinaryOp {
    pub const ALL: [BinaryOp; 4] = [BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div];

    pub fn name(self) -> &'static str {
        match self {
            BinaryOp::Add => "add",
            BinaryOp::Sub => "sub",
            BinaryOp::Mul => "mul",
            BinaryOp::Div => "div",
        }
    }

    /// Infix symbol used by the shader emitter.
    pub fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
        }
    }

    pub fn apply(self, lhs: f64, rhs: f64) -> f64 {
        match self {
            BinaryOp::Add => lhs + rhs,
            BinaryOp::Sub => lhs - rhs,
            BinaryOp::Mul => lhs * rhs,
            BinaryOp::Div => lhs / rhs,
        }
    }
}

impl UnaryOp {
    pub const ALL: [UnaryOp; 7] = [
        UnaryOp::Neg,
        UnaryOp::Ceil,
        UnaryOp::Floor,
        UnaryOp::Sqrt,
        UnaryOp::Log,
        UnaryOp::Sin,
        UnaryOp::Cos,
    ];

    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "neg",
            UnaryOp::Ceil => "ceil",
            UnaryOp::Floor => "floor",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Log => "log",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
        }
    }

    /// Raw IEEE semantics; `log` is the natural logarithm, as in GLSL.
    pub fn apply(self, v: f64) -> f64 {
        match self {
            UnaryOp::Neg => -v,
            UnaryOp::Ceil => libm::ceil(v),
            UnaryOp::Floor => libm::floor(v),
            UnaryOp::Sqrt => libm::sqrt(v),
            UnaryOp::Log => libm::log(v),
            UnaryOp::Sin => libm::sin(v),
            UnaryOp::Cos => libm::cos(v),
        }
    }
}

/// One of the eleven internal-node kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operator {
    Unary(UnaryOp),
    Binary(BinaryOp),
}

impl Operator {
    pub const COUNT: usize = 11;

    pub fn all() -> impl Iterator<Item = Operator> {
        BinaryOp::ALL
            .into_iter()
            .map(Operator::Binary)
            .chain(UnaryOp::ALL.into_iter().map(Operator::Unary))
    }

    pub fn arity(self) -> usize {
        match self {
            Operator::Unary(_) => 1,
            Operator::Binary(_) => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Operator::Unary(op) => op.name(),
            Operator::Binary(op) => op.name(),
        }
    }

    pub fn from_name(name: &str) -> Option<Operator> {
        Operator::all().find(|op| op.name() == name)
    }
}

/// Leaf of an expression tree.
#[derive(Clone, Copy, Debug)]
pub enum Terminal {
    Constant(f64),
    X,
    Y,
    Z,
    Time,
}

impl Terminal {
    /// Number of terminal kinds (constants count as one kind).
    pub const KIND_COUNT: usize = 5;

    /// Index of this terminal's kind in `[constant, x, y, z, time]`.
    pub fn kind_index(self) -> usize {
        match self {
            Terminal::Constant(_) => 0,
            Terminal::X => 1,
            Terminal::Y => 2,
            Terminal::Z => 3,
            Terminal::Time => 4,
        }
    }
}

// Constants compare by bit pattern, so NaN == NaN and 0.0 != -0.0.
impl PartialEq for Terminal {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Terminal::Constant(a), Terminal::Constant(b)) => a.to_bits() == b.to_bits(),
            (Terminal::X, Terminal::X)
            | (Terminal::Y, Terminal::Y)
            | (Terminal::Z, Terminal::Z)
            | (Terminal::Time, Terminal::Time) => true,
            _ => false,
        }
    }
}

impl Eq for Terminal {}

impl Hash for Terminal {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.kind_index().hash(state);
        if let Terminal::Constant(v) = self {
            v.to_bits().hash(state);
        }
    }
}

/// An immutable expression tree. Arity is enforced by construction: unary
/// nodes own one child and binary nodes own two.
///
/// Equality is structural: same shape, same operators, bit-equal constants.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Leaf(Terminal),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Metrics {
    pub depth: usize,
    pub node_count: usize,
}

impl Expr {
    pub fn constant(value: f64) -> Expr {
        Expr::Leaf(Terminal::Constant(value))
    }

    pub fn x() -> Expr {
        Expr::Leaf(Terminal::X)
    }

    pub fn y() -> Expr {
        Expr::Leaf(Terminal::Y)
    }

    pub fn z() -> Expr {
        Expr::Leaf(Terminal::Z)
    }

    pub fn time() -> Expr {
        Expr::Leaf(Terminal::Time)
    }

    pub fn unary(op: UnaryOp, arg: Expr) -> Expr {
        Expr::Unary(op, Box::new(arg))
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// The operator at this node, or `None` for a leaf.
    pub fn operator(&self) -> Option<Operator> {
        match self {
            Expr::Leaf(_) => None,
            Expr::Unary(op, _) => Some(Operator::Unary(*op)),
            Expr::Binary(op, _, _) => Some(Operator::Binary(*op)),
        }
    }

    /// Depth of the tree; a lone terminal has depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Expr::Leaf(_) => 1,
            Expr::Unary(_, a) => 1 + a.depth(),
            Expr::Binary(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Leaf(_) => 1,
            Expr::Unary(_, a) => 1 + a.node_count(),
            Expr::Binary(_, a, b) => 1 + a.node_count() + b.node_count(),
        }
    }

    pub fn metrics(&self) -> Metrics {
        Metrics {
            depth: self.depth(),
            node_count: self.node_count(),
        }
    }

    /// Visits every node in prefix order.
    pub fn for_each_node<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Leaf(_) => {}
            Expr::Unary(_, a) => a.for_each_node(f),
            Expr::Binary(_, a, b) => {
                a.for_each_node(f);
                b.for_each_node(f);
            }
        }
    }

    /// The subtree rooted at prefix-order position `index`, with the depth of
    /// that node (root is 1).
    pub fn subtree(&self, index: usize) -> Option<(&Expr, usize)> {
        fn walk<'a>(node: &'a Expr, index: &mut usize, level: usize) -> Option<(&'a Expr, usize)> {
            if *index == 0 {
                return Some((node, level));
            }
            *index -= 1;
            match node {
                Expr::Leaf(_) => None,
                Expr::Unary(_, a) => walk(a, index, level + 1),
                Expr::Binary(_, a, b) => {
                    walk(a, index, level + 1).or_else(|| walk(b, index, level + 1))
                }
            }
        }
        let mut index = index;
        walk(self, &mut index, 1)
    }

    /// A copy of this tree with the subtree at prefix position `index`
    /// replaced by `replacement`. Returns `None` if `index` is out of range.
    pub fn with_subtree(&self, index: usize, replacement: &Expr) -> Option<Expr> {
        if index >= self.node_count() {
            return None;
        }
        Some(self.replace_at(index, replacement))
    }

    fn replace_at(&self, index: usize, replacement: &Expr) -> Expr {
        if index == 0 {
            return replacement.clone();
        }
        match self {
            Expr::Leaf(_) => unreachable!("index checked against node_count"),
            Expr::Unary(op, a) => Expr::unary(*op, a.replace_at(index - 1, replacement)),
            Expr::Binary(op, a, b) => {
                let left = a.node_count();
                if index - 1 < left {
                    Expr::binary(*op, a.replace_at(index - 1, replacement), (**b).clone())
                } else {
                    Expr::binary(*op, (**a).clone(), b.replace_at(index - 1 - left, replacement))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig5() -> Expr {
        Expr::binary(
            BinaryOp::Div,
            Expr::x(),
            Expr::binary(BinaryOp::Add, Expr::x(), Expr::z()),
        )
    }

    #[test]
    fn metrics_of_single_terminal() {
        assert_eq!(Expr::x().metrics(), Metrics { depth: 1, node_count: 1 });
    }

    #[test]
    fn metrics_of_ratio_tree() {
        assert_eq!(fig5().metrics(), Metrics { depth: 3, node_count: 5 });
    }

    #[test]
    fn metrics_of_unary_chain() {
        let e = Expr::unary(
            UnaryOp::Sin,
            Expr::unary(UnaryOp::Sin, Expr::unary(UnaryOp::Sin, Expr::x())),
        );
        assert_eq!(e.metrics(), Metrics { depth: 4, node_count: 4 });
    }

    #[test]
    fn operator_set_has_eleven_kinds_with_fixed_arity() {
        let ops: alloc::vec::Vec<_> = Operator::all().collect();
        assert_eq!(ops.len(), Operator::COUNT);
        assert_eq!(ops.iter().filter(|o| o.arity() == 2).count(), 4);
        assert_eq!(ops.iter().filter(|o| o.arity() == 1).count(), 7);
        assert_eq!(Operator::from_name("sqrt"), Some(Operator::Unary(UnaryOp::Sqrt)));
        assert_eq!(Operator::from_name("pow"), None);
    }

    #[test]
    fn constants_compare_bitwise() {
        assert_eq!(Expr::constant(f64::NAN), Expr::constant(f64::NAN));
        assert_ne!(Expr::constant(0.0), Expr::constant(-0.0));
        assert_eq!(Expr::constant(0.25), Expr::constant(0.25));
    }

    #[test]
    fn subtree_indexing_is_prefix_order() {
        let e = fig5();
        let (node, level) = e.subtree(2).unwrap();
        assert_eq!(node, &Expr::binary(BinaryOp::Add, Expr::x(), Expr::z()));
        assert_eq!(level, 2);
        assert_eq!(e.subtree(4).unwrap(), (&Expr::z(), 3));
        assert!(e.subtree(5).is_none());
    }

    #[test]
    fn with_subtree_leaves_original_untouched() {
        let e = fig5();
        let replaced = e.with_subtree(4, &Expr::y()).unwrap();
        assert_eq!(
            replaced,
            Expr::binary(
                BinaryOp::Div,
                Expr::x(),
                Expr::binary(BinaryOp::Add, Expr::x(), Expr::y()),
            )
        );
        assert_eq!(e, fig5());
        assert_eq!(e.with_subtree(0, &Expr::time()).unwrap(), Expr::time());
        assert!(e.with_subtree(9, &Expr::time()).is_none());
    }
}
