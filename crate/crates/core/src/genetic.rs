//! Subtree crossover and subtree mutation.
//!
//! Both operators are depth-safe: if an offspring would exceed the hard depth
//! limit, a fresh node choice is drawn up to [`MAX_RETRIES`] more times, after
//! which the parent is returned unchanged.

use rand::Rng;

use crate::expr::Expr;
use crate::grow::{grow, GrowthParams};

/// Redraws allowed after the first node choice fails the depth limit.
pub const MAX_RETRIES: usize = 3;

/// Maximum depth of the subtree grown by [`mutate`].
pub const MUTATION_GROW_DEPTH: usize = 4;

/// Exchanges uniformly chosen subtrees between `a` and `b`.
///
/// The first offspring is `a` with a subtree replaced by one of `b`'s, and the
/// second is the reverse. Each offspring is accepted from the first attempt
/// on which it fits within `hard_max_depth`.
pub fn crossover<R: Rng + ?Sized>(
    a: &Expr,
    b: &Expr,
    hard_max_depth: usize,
    rng: &mut R,
) -> (Expr, Expr) {
    let (a_nodes, b_nodes) = (a.node_count(), b.node_count());
    let mut first = None;
    let mut second = None;
    for _ in 0..=MAX_RETRIES {
        let i = rng.random_range(0..a_nodes);
        let j = rng.random_range(0..b_nodes);
        let (from_a, _) = a.subtree(i).expect("index below node count");
        let (from_b, _) = b.subtree(j).expect("index below node count");
        if first.is_none() {
            let child = a.with_subtree(i, from_b).expect("index below node count");
            if child.depth() <= hard_max_depth {
                first = Some(child);
            }
        }
        if second.is_none() {
            let child = b.with_subtree(j, from_a).expect("index below node count");
            if child.depth() <= hard_max_depth {
                second = Some(child);
            }
        }
        if first.is_some() && second.is_some() {
            break;
        }
    }
    (
        first.unwrap_or_else(|| a.clone()),
        second.unwrap_or_else(|| b.clone()),
    )
}

/// Replaces a uniformly chosen node with a freshly grown tree of depth at
/// most [`MUTATION_GROW_DEPTH`].
pub fn mutate<R: Rng + ?Sized>(expr: &Expr, params: &GrowthParams, rng: &mut R) -> Expr {
    let nodes = expr.node_count();
    let grow_depth = MUTATION_GROW_DEPTH.min(params.hard_max_depth());
    for _ in 0..=MAX_RETRIES {
        let at = rng.random_range(0..nodes);
        let fresh = grow(grow_depth, params.terminal_probability(), false, rng);
        let child = expr.with_subtree(at, &fresh).expect("index below node count");
        if child.depth() <= params.hard_max_depth() {
            return child;
        }
    }
    expr.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{BinaryOp, UnaryOp};
    use crate::grow::random_expression;
    use crate::text::parse;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_nodes_swap_roots() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (c1, c2) = crossover(&Expr::x(), &Expr::y(), 8, &mut rng);
        assert_eq!((c1, c2), (Expr::y(), Expr::x()));
    }

    #[test]
    fn crossover_is_deterministic_and_leaves_parents() {
        let params = GrowthParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_expression(&params, &mut rng);
        let b = random_expression(&params, &mut rng);
        let (a0, b0) = (a.clone(), b.clone());
        let first = crossover(&a, &b, 8, &mut ChaCha8Rng::seed_from_u64(5));
        let again = crossover(&a, &b, 8, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(first, again);
        assert_eq!((a, b), (a0, b0));
    }

    #[test]
    fn crossover_falls_back_to_parents_when_nothing_fits() {
        // A depth-3 chain crossed with a depth-1 leaf: under a limit of 2 only
        // choices that shrink the chain fit. With a limit of 1 no swap that
        // keeps the chain can fit, so at least one parent comes back as-is.
        let chain = parse("(sin (cos x))").unwrap();
        let leaf = Expr::y();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let (c1, c2) = crossover(&chain, &leaf, 2, &mut rng);
            assert!(c1.depth() <= 2 || c1 == chain);
            assert!(c2.depth() <= 2 || c2 == leaf);
        }
    }

    struct ZeroRng;

    impl rand::RngCore for ZeroRng {
        fn next_u32(&mut self) -> u32 {
            0
        }
        fn next_u64(&mut self) -> u64 {
            0
        }
        fn fill_bytes(&mut self, dst: &mut [u8]) {
            dst.fill(0);
        }
    }

    #[test]
    fn mutating_a_leaf_can_yield_a_leaf() {
        // Terminal probability 1 forces the grown replacement to be a leaf.
        let params = GrowthParams::new(1, 1, 8, 1.0).unwrap();
        let mut rng = ZeroRng;
        let out = mutate(&Expr::x(), &params, &mut rng);
        assert!(matches!(out, Expr::Leaf(_)));
    }

    #[test]
    fn mutation_respects_hard_limit() {
        let params = GrowthParams::default();
        let deep = (0..6).fold(Expr::x(), |e, _| Expr::unary(UnaryOp::Sin, e));
        let wide = Expr::binary(BinaryOp::Add, deep, Expr::z());
        assert_eq!(wide.depth(), 8);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..500 {
            assert!(mutate(&wide, &params, &mut rng).depth() <= 8);
        }
    }

    #[test]
    fn mutation_is_deterministic() {
        let params = GrowthParams::default();
        let e = parse("(add (mul x y) (sin time))").unwrap();
        let m1 = mutate(&e, &params, &mut ChaCha8Rng::seed_from_u64(77));
        let m2 = mutate(&e, &params, &mut ChaCha8Rng::seed_from_u64(77));
        assert_eq!(m1, m2);
    }
}
