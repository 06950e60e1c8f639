use crate::expr::{Expr, Terminal};

/// Variable bindings for one evaluation: the vertex position and the
/// animation clock in seconds.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Env {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub time: f64,
}

impl Env {
    pub fn new(x: f64, y: f64, z: f64, time: f64) -> Env {
        Env { x, y, z, time }
    }
}

/// Evaluates `expr` with plain IEEE-754 arithmetic. Division by zero, the log
/// or square root of a negative number and so on produce infinities or NaN;
/// there are no protected operators.
pub fn evaluate(expr: &Expr, env: &Env) -> f64 {
    match expr {
        Expr::Leaf(t) => match *t {
            Terminal::Constant(v) => v,
            Terminal::X => env.x,
            Terminal::Y => env.y,
            Terminal::Z => env.z,
            Terminal::Time => env.time,
        },
        Expr::Unary(op, a) => op.apply(evaluate(a, env)),
        Expr::Binary(op, a, b) => {
            let lhs = evaluate(a, env);
            op.apply(lhs, evaluate(b, env))
        }
    }
}
