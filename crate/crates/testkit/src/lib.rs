//! Oracles that check the core crate by independent routes.
//!
//! Nothing here calls `evoshade_core::evaluate` or the emitter internals: the
//! stack evaluator walks the tree iteratively, and the shader evaluator parses
//! emitted source text with its own precedence-climbing parser.

use evoshade_core::{BinaryOp, Env, Expr, Terminal, UnaryOp};
use rand::Rng;

/// Post-order evaluation with an explicit work stack and value stack.
pub fn stack_evaluate(expr: &Expr, env: &Env) -> f64 {
    enum Work<'a> {
        Visit(&'a Expr),
        ApplyUnary(UnaryOp),
        ApplyBinary(BinaryOp),
    }
    let mut work = vec![Work::Visit(expr)];
    let mut values: Vec<f64> = Vec::new();
    while let Some(item) = work.pop() {
        match item {
            Work::Visit(Expr::Leaf(t)) => values.push(match *t {
                Terminal::Constant(v) => v,
                Terminal::X => env.x,
                Terminal::Y => env.y,
                Terminal::Z => env.z,
                Terminal::Time => env.time,
            }),
            Work::Visit(Expr::Unary(op, a)) => {
                work.push(Work::ApplyUnary(*op));
                work.push(Work::Visit(a));
            }
            Work::Visit(Expr::Binary(op, a, b)) => {
                work.push(Work::ApplyBinary(*op));
                work.push(Work::Visit(b));
                work.push(Work::Visit(a));
            }
            Work::ApplyUnary(op) => {
                let v = values.pop().expect("operand");
                values.push(unary(op_name_unary(op), v));
            }
            Work::ApplyBinary(op) => {
                let rhs = values.pop().expect("rhs");
                let lhs = values.pop().expect("lhs");
                values.push(binary(op_symbol(op), lhs, rhs));
            }
        }
    }
    debug_assert_eq!(values.len(), 1);
    values.pop().expect("result")
}

fn op_name_unary(op: UnaryOp) -> &'static str {
    match op {
        UnaryOp::Neg => "-",
        UnaryOp::Ceil => "ceil",
        UnaryOp::Floor => "floor",
        UnaryOp::Sqrt => "sqrt",
        UnaryOp::Log => "log",
        UnaryOp::Sin => "sin",
        UnaryOp::Cos => "cos",
    }
}

fn op_symbol(op: BinaryOp) -> char {
    match op {
        BinaryOp::Add => '+',
        BinaryOp::Sub => '-',
        BinaryOp::Mul => '*',
        BinaryOp::Div => '/',
    }
}

fn unary(name: &str, v: f64) -> f64 {
    match name {
        "-" => -v,
        "ceil" => libm::ceil(v),
        "floor" => libm::floor(v),
        "sqrt" => libm::sqrt(v),
        "log" => libm::log(v),
        "sin" => libm::sin(v),
        "cos" => libm::cos(v),
        other => panic!("unknown function {other}"),
    }
}

fn binary(op: char, a: f64, b: f64) -> f64 {
    match op {
        '+' => a + b,
        '-' => a - b,
        '*' => a * b,
        '/' => a / b,
        other => panic!("unknown operator {other}"),
    }
}

/// Evaluates a shader-language scalar expression (the right-hand side of the
/// displacement statement) with C-family precedence: unary minus binds
/// tightest, then `* /`, then `+ -`, all left-associative.
pub fn shader_evaluate(source: &str, env: &Env) -> Result<f64, String> {
    let tokens = tokenize(source)?;
    let mut parser = ShaderParser { tokens, pos: 0, env };
    let v = parser.sum()?;
    if parser.pos != parser.tokens.len() {
        return Err(format!("trailing tokens in {source:?}"));
    }
    Ok(v)
}

/// Pulls the right-hand side out of a `p.xyz += <rhs>;` statement.
pub fn displacement_rhs(shader: &str) -> Option<&str> {
    let start = shader.find("p.xyz += ")? + "p.xyz += ".len();
    let end = start + shader[start..].find(";\n")?;
    Some(&shader[start..end])
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<Tok>, String> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                i += 1;
                if i < chars.len() && (chars[i] == '-' || chars[i] == '+') {
                    i += 1;
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let text: String = chars[start..i].iter().collect();
            out.push(Tok::Num(text.parse().map_err(|_| format!("bad literal {text}"))?));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '.') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(format!("unexpected {c:?}"));
        }
    }
    Ok(out)
}

struct ShaderParser<'e> {
    tokens: Vec<Tok>,
    pos: usize,
    env: &'e Env,
}

impl ShaderParser<'_> {
    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some(Tok::Op(c)) => Some(*c),
            _ => None,
        }
    }

    fn expect(&mut self, c: char) -> Result<(), String> {
        if self.peek_op() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(format!("expected {c:?} at token {}", self.pos))
        }
    }

    fn sum(&mut self) -> Result<f64, String> {
        let mut acc = self.product()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.product()?;
            acc = binary(op, acc, rhs);
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<f64, String> {
        let mut acc = self.prefix()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.prefix()?;
            acc = binary(op, acc, rhs);
        }
        Ok(acc)
    }

    fn prefix(&mut self) -> Result<f64, String> {
        if self.peek_op() == Some('-') {
            self.pos += 1;
            // A minus directly on a literal is part of the literal.
            if let Some(Tok::Num(v)) = self.tokens.get(self.pos) {
                let v = *v;
                self.pos += 1;
                return Ok(-v);
            }
            return Ok(-self.prefix()?);
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<f64, String> {
        let tok = self.tokens.get(self.pos).cloned().ok_or("unexpected end")?;
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(v),
            Tok::Op('(') => {
                let v = self.sum()?;
                self.expect(')')?;
                Ok(v)
            }
            Tok::Ident(name) => match name.as_str() {
                "position.x" => Ok(self.env.x),
                "position.y" => Ok(self.env.y),
                "position.z" => Ok(self.env.z),
                "time" => Ok(self.env.time),
                f @ ("ceil" | "floor" | "sqrt" | "log" | "sin" | "cos") => {
                    self.expect('(')?;
                    let v = self.sum()?;
                    self.expect(')')?;
                    Ok(unary(f, v))
                }
                other => Err(format!("unknown identifier {other}")),
            },
            Tok::Op(c) => Err(format!("unexpected {c:?}")),
        }
    }
}

/// Coordinates spread over a wide range, with occasional exact zeros and
/// integers so singularities and rounding functions get exercised.
pub fn random_env<R: Rng + ?Sized>(rng: &mut R) -> Env {
    let coord = |rng: &mut R| match rng.random_range(0..10) {
        0 => 0.0,
        1 => f64::from(rng.random_range(-5i32..=5)),
        _ => rng.random_range(-20.0..20.0),
    };
    Env::new(coord(rng), coord(rng), coord(rng), coord(rng))
}

/// Bit equality that treats every NaN as equal to every other NaN.
pub fn same_value(a: f64, b: f64) -> bool {
    a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan())
}
