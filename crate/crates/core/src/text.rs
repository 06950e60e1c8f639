//! Canonical text form of an expression.
//!
//! Prefix s-expressions with single spaces: `(div x (add x z))`. Operators
//! are the lowercase names `add sub mul div neg ceil floor sqrt log sin cos`,
//! variables are `x y z time`, and constants print as the shortest decimal
//! that round-trips, always with a decimal point (`1.0`, `-0.25`, `1.0e-7`).
//! The same form is used in persistence, REST payloads and CLI flags.

use alloc::string::{String, ToString};
use core::fmt::{self, Write};

use crate::expr::{Expr, Operator, Terminal};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: &'static str },
    #[error("unknown symbol `{symbol}` at byte {pos}")]
    UnknownSymbol { pos: usize, symbol: String },
    #[error("`{operator}` at byte {pos} takes {expected} argument(s), found {found}")]
    Arity {
        pos: usize,
        operator: &'static str,
        expected: usize,
        found: usize,
    },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::UnknownSymbol { pos, .. }
            | ParseError::Arity { pos, .. } => *pos,
        }
    }
}

pub fn serialize(expr: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, expr).expect("writing to a String cannot fail");
    out
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self)
    }
}

fn write_expr<W: Write>(out: &mut W, expr: &Expr) -> fmt::Result {
    match expr {
        Expr::Leaf(t) => write_terminal(out, *t),
        Expr::Unary(op, a) => {
            write!(out, "({} ", op.name())?;
            write_expr(out, a)?;
            out.write_char(')')
        }
        Expr::Binary(op, a, b) => {
            write!(out, "({} ", op.name())?;
            write_expr(out, a)?;
            out.write_char(' ')?;
            write_expr(out, b)?;
            out.write_char(')')
        }
    }
}

fn write_terminal<W: Write>(out: &mut W, t: Terminal) -> fmt::Result {
    match t {
        Terminal::Constant(v) => write_float(out, v),
        Terminal::X => out.write_str("x"),
        Terminal::Y => out.write_str("y"),
        Terminal::Z => out.write_str("z"),
        Terminal::Time => out.write_str("time"),
    }
}

/// Shortest round-trip decimal with a guaranteed decimal point. The exponent
/// form (`1.0e-7`) is also a valid shader float literal.
pub(crate) fn write_float<W: Write>(out: &mut W, v: f64) -> fmt::Result {
    let mut buf = String::new();
    write!(buf, "{v:?}")?;
    if !v.is_finite() || buf.contains('.') {
        return out.write_str(&buf);
    }
    match buf.find('e') {
        Some(at) => {
            out.write_str(&buf[..at])?;
            out.write_str(".0")?;
            out.write_str(&buf[at..])
        }
        None => {
            out.write_str(&buf)?;
            out.write_str(".0")
        }
    }
}

pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut parser = Parser { src: text, pos: 0 };
    let expr = parser.expr()?;
    parser.skip_ws();
    if parser.pos < text.len() {
        return Err(ParseError::Syntax {
            pos: parser.pos,
            message: "trailing input after expression",
        });
    }
    Ok(expr)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn atom(&mut self) -> (usize, &'a str) {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_whitespace() || c == b'(' || c == b')' {
                break;
            }
            self.pos += 1;
        }
        // Atoms end on ASCII delimiters, so this slice is on char boundaries.
        (start, &self.src[start..self.pos])
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        match self.peek() {
            None => Err(ParseError::Syntax {
                pos: self.pos,
                message: "unexpected end of input",
            }),
            Some(b')') => Err(ParseError::Syntax {
                pos: self.pos,
                message: "unbalanced `)`",
            }),
            Some(b'(') => self.application(),
            Some(_) => {
                let (pos, atom) = self.atom();
                terminal(pos, atom).map(Expr::Leaf)
            }
        }
    }

    fn application(&mut self) -> Result<Expr, ParseError> {
        let open = self.pos;
        self.pos += 1;
        self.skip_ws();
        let (pos, name) = self.atom();
        if name.is_empty() {
            return Err(ParseError::Syntax {
                pos,
                message: "expected an operator after `(`",
            });
        }
        let op = Operator::from_name(name).ok_or_else(|| ParseError::UnknownSymbol {
            pos,
            symbol: name.to_string(),
        })?;

        let mut args = alloc::vec::Vec::with_capacity(2);
        loop {
            self.skip_ws();
            match self.peek() {
                None => {
                    return Err(ParseError::Syntax {
                        pos: open,
                        message: "unbalanced `(`",
                    })
                }
                Some(b')') => {
                    self.pos += 1;
                    break;
                }
                Some(_) => args.push(self.expr()?),
            }
        }
        if args.len() != op.arity() {
            return Err(ParseError::Arity {
                pos: open,
                operator: op.name(),
                expected: op.arity(),
                found: args.len(),
            });
        }
        let mut args = args.into_iter();
        let mut next = || args.next().expect("arity checked");
        Ok(match op {
            Operator::Unary(u) => Expr::unary(u, next()),
            Operator::Binary(b) => {
                let lhs = next();
                Expr::binary(b, lhs, next())
            }
        })
    }
}

fn terminal(pos: usize, atom: &str) -> Result<Terminal, ParseError> {
    match atom {
        "x" => return Ok(Terminal::X),
        "y" => return Ok(Terminal::Y),
        "z" => return Ok(Terminal::Z),
        "time" => return Ok(Terminal::Time),
        _ => {}
    }
    if !looks_numeric(atom) {
        return Err(ParseError::UnknownSymbol {
            pos,
            symbol: atom.to_string(),
        });
    }
    match atom.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Terminal::Constant(v)),
        Ok(_) => Err(ParseError::Syntax {
            pos,
            message: "constant out of range",
        }),
        Err(_) => Err(ParseError::Syntax {
            pos,
            message: "malformed number",
        }),
    }
}

// Rules out `inf`, `nan` and friends, which `f64::from_str` would accept.
fn looks_numeric(atom: &str) -> bool {
    let digits = atom.strip_prefix(['-', '+']).unwrap_or(atom);
    matches!(digits.as_bytes().first(), Some(c) if c.is_ascii_digit() || *c == b'.')
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{BinaryOp, UnaryOp};

    fn fig5() -> Expr {
        Expr::binary(
            BinaryOp::Div,
            Expr::x(),
            Expr::binary(BinaryOp::Add, Expr::x(), Expr::z()),
        )
    }

    #[test]
    fn serializes_ratio_tree() {
        assert_eq!(serialize(&fig5()), "(div x (add x z))");
    }

    #[test]
    fn serializes_constants_with_decimal_point() {
        assert_eq!(serialize(&Expr::constant(1.0)), "1.0");
        assert_eq!(serialize(&Expr::constant(-0.25)), "-0.25");
        assert_eq!(serialize(&Expr::constant(-0.0)), "-0.0");
        assert_eq!(serialize(&Expr::constant(1e-7)), "1.0e-7");
        assert_eq!(serialize(&Expr::constant(1e20)), "1.0e20");
        assert_eq!(serialize(&Expr::constant(0.1)), "0.1");
    }

    #[test]
    fn serializes_nested_unary() {
        let e = Expr::unary(UnaryOp::Neg, Expr::unary(UnaryOp::Sin, Expr::time()));
        assert_eq!(serialize(&e), "(neg (sin time))");
        assert_eq!(alloc::format!("{e}"), "(neg (sin time))");
    }

    #[test]
    fn parses_ratio_tree() {
        assert_eq!(parse("(div x (add x z))").unwrap(), fig5());
        assert_eq!(parse("  (div   x\n(add x z) ) ").unwrap(), fig5());
    }

    #[test]
    fn parses_constants() {
        assert_eq!(parse("-0.5").unwrap(), Expr::constant(-0.5));
        assert_eq!(parse("1.0e-7").unwrap(), Expr::constant(1e-7));
        assert_eq!(parse("(add x 1)").unwrap(), Expr::binary(BinaryOp::Add, Expr::x(), Expr::constant(1.0)));
    }

    #[test]
    fn arity_mismatch() {
        assert!(matches!(
            parse("(add x)"),
            Err(ParseError::Arity { operator: "add", expected: 2, found: 1, pos: 0 })
        ));
        assert!(matches!(parse("(sin x y)"), Err(ParseError::Arity { found: 2, .. })));
    }

    #[test]
    fn unknown_symbols() {
        assert_eq!(
            parse("(pow x x)"),
            Err(ParseError::UnknownSymbol { pos: 1, symbol: "pow".into() })
        );
        assert!(matches!(parse("(add x w)"), Err(ParseError::UnknownSymbol { pos: 7, .. })));
        assert!(matches!(parse("inf"), Err(ParseError::UnknownSymbol { .. })));
        assert!(matches!(parse("-inf"), Err(ParseError::UnknownSymbol { .. })));
        assert!(matches!(parse("(x)"), Err(ParseError::UnknownSymbol { .. })));
    }

    #[test]
    fn unbalanced_parentheses() {
        assert!(matches!(parse("(sin"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("(sin x"), Err(ParseError::Syntax { pos: 0, .. })));
        assert!(matches!(parse("(sin x))"), Err(ParseError::Syntax { pos: 7, .. })));
        assert!(matches!(parse(")"), Err(ParseError::Syntax { pos: 0, .. })));
        assert!(matches!(parse(""), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("()"), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn rejects_bad_numbers() {
        assert!(matches!(parse("1e999"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("1.2.3"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("x y"), Err(ParseError::Syntax { pos: 2, .. })));
    }
}
