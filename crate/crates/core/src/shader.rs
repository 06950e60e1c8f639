//! Vertex-shader emission.
//!
//! Every vertex is displaced by the same scalar delta on all three axes. The
//! expression reads the original `position` attribute; the template copies it
//! into a local `p` because vertex attributes are read-only.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::expr::{Expr, Terminal, UnaryOp};
use crate::text::{serialize, write_float};

/// The emitted shader wraps the displacement expression in this template at
/// the `<EXPR>` placeholder.
pub const VERTEX_SHADER_TEMPLATE: &str = "uniform float time;
void main() {
    vec3 p = position;
    p.xyz += <EXPR>;
    gl_Position = projectionMatrix * modelViewMatrix * vec4(p, 1.0);
}
";

const PLACEHOLDER: &str = "<EXPR>";

/// Component selectors allowed after a `.`.
pub const SWIZZLE_WHITELIST: [&str; 4] = ["x", "y", "z", "xyz"];

/// Identifiers the lint accepts outside member access.
pub const IDENTIFIER_WHITELIST: [&str; 19] = [
    "position",
    "time",
    "p",
    "gl_Position",
    "projectionMatrix",
    "modelViewMatrix",
    "vec4",
    "vec3",
    "uniform",
    "float",
    "void",
    "main",
    "xyz",
    "ceil",
    "floor",
    "sqrt",
    "log",
    "sin",
    "cos",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShaderArtifact {
    pub glsl_source: String,
    /// Canonical serialization of the source expression.
    pub expression_text: String,
    /// Stable content-derived id: FNV-1a of the expression text, in hex.
    pub artifact_id: String,
}

/// Renders `expr` as a shader-language scalar expression.
pub fn emit_expression(expr: &Expr) -> String {
    let mut out = String::new();
    write_expression(&mut out, expr);
    out
}

fn write_expression(out: &mut String, expr: &Expr) {
    match expr {
        Expr::Leaf(t) => match *t {
            Terminal::Constant(v) if v.is_sign_negative() => {
                out.push('(');
                write_float(out, v).expect("String write");
                out.push(')');
            }
            Terminal::Constant(v) => write_float(out, v).expect("String write"),
            Terminal::X => out.push_str("position.x"),
            Terminal::Y => out.push_str("position.y"),
            Terminal::Z => out.push_str("position.z"),
            Terminal::Time => out.push_str("time"),
        },
        Expr::Unary(UnaryOp::Neg, a) => {
            out.push_str("-(");
            write_expression(out, a);
            out.push(')');
        }
        Expr::Unary(op, a) => {
            out.push_str(op.name());
            out.push('(');
            write_expression(out, a);
            out.push(')');
        }
        Expr::Binary(op, a, b) => {
            write_operand(out, a);
            let _ = write!(out, " {} ", op.symbol());
            write_operand(out, b);
        }
    }
}

fn write_operand(out: &mut String, operand: &Expr) {
    if matches!(operand, Expr::Binary(..)) {
        out.push('(');
        write_expression(out, operand);
        out.push(')');
    } else {
        write_expression(out, operand);
    }
}

pub fn emit_vertex_shader(expr: &Expr) -> ShaderArtifact {
    let expression_text = serialize(expr);
    let glsl_source = VERTEX_SHADER_TEMPLATE.replacen(PLACEHOLDER, &emit_expression(expr), 1);
    let mut artifact_id = String::with_capacity(16);
    let _ = write!(artifact_id, "{:016x}", fnv1a(expression_text.as_bytes()));
    ShaderArtifact {
        glsl_source,
        expression_text,
        artifact_id,
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    UnbalancedOpen { offset: usize },
    UnbalancedClose { offset: usize },
    Identifier { offset: usize, name: String },
    IntegerLiteral { offset: usize, literal: String },
    UnexpectedChar { offset: usize, ch: char },
}

impl Violation {
    pub fn offset(&self) -> usize {
        match self {
            Violation::UnbalancedOpen { offset }
            | Violation::UnbalancedClose { offset }
            | Violation::Identifier { offset, .. }
            | Violation::IntegerLiteral { offset, .. }
            | Violation::UnexpectedChar { offset, .. } => *offset,
        }
    }
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Violation::UnbalancedOpen { offset } => write!(f, "unclosed `(` at byte {offset}"),
            Violation::UnbalancedClose { offset } => write!(f, "unmatched `)` at byte {offset}"),
            Violation::Identifier { offset, name } => {
                write!(f, "identifier `{name}` at byte {offset} is not allowed")
            }
            Violation::IntegerLiteral { offset, literal } => {
                write!(f, "numeric literal `{literal}` at byte {offset} has no decimal point")
            }
            Violation::UnexpectedChar { offset, ch } => {
                write!(f, "unexpected character {ch:?} at byte {offset}")
            }
        }
    }
}

/// Checks emitted source against the whitelist grammar: balanced
/// parentheses, whitelisted identifiers only, and a decimal point in every
/// numeric literal. Reports every violation with its byte offset.
pub fn lint_shader(source: &str) -> Result<(), Vec<Violation>> {
    let bytes = source.as_bytes();
    let mut violations = Vec::new();
    let mut open = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b'(' => {
                open.push(i);
                i += 1;
            }
            b')' => {
                if open.pop().is_none() {
                    violations.push(Violation::UnbalancedClose { offset: i });
                }
                i += 1;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let name = &source[start..i];
                let allowed = if follows_dot(bytes, start) {
                    SWIZZLE_WHITELIST.contains(&name)
                } else {
                    IDENTIFIER_WHITELIST.contains(&name)
                };
                if !allowed {
                    violations.push(Violation::Identifier {
                        offset: start,
                        name: name.into(),
                    });
                }
            }
            c if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) => {
                let start = i;
                let end = scan_number(bytes, i);
                let literal = &source[start..end];
                if !literal.contains('.') {
                    violations.push(Violation::IntegerLiteral {
                        offset: start,
                        literal: literal.into(),
                    });
                }
                i = end;
            }
            b'.' | b'+' | b'-' | b'*' | b'/' | b'=' | b';' | b',' | b'{' | b'}' => i += 1,
            c if c.is_ascii_whitespace() => i += 1,
            _ => {
                let ch = source[i..].chars().next().expect("in bounds");
                violations.push(Violation::UnexpectedChar { offset: i, ch });
                i += ch.len_utf8();
            }
        }
    }
    violations.extend(open.into_iter().map(|offset| Violation::UnbalancedOpen { offset }));
    if violations.is_empty() {
        Ok(())
    } else {
        violations.sort_by_key(Violation::offset);
        Err(violations)
    }
}

fn follows_dot(bytes: &[u8], start: usize) -> bool {
    bytes[..start]
        .iter()
        .rev()
        .find(|b| !b.is_ascii_whitespace())
        .is_some_and(|&b| b == b'.')
}

/// End of a numeric literal: digits, optional fraction, optional exponent.
fn scan_number(bytes: &[u8], mut i: usize) -> usize {
    let digits = |bytes: &[u8], mut i: usize| {
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        i
    };
    i = digits(bytes, i);
    if bytes.get(i) == Some(&b'.') {
        i = digits(bytes, i + 1);
    }
    if matches!(bytes.get(i), Some(b'e' | b'E')) {
        let mut j = i + 1;
        if matches!(bytes.get(j), Some(b'+' | b'-')) {
            j += 1;
        }
        if bytes.get(j).is_some_and(u8::is_ascii_digit) {
            i = digits(bytes, j);
        }
    }
    i
}
