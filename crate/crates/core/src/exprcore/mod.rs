//! Exact symbolic expressions: construction, parsing, printing, calculus,
//! rational normalization and numeric evaluation.

mod calculus;
mod collect;
mod eval;
mod expr;
mod linear;
mod parse;
mod ratfn;
mod render;

pub use collect::{collect, normalize_rational, PolyCollection};
pub use eval::{eval_at, eval_numeric, Compiled};
pub use linear::linear_equations;
pub use expr::{rat, ratio, Expr, Node, Rational, Symbol};
pub use parse::{parse, parse_with_symbols};
pub use ratfn::{mono_cmp, Atom, Mono, Normalizer, Poly, RatFn};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("unknown identifier `{name}` at position {position}")]
    UnknownIdentifier { position: usize, name: String },
    #[error("not a rational function: {0}")]
    NotRational(String),
    #[error("not a polynomial: {0}")]
    NotPolynomial(String),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("division by zero")]
    DivisionByZero,
}

/// Simultaneous substitution, as a free function.
pub fn substitute(e: &Expr, bindings: &std::collections::BTreeMap<String, Expr>) -> Expr {
    e.substitute(bindings)
}

pub fn diff(e: &Expr, var: &str) -> Expr {
    e.diff(var)
}

pub fn total_derivative(e: &Expr, omega: Option<&Expr>) -> Expr {
    e.total_derivative(omega)
}
