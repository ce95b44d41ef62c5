//! Floating-point evaluation.

use std::collections::BTreeMap;

use num_traits::ToPrimitive;

use super::expr::{Expr, Node, Rational};
use super::ExprError;

fn domain(msg: &str) -> ExprError {
    ExprError::DomainError(msg.to_string())
}

fn rat_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn checked(v: f64) -> Result<f64, ExprError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(domain("non-finite value"))
    }
}

fn pow_f64(b: f64, e: f64, int_exp: Option<i32>) -> Result<f64, ExprError> {
    if b == 0.0 && e < 0.0 {
        return Err(domain("division by zero"));
    }
    match int_exp {
        Some(n) => checked(b.powi(n)),
        None if b < 0.0 => Err(domain("fractional power of a negative number")),
        None => checked(b.powf(e)),
    }
}

fn ln_f64(a: f64) -> Result<f64, ExprError> {
    if a <= 0.0 {
        Err(domain("logarithm of a non-positive number"))
    } else {
        Ok(a.ln())
    }
}

fn small_int(e: &Expr) -> Option<i32> {
    e.as_const()
        .filter(|c| c.is_integer())
        .and_then(|c| c.numer().to_i32())
}

/// Evaluate with every free variable bound.
pub fn eval_numeric(e: &Expr, bindings: &BTreeMap<String, f64>) -> Result<f64, ExprError> {
    match e.node() {
        Node::Const(c) => Ok(rat_to_f64(c)),
        Node::Var(s) => bindings
            .get(s.name())
            .copied()
            .ok_or_else(|| domain(&format!("unbound variable {}", s.name()))),
        Node::Add(ts) => {
            let mut acc = 0.0;
            for t in ts {
                acc += eval_numeric(t, bindings)?;
            }
            checked(acc)
        }
        Node::Mul(fs) => {
            let mut acc = 1.0;
            for f in fs {
                acc *= eval_numeric(f, bindings)?;
            }
            checked(acc)
        }
        Node::Pow(b, ex) => {
            if e.is_undefined() {
                return Err(domain("division by zero"));
            }
            let bv = eval_numeric(b, bindings)?;
            let ev = eval_numeric(ex, bindings)?;
            pow_f64(bv, ev, small_int(ex))
        }
        Node::Exp(a) => checked(eval_numeric(a, bindings)?.exp()),
        Node::Ln(a) => ln_f64(eval_numeric(a, bindings)?),
    }
}

/// Convenience wrapper taking `(name, value)` pairs.
pub fn eval_at(e: &Expr, pairs: &[(&str, f64)]) -> Result<f64, ExprError> {
    let m = pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    eval_numeric(e, &m)
}

#[derive(Clone, Debug)]
enum Op {
    Const(f64),
    Slot(usize),
    Add(Vec<Op>),
    Mul(Vec<Op>),
    Pow(Box<Op>, Box<Op>, Option<i32>),
    Exp(Box<Op>),
    Ln(Box<Op>),
    Undefined,
}

/// Expression compiled against a fixed variable order, for repeated evaluation.
#[derive(Clone, Debug)]
pub struct Compiled {
    op: Op,
    arity: usize,
}

impl Compiled {
    pub fn new(e: &Expr, vars: &[&str]) -> Result<Self, ExprError> {
        Ok(Compiled {
            op: compile(e, vars)?,
            arity: vars.len(),
        })
    }

    pub fn eval(&self, values: &[f64]) -> Result<f64, ExprError> {
        debug_assert_eq!(values.len(), self.arity);
        run(&self.op, values)
    }
}

fn compile(e: &Expr, vars: &[&str]) -> Result<Op, ExprError> {
    Ok(match e.node() {
        Node::Const(c) => Op::Const(rat_to_f64(c)),
        Node::Var(s) => Op::Slot(
            vars.iter()
                .position(|v| *v == s.name())
                .ok_or_else(|| domain(&format!("unbound variable {}", s.name())))?,
        ),
        Node::Add(ts) => Op::Add(ts.iter().map(|t| compile(t, vars)).collect::<Result<_, _>>()?),
        Node::Mul(fs) => Op::Mul(fs.iter().map(|t| compile(t, vars)).collect::<Result<_, _>>()?),
        Node::Pow(..) if e.is_undefined() => Op::Undefined,
        Node::Pow(b, ex) => Op::Pow(
            Box::new(compile(b, vars)?),
            Box::new(compile(ex, vars)?),
            small_int(ex),
        ),
        Node::Exp(a) => Op::Exp(Box::new(compile(a, vars)?)),
        Node::Ln(a) => Op::Ln(Box::new(compile(a, vars)?)),
    })
}

fn run(op: &Op, v: &[f64]) -> Result<f64, ExprError> {
    match op {
        Op::Const(c) => Ok(*c),
        Op::Slot(i) => Ok(v[*i]),
        Op::Add(ts) => {
            let mut acc = 0.0;
            for t in ts {
                acc += run(t, v)?;
            }
            checked(acc)
        }
        Op::Mul(fs) => {
            let mut acc = 1.0;
            for f in fs {
                acc *= run(f, v)?;
            }
            checked(acc)
        }
        Op::Pow(b, e, n) => pow_f64(run(b, v)?, run(e, v)?, *n),
        Op::Exp(a) => checked(run(a, v)?.exp()),
        Op::Ln(a) => ln_f64(run(a, v)?),
        Op::Undefined => Err(domain("division by zero")),
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse;
    use super::*;

    #[test]
    fn basic_values() {
        let e = parse("x+2*y-p").unwrap();
        assert_eq!(eval_at(&e, &[("x", 1.0), ("y", 1.0), ("p", 0.0)]).unwrap(), 3.0);
        let e = parse("exp(2*x)").unwrap();
        assert_eq!(eval_at(&e, &[("x", 0.0)]).unwrap(), 1.0);
    }

    #[test]
    fn domain_errors() {
        let e = parse("ln(x)").unwrap();
        assert!(eval_at(&e, &[("x", -1.0)]).is_err());
        let e = parse("1/x").unwrap();
        assert!(eval_at(&e, &[("x", 0.0)]).is_err());
        let e = parse("sqrt(x)").unwrap();
        assert!(eval_at(&e, &[("x", -1.0)]).is_err());
        assert!(eval_at(&Expr::undefined(), &[]).is_err());
        assert!(eval_at(&parse("x").unwrap(), &[]).is_err());
    }

    #[test]
    fn compiled_matches_tree_walk() {
        let e = parse("(x*p-y)^2/(x^2*(x+y)) + exp(x)*ln(y)").unwrap();
        let c = Compiled::new(&e, &["x", "y", "p"]).unwrap();
        let a = c.eval(&[1.5, 0.7, -0.3]).unwrap();
        let b = eval_at(&e, &[("x", 1.5), ("y", 0.7), ("p", -0.3)]).unwrap();
        assert_eq!(a, b);
    }
}
