//! Differentiation and substitution.

use std::collections::BTreeMap;

use super::expr::{Expr, Node};

impl Expr {
    /// Partial derivative with respect to `var`.
    pub fn diff(&self, var: &str) -> Expr {
        if self.is_undefined() {
            return self.clone();
        }
        if !self.depends_on(var) {
            return Expr::zero();
        }
        match self.node() {
            Node::Const(_) => Expr::zero(),
            Node::Var(s) => {
                if s.name() == var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Add(ts) => Expr::add(ts.iter().map(|t| t.diff(var)).collect()),
            Node::Mul(fs) => {
                let mut terms = Vec::with_capacity(fs.len());
                for (i, f) in fs.iter().enumerate() {
                    let d = f.diff(var);
                    if d.is_zero_const() {
                        continue;
                    }
                    let mut prod: Vec<Expr> = fs
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, g)| g.clone())
                        .collect();
                    prod.push(d);
                    terms.push(Expr::mul(prod));
                }
                Expr::add(terms)
            }
            Node::Pow(b, e) => {
                if !e.depends_on(var) {
                    // d(b^e) = e b^(e-1) b'
                    let lowered = Expr::pow(b.clone(), e - Expr::one());
                    Expr::mul(vec![e.clone(), lowered, b.diff(var)])
                } else {
                    // d(b^e) = b^e (e' ln b + e b'/b)
                    let inner = Expr::add(vec![
                        e.diff(var) * Expr::ln(b.clone()),
                        Expr::mul(vec![e.clone(), b.diff(var), b.clone().recip()]),
                    ]);
                    self * inner
                }
            }
            Node::Exp(a) => self * a.diff(var),
            Node::Ln(a) => a.diff(var) / a,
        }
    }

    /// Replace variables simultaneously.
    pub fn substitute(&self, map: &BTreeMap<String, Expr>) -> Expr {
        if map.is_empty() {
            return self.clone();
        }
        match self.node() {
            Node::Var(s) => map.get(s.name()).cloned().unwrap_or_else(|| self.clone()),
            Node::Const(_) => self.clone(),
            _ => self.rebuild(|c| c.substitute(map)),
        }
    }

    /// Replace a single variable.
    pub fn subs(&self, var: &str, value: &Expr) -> Expr {
        let mut m = BTreeMap::new();
        m.insert(var.to_string(), value.clone());
        self.substitute(&m)
    }

    /// `D_x e = e_x + p e_y + q e_p`, with `q` replaced by `omega` when given.
    pub fn total_derivative(&self, omega: Option<&Expr>) -> Expr {
        let q = omega.cloned().unwrap_or_else(|| Expr::var("q"));
        Expr::add(vec![
            self.diff("x"),
            Expr::var("p") * self.diff("y"),
            q * self.diff("p"),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse;
    use super::*;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn derivative_rules() {
        assert_eq!(p("x^3").diff("x"), p("3*x^2"));
        assert_eq!(p("exp(2*x)").diff("x"), p("2*exp(2*x)"));
        assert_eq!(p("ln(x)").diff("x"), p("1/x"));
        assert_eq!(p("x*y").diff("y"), p("x"));
        assert_eq!(p("sqrt(x)").diff("x"), p("1/2/sqrt(x)"));
        assert!(p("x*y").diff("p").is_zero_const());
    }

    #[test]
    fn variable_exponent() {
        let e = p("x^y");
        let dy = e.diff("y");
        assert_eq!(dy, p("x^y*ln(x)"));
    }

    #[test]
    fn total_derivative_of_p() {
        let w = p("x*y");
        assert_eq!(p("p").total_derivative(Some(&w)), w);
        assert_eq!(p("y").total_derivative(None), p("p"));
        assert_eq!(p("p").total_derivative(None), Expr::var("q"));
    }

    #[test]
    fn substitution() {
        let e = p("x + y");
        assert_eq!(e.subs("y", &p("-x")), Expr::zero());
        let bad = p("1/(x+y)").subs("y", &p("-x"));
        assert!(bad.is_undefined());
    }
}
