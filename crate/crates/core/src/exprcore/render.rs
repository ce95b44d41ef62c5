//! Text rendering that the parser reads back to the same tree.

use std::fmt::{self, Write};

use num_traits::{One, Signed};

use super::expr::{Expr, Node, Rational};

#[derive(Clone, Copy, PartialEq, PartialOrd)]
enum Prec {
    Sum,
    Product,
    Power,
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_expr(self, Prec::Sum, &mut s);
        f.write_str(&s)
    }
}

fn write_rational(r: &Rational, out: &mut String) {
    if r.is_integer() {
        let _ = write!(out, "{}", r.numer());
    } else {
        let _ = write!(out, "{}/{}", r.numer(), r.denom());
    }
}

fn write_expr(e: &Expr, ctx: Prec, out: &mut String) {
    if e.is_undefined() {
        out.push_str("0^(-1)");
        return;
    }
    let own = precedence(e);
    let paren = own < ctx;
    if paren {
        out.push('(');
    }
    match e.node() {
        Node::Const(c) => write_rational(c, out),
        Node::Var(s) => out.push_str(s.name()),
        Node::Add(terms) => {
            for (i, t) in terms.iter().enumerate() {
                let (c, _) = t.split_coefficient();
                if i == 0 {
                    write_expr(t, Prec::Sum, out);
                } else if c.is_negative() {
                    out.push_str(" - ");
                    write_expr(&-t, Prec::Product, out);
                } else {
                    out.push_str(" + ");
                    write_expr(t, Prec::Product, out);
                }
            }
        }
        Node::Mul(_) | Node::Pow(..) => write_product(e, out),
        Node::Exp(a) => {
            out.push_str("exp(");
            write_expr(a, Prec::Sum, out);
            out.push(')');
        }
        Node::Ln(a) => {
            out.push_str("ln(");
            write_expr(a, Prec::Sum, out);
            out.push(')');
        }
    }
    if paren {
        out.push(')');
    }
}

fn precedence(e: &Expr) -> Prec {
    match e.node() {
        Node::Const(c) if c.is_negative() || !c.is_integer() => Prec::Product,
        Node::Const(_) | Node::Var(_) | Node::Exp(_) | Node::Ln(_) => Prec::Power,
        Node::Add(_) => Prec::Sum,
        Node::Mul(_) => Prec::Product,
        Node::Pow(_, ex) => match ex.as_const() {
            Some(k) if k.is_negative() => Prec::Product,
            _ => Prec::Power,
        },
    }
}

/// Split a product into numerator factors and positive-power denominator factors.
fn split_fraction(e: &Expr) -> (Rational, Vec<Expr>, Vec<Expr>) {
    let (coeff, body) = e.split_coefficient();
    let factors: Vec<Expr> = match body.node() {
        Node::Mul(fs) => fs.clone(),
        _ if body.is_one_const() => vec![],
        _ => vec![body.clone()],
    };
    let mut num = Vec::new();
    let mut den = Vec::new();
    for f in factors {
        match f.node() {
            Node::Pow(b, ex) if ex.as_const().is_some_and(|k| k.is_negative()) => {
                let k = -ex.as_const().unwrap();
                den.push(Expr::pow(b.clone(), Expr::constant(k)));
            }
            _ => num.push(f),
        }
    }
    (coeff, num, den)
}

fn write_product(e: &Expr, out: &mut String) {
    let (coeff, num, den) = split_fraction(e);
    if num.len() == 1 && den.is_empty() && coeff.is_one() {
        if let Node::Pow(b, ex) = num[0].node() {
            write_power(b, ex, out);
            return;
        }
    }
    let mut c = coeff;
    if c.is_negative() {
        out.push('-');
        c = -c;
    }
    let mut first = true;
    if !c.is_one() || num.is_empty() {
        write_rational(&c, out);
        first = false;
    }
    for f in &num {
        if !first {
            out.push('*');
        }
        first = false;
        write_expr(f, Prec::Power, out);
    }
    if den.is_empty() {
        return;
    }
    out.push('/');
    if den.len() == 1 {
        write_expr(&den[0], Prec::Power, out);
    } else {
        out.push('(');
        for (i, f) in den.iter().enumerate() {
            if i > 0 {
                out.push('*');
            }
            write_expr(f, Prec::Power, out);
        }
        out.push(')');
    }
}

fn write_power(base: &Expr, ex: &Expr, out: &mut String) {
    if ex.as_const() == Some(&Rational::new(1.into(), 2.into())) {
        out.push_str("sqrt(");
        write_expr(base, Prec::Sum, out);
        out.push(')');
        return;
    }
    write_base(base, out);
    out.push('^');
    match ex.as_const() {
        Some(k) if k.is_integer() && !k.is_negative() => write_rational(k, out),
        _ => {
            out.push('(');
            write_expr(ex, Prec::Sum, out);
            out.push(')');
        }
    }
}

fn write_base(base: &Expr, out: &mut String) {
    let atomic = match base.node() {
        Node::Var(_) | Node::Exp(_) | Node::Ln(_) => true,
        Node::Const(c) => c.is_integer() && !c.is_negative(),
        _ => false,
    };
    if atomic {
        write_expr(base, Prec::Power, out);
    } else {
        out.push('(');
        write_expr(base, Prec::Sum, out);
        out.push(')');
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse;

    fn round_trip(src: &str) -> String {
        let e = parse(src).unwrap();
        let text = e.to_string();
        assert_eq!(parse(&text).unwrap(), e, "{src} -> {text}");
        text
    }

    #[test]
    fn renders_readably() {
        assert_eq!(round_trip("x + 2*y"), "x + 2*y");
        assert_eq!(round_trip("x - y"), "x - y");
        assert_eq!(round_trip("1/x"), "1/x");
        assert_eq!(round_trip("x^(1/2)"), "sqrt(x)");
        assert_eq!(round_trip("-p^2"), "-p^2");
        assert_eq!(round_trip("x/2"), "1/2*x");
    }

    #[test]
    fn round_trips_assorted() {
        for src in [
            "-(x*p+y)^2/(x^2*(x+y))",
            "(x*p-y)^2/(x^2*(x+y))",
            "x*exp(-1/x) - x",
            "c*sqrt(2-x)*sqrt(x) - x",
            "x*exp(-c/x+2) - x",
            "exp(2*x)*(x-1/2) - exp(2*x)*ln(x+2*y-p)/x",
            "(2/3)^(1/2) + (-2)^(1/3)",
            "x^(-3/2) + 1/(x*y^2)",
            "ln(x)^2 - 3",
            "-1/x",
            "x^y^2",
            "0^(-1)",
        ] {
            round_trip(src);
        }
    }
}
