//! Antiderivatives in one variable from a small rule table: powers (shifted
//! powers included), partial fractions over rational roots, and `g' e^g`.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::exprcore::{diff, Atom, Expr, Mono, Poly, Rational};
use crate::liealg::rational_roots;
use crate::linalg::QMatrix;

/// Dense univariate polynomial, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QPoly(pub Vec<Rational>);

impl QPoly {
    pub fn one() -> Self {
        QPoly(vec![Rational::one()])
    }

    fn trim(mut self) -> Self {
        while self.0.last().is_some_and(Zero::is_zero) {
            self.0.pop();
        }
        self
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.iter().rposition(|c| !c.is_zero())
    }

    pub fn mul(&self, o: &QPoly) -> QPoly {
        if self.0.is_empty() || o.0.is_empty() {
            return QPoly(vec![]);
        }
        let mut out = vec![Rational::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        QPoly(out).trim()
    }

    /// `(x - r)^k`.
    pub fn linear_power(r: &Rational, k: u32) -> QPoly {
        let base = QPoly(vec![-r.clone(), Rational::one()]);
        (0..k).fold(QPoly::one(), |acc, _| acc.mul(&base))
    }

    pub fn divrem(&self, d: &QPoly) -> (QPoly, QPoly) {
        let dd = d.degree().expect("nonzero divisor");
        let lead = d.0[dd].clone();
        let mut r = self.0.clone();
        let n = self.degree().map_or(0, |n| n + 1);
        if n <= dd {
            return (QPoly(vec![]), self.clone().trim());
        }
        let mut q = vec![Rational::zero(); n - dd];
        for k in (0..n - dd).rev() {
            let c = &r[k + dd] / &lead;
            if !c.is_zero() {
                for (j, dj) in d.0.iter().enumerate() {
                    r[k + j] -= &c * dj;
                }
            }
            q[k] = c;
        }
        (QPoly(q).trim(), QPoly(r).trim())
    }

    /// Taylor coefficients around `r`: `p(x) = sum c_k (x - r)^k`.
    pub fn shift(&self, r: &Rational) -> Vec<Rational> {
        let mut cur = self.clone().trim();
        let mut out = Vec::new();
        let base = QPoly(vec![-r.clone(), Rational::one()]);
        while cur.degree().is_some() || cur.0.first().is_some_and(|c| !c.is_zero()) {
            let (q, rem) = cur.divrem(&base);
            out.push(rem.0.first().cloned().unwrap_or_else(Rational::zero));
            cur = q;
            if cur.0.is_empty() {
                break;
            }
        }
        out
    }
}

fn linear_in(x: &str, r: &Rational) -> Expr {
    if r.is_zero() {
        Expr::var(x)
    } else {
        Expr::var(x) - Expr::constant(r.clone())
    }
}

/// `c (x - r)^n` integrated, `n` rational.
fn power_rule(x: &str, r: &Rational, n: &Rational, c: &Rational) -> Expr {
    power_rule_base(linear_in(x, r), &Rational::one(), n, c)
}

/// `c u^n` integrated where `u` is linear in `x` with slope `alpha`.
fn power_rule_base(u: Expr, alpha: &Rational, n: &Rational, c: &Rational) -> Expr {
    if *n == -Rational::one() {
        return Expr::constant(c / alpha) * Expr::ln(u);
    }
    let n1 = n + Rational::one();
    Expr::constant(c / (alpha * &n1)) * Expr::pow(u, Expr::constant(n1))
}

/// Univariate polynomial from a `Poly` whose monomials are `x^k`, `k >= 0`.
fn as_qpoly(p: &Poly, x: &str) -> Option<QPoly> {
    let mut out: Vec<Rational> = Vec::new();
    for (m, c) in p.terms() {
        let k = match m.len() {
            0 => 0usize,
            1 => {
                let (a, e) = m.iter().next().unwrap();
                match a {
                    Atom::Var(s) if s.name() == x && e.is_integer() && !e.is_negative() => {
                        e.to_integer().try_into().ok()?
                    }
                    _ => return None,
                }
            }
            _ => return None,
        };
        if out.len() <= k {
            out.resize(k + 1, Rational::zero());
        }
        out[k] += c;
    }
    Some(QPoly(out).trim())
}

/// `num / (den * x^shift)` integrated by partial fractions.
fn integrate_rational(x: &str, num: &QPoly, den: &QPoly) -> Option<Expr> {
    if num.degree().is_none() && num.0.is_empty() {
        return Some(Expr::zero());
    }
    let roots = rational_roots(&den.0)?;
    let lead = den.0[den.degree()?].clone();
    let (q, r) = num.divrem(den);
    let mut terms = Vec::new();
    for (k, c) in q.0.iter().enumerate() {
        if !c.is_zero() {
            terms.push(power_rule(x, &Rational::zero(), &Rational::from_integer(k.into()), c));
        }
    }
    if r.0.is_empty() {
        return Some(Expr::add(terms));
    }
    let mut mult: BTreeMap<Rational, u32> = BTreeMap::new();
    for root in roots {
        *mult.entry(root).or_insert(0) += 1;
    }
    // columns: den / (x - r)^j for j = 1..mult, scaled by the leading coefficient
    let n = den.degree()?;
    let mut cols: Vec<(Rational, u32, QPoly)> = Vec::new();
    for (root, m) in &mult {
        for j in 1..=*m {
            let mut others = QPoly(vec![lead.clone()]);
            for (r2, m2) in &mult {
                let e = if r2 == root { m - j } else { *m2 };
                others = others.mul(&QPoly::linear_power(r2, e));
            }
            cols.push((root.clone(), j, others));
        }
    }
    let mut a = QMatrix::zeros(n, cols.len());
    for (c, (_, _, p)) in cols.iter().enumerate() {
        for (row, v) in p.0.iter().enumerate() {
            if row < n {
                a[(row, c)] = v.clone();
            }
        }
    }
    let mut rhs = r.0.clone();
    rhs.resize(n, Rational::zero());
    let coeffs = a.solve(&rhs)?;
    for ((root, j, _), c) in cols.iter().zip(coeffs) {
        if !c.is_zero() {
            terms.push(power_rule(x, root, &-Rational::from_integer((*j).into()), &c));
        }
    }
    Some(Expr::add(terms))
}

fn mono_expr(m: &Mono) -> Expr {
    Poly::monomial(m.clone(), Rational::one()).to_expr()
}

/// Group key: x-free factor and the x-dependent factor that is not an
/// integer power of `x`.
type Groups = BTreeMap<(Mono, Mono), BTreeMap<i64, Rational>>;

fn group_terms(num: &Poly, x: &str) -> Option<Groups> {
    let mut groups: Groups = BTreeMap::new();
    for (m, c) in num.terms() {
        let mut free = Mono::new();
        let mut special = Mono::new();
        let mut k: i64 = 0;
        for (a, e) in m {
            match a {
                Atom::Var(s) if s.name() == x => {
                    let fl = e.floor();
                    k = fl.to_integer().try_into().ok()?;
                    let frac = e - fl;
                    if !frac.is_zero() {
                        special.insert(a.clone(), frac);
                    }
                }
                _ if !a.depends_on(x) => {
                    free.insert(a.clone(), e.clone());
                }
                _ => {
                    special.insert(a.clone(), e.clone());
                }
            }
        }
        *groups
            .entry((free, special))
            .or_default()
            .entry(k)
            .or_insert_with(Rational::zero) += c;
    }
    Some(groups)
}

/// Antiderivative in `x`, or `None` outside the rule table.
pub fn integrate(f: &Expr, x: &str) -> Option<Expr> {
    let r = f.to_ratfn().ok()?;
    if r.is_zero() {
        return Some(Expr::zero());
    }
    let mut den = QPoly::one();
    for (p, k) in r.denominator() {
        let q = as_qpoly(p, x)?;
        for _ in 0..*k {
            den = den.mul(&q);
        }
    }
    let mut out = Vec::new();
    for ((free, special), laurent) in group_terms(r.numerator(), x)? {
        let low = laurent.keys().next().copied().unwrap_or(0).min(0);
        let mut num = Vec::new();
        for (k, c) in &laurent {
            let idx = (k - low) as usize;
            if num.len() <= idx {
                num.resize(idx + 1, Rational::zero());
            }
            num[idx] = c.clone();
        }
        let num = QPoly(num).trim();
        let group_den = den.mul(&QPoly::linear_power(&Rational::zero(), (-low) as u32));
        let piece = integrate_group(x, &special, &num, &group_den)?;
        out.push(mono_expr(&free) * piece);
    }
    Some(Expr::add(out).normalize())
}

fn integrate_group(x: &str, special: &Mono, num: &QPoly, den: &QPoly) -> Option<Expr> {
    if special.is_empty() {
        return integrate_rational(x, num, den);
    }
    if let Some(g) = special.keys().find_map(|a| match a {
        Atom::Exp(g) => Some(g.clone()),
        _ => None,
    }) {
        // kappa g' e^g
        let mut rest = special.clone();
        rest.remove(&Atom::Exp(g.clone()));
        let h = mono_expr(&rest) * qpoly_expr(num, x) / qpoly_expr(den, x);
        let dg = diff(&g, x);
        if dg.is_zero() {
            return None;
        }
        let kappa = (h / dg).to_ratfn().ok()?.as_constant()?;
        return Some(Expr::constant(kappa) * Expr::exp(g));
    }
    // single fractional power of a linear factor times a rational function
    // whose poles all sit at the same point
    if special.len() != 1 {
        return None;
    }
    let (atom, q) = special.iter().next().unwrap();
    let (u, alpha, root) = match atom {
        Atom::Var(_) => (Expr::var(x), Rational::one(), Rational::zero()),
        Atom::Radical(p) => {
            let lin = as_qpoly(p, x)?;
            if lin.degree()? != 1 {
                return None;
            }
            let alpha = lin.0[1].clone();
            let root = -(&lin.0[0] / &alpha);
            (p.to_expr(), alpha, root)
        }
        _ => return None,
    };
    let roots = rational_roots(&den.0)?;
    if roots.iter().any(|r| *r != root) {
        return None;
    }
    // x - r = u / alpha
    let lead = den.0[den.degree()?].clone();
    let k = roots.len() as i32;
    let mut terms = Vec::new();
    for (j, c) in num.shift(&root).into_iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let n = Rational::from_integer((j as i64 - k as i64).into()) + q;
        let coeff = &c * alpha.pow(k - j as i32) / &lead;
        terms.push(power_rule_base(u.clone(), &alpha, &n, &coeff));
    }
    Some(Expr::add(terms))
}

fn qpoly_expr(p: &QPoly, x: &str) -> Expr {
    Expr::add(
        p.0.iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| Expr::constant(c.clone()) * Expr::var(x).powi(k as i64))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprcore::parse;

    fn check(f: &str) -> Expr {
        let fe = parse(f).unwrap();
        let big_f = integrate(&fe, "x").unwrap_or_else(|| panic!("no antiderivative for {f}"));
        assert!(diff(&big_f, "x").equivalent(&fe), "{f} -> {big_f}");
        big_f
    }

    #[test]
    fn table_rules() {
        check("3*x^2 + 1");
        check("1/x");
        check("x^(-1/2)/2");
        check("1/(x - 2)");
        check("1/x + 1/x^2");
        check("(x + 1)/(x^2 - x)");
        check("1/(x - 1)^3 + 2");
        check("-exp(1/x)/x^2");
        check("2*x*exp(x^2)");
        check("sqrt(x)*(x + 1)");
        check("(2 - x)^(1/2)");
    }

    #[test]
    fn outside_table() {
        assert!(integrate(&parse("1/(x^2 + 1)").unwrap(), "x").is_none());
        assert!(integrate(&parse("exp(x^2)").unwrap(), "x").is_none());
        assert!(integrate(&parse("x^(-1/2)*(x - 2)^(-3/2)").unwrap(), "x").is_none());
        assert!(integrate(&parse("ln(x)").unwrap(), "x").is_none());
    }

    #[test]
    fn shift_and_divide() {
        let p = QPoly(vec![Rational::from_integer(1.into()), Rational::zero(), Rational::one()]);
        let c = p.shift(&Rational::one());
        assert_eq!(c, vec![Rational::from_integer(2.into()), Rational::from_integer(2.into()), Rational::one()]);
    }
}
