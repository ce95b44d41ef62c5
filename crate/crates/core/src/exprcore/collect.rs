//! Rational-function views and coefficient collection with respect to chosen variables.

use std::collections::BTreeMap;

use num_traits::{One, Signed, ToPrimitive};

use super::expr::{Expr, Rational};
use super::ratfn::{Atom, Mono, Poly, RatFn};
use super::ExprError;

/// Coefficients of a polynomial in `vars`, keyed by exponent tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyCollection {
    pub vars: Vec<String>,
    pub terms: BTreeMap<Vec<u32>, Expr>,
}

impl PolyCollection {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, exps: &[u32]) -> Option<&Expr> {
        self.terms.get(exps)
    }

    /// `sum coeff * monomial`.
    pub fn reassemble(&self) -> Expr {
        Expr::add(
            self.terms
                .iter()
                .map(|(k, c)| {
                    let mut fs = vec![c.clone()];
                    for (v, e) in self.vars.iter().zip(k) {
                        fs.push(Expr::var(v).powi(*e as i64));
                    }
                    Expr::mul(fs)
                })
                .collect(),
        )
    }
}

/// Split a monomial into integer exponents of `vars` and the remaining part.
fn split_mono(
    m: &Mono,
    vars: &[&str],
    err: &dyn Fn(String) -> ExprError,
) -> Result<(Vec<i64>, Mono), ExprError> {
    let mut exps = vec![0i64; vars.len()];
    let mut rest = Mono::new();
    for (a, e) in m {
        match a {
            Atom::Var(s) if vars.contains(&s.name()) => {
                if !e.is_integer() {
                    return Err(err(format!("fractional power of {}", s.name())));
                }
                let i = vars.iter().position(|v| *v == s.name()).unwrap();
                exps[i] = e.to_integer().to_i64().unwrap_or(0);
            }
            _ => {
                if let Some(v) = vars.iter().find(|v| a.depends_on(v)) {
                    return Err(err(format!("non-rational dependence on {v}")));
                }
                rest.insert(a.clone(), e.clone());
            }
        }
    }
    Ok((exps, rest))
}

fn leading_rational_coeff(p: &Poly, vars: &[&str]) -> Option<Rational> {
    let mut groups: BTreeMap<Vec<i64>, Poly> = BTreeMap::new();
    for (m, c) in p.terms() {
        let (exps, rest) = split_mono(m, vars, &|s| ExprError::NotRational(s)).ok()?;
        groups.entry(exps).or_default().add_term(rest, c.clone());
    }
    let (_, lead) = groups.iter().next_back()?;
    let r = RatFn::from_parts(lead.clone(), vec![]);
    r.as_constant()
}

/// `e = num / den` with both polynomial in `vars` and `den` monic when possible.
pub fn normalize_rational(e: &Expr, vars: &[&str]) -> Result<(Expr, Expr), ExprError> {
    let r = e.to_ratfn()?;
    let not_rational = |s: String| ExprError::NotRational(s);
    let mut shift = vec![0i64; vars.len()];
    let mut split_terms = Vec::new();
    for (m, c) in r.numerator().terms() {
        let (exps, rest) = split_mono(m, vars, &not_rational)?;
        for (s, e) in shift.iter_mut().zip(&exps) {
            *s = (*s).min(*e);
        }
        split_terms.push((exps, rest, c.clone()));
    }
    for (d, _) in r.denominator() {
        for (m, _) in d.terms() {
            split_mono(m, vars, &not_rational)?;
        }
    }
    let mut lc = Rational::one();
    for (d, k) in r.denominator() {
        match leading_rational_coeff(d, vars) {
            Some(c) => lc *= num_traits::pow(c, *k as usize),
            None => {
                lc = Rational::one();
                break;
            }
        }
    }
    let var_pow = |exps: &[i64]| -> Vec<Expr> {
        vars.iter()
            .zip(exps)
            .map(|(v, e)| Expr::var(v).powi(*e))
            .collect()
    };
    let num = Expr::add(
        split_terms
            .into_iter()
            .map(|(exps, rest, c)| {
                let shifted: Vec<i64> = exps.iter().zip(&shift).map(|(e, s)| e - s).collect();
                let mut fs = var_pow(&shifted);
                fs.push(Poly::monomial(rest, &c / &lc).to_expr());
                Expr::mul(fs)
            })
            .collect(),
    );
    let neg: Vec<i64> = shift.iter().map(|s| -s).collect();
    let mut den_fs = var_pow(&neg);
    den_fs.push(Expr::constant(lc.recip()));
    for (d, k) in r.denominator() {
        den_fs.push(d.to_expr().powi(*k as i64));
    }
    Ok((num, Expr::mul(den_fs)))
}

/// Coefficients of `e` as a polynomial in `vars`.
pub fn collect(e: &Expr, vars: &[&str]) -> Result<PolyCollection, ExprError> {
    let r = e.to_ratfn()?;
    let not_poly = |s: String| ExprError::NotPolynomial(s);
    for (d, _) in r.denominator() {
        if let Some(v) = vars.iter().find(|v| d.depends_on(v)) {
            return Err(ExprError::NotPolynomial(format!("denominator depends on {v}")));
        }
    }
    let mut groups: BTreeMap<Vec<u32>, Poly> = BTreeMap::new();
    for (m, c) in r.numerator().terms() {
        let (exps, rest) = split_mono(m, vars, &not_poly)?;
        if exps.iter().any(|e| e.is_negative()) {
            return Err(ExprError::NotPolynomial("negative power".into()));
        }
        let key: Vec<u32> = exps.iter().map(|e| *e as u32).collect();
        groups.entry(key).or_default().add_term(rest, c.clone());
    }
    let terms = groups
        .into_iter()
        .filter(|(_, p)| !p.is_zero())
        .map(|(k, p)| (k, RatFn::from_parts(p, r.denominator().to_vec()).to_expr()))
        .collect();
    Ok(PolyCollection {
        vars: vars.iter().map(|s| s.to_string()).collect(),
        terms,
    })
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse;
    use super::*;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn normalize_rational_examples() {
        let (n, d) = normalize_rational(&p("1/(x+y) + 1/x"), &["x", "y"]).unwrap();
        assert!(n.equivalent(&p("2*x+y")));
        assert!(d.equivalent(&p("x*(x+y)")));

        let w = p("-p^2/(x+y) - 2*y*p/(x*(x+y)) - y^2/(x^2*(x+y))");
        let (n, d) = normalize_rational(&w, &["x", "y", "p"]).unwrap();
        assert!(n.equivalent(&p("-(x*p+y)^2")));
        assert!(d.equivalent(&p("x^2*(x+y)")));

        let (n, d) = normalize_rational(&p("p"), &["p"]).unwrap();
        assert_eq!((n, d), (p("p"), p("1")));
    }

    #[test]
    fn not_rational() {
        assert!(matches!(
            normalize_rational(&p("exp(x)"), &["x"]),
            Err(ExprError::NotRational(_))
        ));
        assert!(normalize_rational(&p("exp(c)*x"), &["x"]).is_ok());
    }

    #[test]
    fn collect_examples() {
        let e = parse_with("a1*p^3 + a2*p");
        let c = collect(&e, &["p"]).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.get(&[3]), Some(&p("a1")));
        assert_eq!(c.get(&[1]), Some(&p("a2")));
        assert!(collect(&p("0"), &["p"]).unwrap().is_empty());
        assert!(matches!(
            collect(&p("1/p"), &["p"]),
            Err(ExprError::NotPolynomial(_))
        ));
        assert!(c.reassemble().equivalent(&e));
    }

    fn parse_with(s: &str) -> Expr {
        parse(s).unwrap()
    }
}
