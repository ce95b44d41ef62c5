//! Extraction of linear systems from expressions affine in designated unknowns.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::expr::{Expr, Rational};
use super::ratfn::{Atom, Mono};
use super::ExprError;

/// Rows of `A a = b` such that every expression vanishes identically iff
/// the unknowns `a` satisfy the system. Each expression must be affine in
/// the unknowns with coefficients free of them.
pub fn linear_equations(
    exprs: &[Expr],
    unknowns: &[&str],
) -> Result<(Vec<Vec<Rational>>, Vec<Rational>), ExprError> {
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for e in exprs {
        let r = e.to_ratfn()?;
        let mut groups: BTreeMap<Mono, (Vec<Rational>, Rational)> = BTreeMap::new();
        for (m, c) in r.numerator().terms() {
            let mut rest = Mono::new();
            let mut col = None;
            for (a, ex) in m {
                if let Atom::Var(s) = a {
                    if let Some(k) = unknowns.iter().position(|u| *u == s.name()) {
                        if !ex.is_one() || col.is_some() {
                            return Err(ExprError::NotPolynomial(
                                "unknowns must appear linearly".into(),
                            ));
                        }
                        col = Some(k);
                        continue;
                    }
                }
                if unknowns.iter().any(|u| a.depends_on(u)) {
                    return Err(ExprError::NotPolynomial(
                        "unknowns must appear linearly".into(),
                    ));
                }
                rest.insert(a.clone(), ex.clone());
            }
            let entry = groups
                .entry(rest)
                .or_insert_with(|| (vec![Rational::zero(); unknowns.len()], Rational::zero()));
            match col {
                Some(k) => entry.0[k] += c,
                None => entry.1 -= c,
            }
        }
        for (_, (row, b)) in groups {
            if row.iter().all(Zero::is_zero) && b.is_zero() {
                continue;
            }
            rows.push(row);
            rhs.push(b);
        }
    }
    Ok((rows, rhs))
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse_with_symbols;
    use super::*;

    #[test]
    fn affine_system() {
        let e = parse_with_symbols("u*x + v*x^2 - 2*x - 3*x^2", &["u", "v"]).unwrap();
        let (rows, rhs) = linear_equations(&[e], &["u", "v"]).unwrap();
        assert_eq!(rows.len(), 2);
        let total: Vec<Rational> = rows.iter().map(|r| r.iter().sum()).collect();
        assert_eq!(total.iter().sum::<Rational>(), Rational::one() + Rational::one());
        assert_eq!(rhs.iter().sum::<Rational>(), Rational::from_integer(5.into()));
    }

    #[test]
    fn rejects_nonlinear() {
        let e = parse_with_symbols("u*v", &["u", "v"]).unwrap();
        assert!(linear_equations(&[e], &["u", "v"]).is_err());
    }
}
