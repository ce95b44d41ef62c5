//! Closed-form `exp(t A)` for rational matrices with rational spectrum.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{LieAlgebra, LieError};
use crate::exprcore::{Expr, Rational};
use crate::linalg::QMatrix;

/// `sum c t^m e^(mu t)` keyed by `(mu, m)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExpPoly {
    terms: BTreeMap<(Rational, u32), Rational>,
}

impl ExpPoly {
    pub fn zero() -> Self {
        ExpPoly::default()
    }

    pub fn exp(mu: Rational) -> Self {
        let mut p = ExpPoly::zero();
        p.terms.insert((mu, 0), Rational::one());
        p
    }

    fn add_term(&mut self, mu: Rational, m: u32, c: Rational) {
        if c.is_zero() {
            return;
        }
        let key = (mu, m);
        let v = self.terms.entry(key.clone()).or_insert_with(Rational::zero);
        *v += c;
        if v.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `((mu, m), c)` for each term `c t^m e^(mu t)`.
    pub fn terms(&self) -> impl Iterator<Item = (&(Rational, u32), &Rational)> {
        self.terms.iter()
    }

    /// Solution of `r' = mu r + self`, `r(0) = 0`.
    pub fn integrate_forced(&self, mu: &Rational) -> ExpPoly {
        let mut out = ExpPoly::zero();
        for ((nu, m), c) in &self.terms {
            if nu == mu {
                out.add_term(mu.clone(), m + 1, c / Rational::from_integer((m + 1).into()));
                continue;
            }
            // int_0^t s^m e^(a s) ds with a = nu - mu, then times e^(mu t)
            let a = nu - mu;
            let mut fall = Rational::one();
            let mut apow = a.clone();
            for k in 0..=*m {
                let sign = if k % 2 == 0 { Rational::one() } else { -Rational::one() };
                out.add_term(nu.clone(), m - k, c * &sign * &fall / &apow);
                fall *= Rational::from_integer((m - k).into());
                apow *= &a;
            }
            let m_fact: BigInt = (1..=*m as u64).map(BigInt::from).product();
            let sign = if m % 2 == 0 { Rational::one() } else { -Rational::one() };
            let f0 = sign * Rational::from_integer(m_fact) / a.pow((*m + 1) as i32);
            out.add_term(mu.clone(), 0, -(c * f0));
        }
        out
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|((mu, m), c)| to_f64(c) * t.powi(*m as i32) * (to_f64(mu) * t).exp())
            .sum()
    }

    pub fn to_expr(&self, t: &Expr) -> Expr {
        Expr::add(
            self.terms
                .iter()
                .map(|((mu, m), c)| {
                    Expr::mul(vec![
                        Expr::constant(c.clone()),
                        t.powi(*m as i64),
                        Expr::exp(Expr::constant(mu.clone()) * t),
                    ])
                })
                .collect(),
        )
    }
}

fn to_f64(r: &Rational) -> f64 {
    let n: f64 = r.numer().to_string().parse().unwrap_or(f64::NAN);
    let d: f64 = r.denom().to_string().parse().unwrap_or(f64::NAN);
    n / d
}

/// Rational roots with multiplicity of a polynomial (coefficients lowest
/// first), or `None` when some root is irrational.
pub fn rational_roots(coeffs: &[Rational]) -> Option<Vec<Rational>> {
    let mut p: Vec<Rational> = coeffs.to_vec();
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    let mut roots = Vec::new();
    while p.len() > 1 && p[0].is_zero() {
        roots.push(Rational::zero());
        p.remove(0);
    }
    if p.len() <= 1 {
        return Some(roots);
    }
    let l = p.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = p.iter().map(|c| c.numer() * (&l / c.denom())).collect();
    let lead = ints.last().unwrap().abs();
    let tail = ints[0].abs();
    let candidates: Vec<Rational> = divisors(&tail)
        .iter()
        .flat_map(|a| {
            divisors(&lead).into_iter().flat_map(move |b| {
                let r = Rational::new(a.clone(), b);
                [r.clone(), -r]
            })
        })
        .collect();
    for r in candidates {
        while p.len() > 1 && horner(&p, &r).is_zero() {
            p = deflate(&p, &r);
            roots.push(r.clone());
        }
    }
    if p.len() > 1 {
        return None;
    }
    roots.sort();
    Some(roots)
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    let mut out = Vec::new();
    let mut d = BigInt::one();
    while &d * &d <= *n {
        if (n % &d).is_zero() {
            out.push(d.clone());
            let q = n / &d;
            if q != d {
                out.push(q);
            }
        }
        d += 1;
    }
    out
}

fn horner(p: &[Rational], x: &Rational) -> Rational {
    p.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
}

fn deflate(p: &[Rational], r: &Rational) -> Vec<Rational> {
    let n = p.len() - 1;
    let mut q = vec![Rational::zero(); n];
    let mut carry = Rational::zero();
    for k in (0..n).rev() {
        carry = &p[k + 1] + carry * r;
        q[k] = carry.clone();
    }
    q
}

/// `exp(t A) = sum_k r_(k+1)(t) P_k` with `P_k = prod_(m<=k) (A - l_m I)`.
pub fn putzer(a: &QMatrix) -> Result<Vec<(ExpPoly, QMatrix)>, LieError> {
    let n = a.rows();
    let eig = rational_roots(&a.char_poly()).ok_or(LieError::IrrationalEigenvalues)?;
    let mut terms = Vec::with_capacity(n);
    let mut p = QMatrix::identity(n);
    let mut r = ExpPoly::exp(eig[0].clone());
    for k in 0..n {
        if k > 0 {
            p = p.mul(&a.add(&QMatrix::identity(n).scale(&-eig[k - 1].clone())));
            r = r.integrate_forced(&eig[k]);
        }
        terms.push((r.clone(), p.clone()));
    }
    Ok(terms)
}

/// Entries of `Ad(exp(t e_i))` as exponential polynomials in `t`;
/// column `j` holds the image of `e_j`.
pub fn adjoint_exp_poly(l: &LieAlgebra, i: usize) -> Result<Vec<Vec<ExpPoly>>, LieError> {
    let n = l.dim();
    let a = l.ad_basis(i).scale(&-Rational::one());
    let terms = putzer(&a)?;
    let mut out = vec![vec![ExpPoly::zero(); n]; n];
    for (r, p) in &terms {
        for (row_idx, row) in out.iter_mut().enumerate() {
            for (col_idx, slot) in row.iter_mut().enumerate() {
                let c = &p[(row_idx, col_idx)];
                if !c.is_zero() {
                    for ((mu, m), v) in r.terms() {
                        slot.add_term(mu.clone(), *m, c * v);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Matrix of `Y -> Ad(exp(lam e_i)) Y`; column `j` holds the image of `e_j`.
pub fn adjoint_exp(l: &LieAlgebra, i: usize, lam: &Expr) -> Result<Vec<Vec<Expr>>, LieError> {
    Ok(adjoint_exp_poly(l, i)?
        .iter()
        .map(|row| row.iter().map(|e| e.to_expr(lam)).collect())
        .collect())
}

/// Numeric `exp(t A)` from the Putzer terms.
pub fn eval_terms(terms: &[(ExpPoly, QMatrix)], t: f64) -> Vec<Vec<f64>> {
    let n = terms.first().map_or(0, |(_, p)| p.rows());
    let mut out = vec![vec![0.0; n]; n];
    for (r, p) in terms {
        let s = r.eval(t);
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v += s * to_f64(&p[(i, j)]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprcore::{rat, ratio};

    #[test]
    fn roots_with_multiplicity() {
        // (t - 1)^2 (t + 1/2) t
        let c = vec![rat(0), ratio(1, 2), rat(0), ratio(-3, 2), rat(1)];
        assert_eq!(
            rational_roots(&c).unwrap(),
            vec![ratio(-1, 2), rat(0), rat(1), rat(1)]
        );
        assert!(rational_roots(&[rat(-2), rat(0), rat(1)]).is_none());
    }

    #[test]
    fn jordan_block() {
        // [[2,1],[0,2]] -> e^(2t) [[1,t],[0,1]]
        let a = QMatrix::from_i64(&[&[2, 1], &[0, 2]]);
        let m = eval_terms(&putzer(&a).unwrap(), 0.7);
        let e = (1.4f64).exp();
        assert!((m[0][0] - e).abs() < 1e-12);
        assert!((m[0][1] - 0.7 * e).abs() < 1e-12);
        assert!(m[1][0].abs() < 1e-12);
    }

    #[test]
    fn distinct_eigenvalues_match_series() {
        let a = QMatrix::from_i64(&[&[1, 2, 0], &[0, -1, 3], &[0, 0, 2]]);
        let t = 0.3;
        let m = eval_terms(&putzer(&a).unwrap(), t);
        let af: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| to_f64(&a[(i, j)])).collect()).collect();
        let mut series = vec![vec![0.0; 3]; 3];
        let mut term: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        for k in 0..40 {
            for i in 0..3 {
                for j in 0..3 {
                    series[i][j] += term[i][j];
                }
            }
            let mut next = vec![vec![0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    next[i][j] = (0..3).map(|l| term[i][l] * af[l][j]).sum::<f64>() * t / (k + 1) as f64;
                }
            }
            term = next;
        }
        for i in 0..3 {
            for j in 0..3 {
                assert!((m[i][j] - series[i][j]).abs() < 1e-12);
            }
        }
    }
}
