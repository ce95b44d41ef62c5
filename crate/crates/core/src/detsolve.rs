//! Prolongation, the linearized symmetry condition and polynomial-ansatz
//! determining systems for `y'' = omega(x, y, p)`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exprcore::{normalize_rational, parse, Atom, Compiled, Expr, ExprError, Rational};
use crate::linalg::QMatrix;
use crate::numeric::{rng_from_seed, SampleDomain};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DetError {
    #[error("right-hand side is not rational in x, y, p: {0}")]
    NotRational(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("invalid ODE fixture: {0}")]
    Fixture(String),
    #[error("determining condition is not linear in the ansatz coefficients")]
    Nonlinear,
}

/// `y'' = omega(x, y, p)`.
#[derive(Clone, Debug)]
pub struct OdeSecondOrder {
    pub name: String,
    pub omega: Expr,
    /// Denominator factors of `omega`; sampling keeps away from their zeros.
    pub singular_locus: Vec<Expr>,
}

#[derive(Deserialize)]
struct OdeFixture {
    omega: String,
    #[serde(default)]
    name: Option<String>,
}

impl OdeSecondOrder {
    pub fn new(omega: Expr, name: &str) -> Result<Self, DetError> {
        match normalize_rational(&omega, &["x", "y", "p"]) {
            Ok(_) => {}
            Err(ExprError::NotRational(s)) => return Err(DetError::NotRational(s)),
            Err(e) => return Err(e.into()),
        }
        let r = omega.to_ratfn()?;
        let mut locus: Vec<Expr> = r.denominator().iter().map(|(p, _)| p.to_expr()).collect();
        for v in ["x", "y", "p"] {
            let negative = r.numerator().terms().any(|(m, _)| {
                m.iter().any(|(a, e)| {
                    matches!(a, Atom::Var(s) if s.name() == v) && *e < Rational::zero()
                })
            });
            if negative {
                locus.push(Expr::var(v));
            }
        }
        Ok(OdeSecondOrder {
            name: name.to_string(),
            omega,
            singular_locus: locus,
        })
    }

    pub fn parse(text: &str, name: &str) -> Result<Self, DetError> {
        OdeSecondOrder::new(parse(text)?, name)
    }

    /// Read the `{"omega": .., "name": ..}` fixture format.
    pub fn from_json(text: &str) -> Result<Self, DetError> {
        let f: OdeFixture =
            serde_json::from_str(text).map_err(|e| DetError::Fixture(e.to_string()))?;
        let name = f.name.unwrap_or_else(|| f.omega.clone());
        OdeSecondOrder::parse(&f.omega, &name)
    }
}

/// `xi(x, y) d/dx + eta(x, y) d/dy`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VectorFieldGen {
    pub xi: Expr,
    pub eta: Expr,
}

impl VectorFieldGen {
    pub fn new(xi: Expr, eta: Expr) -> Self {
        VectorFieldGen { xi, eta }
    }

    pub fn parse(xi: &str, eta: &str) -> Result<Self, ExprError> {
        Ok(VectorFieldGen::new(parse(xi)?, parse(eta)?))
    }

    pub fn zero() -> Self {
        VectorFieldGen::new(Expr::zero(), Expr::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.xi.is_zero() && self.eta.is_zero()
    }

    /// Apply as a derivation: `xi f_x + eta f_y`.
    pub fn apply(&self, f: &Expr) -> Expr {
        &self.xi * f.diff("x") + &self.eta * f.diff("y")
    }

    pub fn scale(&self, s: &Expr) -> Self {
        VectorFieldGen::new(s * &self.xi, s * &self.eta)
    }

    pub fn add(&self, other: &Self) -> Self {
        VectorFieldGen::new(&self.xi + &other.xi, &self.eta + &other.eta)
    }

    pub fn normalize(&self) -> Self {
        VectorFieldGen::new(self.xi.normalize(), self.eta.normalize())
    }

    /// Exact equality modulo normalization.
    pub fn equivalent(&self, other: &Self) -> bool {
        self.xi.equivalent(&other.xi) && self.eta.equivalent(&other.eta)
    }
}

impl fmt::Display for VectorFieldGen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let part = |c: &Expr, d: &str| -> Option<String> {
            if c.is_zero_const() {
                None
            } else if c.is_one_const() {
                Some(d.to_string())
            } else {
                Some(format!("({c})*{d}"))
            }
        };
        let parts: Vec<String> = [part(&self.xi, "Dx"), part(&self.eta, "Dy")]
            .into_iter()
            .flatten()
            .collect();
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProlongedCoeffs {
    pub eta1: Expr,
    pub eta2: Expr,
}

/// Second prolongation coefficients, with `q` standing for `y''`.
pub fn prolong(gen: &VectorFieldGen) -> ProlongedCoeffs {
    let p = Expr::var("p");
    let q = Expr::var("q");
    let dxi = gen.xi.total_derivative(None);
    let eta1 = gen.eta.total_derivative(None) - &p * &dxi;
    let eta2 = eta1.total_derivative(None) - &q * &dxi;
    ProlongedCoeffs { eta1, eta2 }
}

fn condition_terms(ode: &OdeSecondOrder, gen: &VectorFieldGen) -> [Expr; 4] {
    let w = &ode.omega;
    let pc = prolong(gen);
    [
        pc.eta2.subs("q", w),
        &gen.xi * w.diff("x"),
        &gen.eta * w.diff("y"),
        &pc.eta1 * w.diff("p"),
    ]
}

/// `eta2|_{q = omega} - xi omega_x - eta omega_y - eta1 omega_p`.
pub fn symmetry_condition(ode: &OdeSecondOrder, gen: &VectorFieldGen) -> Expr {
    let [a, b, c, d] = condition_terms(ode, gen);
    a - b - c - d
}

/// Exponents `(i, j)` of `x^i y^j` with `i + j <= degree`, graded, higher `x` first.
pub fn ansatz_monomials(degree: u32) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for k in 0..=degree {
        for i in (0..=k).rev() {
            out.push((i, k - i));
        }
    }
    out
}

fn monomial(i: u32, j: u32) -> Expr {
    Expr::var("x").powi(i as i64) * Expr::var("y").powi(j as i64)
}

#[derive(Clone, Debug)]
pub struct DeterminingSystem {
    pub degree: u32,
    /// Column names; `c_i_j` multiplies `x^i y^j` in xi, `d_i_j` in eta.
    pub unknowns: Vec<String>,
    /// `(i, j)` of each unknown, with a flag for the eta half.
    pub unknown_monomials: Vec<(bool, u32, u32)>,
    /// Exponents of `x^a y^b p^c` labelling each row.
    pub labels: Vec<(i64, i64, i64)>,
    pub rows: QMatrix,
}

impl DeterminingSystem {
    pub fn generator_from(&self, v: &[Rational]) -> VectorFieldGen {
        let mut xi = Vec::new();
        let mut eta = Vec::new();
        for (k, &(is_eta, i, j)) in self.unknown_monomials.iter().enumerate() {
            if v[k].is_zero() {
                continue;
            }
            let term = Expr::constant(v[k].clone()) * monomial(i, j);
            if is_eta {
                eta.push(term);
            } else {
                xi.push(term);
            }
        }
        VectorFieldGen::new(Expr::add(xi), Expr::add(eta))
    }

    pub fn solution_dimension(&self) -> usize {
        self.unknowns.len() - self.rows.rank()
    }
}

/// Build the determining system with the default unknown ordering.
pub fn determining_system(ode: &OdeSecondOrder, degree: u32) -> Result<DeterminingSystem, DetError> {
    let n = 2 * ansatz_monomials(degree).len();
    let order: Vec<usize> = (0..n).collect();
    determining_system_ordered(ode, degree, &order)
}

/// Build the determining system with unknown columns permuted by `order`.
pub fn determining_system_ordered(
    ode: &OdeSecondOrder,
    degree: u32,
    order: &[usize],
) -> Result<DeterminingSystem, DetError> {
    let monos = ansatz_monomials(degree);
    let mut base = Vec::new();
    for &(i, j) in &monos {
        base.push((false, i, j));
    }
    for &(i, j) in &monos {
        base.push((true, i, j));
    }
    assert_eq!(order.len(), base.len(), "ordering must permute all unknowns");
    let unknown_monomials: Vec<(bool, u32, u32)> = order.iter().map(|&k| base[k]).collect();
    let unknowns: Vec<String> = unknown_monomials
        .iter()
        .map(|&(is_eta, i, j)| format!("{}_{}_{}", if is_eta { "d" } else { "c" }, i, j))
        .collect();
    let mut xi = Vec::new();
    let mut eta = Vec::new();
    for (name, &(is_eta, i, j)) in unknowns.iter().zip(&unknown_monomials) {
        let term = Expr::var(name) * monomial(i, j);
        if is_eta {
            eta.push(term);
        } else {
            xi.push(term);
        }
    }
    let gen = VectorFieldGen::new(Expr::add(xi), Expr::add(eta));
    let cond = symmetry_condition(ode, &gen);
    let r = cond.to_ratfn()?;
    let column: BTreeMap<&str, usize> = unknowns
        .iter()
        .enumerate()
        .map(|(k, s)| (s.as_str(), k))
        .collect();
    let mut rows: BTreeMap<(i64, i64, i64), Vec<Rational>> = BTreeMap::new();
    for (m, c) in r.numerator().terms() {
        let mut label = (0i64, 0i64, 0i64);
        let mut col = None;
        for (a, e) in m {
            let Atom::Var(s) = a else {
                return Err(DetError::NotRational(format!("{:?}", a)));
            };
            let exp = || -> Result<i64, DetError> {
                if e.is_integer() {
                    Ok(e.to_integer().to_i64().unwrap_or(0))
                } else {
                    Err(DetError::NotRational(format!("fractional power of {s}")))
                }
            };
            match s.name() {
                "x" => label.0 = exp()?,
                "y" => label.1 = exp()?,
                "p" => label.2 = exp()?,
                name => match column.get(name) {
                    Some(&k) if e.is_one() && col.is_none() => col = Some(k),
                    _ => return Err(DetError::Nonlinear),
                },
            }
        }
        let k = col.ok_or(DetError::Nonlinear)?;
        rows.entry(label)
            .or_insert_with(|| vec![Rational::zero(); unknowns.len()])[k] += c;
    }
    rows.retain(|_, v| v.iter().any(|c| !c.is_zero()));
    let labels = rows.keys().copied().collect();
    let matrix = if rows.is_empty() {
        QMatrix::zeros(0, unknowns.len())
    } else {
        QMatrix::from_rows(rows.into_values().collect())
    };
    Ok(DeterminingSystem {
        degree,
        unknowns,
        unknown_monomials,
        labels,
        rows: matrix,
    })
}

/// Basis of the polynomial point symmetries of total degree at most `degree`.
pub fn solve_symmetries(ode: &OdeSecondOrder, degree: u32) -> Result<Vec<VectorFieldGen>, DetError> {
    let sys = determining_system(ode, degree)?;
    let basis = if sys.rows.rows() == 0 {
        (0..sys.unknowns.len())
            .map(|k| {
                let mut v = vec![Rational::zero(); sys.unknowns.len()];
                v[k] = Rational::one();
                v
            })
            .collect()
    } else {
        sys.rows.nullspace()
    };
    Ok(basis.iter().map(|v| sys.generator_from(v)).collect())
}

/// Numeric audit of the symmetry condition.
#[derive(Clone, Debug, Serialize)]
pub struct SymmetryAudit {
    pub samples: usize,
    pub evaluated: usize,
    pub max_residual: f64,
    /// `|residual| / (1 + sum of |condition terms|)`, the quantity compared with `tol`.
    pub max_scaled_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Default sampling box for `(x, y, p)`.
pub fn default_domain(ode: &OdeSecondOrder) -> SampleDomain {
    SampleDomain::new(&[("x", 0.2, 3.0), ("y", -3.0, 3.0), ("p", -3.0, 3.0)])
        .avoiding(&ode.singular_locus, 1e-3)
}

pub fn is_symmetry(
    ode: &OdeSecondOrder,
    gen: &VectorFieldGen,
    samples: usize,
    tol: f64,
    seed: u64,
) -> SymmetryAudit {
    let mut audit = SymmetryAudit {
        samples,
        evaluated: 0,
        max_residual: 0.0,
        max_scaled_residual: 0.0,
        tol,
        pass: true,
    };
    if gen.xi.is_zero_const() && gen.eta.is_zero_const() {
        return audit;
    }
    let vars = ["x", "y", "p"];
    let terms: Vec<Compiled> = match condition_terms(ode, gen)
        .iter()
        .map(|t| Compiled::new(t, &vars))
        .collect::<Result<Vec<_>, _>>()
    {
        Ok(t) => t,
        Err(_) => {
            audit.pass = false;
            return audit;
        }
    };
    let mut rng = rng_from_seed(seed);
    let Ok(points) = default_domain(ode).sample_with(samples, &mut rng) else {
        audit.pass = false;
        return audit;
    };
    for pt in points {
        let vals: Result<Vec<f64>, _> = terms.iter().map(|t| t.eval(&pt)).collect();
        let Ok(v) = vals else { continue };
        let res = v[0] - v[1] - v[2] - v[3];
        let mag: f64 = v.iter().map(|t| t.abs()).sum();
        audit.evaluated += 1;
        audit.max_residual = audit.max_residual.max(res.abs());
        audit.max_scaled_residual = audit.max_scaled_residual.max(res.abs() / (1.0 + mag));
    }
    audit.pass = audit.evaluated > 0 && audit.max_scaled_residual <= tol;
    audit
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(xi: &str, eta: &str) -> VectorFieldGen {
        VectorFieldGen::parse(xi, eta).unwrap()
    }

    #[test]
    fn prolongation_examples() {
        let pc = prolong(&g("x", "y"));
        assert!(pc.eta1.is_zero());
        assert!(pc.eta2.equivalent(&-Expr::var("q")));
        let pc = prolong(&g("0", "exp(2*x)"));
        assert!(pc.eta1.equivalent(&parse("2*exp(2*x)").unwrap()));
        assert!(pc.eta2.equivalent(&parse("4*exp(2*x)").unwrap()));
        let pc = prolong(&VectorFieldGen::zero());
        assert!(pc.eta1.is_zero() && pc.eta2.is_zero());
    }

    #[test]
    fn first_prolongation_closed_form() {
        let gen = g("x^2 + y", "x*y - y^2");
        let p = Expr::var("p");
        let expected = gen.eta.diff("x") + (gen.eta.diff("y") - gen.xi.diff("x")) * &p
            - gen.xi.diff("y") * p.powi(2);
        assert!(prolong(&gen).eta1.equivalent(&expected));
    }

    #[test]
    fn free_particle_has_eight_symmetries() {
        let ode = OdeSecondOrder::parse("0", "free").unwrap();
        let gens = solve_symmetries(&ode, 2).unwrap();
        assert_eq!(gens.len(), 8);
        for gen in &gens {
            assert!(symmetry_condition(&ode, gen).is_zero());
        }
        assert!(symmetry_condition(&ode, &g("0", "x")).is_zero());
    }

    #[test]
    fn not_rational_is_rejected() {
        assert!(matches!(
            OdeSecondOrder::parse("exp(x)", "bad"),
            Err(DetError::NotRational(_))
        ));
    }

    #[test]
    fn singular_locus_lists_denominators() {
        let ode = OdeSecondOrder::parse("(x*p-y)^2/(x^2*(x+y))", "plus").unwrap();
        assert_eq!(ode.singular_locus.len(), 2);
        let ode = OdeSecondOrder::parse("3", "const").unwrap();
        assert!(ode.singular_locus.is_empty());
    }

    #[test]
    fn fixture_json() {
        let ode = OdeSecondOrder::from_json(r#"{"omega": "0", "name": "free"}"#).unwrap();
        assert_eq!(ode.name, "free");
        assert!(OdeSecondOrder::from_json("{}").is_err());
    }

    #[test]
    fn zero_field_passes_audit() {
        let ode = OdeSecondOrder::parse("y", "lin").unwrap();
        assert!(is_symmetry(&ode, &VectorFieldGen::zero(), 10, 1e-9, 1).pass);
    }
}
