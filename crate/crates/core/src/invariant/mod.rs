//! Invariant solutions from the invariant curve condition `eta - p xi = 0`.

mod antideriv;

pub use antideriv::{integrate, QPoly};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::detsolve::{OdeSecondOrder, VectorFieldGen};
use crate::exprcore::{diff, rat, Compiled, Expr, Rational};
use crate::numeric::{rng_from_seed, SampleDomain};

/// `y' = rhs(x, y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FirstOrderOde {
    pub rhs: Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Reduction {
    FirstOrder(FirstOrderOde),
    /// `xi = 0`: the invariant curves are `eta(x, y) = 0`.
    Locus(Expr),
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolutionForm {
    /// `y` in terms of `x` and the constant `c`.
    Explicit(Expr),
    AlgebraicLocus(Expr),
    Unsolved(FirstOrderOde),
}

impl SolutionForm {
    pub fn kind(&self) -> &'static str {
        match self {
            SolutionForm::Explicit(_) => "explicit",
            SolutionForm::AlgebraicLocus(_) => "locus",
            SolutionForm::Unsolved(_) => "unsolved",
        }
    }

    pub fn explicit(&self) -> Option<&Expr> {
        match self {
            SolutionForm::Explicit(e) => Some(e),
            _ => None,
        }
    }
}

pub fn invariant_condition(gen: &VectorFieldGen) -> Expr {
    &gen.eta - &(Expr::var("p") * &gen.xi)
}

pub fn reduce(gen: &VectorFieldGen) -> Reduction {
    if gen.xi.is_zero() {
        Reduction::Locus(gen.eta.normalize())
    } else {
        Reduction::FirstOrder(FirstOrderOde { rhs: (&gen.eta / &gen.xi).normalize() })
    }
}

/// Solve a locus `eta(x, y) = 0` for `y` when `eta` is linear in `y`.
pub fn solve_locus(eta: &Expr) -> Option<Expr> {
    let a = diff(eta, "y").normalize();
    if a.depends_on("y") || a.is_zero() {
        return None;
    }
    let b = eta.subs("y", &Expr::zero());
    Some((-b / a).normalize())
}

fn at(e: &Expr, var: &str, v: &Expr) -> Option<Expr> {
    let out = e.subs(var, v).normalize();
    if out.contains_undefined() {
        None
    } else {
        Some(out)
    }
}

fn nonzero_constant(e: &Expr) -> Option<Rational> {
    e.to_ratfn()
        .ok()?
        .as_constant()
        .filter(|c| *c != Rational::from_integer(0.into()))
}

/// `rhs = F(x) G(y)` with `G(y) = kappa (y - s)^k`.
fn solve_separable(rhs: &Expr, c: &Expr) -> Option<Expr> {
    let probes = [rat(1), rat(2), rat(3), rat(-1), Rational::new(1.into(), 2.into()), rat(5)];
    let (x0, y0, r00) = probes
        .iter()
        .flat_map(|a| probes.iter().map(move |b| (a, b)))
        .find_map(|(a, b)| {
            let v = at(&at(rhs, "x", &Expr::constant(a.clone()))?, "y", &Expr::constant(b.clone()))?;
            nonzero_constant(&v).map(|v| (a.clone(), b.clone(), v))
        })?;
    let f = at(rhs, "y", &Expr::constant(y0))?;
    let g = (at(rhs, "x", &Expr::constant(x0))? / Expr::constant(r00)).normalize();
    if f.depends_on("y") || g.depends_on("x") || !(rhs - &(&f * &g)).is_zero() {
        return None;
    }
    let big_f = integrate(&f, "x")?;
    let dg = diff(&g, "y").normalize();
    if dg.is_zero() {
        return Some((&g * &big_f + c).normalize());
    }
    let h = (&g / &dg).normalize();
    let alpha = diff(&h, "y").to_ratfn().ok()?.as_constant()?;
    let k = alpha.recip();
    let s = -(h.subs("y", &Expr::zero()).to_ratfn().ok()?.as_constant()? / &alpha);
    let y_minus_s = Expr::var("y") - Expr::constant(s.clone());
    let kappa = (&g / &Expr::pow(y_minus_s, Expr::constant(k.clone())))
        .to_ratfn()
        .ok()?
        .as_constant()?;
    let one = Rational::from_integer(1.into());
    let y = if k == one {
        Expr::constant(s) + c * &Expr::exp(Expr::constant(kappa) * big_f)
    } else {
        let e = &one - &k;
        Expr::constant(s)
            + Expr::pow(
                Expr::constant(kappa * &e) * big_f + c.clone(),
                Expr::constant(e.recip()),
            )
    };
    Some(y.normalize())
}

/// `y' = a(x) y + b(x)`: `y = e^A (int e^-A b + c)`.
fn solve_linear(rhs: &Expr, c: &Expr) -> Option<Expr> {
    let a = diff(rhs, "y").normalize();
    if a.depends_on("y") {
        return None;
    }
    let b = (rhs - &(&a * &Expr::var("y"))).normalize();
    if b.depends_on("y") {
        return None;
    }
    let big_a = integrate(&a, "x")?;
    let mu = Expr::exp(-big_a.clone()).normalize();
    let big_b = integrate(&(&mu * &b), "x")?;
    Some((Expr::exp(big_a) * (big_b + c.clone())).normalize())
}

pub fn solve_first_order(f: &FirstOrderOde) -> SolutionForm {
    let c = Expr::var("c");
    if f.rhs.depends_on("c") {
        return SolutionForm::Unsolved(f.clone());
    }
    for attempt in [solve_separable, solve_linear] {
        if let Some(y) = attempt(&f.rhs, &c) {
            if !y.contains_undefined() {
                return SolutionForm::Explicit(y);
            }
        }
    }
    SolutionForm::Unsolved(f.clone())
}

/// Reduce and solve; the locus case is solved for `y` when possible.
pub fn invariant_solution(gen: &VectorFieldGen) -> SolutionForm {
    match reduce(gen) {
        Reduction::FirstOrder(f) => solve_first_order(&f),
        Reduction::Locus(eta) => SolutionForm::AlgebraicLocus(eta),
    }
}

/// Sampling box for `(x, c)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveDomain {
    pub x: (f64, f64),
    pub c: (f64, f64),
}

impl Default for CurveDomain {
    fn default() -> Self {
        CurveDomain { x: (0.1, 3.0), c: (-2.0, 2.0) }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CurveCheck {
    pub checkable: bool,
    pub exact: bool,
    pub samples: usize,
    pub evaluated: usize,
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

impl CurveCheck {
    fn unchecked(tol: f64) -> Self {
        CurveCheck {
            checkable: false,
            exact: false,
            samples: 0,
            evaluated: 0,
            max_residual: f64::NAN,
            tol,
            pass: false,
        }
    }
}

fn sample_residual(
    residual: &Expr,
    avoid: &[Expr],
    domain: CurveDomain,
    samples: usize,
    tol: f64,
    seed: u64,
) -> CurveCheck {
    let mut out = CurveCheck { checkable: true, exact: false, samples, evaluated: 0, max_residual: 0.0, tol, pass: false };
    let vars = ["x", "c"];
    let Ok(comp) = Compiled::new(residual, &vars) else {
        return out;
    };
    let sd = SampleDomain::new(&[("x", domain.x.0, domain.x.1), ("c", domain.c.0, domain.c.1)])
        .avoiding(avoid, 1e-3);
    let mut rng = rng_from_seed(seed);
    let Ok(points) = sd.sample_with(samples, &mut rng) else {
        return out;
    };
    for pt in points {
        if let Ok(v) = comp.eval(&pt) {
            out.evaluated += 1;
            out.max_residual = out.max_residual.max(v.abs());
        } else {
            out.max_residual = f64::INFINITY;
        }
    }
    out.pass = out.evaluated == samples && out.max_residual <= tol;
    out
}

/// `Q` on `y = sol(x, c)`, exactly when it normalizes to zero, else sampled.
pub fn verify_invariance(
    gen: &VectorFieldGen,
    sol: &SolutionForm,
    domain: CurveDomain,
    tol: f64,
    seed: u64,
) -> CurveCheck {
    let Some(y) = sol.explicit() else {
        return CurveCheck::unchecked(tol);
    };
    let yp = diff(y, "x");
    let mut b = BTreeMap::new();
    b.insert("y".to_string(), y.clone());
    b.insert("p".to_string(), yp);
    let q = invariant_condition(gen).substitute(&b);
    if q.is_zero() {
        return CurveCheck {
            checkable: true,
            exact: true,
            samples: 0,
            evaluated: 0,
            max_residual: 0.0,
            tol,
            pass: true,
        };
    }
    sample_residual(&q, &[], domain, 100, tol, seed)
}

/// `y'' - omega(x, y, y')` on the curve, scaled by `1 + |y''| + |omega|`.
pub fn verify_on_ode(
    ode: &OdeSecondOrder,
    sol: &SolutionForm,
    domain: CurveDomain,
    tol: f64,
    seed: u64,
) -> CurveCheck {
    let Some(y) = sol.explicit() else {
        return CurveCheck::unchecked(tol);
    };
    let yp = diff(y, "x");
    let ypp = diff(&yp, "x");
    let mut b = BTreeMap::new();
    b.insert("y".to_string(), y.clone());
    b.insert("p".to_string(), yp);
    let w = ode.omega.substitute(&b);
    let avoid: Vec<Expr> = ode.singular_locus.iter().map(|e| e.substitute(&b)).collect();
    let scaled = (&ypp - &w) / (Expr::one() + Expr::sqrt(&ypp * &ypp) + Expr::sqrt(&w * &w));
    sample_residual(&scaled, &avoid, domain, 100, tol, seed)
}

/// True when the locus `y = y(x)` makes some singular factor of `omega` vanish.
pub fn on_singular_locus(ode: &OdeSecondOrder, y: &Expr) -> bool {
    let yp = diff(y, "x");
    let mut b = BTreeMap::new();
    b.insert("y".to_string(), y.clone());
    b.insert("p".to_string(), yp);
    ode.singular_locus.iter().any(|f| f.substitute(&b).is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprcore::parse;

    fn g(xi: &str, eta: &str) -> VectorFieldGen {
        VectorFieldGen::parse(xi, eta).unwrap()
    }

    fn solve(xi: &str, eta: &str) -> Expr {
        match invariant_solution(&g(xi, eta)) {
            SolutionForm::Explicit(y) => y,
            other => panic!("{xi}, {eta}: {other:?}"),
        }
    }

    #[test]
    fn conditions() {
        let q = invariant_condition(&g("x^2 + x", "x*y + y"));
        assert!(q.equivalent(&parse("(x*y + y) - p*(x^2 + x)").unwrap()));
        assert!(invariant_condition(&VectorFieldGen::zero()).is_zero());
        match reduce(&g("-2*x", "x - y")) {
            Reduction::FirstOrder(f) => assert!(f.rhs.equivalent(&parse("(y - x)/(2*x)").unwrap())),
            r => panic!("{r:?}"),
        }
        match reduce(&g("0", "x + y")) {
            Reduction::Locus(e) => {
                assert!(solve_locus(&e).unwrap().equivalent(&parse("-x").unwrap()))
            }
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn solved_rows() {
        assert!(solve("x^2 + x", "x*y + y").equivalent(&parse("c*x").unwrap()));
        assert!(solve("-2*x", "x - y").equivalent(&parse("c*sqrt(x) - x").unwrap()));
        assert!(solve("x^2", "x*y + y + x").equivalent(&parse("c*x*exp(-1/x) - x").unwrap()));
    }

    #[test]
    fn solutions_satisfy_their_equation() {
        for (xi, eta) in [("x", "2*y"), ("1", "y + exp(x)"), ("x", "y^2"), ("x^2", "x*y + y + x")] {
            let f = match reduce(&g(xi, eta)) {
                Reduction::FirstOrder(f) => f,
                r => panic!("{r:?}"),
            };
            let y = match solve_first_order(&f) {
                SolutionForm::Explicit(y) => y,
                other => panic!("{xi}, {eta}: {other:?}"),
            };
            let resid = diff(&y, "x") - f.rhs.subs("y", &y);
            assert!(resid.is_zero(), "{xi}, {eta}: {y}");
        }
    }

    #[test]
    fn row_five_is_unsolved() {
        assert!(matches!(
            invariant_solution(&g("x^2 - 2*x", "x*y - y + x")),
            SolutionForm::Unsolved(_)
        ));
    }

    #[test]
    fn invariance_checks() {
        let gen = g("x^2 + x", "x*y + y");
        let r = verify_invariance(&gen, &SolutionForm::Explicit(parse("c*x").unwrap()), CurveDomain::default(), 1e-9, 1);
        assert!(r.exact && r.pass);
        let row5 = g("x^2 - 2*x", "x*y - y + x");
        let sol = SolutionForm::Explicit(parse("c*sqrt(2 - x)*sqrt(x) - x").unwrap());
        let dom = CurveDomain { x: (0.1, 1.9), c: (-2.0, 2.0) };
        assert!(verify_invariance(&row5, &sol, dom, 1e-9, 1).pass);
        let un = SolutionForm::Unsolved(FirstOrderOde { rhs: Expr::zero() });
        assert!(!verify_invariance(&gen, &un, dom, 1e-9, 1).checkable);
    }

    #[test]
    fn ode_checks() {
        let plus = OdeSecondOrder::parse(
            "(x*p - y)^2/(x^2*(x + y))",
            "plus",
        )
        .unwrap();
        let row4 = SolutionForm::Explicit(parse("c*x*exp(-1/x) - x").unwrap());
        assert!(verify_on_ode(&plus, &row4, CurveDomain::default(), 1e-9, 7).pass);
        let cx = SolutionForm::Explicit(parse("c*x").unwrap());
        assert!(verify_on_ode(&plus, &cx, CurveDomain::default(), 1e-9, 7).pass);
        let wrong = SolutionForm::Explicit(parse("x^2 + c").unwrap());
        assert!(!verify_on_ode(&plus, &wrong, CurveDomain::default(), 1e-9, 7).pass);
        assert!(on_singular_locus(&plus, &parse("-x").unwrap()));
    }
}
