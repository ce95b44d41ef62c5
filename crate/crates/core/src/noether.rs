//! Jacobi last multiplier, Lagrangians, variational symmetries and first integrals.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detsolve::{default_domain, prolong, OdeSecondOrder, VectorFieldGen};
use crate::exprcore::{diff, parse, total_derivative, Compiled, Expr, ExprError};
use crate::numeric::{rk4_integrate, rng_from_seed, Termination, RETRY_CAP};

#[derive(Debug, Error)]
pub enum NoetherError {
    #[error("multiplier is not of the form a(x, y)/(b(x, y) - p)")]
    UnsupportedMultiplierShape,
    #[error("trajectory sampling exhausted {0} attempts")]
    IntegrationBlowup(usize),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("invalid fixture: {0}")]
    Fixture(String),
}

/// First row of the multiplier determinant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FirstRow {
    /// `(x, p, omega)`.
    Paper,
    /// `(1, p, omega)`.
    Standard,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lagrangian(pub Expr);

#[derive(Clone, Debug, PartialEq)]
pub struct ConservedQuantity(pub Expr);

fn det3_rows(m: &[[Expr; 3]; 3]) -> Expr {
    let minor = |r1: usize, r2: usize, c1: usize, c2: usize| {
        &m[r1][c1] * &m[r2][c2] - &m[r1][c2] * &m[r2][c1]
    };
    &m[0][0] * &minor(1, 2, 1, 2) - &m[0][1] * &minor(1, 2, 0, 2) + &m[0][2] * &minor(1, 2, 0, 1)
}

fn det3_cols(m: &[[Expr; 3]; 3]) -> Expr {
    let minor = |r1: usize, r2: usize, c1: usize, c2: usize| {
        &m[r1][c1] * &m[r2][c2] - &m[r1][c2] * &m[r2][c1]
    };
    &m[0][0] * &minor(1, 2, 1, 2) - &m[1][0] * &minor(0, 2, 1, 2) + &m[2][0] * &minor(0, 1, 1, 2)
}

pub fn jlm_matrix(
    ode: &OdeSecondOrder,
    g1: &VectorFieldGen,
    g2: &VectorFieldGen,
    row: FirstRow,
) -> [[Expr; 3]; 3] {
    let first = match row {
        FirstRow::Paper => Expr::var("x"),
        FirstRow::Standard => Expr::one(),
    };
    [
        [first, Expr::var("p"), ode.omega.clone()],
        [g1.xi.clone(), g1.eta.clone(), prolong(g1).eta1],
        [g2.xi.clone(), g2.eta.clone(), prolong(g2).eta1],
    ]
}

/// Determinant expanded along the first row; the first-column expansion
/// must agree.
pub fn jlm_determinant(
    ode: &OdeSecondOrder,
    g1: &VectorFieldGen,
    g2: &VectorFieldGen,
    row: FirstRow,
) -> Expr {
    let m = jlm_matrix(ode, g1, g2, row);
    let d = det3_rows(&m).normalize();
    debug_assert!(d.equivalent(&det3_cols(&m)));
    d
}

/// Determinant by the first-column expansion.
pub fn jlm_determinant_by_columns(
    ode: &OdeSecondOrder,
    g1: &VectorFieldGen,
    g2: &VectorFieldGen,
    row: FirstRow,
) -> Expr {
    det3_cols(&jlm_matrix(ode, g1, g2, row)).normalize()
}

/// Integrate `M = a / (b - p)` twice in `p`, gauge terms dropped.
pub fn lagrangian_from_multiplier(m: &Expr) -> Result<Lagrangian, NoetherError> {
    let m = m.normalize();
    if m.is_zero() {
        return Err(NoetherError::UnsupportedMultiplierShape);
    }
    let p = Expr::var("p");
    let l = if !m.depends_on("p") {
        &m * &p.powi(2) / Expr::int(2)
    } else {
        // 1/M = d p + n0 = -d (b - p) with b = -n0 / d
        let inv = (Expr::one() / &m).normalize();
        let d = diff(&inv, "p").normalize();
        if d.is_zero() || d.depends_on("p") {
            return Err(NoetherError::UnsupportedMultiplierShape);
        }
        let n0 = inv.subs("p", &Expr::zero()).normalize();
        let a = (-(Expr::one() / &d)).normalize();
        let b = (-(&n0 / &d)).normalize();
        let u = &b - &p;
        &a * &(&u * &Expr::ln(u.clone()) + p.clone())
    };
    let l = l.normalize();
    let back = diff(&diff(&l, "p"), "p");
    if !(&back - &m).is_zero() {
        return Err(NoetherError::UnsupportedMultiplierShape);
    }
    Ok(Lagrangian(l))
}

/// `L_y - D_x L_p`, with `q` for `y''`.
pub fn euler_lagrange(l: &Lagrangian) -> Expr {
    let lp = diff(&l.0, "p");
    (diff(&l.0, "y") - total_derivative(&lp, None)).normalize()
}

#[derive(Clone, Debug, Serialize)]
pub struct ElReport {
    pub ode: String,
    pub samples: usize,
    pub evaluated: usize,
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
    /// Range of `E(L) / (q - omega)` at random `q`.
    pub multiplier_range: (f64, f64),
}

pub fn el_matches_ode(
    l: &Lagrangian,
    ode: &OdeSecondOrder,
    tol: f64,
    samples: usize,
    seed: u64,
) -> ElReport {
    let e = euler_lagrange(l);
    let on_shell = e.subs("q", &ode.omega);
    let vars = ["x", "y", "p", "q"];
    let mut report = ElReport {
        ode: ode.name.clone(),
        samples,
        evaluated: 0,
        max_residual: 0.0,
        tol,
        pass: false,
        multiplier_range: (f64::INFINITY, f64::NEG_INFINITY),
    };
    let (Ok(res), Ok(full), Ok(w)) = (
        Compiled::new(&on_shell, &vars),
        Compiled::new(&e, &vars),
        Compiled::new(&ode.omega, &vars),
    ) else {
        return report;
    };
    let mut rng = rng_from_seed(seed);
    let Ok(points) = default_domain(ode).sample_with(samples, &mut rng) else {
        return report;
    };
    for (k, pt) in points.iter().enumerate() {
        let q = -2.0 + 4.0 * ((k as f64 * 0.618_033_988_75).fract());
        let v = [pt[0], pt[1], pt[2], q];
        let (Ok(r), Ok(ev), Ok(wv)) = (res.eval(&v), full.eval(&v), w.eval(&v)) else {
            continue;
        };
        report.evaluated += 1;
        report.max_residual = report.max_residual.max(r.abs());
        if (q - wv).abs() > 1e-6 {
            let mult = ev / (q - wv);
            report.multiplier_range.0 = report.multiplier_range.0.min(mult);
            report.multiplier_range.1 = report.multiplier_range.1.max(mult);
        }
    }
    report.pass = report.evaluated > 0 && report.max_residual < tol;
    report
}

/// `xi L_x + xi_x L + eta L_y + eta_[x] L_p - D_x f`.
pub fn variational_residual(l: &Lagrangian, gen: &VectorFieldGen, f: &Expr) -> Expr {
    let lx = diff(&l.0, "x");
    let ly = diff(&l.0, "y");
    let lp = diff(&l.0, "p");
    let eta1 = prolong(gen).eta1;
    let dxf = total_derivative(f, None);
    (&gen.xi * &lx + diff(&gen.xi, "x") * &l.0 + &gen.eta * &ly + eta1 * lp - dxf).normalize()
}

/// `(xi p - eta) L_p - xi L + f`.
pub fn conserved_quantity(l: &Lagrangian, gen: &VectorFieldGen, f: &Expr) -> ConservedQuantity {
    let p = Expr::var("p");
    let lp = diff(&l.0, "p");
    ConservedQuantity(((&gen.xi * &p - &gen.eta) * lp - &gen.xi * &l.0 + f.clone()).normalize())
}

/// `D_x I` with `y'' = omega`.
pub fn total_derivative_on_shell(i: &ConservedQuantity, ode: &OdeSecondOrder) -> Expr {
    total_derivative(&i.0, Some(&ode.omega)).normalize()
}

#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryDrift {
    pub initial: (f64, f64, f64),
    pub steps: usize,
    pub i0: f64,
    pub max_relative_drift: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConservationReport {
    pub trajectories: Vec<TrajectoryDrift>,
    pub step: f64,
    pub span: f64,
    pub rejected_starts: usize,
    pub max_relative_drift: f64,
    pub tol: f64,
    pub pass: bool,
}

/// RK4 audit of `I` from random non-singular starts.
pub fn check_conserved(
    ode: &OdeSecondOrder,
    i: &ConservedQuantity,
    trajectories: usize,
    step: f64,
    span: f64,
    tol: f64,
    seed: u64,
) -> Result<ConservationReport, NoetherError> {
    let vars = ["x", "y", "p"];
    let comp = Compiled::new(&i.0, &vars)?;
    let domain = default_domain(ode);
    let mut rng = rng_from_seed(seed);
    let steps = (span / step).round() as usize;
    let mut out = Vec::new();
    let mut rejected = 0;
    while out.len() < trajectories {
        if rejected >= RETRY_CAP {
            return Err(NoetherError::IntegrationBlowup(rejected));
        }
        let start = domain
            .sample_with(1, &mut rng)
            .map_err(|_| NoetherError::IntegrationBlowup(rejected))?;
        let (x0, y0, p0) = (start[0][0], start[0][1], start[0][2]);
        let Ok(i0) = comp.eval(&[x0, y0, p0]) else {
            rejected += 1;
            continue;
        };
        let traj = rk4_integrate(ode, x0, y0, p0, step, steps);
        if traj.termination != Termination::Completed {
            rejected += 1;
            continue;
        }
        let scale = i0.abs().max(1.0);
        let mut drift: f64 = 0.0;
        let mut ok = true;
        for &(x, y, p) in &traj.points {
            match comp.eval(&[x, y, p]) {
                Ok(v) => drift = drift.max((v - i0).abs() / scale),
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            rejected += 1;
            continue;
        }
        out.push(TrajectoryDrift { initial: (x0, y0, p0), steps, i0, max_relative_drift: drift });
    }
    let max = out.iter().map(|t| t.max_relative_drift).fold(0.0, f64::max);
    Ok(ConservationReport {
        trajectories: out,
        step,
        span,
        rejected_starts: rejected,
        max_relative_drift: max,
        tol,
        pass: max < tol,
    })
}

#[derive(Clone, Debug, Deserialize)]
struct GenFixture {
    xi: String,
    eta: String,
}

#[derive(Clone, Debug, Deserialize)]
struct NoetherFixtureJson {
    lagrangian: String,
    generator: GenFixture,
    gauge: String,
}

/// Lagrangian, generator and gauge term of a variational symmetry.
#[derive(Clone, Debug)]
pub struct NoetherFixture {
    pub lagrangian: Lagrangian,
    pub generator: VectorFieldGen,
    pub gauge: Expr,
}

impl NoetherFixture {
    pub fn from_json(text: &str) -> Result<Self, NoetherError> {
        let f: NoetherFixtureJson =
            serde_json::from_str(text).map_err(|e| NoetherError::Fixture(e.to_string()))?;
        Ok(NoetherFixture {
            lagrangian: Lagrangian(parse(&f.lagrangian)?),
            generator: VectorFieldGen::new(parse(&f.generator.xi)?, parse(&f.generator.eta)?),
            gauge: parse(&f.gauge)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(xi: &str, eta: &str) -> VectorFieldGen {
        VectorFieldGen::parse(xi, eta).unwrap()
    }

    fn free() -> OdeSecondOrder {
        OdeSecondOrder::parse("0", "free").unwrap()
    }

    fn half_p2() -> Lagrangian {
        Lagrangian(parse("1/2*p^2").unwrap())
    }

    #[test]
    fn determinants() {
        let ode = free();
        let d = jlm_determinant(&ode, &g("1", "0"), &g("0", "x"), FirstRow::Standard);
        let by_cols = jlm_determinant_by_columns(&ode, &g("1", "0"), &g("0", "x"), FirstRow::Standard);
        assert!(d.equivalent(&by_cols));
        assert!(d.equivalent(&parse("-p").unwrap()));
        let gen = g("x^2", "x*y");
        assert!(jlm_determinant(&ode, &gen, &gen, FirstRow::Paper).is_zero());
    }

    #[test]
    fn multiplier_to_lagrangian() {
        let l = lagrangian_from_multiplier(&parse("x^(-1)/(x + 2*y - p)").unwrap()).unwrap();
        let printed = parse(
            "-p/x*ln(x + 2*y - p) + (1 + 2*y/x)*ln(x + 2*y - p) + p/x",
        )
        .unwrap();
        assert!(l.0.equivalent(&printed), "{}", l.0);
        let free_l = lagrangian_from_multiplier(&Expr::one()).unwrap();
        assert!(free_l.0.equivalent(&parse("1/2*p^2").unwrap()));
        assert!(lagrangian_from_multiplier(&parse("1/(x - p^2)").unwrap()).is_err());
    }

    #[test]
    fn euler_lagrange_basics() {
        assert!(euler_lagrange(&half_p2()).equivalent(&-Expr::var("q")));
        assert!(euler_lagrange(&Lagrangian(parse("y").unwrap())).equivalent(&Expr::one()));
        assert!(el_matches_ode(&half_p2(), &free(), 1e-9, 50, 1).pass);
        let plus = OdeSecondOrder::parse("(x*p - y)^2/(x^2*(x + y))", "plus").unwrap();
        assert!(!el_matches_ode(&half_p2(), &plus, 1e-9, 50, 1).pass);
    }

    #[test]
    fn free_particle_noether() {
        let l = half_p2();
        assert!(variational_residual(&l, &g("0", "1"), &Expr::zero()).is_zero());
        assert!(variational_residual(&l, &g("0", "x"), &parse("y").unwrap()).is_zero());
        let mom = conserved_quantity(&l, &g("0", "1"), &Expr::zero());
        assert!(mom.0.equivalent(&parse("-p").unwrap()));
        let energy = conserved_quantity(&l, &g("1", "0"), &Expr::zero());
        assert!(energy.0.equivalent(&parse("1/2*p^2").unwrap()));
        for i in [&mom, &energy] {
            assert!(total_derivative_on_shell(i, &free()).is_zero());
        }
        let c = conserved_quantity(&l, &VectorFieldGen::zero(), &Expr::int(3));
        assert!(c.0.equivalent(&Expr::int(3)));
    }

    #[test]
    fn conservation_audit() {
        let ode = free();
        let p = ConservedQuantity(parse("p").unwrap());
        let r = check_conserved(&ode, &p, 5, 1e-3, 1.0, 1e-10, 2).unwrap();
        assert!(r.pass);
        let y = ConservedQuantity(parse("y").unwrap());
        assert!(!check_conserved(&ode, &y, 5, 1e-3, 1.0, 1e-6, 2).unwrap().pass);
    }
}
