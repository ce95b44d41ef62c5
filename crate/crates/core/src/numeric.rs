//! Seeded sampling, RK4 integration and finite-difference checks.
//!
//! All randomness comes from ChaCha8 seeded with a caller-supplied `u64`.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::detsolve::OdeSecondOrder;
use crate::exprcore::{Compiled, Expr, ExprError};

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("no admissible sample after {0} attempts")]
    DomainTooRestrictive(usize),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

pub const RETRY_CAP: usize = 1000;
const BLOWUP: f64 = 1e8;
const SINGULAR_PROXIMITY: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Termination {
    Completed,
    Singularity,
    Blowup,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    /// `(x, y, p)` at every accepted step, starting with the initial point.
    pub points: Vec<(f64, f64, f64)>,
    pub step: f64,
    pub initial: (f64, f64, f64),
    pub termination: Termination,
}

/// Smallest absolute value among the singular-locus factors, or `None` when
/// one of them cannot be evaluated.
fn locus_margin(locus: &[Compiled], v: &[f64]) -> Option<f64> {
    let mut m = f64::INFINITY;
    for c in locus {
        m = m.min(c.eval(v).ok()?.abs());
    }
    Some(m)
}

/// Fixed-step classic RK4 for `y' = p, p' = omega(x, y, p)`.
pub fn rk4_integrate(
    ode: &OdeSecondOrder,
    x0: f64,
    y0: f64,
    p0: f64,
    h: f64,
    steps: usize,
) -> Trajectory {
    let vars = ["x", "y", "p"];
    let omega = Compiled::new(&ode.omega, &vars).ok();
    let locus: Vec<Compiled> = ode
        .singular_locus
        .iter()
        .filter_map(|e| Compiled::new(e, &vars).ok())
        .collect();
    let mut traj = Trajectory {
        points: vec![(x0, y0, p0)],
        step: h,
        initial: (x0, y0, p0),
        termination: Termination::Completed,
    };
    let Some(omega) = omega else {
        traj.termination = Termination::Singularity;
        return traj;
    };
    let f = |x: f64, y: f64, p: f64| -> Option<(f64, f64)> {
        if locus_margin(&locus, &[x, y, p])? < SINGULAR_PROXIMITY {
            return None;
        }
        Some((p, omega.eval(&[x, y, p]).ok()?))
    };
    let (mut x, mut y, mut p) = (x0, y0, p0);
    for _ in 0..steps {
        let step = (|| {
            let (k1y, k1p) = f(x, y, p)?;
            let (k2y, k2p) = f(x + h / 2.0, y + h / 2.0 * k1y, p + h / 2.0 * k1p)?;
            let (k3y, k3p) = f(x + h / 2.0, y + h / 2.0 * k2y, p + h / 2.0 * k2p)?;
            let (k4y, k4p) = f(x + h, y + h * k3y, p + h * k3p)?;
            Some((
                y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y),
                p + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p),
            ))
        })();
        let Some((ny, np)) = step else {
            traj.termination = Termination::Singularity;
            return traj;
        };
        if !(ny.abs() + np.abs() <= BLOWUP) {
            traj.termination = Termination::Blowup;
            return traj;
        }
        x = x0 + h * traj.points.len() as f64;
        y = ny;
        p = np;
        traj.points.push((x, y, p));
    }
    if locus_margin(&locus, &[x, y, p]).is_none_or(|m| m < SINGULAR_PROXIMITY) {
        traj.termination = Termination::Singularity;
    }
    traj
}

/// Box with avoidance constraints `|g| >= eps`.
#[derive(Clone, Debug)]
pub struct SampleDomain {
    pub bounds: Vec<(String, f64, f64)>,
    pub avoid: Vec<Expr>,
    pub eps: f64,
}

impl SampleDomain {
    pub fn new(bounds: &[(&str, f64, f64)]) -> Self {
        SampleDomain {
            bounds: bounds
                .iter()
                .map(|(n, lo, hi)| (n.to_string(), *lo, *hi))
                .collect(),
            avoid: Vec::new(),
            eps: 1e-3,
        }
    }

    pub fn avoiding(mut self, exprs: &[Expr], eps: f64) -> Self {
        self.avoid.extend(exprs.iter().cloned());
        self.eps = eps;
        self
    }

    pub fn var_names(&self) -> Vec<&str> {
        self.bounds.iter().map(|(n, _, _)| n.as_str()).collect()
    }

    /// Draw `n` admissible points using the given generator.
    pub fn sample_with(
        &self,
        n: usize,
        rng: &mut SeededRng,
    ) -> Result<Vec<Vec<f64>>, NumericError> {
        let names = self.var_names();
        let checks: Vec<Compiled> = self
            .avoid
            .iter()
            .map(|e| Compiled::new(e, &names))
            .collect::<Result<_, _>>()?;
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let mut found = None;
            for _ in 0..RETRY_CAP {
                let v: Vec<f64> = self
                    .bounds
                    .iter()
                    .map(|(_, lo, hi)| rng.gen_range(*lo..*hi))
                    .collect();
                let ok = checks
                    .iter()
                    .all(|c| c.eval(&v).is_ok_and(|g| g.abs() >= self.eps));
                if ok {
                    found = Some(v);
                    break;
                }
            }
            out.push(found.ok_or(NumericError::DomainTooRestrictive(RETRY_CAP))?);
        }
        Ok(out)
    }
}

/// Draw `n` points from `domain` with a fresh generator seeded by `seed`.
pub fn sample(domain: &SampleDomain, n: usize, seed: u64) -> Result<Vec<Vec<f64>>, NumericError> {
    domain.sample_with(n, &mut rng_from_seed(seed))
}

#[derive(Clone, Debug, Serialize)]
pub struct FiniteDiffReport {
    pub checked: usize,
    pub skipped: usize,
    pub max_error: f64,
    pub pass: bool,
}

/// Compare `diff(e, v)` with Richardson-extrapolated central differences.
pub fn finite_diff_check(
    e: &Expr,
    v: &str,
    points: &[BTreeMap<String, f64>],
    tol: f64,
) -> FiniteDiffReport {
    let d = e.diff(v);
    let mut report = FiniteDiffReport {
        checked: 0,
        skipped: 0,
        max_error: 0.0,
        pass: true,
    };
    let h = 1e-5;
    for pt in points {
        let at = |t: f64| {
            let mut b = pt.clone();
            b.insert(v.to_string(), t);
            crate::exprcore::eval_numeric(e, &b)
        };
        let t0 = pt.get(v).copied().unwrap_or(0.0);
        let central = |s: f64| -> Result<f64, ExprError> { Ok((at(t0 + s)? - at(t0 - s)?) / (2.0 * s)) };
        let exact = crate::exprcore::eval_numeric(&d, pt);
        match (central(h), central(h / 2.0), exact) {
            (Ok(c1), Ok(c2), Ok(ex)) => {
                let fd = (4.0 * c2 - c1) / 3.0;
                let err = (fd - ex).abs() / (1.0 + ex.abs());
                report.checked += 1;
                report.max_error = report.max_error.max(err);
                if !(err <= tol) {
                    report.pass = false;
                }
            }
            _ => report.skipped += 1,
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprcore::parse;

    fn ode(src: &str) -> OdeSecondOrder {
        OdeSecondOrder::new(parse(src).unwrap(), "test").unwrap()
    }

    #[test]
    fn free_particle_is_exact() {
        let t = rk4_integrate(&ode("0"), 0.0, 0.0, 1.0, 0.01, 100);
        assert_eq!(t.termination, Termination::Completed);
        let (x, y, p) = *t.points.last().unwrap();
        assert!((x - 1.0).abs() < 1e-12);
        assert!((y - 1.0).abs() < 1e-12);
        assert!(t.points.iter().all(|pt| (pt.2 - 1.0).abs() < 1e-12));
        let _ = p;
    }

    #[test]
    fn harmonic_oscillator() {
        let t = rk4_integrate(&ode("-y"), 0.0, 1.0, 0.0, 1e-3, 1000);
        let y1 = t.points.last().unwrap().1;
        assert!((y1 - 1f64.cos()).abs() < 1e-10);
    }

    #[test]
    fn rk4_order() {
        let err = |h: f64, n: usize| {
            let t = rk4_integrate(&ode("-y"), 0.0, 1.0, 0.0, h, n);
            (t.points.last().unwrap().1 - 1f64.cos()).abs()
        };
        let ratio = err(0.1, 10) / err(0.05, 20);
        assert!((12.0..=20.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn singularity_detected() {
        let o = ode("(x*p-y)^2/(x^2*(x+y))");
        let t = rk4_integrate(&o, 1.0, -0.99999, 0.0, 1e-3, 100);
        assert_eq!(t.termination, Termination::Singularity);
    }

    #[test]
    fn sampling_respects_avoidance_and_seed() {
        let d = SampleDomain::new(&[("x", 0.1, 3.0), ("y", -3.0, 3.0)])
            .avoiding(&[parse("x+y").unwrap()], 1e-3);
        let a = sample(&d, 100, 7).unwrap();
        let b = sample(&d, 100, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|v| (v[0] + v[1]).abs() >= 1e-3));
        let bad = SampleDomain::new(&[("x", 0.0, 1.0)]).avoiding(&[parse("x").unwrap()], 10.0);
        assert!(matches!(sample(&bad, 1, 1), Err(NumericError::DomainTooRestrictive(_))));
    }

    #[test]
    fn finite_differences() {
        let pt: BTreeMap<String, f64> = [("x".to_string(), 2.0)].into_iter().collect();
        let r = finite_diff_check(&parse("x^3").unwrap(), "x", &[pt.clone()], 1e-8);
        assert!(r.pass && r.checked == 1);
        let r = finite_diff_check(&parse("7").unwrap(), "x", &[pt], 1e-12);
        assert!(r.pass);
    }
}
