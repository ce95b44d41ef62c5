//! One-dimensional optimal system for the three-dimensional symmetry algebra.

use std::fmt;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exprcore::{linear_equations, parse_with_symbols, Expr, ExprError, Rational};
use crate::liealg::{adjoint_exp, adjoint_exp_poly, ExpPoly, LieAlgebra, LieError};
use crate::linalg::QMatrix;
use crate::numeric::rng_from_seed;

#[derive(Debug, Error)]
pub enum OptimalError {
    #[error("canonical forms are only available for the algebra [e1,e3] = e3, [e2,e3] = -e3")]
    UnsupportedAlgebra,
    #[error("the zero vector has no canonical form")]
    ZeroVector,
    #[error("adjoint action at this parameter is not rational")]
    NotExact,
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("bad representative family: {0}")]
    Family(String),
}

/// Group parameter of one `exp(lam e_i)` factor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    Lambda(#[serde(with = "rat_str")] Rational),
    /// `lam = ln(mu)` with `mu > 0`.
    LnOf(#[serde(with = "rat_str")] Rational),
}

impl Param {
    fn inverse(&self) -> Param {
        match self {
            Param::Lambda(l) => Param::Lambda(-l.clone()),
            Param::LnOf(mu) => Param::LnOf(mu.recip()),
        }
    }

    fn is_identity(&self) -> bool {
        match self {
            Param::Lambda(l) => l.is_zero(),
            Param::LnOf(mu) => mu.is_one(),
        }
    }

    pub fn to_expr(&self) -> Expr {
        match self {
            Param::Lambda(l) => Expr::constant(l.clone()),
            Param::LnOf(mu) => Expr::ln(Expr::constant(mu.clone())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub index: usize,
    pub param: Param,
}

/// Factors applied left to right, then an overall nonzero rescaling.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupWord {
    pub steps: Vec<Step>,
    #[serde(with = "rat_str")]
    pub scale: Rational,
}

impl GroupWord {
    pub fn identity() -> Self {
        GroupWord { steps: vec![], scale: Rational::one() }
    }

    pub fn inverse(&self) -> Self {
        GroupWord {
            steps: self
                .steps
                .iter()
                .rev()
                .map(|s| Step { index: s.index, param: s.param.inverse() })
                .collect(),
            scale: self.scale.recip(),
        }
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &GroupWord) -> Self {
        let mut steps = self.steps.clone();
        steps.extend(other.steps.iter().cloned());
        GroupWord { steps, scale: &self.scale * &other.scale }
    }

    pub fn apply(&self, l: &LieAlgebra, v: &[Rational]) -> Result<Vec<Rational>, OptimalError> {
        let mut cur = v.to_vec();
        for s in &self.steps {
            cur = adjoint_act_param(l, &cur, s.index, &s.param)?;
        }
        Ok(cur.iter().map(|c| c * &self.scale).collect())
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .steps
            .iter()
            .map(|s| match &s.param {
                Param::Lambda(l) => format!("Ad(exp({l}*e{}))", s.index + 1),
                Param::LnOf(mu) => format!("Ad(exp(ln({mu})*e{}))", s.index + 1),
            })
            .collect();
        if !self.scale.is_one() {
            parts.push(format!("scale {}", self.scale));
        }
        if parts.is_empty() {
            f.write_str("identity")
        } else {
            f.write_str(&parts.join(" then "))
        }
    }
}

mod rat_str {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn exact_value(e: &ExpPoly, p: &Param) -> Result<Rational, OptimalError> {
    if p.is_identity() {
        return Ok(e
            .terms()
            .filter(|((_, m), _)| *m == 0)
            .map(|(_, c)| c.clone())
            .sum());
    }
    let mut acc = Rational::zero();
    for ((nu, m), c) in e.terms() {
        match p {
            Param::Lambda(l) => {
                if !nu.is_zero() {
                    return Err(OptimalError::NotExact);
                }
                acc += c * l.pow(*m as i32);
            }
            Param::LnOf(mu) => {
                if *m > 0 || !nu.is_integer() {
                    return Err(OptimalError::NotExact);
                }
                let k: i32 = nu.to_integer().try_into().map_err(|_| OptimalError::NotExact)?;
                acc += c * mu.pow(k);
            }
        }
    }
    Ok(acc)
}

/// Coefficients of `Ad(exp(lam e_i)) G` for `G = sum v_k e_k`, exact.
pub fn adjoint_act_param(
    l: &LieAlgebra,
    v: &[Rational],
    i: usize,
    p: &Param,
) -> Result<Vec<Rational>, OptimalError> {
    let m = adjoint_exp_poly(l, i)?;
    let n = l.dim();
    let mut out = vec![Rational::zero(); n];
    for (k, slot) in out.iter_mut().enumerate() {
        for j in 0..n {
            if !v[j].is_zero() && !m[k][j].is_zero() {
                *slot += exact_value(&m[k][j], p)? * &v[j];
            }
        }
    }
    Ok(out)
}

pub fn adjoint_act(
    l: &LieAlgebra,
    v: &[Rational],
    i: usize,
    lam: &Rational,
) -> Result<Vec<Rational>, OptimalError> {
    adjoint_act_param(l, v, i, &Param::Lambda(lam.clone()))
}

/// Symbolic variant: entries may contain `exp` of `lam`.
pub fn adjoint_act_symbolic(
    l: &LieAlgebra,
    v: &[Expr],
    i: usize,
    lam: &Expr,
) -> Result<Vec<Expr>, OptimalError> {
    let m = adjoint_exp(l, i, lam)?;
    Ok(m.iter()
        .map(|row| {
            Expr::add(row.iter().zip(v).map(|(a, b)| a * b).collect()).normalize()
        })
        .collect())
}

fn require_paper(l: &LieAlgebra) -> Result<(), OptimalError> {
    use crate::paper::paper_algebra;
    if l.constants() == paper_algebra().constants() {
        Ok(())
    } else {
        Err(OptimalError::UnsupportedAlgebra)
    }
}

/// Orbit representative up to overall rescaling, with a word reaching it.
pub fn canonical_form(
    l: &LieAlgebra,
    v: &[Rational],
) -> Result<(Vec<Rational>, GroupWord), OptimalError> {
    require_paper(l)?;
    if v.iter().all(Zero::is_zero) {
        return Err(OptimalError::ZeroVector);
    }
    let (a1, a2, a3) = (&v[0], &v[1], &v[2]);
    let mut word = GroupWord::identity();
    if a1 != a2 {
        if !a3.is_zero() {
            let lam = -(a3 / (a1 - a2));
            word.steps.push(Step { index: 2, param: Param::Lambda(lam) });
        }
        let pivot = [a1, a2]
            .into_iter()
            .fold(None::<&Rational>, |best, x| match best {
                Some(b) if b.abs() >= x.abs() => Some(b),
                _ => Some(x),
            })
            .unwrap();
        word.scale = pivot.recip();
    } else if !a1.is_zero() {
        if !a3.is_zero() {
            let mu = (a1 / a3).abs();
            word.steps.push(Step { index: 1, param: Param::LnOf(mu) });
        }
        word.scale = a1.recip();
    } else {
        word.scale = a3.recip();
    }
    let rep = word.apply(l, v)?;
    Ok((rep, word))
}

/// A word mapping `v` onto `w`, if they lie in one orbit.
pub fn orbit_equivalent(
    l: &LieAlgebra,
    v: &[Rational],
    w: &[Rational],
) -> Result<Option<GroupWord>, OptimalError> {
    require_paper(l)?;
    if v == w {
        return Ok(Some(GroupWord::identity()));
    }
    let (rv, wv) = canonical_form(l, v)?;
    let (rw, ww) = canonical_form(l, w)?;
    if rv != rw {
        return Ok(None);
    }
    Ok(Some(wv.then(&ww.inverse())))
}

/// Family of representatives with symbolic coefficients and `!=` constraints.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepFamily {
    #[serde(default)]
    pub name: String,
    pub coeffs: Vec<String>,
    #[serde(default)]
    pub constraints: Vec<String>,
}

const FAMILY_SYMBOLS: &[&str] = &["a1", "a2", "a3", "b1", "b2"];

struct CompiledFamily {
    coeffs: Vec<Expr>,
    constraints: Vec<Expr>,
}

fn compile(f: &RepFamily) -> Result<CompiledFamily, OptimalError> {
    let coeffs = f
        .coeffs
        .iter()
        .map(|c| parse_with_symbols(c, FAMILY_SYMBOLS))
        .collect::<Result<Vec<_>, _>>()?;
    let mut constraints = Vec::new();
    for c in &f.constraints {
        let (lhs, rhs) = c
            .split_once("!=")
            .or_else(|| c.split_once('≠'))
            .ok_or_else(|| OptimalError::Family(format!("unsupported constraint {c}")))?;
        let l = parse_with_symbols(lhs.trim(), FAMILY_SYMBOLS)?;
        let r = parse_with_symbols(rhs.trim(), FAMILY_SYMBOLS)?;
        constraints.push(l - r);
    }
    Ok(CompiledFamily { coeffs, constraints })
}

/// True when `s * r` is a member of the family for some `s != 0`.
fn family_contains(f: &CompiledFamily, r: &[Rational]) -> Result<bool, OptimalError> {
    if f.coeffs.len() != r.len() {
        return Ok(false);
    }
    let mut unknowns: Vec<&str> = FAMILY_SYMBOLS.to_vec();
    unknowns.push("s");
    let s = Expr::var("s");
    let eqs: Vec<Expr> = f
        .coeffs
        .iter()
        .zip(r)
        .map(|(c, x)| c - &(&s * &Expr::constant(x.clone())))
        .collect();
    let (rows, rhs) = linear_equations(&eqs, &unknowns)?;
    let a = QMatrix::from_rows(rows);
    let Some(x0) = a.solve(&rhs) else {
        return Ok(false);
    };
    let kernel = a.nullspace();
    let mut conds = f.constraints.clone();
    conds.push(s);
    for g in &conds {
        let (grow, grhs) = linear_equations(std::slice::from_ref(g), &unknowns)?;
        let (c, d) = match grow.len() {
            0 => return Ok(false),
            1 => (&grow[0], -grhs[0].clone()),
            _ => return Err(OptimalError::Family("constraint is not affine".into())),
        };
        let at_x0: Rational = c.iter().zip(&x0).map(|(a, b)| a * b).sum::<Rational>() + &d;
        let moves = kernel
            .iter()
            .any(|k| !c.iter().zip(k).map(|(a, b)| a * b).sum::<Rational>().is_zero());
        if at_x0.is_zero() && !moves {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleOutcome {
    pub input: Vec<String>,
    pub canonical: Vec<String>,
    pub families: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverageReport {
    pub seed: u64,
    pub samples: usize,
    pub family_names: Vec<String>,
    pub hits: Vec<usize>,
    pub unique_hits: Vec<usize>,
    pub unmatched: Vec<SampleOutcome>,
    pub overlaps: Vec<(usize, usize, usize)>,
    pub never_hit: Vec<usize>,
    pub redundant: Vec<usize>,
    pub probes: Vec<SampleOutcome>,
    pub full_coverage: bool,
}

fn strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(|r| r.to_string()).collect()
}

/// Components `k / d` with `k` in `[-9, 9]` and `d` in `[1, 9]`, never all zero.
pub fn sample_vectors(n: usize, count: usize, seed: u64) -> Vec<Vec<Rational>> {
    let mut rng = rng_from_seed(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<Rational> = (0..n)
            .map(|_| {
                let k: i64 = rng.gen_range(-9..=9);
                let d: i64 = rng.gen_range(1..=9);
                Rational::new(k.into(), d.into())
            })
            .collect();
        if v.iter().any(|c| !c.is_zero()) {
            out.push(v);
        }
    }
    out
}

/// Special orbits that random sampling reaches rarely.
fn probe_vectors() -> Vec<Vec<Rational>> {
    let r = |xs: [i64; 3]| xs.iter().map(|&x| Rational::from_integer(x.into())).collect();
    vec![r([0, 0, 1]), r([1, 1, 0]), r([1, 1, 1]), r([1, 1, -1]), r([1, 0, 0]), r([0, 1, 0])]
}

pub fn verify_representatives(
    l: &LieAlgebra,
    families: &[RepFamily],
    samples: usize,
    seed: u64,
) -> Result<CoverageReport, OptimalError> {
    require_paper(l)?;
    let compiled = families.iter().map(compile).collect::<Result<Vec<_>, _>>()?;
    let nf = families.len();
    let classify = |v: &[Rational]| -> Result<SampleOutcome, OptimalError> {
        let (rep, _) = canonical_form(l, v)?;
        let mut hits = Vec::new();
        for (k, f) in compiled.iter().enumerate() {
            if family_contains(f, &rep)? {
                hits.push(k);
            }
        }
        Ok(SampleOutcome { input: strings(v), canonical: strings(&rep), families: hits })
    };
    let mut hits = vec![0; nf];
    let mut unique = vec![0; nf];
    let mut pair = vec![vec![0usize; nf]; nf];
    let mut unmatched = Vec::new();
    let mut tally = |o: &SampleOutcome, unmatched: &mut Vec<SampleOutcome>| {
        for &a in &o.families {
            hits[a] += 1;
            for &b in &o.families {
                if a < b {
                    pair[a][b] += 1;
                }
            }
        }
        match o.families.len() {
            0 => unmatched.push(o.clone()),
            1 => unique[o.families[0]] += 1,
            _ => {}
        }
    };
    for v in sample_vectors(l.dim(), samples, seed) {
        let o = classify(&v)?;
        tally(&o, &mut unmatched);
    }
    let mut probes = Vec::new();
    for v in probe_vectors() {
        let o = classify(&v)?;
        tally(&o, &mut unmatched);
        probes.push(o);
    }
    let overlaps = (0..nf)
        .flat_map(|a| (0..nf).map(move |b| (a, b)))
        .filter(|&(a, b)| a < b && pair[a][b] > 0)
        .map(|(a, b)| (a, b, pair[a][b]))
        .collect();
    Ok(CoverageReport {
        seed,
        samples,
        family_names: families
            .iter()
            .enumerate()
            .map(|(k, f)| if f.name.is_empty() { format!("family {}", k + 1) } else { f.name.clone() })
            .collect(),
        never_hit: (0..nf).filter(|&k| hits[k] == 0).collect(),
        redundant: (0..nf).filter(|&k| unique[k] == 0).collect(),
        full_coverage: unmatched.is_empty() && nf > 0,
        hits,
        unique_hits: unique,
        unmatched,
        overlaps,
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprcore::{parse, rat, ratio};
    use crate::paper::paper_algebra;

    fn v(xs: [i64; 3]) -> Vec<Rational> {
        xs.iter().map(|&x| rat(x)).collect()
    }

    #[test]
    fn shift_along_third_generator() {
        let l = paper_algebra();
        assert_eq!(adjoint_act(&l, &v([1, 0, 7]), 2, &rat(-7)).unwrap(), v([1, 0, 0]));
        assert_eq!(adjoint_act(&l, &v([3, 1, 1]), 2, &ratio(1, 2)).unwrap(), v([3, 1, 2]));
        assert_eq!(adjoint_act(&l, &v([3, 1, 1]), 0, &rat(0)).unwrap(), v([3, 1, 1]));
        assert!(matches!(
            adjoint_act(&l, &v([3, 1, 1]), 0, &rat(1)),
            Err(OptimalError::NotExact)
        ));
    }

    #[test]
    fn symbolic_action() {
        let l = paper_algebra();
        let g: Vec<Expr> = ["a1", "a2", "1"].iter().map(|s| parse(s).unwrap()).collect();
        let lam = Expr::var("lambda");
        let out = adjoint_act_symbolic(&l, &g, 2, &lam).unwrap();
        assert!(out[2].equivalent(&parse("1 + lambda*(a1 - a2)").unwrap()));
        let out = adjoint_act_symbolic(&l, &g, 0, &lam).unwrap();
        assert!(out[2].equivalent(&parse("exp(-lambda)").unwrap()));
    }

    #[test]
    fn canonical_cases() {
        let l = paper_algebra();
        let (r, w) = canonical_form(&l, &v([1, 1, 5])).unwrap();
        assert_eq!(r, v([1, 1, 1]));
        assert_eq!(w.steps, vec![Step { index: 1, param: Param::LnOf(ratio(1, 5)) }]);
        assert_eq!(canonical_form(&l, &v([0, 0, -2])).unwrap().0, v([0, 0, 1]));
        assert_eq!(canonical_form(&l, &v([2, -4, 3])).unwrap().0, vec![ratio(-1, 2), rat(1), rat(0)]);
        assert_eq!(canonical_form(&l, &v([-3, -3, 1])).unwrap().0, v([1, 1, -1]));
        assert!(matches!(canonical_form(&l, &v([0, 0, 0])), Err(OptimalError::ZeroVector)));
    }

    #[test]
    fn orbit_words() {
        let l = paper_algebra();
        let w = orbit_equivalent(&l, &v([1, 0, 0]), &v([1, 0, 7])).unwrap().unwrap();
        assert_eq!(w.apply(&l, &v([1, 0, 0])).unwrap(), v([1, 0, 7]));
        assert!(orbit_equivalent(&l, &v([1, 1, 1]), &v([1, 1, 0])).unwrap().is_none());
        assert_eq!(
            orbit_equivalent(&l, &v([2, 5, 1]), &v([2, 5, 1])).unwrap(),
            Some(GroupWord::identity())
        );
    }

    #[test]
    fn unsupported_algebra() {
        let other = LieAlgebra::from_brackets(&["a", "b", "c"], &[]).unwrap();
        assert!(matches!(
            canonical_form(&other, &v([1, 0, 0])),
            Err(OptimalError::UnsupportedAlgebra)
        ));
    }

    #[test]
    fn coverage_edge_cases() {
        let l = paper_algebra();
        let all = RepFamily { name: String::new(), coeffs: vec!["a1".into(), "a2".into(), "a3".into()], constraints: vec![] };
        let r = verify_representatives(&l, &[all], 200, 3).unwrap();
        assert!(r.full_coverage);
        assert!(r.redundant.is_empty());
        let empty = verify_representatives(&l, &[], 50, 3).unwrap();
        assert!(!empty.full_coverage);
        assert_eq!(empty.unmatched.len(), 50 + probe_vectors().len());
    }

    #[test]
    fn stated_list_overlaps() {
        let l = paper_algebra();
        let (stated, derived) = crate::paper::representatives();
        let r = verify_representatives(&l, &stated, 500, 11).unwrap();
        assert!(r.full_coverage, "{:?}", r.unmatched);
        assert!(r.overlaps.iter().any(|&(a, b, _)| (a, b) == (1, 2)));
        assert!(r.overlaps.iter().any(|&(a, b, _)| (a, b) == (3, 4)));
        let d = verify_representatives(&l, &derived, 500, 11).unwrap();
        assert!(d.full_coverage, "{:?}", d.unmatched);
    }
}
