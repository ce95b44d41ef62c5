use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use liesym::detsolve::{is_symmetry, solve_symmetries, OdeSecondOrder};
use liesym::exprcore::{diff, eval_numeric, parse, Expr, Rational};
use liesym::invariant::{
    invariant_condition, invariant_solution, on_singular_locus, solve_locus, verify_invariance,
    verify_on_ode, SolutionForm,
};
use liesym::liealg::{
    adjoint_exp, bracket_fields, classify, combine, in_span, paper_generators, same_span, span_basis, structure_constants, unit,
};
use liesym::linalg::QMatrix;
use liesym::noether::{check_conserved, el_matches_ode, ConservedQuantity};
use liesym::numeric::{finite_diff_check, rk4_integrate};
use liesym::optimal::{adjoint_act_param, canonical_form, sample_vectors, verify_representatives, Param};
use liesym::paper;
use liesym::report::{verify_paper, ReportConfig, Status};
use num_traits::Zero;
use proptest::test_runner::{Config, TestRunner};

mod common;
use common::tree;

const TOL_NUMERIC: f64 = 1e-9;
const TOL_FD: f64 = 1e-6;
const TOL_FREE: f64 = 1e-10;
const SEED: u64 = 42;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn r(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn symmetry_recovery() -> Outcome {
    let ode = paper::canonical_ode();
    let t = Instant::now();
    let gens = solve_symmetries(&ode, 2).expect("rational equation");
    let secs = t.elapsed().as_secs_f64();
    let span = same_span(&gens, &paper_generators()).unwrap_or(false);
    let cubic = solve_symmetries(&ode, 3).expect("rational equation");
    let span3 = same_span(&cubic, &paper_generators()).unwrap_or(false);
    outcome(
        gens.len() == 3 && span && span3 && secs < 5.0,
        format!("dim {}, same span {span}, degree 3 same span {span3}, {secs:.2}s", gens.len()),
    )
}

fn free_particle() -> Outcome {
    let ode = OdeSecondOrder::parse("0", "free particle").unwrap();
    let gens = solve_symmetries(&ode, 2).unwrap();
    let worst = gens
        .iter()
        .enumerate()
        .map(|(k, g)| is_symmetry(&ode, g, 200, TOL_NUMERIC, SEED + k as u64))
        .fold((true, 0.0f64), |(ok, m), a| (ok && a.pass && a.evaluated > 0, m.max(a.max_scaled_residual)));
    outcome(gens.len() == 8 && worst.0, format!("dim {}, max scaled residual {:.1e}", gens.len(), worst.1))
}

fn coords(s: &[String]) -> Vec<Rational> {
    s.iter().map(|c| c.parse().expect("rational literal")).collect()
}

fn commutator_table() -> Outcome {
    let gens = paper_generators();
    let printed = paper::printed_tables();
    let l = structure_constants(&gens, &["Pi1", "Pi2", "Pi3"]).unwrap();
    let mut mismatches = 0;
    for i in 0..3 {
        for j in 0..3 {
            let c = coords(&printed.commutators[i][j]);
            if !bracket_fields(&gens[i], &gens[j]).equivalent(&combine(&gens, &c)) {
                mismatches += 1;
            }
            if l.bracket(&unit(3, i), &unit(3, j)) != c {
                mismatches += 1;
            }
        }
    }
    outcome(mismatches == 0, format!("9 field brackets and 9 structure-constant entries, {mismatches} mismatches"))
}

fn series_exp(a: &[Vec<f64>], t: f64) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut sum: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(i == j)).collect()).collect();
    let mut term = sum.clone();
    for k in 1..40 {
        term = (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|m| term[i][m] * a[m][j]).sum::<f64>() * t / k as f64).collect())
            .collect();
        for i in 0..n {
            for j in 0..n {
                sum[i][j] += term[i][j];
            }
        }
    }
    sum
}

fn adjoint_table() -> Outcome {
    let l = paper::paper_algebra();
    let printed = paper::printed_tables();
    let lam = Expr::var("lambda");
    let t = 0.7;
    let mut symbolic = 0;
    let mut numeric = 0.0f64;
    for i in 0..3 {
        let m = adjoint_exp(&l, i, &lam).unwrap();
        let ad: Vec<Vec<f64>> = l
            .ad_basis(i)
            .to_rows()
            .iter()
            .map(|row| row.iter().map(|x| num_traits::ToPrimitive::to_f64(x).unwrap()).collect())
            .collect();
        let oracle = series_exp(&ad, -t);
        for j in 0..3 {
            for k in 0..3 {
                let entry = parse(&printed.adjoint[i][j][k]).unwrap();
                if !m[k][j].equivalent(&entry) {
                    symbolic += 1;
                }
                let b: BTreeMap<String, f64> = [("lambda".to_string(), t)].into();
                numeric = numeric.max((eval_numeric(&entry, &b).unwrap() - oracle[k][j]).abs());
            }
        }
    }
    outcome(
        symbolic == 0 && numeric < TOL_NUMERIC,
        format!("{symbolic} symbolic mismatches, series oracle error {numeric:.1e} at lambda = {t}"),
    )
}

fn classification() -> Outcome {
    let l = paper::paper_algebra();
    let c = classify(&l).unwrap();
    let killing_oracle: Vec<Vec<Rational>> = (0..3)
        .map(|i| (0..3).map(|j| l.ad_basis(i).mul(&l.ad_basis(j)).trace()).collect())
        .collect();
    let expected = QMatrix::from_i64(&[&[1, -1, 0], &[-1, 1, 0], &[0, 0, 0]]);
    let killing_ok = c.killing_form == expected.to_rows()
        && killing_oracle == expected.to_rows()
        && expected.determinant().is_zero();

    let witness_ok = match c.bianchi.as_ref().and_then(|b| b.witness.clone()) {
        Some([e1, e2, z]) => {
            l.bracket(&e1, &e2) == e2
                && (0..3).all(|k| l.bracket(&z, &unit(3, k)).iter().all(Zero::is_zero))
                && QMatrix::from_rows(vec![e1, e2, z]).rank() == 3
        }
        None => false,
    };
    let bianchi = c.bianchi.as_ref().map(|b| format!("{:?}", b.bianchi)).unwrap_or_default();

    let pi12 = vec![r(1), r(1), r(0)];
    let center_ok = c.center.len() == 1 && in_span(&c.center, &pi12);
    let nil = span_basis(&[pi12.clone(), unit(3, 2)], 3);
    let nil_ok = c.nilradical.len() == 2 && nil.iter().all(|v| in_span(&c.nilradical, v));

    let report = verify_paper(&ReportConfig { optimal_samples: 10, trajectories: 2, ..ReportConfig::default() });
    let errata = ["classification.killing", "classification.center", "classification.nilradical"]
        .iter()
        .filter(|id| report.claim(id).is_some_and(|c| c.status == Status::Erratum))
        .count();
    outcome(
        c.solvable_cartan
            && c.solvable_derived
            && !c.nilpotent
            && !c.semisimple
            && bianchi == "III"
            && witness_ok
            && killing_ok
            && center_ok
            && nil_ok
            && errata == 3,
        format!(
            "solvable both ways, nilpotent {}, semisimple {}, Bianchi {bianchi} witness {witness_ok}, \
             Killing {killing_ok}, center {center_ok}, nilradical {nil_ok}, {errata}/3 errata flagged",
            c.nilpotent, c.semisimple
        ),
    )
}

fn optimal_system() -> Outcome {
    let l = paper::paper_algebra();
    let t = Instant::now();
    let samples = sample_vectors(3, 1000, SEED);
    let (mut invariant, mut idempotent, mut constant) = (0, 0, 0);
    for (k, v) in samples.iter().enumerate() {
        let k = k as i64;
        let mu = q(k % 7 + 1, k % 5 + 1);
        let lam = q(k % 11 - 5, k % 3 + 1);
        let params = [Param::LnOf(mu.clone()), Param::LnOf(mu.recip()), Param::Lambda(lam)];
        let (rep, _) = canonical_form(&l, v).unwrap();
        if canonical_form(&l, &rep).unwrap().0 == rep {
            idempotent += 1;
        }
        let mut all_inv = true;
        let mut all_const = true;
        for (i, p) in params.iter().enumerate() {
            let w = adjoint_act_param(&l, v, i, p).unwrap();
            all_inv &= w[0] == v[0] && w[1] == v[1];
            all_const &= canonical_form(&l, &w).unwrap().0 == rep;
        }
        invariant += usize::from(all_inv);
        constant += usize::from(all_const);
    }
    let (stated, _) = paper::representatives();
    let cov = verify_representatives(&l, &stated, 1000, SEED).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let n = samples.len();
    outcome(
        invariant == n && idempotent == n && constant == n && cov.full_coverage && cov.unmatched.is_empty()
            && secs < 10.0,
        format!(
            "a1, a2 invariant {invariant}/{n}, idempotent {idempotent}/{n}, orbit-constant {constant}/{n}, \
             unmatched {}, {} overlapping family pairs, {secs:.2}s",
            cov.unmatched.len(),
            cov.overlaps.len()
        ),
    )
}

fn invariant_solutions() -> Outcome {
    let gens = paper_generators();
    let odes = paper::ode_variants().unwrap();
    let canonical = paper::canonical_ode();
    let mut ok = true;
    let mut lines = Vec::new();
    for (k, row) in paper::table3().iter().enumerate() {
        let n = k + 1;
        let gen = combine(&gens, &row.coefficients());
        let q_ok = invariant_condition(&gen).equivalent(&parse(&row.q).unwrap());
        let printed = parse(&row.solution).unwrap();
        let derived = match invariant_solution(&gen) {
            SolutionForm::Explicit(e) => e.equivalent(&printed),
            SolutionForm::AlgebraicLocus(eta) => {
                solve_locus(&eta).is_some_and(|y| y.equivalent(&printed) && on_singular_locus(&canonical, &y))
            }
            SolutionForm::Unsolved(_) => n == 5,
        };
        let sol = SolutionForm::Explicit(printed.clone());
        let inv = verify_invariance(&gen, &sol, row.curve_domain(), TOL_NUMERIC, SEED);
        let verdicts: Vec<&str> = odes
            .iter()
            .map(|o| {
                if on_singular_locus(o, &printed) {
                    "singular"
                } else if verify_on_ode(o, &sol, row.curve_domain(), TOL_NUMERIC, SEED).pass {
                    "pass"
                } else {
                    "fail"
                }
            })
            .collect();
        ok &= q_ok && derived && inv.pass;
        if n == 4 {
            let c = verify_on_ode(&canonical, &sol, row.curve_domain(), TOL_NUMERIC, SEED);
            ok &= c.pass && c.evaluated == 100;
        }
        lines.push(format!("row {n} Q {q_ok} derived {derived} invariant {} [{}]", inv.pass, verdicts.join(" ")));
    }
    let names: Vec<&str> = odes.iter().map(|o| o.name.as_str()).collect();
    outcome(ok, format!("variants [{}]; {}", names.join(" "), lines.join("; ")))
}

fn lagrangian() -> Outcome {
    let fixture = paper::noether_fixture().unwrap();
    let m = parse(paper::PRINTED_MULTIPLIER).unwrap();
    let lpp = diff(&diff(&fixture.lagrangian.0, "p"), "p");
    let exact = (&lpp - &m).normalize().is_zero();
    let matrix: Vec<String> = paper::ode_variants()
        .unwrap()
        .iter()
        .map(|o| {
            let e = el_matches_ode(&fixture.lagrangian, o, TOL_NUMERIC, 100, SEED);
            format!("{} {} ({:.1e})", o.name, if e.pass { "pass" } else { "fail" }, e.max_residual)
        })
        .collect();
    outcome(exact, format!("L_pp - M = 0 exactly: {exact}; Euler-Lagrange [{}]", matrix.join(", ")))
}

fn conservation() -> Outcome {
    let fixture = paper::noether_fixture().unwrap();
    let exact_for = paper::ode_variants()
        .unwrap()
        .into_iter()
        .find(|o| el_matches_ode(&fixture.lagrangian, o, TOL_NUMERIC, 100, SEED).pass);
    let mut ok = true;
    let mut notes = Vec::new();
    match exact_for {
        Some(ode) => {
            let i = ConservedQuantity(paper::printed_conserved().unwrap());
            let rep = check_conserved(&ode, &i, 20, 1e-3, 1.0, 1e-6, SEED).unwrap();
            ok &= rep.pass;
            notes.push(format!("I1 on {} drift {:.1e}", ode.name, rep.max_relative_drift));
        }
        None => notes.push("I1 skipped, no variant makes L a Lagrangian".into()),
    }
    let free = OdeSecondOrder::parse("0", "free particle").unwrap();
    for text in ["p", "1/2*p^2"] {
        let i = ConservedQuantity(parse(text).unwrap());
        let rep = check_conserved(&free, &i, 20, 1e-3, 1.0, TOL_FREE, SEED).unwrap();
        ok &= rep.pass;
        notes.push(format!("{text} drift {:.1e}", rep.max_relative_drift));
    }
    outcome(ok, notes.join(", "))
}

fn kernel() -> Outcome {
    let mut runner = TestRunner::new(Config { cases: 500, failure_persistence: None, ..Config::default() });
    let linear = runner
        .run(&(tree(3, true), tree(3, true), -4i64..=4, 1i64..=4), |(e1, e2, a, b)| {
            let (a, b) = (Expr::int(a), Expr::frac(1, b));
            let lhs = (&a * &e1 + &b * &e2).diff("x");
            let rhs = &a * e1.diff("x") + &b * e2.diff("x");
            assert_eq!(lhs.normalize(), rhs.normalize());
            Ok(())
        })
        .is_ok();
    let leibniz = runner
        .run(&(tree(3, true), tree(3, true)), |(e1, e2)| {
            let d = ((&e1 * &e2).diff("y") - (&e1 * e2.diff("y") + &e2 * e1.diff("y"))).normalize();
            assert!(d.is_zero_const() || d.is_undefined(), "{d}");
            Ok(())
        })
        .is_ok();
    let fixed = runner
        .run(&tree(6, true), |e| {
            let once = parse(&e.to_string()).unwrap();
            assert_eq!(parse(&once.to_string()).unwrap(), once);
            Ok(())
        })
        .is_ok();

    let points: Vec<BTreeMap<String, f64>> = (0..50)
        .map(|k| {
            let s = k as f64 / 50.0;
            [("x", 0.3 + 2.0 * s), ("y", -0.4 + 1.1 * s), ("p", 0.2 - 0.5 * s)]
                .into_iter()
                .map(|(n, v)| (n.to_string(), v))
                .collect()
        })
        .collect();
    let mut fd_err = 0.0f64;
    let mut fd_ok = true;
    let ode = paper::canonical_ode();
    for e in [ode.omega.clone(), parse("exp(2*x)*ln(x + 2*y - p)/x").unwrap(), parse("sqrt(x^2 + y^2)").unwrap()] {
        for v in ["x", "y", "p"] {
            let rep = finite_diff_check(&e, v, &points, TOL_FD);
            fd_ok &= rep.pass && rep.checked > 0;
            fd_err = fd_err.max(rep.max_error);
        }
    }

    let oscillator = OdeSecondOrder::parse("-y", "oscillator").unwrap();
    let error = |h: f64| {
        let n = (1.0 / h).round() as usize;
        let t = rk4_integrate(&oscillator, 0.0, 1.0, 0.0, h, n);
        (t.points.last().unwrap().1 - 1f64.cos()).abs()
    };
    let factor = error(0.02) / error(0.01);
    let order_ok = (12.0..=20.0).contains(&factor);
    outcome(
        linear && leibniz && fixed && fd_ok && order_ok,
        format!(
            "linearity {linear}, Leibniz {leibniz}, parse/render fixed point {fixed} (500 cases each), \
             finite differences {fd_err:.1e}, RK4 halving factor {factor:.2}"
        ),
    )
}

fn determinism() -> Outcome {
    let cfg = ReportConfig::default();
    let a = verify_paper(&cfg);
    let b = verify_paper(&cfg);
    let same = a.to_json() == b.to_json() && a.to_markdown() == b.to_markdown();
    outcome(same, format!("seed {}, {} bytes of JSON", cfg.seed, a.to_json().len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("symmetry recovery", symmetry_recovery),
        ("free particle sl(3)", free_particle),
        ("commutator table", commutator_table),
        ("adjoint table", adjoint_table),
        ("classification", classification),
        ("optimal system", optimal_system),
        ("invariant solutions", invariant_solutions),
        ("multiplier and Lagrangian", lagrangian),
        ("conservation", conservation),
        ("expression kernel", kernel),
        ("report determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += usize::from(!o.pass);
        println!("{:>2} {:<26} {}  {}", k + 1, name, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
