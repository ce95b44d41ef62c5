use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Value};

use liesym::detsolve::{is_symmetry, solve_symmetries, OdeSecondOrder, VectorFieldGen};
use liesym::exprcore::{parse, Expr, Rational};
use liesym::invariant::{
    invariant_condition, invariant_solution, on_singular_locus, reduce, solve_locus,
    verify_invariance, verify_on_ode, CurveDomain, Reduction, SolutionForm,
};
use liesym::liealg::{
    adjoint_exp, classify, combine, paper_generators, same_span, structure_constants, unit,
    LieAlgebra,
};
use liesym::noether::{
    check_conserved, conserved_quantity, el_matches_ode, jlm_determinant,
    lagrangian_from_multiplier, variational_residual, ConservedQuantity, FirstRow,
    NoetherFixture,
};
use liesym::optimal::{canonical_form, verify_representatives, RepFamily};
use liesym::paper;
use liesym::report::{self, combination, ReportConfig};

use crate::error::Failure;
use crate::{Basis, Common};

pub struct Output {
    pub json: Value,
    pub markdown: String,
}

fn load_ode(spec: Option<&str>) -> Result<OdeSecondOrder, Failure> {
    match spec {
        None => Ok(paper::canonical_ode()),
        Some(s) if Path::new(s).is_file() => {
            let text = std::fs::read_to_string(s).map_err(|e| Failure::other(format!("{s}: {e}")))?;
            Ok(OdeSecondOrder::from_json(&text)?)
        }
        Some(s) => Ok(OdeSecondOrder::parse(s, s)?),
    }
}

fn parse_vector(s: &str) -> Result<Vec<Rational>, Failure> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<Rational>()
                .map_err(|_| Failure::parse(format!("not a rational number: `{}`", t.trim())))
        })
        .collect()
}

fn labels(n: usize, paper_basis: bool) -> Vec<String> {
    let stem = if paper_basis { "Pi" } else { "e" };
    (1..=n).map(|k| format!("{stem}{k}")).collect()
}

/// Explicit `--gen` list, else the symmetries of `--ode`, else the bundled generators.
fn resolve_basis(basis: &Basis, common: &Common) -> Result<(Vec<VectorFieldGen>, bool), Failure> {
    if !basis.gens.is_empty() {
        let gens = basis
            .gens
            .iter()
            .map(|g| {
                let (xi, eta) = g
                    .split_once(',')
                    .ok_or_else(|| Failure::parse(format!("generator `{g}` is not of the form xi,eta")))?;
                Ok(VectorFieldGen::parse(xi.trim(), eta.trim())?)
            })
            .collect::<Result<Vec<_>, Failure>>()?;
        return Ok((gens, false));
    }
    if common.ode.is_some() {
        let ode = load_ode(common.ode.as_deref())?;
        return Ok((solve_symmetries(&ode, common.degree)?, false));
    }
    Ok((paper_generators(), true))
}

fn md_table(out: &mut String, header: &[String], rows: &[Vec<String>]) {
    let esc = |s: &String| s.replace('|', "\\|");
    let _ = writeln!(out, "| {} |", header.iter().map(esc).collect::<Vec<_>>().join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
    for r in rows {
        let _ = writeln!(out, "| {} |", r.iter().map(esc).collect::<Vec<_>>().join(" | "));
    }
    out.push('\n');
}

fn ode_json(ode: &OdeSecondOrder) -> Value {
    json!({ "name": ode.name, "omega": ode.omega.to_string() })
}

pub fn symmetries(c: &Common) -> Result<Output, Failure> {
    let ode = load_ode(c.ode.as_deref())?;
    let basis = solve_symmetries(&ode, c.degree)?;
    let matches = basis.len() == 3 && same_span(&basis, &paper_generators())?;
    let mut md = format!(
        "# Point symmetries\n\n`y'' = {}` ({}), ansatz degree {}: {} generators\n\n",
        ode.omega, ode.name, c.degree, basis.len()
    );
    let mut rows = Vec::new();
    let mut gens = Vec::new();
    for (k, g) in basis.iter().enumerate() {
        let a = is_symmetry(&ode, g, 100, c.tol, c.seed);
        rows.push(vec![
            (k + 1).to_string(),
            g.to_string(),
            if a.pass { "pass" } else { "fail" }.into(),
            format!("{:.3e}", a.max_scaled_residual),
        ]);
        gens.push(json!({ "xi": g.xi.to_string(), "eta": g.eta.to_string(), "audit": a }));
    }
    md_table(
        &mut md,
        &["#", "generator", "audit", "max scaled residual"].map(String::from),
        &rows,
    );
    let _ = writeln!(md, "Same span as Pi1, Pi2, Pi3: {matches}");
    Ok(Output {
        json: json!({
            "ode": ode_json(&ode),
            "degree": c.degree,
            "seed": c.seed,
            "dimension": basis.len(),
            "generators": gens,
            "matches_paper_span": matches,
        }),
        markdown: md,
    })
}

fn commutator_rows(l: &LieAlgebra, names: &[String]) -> Vec<Vec<String>> {
    let n = l.dim();
    (0..n)
        .map(|i| {
            std::iter::once(names[i].clone())
                .chain((0..n).map(|j| {
                    let b: Vec<Expr> = l
                        .bracket(&unit(n, i), &unit(n, j))
                        .into_iter()
                        .map(Expr::constant)
                        .collect();
                    combination(&b, names)
                }))
                .collect()
        })
        .collect()
}

fn adjoint_rows(l: &LieAlgebra, names: &[String], lam: &Expr) -> Vec<Vec<String>> {
    let n = l.dim();
    (0..n)
        .map(|i| {
            let mut row = vec![names[i].clone()];
            match adjoint_exp(l, i, lam) {
                Ok(m) => row.extend((0..n).map(|j| {
                    let image: Vec<Expr> = (0..n).map(|k| m[k][j].clone()).collect();
                    combination(&image, names)
                })),
                Err(e) => row.extend((0..n).map(|_| e.to_string())),
            }
            row
        })
        .collect()
}

fn structure(c: &Common, basis: &Basis) -> Result<(LieAlgebra, Vec<VectorFieldGen>, Vec<String>), Failure> {
    let (gens, paper_basis) = resolve_basis(basis, c)?;
    let names = labels(gens.len(), paper_basis);
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let l = structure_constants(&gens, &refs)?;
    Ok((l, gens, names))
}

pub fn algebra(c: &Common, basis: &Basis) -> Result<Output, Failure> {
    let (l, gens, names) = structure(c, basis)?;
    let lam = Expr::var("lambda");
    let mut header = vec![String::new()];
    header.extend(names.iter().cloned());
    let comm = commutator_rows(&l, &names);
    let adj = adjoint_rows(&l, &names, &lam);
    let class = classify(&l)?;
    let killing: Vec<Vec<String>> = class
        .killing_form
        .iter()
        .zip(&names)
        .map(|(r, nm)| std::iter::once(nm.clone()).chain(r.iter().map(|x| x.to_string())).collect())
        .collect();

    let errata = if l.constants() == paper::paper_algebra().constants() {
        report::section("classification", &ReportConfig { seed: c.seed, ..ReportConfig::default() })
            .map(|s| s.claims)
            .unwrap_or_default()
    } else {
        vec![]
    };

    let mut md = String::from("# Lie algebra\n\n");
    for (g, n) in gens.iter().zip(&names) {
        let _ = writeln!(md, "- {n} = {g}");
    }
    md.push_str("\n## Commutators\n\n");
    md_table(&mut md, &header, &comm);
    md.push_str("## Ad(exp(lambda row)) column\n\n");
    md_table(&mut md, &header, &adj);
    md.push_str("## Killing form\n\n");
    md_table(&mut md, &header, &killing);
    let _ = writeln!(
        md,
        "## Classification\n\n- semisimple: {}\n- solvable: {} (Cartan {}, derived series {:?})\n- nilpotent: {} (lower central series {:?})",
        class.semisimple,
        class.solvable,
        class.solvable_cartan,
        class.derived_series,
        class.nilpotent,
        class.lower_central_series
    );
    if let Some(b) = &class.bianchi {
        let _ = writeln!(md, "- Bianchi: {:?}, {}", b.bianchi, b.iso);
    }
    if !errata.is_empty() {
        md.push_str("\n## Comparison with the printed values\n\n");
        for e in &errata {
            let _ = writeln!(md, "- **{}** `{}`: {} / {}", e.status.as_str(), e.id, e.claim, e.computed);
        }
    }
    Ok(Output {
        json: json!({
            "labels": names,
            "basis": gens.iter().map(|g| json!({"xi": g.xi.to_string(), "eta": g.eta.to_string()})).collect::<Vec<_>>(),
            "commutators": comm,
            "adjoint": adj,
            "classification": class,
            "claims": errata,
        }),
        markdown: md,
    })
}

pub fn adjoint(
    c: &Common,
    basis: &Basis,
    vector: Option<&str>,
    direction: Option<usize>,
    lambda: &str,
) -> Result<Output, Failure> {
    let (l, _, names) = structure(c, basis)?;
    let lam = parse(lambda)?;
    if let Some(v) = vector {
        let v = parse_vector(v)?;
        if v.len() != l.dim() {
            return Err(Failure::parse(format!("vector has {} entries, basis has {}", v.len(), l.dim())));
        }
        let dir = direction.ok_or_else(|| Failure::parse("--vector needs --direction"))?;
        if dir == 0 || dir > l.dim() {
            return Err(Failure::parse(format!("direction must lie in 1..={}", l.dim())));
        }
        let ve: Vec<Expr> = v.iter().cloned().map(Expr::constant).collect();
        let out = liesym::optimal::adjoint_act_symbolic(&l, &ve, dir - 1, &lam)?;
        let before = combination(&ve, &names);
        let after = combination(&out, &names);
        return Ok(Output {
            json: json!({
                "vector": v.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
                "direction": dir,
                "lambda": lam.to_string(),
                "image": out.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
            }),
            markdown: format!("Ad(exp({lam}*{})) ({before}) = {after}\n", names[dir - 1]),
        });
    }
    let rows = adjoint_rows(&l, &names, &lam);
    let mut header = vec![format!("Ad(exp({lam} row)) column")];
    header.extend(names.iter().cloned());
    let mut md = String::from("# Adjoint representation\n\n");
    md_table(&mut md, &header, &rows);
    Ok(Output { json: json!({ "labels": names, "lambda": lam.to_string(), "adjoint": rows }), markdown: md })
}

pub fn optimal(
    c: &Common,
    vector: Option<&str>,
    samples: usize,
    families: Option<&Path>,
) -> Result<Output, Failure> {
    let l = paper::paper_algebra();
    if let Some(v) = vector {
        let v = parse_vector(v)?;
        if v.len() != 3 {
            return Err(Failure::parse("vector must have three entries"));
        }
        let (rep, word) = canonical_form(&l, &v)?;
        let names = labels(3, true);
        let show = |x: &[Rational]| combination(&x.iter().cloned().map(Expr::constant).collect::<Vec<_>>(), &names);
        return Ok(Output {
            json: json!({
                "vector": v.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
                "canonical": rep.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
                "word": word,
            }),
            markdown: format!("{} ~ {}\nvia {word}\n", show(&v), show(&rep)),
        });
    }
    let fams: Vec<RepFamily> = match families {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::other(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::parse(e.to_string()))?
        }
        None => paper::representatives().0,
    };
    let cov = verify_representatives(&l, &fams, samples, c.seed)?;
    let mut md = format!(
        "# Optimal system coverage\n\nseed {}, {} samples + {} probes, {} unmatched, full coverage: {}\n\n",
        cov.seed,
        cov.samples,
        cov.probes.len(),
        cov.unmatched.len(),
        cov.full_coverage
    );
    let rows: Vec<Vec<String>> = cov
        .family_names
        .iter()
        .enumerate()
        .map(|(k, n)| vec![n.clone(), cov.hits[k].to_string(), cov.unique_hits[k].to_string()])
        .collect();
    md_table(&mut md, &["family", "hits", "unique hits"].map(String::from), &rows);
    for &(a, b, k) in &cov.overlaps {
        let _ = writeln!(md, "- overlap: {} & {} ({k} samples)", cov.family_names[a], cov.family_names[b]);
    }
    Ok(Output { json: serde_json::to_value(&cov).expect("coverage serializes"), markdown: md })
}

pub fn invariant(c: &Common, element: Option<&str>) -> Result<Output, Failure> {
    let ode = load_ode(c.ode.as_deref())?;
    let elements: Vec<(Vec<Rational>, CurveDomain)> = match element {
        Some(e) => {
            let v = parse_vector(e)?;
            if v.len() != 3 {
                return Err(Failure::parse("element must have three entries"));
            }
            vec![(v, CurveDomain::default())]
        }
        None => paper::table3().iter().map(|r| (r.coefficients(), r.curve_domain())).collect(),
    };
    let names = labels(3, true);
    let gens = paper_generators();
    let mut md = format!("# Invariant solutions of `y'' = {}`\n\n", ode.omega);
    let mut items = Vec::new();
    for (v, domain) in elements {
        let g = combine(&gens, &v);
        let el = combination(&v.iter().cloned().map(Expr::constant).collect::<Vec<_>>(), &names);
        let q = invariant_condition(&g).normalize();
        let reduction = match reduce(&g) {
            Reduction::FirstOrder(f) => format!("y' = {}", f.rhs),
            Reduction::Locus(e) => format!("{e} = 0"),
        };
        let sol = invariant_solution(&g);
        let (solution, singular) = match &sol {
            SolutionForm::Explicit(y) => (format!("y = {y}"), on_singular_locus(&ode, y)),
            SolutionForm::AlgebraicLocus(eta) => match solve_locus(eta) {
                Some(y) => (format!("y = {y}"), on_singular_locus(&ode, &y)),
                None => (format!("{eta} = 0"), false),
            },
            SolutionForm::Unsolved(_) => ("unsolved".into(), false),
        };
        let explicit = match &sol {
            SolutionForm::AlgebraicLocus(eta) => solve_locus(eta).map(SolutionForm::Explicit),
            _ => Some(sol.clone()),
        };
        let (inv, on_ode) = match &explicit {
            Some(s) => (
                verify_invariance(&g, s, domain, c.tol, c.seed),
                verify_on_ode(&ode, s, domain, c.tol, c.seed),
            ),
            None => (
                verify_invariance(&g, &sol, domain, c.tol, c.seed),
                verify_on_ode(&ode, &sol, domain, c.tol, c.seed),
            ),
        };
        let _ = writeln!(
            md,
            "## {el}\n\n- Q = {q}\n- reduction: {reduction}\n- solution ({}): {solution}{}\n- invariance: {}\n- on the equation: {}\n",
            sol.kind(),
            if singular { " (on the singular locus)" } else { "" },
            if inv.pass { "pass" } else if inv.checkable { "fail" } else { "not checkable" },
            if singular {
                "singular"
            } else if on_ode.pass {
                "pass"
            } else if on_ode.checkable {
                "fail"
            } else {
                "not checkable"
            }
        );
        items.push(json!({
            "element": v.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
            "q": q.to_string(),
            "reduction": reduction,
            "kind": sol.kind(),
            "solution": solution,
            "singular": singular,
            "invariance": inv,
            "on_ode": on_ode,
        }));
    }
    Ok(Output { json: json!({ "ode": ode_json(&ode), "seed": c.seed, "elements": items }), markdown: md })
}

pub fn noether(
    c: &Common,
    fixture: Option<&Path>,
    trajectories: usize,
    tol_conservation: f64,
) -> Result<Output, Failure> {
    let ode = load_ode(c.ode.as_deref())?;
    let fx = match fixture {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::other(format!("{}: {e}", p.display())))?;
            NoetherFixture::from_json(&text)?
        }
        None => paper::noether_fixture()?,
    };
    let gens = paper_generators();
    let mut md = format!("# Noether analysis of `y'' = {}`\n\n", ode.omega);
    let mut deltas = serde_json::Map::new();
    for (conv, key) in [(FirstRow::Paper, "paper"), (FirstRow::Standard, "standard")] {
        let d = jlm_determinant(&ode, &gens[0], &gens[1], conv).normalize();
        let from = match lagrangian_from_multiplier(&(Expr::one() / d.clone())) {
            Ok(l) => l.0.to_string(),
            Err(e) => e.to_string(),
        };
        let _ = writeln!(md, "- Delta, first row {key}: {d}; Lagrangian from 1/Delta: {from}");
        deltas.insert(key.into(), json!({ "delta": d.to_string(), "lagrangian": from }));
    }
    let el = el_matches_ode(&fx.lagrangian, &ode, c.tol, 100, c.seed);
    let res = variational_residual(&fx.lagrangian, &fx.generator, &fx.gauge);
    let i = conserved_quantity(&fx.lagrangian, &fx.generator, &fx.gauge);
    let conservation = if el.pass {
        let r = check_conserved(&ode, &ConservedQuantity(i.0.clone()), trajectories, 1e-3, 1.0, tol_conservation, c.seed)?;
        serde_json::to_value(&r).expect("report serializes")
    } else {
        json!("skipped: the Lagrangian is not exact for this equation")
    };
    let _ = writeln!(
        md,
        "- L = {}\n- Euler-Lagrange on the equation: {} (max residual {:.3e})\n- generator {}, gauge {}: residual {res}\n- I = {}\n- conservation: {}",
        fx.lagrangian.0,
        if el.pass { "pass" } else { "fail" },
        el.max_residual,
        fx.generator,
        fx.gauge,
        i.0,
        match &conservation {
            Value::String(s) => s.clone(),
            v => format!("pass = {}", v["pass"]),
        }
    );
    Ok(Output {
        json: json!({
            "ode": ode_json(&ode),
            "seed": c.seed,
            "determinant": deltas,
            "lagrangian": fx.lagrangian.0.to_string(),
            "euler_lagrange": el,
            "variational_residual": res.to_string(),
            "first_integral": i.0.to_string(),
            "conservation": conservation,
        }),
        markdown: md,
    })
}

pub fn verify_paper(c: &Common, samples: usize, trajectories: usize, tol_conservation: f64) -> Output {
    let cfg = ReportConfig {
        seed: c.seed,
        degree: c.degree,
        tol_numeric: c.tol,
        tol_conservation,
        optimal_samples: samples,
        trajectories,
    };
    let r = report::verify_paper(&cfg);
    Output { json: serde_json::to_value(&r).expect("report serializes"), markdown: r.to_markdown() }
}
