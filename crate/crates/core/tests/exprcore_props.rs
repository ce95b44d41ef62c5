use std::collections::BTreeMap;

use liesym::exprcore::{
    collect, eval_at, normalize_rational, parse, ratio, Expr, Rational,
};
use proptest::prelude::*;

mod common;
use common::tree;

fn point(x: f64, y: f64, p: f64) -> BTreeMap<String, f64> {
    [("x", x), ("y", y), ("p", p)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn render_then_parse_is_identity(e in tree(6, true)) {
        let text = e.to_string();
        let back = parse(&text).expect("rendered text parses");
        prop_assert_eq!(back, e, "{}", text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn diff_is_linear(e1 in tree(3, true), e2 in tree(3, true), a in -4i64..=4, b in 1i64..=4) {
        let (a, b) = (Expr::int(a), Expr::frac(1, b));
        let lhs = (&a * &e1 + &b * &e2).diff("x");
        let rhs = &a * e1.diff("x") + &b * e2.diff("x");
        prop_assert_eq!(lhs.normalize(), rhs.normalize());
    }

    #[test]
    fn leibniz_rule(e1 in tree(3, true), e2 in tree(3, true)) {
        let prod = (&e1 * &e2).diff("y");
        let expanded = &e1 * e2.diff("y") + &e2 * e1.diff("y");
        let d = (prod - expanded).normalize();
        prop_assert!(d.is_zero_const() || d.is_undefined(), "{}", d);
    }

    #[test]
    fn normalize_rational_agrees_numerically(e in tree(4, false), seed in 0u64..1000) {
        let Ok((num, den)) = normalize_rational(&e, &["x", "y", "p"]) else {
            return Ok(());
        };
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) as f64 / (1u64 << 31) as f64) * 3.0 + 0.25
        };
        for _ in 0..5 {
            let b = point(next(), next(), next() - 1.5);
            let (Ok(v), Ok(n), Ok(d)) = (
                liesym::exprcore::eval_numeric(&e, &b),
                liesym::exprcore::eval_numeric(&num, &b),
                liesym::exprcore::eval_numeric(&den, &b),
            ) else { continue };
            if d.abs() < 1e-6 || v.abs() > 1e8 {
                continue;
            }
            prop_assert!(close(v, n / d, 1e-9), "{} vs {}/{}", v, n, d);
        }
    }

    #[test]
    fn collect_round_trip(e in tree(3, false)) {
        let poly = e.normalize();
        if let Ok(c) = collect(&poly, &["p"]) {
            prop_assert!(c.reassemble().equivalent(&poly));
        }
    }

    #[test]
    fn derivative_matches_finite_differences(e in tree(3, true), x in 0.3f64..2.5, y in 0.3f64..2.5) {
        let d = e.diff("x");
        let f = |t: f64| eval_at(&e, &[("x", t), ("y", y), ("p", 0.5)]);
        let h = 1e-5;
        let (Ok(fp), Ok(fm), Ok(fp2), Ok(fm2), Ok(dv)) = (
            f(x + h), f(x - h), f(x + 2.0 * h), f(x - 2.0 * h),
            eval_at(&d, &[("x", x), ("y", y), ("p", 0.5)]),
        ) else { return Ok(()) };
        let c1 = (fp - fm) / (2.0 * h);
        let c2 = (fp2 - fm2) / (4.0 * h);
        let fd = (4.0 * c1 - c2) / 3.0;
        if dv.abs() > 1e6 || !fd.is_finite() {
            return Ok(());
        }
        prop_assert!(close(dv, fd, 1e-6), "{} vs {} for {}", dv, fd, e);
    }

    #[test]
    fn float_eval_matches_exact(e in tree(4, false), xn in 1i64..20, yn in 1i64..20) {
        let xr = ratio(xn, 7);
        let yr = ratio(yn, 3);
        let mut m = BTreeMap::new();
        m.insert("x".to_string(), Expr::constant(xr.clone()));
        m.insert("y".to_string(), Expr::constant(yr.clone()));
        m.insert("p".to_string(), Expr::frac(1, 2));
        let exact = e.substitute(&m).normalize();
        let Some(c) = exact.as_const() else { return Ok(()) };
        let Ok(v) = eval_at(&e, &[("x", to_f(&xr)), ("y", to_f(&yr)), ("p", 0.5)]) else {
            return Ok(());
        };
        prop_assert!(close(v, to_f(c), 1e-12), "{} vs {}", v, c);
    }
}

fn to_f(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap()
}
