//! Immutable expression trees over exact rationals.
//!
//! Every [`Expr`] is kept in a light canonical form by its constructors:
//! sums and products are flattened, operands are sorted by a fixed total
//! order, like terms and like bases are merged and numeric subterms are
//! folded. Expansion and common-denominator arithmetic live in
//! [`Expr::normalize`](super::ratfn).

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational number, always in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// Build a rational from a small integer.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Build the rational `n/d`. Panics on `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// A variable name. `x`, `y`, `p`, `q` sort first, in that order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    fn rank(&self) -> u8 {
        match &*self.0 {
            "x" => 0,
            "y" => 1,
            "p" => 2,
            "q" => 3,
            _ => 4,
        }
    }
}

impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank()
            .cmp(&other.rank())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Node kinds. Division is `Pow(e, -1)`; square roots are `Pow(e, 1/2)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Const(Rational),
    Var(Symbol),
    Pow(Expr, Expr),
    Mul(Vec<Expr>),
    Add(Vec<Expr>),
    Exp(Expr),
    Ln(Expr),
}

impl Node {
    fn rank(&self) -> u8 {
        match self {
            Node::Const(_) => 0,
            Node::Var(_) => 1,
            Node::Pow(..) => 2,
            Node::Mul(_) => 3,
            Node::Add(_) => 4,
            Node::Exp(_) => 5,
            Node::Ln(_) => 6,
        }
    }
}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Node::Const(a), Node::Const(b)) => a.cmp(b),
            (Node::Var(a), Node::Var(b)) => a.cmp(b),
            (Node::Pow(b1, e1), Node::Pow(b2, e2)) => b1.cmp(b2).then_with(|| e1.cmp(e2)),
            (Node::Mul(a), Node::Mul(b)) | (Node::Add(a), Node::Add(b)) => a.cmp(b),
            (Node::Exp(a), Node::Exp(b)) | (Node::Ln(a), Node::Ln(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shared, immutable expression handle.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}

impl Eq for Expr {}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        self.0.cmp(&other.0)
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.hash(state)
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({})", self)
    }
}

impl Expr {
    fn raw(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub(crate) fn ptr_id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(value: Rational) -> Self {
        Expr::raw(Node::Const(value))
    }

    pub fn int(n: i64) -> Self {
        Expr::constant(rat(n))
    }

    pub fn frac(n: i64, d: i64) -> Self {
        Expr::constant(ratio(n, d))
    }

    pub fn zero() -> Self {
        Expr::int(0)
    }

    pub fn one() -> Self {
        Expr::int(1)
    }

    pub fn var(name: &str) -> Self {
        Expr::raw(Node::Var(Symbol::new(name)))
    }

    /// The division-by-zero marker, `0^(-1)`. It absorbs every operation.
    pub fn undefined() -> Self {
        Expr::raw(Node::Pow(Expr::zero(), Expr::int(-1)))
    }

    pub fn is_undefined(&self) -> bool {
        match self.node() {
            Node::Pow(b, e) => {
                b.is_zero_const() && e.as_const().is_some_and(|c| c.is_negative())
            }
            _ => false,
        }
    }

    /// True when the division-by-zero marker occurs anywhere in the tree.
    pub fn contains_undefined(&self) -> bool {
        if self.is_undefined() {
            return true;
        }
        match self.node() {
            Node::Const(_) | Node::Var(_) => false,
            Node::Pow(b, e) => b.contains_undefined() || e.contains_undefined(),
            Node::Mul(v) | Node::Add(v) => v.iter().any(Expr::contains_undefined),
            Node::Exp(a) | Node::Ln(a) => a.contains_undefined(),
        }
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self.node() {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_var(&self) -> Option<&str> {
        match self.node() {
            Node::Var(s) => Some(s.name()),
            _ => None,
        }
    }

    pub fn is_zero_const(&self) -> bool {
        self.as_const().is_some_and(Zero::is_zero)
    }

    pub fn is_one_const(&self) -> bool {
        self.as_const().is_some_and(One::is_one)
    }

    /// Sum of operands.
    pub fn add(terms: Vec<Expr>) -> Expr {
        let mut constant = Rational::zero();
        let mut groups: BTreeMap<Expr, Rational> = BTreeMap::new();
        let mut stack = terms;
        while let Some(t) = stack.pop() {
            if t.is_undefined() {
                return Expr::undefined();
            }
            match t.node() {
                Node::Add(inner) => stack.extend(inner.iter().cloned()),
                Node::Const(c) => constant += c,
                _ => {
                    let (c, body) = t.split_coefficient();
                    *groups.entry(body).or_insert_with(Rational::zero) += c;
                }
            }
        }
        let mut out: Vec<Expr> = groups
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(body, c)| Expr::scaled(c, body))
            .collect();
        if !constant.is_zero() {
            out.push(Expr::constant(constant));
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => {
                out.sort();
                Expr::raw(Node::Add(out))
            }
        }
    }

    /// Split `c * body` with `c` rational. Non-products have coefficient 1.
    pub fn split_coefficient(&self) -> (Rational, Expr) {
        match self.node() {
            Node::Const(c) => (c.clone(), Expr::one()),
            Node::Mul(fs) => match fs[0].as_const() {
                Some(c) => {
                    let rest = &fs[1..];
                    let body = if rest.len() == 1 {
                        rest[0].clone()
                    } else {
                        Expr::raw(Node::Mul(rest.to_vec()))
                    };
                    (c.clone(), body)
                }
                None => (Rational::one(), self.clone()),
            },
            _ => (Rational::one(), self.clone()),
        }
    }

    /// `c * body` for a body that is already canonical and carries no coefficient.
    fn scaled(c: Rational, body: Expr) -> Expr {
        if c.is_one() {
            return body;
        }
        if c.is_zero() {
            return Expr::zero();
        }
        if body.is_one_const() {
            return Expr::constant(c);
        }
        let mut fs = vec![Expr::constant(c)];
        match body.node() {
            Node::Mul(inner) => fs.extend(inner.iter().cloned()),
            _ => fs.push(body),
        }
        Expr::raw(Node::Mul(fs))
    }

    /// Product of operands.
    pub fn mul(factors: Vec<Expr>) -> Expr {
        let mut coeff = Rational::one();
        let mut bases: BTreeMap<Expr, Vec<Expr>> = BTreeMap::new();
        let mut exp_args: Vec<Expr> = Vec::new();
        let mut stack = factors;
        if stack.iter().any(Expr::is_undefined) {
            return Expr::undefined();
        }
        while let Some(f) = stack.pop() {
            match f.node() {
                Node::Mul(inner) => stack.extend(inner.iter().cloned()),
                Node::Const(c) => coeff *= c,
                Node::Exp(a) => exp_args.push(a.clone()),
                Node::Pow(b, e) => bases.entry(b.clone()).or_default().push(e.clone()),
                _ => bases.entry(f.clone()).or_default().push(Expr::one()),
            }
        }
        if coeff.is_zero() {
            return Expr::zero();
        }
        let mut out: Vec<Expr> = Vec::new();
        let mut extra: Vec<Expr> = Vec::new();
        for (base, exps) in bases {
            let e = Expr::add(exps);
            let powered = Expr::pow(base, e);
            match powered.node() {
                Node::Const(c) => coeff *= c,
                Node::Mul(_) | Node::Exp(_) => extra.push(powered),
                _ => out.push(powered),
            }
        }
        if !exp_args.is_empty() {
            let ex = Expr::exp(Expr::add(exp_args));
            match ex.node() {
                Node::Const(c) => coeff *= c,
                Node::Exp(_) => out.push(ex),
                _ => extra.push(ex),
            }
        }
        if !extra.is_empty() {
            let mut all = out;
            all.extend(extra);
            all.push(Expr::constant(coeff));
            return Expr::mul(all);
        }
        if coeff.is_zero() {
            return Expr::zero();
        }
        if out.iter().any(Expr::is_undefined) {
            return Expr::undefined();
        }
        out.sort();
        if !coeff.is_one() || out.is_empty() {
            out.insert(0, Expr::constant(coeff));
        }
        if out.len() == 1 {
            out.pop().unwrap()
        } else {
            Expr::raw(Node::Mul(out))
        }
    }

    /// `base ^ exponent`.
    pub fn pow(base: Expr, exponent: Expr) -> Expr {
        if base.is_undefined() || exponent.is_undefined() {
            return Expr::undefined();
        }
        if exponent.is_zero_const() {
            return Expr::one();
        }
        if exponent.is_one_const() {
            return base;
        }
        if base.is_one_const() {
            return Expr::one();
        }
        if let (Some(b), Some(e)) = (base.as_const(), exponent.as_const()) {
            return const_pow(b, e);
        }
        let int_exp = exponent.as_const().filter(|e| e.is_integer()).cloned();
        match (base.node(), int_exp) {
            (Node::Pow(inner, e0), Some(n)) => {
                Expr::pow(inner.clone(), Expr::mul(vec![e0.clone(), Expr::constant(n)]))
            }
            (Node::Mul(fs), Some(n)) => Expr::mul(
                fs.iter()
                    .map(|f| Expr::pow(f.clone(), Expr::constant(n.clone())))
                    .collect(),
            ),
            (Node::Exp(a), _) => Expr::exp(Expr::mul(vec![a.clone(), exponent])),
            _ => Expr::raw(Node::Pow(base, exponent)),
        }
    }

    pub fn exp(arg: Expr) -> Expr {
        if arg.is_undefined() {
            return Expr::undefined();
        }
        if arg.is_zero_const() {
            return Expr::one();
        }
        match arg.node() {
            Node::Ln(b) => return b.clone(),
            Node::Mul(fs) if fs.len() == 2 => {
                if let (Some(k), Node::Ln(b)) = (fs[0].as_const(), fs[1].node()) {
                    return Expr::pow(b.clone(), Expr::constant(k.clone()));
                }
            }
            _ => {}
        }
        Expr::raw(Node::Exp(arg))
    }

    pub fn ln(arg: Expr) -> Expr {
        if arg.is_undefined() {
            return Expr::undefined();
        }
        if arg.is_one_const() {
            return Expr::zero();
        }
        match arg.node() {
            Node::Exp(b) => b.clone(),
            Node::Pow(b, e) if e.as_const().is_some() => {
                Expr::mul(vec![e.clone(), Expr::ln(b.clone())])
            }
            _ => Expr::raw(Node::Ln(arg)),
        }
    }

    pub fn sqrt(arg: Expr) -> Expr {
        Expr::pow(arg, Expr::frac(1, 2))
    }

    pub fn recip(self) -> Expr {
        Expr::pow(self, Expr::int(-1))
    }

    pub fn powi(&self, n: i64) -> Expr {
        Expr::pow(self.clone(), Expr::int(n))
    }

    /// Rebuild a node from new children through the canonical constructors.
    pub fn rebuild(&self, mut f: impl FnMut(&Expr) -> Expr) -> Expr {
        match self.node() {
            Node::Const(_) | Node::Var(_) => self.clone(),
            Node::Pow(b, e) => Expr::pow(f(b), f(e)),
            Node::Mul(v) => Expr::mul(v.iter().map(&mut f).collect()),
            Node::Add(v) => Expr::add(v.iter().map(&mut f).collect()),
            Node::Exp(a) => Expr::exp(f(a)),
            Node::Ln(a) => Expr::ln(f(a)),
        }
    }

    /// Free variables in canonical symbol order.
    pub fn free_vars(&self) -> Vec<String> {
        let mut acc = std::collections::BTreeSet::new();
        self.collect_vars(&mut acc);
        acc.into_iter().map(|s| s.name().to_string()).collect()
    }

    fn collect_vars(&self, acc: &mut std::collections::BTreeSet<Symbol>) {
        match self.node() {
            Node::Const(_) => {}
            Node::Var(s) => {
                acc.insert(s.clone());
            }
            Node::Pow(b, e) => {
                b.collect_vars(acc);
                e.collect_vars(acc);
            }
            Node::Mul(v) | Node::Add(v) => v.iter().for_each(|e| e.collect_vars(acc)),
            Node::Exp(a) | Node::Ln(a) => a.collect_vars(acc),
        }
    }

    pub fn depends_on(&self, var: &str) -> bool {
        match self.node() {
            Node::Const(_) => false,
            Node::Var(s) => s.name() == var,
            Node::Pow(b, e) => b.depends_on(var) || e.depends_on(var),
            Node::Mul(v) | Node::Add(v) => v.iter().any(|e| e.depends_on(var)),
            Node::Exp(a) | Node::Ln(a) => a.depends_on(var),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + match self.node() {
            Node::Const(_) | Node::Var(_) => 0,
            Node::Pow(b, e) => b.size() + e.size(),
            Node::Mul(v) | Node::Add(v) => v.iter().map(Expr::size).sum(),
            Node::Exp(a) | Node::Ln(a) => a.size(),
        }
    }
}

/// Exact integer root of a non-negative integer, if it exists.
pub(crate) fn exact_root(n: &BigInt, k: u32) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.nth_root(k);
    if num_traits::pow(r.clone(), k as usize) == *n {
        Some(r)
    } else {
        None
    }
}

pub(crate) fn rational_pow_int(b: &Rational, n: &BigInt) -> Option<Rational> {
    let n = n.to_i64()?;
    if b.is_zero() && n < 0 {
        return None;
    }
    let m = n.unsigned_abs() as usize;
    let p = num_traits::pow(b.clone(), m);
    Some(if n < 0 { p.recip() } else { p })
}

fn const_pow(b: &Rational, e: &Rational) -> Expr {
    if e.is_integer() {
        return match rational_pow_int(b, e.numer()) {
            Some(v) => Expr::constant(v),
            None if b.is_zero() => Expr::undefined(),
            None => Expr::raw(Node::Pow(Expr::constant(b.clone()), Expr::constant(e.clone()))),
        };
    }
    if b.is_zero() {
        return if e.is_positive() {
            Expr::zero()
        } else {
            Expr::undefined()
        };
    }
    if b.is_negative() {
        return Expr::raw(Node::Pow(Expr::constant(b.clone()), Expr::constant(e.clone())));
    }
    let k = e.denom().to_u32();
    if let Some(k) = k {
        if let (Some(rn), Some(rd)) = (exact_root(b.numer(), k), exact_root(b.denom(), k)) {
            let root = Rational::new(rn, rd);
            if let Some(v) = rational_pow_int(&root, e.numer()) {
                return Expr::constant(v);
            }
        }
    }
    // c^(n + f) = c^n * c^f with 0 < f < 1
    let whole = e.floor();
    let frac = e - &whole;
    let radical = Expr::raw(Node::Pow(Expr::constant(b.clone()), Expr::constant(frac)));
    if whole.is_zero() {
        return radical;
    }
    match rational_pow_int(b, whole.numer()) {
        Some(v) => Expr::raw(Node::Mul(vec![Expr::constant(v), radical])),
        None => Expr::undefined(),
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl From<Rational> for Expr {
    fn from(r: Rational) -> Self {
        Expr::constant(r)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
        impl ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs.clone())
            }
        }
        impl ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs.clone())
            }
        }
        impl ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| Expr::add(vec![a, b]));
binop!(Sub, sub, |a, b| Expr::add(vec![a, Expr::mul(vec![Expr::int(-1), b])]));
binop!(Mul, mul, |a, b| Expr::mul(vec![a, b]));
binop!(Div, div, |a, b| Expr::mul(vec![a, Expr::pow(b, Expr::int(-1))]));

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::mul(vec![Expr::int(-1), self])
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Expr {
        Expr::var("x")
    }
    fn y() -> Expr {
        Expr::var("y")
    }

    #[test]
    fn like_terms_merge() {
        let e = x() + x();
        assert_eq!(e, Expr::mul(vec![Expr::int(2), x()]));
        assert_eq!(x() - x(), Expr::zero());
    }

    #[test]
    fn like_bases_merge() {
        let e = &x() * &x();
        assert_eq!(e, Expr::pow(x(), Expr::int(2)));
        let half = Expr::sqrt(x());
        assert_eq!(&half * &half, x());
        assert_eq!(Expr::pow(half, Expr::int(2)), x());
    }

    #[test]
    fn constants_fold() {
        assert_eq!(Expr::int(2) * Expr::frac(1, 4), Expr::frac(1, 2));
        assert_eq!(Expr::sqrt(Expr::int(4)), Expr::int(2));
        assert_eq!(Expr::pow(Expr::frac(1, 9), Expr::frac(-1, 2)), Expr::int(3));
        let eight_half = Expr::pow(Expr::int(8), Expr::frac(3, 2));
        // 8^(3/2) = 8 * 8^(1/2)
        assert_eq!(
            eight_half,
            Expr::mul(vec![Expr::int(8), Expr::pow(Expr::int(8), Expr::frac(1, 2))])
        );
    }

    #[test]
    fn exp_and_ln_rules() {
        let e = Expr::exp(x()) * Expr::exp(y());
        assert_eq!(e, Expr::exp(x() + y()));
        assert_eq!(Expr::exp(Expr::ln(x())), x());
        assert_eq!(
            Expr::ln(Expr::pow(x(), Expr::int(3))),
            Expr::int(3) * Expr::ln(x())
        );
        assert_eq!(Expr::exp(x()) * Expr::exp(-x()), Expr::one());
    }

    #[test]
    fn division_by_zero_marker_absorbs() {
        let bad = Expr::zero().recip();
        assert!(bad.is_undefined());
        assert!((x() + bad.clone()).is_undefined());
        assert!((x() * bad).is_undefined());
    }

    #[test]
    fn products_distribute_integer_powers() {
        let e = Expr::pow(&x() * &y(), Expr::int(-1));
        assert_eq!(e, Expr::mul(vec![x().recip(), y().recip()]));
    }

    #[test]
    fn constructors_are_idempotent_on_canonical_forms() {
        let e = (x() + Expr::int(2) * y()) / (x() * (x() + y()));
        let again = e.rebuild(|c| c.clone());
        assert_eq!(e, again);
    }
}
