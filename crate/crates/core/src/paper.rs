//! The worked example: fixture ODE variants, printed tables and claimed values.

use serde::Deserialize;

use crate::detsolve::{DetError, OdeSecondOrder, VectorFieldGen};
use crate::exprcore::{parse, Expr, ExprError, Rational};
use crate::invariant::CurveDomain;
use crate::liealg::LieAlgebra;
use crate::noether::{NoetherError, NoetherFixture};
use crate::optimal::RepFamily;

pub const ODE_PRINTED: &str = include_str!("../../../fixtures/ode_printed.json");
pub const ODE_PLUS: &str = include_str!("../../../fixtures/ode_plus.json");
pub const ODE_MINUS: &str = include_str!("../../../fixtures/ode_minus.json");
pub const TABLE3: &str = include_str!("../../../fixtures/table3.json");
pub const GENERATORS: &str = include_str!("../../../fixtures/generators.json");
pub const NOETHER: &str = include_str!("../../../fixtures/noether.json");
pub const CONSERVED: &str = include_str!("../../../fixtures/conserved_b2.json");
pub const REPRESENTATIVES: &str = include_str!("../../../fixtures/representatives.json");
pub const TABLES: &str = include_str!("../../../fixtures/tables.json");

/// Name of the sign variant treated as the equation under study.
pub const CANONICAL_VARIANT: &str = "ODE_plus";

/// Printed value of the multiplier determinant.
pub const PRINTED_DELTA: &str = "x*(x + 2*y - p)";
/// Printed first prolongation of the second generator.
pub const PRINTED_PI2_PROLONGATION: &str = "1 - p";
/// Printed multiplier `1 / Delta`.
pub const PRINTED_MULTIPLIER: &str = "x^(-1)/(x + 2*y - p)";

/// `ODE_printed`, `ODE_plus`, `ODE_minus`, in that order.
pub fn ode_variants() -> Result<Vec<OdeSecondOrder>, DetError> {
    [ODE_PRINTED, ODE_PLUS, ODE_MINUS]
        .iter()
        .map(|t| OdeSecondOrder::from_json(t))
        .collect()
}

pub fn canonical_ode() -> OdeSecondOrder {
    OdeSecondOrder::from_json(ODE_PLUS).expect("bundled fixture")
}

#[derive(Deserialize)]
struct NamedGen {
    name: String,
    xi: String,
    eta: String,
}

/// `(name, generator)` for the three symmetry generators.
pub fn generators() -> Result<Vec<(String, VectorFieldGen)>, ExprError> {
    let raw: Vec<NamedGen> = serde_json::from_str(GENERATORS).expect("bundled fixture");
    raw.into_iter()
        .map(|g| Ok((g.name, VectorFieldGen::parse(&g.xi, &g.eta)?)))
        .collect()
}

#[derive(Clone, Debug, Deserialize)]
pub struct SolutionRow {
    pub element: String,
    pub generator: Vec<i64>,
    /// Printed invariant-curve condition with `p` for `y'`.
    pub q: String,
    pub solution: String,
    pub domain: [f64; 2],
}

impl SolutionRow {
    pub fn coefficients(&self) -> Vec<Rational> {
        self.generator.iter().map(|&k| Rational::from_integer(k.into())).collect()
    }

    pub fn curve_domain(&self) -> CurveDomain {
        CurveDomain { x: (self.domain[0], self.domain[1]), ..CurveDomain::default() }
    }
}

pub fn table3() -> Vec<SolutionRow> {
    serde_json::from_str(TABLE3).expect("bundled fixture")
}

pub fn noether_fixture() -> Result<NoetherFixture, NoetherError> {
    NoetherFixture::from_json(NOETHER)
}

#[derive(Deserialize)]
struct Quantity {
    quantity: String,
}

/// Printed conserved quantity with the free constant set to one.
pub fn printed_conserved() -> Result<Expr, ExprError> {
    let q: Quantity = serde_json::from_str(CONSERVED).expect("bundled fixture");
    parse(&q.quantity)
}

#[derive(Deserialize)]
struct Representatives {
    stated: Vec<RepFamily>,
    derived: Vec<RepFamily>,
}

/// The optimal list as stated and as obtained by the case analysis.
pub fn representatives() -> (Vec<RepFamily>, Vec<RepFamily>) {
    let r: Representatives = serde_json::from_str(REPRESENTATIVES).expect("bundled fixture");
    (r.stated, r.derived)
}

/// Printed commutator and adjoint tables plus the printed algebra invariants.
#[derive(Clone, Debug, Deserialize)]
pub struct PrintedTables {
    /// `commutators[i][j]` is `[Pi_i, Pi_j]` in coordinates.
    pub commutators: Vec<Vec<Vec<String>>>,
    /// `adjoint[i][j]` is `Ad(exp(lambda Pi_i)) Pi_j` in coordinates.
    pub adjoint: Vec<Vec<Vec<String>>>,
    pub killing: Vec<Vec<String>>,
    pub center: Vec<Vec<String>>,
    pub nilradical: Vec<Vec<String>>,
}

pub fn printed_tables() -> PrintedTables {
    serde_json::from_str(TABLES).expect("bundled fixture")
}

/// Commutator table of the three generators, by coordinates.
pub fn paper_algebra() -> LieAlgebra {
    let r = |xs: [i64; 3]| xs.iter().map(|&x| Rational::from_integer(x.into())).collect();
    LieAlgebra::from_brackets(
        &["Pi1", "Pi2", "Pi3"],
        &[(0, 2, r([0, 0, 1])), (1, 2, r([0, 0, -1]))],
    )
    .expect("valid constants")
}

/// Parse a matrix of rational literals.
pub fn rationals(rows: &[Vec<String>]) -> Vec<Vec<Rational>> {
    rows.iter()
        .map(|r| r.iter().map(|s| s.parse().expect("rational literal")).collect())
        .collect()
}
