//! Lie point symmetry analysis for second-order ODEs `y'' = w(x, y, y')`
//! with a rational right-hand side.

pub mod exprcore;
pub mod invariant;
pub mod detsolve;
pub mod liealg;
pub mod linalg;
pub mod noether;
pub mod numeric;
pub mod optimal;
pub mod paper;
pub mod report;
