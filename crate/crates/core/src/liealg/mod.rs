//! Finite-dimensional Lie algebras given by exact structure constants.

mod classify;
mod putzer;

pub use classify::{classify, BianchiLabel, BianchiType, ClassificationReport};
pub use putzer::{adjoint_exp, adjoint_exp_poly, eval_terms, putzer, rational_roots, ExpPoly};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use num_traits::Zero;

use crate::detsolve::VectorFieldGen;
use crate::exprcore::{linear_equations, parse, Expr, ExprError, Rational};
use crate::linalg::{primitive_vector, QMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LieError {
    #[error("bracket [{0}, {1}] is not in the span of the basis")]
    NotClosed(usize, usize),
    #[error("basis fields are linearly dependent")]
    NotIndependent,
    #[error("structure constants violate {0}")]
    InvalidStructure(String),
    #[error("ad matrix has irrational eigenvalues")]
    IrrationalEigenvalues,
    #[error("dimension {0} exceeds the supported limit")]
    DimensionTooLarge(usize),
    #[error("solvability witnesses disagree")]
    InternalInconsistency,
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("invalid algebra export: {0}")]
    Format(String),
}

/// `[e_i, e_j] = sum_k c[i][j][k] e_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieAlgebra {
    pub labels: Vec<String>,
    c: Vec<Vec<Vec<Rational>>>,
}

impl LieAlgebra {
    /// Validate antisymmetry and the Jacobi identity.
    pub fn new(labels: Vec<String>, c: Vec<Vec<Vec<Rational>>>) -> Result<Self, LieError> {
        let n = labels.len();
        let shape_ok = c.len() == n
            && c.iter()
                .all(|row| row.len() == n && row.iter().all(|v| v.len() == n));
        if !shape_ok {
            return Err(LieError::InvalidStructure("shape".into()));
        }
        let alg = LieAlgebra { labels, c };
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if alg.c[i][j][k] != -alg.c[j][i][k].clone() {
                        return Err(LieError::InvalidStructure("antisymmetry".into()));
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let ei = unit(n, i);
                    let ej = unit(n, j);
                    let ek = unit(n, k);
                    let a = alg.bracket(&alg.bracket(&ei, &ej), &ek);
                    let b = alg.bracket(&alg.bracket(&ej, &ek), &ei);
                    let d = alg.bracket(&alg.bracket(&ek, &ei), &ej);
                    if (0..n).any(|l| !(&a[l] + &b[l] + &d[l]).is_zero()) {
                        return Err(LieError::InvalidStructure("Jacobi identity".into()));
                    }
                }
            }
        }
        Ok(alg)
    }

    /// Build from a list of nonzero brackets `(i, j, [e_i, e_j])`.
    pub fn from_brackets(
        labels: &[&str],
        brackets: &[(usize, usize, Vec<Rational>)],
    ) -> Result<Self, LieError> {
        let n = labels.len();
        let mut c = vec![vec![vec![Rational::zero(); n]; n]; n];
        for (i, j, v) in brackets {
            for k in 0..n {
                c[*i][*j][k] = v[k].clone();
                c[*j][*i][k] = -v[k].clone();
            }
        }
        LieAlgebra::new(labels.iter().map(|s| s.to_string()).collect(), c)
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn constant(&self, i: usize, j: usize, k: usize) -> &Rational {
        &self.c[i][j][k]
    }

    pub fn constants(&self) -> &Vec<Vec<Vec<Rational>>> {
        &self.c
    }

    /// Bracket of coordinate vectors.
    pub fn bracket(&self, u: &[Rational], v: &[Rational]) -> Vec<Rational> {
        let n = self.dim();
        let mut out = vec![Rational::zero(); n];
        for i in 0..n {
            if u[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if v[j].is_zero() {
                    continue;
                }
                let s = &u[i] * &v[j];
                for k in 0..n {
                    if !self.c[i][j][k].is_zero() {
                        out[k] += &s * &self.c[i][j][k];
                    }
                }
            }
        }
        out
    }

    /// Matrix of `ad_v` with `(ad_v)[k][j] = sum_i v_i C^k_ij`.
    pub fn ad_matrix(&self, v: &[Rational]) -> QMatrix {
        let n = self.dim();
        let mut m = QMatrix::zeros(n, n);
        for j in 0..n {
            let col = self.bracket(v, &unit(n, j));
            for k in 0..n {
                m[(k, j)] = col[k].clone();
            }
        }
        m
    }

    pub fn ad_basis(&self, i: usize) -> QMatrix {
        self.ad_matrix(&unit(self.dim(), i))
    }

    /// `K(i, j) = tr(ad_i ad_j)`.
    pub fn killing_form(&self) -> QMatrix {
        let n = self.dim();
        let ads: Vec<QMatrix> = (0..n).map(|i| self.ad_basis(i)).collect();
        let mut k = QMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                k[(i, j)] = ads[i].mul(&ads[j]).trace();
            }
        }
        k
    }

    pub fn killing(&self, v: &[Rational], w: &[Rational]) -> Rational {
        self.ad_matrix(v).mul(&self.ad_matrix(w)).trace()
    }

    /// Basis of `[A, B]`.
    pub fn bracket_span(&self, a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
        let mut vs = Vec::new();
        for u in a {
            for v in b {
                vs.push(self.bracket(u, v));
            }
        }
        span_basis(&vs, self.dim())
    }

    pub fn full_basis(&self) -> Vec<Vec<Rational>> {
        (0..self.dim()).map(|i| unit(self.dim(), i)).collect()
    }

    pub fn derived_algebra(&self) -> Vec<Vec<Rational>> {
        let g = self.full_basis();
        self.bracket_span(&g, &g)
    }

    /// Dimensions of `g, [g,g], [[g,g],[g,g]], ...` until they stabilize.
    pub fn derived_series(&self) -> Vec<usize> {
        let mut cur = self.full_basis();
        let mut dims = vec![cur.len()];
        loop {
            let next = self.bracket_span(&cur, &cur);
            if next.len() == cur.len() {
                return dims;
            }
            dims.push(next.len());
            if next.is_empty() {
                return dims;
            }
            cur = next;
        }
    }

    /// Dimensions of `g, [g,g], [g,[g,g]], ...` until they stabilize.
    pub fn lower_central_series(&self) -> Vec<usize> {
        let g = self.full_basis();
        let mut cur = g.clone();
        let mut dims = vec![cur.len()];
        loop {
            let next = self.bracket_span(&g, &cur);
            if next.len() == cur.len() {
                return dims;
            }
            dims.push(next.len());
            if next.is_empty() {
                return dims;
            }
            cur = next;
        }
    }

    pub fn is_semisimple(&self) -> bool {
        self.dim() > 0 && !self.killing_form().determinant().is_zero()
    }

    /// Solvability with both witnesses. Errors if they disagree.
    pub fn is_solvable(&self) -> Result<bool, LieError> {
        let (cartan, derived) = self.solvability_witnesses();
        if cartan != derived {
            return Err(LieError::InternalInconsistency);
        }
        Ok(cartan)
    }

    /// `(K(g, [g,g]) = 0, derived series reaches 0)`.
    pub fn solvability_witnesses(&self) -> (bool, bool) {
        let dg = self.derived_algebra();
        let cartan = self
            .full_basis()
            .iter()
            .all(|x| dg.iter().all(|y| self.killing(x, y).is_zero()));
        let derived = self.derived_series().last() == Some(&0);
        (cartan, derived)
    }

    pub fn is_nilpotent(&self) -> bool {
        self.lower_central_series().last() == Some(&0)
    }

    /// Basis of the center.
    pub fn center(&self) -> Vec<Vec<Rational>> {
        let n = self.dim();
        let mut rows = Vec::new();
        for j in 0..n {
            for k in 0..n {
                rows.push((0..n).map(|i| self.c[i][j][k].clone()).collect());
            }
        }
        if n == 0 {
            return vec![];
        }
        QMatrix::from_rows(rows).nullspace()
    }

    /// True when `span(s)` is an ideal.
    pub fn is_ideal(&self, s: &[Vec<Rational>]) -> bool {
        let g = self.full_basis();
        let br = self.bracket_span(&g, s);
        br.iter().all(|v| in_span(s, v))
    }

    /// True when `span(s)`, as a subalgebra, is nilpotent.
    pub fn is_nilpotent_subalgebra(&self, s: &[Vec<Rational>]) -> bool {
        let mut cur = s.to_vec();
        for _ in 0..=self.dim() {
            if cur.is_empty() {
                return true;
            }
            cur = self.bracket_span(s, &cur);
        }
        cur.is_empty()
    }

    /// Maximal nilpotent ideal: the ad-nilpotent elements of the radical,
    /// found as the trace-orthogonal of the associative algebra generated
    /// by `ad(radical)`.
    pub fn nilradical(&self) -> Result<Vec<Vec<Rational>>, LieError> {
        let n = self.dim();
        if n > 4 {
            return Err(LieError::DimensionTooLarge(n));
        }
        if n == 0 {
            return Ok(vec![]);
        }
        let radical = self.radical();
        let ads: Vec<QMatrix> = radical.iter().map(|r| self.ad_matrix(r)).collect();
        let mut words = vec![QMatrix::identity(n)];
        let mut layer = words.clone();
        for _ in 0..n {
            let mut next = Vec::new();
            for w in &layer {
                for a in &ads {
                    next.push(w.mul(a));
                }
            }
            words.extend(next.iter().cloned());
            layer = next;
        }
        // x = sum t_r r over the radical; tr(ad_x W) = sum t_r tr(ad_r W) = 0
        let rows: Vec<Vec<Rational>> = words
            .iter()
            .map(|w| ads.iter().map(|a| a.mul(w).trace()).collect())
            .collect();
        let coeffs = if radical.is_empty() {
            vec![]
        } else {
            QMatrix::from_rows(rows).nullspace()
        };
        let vectors: Vec<Vec<Rational>> = coeffs
            .iter()
            .map(|t| {
                let mut v = vec![Rational::zero(); n];
                for (tr, r) in t.iter().zip(&radical) {
                    for k in 0..n {
                        v[k] += tr * &r[k];
                    }
                }
                v
            })
            .collect();
        let nil = span_basis(&vectors, n);
        debug_assert!(self.is_ideal(&nil) && self.is_nilpotent_subalgebra(&nil));
        Ok(nil)
    }

    /// Radical as the Killing-orthogonal complement of `[g, g]`.
    pub fn radical(&self) -> Vec<Vec<Rational>> {
        let n = self.dim();
        let dg = self.derived_algebra();
        if dg.is_empty() {
            return self.full_basis();
        }
        let k = self.killing_form();
        let rows: Vec<Vec<Rational>> = dg.iter().map(|y| k.mul_vec(y)).collect();
        let ns = QMatrix::from_rows(rows).nullspace();
        span_basis(&ns, n)
    }

    /// JSON export `{"dim", "C", "labels"}` with rationals as strings.
    pub fn to_export(&self) -> AlgebraExport {
        AlgebraExport {
            dim: self.dim(),
            c: self
                .c
                .iter()
                .map(|r| r.iter().map(|v| v.iter().map(|x| x.to_string()).collect()).collect())
                .collect(),
            labels: self.labels.clone(),
        }
    }

    pub fn from_export(e: &AlgebraExport) -> Result<Self, LieError> {
        let parse_r = |s: &String| -> Result<Rational, LieError> {
            s.parse::<Rational>()
                .map_err(|_| LieError::Format(format!("bad rational {s}")))
        };
        let c = e
            .c
            .iter()
            .map(|r| {
                r.iter()
                    .map(|v| v.iter().map(parse_r).collect::<Result<Vec<_>, _>>())
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        if e.dim != e.labels.len() {
            return Err(LieError::Format("dim does not match labels".into()));
        }
        LieAlgebra::new(e.labels.clone(), c)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AlgebraExport {
    pub dim: usize,
    #[serde(rename = "C")]
    pub c: Vec<Vec<Vec<String>>>,
    pub labels: Vec<String>,
}

pub fn unit(n: usize, i: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); n];
    v[i] = Rational::from_integer(1.into());
    v
}

/// Echelon basis of the span, each vector primitive.
pub fn span_basis(vs: &[Vec<Rational>], n: usize) -> Vec<Vec<Rational>> {
    if vs.is_empty() {
        return vec![];
    }
    let (r, pivots) = QMatrix::from_rows(vs.to_vec()).rref();
    (0..pivots.len())
        .map(|i| primitive_vector(r.row(i)))
        .filter(|v| v.len() == n)
        .collect()
}

pub fn in_span(basis: &[Vec<Rational>], v: &[Rational]) -> bool {
    if v.iter().all(Zero::is_zero) {
        return true;
    }
    if basis.is_empty() {
        return false;
    }
    let a = QMatrix::from_rows(basis.to_vec());
    let mut b = basis.to_vec();
    b.push(v.to_vec());
    QMatrix::from_rows(b).rank() == a.rank()
}

/// `[g1, g2]` with `g_i` acting as `xi_i d/dx + eta_i d/dy`.
pub fn bracket_fields(g1: &VectorFieldGen, g2: &VectorFieldGen) -> VectorFieldGen {
    VectorFieldGen::new(
        (g1.apply(&g2.xi) - g2.apply(&g1.xi)).normalize(),
        (g1.apply(&g2.eta) - g2.apply(&g1.eta)).normalize(),
    )
}

/// Coordinates of `target` in `basis`, if it lies in the span.
pub fn field_coordinates(
    basis: &[VectorFieldGen],
    target: &VectorFieldGen,
) -> Result<Option<Vec<Rational>>, LieError> {
    let names: Vec<String> = (0..basis.len()).map(|k| format!("coord_{k}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let combo = |pick: fn(&VectorFieldGen) -> &Expr| -> Expr {
        let mut terms: Vec<Expr> = basis
            .iter()
            .zip(&names)
            .map(|(g, n)| Expr::var(n) * pick(g))
            .collect();
        terms.push(-pick(target).clone());
        Expr::add(terms)
    };
    let exprs = [combo(|g| &g.xi), combo(|g| &g.eta)];
    let (rows, rhs) = linear_equations(&exprs, &refs)?;
    if rows.is_empty() {
        return Ok(Some(vec![Rational::zero(); basis.len()]));
    }
    Ok(QMatrix::from_rows(rows).solve(&rhs))
}

/// True when both lists of fields span the same space.
pub fn same_span(a: &[VectorFieldGen], b: &[VectorFieldGen]) -> Result<bool, LieError> {
    for (u, v) in [(a, b), (b, a)] {
        for g in v {
            if field_coordinates(u, g)?.is_none() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Structure constants of the span of `basis`.
pub fn structure_constants(basis: &[VectorFieldGen], labels: &[&str]) -> Result<LieAlgebra, LieError> {
    let n = basis.len();
    let names: Vec<String> = (0..n).map(|k| format!("coord_{k}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let combo = |pick: fn(&VectorFieldGen) -> &Expr| -> Expr {
        Expr::add(
            basis
                .iter()
                .zip(&names)
                .map(|(g, nm)| Expr::var(nm) * pick(g))
                .collect(),
        )
    };
    let (rows, _) = linear_equations(&[combo(|g| &g.xi), combo(|g| &g.eta)], &refs)?;
    let rank = if rows.is_empty() {
        0
    } else {
        QMatrix::from_rows(rows).rank()
    };
    if rank < n {
        return Err(LieError::NotIndependent);
    }
    let mut c = vec![vec![vec![Rational::zero(); n]; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let b = bracket_fields(&basis[i], &basis[j]);
            let coords = field_coordinates(basis, &b)?.ok_or(LieError::NotClosed(i, j))?;
            for k in 0..n {
                c[i][j][k] = coords[k].clone();
                c[j][i][k] = -coords[k].clone();
            }
        }
    }
    let labels = if labels.len() == n {
        labels.iter().map(|s| s.to_string()).collect()
    } else {
        (1..=n).map(|k| format!("e{k}")).collect()
    };
    LieAlgebra::new(labels, c)
}

/// Vector field `sum v_k basis_k`.
pub fn combine(basis: &[VectorFieldGen], v: &[Rational]) -> VectorFieldGen {
    let mut xi = Vec::new();
    let mut eta = Vec::new();
    for (g, c) in basis.iter().zip(v) {
        xi.push(Expr::constant(c.clone()) * &g.xi);
        eta.push(Expr::constant(c.clone()) * &g.eta);
    }
    VectorFieldGen::new(Expr::add(xi), Expr::add(eta)).normalize()
}

/// The three paper generators `x Dx + y Dy`, `-x Dx + x Dy`, `x^2 Dx + x y Dy`.
pub fn paper_generators() -> Vec<VectorFieldGen> {
    let g = |a: &str, b: &str| VectorFieldGen::new(parse(a).unwrap(), parse(b).unwrap());
    vec![g("x", "y"), g("-x", "x"), g("x^2", "x*y")]
}


#[cfg(test)]
mod adjoint_tests {
    use super::*;
    use crate::exprcore::rat;

    #[test]
    fn adjoint_table_entries() {
        let l = structure_constants(&paper_generators(), &[]).unwrap();
        let lam = Expr::var("lambda");
        let a1 = adjoint_exp(&l, 0, &lam).unwrap();
        assert!(a1[2][2].equivalent(&parse("exp(-lambda)").unwrap()));
        assert!(a1[0][0].equivalent(&Expr::one()));
        let a3 = adjoint_exp(&l, 2, &lam).unwrap();
        let col0: Vec<Expr> = (0..3).map(|k| a3[k][0].clone()).collect();
        assert!(col0[0].equivalent(&Expr::one()));
        assert!(col0[1].is_zero());
        assert!(col0[2].equivalent(&lam));
        let at0 = adjoint_exp(&l, 2, &Expr::zero()).unwrap();
        for (i, row) in at0.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                let want = if i == j { rat(1) } else { rat(0) };
                assert!(e.equivalent(&Expr::constant(want)));
            }
        }
    }
}
