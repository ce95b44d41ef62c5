//! Dense matrices over exact rationals.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::exprcore::Rational;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "QMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|r| r.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    /// Build from rows; all rows must have the same length.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        QMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        QMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| Rational::from_integer(v.into())).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        let mut t = QMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = QMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn add(&self, other: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, s: &Rational) -> QMatrix {
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn trace(&self) -> Rational {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)].clone()).sum()
    }

    /// Rows scaled to integers, with the scale factors used.
    fn integer_rows(&self) -> (Vec<Vec<BigInt>>, Vec<BigInt>) {
        let mut rows = Vec::with_capacity(self.rows);
        let mut scales = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let l = self
                .row(i)
                .iter()
                .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
            rows.push(
                self.row(i)
                    .iter()
                    .map(|r| r.numer() * (&l / r.denom()))
                    .collect(),
            );
            scales.push(l);
        }
        (rows, scales)
    }

    /// Fraction-free Bareiss elimination. Returns the echelon form, pivot
    /// columns and the sign from row swaps.
    fn bareiss(&self) -> (Vec<Vec<BigInt>>, Vec<usize>, bool) {
        let (mut a, _) = self.integer_rows();
        let (m, n) = (self.rows, self.cols);
        let mut prev = BigInt::one();
        let mut pivots = Vec::new();
        let mut negate = false;
        let mut r = 0;
        for c in 0..n {
            if r == m {
                break;
            }
            let Some(p) = (r..m).find(|&i| !a[i][c].is_zero()) else {
                continue;
            };
            if p != r {
                a.swap(p, r);
                negate = !negate;
            }
            for i in (r + 1)..m {
                for j in (c + 1)..n {
                    let v = &a[r][c] * &a[i][j] - &a[i][c] * &a[r][j];
                    a[i][j] = v / &prev;
                }
                a[i][c] = BigInt::zero();
            }
            prev = a[r][c].clone();
            pivots.push(c);
            r += 1;
        }
        (a, pivots, negate)
    }

    pub fn rank(&self) -> usize {
        self.bareiss().1.len()
    }

    pub fn determinant(&self) -> Rational {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        if self.rows == 0 {
            return Rational::one();
        }
        let (_, scales) = self.integer_rows();
        let (a, pivots, negate) = self.bareiss();
        if pivots.len() < self.rows {
            return Rational::zero();
        }
        let n = self.rows;
        let mut det = Rational::from_integer(a[n - 1][n - 1].clone());
        if negate {
            det = -det;
        }
        let s: BigInt = scales.iter().product();
        det / Rational::from_integer(s)
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (QMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(p, r);
            let inv = m[(r, c)].recip();
            for j in c..self.cols {
                let v = &m[(r, j)] * &inv;
                m[(r, j)] = v;
            }
            for i in 0..self.rows {
                if i == r || m[(i, c)].is_zero() {
                    continue;
                }
                let f = m[(i, c)].clone();
                for j in c..self.cols {
                    let v = &m[(r, j)] * &f;
                    m[(i, j)] -= v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Basis of the right nullspace. Vectors come from the RREF free columns in
    /// increasing order, scaled to coprime integers with a positive leading entry.
    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        let (r, pivots) = self.rref();
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|c| !pivots.contains(c)) {
            let mut v = vec![Rational::zero(); self.cols];
            v[free] = Rational::one();
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = -r[(i, free)].clone();
            }
            basis.push(primitive_vector(&v));
        }
        basis
    }

    /// Some solution of `self * x = b`, or `None` when inconsistent.
    pub fn solve(&self, b: &[Rational]) -> Option<Vec<Rational>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = QMatrix::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, self.cols)] = b[i].clone();
        }
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![Rational::zero(); self.cols];
        for (i, &pc) in pivots.iter().enumerate() {
            x[pc] = r[(i, self.cols)].clone();
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<QMatrix> {
        let n = self.rows;
        assert_eq!(n, self.cols);
        let mut aug = QMatrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = Rational::one();
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] >= n {
            return None;
        }
        let mut inv = QMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = r[(i, n + j)].clone();
            }
        }
        Some(inv)
    }

    /// Characteristic polynomial coefficients `c_0..c_n` of `det(t I - A)`,
    /// lowest degree first, by Faddeev-LeVerrier.
    pub fn char_poly(&self) -> Vec<Rational> {
        let n = self.rows;
        assert_eq!(n, self.cols);
        let mut coeffs = vec![Rational::zero(); n + 1];
        coeffs[n] = Rational::one();
        let mut m = QMatrix::zeros(n, n);
        for k in 1..=n {
            let mut next = self.mul(&m);
            for i in 0..n {
                next[(i, i)] += &coeffs[n - k + 1];
            }
            m = next;
            let am = self.mul(&m);
            let c = -am.trace() / Rational::from_integer(BigInt::from(k));
            coeffs[n - k] = c;
        }
        coeffs
    }
}

/// Scale a vector to coprime integer entries with a positive first nonzero entry.
pub fn primitive_vector(v: &[Rational]) -> Vec<Rational> {
    let mut l = BigInt::one();
    for r in v {
        l = l.lcm(r.denom());
    }
    let ints: Vec<BigInt> = v.iter().map(|r| r.numer() * (&l / r.denom())).collect();
    let mut g = BigInt::zero();
    for i in &ints {
        g = g.gcd(i);
    }
    if g.is_zero() {
        return v.to_vec();
    }
    if ints.iter().find(|i| !i.is_zero()).is_some_and(|i| i.is_negative()) {
        g = -g;
    }
    ints.into_iter()
        .map(|i| Rational::from_integer(i / &g))
        .collect()
}

impl std::ops::Index<(usize, usize)> for QMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprcore::{rat, ratio};

    #[test]
    fn determinant_and_rank() {
        let m = QMatrix::from_i64(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        assert_eq!(m.determinant(), rat(18));
        assert_eq!(m.rank(), 3);
        let s = QMatrix::from_i64(&[&[1, 2], &[2, 4]]);
        assert_eq!(s.determinant(), rat(0));
        assert_eq!(s.rank(), 1);
        let swap = QMatrix::from_i64(&[&[0, 1], &[1, 0]]);
        assert_eq!(swap.determinant(), rat(-1));
        let frac = QMatrix::from_rows(vec![
            vec![ratio(1, 2), ratio(1, 3)],
            vec![ratio(1, 4), ratio(1, 5)],
        ]);
        assert_eq!(frac.determinant(), ratio(1, 10) - ratio(1, 12));
    }

    #[test]
    fn nullspace_is_primitive() {
        let m = QMatrix::from_i64(&[&[1, 1, 0], &[0, 0, 0]]);
        let ns = m.nullspace();
        assert_eq!(
            ns,
            vec![
                vec![rat(1), rat(-1), rat(0)],
                vec![rat(0), rat(0), rat(1)]
            ]
        );
        assert_eq!(ns.len() + m.rank(), 3);
        for v in &ns {
            assert!(m.mul_vec(v).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn solve_and_inverse() {
        let m = QMatrix::from_i64(&[&[2, 1], &[1, 1]]);
        let x = m.solve(&[rat(3), rat(2)]).unwrap();
        assert_eq!(x, vec![rat(1), rat(1)]);
        assert!(QMatrix::from_i64(&[&[1, 1], &[1, 1]])
            .solve(&[rat(1), rat(2)])
            .is_none());
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), QMatrix::identity(2));
    }

    #[test]
    fn characteristic_polynomial() {
        // t^2 - 5t + 6
        let m = QMatrix::from_i64(&[&[2, 0], &[1, 3]]);
        assert_eq!(m.char_poly(), vec![rat(6), rat(-5), rat(1)]);
    }
}
