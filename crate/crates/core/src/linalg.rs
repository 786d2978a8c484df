//! Exact rational vectors and matrices, Gram–Schmidt, projections, volumes,
//! fraction-free determinants and LDLᵀ.

use std::fmt;
use std::ops::Index;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_rational, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct QVector(Vec<Rational>);

impl QVector {
    pub fn new(entries: Vec<Rational>) -> Self {
        QVector(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        QVector(vec![Rational::zero(); dim])
    }

    pub fn from_ints(entries: &[i64]) -> Self {
        QVector(entries.iter().map(|&v| crate::rational::int(v)).collect())
    }

    pub fn from_bigints(entries: &[BigInt]) -> Self {
        QVector(entries.iter().cloned().map(Rational::from_integer).collect())
    }

    /// Unit vector `e_i` in `dim` dimensions.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[i] = Rational::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<Rational> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rational> {
        self.0.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn dot(&self, other: &QVector) -> Rational {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn norm_sq(&self) -> Rational {
        self.dot(self)
    }

    pub fn add(&self, other: &QVector) -> QVector {
        QVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &QVector) -> QVector {
        QVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, k: &Rational) -> QVector {
        QVector(self.0.iter().map(|a| a * k).collect())
    }

    /// `self + k * other`
    pub fn add_scaled(&self, other: &QVector, k: &Rational) -> QVector {
        QVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b * k).collect())
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|x| x.denom().is_one())
    }

    /// Least common multiple of the entry denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        self.0
            .iter()
            .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
    }
}

impl Index<usize> for QVector {
    type Output = Rational;
    fn index(&self, i: usize) -> &Rational {
        &self.0[i]
    }
}

impl From<Vec<Rational>> for QVector {
    fn from(v: Vec<Rational>) -> Self {
        QVector(v)
    }
}

impl fmt::Display for QVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", format_rational(x))?;
        }
        write!(f, ")")
    }
}

/// Row-major rational matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
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
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Rational>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(QMatrix { rows, cols, data })
    }

    pub fn from_int_rows(rows: &[&[i64]]) -> Self {
        let vs: Vec<QVector> = rows.iter().map(|r| QVector::from_ints(r)).collect();
        Self::from_rows(&vs).expect("rectangular literal")
    }

    pub fn from_rows(rows: &[QVector]) -> Result<Self> {
        let cols = rows.first().map_or(0, QVector::dim);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.dim() != cols {
                return Err(Error::LengthMismatch {
                    expected: cols,
                    found: r.dim(),
                });
            }
            data.extend(r.iter().cloned());
        }
        Ok(QMatrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[QVector]) -> Result<Self> {
        Ok(Self::from_rows(columns)?.transpose())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> QVector {
        QVector(self.data[r * self.cols..(r + 1) * self.cols].to_vec())
    }

    pub fn column(&self, c: usize) -> QVector {
        QVector((0..self.rows).map(|r| self.get(r, c).clone()).collect())
    }

    pub fn row_vectors(&self) -> Vec<QVector> {
        (0..self.rows).map(|r| self.row(r)).collect()
    }

    pub fn column_vectors(&self) -> Vec<QVector> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    pub fn transpose(&self) -> QMatrix {
        let mut t = QMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &QMatrix) -> Result<QMatrix> {
        if self.cols != other.rows {
            return Err(Error::LengthMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = QMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Rational::zero();
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    if !a.is_zero() {
                        acc += a * other.get(k, j);
                    }
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &QVector) -> Result<QVector> {
        if self.cols != v.dim() {
            return Err(Error::LengthMismatch {
                expected: self.cols,
                found: v.dim(),
            });
        }
        Ok(QVector(
            (0..self.rows)
                .map(|r| {
                    (0..self.cols).fold(Rational::zero(), |acc, c| acc + self.get(r, c) * &v[c])
                })
                .collect(),
        ))
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|x| x.denom().is_one())
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NonSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    /// Exact determinant. Each row is first cleared of denominators, then
    /// the integer matrix goes through Bareiss fraction-free elimination.
    pub fn determinant(&self) -> Result<Rational> {
        let n = self.require_square()?;
        if n == 0 {
            return Ok(Rational::one());
        }
        let mut scale = BigInt::one();
        let mut a: Vec<Vec<BigInt>> = Vec::with_capacity(n);
        for r in 0..n {
            let row = self.row(r);
            let l = row.denominator_lcm();
            a.push(
                row.iter()
                    .map(|x| x.numer() * (&l / x.denom()))
                    .collect(),
            );
            scale *= l;
        }
        let det = bareiss_determinant(a);
        Ok(Rational::new(det, scale))
    }

    /// Exact inverse by Gauss–Jordan elimination.
    pub fn inverse(&self) -> Result<QMatrix> {
        let n = self.require_square()?;
        let mut a: Vec<Vec<Rational>> = (0..n).map(|r| self.row(r).into_entries()).collect();
        let mut inv: Vec<Vec<Rational>> = (0..n).map(|r| QVector::unit(n, r).into_entries()).collect();
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !a[r][col].is_zero())
                .ok_or(Error::SingularMatrix)?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            let p = a[col][col].clone();
            for x in a[col].iter_mut() {
                *x /= &p;
            }
            for x in inv[col].iter_mut() {
                *x /= &p;
            }
            for r in 0..n {
                if r == col || a[r][col].is_zero() {
                    continue;
                }
                let f = a[r][col].clone();
                for c in 0..n {
                    let t = &f * &a[col][c];
                    a[r][c] -= t;
                    let t = &f * &inv[col][c];
                    inv[r][c] -= t;
                }
            }
        }
        Ok(QMatrix {
            rows: n,
            cols: n,
            data: inv.into_iter().flatten().collect(),
        })
    }

    /// Integral entries and determinant ±1.
    pub fn is_unimodular(&self) -> bool {
        if !self.is_square() || !self.is_integral() {
            return false;
        }
        match self.determinant() {
            Ok(d) => d.abs().is_one(),
            Err(_) => false,
        }
    }
}

impl fmt::Display for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| format_rational(self.get(r, c))).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Bareiss elimination with row pivoting; consumes the matrix.
fn bareiss_determinant(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n.saturating_sub(1) {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// Rank of a vector family, by fraction-free elimination on the
/// denominator-cleared rows.
pub fn rank(vectors: &[QVector]) -> Result<usize> {
    check_same_dim(vectors)?;
    let mut a: Vec<Vec<BigInt>> = vectors
        .iter()
        .map(|v| {
            let l = v.denominator_lcm();
            v.iter().map(|x| x.numer() * (&l / x.denom())).collect()
        })
        .collect();
    let cols = vectors.first().map_or(0, |v| v.dim());
    let mut r = 0;
    let mut prev = BigInt::one();
    for c in 0..cols {
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in r + 1..a.len() {
            for j in c + 1..cols {
                let v = &a[i][j] * &a[r][c] - &a[i][c] * &a[r][j];
                a[i][j] = v / &prev;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        r += 1;
        if r == a.len() {
            break;
        }
    }
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GramSchmidtResult {
    /// Orthogonalized vectors `b_i*`.
    pub bstar: Vec<QVector>,
    /// Lower-triangular coefficients `μ_ij` (unit diagonal).
    pub mu: QMatrix,
    /// `‖b_i*‖²`
    pub bstar_sq: Vec<Rational>,
    /// Squared relative volumes `d_k = Π_{i≤k} ‖b_i*‖²`.
    pub dk: Vec<Rational>,
}

fn check_same_dim(vectors: &[QVector]) -> Result<()> {
    if let Some(first) = vectors.first() {
        for v in vectors {
            if v.dim() != first.dim() {
                return Err(Error::LengthMismatch {
                    expected: first.dim(),
                    found: v.dim(),
                });
            }
        }
    }
    Ok(())
}

pub fn gram_schmidt(basis: &[QVector]) -> Result<GramSchmidtResult> {
    check_same_dim(basis)?;
    let n = basis.len();
    let mut bstar: Vec<QVector> = Vec::with_capacity(n);
    let mut bstar_sq: Vec<Rational> = Vec::with_capacity(n);
    let mut dk = Vec::with_capacity(n);
    let mut mu = QMatrix::identity(n);
    let mut vol = Rational::one();
    for (i, b) in basis.iter().enumerate() {
        let mut w = b.clone();
        for j in 0..i {
            let m = b.dot(&bstar[j]) / &bstar_sq[j];
            if !m.is_zero() {
                w = w.add_scaled(&bstar[j], &-&m);
            }
            mu.set(i, j, m);
        }
        let sq = w.norm_sq();
        if sq.is_zero() {
            return Err(Error::DependentInput);
        }
        vol *= &sq;
        dk.push(vol.clone());
        bstar_sq.push(sq);
        bstar.push(w);
    }
    Ok(GramSchmidtResult {
        bstar,
        mu,
        bstar_sq,
        dk,
    })
}

/// Orthogonal projection of `v` onto the span of `basis` (zero for an empty basis).
pub fn project_onto_span(v: &QVector, basis: &[QVector]) -> Result<QVector> {
    let gs = gram_schmidt(basis)?;
    let mut p = QVector::zeros(v.dim());
    for (b, sq) in gs.bstar.iter().zip(&gs.bstar_sq) {
        if b.dim() != v.dim() {
            return Err(Error::LengthMismatch {
                expected: b.dim(),
                found: v.dim(),
            });
        }
        p = p.add_scaled(b, &(v.dot(b) / sq));
    }
    Ok(p)
}

/// Squared distance from `v` to the span of `basis`.
pub fn dist_sq_to_span(v: &QVector, basis: &[QVector]) -> Result<Rational> {
    let gs = gram_schmidt(basis)?;
    let mut d = v.norm_sq();
    for (b, sq) in gs.bstar.iter().zip(&gs.bstar_sq) {
        if b.dim() != v.dim() {
            return Err(Error::LengthMismatch {
                expected: b.dim(),
                found: v.dim(),
            });
        }
        let c = v.dot(b);
        d -= &c * &c / sq;
    }
    Ok(d)
}

/// `det(BᵀB)`, the squared relative volume of the parallelepiped.
pub fn rel_volume_sq(basis: &[QVector]) -> Result<Rational> {
    check_same_dim(basis)?;
    let d = gram_matrix(basis).determinant()?;
    if d.is_zero() {
        return Err(Error::DependentInput);
    }
    Ok(d)
}

/// Gram matrix `[b_i · b_j]`.
pub fn gram_matrix(vectors: &[QVector]) -> QMatrix {
    let n = vectors.len();
    let mut g = QMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let d = vectors[i].dot(&vectors[j]);
            g.set(j, i, d.clone());
            g.set(i, j, d);
        }
    }
    g
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LdlDecomposition {
    /// Unit lower-triangular factor.
    pub lower: QMatrix,
    pub diag: Vec<Rational>,
}

impl LdlDecomposition {
    pub fn reconstruct(&self) -> QMatrix {
        let n = self.diag.len();
        let mut out = QMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Rational::zero();
                for k in 0..=i.min(j) {
                    acc += self.lower.get(i, k) * &self.diag[k] * self.lower.get(j, k);
                }
                out.set(i, j, acc);
            }
        }
        out
    }
}

pub fn ldl_decompose(g: &QMatrix) -> Result<LdlDecomposition> {
    if !g.is_square() {
        return Err(Error::NonSquare {
            rows: g.rows(),
            cols: g.cols(),
        });
    }
    if !g.is_symmetric() {
        return Err(Error::NotSpd);
    }
    let n = g.rows();
    let mut lower = QMatrix::identity(n);
    let mut diag: Vec<Rational> = Vec::with_capacity(n);
    for j in 0..n {
        let mut d = g.get(j, j).clone();
        for k in 0..j {
            let l = lower.get(j, k);
            d -= l * l * &diag[k];
        }
        if !d.is_positive() {
            return Err(Error::NotSpd);
        }
        for i in j + 1..n {
            let mut s = g.get(i, j).clone();
            for k in 0..j {
                s -= lower.get(i, k) * lower.get(j, k) * &diag[k];
            }
            lower.set(i, j, s / &d);
        }
        diag.push(d);
    }
    Ok(LdlDecomposition { lower, diag })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn v(xs: &[i64]) -> QVector {
        QVector::from_ints(xs)
    }

    #[test]
    fn gram_schmidt_examples() {
        let gs = gram_schmidt(&[v(&[1, 0]), v(&[0, 1])]).unwrap();
        assert_eq!(gs.bstar, vec![v(&[1, 0]), v(&[0, 1])]);
        assert_eq!(gs.mu.get(1, 0), &int(0));

        let gs = gram_schmidt(&[v(&[1, 1]), v(&[0, 1])]).unwrap();
        assert_eq!(gs.bstar[1], QVector::new(vec![ratio(-1, 2), ratio(1, 2)]));
        assert_eq!(gs.mu.get(1, 0), &ratio(1, 2));
        assert_eq!(gs.dk, vec![int(2), int(1)]);

        assert_eq!(
            gram_schmidt(&[v(&[1, 1]), v(&[2, 2])]),
            Err(Error::DependentInput)
        );
    }

    #[test]
    fn projection_examples() {
        assert_eq!(project_onto_span(&v(&[0, 2]), &[v(&[1, 1])]).unwrap(), v(&[1, 1]));
        assert_eq!(
            project_onto_span(&v(&[3, 4]), &[v(&[1, 0]), v(&[0, 1])]).unwrap(),
            v(&[3, 4])
        );
        assert_eq!(project_onto_span(&v(&[5, 7]), &[]).unwrap(), v(&[0, 0]));
    }

    #[test]
    fn distance_examples() {
        assert_eq!(dist_sq_to_span(&v(&[0, 2]), &[v(&[1, 1])]).unwrap(), int(2));
        assert_eq!(dist_sq_to_span(&v(&[1, 0]), &[v(&[1, 0])]).unwrap(), int(0));
        assert_eq!(dist_sq_to_span(&v(&[0, 2]), &[]).unwrap(), int(4));
    }

    #[test]
    fn volume_examples() {
        assert_eq!(rel_volume_sq(&[v(&[1, 0]), v(&[0, 1])]).unwrap(), int(1));
        assert_eq!(rel_volume_sq(&[v(&[1, 1])]).unwrap(), int(2));
        assert_eq!(rel_volume_sq(&[v(&[1, 1]), v(&[0, 1])]).unwrap(), int(1));
        assert_eq!(
            rel_volume_sq(&[v(&[1, 2, 3]), v(&[2, 4, 6])]),
            Err(Error::DependentInput)
        );
    }

    #[test]
    fn determinant_inverse_unimodular() {
        for n in 1..5 {
            let id = QMatrix::identity(n);
            assert_eq!(id.determinant().unwrap(), int(1));
            assert!(id.is_unimodular());
        }
        let m = QMatrix::from_int_rows(&[&[2, 0], &[0, 1]]);
        assert_eq!(m.determinant().unwrap(), int(2));
        assert!(!m.is_unimodular());

        let m = QMatrix::from_int_rows(&[&[1, 1], &[0, 1]]);
        assert_eq!(m.determinant().unwrap(), int(1));
        assert!(m.is_unimodular());
        assert_eq!(m.inverse().unwrap(), QMatrix::from_int_rows(&[&[1, -1], &[0, 1]]));

        let sing = QMatrix::from_int_rows(&[&[1, 2], &[2, 4]]);
        assert_eq!(sing.inverse(), Err(Error::SingularMatrix));
        assert_eq!(sing.determinant().unwrap(), int(0));

        let rect = QMatrix::zeros(2, 3);
        assert!(matches!(rect.determinant(), Err(Error::NonSquare { .. })));
        assert!(matches!(rect.inverse(), Err(Error::NonSquare { .. })));
    }

    #[test]
    fn determinant_needs_pivoting_and_rationals() {
        let m = QMatrix::from_int_rows(&[&[0, 1, 2], &[1, 0, 3], &[4, -3, 8]]);
        // cofactor expansion by hand: 0*(0+9) - 1*(8-12) + 2*(-3-0) = -2
        assert_eq!(m.determinant().unwrap(), int(-2));
        let mut q = QMatrix::from_int_rows(&[&[1, 2], &[3, 4]]);
        q.set(0, 0, ratio(1, 2));
        // 1/2*4 - 2*3 = -4
        assert_eq!(q.determinant().unwrap(), int(-4));
    }

    #[test]
    fn ldl_examples() {
        let id = ldl_decompose(&QMatrix::identity(3)).unwrap();
        assert_eq!(id.lower, QMatrix::identity(3));
        assert_eq!(id.diag, vec![int(1); 3]);

        let g = QMatrix::from_int_rows(&[&[2, 1], &[1, 1]]);
        let ldl = ldl_decompose(&g).unwrap();
        assert_eq!(ldl.lower.get(1, 0), &ratio(1, 2));
        assert_eq!(ldl.diag, vec![int(2), ratio(1, 2)]);
        assert_eq!(ldl.reconstruct(), g);

        let bad = QMatrix::from_int_rows(&[&[1, 2], &[2, 1]]);
        assert_eq!(ldl_decompose(&bad), Err(Error::NotSpd));
        let asym = QMatrix::from_int_rows(&[&[2, 1], &[0, 1]]);
        assert_eq!(ldl_decompose(&asym), Err(Error::NotSpd));
    }
}
