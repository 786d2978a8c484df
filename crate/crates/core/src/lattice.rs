//! Lattice bases, MDSP instances and shift certificates.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{dist_sq_to_span, gram_schmidt, rank, QMatrix, QVector};
use crate::rational::{ceil_root, from_bigint, le_pow2, rational_bits, Rational};

/// A linearly independent family of vectors in a common ambient space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeBasis {
    vectors: Vec<QVector>,
}

impl LatticeBasis {
    pub fn new(vectors: Vec<QVector>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::InvalidParameter("empty basis".into()));
        }
        if rank(&vectors)? < vectors.len() {
            return Err(Error::DependentInput);
        }
        Ok(LatticeBasis { vectors })
    }

    /// Basis from the rows of `m`, which must have full row rank.
    pub fn from_rows(m: &QMatrix) -> Result<Self> {
        Self::new(m.row_vectors())
    }

    pub(crate) fn new_unchecked(vectors: Vec<QVector>) -> Self {
        LatticeBasis { vectors }
    }

    pub fn vectors(&self) -> &[QVector] {
        &self.vectors
    }

    pub fn into_vectors(self) -> Vec<QVector> {
        self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn ambient_dim(&self) -> usize {
        self.vectors[0].dim()
    }

    pub fn is_full_rank(&self) -> bool {
        self.len() == self.ambient_dim()
    }

    /// Matrix with the basis vectors as columns.
    pub fn column_matrix(&self) -> QMatrix {
        QMatrix::from_columns(&self.vectors).expect("vectors share a dimension")
    }

    /// Matrix with the basis vectors as rows.
    pub fn row_matrix(&self) -> QMatrix {
        QMatrix::from_rows(&self.vectors).expect("vectors share a dimension")
    }
}

/// A fixed vector `v` together with the remaining basis vectors `b_1..b_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MdspInstance {
    fixed: QVector,
    rest: Vec<QVector>,
}

impl MdspInstance {
    /// Requires `n >= 1` and `{v} ∪ rest` linearly independent. The ambient
    /// dimension may exceed `n + 1`, which is how sub-lattices of a larger
    /// basis are handled.
    pub fn new(fixed: QVector, rest: Vec<QVector>) -> Result<Self> {
        if rest.is_empty() {
            return Err(Error::InvalidParameter("MDSP instance needs at least one non-fixed vector".into()));
        }
        if fixed.is_zero() {
            return Err(Error::DegenerateFixedVector);
        }
        let mut all = Vec::with_capacity(rest.len() + 1);
        all.push(fixed.clone());
        all.extend(rest.iter().cloned());
        if rank(&all)? < all.len() {
            return Err(Error::DependentInput);
        }
        Ok(MdspInstance { fixed, rest })
    }

    pub(crate) fn new_unchecked(fixed: QVector, rest: Vec<QVector>) -> Self {
        MdspInstance { fixed, rest }
    }

    /// Splits the rows of `m`: row `fixed_index` becomes `v`, the others
    /// keep their order as `b_1..b_n`.
    pub fn from_rows(m: &QMatrix, fixed_index: usize) -> Result<Self> {
        if fixed_index >= m.rows() {
            return Err(Error::IndexOutOfRange {
                index: fixed_index,
                len: m.rows(),
            });
        }
        let mut rows = m.row_vectors();
        let fixed = rows.remove(fixed_index);
        Self::new(fixed, rows)
    }

    pub fn fixed(&self) -> &QVector {
        &self.fixed
    }

    pub fn rest(&self) -> &[QVector] {
        &self.rest
    }

    /// Number of non-fixed vectors.
    pub fn n(&self) -> usize {
        self.rest.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.fixed.dim()
    }

    /// `[v | b_1 .. b_n]` as a list.
    pub fn all_vectors(&self) -> Vec<QVector> {
        let mut all = Vec::with_capacity(self.rest.len() + 1);
        all.push(self.fixed.clone());
        all.extend(self.rest.iter().cloned());
        all
    }

    /// `[v | B]` with the vectors as columns.
    pub fn column_matrix(&self) -> QMatrix {
        QMatrix::from_columns(&self.all_vectors()).expect("vectors share a dimension")
    }

    /// Squared distance of `v` from `⟨B⟩`.
    pub fn dist_sq(&self) -> Rational {
        dist_sq_to_span(&self.fixed, &self.rest).expect("instance is independent")
    }

    pub fn with_rest(&self, rest: Vec<QVector>) -> Result<Self> {
        Self::new(self.fixed.clone(), rest)
    }
}

/// Integer shifts `x` defining `B(x) = {b_i + x_i v}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShiftVector(pub Vec<BigInt>);

impl ShiftVector {
    pub fn zeros(n: usize) -> Self {
        ShiftVector(vec![BigInt::zero(); n])
    }

    pub fn from_ints(xs: &[i64]) -> Self {
        ShiftVector(xs.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[BigInt] {
        &self.0
    }
}

/// `B(x) = {b_i + x_i v}`.
pub fn apply_shift(inst: &MdspInstance, x: &ShiftVector) -> Result<Vec<QVector>> {
    if x.len() != inst.n() {
        return Err(Error::LengthMismatch {
            expected: inst.n(),
            found: x.len(),
        });
    }
    Ok(inst
        .rest
        .iter()
        .zip(x.as_slice())
        .map(|(b, xi)| {
            if xi.is_zero() {
                b.clone()
            } else {
                b.add_scaled(&inst.fixed, &from_bigint(xi.clone()))
            }
        })
        .collect())
}

/// Shifted instance `[v | B(x)]`.
pub fn shifted_instance(inst: &MdspInstance, x: &ShiftVector) -> Result<MdspInstance> {
    Ok(MdspInstance::new_unchecked(inst.fixed.clone(), apply_shift(inst, x)?))
}

/// Integral matrix `U` with `det U = ±1` relating two bases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceWitness {
    pub u: QMatrix,
}

/// Decides whether the columns of `a` and of `b` generate the same lattice.
/// Returns the witness `U = a⁻¹·b` when they do.
pub fn same_lattice(a: &QMatrix, b: &QMatrix) -> Result<Option<EquivalenceWitness>> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::LengthMismatch {
            expected: a.rows() * a.cols(),
            found: b.rows() * b.cols(),
        });
    }
    let u = a.inverse()?.mul(b)?;
    if b.determinant()?.is_zero() {
        return Err(Error::SingularMatrix);
    }
    Ok(if u.is_unimodular() {
        Some(EquivalenceWitness { u })
    } else {
        None
    })
}

/// Lattice equivalence for two lists of basis vectors that need not be
/// square: compares them through `U = (AᵀA)⁻¹ Aᵀ B` and checks `A·U = B`.
pub fn same_lattice_vectors(a: &[QVector], b: &[QVector]) -> Result<Option<EquivalenceWitness>> {
    let am = QMatrix::from_columns(a)?;
    let bm = QMatrix::from_columns(b)?;
    if am.is_square() && bm.is_square() {
        return same_lattice(&am, &bm);
    }
    if am.rows() != bm.rows() || am.cols() != bm.cols() {
        return Err(Error::LengthMismatch {
            expected: am.cols(),
            found: bm.cols(),
        });
    }
    let at = am.transpose();
    let u = at.mul(&am)?.inverse()?.mul(&at)?.mul(&bm)?;
    if am.mul(&u)? != bm {
        return Ok(None);
    }
    Ok(if u.is_unimodular() {
        Some(EquivalenceWitness { u })
    } else {
        None
    })
}

/// Decision query: is there a sub-lattice with `dist(v, ⟨B'⟩) ≥ γ‖v‖`?
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DmdspQuery {
    pub instance: MdspInstance,
    gamma: Rational,
}

impl DmdspQuery {
    pub fn new(instance: MdspInstance, gamma: Rational) -> Result<Self> {
        if !gamma.is_positive() || gamma > Rational::one() {
            return Err(Error::InvalidParameter(format!("gamma must lie in (0, 1], got {gamma}")));
        }
        Ok(DmdspQuery { instance, gamma })
    }

    pub fn gamma(&self) -> &Rational {
        &self.gamma
    }
}

/// Checks a shift-vector certificate: `[v|B(x)]` must generate the same
/// lattice as `[v|B]`, and `dist²(v, ⟨B(x)⟩) ≥ γ²‖v‖²`.
pub fn verify_dmdsp_certificate(q: &DmdspQuery, x: &ShiftVector) -> Result<bool> {
    let inst = &q.instance;
    let shifted = apply_shift(inst, x)?;
    let mut cand = vec![inst.fixed().clone()];
    cand.extend(shifted.iter().cloned());
    if same_lattice_vectors(&inst.all_vectors(), &cand)?.is_none() {
        return Ok(false);
    }
    let d = dist_sq_to_span(inst.fixed(), &shifted)?;
    Ok(d >= &q.gamma * &q.gamma * inst.fixed().norm_sq())
}

/// Size quantities bounding a certificate's bit length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificateBounds {
    /// Product of the denominators of the components of `v`.
    pub k0: BigInt,
    /// `d_k = vol²(b_1..b_k)`.
    pub dk: Vec<Rational>,
    /// `D = Π d_k`.
    pub big_d: Rational,
    /// `E = D² · Π ‖b_i*‖²`.
    pub big_e: Rational,
    /// `E² K₀⁸ ‖v‖² ‖b_i‖²`, the square of the per-coordinate shift bound.
    pub per_coordinate_bound_sq: Vec<Rational>,
    /// Total numerator + denominator bits over all entries of `[v|B]`.
    pub input_bit_size: u64,
}

impl CertificateBounds {
    /// `log₂ D ≤ 2nl`
    pub fn d_within_bound(&self) -> bool {
        let n = self.dk.len() as u64;
        le_pow2(&self.big_d, 2 * n * self.input_bit_size)
    }

    /// `log₂ E ≤ 2(2n+1)l`
    pub fn e_within_bound(&self) -> bool {
        let n = self.dk.len() as u64;
        le_pow2(&self.big_e, 2 * (2 * n + 1) * self.input_bit_size)
    }
}

pub fn certificate_bounds(inst: &MdspInstance) -> CertificateBounds {
    let k0 = inst
        .fixed()
        .iter()
        .fold(BigInt::one(), |acc, c| acc * c.denom());
    let gs = gram_schmidt(inst.rest()).expect("instance is independent");
    let big_d = gs.dk.iter().fold(Rational::one(), |acc, d| acc * d);
    let prod_bstar = gs.bstar_sq.iter().fold(Rational::one(), |acc, d| acc * d);
    let big_e = &big_d * &big_d * prod_bstar;
    let k0q = from_bigint(k0.clone());
    let k0_8 = num_traits::pow(k0q, 8);
    let vv = inst.fixed().norm_sq();
    let per_coordinate_bound_sq = inst
        .rest()
        .iter()
        .map(|b| &big_e * &big_e * &k0_8 * &vv * b.norm_sq())
        .collect();
    let input_bit_size = inst
        .all_vectors()
        .iter()
        .flat_map(|v| v.iter().map(rational_bits).collect::<Vec<_>>())
        .sum();
    CertificateBounds {
        k0,
        dk: gs.dk,
        big_d,
        big_e,
        per_coordinate_bound_sq,
        input_bit_size,
    }
}

/// Squared Minkowski bound `n·|det B|^{2/n}`, rounded upward to a rational
/// when the root is irrational.
pub fn minkowski_bound_sq(basis: &LatticeBasis) -> Result<Rational> {
    let m = basis.column_matrix();
    if !m.is_square() {
        return Err(Error::NonSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows() as u32;
    let det = m.determinant()?.abs();
    // |det|^{2/n} = (N·D^{n-1})^{1/n} / D with N/D = det²; the radicand is
    // scaled by 2^{64n} so the ceiling root is within 2^-64 relative error.
    let num = det.numer() * det.numer();
    let den = det.denom() * det.denom();
    let shift = 64usize;
    let radicand = (num * num_traits::pow(den.clone(), n as usize - 1)) << (shift * n as usize);
    let root = ceil_root(&radicand, n);
    let scaled_den = den << shift;
    Ok(Rational::from_integer(BigInt::from(n)) * Rational::new(root, scaled_den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn v(xs: &[i64]) -> QVector {
        QVector::from_ints(xs)
    }

    fn e1() -> MdspInstance {
        MdspInstance::new(v(&[0, 2]), vec![v(&[1, 1])]).unwrap()
    }

    #[test]
    fn shift_examples() {
        let inst = e1();
        assert_eq!(apply_shift(&inst, &ShiftVector::from_ints(&[0])).unwrap(), vec![v(&[1, 1])]);
        assert_eq!(apply_shift(&inst, &ShiftVector::from_ints(&[-1])).unwrap(), vec![v(&[1, -1])]);
        assert_eq!(apply_shift(&inst, &ShiftVector::from_ints(&[3])).unwrap(), vec![v(&[1, 7])]);
        assert!(matches!(
            apply_shift(&inst, &ShiftVector::from_ints(&[1, 2])),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn instance_validation() {
        assert_eq!(
            MdspInstance::new(v(&[1, 1]), vec![v(&[2, 2])]),
            Err(Error::DependentInput)
        );
        assert_eq!(
            MdspInstance::new(v(&[0, 0]), vec![v(&[2, 2])]),
            Err(Error::DegenerateFixedVector)
        );
        let m = QMatrix::from_int_rows(&[&[1, 1], &[0, 2]]);
        let inst = MdspInstance::from_rows(&m, 1).unwrap();
        assert_eq!(inst, e1());
    }

    #[test]
    fn same_lattice_examples() {
        let id = QMatrix::identity(2);
        let w = same_lattice(&id, &id).unwrap().unwrap();
        assert_eq!(w.u, id);
        let shear = QMatrix::from_int_rows(&[&[1, 1], &[0, 1]]);
        assert!(same_lattice(&id, &shear).unwrap().is_some());
        let dbl = QMatrix::from_int_rows(&[&[2, 0], &[0, 1]]);
        assert!(same_lattice(&id, &dbl).unwrap().is_none());
        let sing = QMatrix::from_int_rows(&[&[1, 1], &[1, 1]]);
        assert_eq!(same_lattice(&sing, &id), Err(Error::SingularMatrix));
    }

    #[test]
    fn certificate_examples() {
        let q = DmdspQuery::new(e1(), ratio(1, 2)).unwrap();
        assert!(verify_dmdsp_certificate(&q, &ShiftVector::from_ints(&[0])).unwrap());
        let q = DmdspQuery::new(e1(), int(1)).unwrap();
        assert!(!verify_dmdsp_certificate(&q, &ShiftVector::from_ints(&[0])).unwrap());
        let orth = MdspInstance::new(v(&[0, 1]), vec![v(&[1, 0])]).unwrap();
        let q = DmdspQuery::new(orth, int(1)).unwrap();
        assert!(verify_dmdsp_certificate(&q, &ShiftVector::from_ints(&[0])).unwrap());
        assert!(DmdspQuery::new(e1(), int(0)).is_err());
        assert!(DmdspQuery::new(e1(), ratio(3, 2)).is_err());
    }

    #[test]
    fn bounds_examples() {
        let b = certificate_bounds(&e1());
        assert_eq!(b.k0, BigInt::from(1));
        assert_eq!(b.dk, vec![int(2)]);
        assert_eq!(b.big_d, int(2));
        assert_eq!(b.big_e, int(8));
        assert!(b.d_within_bound() && b.e_within_bound());

        let inst = MdspInstance::new(QVector::new(vec![int(0), ratio(2, 3)]), vec![v(&[1, 1])]).unwrap();
        assert_eq!(certificate_bounds(&inst).k0, BigInt::from(3));
    }

    #[test]
    fn minkowski_examples() {
        let id = LatticeBasis::new(vec![v(&[1, 0]), v(&[0, 1])]).unwrap();
        assert_eq!(minkowski_bound_sq(&id).unwrap(), int(2));
        let two = LatticeBasis::new(vec![v(&[2, 0]), v(&[0, 2])]).unwrap();
        assert_eq!(minkowski_bound_sq(&two).unwrap(), int(8));
        let shear = LatticeBasis::new(vec![v(&[1, 0]), v(&[1, 1])]).unwrap();
        assert_eq!(minkowski_bound_sq(&shear).unwrap(), int(2));
        // det 2 in dimension 3: 3 * 4^{1/3} = 4.7622..., enclosed from above
        let b = LatticeBasis::new(vec![v(&[2, 0, 0]), v(&[0, 1, 0]), v(&[0, 0, 1])]).unwrap();
        let m = minkowski_bound_sq(&b).unwrap();
        let cube = &m * &m * &m;
        assert!(cube >= int(27 * 4));
        assert!(m < ratio(47623, 10000));
        let half = LatticeBasis::new(vec![QVector::new(vec![ratio(1, 2), int(0)]), v(&[0, 2])]).unwrap();
        assert_eq!(minkowski_bound_sq(&half).unwrap(), int(2));
        let nonsq = LatticeBasis::new(vec![v(&[1, 0, 0])]).unwrap();
        assert!(matches!(minkowski_bound_sq(&nonsq), Err(Error::NonSquare { .. })));
    }
}
