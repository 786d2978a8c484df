//! Translation between MDSP and CVP.
//!
//! With `γ_i = b_iᵀv / ‖v‖²` and `b'_i = b_i − γ_i v ⟂ v`, any map `L` making
//! `B'·L` orthonormal gives `G⁻¹ = L·Lᵀ` for the Gram matrix `G` of the `b'_i`.
//! The subspace `⟨B(x)⟩` then has
//! `dist²(v, ⟨B(x)⟩) = ‖v‖² / (1 + ‖v‖² (x+γ)ᵀ G⁻¹ (x+γ))`, so the best shift
//! is the integer point nearest to `−γ` in the norm of `G⁻¹`: a CVP instance
//! in the lattice generated by the rows of `L` with target `−Lᵀγ`.
//! Everything here is kept in this Gram form, which stays rational.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lattice::MdspInstance;
use crate::linalg::{gram_matrix, ldl_decompose, LdlDecomposition, QMatrix, QVector};
use crate::rational::{ceil, floor, from_bigint, round_half_up, sqrt_upper, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CvpGramInstance {
    /// Symmetric positive definite form `G⁻¹ = L·Lᵀ`.
    pub gram: QMatrix,
    /// Coordinate offset `c = γ`; the objective is `(j+c)ᵀ gram (j+c)`.
    pub offset: QVector,
    /// `‖v‖²` of the originating MDSP instance (1 for instances built from a lattice).
    pub scale_sq: Rational,
}

impl CvpGramInstance {
    pub fn new(gram: QMatrix, offset: QVector, scale_sq: Rational) -> Result<Self> {
        if !gram.is_square() {
            return Err(Error::NonSquare {
                rows: gram.rows(),
                cols: gram.cols(),
            });
        }
        if offset.dim() != gram.rows() {
            return Err(Error::LengthMismatch {
                expected: gram.rows(),
                found: offset.dim(),
            });
        }
        ldl_decompose(&gram)?;
        if scale_sq <= Rational::zero() {
            return Err(Error::InvalidParameter("scale_sq must be positive".into()));
        }
        Ok(CvpGramInstance {
            gram,
            offset,
            scale_sq,
        })
    }

    /// Gram form of the CVP instance with basis rows `l` and target `t`:
    /// `gram = L·Lᵀ`, `offset = −(Lᵀ)⁻¹ t`.
    pub fn from_lattice(l: &QMatrix, t: &QVector) -> Result<Self> {
        let gamma = cvp_gamma(l, t)?;
        let gram = l.mul(&l.transpose())?;
        Self::new(gram, gamma, Rational::one())
    }

    pub fn dim(&self) -> usize {
        self.gram.rows()
    }

    /// `(j+c)ᵀ gram (j+c)`
    pub fn objective(&self, j: &[BigInt]) -> Rational {
        let z: Vec<Rational> = j
            .iter()
            .zip(self.offset.iter())
            .map(|(ji, c)| from_bigint(ji.clone()) + c)
            .collect();
        let mut acc = Rational::zero();
        for (a, za) in z.iter().enumerate() {
            for (b, zb) in z.iter().enumerate() {
                acc += za * self.gram.get(a, b) * zb;
            }
        }
        acc
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CvpSolution {
    pub j: Vec<BigInt>,
    pub objective: Rational,
}

/// Floating-point CVP instance for handing to external tools.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddedCvpInstance {
    pub basis_rows: Vec<Vec<f64>>,
    pub target: Vec<f64>,
}

impl EmbeddedCvpInstance {
    /// Largest `|r_a·r_b − g_ab| / sqrt(g_aa g_bb)` over all entries.
    pub fn max_gram_error(&self, gram: &QMatrix) -> f64 {
        let n = self.basis_rows.len();
        let g = |a: usize, b: usize| gram.get(a, b).to_f64().unwrap_or(f64::NAN);
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                let dot: f64 = self.basis_rows[a]
                    .iter()
                    .zip(&self.basis_rows[b])
                    .map(|(x, y)| x * y)
                    .sum();
                let err = (dot - g(a, b)).abs() / (g(a, a) * g(b, b)).sqrt();
                worst = worst.max(err);
            }
        }
        worst
    }
}

pub fn mdsp_to_cvp(inst: &MdspInstance) -> Result<CvpGramInstance> {
    let v = inst.fixed();
    let vv = v.norm_sq();
    let gamma: Vec<Rational> = inst.rest().iter().map(|b| b.dot(v) / &vv).collect();
    let perp: Vec<QVector> = inst
        .rest()
        .iter()
        .zip(&gamma)
        .map(|(b, g)| b.add_scaled(v, &-g))
        .collect();
    let gram = gram_matrix(&perp)
        .inverse()
        .map_err(|_| Error::DependentInput)?;
    Ok(CvpGramInstance {
        gram,
        offset: QVector::new(gamma),
        scale_sq: vv,
    })
}

fn cvp_gamma(l: &QMatrix, t: &QVector) -> Result<QVector> {
    if !l.is_square() {
        return Err(Error::NonSquare {
            rows: l.rows(),
            cols: l.cols(),
        });
    }
    let lt_inv = l.transpose().inverse()?;
    let g = lt_inv.mul_vec(t)?;
    Ok(QVector::new(g.iter().map(|x| -x).collect()))
}

/// MDSP instance whose optimal shifts are the CVP solutions for basis rows
/// `l` and target `t`. Uses the standard basis `e_0, …, e_n` of `Q^{n+1}`:
/// `v = e_0` and `b_i = (γ_i, column i of L⁻¹)`.
pub fn cvp_to_mdsp(l: &QMatrix, t: &QVector) -> Result<MdspInstance> {
    let gamma = cvp_gamma(l, t)?;
    let linv = l.inverse()?;
    let n = l.rows();
    let fixed = QVector::unit(n + 1, 0);
    let rest = (0..n)
        .map(|i| {
            let mut e = Vec::with_capacity(n + 1);
            e.push(gamma[i].clone());
            e.extend(linv.column(i).into_entries());
            QVector::new(e)
        })
        .collect();
    MdspInstance::new(fixed, rest)
}

/// `‖Σ j_i s_i − t‖²` computed directly from the basis rows.
pub fn cvp_objective_direct(l: &QMatrix, t: &QVector, j: &[BigInt]) -> Result<Rational> {
    let jv = QVector::from_bigints(j);
    let point = l.transpose().mul_vec(&jv)?;
    Ok(point.sub(t).norm_sq())
}

#[derive(Clone, Copy, Debug)]
pub struct CvpOptions {
    pub dim_cap: usize,
}

impl Default for CvpOptions {
    fn default() -> Self {
        CvpOptions { dim_cap: 6 }
    }
}

pub fn solve_cvp_bruteforce(c: &CvpGramInstance) -> Result<CvpSolution> {
    solve_cvp_bruteforce_with(c, &CvpOptions::default())
}

struct Enumerator<'a> {
    ldl: &'a LdlDecomposition,
    offset: &'a QVector,
    j: Vec<BigInt>,
    z: Vec<Rational>,
    radius: Rational,
    best: Vec<BigInt>,
}

impl Enumerator<'_> {
    fn visit(&mut self, level: usize, partial: Rational) {
        let n = self.j.len();
        // center of z_level given the already fixed coordinates above it
        let mut shift = Rational::zero();
        for i in level + 1..n {
            shift += self.ldl.lower.get(i, level) * &self.z[i];
        }
        let center = -(&self.offset[level]) - &shift;
        let d = &self.ldl.diag[level];
        let slack = &self.radius - &partial;
        if slack < Rational::zero() {
            return;
        }
        let r = sqrt_upper(&(slack / d));
        let mut jk = ceil(&(&center - &r));
        let hi = floor(&(&center + &r));
        while jk <= hi {
            let zk = from_bigint(jk.clone()) + &self.offset[level];
            let tk = &zk + &shift;
            let next = &partial + d * &tk * &tk;
            if next <= self.radius {
                self.j[level] = jk.clone();
                self.z[level] = zk;
                if level == 0 {
                    if next < self.radius || self.j < self.best {
                        self.radius = next;
                        self.best = self.j.clone();
                    }
                } else {
                    self.visit(level - 1, next);
                }
            }
            jk += 1;
        }
    }
}

/// Exact minimizer of `(j+c)ᵀ gram (j+c)` over integer `j` by depth-first
/// enumeration on the LDLᵀ factors, starting from the radius of the rounded
/// point `round(−c)`. Ties go to the lexicographically smallest `j`.
pub fn solve_cvp_bruteforce_with(c: &CvpGramInstance, opts: &CvpOptions) -> Result<CvpSolution> {
    let n = c.dim();
    if n > opts.dim_cap {
        return Err(Error::DimensionCapExceeded {
            dim: n,
            cap: opts.dim_cap,
        });
    }
    let ldl = ldl_decompose(&c.gram)?;
    let start: Vec<BigInt> = c.offset.iter().map(|x| round_half_up(&-x)).collect();
    let radius = c.objective(&start);
    if n == 0 {
        return Ok(CvpSolution {
            j: start,
            objective: radius,
        });
    }
    let mut e = Enumerator {
        ldl: &ldl,
        offset: &c.offset,
        j: vec![BigInt::zero(); n],
        z: vec![Rational::zero(); n],
        radius,
        best: start,
    };
    e.visit(n - 1, Rational::zero());
    let objective = c.objective(&e.best);
    debug_assert_eq!(objective, e.radius);
    Ok(CvpSolution {
        j: e.best,
        objective,
    })
}

/// `scale_sq / (1 + scale_sq·(j+c)ᵀ gram (j+c))`, the squared distance of
/// `v` from `⟨B(j)⟩` on the originating MDSP instance.
pub fn recover_mdsp_distance_sq(c: &CvpGramInstance, j: &[BigInt]) -> Rational {
    &c.scale_sq / (Rational::one() + &c.scale_sq * c.objective(j))
}

fn round_to_bits(x: f64, bits: u32) -> f64 {
    if x == 0.0 || bits >= 53 {
        return x;
    }
    let e = x.abs().log2().floor() as i32;
    let scale = 2f64.powi(bits as i32 - 1 - e);
    (x * scale).round() / scale
}

/// Real basis rows `r_i` with `r_a·r_b ≈ gram_ab`, from a triangular square
/// root of the form, each entry kept to `precision_bits` significant bits.
/// Supported precisions are 32 through 53 bits.
pub fn embed_cvp(c: &CvpGramInstance, precision_bits: u32) -> Result<EmbeddedCvpInstance> {
    if !(32..=53).contains(&precision_bits) {
        return Err(Error::InvalidParameter(format!(
            "precision_bits must lie in 32..=53, got {precision_bits}"
        )));
    }
    let ldl = ldl_decompose(&c.gram)?;
    let n = c.dim();
    let roots: Vec<f64> = ldl
        .diag
        .iter()
        .map(|d| d.to_f64().unwrap_or(f64::NAN).sqrt())
        .collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|k| {
                    let l = ldl.lower.get(i, k).to_f64().unwrap_or(f64::NAN);
                    round_to_bits(l * roots[k], precision_bits)
                })
                .collect()
        })
        .collect();
    let gamma: Vec<f64> = c
        .offset
        .iter()
        .map(|g| g.to_f64().unwrap_or(f64::NAN))
        .collect();
    let target = (0..n)
        .map(|k| {
            let s: f64 = (0..n).map(|i| gamma[i] * rows[i][k]).sum();
            round_to_bits(-s, precision_bits)
        })
        .collect();
    Ok(EmbeddedCvpInstance {
        basis_rows: rows,
        target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn v(xs: &[i64]) -> QVector {
        QVector::from_ints(xs)
    }

    fn big(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn e1_cvp() -> CvpGramInstance {
        CvpGramInstance::new(QMatrix::identity(1), QVector::new(vec![ratio(1, 2)]), int(4)).unwrap()
    }

    #[test]
    fn forward_examples() {
        let inst = MdspInstance::new(v(&[0, 2]), vec![v(&[1, 1])]).unwrap();
        assert_eq!(mdsp_to_cvp(&inst).unwrap(), e1_cvp());

        let orth = MdspInstance::new(v(&[0, 0, 1]), vec![v(&[1, 0, 0]), v(&[0, 2, 0])]).unwrap();
        assert_eq!(mdsp_to_cvp(&orth).unwrap().offset, QVector::zeros(2));
    }

    #[test]
    fn reverse_examples() {
        let l = QMatrix::identity(1);
        let inst = cvp_to_mdsp(&l, &QVector::new(vec![ratio(-1, 2)])).unwrap();
        assert_eq!(inst.fixed(), &v(&[1, 0]));
        assert_eq!(inst.rest(), &[QVector::new(vec![ratio(1, 2), int(1)])]);

        let inst = cvp_to_mdsp(&QMatrix::identity(2), &QVector::zeros(2)).unwrap();
        assert!(inst.rest().iter().all(|b| b.dot(inst.fixed()).is_zero()));

        let sing = QMatrix::from_int_rows(&[&[1, 2], &[2, 4]]);
        assert_eq!(cvp_to_mdsp(&sing, &QVector::zeros(2)), Err(Error::SingularMatrix));
    }

    #[test]
    fn brute_force_examples() {
        let sol = solve_cvp_bruteforce(&e1_cvp()).unwrap();
        assert_eq!(sol.j, big(&[-1]));
        assert_eq!(sol.objective, ratio(1, 4));

        let c = CvpGramInstance::new(QMatrix::identity(3), QVector::zeros(3), int(1)).unwrap();
        let sol = solve_cvp_bruteforce(&c).unwrap();
        assert_eq!(sol.j, big(&[0, 0, 0]));
        assert_eq!(sol.objective, int(0));

        let c = CvpGramInstance::new(QMatrix::identity(7), QVector::zeros(7), int(1)).unwrap();
        assert!(matches!(
            solve_cvp_bruteforce(&c),
            Err(Error::DimensionCapExceeded { dim: 7, cap: 6 })
        ));
    }

    #[test]
    fn recovery_examples() {
        let c = e1_cvp();
        assert_eq!(recover_mdsp_distance_sq(&c, &big(&[0])), int(2));
        assert_eq!(recover_mdsp_distance_sq(&c, &big(&[1])), ratio(2, 5));
        let orth = CvpGramInstance::new(QMatrix::identity(2), QVector::zeros(2), int(9)).unwrap();
        assert_eq!(recover_mdsp_distance_sq(&orth, &big(&[0, 0])), int(9));
    }

    #[test]
    fn embedding_examples() {
        let id = CvpGramInstance::new(QMatrix::identity(2), QVector::zeros(2), int(1)).unwrap();
        let e = embed_cvp(&id, 53).unwrap();
        assert_eq!(e.basis_rows, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);

        let four = CvpGramInstance::new(QMatrix::from_int_rows(&[&[4]]), QVector::zeros(1), int(1)).unwrap();
        assert_eq!(embed_cvp(&four, 40).unwrap().basis_rows, vec![vec![2.0]]);

        let two = CvpGramInstance::new(QMatrix::from_int_rows(&[&[2]]), QVector::zeros(1), int(1)).unwrap();
        for bits in [32, 40, 53] {
            let e = embed_cvp(&two, bits).unwrap();
            assert!((e.basis_rows[0][0] - std::f64::consts::SQRT_2).abs() < 1e-9);
            assert!(e.max_gram_error(&two.gram) <= 2f64.powi(8 - bits as i32));
        }
        assert!(embed_cvp(&two, 16).is_err());
    }
}
