//! Greedy sub-lattice improvement: shift one `b_i` at a time by the integer
//! multiple of `v` that minimizes the residual projection of `v`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::lattice::{MdspInstance, ShiftVector};
use crate::linalg::{dist_sq_to_span, gram_matrix, project_onto_span, QMatrix, QVector};
use crate::rational::{ceil, floor, from_bigint, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HeuristicConfig {
    pub max_passes: usize,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        HeuristicConfig { max_passes: 64 }
    }
}

impl HeuristicConfig {
    pub fn new(max_passes: usize) -> Result<Self> {
        if max_passes == 0 {
            return Err(Error::InvalidParameter("max_passes must be at least 1".into()));
        }
        Ok(HeuristicConfig { max_passes })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeuristicOutcome {
    /// Accumulated shifts: the final basis is `B(x_total)` of the input.
    pub x_total: ShiftVector,
    pub dist_sq: Rational,
    pub converged: bool,
    pub passes_used: usize,
    pub instance: MdspInstance,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoordinateStep {
    /// Multiple of `v` subtracted from `b_i` (zero means no update).
    pub alpha: BigInt,
    pub new_b: QVector,
}

/// Squared residual projection `(v''ᵀ(b'' − a v''))² / ‖b'' − a v''‖²`
/// written in terms of `c = v''ᵀb''`, `vv = ‖v''‖²`, `bb = ‖b''‖²`.
fn residual_sq(c: &Rational, vv: &Rational, bb: &Rational, a: &BigInt) -> Rational {
    let a = from_bigint(a.clone());
    let num = c - &a * vv;
    let den = bb - Rational::from_integer(2.into()) * &a * c + &a * &a * vv;
    &num * &num / den
}

/// Floor or ceiling of `c / vv`, whichever gives the smaller residual; ties
/// go to the floor.
fn choose_alpha(c: &Rational, vv: &Rational, bb: &Rational) -> BigInt {
    let real = c / vv;
    let lo = floor(&real);
    let hi = ceil(&real);
    if lo == hi {
        return lo;
    }
    if residual_sq(c, vv, bb, &lo) <= residual_sq(c, vv, bb, &hi) {
        lo
    } else {
        hi
    }
}

/// [`choose_alpha`] on integers; all three inputs may share any positive
/// scale factor.
pub(crate) fn choose_alpha_int(c: &BigInt, vv: &BigInt, bb: &BigInt) -> BigInt {
    let lo = c.div_floor(vv);
    if &(&lo * vv) == c {
        return lo;
    }
    let hi = &lo + 1;
    let parts = |a: &BigInt| {
        let num = c - a * vv;
        (&num * &num, bb - a * c * 2 + a * a * vv)
    };
    let (nl, dl) = parts(&lo);
    let (nh, dh) = parts(&hi);
    if nl * dh <= nh * dl {
        lo
    } else {
        hi
    }
}

/// One coordinate step computed directly from projections onto
/// `⟨B \ {b_i}⟩`. `i` is zero-based.
pub fn improve_coordinate(inst: &MdspInstance, i: usize) -> Result<CoordinateStep> {
    let n = inst.n();
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, len: n });
    }
    let others: Vec<QVector> = inst
        .rest()
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != i)
        .map(|(_, b)| b.clone())
        .collect();
    let v = inst.fixed();
    let b = &inst.rest()[i];
    let v2 = v.sub(&project_onto_span(v, &others)?);
    let b2 = b.sub(&project_onto_span(b, &others)?);
    let vv = v2.norm_sq();
    if vv.is_zero() {
        return Err(Error::DegenerateResidual);
    }
    let alpha = choose_alpha(&v2.dot(&b2), &vv, &b2.norm_sq());
    let new_b = if alpha.is_zero() {
        b.clone()
    } else {
        b.add_scaled(v, &-from_bigint(alpha.clone()))
    };
    Ok(CoordinateStep { alpha, new_b })
}

/// Incremental state for a pass: the inverse Gram matrix of
/// `(b_1, …, b_n, v)`. The 2×2 block of the inverse on `{i, v}` is the
/// inverse of the Gram matrix of the components of `b_i` and `v` orthogonal
/// to the other `b_k`, which is all a coordinate step needs. A shift
/// `b_i ← b_i − a v` is the basis change `T = I − a e_v e_iᵀ`, so the inverse
/// updates as `T⁻¹ K⁻¹ T⁻ᵀ` in O(n).
pub(crate) struct PassState {
    kinv: QMatrix,
}

impl PassState {
    /// `gram` is the Gram matrix of `(b_1, …, b_n, v)`, `v` last.
    pub(crate) fn from_gram(gram: &QMatrix) -> Result<Self> {
        let kinv = gram.inverse().map_err(|_| Error::DependentInput)?;
        Ok(PassState { kinv })
    }

    fn fixed_index(&self) -> usize {
        self.kinv.rows() - 1
    }

    /// Chooses the shift for coordinate `i` from the inverse-Gram block.
    pub(crate) fn choose(&self, i: usize) -> BigInt {
        let f = self.fixed_index();
        let a = self.kinv.get(i, i);
        let c = self.kinv.get(i, f);
        let e = self.kinv.get(f, f);
        // Schur block is (1/Δ)[[e, -c], [-c, a]]; Δ > 0 cancels in the
        // floor/ceil comparison.
        choose_alpha(&-c, a, e)
    }

    /// Records `b_i ← b_i − alpha·v`.
    pub(crate) fn apply(&mut self, i: usize, alpha: &BigInt) {
        let f = self.fixed_index();
        let a = from_bigint(alpha.clone());
        let m = self.kinv.rows();
        for c in 0..m {
            let t = self.kinv.get(f, c) + &a * self.kinv.get(i, c);
            self.kinv.set(f, c, t);
        }
        for r in 0..m {
            let t = self.kinv.get(r, f) + &a * self.kinv.get(r, i);
            self.kinv.set(r, f, t);
        }
    }
}

fn gram_with_fixed_last(inst: &MdspInstance) -> QMatrix {
    let mut vs = inst.rest().to_vec();
    vs.push(inst.fixed().clone());
    gram_matrix(&vs)
}

/// Runs one coordinate step for each `i` in order, committing each shift
/// before the next coordinate. Returns the new instance, whether anything
/// changed, and the shifts applied (as `x` in `b_i + x_i v`).
pub fn improve_pass_with_shifts(inst: &MdspInstance) -> Result<(MdspInstance, bool, ShiftVector)> {
    let n = inst.n();
    let mut state = PassState::from_gram(&gram_with_fixed_last(inst))?;
    let mut rest = inst.rest().to_vec();
    let mut shifts = ShiftVector::zeros(n);
    let mut any = false;
    for i in 0..n {
        let alpha = state.choose(i);
        if alpha.is_zero() {
            continue;
        }
        any = true;
        state.apply(i, &alpha);
        rest[i] = rest[i].add_scaled(inst.fixed(), &-from_bigint(alpha.clone()));
        shifts.0[i] -= alpha;
    }
    Ok((MdspInstance::new_unchecked(inst.fixed().clone(), rest), any, shifts))
}

pub fn improve_pass(inst: &MdspInstance) -> Result<(MdspInstance, bool)> {
    let (next, any, _) = improve_pass_with_shifts(inst)?;
    Ok((next, any))
}

pub fn run_heuristic(inst: &MdspInstance, cfg: &HeuristicConfig) -> Result<HeuristicOutcome> {
    let cfg = HeuristicConfig::new(cfg.max_passes)?;
    let mut cur = inst.clone();
    let mut x_total = ShiftVector::zeros(inst.n());
    let mut converged = false;
    let mut passes_used = 0;
    while passes_used < cfg.max_passes {
        passes_used += 1;
        let (next, any, shifts) = improve_pass_with_shifts(&cur)?;
        for (t, s) in x_total.0.iter_mut().zip(shifts.0) {
            *t += s;
        }
        cur = next;
        if !any {
            converged = true;
            break;
        }
    }
    let dist_sq = dist_sq_to_span(cur.fixed(), cur.rest())?;
    Ok(HeuristicOutcome {
        x_total,
        dist_sq,
        converged,
        passes_used,
        instance: cur,
    })
}

/// Squared residual for an arbitrary integer multiple `j` at coordinate `i`,
/// used to check the per-coordinate optimality of [`improve_coordinate`].
pub fn coordinate_residual_sq(inst: &MdspInstance, i: usize, j: &BigInt) -> Result<Rational> {
    let n = inst.n();
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, len: n });
    }
    let others: Vec<QVector> = inst
        .rest()
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != i)
        .map(|(_, b)| b.clone())
        .collect();
    let v = inst.fixed();
    let b = &inst.rest()[i];
    let v2 = v.sub(&project_onto_span(v, &others)?);
    let b2 = b.sub(&project_onto_span(b, &others)?);
    Ok(residual_sq(&v2.dot(&b2), &v2.norm_sq(), &b2.norm_sq(), j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn v(xs: &[i64]) -> QVector {
        QVector::from_ints(xs)
    }

    #[test]
    fn coordinate_examples() {
        let e1 = MdspInstance::new(v(&[0, 2]), vec![v(&[1, 1])]).unwrap();
        let step = improve_coordinate(&e1, 0).unwrap();
        assert_eq!(step.alpha, BigInt::from(0));
        assert_eq!(step.new_b, v(&[1, 1]));
        assert_eq!(coordinate_residual_sq(&e1, 0, &BigInt::from(0)).unwrap(), int(2));
        assert_eq!(coordinate_residual_sq(&e1, 0, &BigInt::from(1)).unwrap(), int(2));

        let orth = MdspInstance::new(v(&[0, 1]), vec![v(&[1, 0])]).unwrap();
        assert_eq!(improve_coordinate(&orth, 0).unwrap().alpha, BigInt::from(0));

        let e3 = MdspInstance::new(v(&[0, 2]), vec![v(&[1, 5])]).unwrap();
        let step = improve_coordinate(&e3, 0).unwrap();
        assert_eq!(step.alpha, BigInt::from(2));
        assert_eq!(step.new_b, v(&[1, 1]));

        assert!(matches!(improve_coordinate(&e3, 1), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn pass_examples() {
        let orth = MdspInstance::new(v(&[0, 1, 0]), vec![v(&[1, 0, 0]), v(&[0, 0, 3])]).unwrap();
        assert!(!improve_pass(&orth).unwrap().1);

        let e3 = MdspInstance::new(v(&[0, 2]), vec![v(&[1, 5])]).unwrap();
        let (next, any) = improve_pass(&e3).unwrap();
        assert!(any);
        assert_eq!(next.rest(), &[v(&[1, 1])]);

        let e1 = MdspInstance::new(v(&[0, 2]), vec![v(&[1, 1])]).unwrap();
        assert!(!improve_pass(&e1).unwrap().1);
    }

    #[test]
    fn run_examples() {
        let orth = MdspInstance::new(v(&[0, 1]), vec![v(&[1, 0])]).unwrap();
        let out = run_heuristic(&orth, &HeuristicConfig::default()).unwrap();
        assert!(out.converged);
        assert_eq!(out.passes_used, 1);
        assert_eq!(out.x_total, ShiftVector::from_ints(&[0]));
        assert_eq!(out.dist_sq, int(1));

        let e3 = MdspInstance::new(v(&[0, 2]), vec![v(&[1, 5])]).unwrap();
        let out = run_heuristic(&e3, &HeuristicConfig::default()).unwrap();
        assert!(out.converged);
        assert_eq!(out.passes_used, 2);
        assert_eq!(out.x_total, ShiftVector::from_ints(&[-2]));
        assert_eq!(out.dist_sq, int(2));

        assert!(HeuristicConfig::new(0).is_err());
    }

    #[test]
    fn pass_cap_reports_not_converged() {
        let e3 = MdspInstance::new(v(&[0, 2]), vec![v(&[1, 5])]).unwrap();
        let out = run_heuristic(&e3, &HeuristicConfig { max_passes: 1 }).unwrap();
        assert!(!out.converged);
        assert_eq!(out.passes_used, 1);
    }

    #[test]
    fn integer_choice_matches_rational() {
        for c in -30i64..=30 {
            for vv in 1i64..=7 {
                // bb large enough to keep the 2x2 Gram positive definite
                let bb = c * c / vv + 1 + (c.abs() % 5);
                let expect = choose_alpha(&int(c), &int(vv), &int(bb));
                let got = choose_alpha_int(&BigInt::from(c * 3), &BigInt::from(vv * 3), &BigInt::from(bb * 3));
                assert_eq!(got, expect, "c={c} vv={vv} bb={bb}");
            }
        }
    }
}
