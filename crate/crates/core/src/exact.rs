//! Exact MDSP solver: certified per-coordinate shift ranges followed by
//! exhaustive enumeration of their Cartesian product.
//!
//! Writing `w_i = b_i − α_i v` with `α_i = vᵀb_i / ‖v‖²`, the projection of
//! `v` on the line through `b_i + x v` has squared length
//! `y² ‖v‖⁴ / (‖w_i‖² + y² ‖v‖²)` with `y = x + α_i`. It stays at or below
//! `p² = ‖proj_⟨B⟩(v)‖²` exactly when `y² ≤ β_i²`, where
//! `β_i² = p² ‖w_i‖² / (‖v‖² (‖v‖² − p²))` is rational. Any shift outside
//! `[−α_i − β_i, −α_i + β_i]` therefore projects longer than the input basis
//! and cannot improve the distance.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{apply_shift, MdspInstance, ShiftVector};
use crate::linalg::{dist_sq_to_span, gram_matrix, project_onto_span, QMatrix, QVector};
use crate::rational::{floor, from_bigint, sqrt_upper, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftRanges {
    pub s: Vec<BigInt>,
    pub t: Vec<BigInt>,
    pub alpha: Vec<Rational>,
    /// Exact `β_i²`; `s_i = ⌊−α_i − β_i⌋` and `t_i = ⌈−α_i + β_i⌉` exactly.
    pub beta_sq_bound: Vec<Rational>,
}

impl ShiftRanges {
    /// Number of points in `[s_1,t_1] × … × [s_n,t_n]`.
    pub fn point_count(&self) -> BigInt {
        self.s
            .iter()
            .zip(&self.t)
            .fold(BigInt::one(), |acc, (s, t)| acc * (t - s + 1))
    }

    /// Largest `|s_i|` or `|t_i|`.
    pub fn widest(&self) -> BigInt {
        self.s
            .iter()
            .chain(&self.t)
            .map(|x| x.abs())
            .max()
            .unwrap_or_default()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MdspSolution {
    pub x: ShiftVector,
    pub dist_sq: Rational,
    /// `B(x)`
    pub basis: Vec<crate::linalg::QVector>,
}

#[derive(Clone, Debug)]
pub struct ExactOptions {
    /// Split the search over the first coordinate across rayon workers.
    pub parallel: bool,
    /// Refuse to enumerate more than this many points.
    pub max_points: u64,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            parallel: false,
            max_points: 50_000_000,
        }
    }
}

/// `p² = ‖proj_⟨B⟩(v)‖²`
pub fn projection_length_sq(inst: &MdspInstance) -> Rational {
    project_onto_span(inst.fixed(), inst.rest())
        .expect("instance is independent")
        .norm_sq()
}

pub fn shift_ranges(inst: &MdspInstance) -> Result<ShiftRanges> {
    let v = inst.fixed();
    let vv = v.norm_sq();
    if vv.is_zero() {
        return Err(Error::DegenerateFixedVector);
    }
    let p_sq = projection_length_sq(inst);
    let d_sq = &vv - &p_sq;
    let n = inst.n();
    let mut out = ShiftRanges {
        s: Vec::with_capacity(n),
        t: Vec::with_capacity(n),
        alpha: Vec::with_capacity(n),
        beta_sq_bound: Vec::with_capacity(n),
    };
    for b in inst.rest() {
        let vb = v.dot(b);
        let alpha = &vb / &vv;
        let w_sq = b.norm_sq() - &vb * &vb / &vv;
        let beta_sq = &p_sq * w_sq / (&vv * &d_sq);
        out.s.push(floor_minus_root(&-&alpha, &beta_sq));
        out.t.push(-floor_minus_root(&alpha, &beta_sq));
        out.alpha.push(alpha);
        out.beta_sq_bound.push(beta_sq);
    }
    Ok(out)
}

/// `⌊c − √r⌋` computed exactly.
fn floor_minus_root(c: &Rational, r: &Rational) -> BigInt {
    // s ≤ c − √r  ⇔  c − s ≥ 0 and (c − s)² ≥ r
    let fits = |s: &BigInt| {
        let gap = c - from_bigint(s.clone());
        !gap.is_negative() && &gap * &gap >= *r
    };
    let mut s = floor(&(c - sqrt_upper(r)));
    while fits(&(&s + 1)) {
        s += 1;
    }
    s
}

/// Squared length of the projection of `v` on the line through `b_i + x v`.
pub fn line_projection_sq(inst: &MdspInstance, i: usize, x: &BigInt) -> Rational {
    let v = inst.fixed();
    let line = inst.rest()[i].add_scaled(v, &from_bigint(x.clone()));
    let c = v.dot(&line);
    &c * &c / line.norm_sq()
}

/// Evaluates candidate shifts through the quadratic form
/// `q(x) = (x + α)ᵀ G⁻¹ (x + α)` where `G` is the Gram matrix of the
/// components `b_i − α_i v` orthogonal to `v`. The distance satisfies
/// `dist² = ‖v‖² / (1 + ‖v‖² q(x))`, so maximizing distance is minimizing `q`.
pub(crate) struct ShiftObjective {
    alpha: Vec<Rational>,
    form: QMatrix,
    vv: Rational,
}

impl ShiftObjective {
    pub(crate) fn new(inst: &MdspInstance) -> Result<Self> {
        let v = inst.fixed();
        let vv = v.norm_sq();
        let alpha: Vec<Rational> = inst.rest().iter().map(|b| v.dot(b) / &vv).collect();
        let perp: Vec<_> = inst
            .rest()
            .iter()
            .zip(&alpha)
            .map(|(b, a)| b.add_scaled(v, &-a))
            .collect();
        let form = gram_matrix(&perp).inverse().map_err(|_| Error::DependentInput)?;
        Ok(ShiftObjective { alpha, form, vv })
    }

    pub(crate) fn eval(&self, x: &[BigInt]) -> Rational {
        let y: Vec<Rational> = x
            .iter()
            .zip(&self.alpha)
            .map(|(xi, a)| from_bigint(xi.clone()) + a)
            .collect();
        let n = y.len();
        let mut acc = Rational::zero();
        for i in 0..n {
            if y[i].is_zero() {
                continue;
            }
            let mut row = self.form.get(i, i) * &y[i];
            for j in 0..i {
                row += (self.form.get(i, j) * &y[j]) * Rational::from_integer(BigInt::from(2));
            }
            acc += row * &y[i];
        }
        acc
    }

    pub(crate) fn dist_sq(&self, q: &Rational) -> Rational {
        &self.vv / (Rational::one() + &self.vv * q)
    }
}

/// `Q(x) = Σ f_ij (l x_i + a_i)(l x_j + a_j)`, a positive integer multiple
/// of the shift objective.
pub(crate) struct IntegerForm {
    l: BigInt,
    a: Vec<BigInt>,
    f: Vec<Vec<BigInt>>,
}

impl ShiftObjective {
    pub(crate) fn integer_form(&self) -> IntegerForm {
        let l = QVector::new(self.alpha.clone()).denominator_lcm();
        let lq = from_bigint(l.clone());
        let a = self.alpha.iter().map(|x| (x * &lq).to_integer()).collect();
        let n = self.alpha.len();
        let m = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .fold(BigInt::one(), |acc, (i, j)| acc.lcm(self.form.get(i, j).denom()));
        let mq = from_bigint(m);
        let f = (0..n)
            .map(|i| (0..n).map(|j| (self.form.get(i, j) * &mq).to_integer()).collect())
            .collect();
        IntegerForm { l, a, f }
    }
}

type Best<T> = Option<(T, Vec<T>)>;

/// Smaller objective wins, then the lexicographically smaller `x`.
fn pick<T: Ord>(a: Best<T>, b: Best<T>) -> Best<T> {
    match (a, b) {
        (None, b) => b,
        (a, None) => a,
        (Some(a), Some(b)) => {
            if (&b.0, &b.1) < (&a.0, &a.1) {
                Some(b)
            } else {
                Some(a)
            }
        }
    }
}

impl IntegerForm {
    fn eval(&self, x: &[BigInt]) -> BigInt {
        let y: Vec<BigInt> = x.iter().zip(&self.a).map(|(xi, ai)| &self.l * xi + ai).collect();
        let mut acc = BigInt::zero();
        for (i, yi) in y.iter().enumerate() {
            let mut row = BigInt::zero();
            for (j, yj) in y.iter().enumerate() {
                row += &self.f[i][j] * yj;
            }
            acc += row * yi;
        }
        acc
    }

    fn scan(&self, s: &[BigInt], t: &[BigInt], x: &mut Vec<BigInt>, from: usize, best: &mut Best<BigInt>) {
        if from == x.len() {
            let q = self.eval(x);
            if best.as_ref().is_none_or(|(bq, _)| q < *bq) {
                *best = Some((q, x.clone()));
            }
            return;
        }
        x[from] = s[from].clone();
        while x[from] <= t[from] {
            self.scan(s, t, x, from + 1, best);
            x[from] += 1;
        }
    }

    fn search(&self, s: &[BigInt], t: &[BigInt], parallel: bool) -> Vec<BigInt> {
        let best = if parallel && s.len() > 1 {
            let mut firsts = vec![];
            let mut x0 = s[0].clone();
            while x0 <= t[0] {
                firsts.push(x0.clone());
                x0 += 1;
            }
            firsts
                .into_par_iter()
                .map(|x0| {
                    let mut x = s.to_vec();
                    x[0] = x0;
                    let mut local = None;
                    self.scan(s, t, &mut x, 1, &mut local);
                    local
                })
                .reduce(|| None, pick)
        } else {
            let mut best = None;
            self.scan(s, t, &mut s.to_vec(), 0, &mut best);
            best
        };
        best.expect("ranges contain the zero shift").1
    }
}

/// [`IntegerForm`] with every intermediate known to fit in `i128`.
struct SmallForm {
    l: i128,
    a: Vec<i128>,
    f: Vec<Vec<i128>>,
    s: Vec<i128>,
    t: Vec<i128>,
}

impl SmallForm {
    fn fit(form: &IntegerForm, s: &[BigInt], t: &[BigInt]) -> Option<Self> {
        let n = form.a.len() as u64;
        let xmax = s.iter().chain(t).map(|x| x.abs()).max().unwrap_or_default();
        let amax = form.a.iter().map(|x| x.abs()).max().unwrap_or_default();
        let ymax = &form.l * xmax + amax;
        let fmax = form.f.iter().flatten().map(|x| x.abs()).max().unwrap_or_default();
        let bound = BigInt::from(n * n) * fmax * &ymax * &ymax;
        if bound.bits() > 120 {
            return None;
        }
        let small = |x: &BigInt| x.to_i128().expect("checked bound");
        Some(SmallForm {
            l: small(&form.l),
            a: form.a.iter().map(small).collect(),
            f: form.f.iter().map(|r| r.iter().map(small).collect()).collect(),
            s: s.iter().map(small).collect(),
            t: t.iter().map(small).collect(),
        })
    }

    fn scan(&self, y: &mut [i128], x: &mut [i128], from: usize, best: &mut Best<i128>) {
        let n = x.len();
        if from == n {
            let mut acc = 0i128;
            for i in 0..n {
                let mut row = 0i128;
                for j in 0..n {
                    row += self.f[i][j] * y[j];
                }
                acc += row * y[i];
            }
            if best.as_ref().is_none_or(|(bq, _)| acc < *bq) {
                *best = Some((acc, x.to_vec()));
            }
            return;
        }
        for xi in self.s[from]..=self.t[from] {
            x[from] = xi;
            y[from] = self.l * xi + self.a[from];
            self.scan(y, x, from + 1, best);
        }
    }

    fn scan_from(&self, x0: Option<i128>) -> Best<i128> {
        let n = self.a.len();
        let mut x = vec![0i128; n];
        let mut y = vec![0i128; n];
        let mut best = None;
        match x0 {
            None => self.scan(&mut y, &mut x, 0, &mut best),
            Some(x0) => {
                x[0] = x0;
                y[0] = self.l * x0 + self.a[0];
                self.scan(&mut y, &mut x, 1, &mut best);
            }
        }
        best
    }

    fn search(&self, parallel: bool) -> Vec<BigInt> {
        let best = if parallel && self.a.len() > 1 {
            (self.s[0]..=self.t[0])
                .into_par_iter()
                .map(|x0| self.scan_from(Some(x0)))
                .reduce(|| None, pick)
        } else {
            self.scan_from(None)
        };
        best.expect("ranges contain the zero shift")
            .1
            .into_iter()
            .map(BigInt::from)
            .collect()
    }
}

pub fn solve_exact(inst: &MdspInstance) -> Result<MdspSolution> {
    solve_exact_with(inst, &ExactOptions::default())
}

pub fn solve_exact_with(inst: &MdspInstance, opts: &ExactOptions) -> Result<MdspSolution> {
    if inst.fixed().is_zero() {
        return Err(Error::DegenerateFixedVector);
    }
    let n = inst.n();
    let p_sq = projection_length_sq(inst);
    if p_sq.is_zero() {
        // already orthogonal: the distance is the unconditional maximum ‖v‖
        return Ok(MdspSolution {
            x: ShiftVector::zeros(n),
            dist_sq: inst.fixed().norm_sq(),
            basis: inst.rest().to_vec(),
        });
    }
    let ranges = shift_ranges(inst)?;
    let points = ranges.point_count();
    if points.to_u64().is_none_or(|p| p > opts.max_points) {
        return Err(Error::SearchSpaceTooLarge {
            points: points.to_string(),
            cap: opts.max_points,
        });
    }
    let obj = ShiftObjective::new(inst)?;
    let form = obj.integer_form();
    let x = match SmallForm::fit(&form, &ranges.s, &ranges.t) {
        Some(small) => small.search(opts.parallel),
        None => form.search(&ranges.s, &ranges.t, opts.parallel),
    };
    let q = obj.eval(&x);
    let x = ShiftVector(x);
    let basis = apply_shift(inst, &x)?;
    let dist_sq = dist_sq_to_span(inst.fixed(), &basis)?;
    debug_assert_eq!(dist_sq, obj.dist_sq(&q));
    Ok(MdspSolution { x, dist_sq, basis })
}
