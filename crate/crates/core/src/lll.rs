//! Exact LLL reduction and the MDSP-assisted variant that interleaves LLL
//! rounds with heuristic sub-lattice improvement.

use std::time::{Duration, Instant};

use log::warn;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::heuristic::choose_alpha_int;
use crate::lattice::{LatticeBasis, MdspInstance};
use crate::linalg::{dist_sq_to_span, rel_volume_sq, QVector};
use crate::rational::{from_bigint, ratio, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LllParams {
    delta: Rational,
}

impl LllParams {
    /// Accepts `1/4 <= delta < 1`; the endpoint `1/4` only guarantees a
    /// weak reduction and logs a warning.
    pub fn new(delta: Rational) -> Result<Self> {
        let quarter = ratio(1, 4);
        if delta < quarter || delta >= Rational::one() {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in [1/4, 1), got {delta}"
            )));
        }
        if delta == quarter {
            warn!("delta = 1/4 is the degenerate endpoint of the LLL parameter range");
        }
        Ok(LllParams { delta })
    }

    pub fn delta(&self) -> &Rational {
        &self.delta
    }
}

impl Default for LllParams {
    fn default() -> Self {
        LllParams {
            delta: ratio(3, 4),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReductionTrace {
    pub swap_count: u64,
    pub size_reduction_count: u64,
    pub final_shortest_norm_sq: Rational,
    pub wall_time: Duration,
    /// Time spent inside LLL calls.
    pub lll_time: Duration,
    /// Time spent in heuristic sweeps.
    pub heuristic_time: Duration,
    /// Rounds of LLL + heuristic performed (1 for plain LLL).
    pub rounds: u64,
    /// Heuristic shifts accepted.
    pub heuristic_updates: u64,
}

/// Integral LLL on integer row vectors, tracking `d_i` (squared volumes)
/// and `λ_ij = d_j μ_ij` so every quantity stays an integer.
struct IntegralLll {
    b: Vec<Vec<BigInt>>,
    d: Vec<BigInt>,
    lambda: Vec<Vec<BigInt>>,
    delta_num: BigInt,
    delta_den: BigInt,
    swaps: u64,
    reductions: u64,
    /// Inverse-Gram data kept in step with `b` when present.
    adj: Option<AdjState>,
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).fold(BigInt::zero(), |acc, (x, y)| acc + x * y)
}

impl IntegralLll {
    fn new(b: Vec<Vec<BigInt>>, delta: &Rational) -> Self {
        let n = b.len();
        IntegralLll {
            b,
            d: vec![BigInt::zero(); n + 1],
            lambda: vec![vec![BigInt::zero(); n]; n],
            delta_num: delta.numer().clone(),
            delta_den: delta.denom().clone(),
            swaps: 0,
            reductions: 0,
            adj: None,
        }
    }

    // `d` is indexed from 0 with d[0] = 1; d[k+1] is the squared volume of
    // the first k+1 vectors.
    fn gram_schmidt_row(&mut self, k: usize) -> Result<()> {
        for j in 0..=k {
            let mut u = dot(&self.b[k], &self.b[j]);
            for i in 0..j {
                u = (&self.d[i + 1] * &u - &self.lambda[k][i] * &self.lambda[j][i]) / &self.d[i];
            }
            if j < k {
                self.lambda[k][j] = u;
            } else {
                if u.is_zero() {
                    return Err(Error::DependentInput);
                }
                self.d[k + 1] = u;
            }
        }
        Ok(())
    }

    fn reduce(&mut self, k: usize, l: usize) {
        let two_lambda: BigInt = &self.lambda[k][l] * 2;
        if two_lambda.abs() <= self.d[l + 1] {
            return;
        }
        // nearest integer to λ/d, computed exactly
        let q = (&two_lambda + &self.d[l + 1]).div_floor(&(&self.d[l + 1] * 2));
        self.reductions += 1;
        let (bk, bl) = if k > l {
            let (lo, hi) = self.b.split_at_mut(k);
            (&mut hi[0], &lo[l])
        } else {
            unreachable!()
        };
        for (x, y) in bk.iter_mut().zip(bl.iter()) {
            *x -= &q * y;
        }
        if let Some(adj) = &mut self.adj {
            adj.shift(k, l, &q);
        }
        self.lambda[k][l] -= &q * &self.d[l + 1];
        for i in 0..l {
            let t = &q * &self.lambda[l][i];
            self.lambda[k][i] -= t;
        }
    }

    fn swap(&mut self, k: usize, kmax: usize) {
        self.swaps += 1;
        self.b.swap(k, k - 1);
        if let Some(adj) = &mut self.adj {
            adj.swap(k, k - 1);
        }
        for j in 0..k - 1 {
            let t = std::mem::take(&mut self.lambda[k][j]);
            self.lambda[k][j] = std::mem::replace(&mut self.lambda[k - 1][j], t);
        }
        let lam = self.lambda[k][k - 1].clone();
        let big_b = (&self.d[k - 1] * &self.d[k + 1] + &lam * &lam) / &self.d[k];
        for i in k + 1..=kmax {
            let t = self.lambda[i][k].clone();
            self.lambda[i][k] = (&self.d[k + 1] * &self.lambda[i][k - 1] - &lam * &t) / &self.d[k];
            self.lambda[i][k - 1] = (&big_b * &t + &lam * &self.lambda[i][k]) / &self.d[k + 1];
        }
        self.d[k] = big_b;
    }

    fn lovasz_fails(&self, k: usize) -> bool {
        // q·d_k·d_{k-2} < p·d_{k-1}² − q·λ² in one-based terms
        let lam = &self.lambda[k][k - 1];
        let lhs = &self.delta_den * &self.d[k + 1] * &self.d[k - 1];
        let rhs = &self.delta_num * &self.d[k] * &self.d[k] - &self.delta_den * lam * lam;
        lhs < rhs
    }

    fn run(&mut self) -> Result<()> {
        let n = self.b.len();
        self.d[0] = BigInt::one();
        if n == 0 {
            return Ok(());
        }
        self.d[1] = dot(&self.b[0], &self.b[0]);
        if self.d[1].is_zero() {
            return Err(Error::DependentInput);
        }
        let mut k = 1;
        let mut kmax = 0;
        while k < n {
            if k > kmax {
                kmax = k;
                self.gram_schmidt_row(k)?;
            }
            self.reduce(k, k - 1);
            if self.lovasz_fails(k) {
                self.swap(k, kmax);
                k = (k - 1).max(1);
            } else {
                for l in (0..k.saturating_sub(1)).rev() {
                    self.reduce(k, l);
                }
                k += 1;
            }
        }
        Ok(())
    }
}

/// Clears denominators: returns integer rows and the common scale.
fn to_integer_rows(vectors: &[QVector]) -> (Vec<Vec<BigInt>>, BigInt) {
    let scale = vectors
        .iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(&v.denominator_lcm()));
    let rows = vectors
        .iter()
        .map(|v| {
            v.iter()
                .map(|x| x.numer() * (&scale / x.denom()))
                .collect()
        })
        .collect();
    (rows, scale)
}

fn from_integer_rows(rows: &[Vec<BigInt>], scale: &BigInt) -> Vec<QVector> {
    rows.iter()
        .map(|r| QVector::new(r.iter().map(|x| Rational::new(x.clone(), scale.clone())).collect()))
        .collect()
}

fn shortest_norm_sq(rows: &[Vec<BigInt>], scale: &BigInt) -> Rational {
    let min = rows.iter().map(|r| dot(r, r)).min().unwrap_or_default();
    Rational::new(min, scale * scale)
}

/// Basis vector of least squared norm, first index on ties.
pub fn shortest_basis_vector(vectors: &[QVector]) -> Result<(QVector, Rational)> {
    let mut best: Option<(usize, Rational)> = None;
    for (i, v) in vectors.iter().enumerate() {
        let n = v.norm_sq();
        if best.as_ref().is_none_or(|(_, b)| n < *b) {
            best = Some((i, n));
        }
    }
    let (i, n) = best.ok_or_else(|| Error::InvalidParameter("empty basis".into()))?;
    Ok((vectors[i].clone(), n))
}

pub fn lll_reduce(basis: &LatticeBasis, p: &LllParams) -> Result<(LatticeBasis, ReductionTrace)> {
    let start = Instant::now();
    let (rows, scale) = to_integer_rows(basis.vectors());
    let mut lll = IntegralLll::new(rows, p.delta());
    lll.run()?;
    let shortest = shortest_norm_sq(&lll.b, &scale);
    let out = from_integer_rows(&lll.b, &scale);
    let elapsed = start.elapsed();
    Ok((
        LatticeBasis::new_unchecked(out),
        ReductionTrace {
            swap_count: lll.swaps,
            size_reduction_count: lll.reductions,
            final_shortest_norm_sq: shortest,
            wall_time: elapsed,
            lll_time: elapsed,
            heuristic_time: Duration::ZERO,
            rounds: 1,
            heuristic_updates: 0,
        },
    ))
}

/// Checks size reduction `|μ_ij| ≤ 1/2` and the Lovász condition
/// `‖b_k*‖² ≥ (δ − μ²_{k,k−1}) ‖b_{k−1}*‖²` exactly.
pub fn is_lll_reduced(vectors: &[QVector], delta: &Rational) -> Result<bool> {
    let gs = crate::linalg::gram_schmidt(vectors)?;
    let half = ratio(1, 2);
    let n = vectors.len();
    for i in 0..n {
        for j in 0..i {
            if gs.mu.get(i, j).abs() > half {
                return Ok(false);
            }
        }
    }
    for k in 1..n {
        let mu = gs.mu.get(k, k - 1);
        if gs.bstar_sq[k] < (delta - mu * mu) * &gs.bstar_sq[k - 1] {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug)]
pub struct AccelConfig {
    pub delta: LllParams,
    pub target_norm_sq: Rational,
    pub max_rounds: u64,
    /// Heuristic passes per fixed vector in each sweep.
    pub heuristic_passes: usize,
    /// Verify volume monotonicity and lattice preservation after every sweep.
    pub check_invariants: bool,
}

impl AccelConfig {
    pub fn new(delta: LllParams, target_norm_sq: Rational) -> Result<Self> {
        if target_norm_sq <= Rational::zero() {
            return Err(Error::InvalidParameter("target_norm_sq must be positive".into()));
        }
        Ok(AccelConfig {
            delta,
            target_norm_sq,
            max_rounds: 1000,
            heuristic_passes: 1,
            check_invariants: false,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AccelStatus {
    Reached,
    RoundsExhausted,
}

#[derive(Clone, Debug)]
pub struct AccelOutcome {
    pub basis: LatticeBasis,
    pub trace: ReductionTrace,
    pub status: AccelStatus,
}

/// Gram matrix of integer rows.
fn int_gram(rows: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = rows.len();
    let mut g = vec![vec![BigInt::zero(); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let d = dot(&rows[i], &rows[j]);
            g[j][i] = d.clone();
            g[i][j] = d;
        }
    }
    g
}

/// `(adj K, det K)` of a positive definite integer matrix by fraction-free
/// Gauss–Jordan elimination.
fn adjugate(k: &[Vec<BigInt>]) -> (Vec<Vec<BigInt>>, BigInt) {
    let n = k.len();
    let mut m: Vec<Vec<BigInt>> = k
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }));
            r
        })
        .collect();
    let mut prev = BigInt::one();
    for p in 0..n {
        let (pivot_row, piv) = (m[p].clone(), m[p][p].clone());
        for (i, row) in m.iter_mut().enumerate() {
            if i == p {
                continue;
            }
            let f = std::mem::take(&mut row[p]);
            if f.is_zero() {
                // row[j]·piv/prev stays exact: prev divides piv·row[j] here
                for (j, x) in row.iter_mut().enumerate() {
                    if j != p && !x.is_zero() {
                        *x *= &piv;
                        *x /= &prev;
                    }
                }
                continue;
            }
            for (j, x) in row.iter_mut().enumerate() {
                if j != p {
                    *x *= &piv;
                    *x -= &f * &pivot_row[j];
                    *x /= &prev;
                }
            }
        }
        prev = piv;
    }
    (m.into_iter().map(|r| r[n..].to_vec()).collect(), prev)
}

/// `adj` and `det` of the Gram matrix of the basis rows. In a sweep the
/// last row is the fixed vector, and the state is the integer form of the
/// heuristic pass state.
#[derive(Clone, Debug, PartialEq, Eq)]
struct AdjState {
    adj: Vec<Vec<BigInt>>,
    det: BigInt,
}

impl AdjState {
    fn fixed(&self) -> usize {
        self.adj.len() - 1
    }

    fn dist_sq(&self) -> Rational {
        let f = self.fixed();
        Rational::new(self.det.clone(), self.adj[f][f].clone())
    }

    fn choose(&self, j: usize) -> BigInt {
        let f = self.fixed();
        choose_alpha_int(&-&self.adj[j][f], &self.adj[j][j], &self.adj[f][f])
    }

    fn new(rows: &[Vec<BigInt>]) -> Self {
        let (adj, det) = adjugate(&int_gram(rows));
        AdjState { adj, det }
    }

    /// Records `b_j ← b_j − alpha·b_f`. The inverse transforms by
    /// `(I + alpha e_f e_jᵀ) K⁻¹ (I + alpha e_j e_fᵀ)`.
    fn shift(&mut self, j: usize, f: usize, alpha: &BigInt) {
        let m = self.adj.len();
        for c in 0..m {
            let t = alpha * &self.adj[j][c];
            self.adj[f][c] += t;
        }
        for r in 0..m {
            let t = alpha * &self.adj[r][j];
            self.adj[r][f] += t;
        }
    }

    fn swap(&mut self, a: usize, b: usize) {
        self.adj.swap(a, b);
        for row in &mut self.adj {
            row.swap(a, b);
        }
    }

    /// Drops the fixed vector; the previous one becomes fixed. The new
    /// determinant is the old `adj_ff` and the new adjugate follows from
    /// the Schur complement, exactly divisible by the old determinant.
    fn downdate(&mut self) {
        let f = self.fixed();
        let aff = self.adj[f][f].clone();
        let col: Vec<BigInt> = (0..f).map(|r| self.adj[r][f].clone()).collect();
        self.adj.truncate(f);
        for (r, row) in self.adj.iter_mut().enumerate() {
            row.truncate(f);
            for (c, x) in row.iter_mut().enumerate() {
                *x *= &aff;
                *x -= &col[r] * &col[c];
                *x /= &self.det;
            }
        }
        self.det = aff;
    }
}

/// For `i = n..2` (one-based) treats `b_i` as the fixed vector of
/// `[b_i | b_1..b_{i−1}]` and applies heuristic passes, writing the improved
/// `b_1..b_{i−1}` back before moving on. Returns the number of accepted shifts.
/// `full` tracks the whole basis and is kept current.
fn heuristic_sweep(rows: &mut [Vec<BigInt>], full: &mut AdjState, passes: usize, check: bool) -> Result<u64> {
    let n = rows.len();
    if n < 2 {
        return Ok(0);
    }
    let mut state = full.clone();
    let mut updates = 0u64;
    for fixed in (1..n).rev() {
        let before = if check {
            Some(sweep_snapshot(rows, fixed)?)
        } else {
            None
        };
        for _ in 0..passes {
            let mut any = false;
            for j in 0..fixed {
                let alpha = state.choose(j);
                if alpha.is_zero() {
                    continue;
                }
                any = true;
                updates += 1;
                state.shift(j, fixed, &alpha);
                full.shift(j, fixed, &alpha);
                let (lo, hi) = rows.split_at_mut(fixed);
                for (x, y) in lo[j].iter_mut().zip(hi[0].iter()) {
                    *x -= &alpha * y;
                }
            }
            if !any {
                break;
            }
        }
        if let Some(before) = before {
            check_sweep(&before, rows, fixed, &state.dist_sq())?;
        }
        state.downdate();
    }
    Ok(updates)
}

struct SweepSnapshot {
    sub: Vec<QVector>,
    fixed: QVector,
    volume_sq: Rational,
    dist_sq: Rational,
}

fn sweep_snapshot(rows: &[Vec<BigInt>], fixed: usize) -> Result<SweepSnapshot> {
    let sub: Vec<QVector> = rows[..fixed].iter().map(|r| QVector::from_bigints(r)).collect();
    let fixed_v = QVector::from_bigints(&rows[fixed]);
    Ok(SweepSnapshot {
        volume_sq: rel_volume_sq(&sub)?,
        dist_sq: dist_sq_to_span(&fixed_v, &sub)?,
        sub,
        fixed: fixed_v,
    })
}

fn check_sweep(before: &SweepSnapshot, rows: &[Vec<BigInt>], fixed: usize, tracked: &Rational) -> Result<()> {
    let after = sweep_snapshot(rows, fixed)?;
    if after.dist_sq < before.dist_sq {
        return Err(Error::InvariantViolated("heuristic decreased the distance".into()));
    }
    if after.dist_sq != *tracked {
        return Err(Error::InvariantViolated("incremental distance disagrees with direct computation".into()));
    }
    if after.volume_sq > before.volume_sq {
        return Err(Error::InvariantViolated("sub-lattice volume increased".into()));
    }
    let mut a = vec![before.fixed.clone()];
    a.extend(before.sub.iter().cloned());
    let mut b = vec![after.fixed.clone()];
    b.extend(after.sub.iter().cloned());
    if crate::lattice::same_lattice_vectors(&a, &b)?.is_none() {
        return Err(Error::InvariantViolated("sweep changed the lattice".into()));
    }
    Ok(())
}

/// Repeats {LLL with `cfg.delta`; heuristic sweep} until some basis vector
/// has squared norm at most `cfg.target_norm_sq` or `cfg.max_rounds` rounds
/// have run.
pub fn accelerated_reduce(basis: &LatticeBasis, cfg: &AccelConfig) -> Result<AccelOutcome> {
    let start = Instant::now();
    let (mut rows, scale) = to_integer_rows(basis.vectors());
    let scale_sq = &scale * &scale;
    // compare integer norms against the target scaled by the same factor
    let target = &cfg.target_norm_sq * from_bigint(scale_sq);
    let mut trace = ReductionTrace::default();
    let mut status = AccelStatus::RoundsExhausted;
    let shortest_int = |rows: &[Vec<BigInt>]| -> BigInt {
        rows.iter().map(|r| dot(r, r)).min().expect("nonempty basis")
    };
    let mut tracked: Option<AdjState> = None;
    while trace.rounds < cfg.max_rounds {
        trace.rounds += 1;
        let t = Instant::now();
        let mut lll = IntegralLll::new(std::mem::take(&mut rows), cfg.delta.delta());
        lll.adj = tracked.take();
        lll.run()?;
        tracked = lll.adj.take();
        trace.swap_count += lll.swaps;
        trace.size_reduction_count += lll.reductions;
        rows = lll.b;
        trace.lll_time += t.elapsed();
        if from_bigint(shortest_int(&rows)) <= target {
            status = AccelStatus::Reached;
            break;
        }
        let t = Instant::now();
        let full = tracked.get_or_insert_with(|| AdjState::new(&rows));
        trace.heuristic_updates += heuristic_sweep(&mut rows, full, cfg.heuristic_passes, cfg.check_invariants)?;
        if cfg.check_invariants && *full != AdjState::new(&rows) {
            return Err(Error::InvariantViolated("tracked adjugate diverged".into()));
        }
        trace.heuristic_time += t.elapsed();
        if from_bigint(shortest_int(&rows)) <= target {
            status = AccelStatus::Reached;
            break;
        }
    }
    trace.final_shortest_norm_sq = shortest_norm_sq(&rows, &scale);
    let out = from_integer_rows(&rows, &scale);
    trace.wall_time = start.elapsed();
    Ok(AccelOutcome {
        basis: LatticeBasis::new_unchecked(out),
        trace,
        status,
    })
}

/// `det([v|B])² = vol²(B) · dist²(v, ⟨B⟩)`, with `det²` read as the Gram
/// determinant when the instance is not square.
pub fn det_identity_check(inst: &MdspInstance) -> Result<bool> {
    let m = inst.column_matrix();
    let det_sq = if m.is_square() {
        let d = m.determinant()?;
        &d * &d
    } else {
        rel_volume_sq(&inst.all_vectors())?
    };
    let rhs = rel_volume_sq(inst.rest())? * dist_sq_to_span(inst.fixed(), inst.rest())?;
    Ok(det_sq == rhs)
}
