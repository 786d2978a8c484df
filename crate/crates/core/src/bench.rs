//! Seeded random bases and the LLL versus accelerated-LLL timing harness.

use std::time::Duration;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::LatticeBasis;
use crate::linalg::QMatrix;
use crate::lll::{accelerated_reduce, lll_reduce, AccelConfig, AccelStatus, LllParams};
use crate::rational::{format_rational, from_bigint, ratio, Rational};

/// Square integer matrix with entries uniform in `[−entry_bound, entry_bound]`,
/// redrawn until nonsingular.
pub fn generate_random_basis(dim: usize, entry_bound: u64, seed: u64) -> Result<QMatrix> {
    if dim < 2 {
        return Err(Error::InvalidParameter(format!("dim must be at least 2, got {dim}")));
    }
    if entry_bound < 1 || entry_bound > i64::MAX as u64 {
        return Err(Error::InvalidParameter(format!("entry_bound out of range: {entry_bound}")));
    }
    let bound = entry_bound as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let data: Vec<Rational> = (0..dim * dim)
            .map(|_| from_bigint(BigInt::from(rng.random_range(-bound..=bound))))
            .collect();
        let m = QMatrix::from_row_major(dim, dim, data)?;
        if !m.determinant()?.is_zero() {
            return Ok(m);
        }
    }
}

/// Seed of instance `index` at dimension `dim` derived from the report seed.
pub fn instance_seed(seed: u64, dim: usize, index: usize) -> u64 {
    // splitmix64 finalizer over the combined key
    let mut z = seed
        .wrapping_add((dim as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add((index as u64).wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub dims: Vec<usize>,
    pub instances_per_dim: usize,
    pub delta_low: Rational,
    pub delta_high: Rational,
    pub seed: u64,
    pub entry_bound: u64,
    pub max_rounds: u64,
    pub heuristic_passes: usize,
    /// Run instances concurrently; each instance is still single-threaded.
    pub parallel: bool,
}

impl BenchConfig {
    pub fn new(dims: Vec<usize>, instances_per_dim: usize, seed: u64) -> Self {
        BenchConfig {
            dims,
            instances_per_dim,
            delta_low: ratio(1, 4),
            delta_high: ratio(99, 100),
            seed,
            entry_bound: 1000,
            max_rounds: 1000,
            heuristic_passes: 1,
            parallel: true,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InstanceResult {
    pub index: usize,
    pub seed: u64,
    pub t_high_ms: f64,
    pub t_low_ms: f64,
    pub lll_phase_ms: f64,
    pub heuristic_phase_ms: f64,
    pub speedup: f64,
    pub target_norm_sq: String,
    pub achieved_norm_sq: String,
    pub rounds: u64,
    pub reached: bool,
    #[serde(skip)]
    pub target: Rational,
    #[serde(skip)]
    pub achieved: Rational,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub dim: usize,
    pub t_high_ms: f64,
    pub t_low_ms: f64,
    pub speedup: f64,
    /// Mean over instances that reached the target, exact.
    pub target_norm_sq: String,
    pub achieved_norm_sq: String,
    pub median_speedup: f64,
    pub reached: usize,
    pub exhausted: usize,
    pub instances: Vec<InstanceResult>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub seed: u64,
    pub count: usize,
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}

pub fn run_instance(dim: usize, index: usize, cfg: &BenchConfig) -> Result<InstanceResult> {
    let seed = instance_seed(cfg.seed, dim, index);
    let basis = LatticeBasis::from_rows(&generate_random_basis(dim, cfg.entry_bound, seed)?)?;
    let (_, high) = lll_reduce(&basis, &LllParams::new(cfg.delta_high.clone())?)?;
    let target = high.final_shortest_norm_sq.clone();
    let mut accel = AccelConfig::new(LllParams::new(cfg.delta_low.clone())?, target.clone())?;
    accel.max_rounds = cfg.max_rounds;
    accel.heuristic_passes = cfg.heuristic_passes;
    let low = accelerated_reduce(&basis, &accel)?;
    let t_high_ms = ms(high.wall_time);
    let t_low_ms = ms(low.trace.wall_time);
    Ok(InstanceResult {
        index,
        seed,
        t_high_ms,
        t_low_ms,
        lll_phase_ms: ms(low.trace.lll_time),
        heuristic_phase_ms: ms(low.trace.heuristic_time),
        speedup: t_high_ms / t_low_ms,
        target_norm_sq: format_rational(&target),
        achieved_norm_sq: format_rational(&low.trace.final_shortest_norm_sq),
        rounds: low.trace.rounds,
        reached: low.status == AccelStatus::Reached,
        target,
        achieved: low.trace.final_shortest_norm_sq,
    })
}

fn median(xs: &mut [f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

fn summarize(dim: usize, instances: Vec<InstanceResult>) -> BenchRow {
    let ok: Vec<&InstanceResult> = instances.iter().filter(|r| r.reached).collect();
    let k = ok.len();
    let (t_high_ms, t_low_ms, target, achieved) = if k == 0 {
        (f64::NAN, f64::NAN, Rational::zero(), Rational::zero())
    } else {
        let denom = Rational::from_integer(BigInt::from(k));
        (
            ok.iter().map(|r| r.t_high_ms).sum::<f64>() / k as f64,
            ok.iter().map(|r| r.t_low_ms).sum::<f64>() / k as f64,
            ok.iter().map(|r| r.target.clone()).sum::<Rational>() / &denom,
            ok.iter().map(|r| r.achieved.clone()).sum::<Rational>() / &denom,
        )
    };
    let mut speedups: Vec<f64> = ok.iter().map(|r| r.speedup).collect();
    BenchRow {
        dim,
        t_high_ms,
        t_low_ms,
        speedup: t_high_ms / t_low_ms,
        target_norm_sq: format_rational(&target),
        achieved_norm_sq: format_rational(&achieved),
        median_speedup: median(&mut speedups),
        reached: k,
        exhausted: instances.len() - k,
        instances,
    }
}

pub fn bench_compare(cfg: &BenchConfig) -> Result<BenchReport> {
    if cfg.instances_per_dim < 1 {
        return Err(Error::InvalidParameter("instance count must be at least 1".into()));
    }
    if let Some(&d) = cfg.dims.iter().find(|&&d| d < 2) {
        return Err(Error::InvalidParameter(format!("dimension {d} is below 2")));
    }
    LllParams::new(cfg.delta_low.clone())?;
    LllParams::new(cfg.delta_high.clone())?;
    let jobs: Vec<(usize, usize)> = cfg
        .dims
        .iter()
        .flat_map(|&d| (0..cfg.instances_per_dim).map(move |i| (d, i)))
        .collect();
    let results: Vec<Result<InstanceResult>> = if cfg.parallel {
        jobs.par_iter().map(|&(d, i)| run_instance(d, i, cfg)).collect()
    } else {
        jobs.iter().map(|&(d, i)| run_instance(d, i, cfg)).collect()
    };
    let mut results = results.into_iter().collect::<Result<Vec<_>>>()?.into_iter();
    let rows = cfg
        .dims
        .iter()
        .map(|&d| summarize(d, results.by_ref().take(cfg.instances_per_dim).collect()))
        .collect();
    Ok(BenchReport {
        rows,
        seed: cfg.seed,
        count: cfg.instances_per_dim,
    })
}
