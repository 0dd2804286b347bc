//! Numerical audits shared by the CLI commands, the lemma suite and the
//! acceptance run. Each audit is deterministic given the configuration.

use std::f64::consts::PI;
use std::time::Instant;

use favard_core::fourier::{
    cet_ratio, exp_sum_energy, overlap_energy, p1_energy, phi_tilde, riesz_domination, riesz_period_mean,
    FrequencySet, PlancherelConfig, PlancherelReport, RieszProduct,
};
use favard_core::geometry::{cells, TriangleConfig, SimilaritySystem};
use favard_core::projection::{favard_with_eps, multiplicity, theta_to_t, FavardEstimate, StackingProfile};
use favard_core::quadrature::QuadratureRegistry;
use favard_core::tiling::{
    critical_indices, factor, factor_domination, root_stability_in_range, spread_sample,
    ssv_scan, tiling_scan, DominationCheck,
};
use favard_core::zeros::{
    branch_candidates, continue_zero, find_zeros, BranchConfig, ContinuationConfig, Rect, ZeroConfig,
};
use favard_core::{fourier, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::ledger::ExponentLedger;

/// Substream identifiers for [`derive_seed`].
pub mod stream {
    pub const RIESZ: u64 = 1;
    pub const CETSQ: u64 = 2;
    pub const CRITICAL: u64 = 3;
    pub const DOMINATION: u64 = 4;
}

/// SplitMix64 of `(seed, stream, index)`.
pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03) ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_for(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, stream, index))
}

fn zero_config(cfg: &ExperimentConfig) -> ZeroConfig {
    ZeroConfig {
        residual_tol: cfg.residual_tol,
        strip_h: cfg.strip_h,
        ..ZeroConfig::default()
    }
}

// ---------------------------------------------------------------- Favard

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub estimate: FavardEstimate,
    pub wall_ms: f64,
}

pub fn favard_sweep_rows(system: &SimilaritySystem, n_max: u32, cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let registry = QuadratureRegistry::default();
    let rule = registry.get(&cfg.quadrature)?;
    (0..=n_max)
        .map(|n| {
            let start = Instant::now();
            let estimate = favard_with_eps(system, n, cfg.theta_samples, rule, cfg.cap(), cfg.merge_eps)?;
            Ok(SweepRow {
                estimate,
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
            })
        })
        .collect()
}

/// Relative slack for floating-point quadrature sums of nested sets.
pub const MONOTONE_SLACK: f64 = 1e-12;

/// First `n` with `Fav(G_n) > Fav(G_{n-1})` beyond the slack.
pub fn first_increase(rows: &[SweepRow]) -> Option<(u32, f64, f64)> {
    rows.windows(2).find_map(|w| {
        let (a, b) = (w[0].estimate.value, w[1].estimate.value);
        (b > a * (1.0 + MONOTONE_SLACK)).then_some((w[1].estimate.generation, a, b))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassAudit {
    pub checked: usize,
    pub max_relative_error: f64,
}

/// `|∫f_{n,θ} - 2|/2` over `n = 0..=n_max` and `thetas` midpoint angles.
pub fn mass_audit(system: &SimilaritySystem, n_max: u32, thetas: usize, cfg: &ExperimentConfig) -> Result<MassAudit> {
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for n in 0..=n_max {
        let cloud = cells(system, n, cfg.cap())?;
        let expected = 2.0 * cloud.radius() * cloud.len() as f64;
        let errs: Vec<f64> = (0..thetas)
            .into_par_iter()
            .map(|j| {
                let theta = (j as f64 + 0.5) * PI / thetas as f64;
                (multiplicity(&cloud, theta).integral() - expected).abs() / expected
            })
            .collect();
        checked += errs.len();
        worst = errs.into_iter().fold(worst, f64::max);
    }
    Ok(MassAudit {
        checked,
        max_relative_error: worst,
    })
}

// ---------------------------------------------------------------- Fourier

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountAudit {
    pub checked: usize,
    pub violations: usize,
    /// Worst observed value of the audited statistic.
    pub extreme: f64,
    pub first_violation: Option<(f64, f64)>,
}

/// `|φ_t(x)|² ≤ min(r(x), r(tx))` at random `(t, x) ∈ [0,1]×[-X, X]`.
pub fn riesz_domination_audit(samples: usize, x_range: f64, seed: u64) -> CountAudit {
    let mut rng = rng_for(seed, stream::RIESZ, 0);
    let mut out = CountAudit {
        checked: samples,
        violations: 0,
        extreme: f64::NEG_INFINITY,
        first_violation: None,
    };
    for _ in 0..samples {
        let t: f64 = rng.gen_range(0.0..=1.0);
        let x: f64 = rng.gen_range(-x_range..=x_range);
        let d = riesz_domination(t, x);
        out.extreme = out.extreme.max(d.lhs - d.rhs);
        if !d.holds {
            out.violations += 1;
            out.first_violation.get_or_insert((t, x));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodMean {
    pub ell: u32,
    pub mean: f64,
    pub expected: f64,
    pub relative_error: f64,
}

/// Period means of `∏_{k=k_lo}^{k_lo+ℓ-1} r(3^{-k}x)` against `(7/9)^ℓ`.
pub fn riesz_period_means(k_lo: u32, ells: impl IntoIterator<Item = u32>) -> Result<Vec<PeriodMean>> {
    ells.into_iter()
        .map(|ell| {
            let r = RieszProduct::new(k_lo, k_lo + ell - 1)?;
            let mean = riesz_period_mean(&r);
            let expected = (7.0f64 / 9.0).powi(ell as i32);
            Ok(PeriodMean {
                ell,
                mean,
                expected,
                relative_error: (mean - expected).abs() / expected,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlancherelRow {
    pub n: u32,
    pub theta: f64,
    pub report: PlancherelReport,
    /// Same check with the truncation doubled.
    pub doubled: PlancherelReport,
}

impl PlancherelRow {
    pub fn decreases(&self) -> bool {
        self.doubled.relative_gap <= self.report.relative_gap
    }
}

pub fn plancherel_audit(system: &SimilaritySystem, cfg: &ExperimentConfig, thetas: &[f64]) -> Result<Vec<PlancherelRow>> {
    let base = PlancherelConfig {
        x_max: cfg.plancherel_x_max,
        x_cap: cfg.plancherel_x_cap,
        tail_tol: cfg.plancherel_tail_tol,
    };
    let mut rows = Vec::new();
    for n in 0..=cfg.plancherel_n_max {
        for &theta in thetas {
            let report = fourier::plancherel_check(system, n, theta, &base, cfg.cap())?;
            let wider = PlancherelConfig {
                x_max: 2.0 * report.x_max,
                x_cap: base.x_cap.max(4.0 * report.x_max),
                tail_tol: base.tail_tol,
            };
            let doubled = fourier::plancherel_check(system, n, theta, &wider, cfg.cap())?;
            rows.push(PlancherelRow {
                n,
                theta,
                report,
                doubled,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyRow {
    pub t: f64,
    pub n: u32,
    pub m: u32,
    pub ell: u32,
    pub energy: f64,
    pub ratio_to_3m: f64,
}

/// `t_i = 0.05 + 0.9 i/(count-1)`.
pub fn energy_t_grid(count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.5],
        _ => (0..count).map(|i| 0.05 + 0.9 * i as f64 / (count - 1) as f64).collect(),
    }
}

pub fn energy_audit(cfg: &ExperimentConfig) -> Result<Vec<EnergyRow>> {
    let (n, m, ell) = (cfg.energy_n, cfg.m.min(cfg.energy_n), cfg.ell());
    energy_t_grid(cfg.energy_t_count)
        .into_iter()
        .map(|t| {
            let e = p1_energy(t, n, m)?;
            Ok(EnergyRow {
                t,
                n,
                m,
                ell,
                energy: e.energy,
                ratio_to_3m: e.ratio_to_3m,
            })
        })
        .collect()
}

/// `max/mean - 1` and `1 - min/mean`, the larger of the two.
pub fn spread_around_mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    (hi / mean - 1.0).max(1.0 - lo / mean)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CetsqRow {
    pub index: usize,
    pub seed: u64,
    pub k: usize,
    pub energy: f64,
    pub overlap: f64,
    pub ratio: f64,
    pub cet_ratio: f64,
}

pub fn random_frequency_set(rng: &mut ChaCha8Rng, k_max: usize, span: f64) -> Result<FrequencySet> {
    let k = rng.gen_range(1..=k_max.max(1));
    let freqs: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..span)).collect();
    let coeffs: Vec<Complex64> = (0..k)
        .map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI)))
        .collect();
    Ok(FrequencySet::new(freqs, coeffs)?)
}

pub fn cetsq_audit(cfg: &ExperimentConfig) -> Result<Vec<CetsqRow>> {
    (0..cfg.cetsq_sets)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(cfg.seed, stream::CETSQ, i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let fs = random_frequency_set(&mut rng, cfg.cetsq_k_max, cfg.cetsq_span)?;
            let energy = exp_sum_energy(&fs);
            let overlap = overlap_energy(&fs, 1.0);
            Ok(CetsqRow {
                index: i,
                seed,
                k: fs.len(),
                energy,
                overlap,
                ratio: energy / overlap,
                cet_ratio: cet_ratio(&fs),
            })
        })
        .collect()
}

// ---------------------------------------------------------------- zeros

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroMachinery {
    pub zero: Complex64,
    pub zero_error: f64,
    pub zero_residual: f64,
    pub round_trip_error: f64,
    pub outbound_samples: usize,
    pub complete: bool,
    pub real_t_checked: usize,
    pub real_t_candidates: usize,
}

/// Locate the zero near `4π/3` at `t = 1/2`, continue it to `t_far` and
/// back, and run the branch search on `real_t` parameters in `(0, 1)`.
pub fn zero_machinery(t_far: f64, real_t: usize, cfg: &ExperimentConfig) -> Result<ZeroMachinery> {
    let zcfg = zero_config(cfg);
    let target = Complex64::new(4.0 * PI / 3.0, 0.0);
    let rect = Rect::centered(target, 0.3, 0.3)?;
    let half = Complex64::new(0.5, 0.0);
    let zeros = find_zeros(half, &rect, &zcfg)?;
    let zero = zeros
        .iter()
        .copied()
        .min_by(|a, b| (a - target).norm().total_cmp(&(b - target).norm()))
        .ok_or_else(|| crate::error::LabError::Invariant("no zero of φ̃_{1/2} near 4π/3".into()))?;
    let ccfg = ContinuationConfig {
        max_step: cfg.zero_max_step,
        residual_tol: cfg.residual_tol,
        strip_h: cfg.strip_h,
        m: cfg.m,
        ..ContinuationConfig::default()
    };
    let out = continue_zero(0.5, zero, t_far, &ccfg)?;
    let back = continue_zero(out.last().t, out.last().lambda, 0.5, &ccfg)?;
    let bcfg = BranchConfig {
        residual_tol: cfg.residual_tol,
        ..BranchConfig::default()
    };
    let mut real_t_candidates = 0;
    for i in 0..real_t {
        let t = (i as f64 + 0.5) / real_t as f64;
        real_t_candidates += branch_candidates(Complex64::new(t, 0.0), &bcfg)?.len();
    }
    Ok(ZeroMachinery {
        zero,
        zero_error: (zero - target).norm(),
        zero_residual: phi_tilde(half, zero).norm(),
        round_trip_error: (back.last().lambda - zero).norm(),
        outbound_samples: out.samples.len(),
        complete: out.is_complete() && back.is_complete() && back.last().t == 0.5,
        real_t_checked: real_t,
        real_t_candidates,
    })
}

// ---------------------------------------------------------------- tiling

/// `count` midpoint-spaced values of `t` in `(0, 1) \ [1/2 - 3^{-m}, 1/2 + 3^{-m}]`,
/// split evenly on either side.
pub fn tiling_t_grid(m: u32, count: usize) -> Vec<f64> {
    let gap = 3f64.powi(-(m as i32));
    let left = count / 2;
    let right = count - left;
    let side = |a: f64, b: f64, k: usize| -> Vec<f64> {
        (0..k).map(move |i| a + (b - a) * (i as f64 + 0.5) / k as f64).collect()
    };
    let mut out = side(0.0, 0.5 - gap, left);
    out.extend(side(0.5 + gap, 1.0, right));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TilingRow {
    pub t: f64,
    pub m: u32,
    pub x0: f64,
    pub delta: f64,
    /// Factor whose zero centres the rectangle.
    pub zero_k: u32,
    pub min_max_cofactor: f64,
    pub critical: Vec<u32>,
    pub ssv_interval_count: usize,
}

impl TilingRow {
    pub fn floor_holds(&self) -> bool {
        self.min_max_cofactor >= 3f64.powi(-(self.m as i32))
    }

    pub fn critical_label(&self) -> String {
        match self.critical.as_slice() {
            [] => "none".into(),
            ks => ks.iter().map(u32::to_string).collect::<Vec<_>>().join(";"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TilingAudit {
    pub rows: Vec<TilingRow>,
    pub floor_violations: usize,
    pub uniqueness_violations: usize,
    /// `(m, t)` pairs with fewer sampled zeros than requested rectangles.
    pub short_samples: usize,
}

/// Largest real part searched for zeros of `φ̃_t`.
pub const TILING_X_CAP: f64 = 2187.0;
/// Real-part limit and strip half-height of the fallback search.
pub const TILING_FALLBACK: (f64, f64) = (243.0, 1.0);

/// Rectangle centres for the tiling scans: zeros `3^k w` of the factors
/// `φ̃_k`, `k ≤ m`, with `|Im| ≤ δ`, spread evenly over the real axis. When
/// fewer than `count` exist, zeros of `φ̃_t` in the wider fallback strip are
/// added in order of increasing `|Im|`.
pub fn tiling_zero_sample(t: f64, m: u32, count: usize, delta: f64, cfg: &ZeroConfig) -> Result<Vec<(u32, Complex64)>> {
    let tc = Complex64::new(t, 0.0);
    let base = find_zeros(tc, &Rect::new(0.01, TILING_X_CAP, -delta, delta)?, cfg)?;
    let mut near: Vec<(u32, Complex64)> = Vec::new();
    for k in 0..=m {
        let s = 3f64.powi(k as i32);
        near.extend(base.iter().map(|w| (k, w * s)).filter(|(_, z)| z.im.abs() <= delta));
    }
    near.sort_by(|a, b| a.1.re.total_cmp(&b.1.re).then(a.0.cmp(&b.0)));
    let mut picked = spread_sample(&near, count);
    if picked.len() < count {
        let (x, h) = TILING_FALLBACK;
        let mut wide = find_zeros(tc, &Rect::new(0.01, x, -h, h)?, cfg)?;
        wide.retain(|w| w.im.abs() > delta);
        wide.sort_by(|a, b| a.im.abs().total_cmp(&b.im.abs()).then(a.re.total_cmp(&b.re)));
        picked.extend(wide.into_iter().take(count - picked.len()).map(|w| (0, w)));
    }
    Ok(picked)
}

pub fn tiling_rows(t: f64, m: u32, cfg: &ExperimentConfig) -> Result<Vec<TilingRow>> {
    let zcfg = zero_config(cfg);
    let delta = cfg.tiling_delta;
    let picked = tiling_zero_sample(t, m, cfg.tiling_rects, delta, &zcfg)?;
    let threshold = 3f64.powi(-(m as i32));
    let eps_star = cfg.eps_star();
    let big_m = ExponentLedger::compute(cfg.strip_h, cfg.beta).m;
    picked
        .into_iter()
        .map(|(k, z)| {
            let x0 = z.re;
            let scan = tiling_scan(t, m, x0, delta, cfg.tiling_grid)?;
            let critical = critical_indices(t, m, &scan.rect(), threshold, &zcfg)?;
            let ssv = ssv_scan(t, m, eps_star, (x0 - delta, x0 + delta), big_m, &zcfg)?;
            Ok(TilingRow {
                t,
                m,
                x0,
                delta,
                zero_k: k,
                min_max_cofactor: scan.min_max_cofactor,
                critical,
                ssv_interval_count: ssv.set.len(),
            })
        })
        .collect()
}

pub fn tiling_audit(cfg: &ExperimentConfig) -> Result<TilingAudit> {
    let jobs: Vec<(u32, f64)> = cfg
        .tiling_m
        .iter()
        .flat_map(|&m| tiling_t_grid(m, cfg.tiling_t_count).into_iter().map(move |t| (m, t)))
        .collect();
    let per_job: Vec<Vec<TilingRow>> = jobs
        .par_iter()
        .map(|&(m, t)| tiling_rows(t, m, cfg))
        .collect::<Result<_>>()?;
    let short_samples = per_job.iter().filter(|r| r.len() < cfg.tiling_rects).count();
    let rows: Vec<TilingRow> = per_job.into_iter().flatten().collect();
    Ok(TilingAudit {
        floor_violations: rows.iter().filter(|r| !r.floor_holds()).count(),
        uniqueness_violations: rows.iter().filter(|r| r.critical.len() > 1).count(),
        short_samples,
        rows,
    })
}

/// Random rectangles of half-size `δ` centred on `[1, 3^m]`; counts those
/// with more than one critical index.
pub fn critical_uniqueness_audit(m: u32, trials: usize, cfg: &ExperimentConfig) -> Result<CountAudit> {
    let zcfg = zero_config(cfg);
    let threshold = 3f64.powi(-(m as i32));
    let top = 3f64.powi(m as i32);
    let results: Vec<(f64, usize)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(cfg.seed, stream::CRITICAL, i as u64);
            let t: f64 = rng.gen_range(0.05..0.95);
            let x: f64 = rng.gen_range(1.0..top.max(2.0));
            let rect = Rect::centered(Complex64::new(x, 0.0), cfg.tiling_delta, cfg.tiling_delta)?;
            Ok((t, critical_indices(t, m, &rect, threshold, &zcfg)?.len()))
        })
        .collect::<Result<_>>()?;
    let bad: Vec<&(f64, usize)> = results.iter().filter(|r| r.1 > 1).collect();
    Ok(CountAudit {
        checked: trials,
        violations: bad.len(),
        extreme: results.iter().map(|r| r.1 as f64).fold(0.0, f64::max),
        first_violation: bad.first().map(|r| (r.0, r.1 as f64)),
    })
}

/// Checks `|φ̃_k(z)| ≥ 2` below a small factor `k'` at points built from
/// zeros `w` of `φ̃_t` near the real axis: `z = 3^{k'} w` and its real part.
/// `t = 1/2` is always included; the other `trials - 1` values are random.
/// Only points meeting the precondition are counted.
pub fn domination_audit(trials: usize, cfg: &ExperimentConfig) -> Result<CountAudit> {
    let mut rng = rng_for(cfg.seed, stream::DOMINATION, 0);
    let zcfg = zero_config(cfg);
    let delta = cfg.tiling_delta;
    let mut out = CountAudit {
        checked: 0,
        violations: 0,
        extreme: f64::INFINITY,
        first_violation: None,
    };
    for i in 0..trials {
        let t: f64 = if i == 0 { 0.5 } else { rng.gen_range(0.05..0.95) };
        let base = find_zeros(Complex64::new(t, 0.0), &Rect::new(0.01, 200.0, -delta, delta)?, &zcfg)?;
        for w in base {
            for k_prime in 1..=8u32 {
                let s = 3f64.powi(k_prime as i32);
                for z in [w * s, Complex64::new(w.re * s, 0.0)] {
                    for k_star in 1..=k_prime {
                        match factor_domination(t, z, k_prime, k_star, cfg.domination_c_delta, delta) {
                            DominationCheck::Vacuous => {}
                            DominationCheck::Holds => {
                                out.checked += 1;
                                let least = (k_prime - k_star..k_prime)
                                    .map(|k| factor(t, k, z).norm())
                                    .fold(f64::INFINITY, f64::min);
                                out.extreme = out.extreme.min(least);
                            }
                            DominationCheck::Violated { modulus, .. } => {
                                out.checked += 1;
                                out.violations += 1;
                                out.extreme = out.extreme.min(modulus);
                                out.first_violation.get_or_insert((t, z.re));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityAudit {
    pub checked: usize,
    pub violations: usize,
    pub infeasible: usize,
    pub min_value: f64,
    /// Smallest value seen at `k = k' + 5`, outside the lemma's range.
    pub beyond_range_min: f64,
}

/// `Re(1 + w₁^{3^k} + w₂^{3^k}) ≥ 2` on a `grid × grid` square
/// `|y_j| ≤ c 3^{-k'}`, for `k' = 1..=k_prime_max` and `k = 1..=k'+1`.
pub fn root_stability_audit(grid: usize, k_prime_max: u32, c: f64) -> StabilityAudit {
    let mut out = StabilityAudit {
        checked: 0,
        violations: 0,
        infeasible: 0,
        min_value: f64::INFINITY,
        beyond_range_min: f64::INFINITY,
    };
    for kp in 1..=k_prime_max {
        let bound = c * 3f64.powi(-(kp as i32));
        let ys: Vec<f64> = (0..grid)
            .map(|i| -bound + 2.0 * bound * i as f64 / (grid - 1) as f64)
            .collect();
        for k in 1..=kp + 1 {
            for &y1 in &ys {
                for &y2 in &ys {
                    match root_stability_in_range(y1, y2, k, kp, c) {
                        Ok(v) => {
                            out.checked += 1;
                            out.min_value = out.min_value.min(v);
                            if v < 2.0 {
                                out.violations += 1;
                            }
                        }
                        Err(_) => out.infeasible += 1,
                    }
                }
            }
        }
        for &y1 in &ys {
            for &y2 in &ys {
                if let Ok(v) = root_stability_in_range(y1, y2, kp + 5, kp, c) {
                    out.beyond_range_min = out.beyond_range_min.min(v);
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------- stacking

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StackingRow {
    pub theta: f64,
    pub n: u32,
    pub k: f64,
    pub m: f64,
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StackingMax {
    pub n: u32,
    pub c_hat: f64,
    pub theta: f64,
    pub k: f64,
    pub m: f64,
    pub finite: usize,
    pub vacuous: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackingAudit {
    pub rows: Vec<StackingRow>,
    pub per_n: Vec<StackingMax>,
}

impl StackingAudit {
    /// Largest relative deviation of `Ĉ` from its mean across `N`.
    pub fn spread(&self) -> f64 {
        spread_around_mean(&self.per_n.iter().map(|s| s.c_hat).collect::<Vec<_>>())
    }

    /// `max Ĉ / min Ĉ - 1` across `N`.
    pub fn drift(&self) -> f64 {
        let c: Vec<f64> = self.per_n.iter().map(|s| s.c_hat).collect();
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        hi / lo - 1.0
    }
}

pub fn stacking_audit(system: &SimilaritySystem, cfg: &ExperimentConfig) -> Result<StackingAudit> {
    let mut rows = Vec::new();
    let mut per_n = Vec::new();
    let thetas: Vec<f64> = (0..cfg.stacking_thetas)
        .map(|j| (j as f64 + 0.5) * PI / cfg.stacking_thetas as f64)
        .collect();
    for &n in &cfg.stacking_n {
        let block: Vec<Vec<StackingRow>> = thetas
            .par_iter()
            .map(|&theta| {
                let profile = StackingProfile::new(system, n, theta, cfg.cap())?;
                let mut out = Vec::new();
                for &k in &cfg.stacking_levels {
                    for &m in &cfg.stacking_levels {
                        out.push(StackingRow {
                            theta,
                            n,
                            k,
                            m,
                            ratio: profile.stacking_ratio(k, m).ratio(),
                        });
                    }
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        let block: Vec<StackingRow> = block.into_iter().flatten().collect();
        let mut best = StackingMax {
            n,
            c_hat: 0.0,
            theta: f64::NAN,
            k: f64::NAN,
            m: f64::NAN,
            finite: 0,
            vacuous: 0,
        };
        for r in &block {
            match r.ratio {
                Some(v) => {
                    best.finite += 1;
                    if v > best.c_hat {
                        best.c_hat = v;
                        best.theta = r.theta;
                        best.k = r.k;
                        best.m = r.m;
                    }
                }
                None => best.vacuous += 1,
            }
        }
        per_n.push(best);
        rows.extend(block);
    }
    Ok(StackingAudit { rows, per_n })
}

// ---------------------------------------------------------------- degenerate

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobianAudit {
    pub delta: f64,
    pub angles: usize,
    pub min_jacobian: f64,
    pub max_jacobian: f64,
    pub violations: usize,
    pub applicable: bool,
}

/// `δ ≤ |dt/dθ| ≤ 1/δ` on `angles` midpoint angles of `[0, π)`.
pub fn jacobian_audit(tri: &TriangleConfig, angles: usize) -> JacobianAudit {
    let mut out = JacobianAudit {
        delta: tri.delta,
        angles,
        min_jacobian: f64::INFINITY,
        max_jacobian: 0.0,
        violations: 0,
        applicable: tri.satisfies_side_bound(),
    };
    let slack = 1e-12;
    for j in 0..angles {
        let theta = (j as f64 + 0.5) * PI / angles as f64;
        let jac = theta_to_t(tri, theta).dt_dtheta.abs();
        out.min_jacobian = out.min_jacobian.min(jac);
        out.max_jacobian = out.max_jacobian.max(jac);
        if jac < tri.delta * (1.0 - slack) || jac > (1.0 + slack) / tri.delta {
            out.violations += 1;
        }
    }
    out
}
