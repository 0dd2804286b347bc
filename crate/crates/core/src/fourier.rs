//! Trinomial symbols, self-similar products, Riesz products and
//! exponential-sum energies.
//!
//! Transforms follow `f̂(x) = ∫ f(s) e^{-isx} ds`, so Plancherel reads
//! `‖f‖² = (2π)⁻¹ ‖f̂‖²`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{cells, GenerationCap, SimilaritySystem};
use crate::projection::{multiplicity, project};
use crate::quadrature::integrate_oscillatory;
use crate::step::StepFunction;
use crate::Complex64;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `3^{-k}` for `k ≥ 0`.
pub fn inv_pow3(k: u32) -> f64 {
    1.0 / 3f64.powi(k as i32)
}

/// `φ_t(z) = (1 + e^{-itz} + e^{-iz}) / 3`.
pub fn phi(t: Complex64, z: Complex64) -> Complex64 {
    phi_tilde(t, z) / 3.0
}

/// `φ̃_t(z) = 1 + e^{-itz} + e^{-iz}`.
pub fn phi_tilde(t: Complex64, z: Complex64) -> Complex64 {
    1.0 + (-I * t * z).exp() + (-I * z).exp()
}

/// `∂φ̃/∂z = -it e^{-itz} - i e^{-iz}`.
pub fn phi_tilde_dz(t: Complex64, z: Complex64) -> Complex64 {
    -I * t * (-I * t * z).exp() - I * (-I * z).exp()
}

/// `∂φ̃/∂t = -iz e^{-itz}`.
pub fn phi_tilde_dt(t: Complex64, z: Complex64) -> Complex64 {
    -I * z * (-I * t * z).exp()
}

pub fn phi_real(t: f64, x: f64) -> Complex64 {
    phi(Complex64::new(t, 0.0), Complex64::new(x, 0.0))
}

/// `x ↦ ∏_{k=k_lo}^{k_hi} φ_t(3^{-k} x)`; empty when `k_lo > k_hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigProduct {
    pub t: Complex64,
    pub k_lo: u32,
    pub k_hi: u32,
}

impl TrigProduct {
    pub fn new(t: Complex64, k_lo: u32, k_hi: u32) -> Self {
        TrigProduct { t, k_lo, k_hi }
    }

    pub fn real(t: f64, k_lo: u32, k_hi: u32) -> Self {
        Self::new(Complex64::new(t, 0.0), k_lo, k_hi)
    }

    /// `ν̂_N = ∏_{k=1}^{N}`.
    pub fn full(t: f64, n: u32) -> Self {
        Self::real(t, 1, n)
    }

    pub fn factor_count(&self) -> u32 {
        (self.k_hi + 1).saturating_sub(self.k_lo)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.k_lo..=self.k_hi).fold(Complex64::new(1.0, 0.0), |acc, k| acc * phi(self.t, z * inv_pow3(k)))
    }

    pub fn eval_real(&self, x: f64) -> Complex64 {
        self.eval(Complex64::new(x, 0.0))
    }
}

pub fn product_eval(p: &TrigProduct, x: f64) -> Complex64 {
    p.eval_real(x)
}

/// The four pieces of `ν̂_n` around the frequency window `[3^{n-m}, 3^n]`.
///
/// `P₂` covers `k ∈ [n-m, n]`, `P₁` the rest, and `P₁` splits at `n-m-ℓ`
/// into a coarse part `P₁♯` and the `ℓ` factors `P₁♭` closest to `P₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductSplit {
    pub p1: TrigProduct,
    pub p2: TrigProduct,
    pub p1_sharp: TrigProduct,
    pub p1_flat: TrigProduct,
}

impl ProductSplit {
    pub fn new(t: f64, n: u32, m: u32, ell: u32) -> Result<Self> {
        if m + ell + 1 > n {
            return Err(Error::Domain(format!("split needs m + ell + 1 <= n (n={n}, m={m}, ell={ell})")));
        }
        let edge = n - m;
        Ok(ProductSplit {
            p1: TrigProduct::real(t, 1, edge - 1),
            p2: TrigProduct::real(t, edge, n),
            p1_sharp: TrigProduct::real(t, 1, edge - ell - 1),
            p1_flat: TrigProduct::real(t, edge - ell, edge - 1),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitValues {
    pub p1: Complex64,
    pub p2: Complex64,
    pub p1_sharp: Complex64,
    pub p1_flat: Complex64,
}

pub fn product_split(t: f64, n: u32, m: u32, ell: u32, x: f64) -> Result<SplitValues> {
    let s = ProductSplit::new(t, n, m, ell)?;
    Ok(SplitValues {
        p1: s.p1.eval_real(x),
        p2: s.p2.eval_real(x),
        p1_sharp: s.p1_sharp.eval_real(x),
        p1_flat: s.p1_flat.eval_real(x),
    })
}

/// `r(x) = (7 + 2 cos x) / 9`.
pub fn riesz_factor(x: f64) -> f64 {
    (7.0 + 2.0 * x.cos()) / 9.0
}

/// `x ↦ ∏_{k=k_lo}^{k_hi} r(3^{-k} x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RieszProduct {
    pub k_lo: u32,
    pub k_hi: u32,
}

impl RieszProduct {
    pub fn new(k_lo: u32, k_hi: u32) -> Result<Self> {
        if k_lo > k_hi {
            return Err(Error::Domain(format!("empty Riesz product [{k_lo}, {k_hi}]")));
        }
        Ok(RieszProduct { k_lo, k_hi })
    }

    /// Same index range as `P₁♭`.
    pub fn for_split(split: &ProductSplit) -> Result<Self> {
        Self::new(split.p1_flat.k_lo, split.p1_flat.k_hi)
    }

    pub fn factor_count(&self) -> u32 {
        self.k_hi - self.k_lo + 1
    }

    pub fn period(&self) -> f64 {
        2.0 * PI * 3f64.powi(self.k_hi as i32)
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.k_lo..=self.k_hi).map(|k| riesz_factor(x * inv_pow3(k))).product()
    }

    /// Highest harmonic of the fundamental `2π / period`.
    pub fn degree(&self) -> u64 {
        (self.k_lo..=self.k_hi).map(|k| 3u64.pow(self.k_hi - k)).sum()
    }
}

pub fn riesz_eval(r: &RieszProduct, x: f64) -> f64 {
    r.eval(x)
}

/// Mean over one period by the equispaced rule with more nodes than twice
/// the degree, which is exact for trigonometric polynomials.
pub fn riesz_period_mean(r: &RieszProduct) -> f64 {
    let nodes = 2 * r.degree() as usize + 2;
    let h = r.period() / nodes as f64;
    (0..nodes).map(|i| r.eval(i as f64 * h)).sum::<f64>() / nodes as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domination {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub const DOMINATION_SLACK: f64 = 1e-12;

/// `|φ_t(x)|² ≤ min(r(x), r(tx))`.
pub fn riesz_domination(t: f64, x: f64) -> Domination {
    let lhs = phi_real(t, x).norm_sqr();
    let rhs = riesz_factor(x).min(riesz_factor(t * x));
    Domination {
        lhs,
        rhs,
        holds: lhs <= rhs + DOMINATION_SLACK,
    }
}

/// `|P₁♭(x)|² ≤ min(R(x), R(tx))` over the index range of `r`.
pub fn riesz_product_domination(t: f64, r: &RieszProduct, x: f64) -> Domination {
    let lhs = TrigProduct::real(t, r.k_lo, r.k_hi).eval_real(x).norm_sqr();
    let rhs = r.eval(x).min(r.eval(t * x));
    Domination {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + DOMINATION_SLACK) + DOMINATION_SLACK,
    }
}

/// `Σ_α e^{-i p_α x}` for the projected centres `p_α` of generation `n`,
/// evaluated as a product over digits.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedFrequencies {
    ratio: f64,
    offsets: Vec<f64>,
    generation: u32,
}

impl ProjectedFrequencies {
    pub fn new(system: &SimilaritySystem, n: u32, theta: f64) -> Self {
        ProjectedFrequencies {
            ratio: system.ratio(),
            offsets: system.centers().iter().map(|&c| project(c, theta)).collect(),
            generation: n,
        }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        let mut scale = 1.0;
        for _ in 0..self.generation {
            let digit: Complex64 = self.offsets.iter().map(|a| Complex64::from_polar(1.0, -a * scale * x)).sum();
            acc *= digit;
            scale *= self.ratio;
        }
        acc
    }

    /// Width of the projected centre set.
    pub fn spread(&self) -> f64 {
        let (lo, hi) = self
            .offsets
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &a| (lo.min(a), hi.max(a)));
        let geometric: f64 = (0..self.generation).map(|k| self.ratio.powi(k as i32)).sum();
        (hi - lo) * geometric
    }
}

/// `χ̂` of the indicator of `[-ρ, ρ]`.
pub fn indicator_transform(rho: f64, x: f64) -> f64 {
    if x.abs() < 1e-8 / rho {
        2.0 * rho * (1.0 - (rho * x).powi(2) / 6.0)
    } else {
        2.0 * (rho * x).sin() / x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlancherelConfig {
    /// Initial truncation `X_max`.
    pub x_max: f64,
    /// Largest truncation tried before giving up.
    pub x_cap: f64,
    /// Allowed tail estimate relative to `‖f‖²`.
    pub tail_tol: f64,
}

impl Default for PlancherelConfig {
    fn default() -> Self {
        PlancherelConfig {
            x_max: 1e4,
            x_cap: 1.6e5,
            tail_tol: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlancherelReport {
    pub lhs: f64,
    pub rhs: f64,
    pub relative_gap: f64,
    pub x_max: f64,
    /// `2D / (πX)` with `D` the number of coincident centre pairs.
    pub tail_estimate: f64,
    /// `4·(#discs)² / (πX)`.
    pub tail_bound: f64,
    pub panels: usize,
}

/// Ordered pairs of discs whose projected centres coincide.
fn coincidences(projections: &mut [f64], eps: f64) -> f64 {
    projections.sort_by(f64::total_cmp);
    let mut total = 0.0;
    let mut i = 0;
    while i < projections.len() {
        let mut j = i + 1;
        while j < projections.len() && projections[j] - projections[i] <= eps {
            j += 1;
        }
        total += ((j - i) * (j - i)) as f64;
        i = j;
    }
    total
}

/// Compare `‖f_{n,θ}‖²` from the sweep with `(2π)⁻¹ ∫_{|x|≤X} |f̂|²`.
pub fn plancherel_check(
    system: &SimilaritySystem,
    n: u32,
    theta: f64,
    config: &PlancherelConfig,
    cap: GenerationCap,
) -> Result<PlancherelReport> {
    let cloud = cells(system, n, cap)?;
    let f: StepFunction = multiplicity(&cloud, theta);
    let lhs = f.l2_squared();
    let mut proj: Vec<f64> = cloud.centers().iter().map(|&z| project(z, theta)).collect();
    let width = f.hull().map_or(1.0, |(a, b)| b - a);
    let d = coincidences(&mut proj, 1e-12 * width);
    let count = cloud.len() as f64;

    let mut x_max = config.x_max;
    let tail_for = |x: f64| 2.0 * d / (PI * x);
    while tail_for(x_max) > config.tail_tol * lhs {
        if x_max * 2.0 > config.x_cap {
            return Err(Error::Truncation {
                tail: tail_for(x_max),
                tol: config.tail_tol * lhs,
                x_max,
            });
        }
        x_max *= 2.0;
    }

    let freq = ProjectedFrequencies::new(system, n, theta);
    let rho = cloud.radius();
    let top = freq.spread() + 2.0 * rho;
    let period = 2.0 * PI / top.max(1.0);
    let integral = integrate_oscillatory(
        |x| (indicator_transform(rho, x) * freq.eval(x)).norm_sqr(),
        0.0,
        x_max,
        period,
        1e-10 * lhs,
    );
    let rhs = integral.value / PI;
    Ok(PlancherelReport {
        lhs,
        rhs,
        relative_gap: (lhs - rhs).abs() / lhs,
        x_max,
        tail_estimate: tail_for(x_max),
        tail_bound: 4.0 * count * count / (PI * x_max),
        panels: integral.panels,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct P1Energy {
    pub energy: f64,
    pub ratio_to_3m: f64,
    pub panels: usize,
}

/// `∫_{3^{n-m}}^{3^n} |P₁(x)|² dx`.
pub fn p1_energy(t: f64, n: u32, m: u32) -> Result<P1Energy> {
    if m > n {
        return Err(Error::Domain(format!("m = {m} > n = {n}")));
    }
    let p1 = TrigProduct::real(t, 1, (n - m).saturating_sub(1));
    let lo = 3f64.powi((n - m) as i32);
    let hi = 3f64.powi(n as i32);
    let top = t.abs().max(1.0) * 0.5;
    let integral = integrate_oscillatory(|x| p1.eval_real(x).norm_sqr(), lo, hi, 2.0 * PI / top, 1e-9 * (hi - lo));
    Ok(P1Energy {
        energy: integral.value,
        ratio_to_3m: integral.value / 3f64.powi(m as i32),
        panels: integral.panels,
    })
}

/// Frequencies `α_j` with unimodular coefficients `c_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencySet {
    frequencies: Vec<f64>,
    coefficients: Vec<Complex64>,
}

impl FrequencySet {
    pub fn new(frequencies: Vec<f64>, coefficients: Vec<Complex64>) -> Result<Self> {
        if frequencies.is_empty() {
            return Err(Error::Domain("empty frequency set".into()));
        }
        if frequencies.len() != coefficients.len() {
            return Err(Error::Domain(format!(
                "{} frequencies but {} coefficients",
                frequencies.len(),
                coefficients.len()
            )));
        }
        if let Some(c) = coefficients.iter().find(|c| (c.norm() - 1.0).abs() > 1e-12) {
            return Err(Error::Domain(format!("coefficient {c} is not unimodular")));
        }
        if let Some(a) = frequencies.iter().find(|a| !a.is_finite()) {
            return Err(Error::Domain(format!("frequency {a} is not finite")));
        }
        Ok(FrequencySet {
            frequencies,
            coefficients,
        })
    }

    pub fn unit(frequencies: Vec<f64>) -> Result<Self> {
        let c = vec![Complex64::new(1.0, 0.0); frequencies.len()];
        Self::new(frequencies, c)
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }
}

/// `∫_0^1 e^{idy} dy`.
pub fn kappa(d: f64) -> Complex64 {
    if d.abs() < 1e-4 {
        Complex64::new(1.0 - d * d / 6.0, d / 2.0 - d * d * d / 24.0)
    } else {
        ((I * d).exp() - 1.0) / (I * d)
    }
}

/// `∫_0^1 |Σ c_j e^{iα_j y}|² dy` in closed form.
pub fn exp_sum_energy(fs: &FrequencySet) -> f64 {
    let a = &fs.frequencies;
    let c = &fs.coefficients;
    let mut total = 0.0;
    for j in 0..a.len() {
        for jj in 0..a.len() {
            total += (c[j] * c[jj].conj() * kappa(a[j] - a[jj])).re;
        }
    }
    total
}

/// `∫ (Σ_j χ_{[α_j - h, α_j + h]})²`.
pub fn overlap_energy(fs: &FrequencySet, half_width: f64) -> f64 {
    StepFunction::from_intervals(fs.frequencies.iter().map(|&a| (a - half_width, a + half_width)), 0.0).l2_squared()
}

pub fn cetsq_ratio(fs: &FrequencySet) -> f64 {
    exp_sum_energy(fs) / overlap_energy(fs, 1.0)
}

/// `max_I #(A ∩ I)` over closed unit intervals `I`.
pub fn max_unit_interval_count(fs: &FrequencySet) -> usize {
    let mut a = fs.frequencies.clone();
    a.sort_by(f64::total_cmp);
    let mut best = 0;
    let mut hi = 0;
    for lo in 0..a.len() {
        while hi < a.len() && a[hi] - a[lo] <= 1.0 {
            hi += 1;
        }
        best = best.max(hi - lo);
    }
    best
}

/// `energy / (k · max_I #(A ∩ I))`.
pub fn cet_ratio(fs: &FrequencySet) -> f64 {
    exp_sum_energy(fs) / (fs.len() * max_unit_interval_count(fs)) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn phi_examples() {
        for t in [0.0, 0.3, 1.0, 2.5] {
            assert_eq!(phi(c(t), c(0.0)), c(1.0));
        }
        assert!(phi(c(0.5), c(4.0 * PI / 3.0)).norm() < 1e-15);
        assert!((phi(c(1.0), c(PI)) - c(-1.0 / 3.0)).norm() < 1e-15);
    }

    #[test]
    fn phi_derivatives_match_differences() {
        let t = Complex64::new(0.4, 0.01);
        let z = Complex64::new(2.3, -0.2);
        let h = 1e-6;
        let dz = (phi_tilde(t, z + h) - phi_tilde(t, z - h)) / (2.0 * h);
        let dt = (phi_tilde(t + h, z) - phi_tilde(t - h, z)) / (2.0 * h);
        assert!((dz - phi_tilde_dz(t, z)).norm() < 1e-8);
        assert!((dt - phi_tilde_dt(t, z)).norm() < 1e-8);
    }

    #[test]
    fn split_examples() {
        let s = product_split(0.37, 6, 2, 2, 0.0).unwrap();
        for v in [s.p1, s.p2, s.p1_sharp, s.p1_flat] {
            assert_eq!(v, c(1.0));
        }
        let x = 100.0;
        let s = product_split(0.5, 6, 2, 2, x).unwrap();
        let full = TrigProduct::full(0.5, 6).eval_real(x);
        assert!((s.p1 * s.p2 - full).norm() <= 1e-12 * full.norm().max(1e-300));
        assert!(product_split(0.5, 4, 2, 2, x).is_err());
    }

    #[test]
    fn split_ranges_partition() {
        let s = ProductSplit::new(0.2, 9, 3, 2).unwrap();
        assert_eq!((s.p1.k_lo, s.p1.k_hi), (1, 5));
        assert_eq!((s.p2.k_lo, s.p2.k_hi), (6, 9));
        assert_eq!((s.p1_sharp.k_lo, s.p1_sharp.k_hi), (1, 3));
        assert_eq!((s.p1_flat.k_lo, s.p1_flat.k_hi), (4, 5));
        assert_eq!(s.p1_flat.factor_count(), 2);
    }

    #[test]
    fn product_modulus_bounded() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100_000 {
            let t: f64 = rng.gen();
            let x: f64 = rng.gen_range(-1e4..1e4);
            let n = rng.gen_range(1..12);
            assert!(TrigProduct::full(t, n).eval_real(x).norm() <= 1.0 + 1e-14);
        }
    }

    #[test]
    fn functional_equation_by_index_shift() {
        let x = 17.3;
        let t = 0.61;
        let n = 7;
        let lhs = TrigProduct::full(t, n).eval_real(x);
        let rhs = phi_real(t, x / 3.0) * TrigProduct::real(t, 2, n).eval_real(x);
        assert!((lhs - rhs).norm() < 1e-14);
        // ∏_{k=2}^{N} φ(3^{-k}x) = ν̂_{N-1}(x/3)
        let shifted = TrigProduct::full(t, n - 1).eval_real(x / 3.0);
        assert!((TrigProduct::real(t, 2, n).eval_real(x) - shifted).norm() < 1e-14);
    }

    #[test]
    fn riesz_examples() {
        assert_eq!(riesz_factor(0.0), 1.0);
        assert!((riesz_factor(PI) - 5.0 / 9.0).abs() < 1e-16);
        let one = RieszProduct::new(0, 0).unwrap();
        assert!((riesz_period_mean(&one) - 7.0 / 9.0).abs() < 1e-15);
        assert!(RieszProduct::new(3, 2).is_err());
    }

    fn gauss_panels_mean(r: &RieszProduct) -> f64 {
        // independent oracle: 8-point Gauss panels much finer than the top harmonic
        let panels = 64 * r.degree() as usize;
        let h = r.period() / panels as f64;
        let x = [
            0.1834346424956498, 0.525532409916329, 0.7966664774136267, 0.9602898564975363,
        ];
        let w = [
            0.362683783378362, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763,
        ];
        let mut total = 0.0;
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * h;
            for (xi, wi) in x.iter().zip(w) {
                total += wi * (r.eval(mid + 0.5 * h * xi) + r.eval(mid - 0.5 * h * xi));
            }
        }
        total * 0.5 * h / r.period()
    }

    #[test]
    fn riesz_period_means() {
        for ell in 1..=6u32 {
            let r = RieszProduct::new(4, 4 + ell - 1).unwrap();
            let want = (7.0f64 / 9.0).powi(ell as i32);
            let got = riesz_period_mean(&r);
            assert!(((got - want) / want).abs() < 1e-12, "ell={ell}: {got}");
            if ell <= 5 {
                assert!(((gauss_panels_mean(&r) - want) / want).abs() < 1e-6);
            }
        }
        assert!(((7.0f64 / 9.0).powi(5) - 16807.0 / 59049.0).abs() < 1e-16);
    }

    #[test]
    fn riesz_periodic() {
        let r = RieszProduct::new(2, 5).unwrap();
        for x in [0.0, 1.3, 77.0] {
            assert!((r.eval(x + r.period()) - r.eval(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn domination_examples() {
        let d = riesz_domination(0.3, 0.0);
        assert_eq!((d.lhs, d.rhs), (1.0, 1.0));
        assert!(d.holds);
        let d = riesz_domination(0.5, 4.0 * PI / 3.0);
        assert!(d.lhs < 1e-30 && d.holds);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let r = RieszProduct::new(3, 6).unwrap();
        for _ in 0..20_000 {
            let t: f64 = rng.gen();
            let x: f64 = rng.gen_range(-1e4..1e4);
            assert!(riesz_domination(t, x).holds);
            assert!(riesz_product_domination(t, &r, x).holds);
        }
    }

    #[test]
    fn plancherel_unit_disc() {
        let cfg = PlancherelConfig::default();
        let rep = plancherel_check(&SimilaritySystem::gasket(), 0, 0.3, &cfg, GenerationCap::default()).unwrap();
        assert_eq!(rep.lhs, 2.0);
        assert!(rep.relative_gap < 0.01, "{rep:?}");
        let wider = PlancherelConfig {
            x_max: 2e4,
            ..cfg
        };
        let rep2 = plancherel_check(&SimilaritySystem::gasket(), 0, 0.3, &wider, GenerationCap::default()).unwrap();
        assert!(rep2.relative_gap < rep.relative_gap);
    }

    #[test]
    fn plancherel_generation_three() {
        let rep = plancherel_check(
            &SimilaritySystem::gasket(),
            3,
            0.4,
            &PlancherelConfig::default(),
            GenerationCap::default(),
        )
        .unwrap();
        assert!(rep.relative_gap < 0.02, "{rep:?}");
        assert!(rep.tail_estimate <= rep.tail_bound);
    }

    #[test]
    fn plancherel_truncation_failure() {
        let cfg = PlancherelConfig {
            x_max: 10.0,
            x_cap: 20.0,
            tail_tol: 1e-6,
        };
        let err = plancherel_check(&SimilaritySystem::gasket(), 1, 0.4, &cfg, GenerationCap::default()).unwrap_err();
        assert!(matches!(err, Error::Truncation { .. }));
    }

    #[test]
    fn projected_frequencies_match_direct_sum() {
        let sys = SimilaritySystem::gasket();
        let theta = 0.77;
        let cloud = cells(&sys, 3, GenerationCap::default()).unwrap();
        let f = ProjectedFrequencies::new(&sys, 3, theta);
        for x in [0.0, 1.5, 40.0, -333.0] {
            let direct: Complex64 = cloud
                .centers()
                .iter()
                .map(|&z| Complex64::from_polar(1.0, -project(z, theta) * x))
                .sum();
            assert!((direct - f.eval(x)).norm() < 1e-10);
        }
    }

    #[test]
    fn p1_energy_empty_product() {
        let e = p1_energy(0.3, 4, 4).unwrap();
        assert!((e.energy - (81.0 - 1.0)).abs() < 1e-9);
        assert!(p1_energy(0.3, 2, 3).is_err());
    }

    #[test]
    fn cetsq_examples() {
        let one = FrequencySet::unit(vec![3.5]).unwrap();
        assert_eq!(exp_sum_energy(&one), 1.0);
        assert_eq!(overlap_energy(&one, 1.0), 2.0);
        assert_eq!(cetsq_ratio(&one), 0.5);
        for k in [2usize, 5, 40] {
            let fs = FrequencySet::unit(vec![7.25; k]).unwrap();
            let kk = (k * k) as f64;
            assert_eq!(exp_sum_energy(&fs), kk);
            assert_eq!(overlap_energy(&fs, 1.0), 2.0 * kk);
            assert_eq!(cetsq_ratio(&fs), 0.5);
        }
        assert!(FrequencySet::unit(vec![]).is_err());
        assert!(FrequencySet::new(vec![1.0], vec![c(2.0)]).is_err());
    }

    #[test]
    fn unit_interval_count() {
        let fs = FrequencySet::unit(vec![0.0, 0.5, 1.0, 1.2, 5.0]).unwrap();
        assert_eq!(max_unit_interval_count(&fs), 3);
    }

    fn energy_by_quadrature(fs: &FrequencySet) -> f64 {
        let n = 20_000;
        let h = 1.0 / n as f64;
        let mut total = 0.0;
        for i in 0..=n {
            let y = i as f64 * h;
            let s: Complex64 = fs
                .frequencies()
                .iter()
                .zip(fs.coefficients())
                .map(|(a, c)| c * Complex64::from_polar(1.0, a * y))
                .sum();
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            total += w * s.norm_sqr();
        }
        total * h
    }

    proptest! {
        #[test]
        fn split_identities(t in 0.0f64..1.0, x in -1e4f64..1e4, n in 3u32..14, m in 0u32..5, ell in 0u32..5) {
            prop_assume!(m + ell < n);
            let s = product_split(t, n, m, ell, x).unwrap();
            let full = TrigProduct::full(t, n).eval_real(x);
            let scale = full.norm().max(1e-300);
            prop_assert!((s.p1 * s.p2 - full).norm() <= 1e-12 * scale + 1e-300);
            prop_assert!((s.p1_sharp * s.p1_flat - s.p1).norm() <= 1e-12 * s.p1.norm() + 1e-300);
        }

        #[test]
        fn riesz_bounds(x in -1e5f64..1e5, lo in 0u32..6, len in 1u32..6) {
            let r = RieszProduct::new(lo, lo + len - 1).unwrap();
            let v = r.eval(x);
            prop_assert!(v <= 1.0 + 1e-15);
            prop_assert!(v >= (5.0f64 / 9.0).powi(len as i32) * (1.0 - 1e-12));
        }

        #[test]
        fn closed_form_energy_matches_quadrature(
            freqs in proptest::collection::vec(0.0f64..20.0, 1..8),
            phases in proptest::collection::vec(0.0f64..6.3, 8),
        ) {
            let coeffs = freqs.iter().zip(&phases).map(|(_, p)| Complex64::from_polar(1.0, *p)).collect();
            let fs = FrequencySet::new(freqs, coeffs).unwrap();
            let exact = exp_sum_energy(&fs);
            prop_assert!((exact - energy_by_quadrature(&fs)).abs() < 1e-6 * (1.0 + exact));
        }

        #[test]
        fn overlap_matches_pairwise(freqs in proptest::collection::vec(0.0f64..30.0, 1..40)) {
            let fs = FrequencySet::unit(freqs.clone()).unwrap();
            let brute: f64 = freqs.iter().flat_map(|a| freqs.iter().map(move |b| (2.0 - (a - b).abs()).max(0.0))).sum();
            prop_assert!((overlap_energy(&fs, 1.0) - brute).abs() < 1e-9 * brute);
        }
    }
}
