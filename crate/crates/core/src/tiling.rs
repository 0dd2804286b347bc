//! Analytic tiling of `Φ(z) = ∏_{k=0}^m φ̃(3^{-k} z)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{inv_pow3, phi_tilde, phi_tilde_dz};
use crate::intervals::UnionOfIntervals;
use crate::zeros::{find_zeros_of, winding_number, Rect, ZeroConfig};
use crate::Complex64;

pub const DEFAULT_DELTA: f64 = 0.1;
pub const DEFAULT_STABILITY_C: f64 = 0.1;
pub const DEFAULT_DOMINATION_C_DELTA: f64 = 0.1;

/// `φ̃_k(z) = φ̃_t(3^{-k} z)`.
pub fn factor(t: f64, k: u32, z: Complex64) -> Complex64 {
    phi_tilde(Complex64::new(t, 0.0), z * inv_pow3(k))
}

pub fn factor_dz(t: f64, k: u32, z: Complex64) -> Complex64 {
    phi_tilde_dz(Complex64::new(t, 0.0), z * inv_pow3(k)) * inv_pow3(k)
}

/// `|φ̃_k(z)|` for `k = 0..=m`.
pub fn factor_moduli(t: f64, m: u32, z: Complex64) -> Vec<f64> {
    (0..=m).map(|k| factor(t, k, z).norm()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cofactor {
    /// `max_{k₀} |Φ_{k₀}(z)|`.
    pub value: f64,
    pub k0: u32,
}

/// Largest cofactor, each formed from prefix and suffix products.
pub fn max_cofactor(t: f64, m: u32, z: Complex64) -> Cofactor {
    cofactor_from_moduli(&factor_moduli(t, m, z))
}

/// `max_{k₀} ∏_{k≠k₀} f_k`.
pub fn cofactor_from_moduli(f: &[f64]) -> Cofactor {
    let n = f.len();
    let mut prefix = vec![1.0; n + 1];
    for k in 0..n {
        prefix[k + 1] = prefix[k] * f[k];
    }
    let mut suffix = vec![1.0; n + 1];
    for k in (0..n).rev() {
        suffix[k] = suffix[k + 1] * f[k];
    }
    let mut best = Cofactor { value: -1.0, k0: 0 };
    for k in 0..n {
        let v = prefix[k] * suffix[k + 1];
        if v > best.value {
            best = Cofactor { value: v, k0: k as u32 };
        }
    }
    best
}

/// Lower bound for `min_{rect} |φ̃_k|`, exact to `tol` when the factor has
/// no zero in the rectangle.
pub fn factor_min_on_rect(t: f64, k: u32, rect: &Rect, tol: f64, cfg: &ZeroConfig) -> Result<f64> {
    let f = |z: Complex64| factor(t, k, z);
    let s = inv_pow3(k);
    let y = rect.im_lo.abs().max(rect.im_hi.abs()) * s;
    let lipschitz = s * (t.abs() * (t.abs() * y).exp() + y.exp());
    let centre = f(rect.center()).norm();
    let reach = lipschitz * 0.5 * rect.diameter();
    if centre - reach > tol.max(0.0) && centre - reach > 0.0 && lipschitz * rect.diameter() < 1.0 {
        // smooth enough that the centre value pins the minimum from below
        return boundary_min(&f, rect, lipschitz, tol, centre - reach);
    }
    match winding_number(&f, rect, cfg) {
        Ok(count) if count > 0 => Ok(0.0),
        Ok(_) => boundary_min(&f, rect, lipschitz, tol, 0.0),
        Err(Error::WindingUnstable { .. }) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// Minimum modulus of a zero-free holomorphic function lies on the boundary.
fn boundary_min<F>(f: &F, rect: &Rect, lipschitz: f64, tol: f64, floor: f64) -> Result<f64>
where
    F: Fn(Complex64) -> Complex64,
{
    let c = rect.corners();
    let perimeter = 2.0 * (rect.width() + rect.height());
    let mut h = (perimeter / 256.0).min(0.01);
    loop {
        let mut sampled = f64::INFINITY;
        for i in 0..4 {
            let (a, b) = (c[i], c[(i + 1) % 4]);
            let count = ((b - a).norm() / h).ceil().max(1.0) as usize;
            for j in 0..=count {
                sampled = sampled.min(f(a + (b - a) * (j as f64 / count as f64)).norm());
            }
        }
        let lower = (sampled - 0.5 * lipschitz * h).max(floor);
        if sampled - lower <= tol || h < 1e-9 {
            return Ok(lower);
        }
        h *= 0.25;
    }
}

/// Does `|φ̃_k|` drop below `threshold` somewhere on `rect`?
pub fn factor_dips_below(t: f64, k: u32, rect: &Rect, threshold: f64, cfg: &ZeroConfig) -> Result<bool> {
    let f = |z: Complex64| factor(t, k, z);
    let s = inv_pow3(k);
    let y = rect.im_lo.abs().max(rect.im_hi.abs()) * s;
    let lipschitz = s * (t.abs() * (t.abs() * y).exp() + y.exp());
    if f(rect.center()).norm() - lipschitz * 0.5 * rect.diameter() >= threshold {
        return Ok(false);
    }
    match winding_number(&f, rect, cfg) {
        Ok(count) if count > 0 => return Ok(true),
        Ok(_) => {}
        Err(Error::WindingUnstable { .. }) => return Ok(true),
        Err(e) => return Err(e),
    }
    let c = rect.corners();
    let perimeter = 2.0 * (rect.width() + rect.height());
    let mut h = (perimeter / 256.0).min(0.01);
    while h >= 1e-12 {
        let mut sampled = f64::INFINITY;
        for i in 0..4 {
            let (a, b) = (c[i], c[(i + 1) % 4]);
            let count = ((b - a).norm() / h).ceil().max(1.0) as usize;
            for j in 0..=count {
                sampled = sampled.min(f(a + (b - a) * (j as f64 / count as f64)).norm());
            }
        }
        if sampled < threshold {
            return Ok(true);
        }
        if sampled - 0.5 * lipschitz * h >= threshold {
            return Ok(false);
        }
        h *= 0.25;
    }
    Ok(true)
}

/// `{k₀ : min_{rect} |φ̃_{k₀}| < threshold}`.
pub fn critical_indices(t: f64, m: u32, rect: &Rect, threshold: f64, cfg: &ZeroConfig) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    for k in 0..=m {
        if factor_dips_below(t, k, rect, threshold, cfg)? {
            out.push(k);
        }
    }
    Ok(out)
}

/// `Re(1 + w₁^{3^k} + w₂^{3^k})` with `|w_j| = e^{y_j}`, `1 + w₁ + w₂ = 0`
/// and `w₁` the perturbation of `e^{2πi/3}`.
pub fn root_stability(y1: f64, y2: f64, k: u32) -> Result<f64> {
    let cos1 = ((2.0 * y2).exp() - 1.0 - (2.0 * y1).exp()) / (2.0 * y1.exp());
    if cos1.abs() > 1.0 {
        return Err(Error::Infeasible(format!(
            "no w with |w1| = e^{y1}, |w2| = e^{y2} and 1 + w1 + w2 = 0"
        )));
    }
    let w1 = Complex64::from_polar(y1.exp(), cos1.acos());
    let w2 = -1.0 - w1;
    let p = 3f64.powi(k as i32);
    let power = |w: Complex64| Complex64::from_polar(w.norm().powf(p), w.arg() * p);
    Ok((1.0 + power(w1) + power(w2)).re)
}

/// `root_stability` with the range precondition `|y_j| ≤ c 3^{-k'}`.
pub fn root_stability_in_range(y1: f64, y2: f64, k: u32, k_prime: u32, c: f64) -> Result<f64> {
    let bound = c * inv_pow3(k_prime);
    if y1.abs() > bound || y2.abs() > bound {
        return Err(Error::Domain(format!("|y| exceeds c 3^-k' = {bound:e}")));
    }
    root_stability(y1, y2, k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DominationCheck {
    /// `|φ̃_{k'}(z)| ≥ cδ 3^{-k*}` or `|Im z| > δ`.
    Vacuous,
    Holds,
    Violated { k: u32, modulus: f64 },
}

/// If `|φ̃_{k'}(z)| < cδ·3^{-k*}`, then `|φ̃_k(z)| ≥ 2` for
/// `k = k'-k*..k'-1`.
pub fn factor_domination(t: f64, z: Complex64, k_prime: u32, k_star: u32, c_delta: f64, delta: f64) -> DominationCheck {
    if z.im.abs() > delta || factor(t, k_prime, z).norm() >= c_delta * inv_pow3(k_star) {
        return DominationCheck::Vacuous;
    }
    for k in k_prime.saturating_sub(k_star)..k_prime {
        let modulus = factor(t, k, z).norm();
        if modulus < 2.0 {
            return DominationCheck::Violated { k, modulus };
        }
    }
    DominationCheck::Holds
}

/// Grid summary over `R = [x0 - δ, x0 + δ] × [-δ, δ]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TilingScan {
    pub m: u32,
    pub t: f64,
    pub x0: f64,
    pub delta: f64,
    /// Points per side.
    pub grid: usize,
    pub min_max_cofactor: f64,
    pub argmin: Complex64,
    /// `k₀` attaining the cofactor maximum at `argmin`.
    pub argmin_k0: u32,
    /// Minimum of `|φ̃_k|` over the grid, per `k`.
    pub factor_minima: Vec<f64>,
    /// Critical indices from the grid minima.
    pub grid_critical: Vec<u32>,
}

impl TilingScan {
    pub fn rect(&self) -> Rect {
        Rect {
            re_lo: self.x0 - self.delta,
            re_hi: self.x0 + self.delta,
            im_lo: -self.delta,
            im_hi: self.delta,
        }
    }
}

/// Scan a `(grid+1)²` lattice of spacing `2δ/grid`.
pub fn tiling_scan(t: f64, m: u32, x0: f64, delta: f64, grid: usize) -> Result<TilingScan> {
    if !(delta > 0.0) || grid < 2 {
        return Err(Error::Domain(format!("delta = {delta}, grid = {grid}")));
    }
    let h = 2.0 * delta / grid as f64;
    let threshold = inv_pow3(m);
    let rows: Vec<(f64, Complex64, u32, Vec<f64>)> = (0..=grid)
        .into_par_iter()
        .map(|j| {
            let y = -delta + j as f64 * h;
            let mut best = (f64::INFINITY, Complex64::new(0.0, 0.0), 0u32);
            let mut minima = vec![f64::INFINITY; m as usize + 1];
            for i in 0..=grid {
                let z = Complex64::new(x0 - delta + i as f64 * h, y);
                let f = factor_moduli(t, m, z);
                for (lo, v) in minima.iter_mut().zip(&f) {
                    *lo = lo.min(*v);
                }
                let cof = cofactor_from_moduli(&f);
                if cof.value < best.0 {
                    best = (cof.value, z, cof.k0);
                }
            }
            (best.0, best.1, best.2, minima)
        })
        .collect();
    let mut min_max_cofactor = f64::INFINITY;
    let mut argmin = Complex64::new(x0, 0.0);
    let mut argmin_k0 = 0;
    let mut factor_minima = vec![f64::INFINITY; m as usize + 1];
    for (v, z, k0, minima) in rows {
        if v < min_max_cofactor {
            min_max_cofactor = v;
            argmin = z;
            argmin_k0 = k0;
        }
        for (lo, v) in factor_minima.iter_mut().zip(minima) {
            *lo = lo.min(v);
        }
    }
    let grid_critical = factor_minima
        .iter()
        .enumerate()
        .filter(|(_, v)| **v < threshold)
        .map(|(k, _)| k as u32)
        .collect();
    Ok(TilingScan {
        m,
        t,
        x0,
        delta,
        grid,
        min_max_cofactor,
        argmin,
        argmin_k0,
        factor_minima,
        grid_critical,
    })
}

/// Zeros of the factors `φ̃_k`, `k = 0..=m`, with real part in
/// `[3^{-m}, min(3^m, x_cap)]` and `|Im| ≤ δ`, tagged with their factor.
pub fn factor_zeros_near_axis(t: f64, m: u32, delta: f64, x_cap: f64, cfg: &ZeroConfig) -> Result<Vec<(u32, Complex64)>> {
    let top = 3f64.powi(m as i32).min(x_cap);
    let lo = inv_pow3(m);
    if top <= lo {
        return Ok(Vec::new());
    }
    let tc = Complex64::new(t, 0.0);
    let rect = Rect::new(lo, top, -delta, delta)?;
    let base = find_zeros_of(&|z| phi_tilde(tc, z), &|z| phi_tilde_dz(tc, z), &rect, cfg)?;
    let mut out = Vec::new();
    for k in 0..=m {
        let s = 3f64.powi(k as i32);
        for z in &base {
            let w = z * s;
            if w.re >= lo && w.re <= top && w.im.abs() <= delta {
                out.push((k, w));
            }
        }
    }
    out.sort_by(|a, b| a.1.re.total_cmp(&b.1.re).then(a.0.cmp(&b.0)));
    Ok(out)
}

/// `count` entries spread evenly through `items`.
pub fn spread_sample<T: Clone>(items: &[T], count: usize) -> Vec<T> {
    if items.len() <= count {
        return items.to_vec();
    }
    (0..count).map(|i| items[i * items.len() / count].clone()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsvReport {
    pub threshold_log: f64,
    pub set: UnionOfIntervals,
    /// Per interval: nearest factor zero and its index.
    pub nearest: Vec<Option<(u32, Complex64, f64)>>,
    /// `C₃ · ε*^{m/M}` with `C₃ = 3^m`.
    pub predicted_radius: f64,
    /// `max dist / predicted_radius`.
    pub c_emp: f64,
    pub contained: bool,
}

fn log_phi(t: f64, m: u32, x: f64) -> f64 {
    let z = Complex64::new(x, 0.0);
    (0..=m).map(|k| factor(t, k, z).norm().ln()).sum()
}

fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn crossing(f: &impl Fn(f64) -> f64, level: f64, mut inside: f64, mut outside: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if f(mid) < level {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    0.5 * (inside + outside)
}

/// `{x ∈ [a, b] : |Φ(x)| < (ε*/3)^m}` on the real axis, with each interval
/// matched to the nearest zero of a factor. `M` sets the predicted radius.
pub fn ssv_scan(t: f64, m: u32, eps_star: f64, x_range: (f64, f64), big_m: u32, cfg: &ZeroConfig) -> Result<SsvReport> {
    let (a, b) = x_range;
    if !(a < b) || !(eps_star > 0.0 && eps_star < 3.0) || big_m == 0 {
        return Err(Error::Domain(format!("ssv_scan: range ({a}, {b}), eps* {eps_star}, M {big_m}")));
    }
    let level = m as f64 * (eps_star / 3.0).ln();
    let f = |x: f64| log_phi(t, m, x);
    let h0 = inv_pow3(m) / 16.0;
    let n = ((b - a) / h0).ceil() as usize;
    let h = (b - a) / n as f64;
    let values: Vec<f64> = (0..=n).into_par_iter().map(|i| f(a + i as f64 * h)).collect();

    let mut raw: Vec<(f64, f64)> = Vec::new();
    // runs of grid points already below the level
    let mut i = 0;
    while i <= n {
        if values[i] < level {
            let start = i;
            while i <= n && values[i] < level {
                i += 1;
            }
            let end = i - 1;
            let lo = if start == 0 { a } else { crossing(&f, level, a + start as f64 * h, a + (start - 1) as f64 * h) };
            let hi = if end == n { b } else { crossing(&f, level, a + end as f64 * h, a + (end + 1) as f64 * h) };
            raw.push((lo, hi));
        } else {
            i += 1;
        }
    }
    // dips between grid points
    for i in 1..n {
        if values[i] <= values[i - 1] && values[i] <= values[i + 1] && values[i] >= level {
            let lo = a + (i - 1) as f64 * h;
            let hi = a + (i + 1) as f64 * h;
            let (xm, fm) = golden_min(&f, lo, hi);
            if fm < level {
                raw.push((crossing(&f, level, xm, lo), crossing(&f, level, xm, hi)));
            }
        }
    }
    for r in raw.iter_mut() {
        if r.1 <= r.0 {
            let mid = 0.5 * (r.0 + r.1);
            *r = (mid.next_down(), mid.next_up());
        }
    }
    let set = UnionOfIntervals::from_intervals(raw, 0.0);

    let predicted_radius = 3f64.powi(m as i32) * eps_star.powf(m as f64 / big_m as f64);
    let mut nearest = Vec::with_capacity(set.len());
    let mut c_emp: f64 = 0.0;
    let mut contained = true;
    for &(lo, hi) in set.intervals() {
        let mid = 0.5 * (lo + hi);
        let reach = predicted_radius.max(hi - lo).max(1e-6);
        let window = Rect::new(mid - 2.0 * reach, mid + 2.0 * reach, -2.0 * reach, 2.0 * reach)?;
        let mut best: Option<(u32, Complex64, f64)> = None;
        for k in 0..=m {
            let zs = find_zeros_of(&|z| factor(t, k, z), &|z| factor_dz(t, k, z), &window, cfg)?;
            for z in zs {
                let d = (z - Complex64::new(lo, 0.0)).norm().max((z - Complex64::new(hi, 0.0)).norm());
                if best.is_none_or(|(_, _, bd)| d < bd) {
                    best = Some((k, z, d));
                }
            }
        }
        match best {
            Some((_, _, d)) => {
                c_emp = c_emp.max(d / predicted_radius);
                if d > predicted_radius {
                    contained = false;
                }
            }
            None => contained = false,
        }
        nearest.push(best);
    }
    Ok(SsvReport {
        threshold_log: level,
        set,
        nearest,
        predicted_radius,
        c_emp,
        contained,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn cofactor_at_origin() {
        for m in 0..6 {
            let cof = max_cofactor(0.3, m, c(0.0));
            assert!((cof.value - 3f64.powi(m as i32)).abs() < 1e-9);
        }
    }

    #[test]
    fn cofactor_at_cube_root_zero() {
        let z = c(4.0 * PI / 3.0);
        for m in 1..=8 {
            let cof = max_cofactor(0.5, m, z);
            assert_eq!(cof.k0, 0);
            assert!(cof.value >= inv_pow3(m));
        }
    }

    #[test]
    fn cofactor_without_division() {
        // matches a naive product away from zeros
        let z = Complex64::new(2.2, 0.05);
        let m = 5;
        let f = factor_moduli(0.37, m, z);
        let full: f64 = f.iter().product();
        let cof = max_cofactor(0.37, m, z);
        let naive = f.iter().map(|v| full / v).fold(0.0, f64::max);
        assert!((cof.value - naive).abs() < 1e-12 * naive);
    }

    #[test]
    fn grid_scan_around_cube_root_zero() {
        let scan = tiling_scan(0.5, 6, 4.0 * PI / 3.0, 0.1, 128).unwrap();
        assert!(scan.min_max_cofactor >= inv_pow3(6));
        assert_eq!(scan.grid_critical, vec![0]);
    }

    #[test]
    fn critical_examples() {
        let cfg = ZeroConfig::default();
        let near = Rect::centered(c(4.0 * PI / 3.0), 0.1, 0.1).unwrap();
        assert_eq!(critical_indices(0.5, 6, &near, inv_pow3(6), &cfg).unwrap(), vec![0]);
        let far = Rect::centered(c(0.5), 0.1, 0.1).unwrap();
        assert!(critical_indices(0.5, 6, &far, inv_pow3(6), &cfg).unwrap().is_empty());
    }

    #[test]
    fn critical_unique_on_random_rects() {
        use rand::{Rng, SeedableRng};
        let cfg = ZeroConfig::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let m = 6;
        for _ in 0..500 {
            let t: f64 = rng.gen();
            if (t - 0.5).abs() < inv_pow3(m) {
                continue;
            }
            let x0 = rng.gen_range(inv_pow3(m)..3f64.powi(m as i32));
            let rect = Rect::centered(c(x0), 0.1, 0.1).unwrap();
            let crit = critical_indices(t, m, &rect, inv_pow3(m), &cfg).unwrap();
            assert!(crit.len() <= 1, "t={t} x0={x0}: {crit:?}");
        }
    }

    #[test]
    fn rect_minimum_agrees_with_grid() {
        let cfg = ZeroConfig::default();
        let rect = Rect::centered(Complex64::new(3.0, 0.0), 0.1, 0.1).unwrap();
        for t in [0.2, 0.45, 0.8] {
            for k in 0..3 {
                let lower = factor_min_on_rect(t, k, &rect, 1e-6, &cfg).unwrap();
                let mut grid: f64 = f64::INFINITY;
                for i in 0..=100 {
                    for j in 0..=100 {
                        let z = Complex64::new(2.9 + 0.002 * i as f64, -0.1 + 0.002 * j as f64);
                        grid = grid.min(factor(t, k, z).norm());
                    }
                }
                assert!(lower <= grid + 1e-12);
                assert!(grid - lower < 1e-3, "t={t} k={k}: {lower} vs {grid}");
            }
        }
    }

    #[test]
    fn root_stability_examples() {
        for k in 1..8 {
            assert!((root_stability(0.0, 0.0, k).unwrap() - 3.0).abs() < 1e-9);
        }
        assert!(root_stability(0.0, 0.0, 0).unwrap().abs() < 1e-12);
        let y = inv_pow3(6);
        assert!(root_stability_in_range(y * 0.1, -y * 0.1, 3, 6, 0.1).unwrap() >= 2.0);
        assert!(root_stability(y, -y, 3).unwrap() >= 2.0);
        assert!(matches!(root_stability(2.0, -2.0, 1), Err(Error::Infeasible(_))));
        assert!(root_stability_in_range(0.5, 0.0, 1, 6, 0.1).is_err());
    }

    #[test]
    fn root_stability_grid_in_range() {
        let c0 = DEFAULT_STABILITY_C;
        for k_prime in [2u32, 4, 6] {
            let bound = c0 * inv_pow3(k_prime);
            for i in 0..=40 {
                for j in 0..=40 {
                    let y1 = -bound + 2.0 * bound * i as f64 / 40.0;
                    let y2 = -bound + 2.0 * bound * j as f64 / 40.0;
                    for k in 1..=k_prime + 1 {
                        assert!(root_stability(y1, y2, k).unwrap() >= 2.0);
                    }
                }
            }
        }
    }

    #[test]
    fn domination_examples() {
        let z = c(27.0 * 4.0 * PI / 3.0);
        assert_eq!(factor_domination(0.5, z, 3, 3, 0.1, 0.1), DominationCheck::Holds);
        assert_eq!(factor_domination(0.5, c(0.0), 3, 3, 0.1, 0.1), DominationCheck::Vacuous);
    }

    #[test]
    fn ssv_near_real_zeros() {
        let cfg = ZeroConfig::default();
        // at ε* = 1e-3 the set is narrower than the floating-point spacing
        let tight = ssv_scan(0.5, 4, 1e-3, (3.0, 12.0), 5, &cfg).unwrap();
        assert!(tight.contained);
        let rep = ssv_scan(0.5, 4, 0.05, (3.0, 12.0), 5, &cfg).unwrap();
        assert!(!rep.set.is_empty());
        assert!(rep.contained, "{rep:?}");
        for n in rep.nearest.iter().flatten() {
            assert!(n.2 <= rep.predicted_radius);
        }
        // 4π/3 and 8π/3 belong to the k = 0 factor
        assert!(rep.nearest.iter().flatten().any(|n| n.0 == 0 && (n.1.re - 4.0 * PI / 3.0).abs() < 1e-8));
    }

    #[test]
    fn ssv_empty_without_critical_index() {
        let cfg = ZeroConfig::default();
        let rep = ssv_scan(0.5, 4, 1e-3, (0.3, 0.7), 5, &cfg).unwrap();
        assert!(rep.set.is_empty());
        let rect = Rect::new(0.3, 0.7, -0.1, 0.1).unwrap();
        assert!(critical_indices(0.5, 4, &rect, inv_pow3(4), &cfg).unwrap().is_empty());
    }

    #[test]
    fn axis_zero_sampling() {
        let cfg = ZeroConfig::default();
        let zs = factor_zeros_near_axis(0.5, 3, 0.1, 60.0, &cfg).unwrap();
        assert!(zs.iter().any(|(k, z)| *k == 0 && (z.re - 4.0 * PI / 3.0).abs() < 1e-9));
        assert!(zs.iter().any(|(k, z)| *k == 1 && (z.re - 4.0 * PI).abs() < 1e-8));
        for (k, z) in &zs {
            assert!(factor(0.5, *k, *z).norm() < 1e-9);
        }
        assert_eq!(spread_sample(&zs, 5).len(), 5.min(zs.len()));
    }
}
