//! Complex zeros of `φ̃_t`, branch points, continuation in `t`, and
//! Blaschke-type counting.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{phi_tilde, phi_tilde_dt, phi_tilde_dz};
use crate::Complex64;

/// Default strip half-height.
pub const STRIP_H: f64 = 2.4;

/// Axis-aligned rectangle `[re_lo, re_hi] × [im_lo, im_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub re_lo: f64,
    pub re_hi: f64,
    pub im_lo: f64,
    pub im_hi: f64,
}

impl Rect {
    pub fn new(re_lo: f64, re_hi: f64, im_lo: f64, im_hi: f64) -> Result<Self> {
        if !(re_lo < re_hi && im_lo < im_hi) || ![re_lo, re_hi, im_lo, im_hi].iter().all(|v| v.is_finite()) {
            return Err(Error::Domain(format!(
                "empty rectangle [{re_lo}, {re_hi}] x [{im_lo}, {im_hi}]"
            )));
        }
        Ok(Rect {
            re_lo,
            re_hi,
            im_lo,
            im_hi,
        })
    }

    pub fn centered(center: Complex64, half_re: f64, half_im: f64) -> Result<Self> {
        Self::new(center.re - half_re, center.re + half_re, center.im - half_im, center.im + half_im)
    }

    /// `[3^{-m}, 3^m]` thickened by `factor·3^{-m}`; `factor = 1` gives the
    /// band `Q̃`, `factor = 2` gives `R̃`.
    pub fn band(m: u32, factor: f64) -> Self {
        let r = factor * 3f64.powi(-(m as i32));
        let lo = 3f64.powi(-(m as i32));
        let hi = 3f64.powi(m as i32);
        Rect {
            re_lo: lo - r,
            re_hi: hi + r,
            im_lo: -r,
            im_hi: r,
        }
    }

    pub fn width(&self) -> f64 {
        self.re_hi - self.re_lo
    }

    pub fn height(&self) -> f64 {
        self.im_hi - self.im_lo
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re_lo + self.re_hi), 0.5 * (self.im_lo + self.im_hi))
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_lo && z.re <= self.re_hi && z.im >= self.im_lo && z.im <= self.im_hi
    }

    pub fn inflate(&self, by: f64) -> Self {
        Rect {
            re_lo: self.re_lo - by,
            re_hi: self.re_hi + by,
            im_lo: self.im_lo - by,
            im_hi: self.im_hi + by,
        }
    }

    pub fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_lo, self.im_lo),
            Complex64::new(self.re_hi, self.im_lo),
            Complex64::new(self.re_hi, self.im_hi),
            Complex64::new(self.re_lo, self.im_hi),
        ]
    }

    /// Split at fraction `at` of each direction that is not much shorter
    /// than the other.
    pub fn split(&self, at: f64) -> Vec<Rect> {
        let xs = self.re_lo + at * self.width();
        let ys = self.im_lo + at * self.height();
        let wide = self.width() > 2.0 * self.height();
        let tall = self.height() > 2.0 * self.width();
        if wide {
            vec![
                Rect { re_hi: xs, ..*self },
                Rect { re_lo: xs, ..*self },
            ]
        } else if tall {
            vec![
                Rect { im_hi: ys, ..*self },
                Rect { im_lo: ys, ..*self },
            ]
        } else {
            vec![
                Rect { re_hi: xs, im_hi: ys, ..*self },
                Rect { re_lo: xs, im_hi: ys, ..*self },
                Rect { re_hi: xs, im_lo: ys, ..*self },
                Rect { re_lo: xs, im_lo: ys, ..*self },
            ]
        }
    }

    fn unstable(&self) -> Error {
        Error::WindingUnstable {
            re_lo: self.re_lo,
            re_hi: self.re_hi,
            im_lo: self.im_lo,
            im_hi: self.im_hi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroConfig {
    pub residual_tol: f64,
    /// Initial edge sampling step.
    pub edge_step: f64,
    /// Largest argument increment accepted between neighbouring samples.
    pub max_turn: f64,
    /// Largest distance from an integer accepted when snapping.
    pub snap: f64,
    /// Boxes smaller than this are not split further.
    pub min_box: f64,
    /// `|f|` below this on a boundary makes the count unstable.
    pub boundary_floor: f64,
    pub max_bisections: u32,
    pub strip_h: f64,
}

impl Default for ZeroConfig {
    fn default() -> Self {
        ZeroConfig {
            residual_tol: 1e-10,
            edge_step: 0.05,
            max_turn: PI / 3.0,
            snap: 0.25,
            min_box: 1e-9,
            boundary_floor: 1e-9,
            max_bisections: 40,
            strip_h: STRIP_H,
        }
    }
}

const SPLIT_OFFSETS: [f64; 6] = [0.0, 0.0173, -0.0291, 0.0437, -0.0619, 0.0811];

fn principal_turn(to: Complex64, from: Complex64) -> f64 {
    (to / from).arg()
}

struct Tracker<'a, F> {
    f: &'a F,
    cfg: &'a ZeroConfig,
}

impl<F: Fn(Complex64) -> Complex64> Tracker<'_, F> {
    fn value(&self, z: Complex64) -> Option<Complex64> {
        let v = (self.f)(z);
        (v.is_finite() && v.norm() >= self.cfg.boundary_floor).then_some(v)
    }

    /// Argument increment of `f` along the segment `a → b`.
    fn segment(&self, a: Complex64, b: Complex64, fa: Complex64, fb: Complex64, depth: u32) -> Option<f64> {
        let m = 0.5 * (a + b);
        let fm = self.value(m)?;
        let whole = principal_turn(fb, fa);
        let d1 = principal_turn(fm, fa);
        let d2 = principal_turn(fb, fm);
        let lim = self.cfg.max_turn;
        if whole.abs() <= lim && d1.abs() <= lim && d2.abs() <= lim && (d1 + d2 - whole).abs() < 1e-9 {
            return Some(d1 + d2);
        }
        if depth == 0 {
            return None;
        }
        Some(self.segment(a, m, fa, fm, depth - 1)? + self.segment(m, b, fm, fb, depth - 1)?)
    }

    fn polyline(&self, points: &[Complex64]) -> Option<f64> {
        let mut total = 0.0;
        let mut prev = self.value(points[0])?;
        for w in points.windows(2) {
            let next = self.value(w[1])?;
            total += self.segment(w[0], w[1], prev, next, self.cfg.max_bisections)?;
            prev = next;
        }
        Some(total)
    }

    fn snap(&self, total: f64) -> Option<i64> {
        let turns = total / (2.0 * PI);
        let n = turns.round();
        ((turns - n).abs() <= self.cfg.snap).then_some(n as i64)
    }
}

fn edge_points(a: Complex64, b: Complex64, step: f64) -> Vec<Complex64> {
    let count = ((b - a).norm() / step).ceil().max(1.0) as usize;
    (0..=count).map(|i| a + (b - a) * (i as f64 / count as f64)).collect()
}

/// Zeros of `f` inside `rect` counted with multiplicity by the argument
/// principle.
pub fn winding_number<F>(f: &F, rect: &Rect, cfg: &ZeroConfig) -> Result<i64>
where
    F: Fn(Complex64) -> Complex64,
{
    let tracker = Tracker { f, cfg };
    let c = rect.corners();
    let mut total = 0.0;
    for i in 0..4 {
        let pts = edge_points(c[i], c[(i + 1) % 4], cfg.edge_step);
        total += tracker.polyline(&pts).ok_or_else(|| rect.unstable())?;
    }
    tracker.snap(total).ok_or_else(|| rect.unstable())
}

/// Zeros of `f` in the open disc `|z - center| < radius`.
pub fn winding_number_disc<F>(f: &F, center: Complex64, radius: f64, cfg: &ZeroConfig) -> Result<i64>
where
    F: Fn(Complex64) -> Complex64,
{
    let tracker = Tracker { f, cfg };
    let count = ((2.0 * PI * radius / cfg.edge_step).ceil() as usize).max(64);
    let pts: Vec<Complex64> = (0..=count)
        .map(|i| center + Complex64::from_polar(radius, 2.0 * PI * i as f64 / count as f64))
        .collect();
    let unstable = || Error::WindingUnstable {
        re_lo: center.re - radius,
        re_hi: center.re + radius,
        im_lo: center.im - radius,
        im_hi: center.im + radius,
    };
    let total = tracker.polyline(&pts).ok_or_else(unstable)?;
    tracker.snap(total).ok_or_else(unstable)
}

/// Newton iteration from `z`; `None` if it does not reach `residual_tol`.
pub fn newton<F, D>(f: &F, df: &D, mut z: Complex64, residual_tol: f64, max_iter: u32) -> Option<Complex64>
where
    F: Fn(Complex64) -> Complex64,
    D: Fn(Complex64) -> Complex64,
{
    for _ in 0..max_iter {
        let v = f(z);
        let d = df(z);
        if !v.is_finite() || !d.is_finite() || d.norm() == 0.0 {
            return None;
        }
        let step = v / d;
        z -= step;
        if step.norm() <= 1e-15 * z.norm().max(1.0) {
            break;
        }
    }
    (f(z).norm() < residual_tol).then_some(z)
}

fn search<F, D>(f: &F, df: &D, rect: Rect, count: i64, cfg: &ZeroConfig, out: &mut Vec<Complex64>) -> Result<()>
where
    F: Fn(Complex64) -> Complex64,
    D: Fn(Complex64) -> Complex64,
{
    if count <= 0 {
        return Ok(());
    }
    if count == 1 && rect.diameter() <= 0.5 {
        if let Some(z) = newton(f, df, rect.center(), cfg.residual_tol, 60) {
            if rect.inflate(1e-12 * rect.diameter().max(1.0)).contains(z) {
                out.push(z);
                return Ok(());
            }
        }
    }
    if rect.diameter() < cfg.min_box {
        let z = newton(f, df, rect.center(), cfg.residual_tol, 60).unwrap_or(rect.center());
        if f(z).norm() >= cfg.residual_tol {
            return Err(Error::Domain(format!("zero cluster at {z} did not converge")));
        }
        out.extend(std::iter::repeat_n(z, count as usize));
        return Ok(());
    }
    for offset in SPLIT_OFFSETS {
        let children = rect.split(0.5 + offset);
        let counts: Result<Vec<i64>> = children.iter().map(|c| winding_number(f, c, cfg)).collect();
        match counts {
            Ok(cs) if cs.iter().sum::<i64>() == count && cs.iter().all(|&c| c >= 0) => {
                for (child, c) in children.into_iter().zip(cs) {
                    search(f, df, child, c, cfg, out)?;
                }
                return Ok(());
            }
            _ => continue,
        }
    }
    Err(rect.unstable())
}

/// All zeros of a holomorphic `f` in `rect`, refined by Newton.
pub fn find_zeros_of<F, D>(f: &F, df: &D, rect: &Rect, cfg: &ZeroConfig) -> Result<Vec<Complex64>>
where
    F: Fn(Complex64) -> Complex64,
    D: Fn(Complex64) -> Complex64,
{
    let (rect, count) = match winding_number(f, rect, cfg) {
        Ok(c) => (*rect, c),
        Err(Error::WindingUnstable { .. }) => {
            let wider = rect.inflate(1e-6);
            (wider, winding_number(f, &wider, cfg)?)
        }
        Err(e) => return Err(e),
    };
    let mut out = Vec::with_capacity(count.max(0) as usize);
    search(f, df, rect, count, cfg, &mut out)?;
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(out)
}

/// Zeros of `φ̃_t` in `rect`.
pub fn find_zeros(t: Complex64, rect: &Rect, cfg: &ZeroConfig) -> Result<Vec<Complex64>> {
    if rect.height() > 2.0 * cfg.strip_h {
        return Err(Error::Domain(format!(
            "rectangle height {} exceeds 2H = {}",
            rect.height(),
            2.0 * cfg.strip_h
        )));
    }
    find_zeros_of(&|z| phi_tilde(t, z), &|z| phi_tilde_dz(t, z), rect, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchCandidate {
    pub t: Complex64,
    pub z: Complex64,
    /// `|φ̃_t(z)|`.
    pub residual: f64,
    /// `|∂_z φ̃_t(z)|`.
    pub derivative_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchConfig {
    /// Branches `z_k` with `|k| ≤ k_max` are seeded.
    pub k_max: i64,
    /// Largest `|t* - t|` accepted after polishing.
    pub radius: f64,
    pub residual_tol: f64,
}

impl Default for BranchConfig {
    fn default() -> Self {
        BranchConfig {
            k_max: 40,
            radius: 0.05,
            residual_tol: 1e-10,
        }
    }
}

/// Simultaneous zeros of `φ̃_t` and `∂_z φ̃_t`.
///
/// From the system `e^{-iz} = t/(1-t)`, `e^{-itz} = 1/(t-1)`. For real
/// `t ∈ (0, 1)` the moduli force `t^t (1-t)^{1-t} = 1`, which never holds,
/// so the result is empty. For complex `t` each seed
/// `z_k = i Log(t/(1-t)) + 2πk` is polished jointly in `(t, z)` and kept if
/// the polished parameter stays within `radius` of `t`.
pub fn branch_candidates(t: Complex64, cfg: &BranchConfig) -> Result<Vec<BranchCandidate>> {
    if t == Complex64::new(1.0, 0.0) || t == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain(format!("t = {t} makes the branch system singular")));
    }
    let ratio = t / (1.0 - t);
    if t.im == 0.0 {
        let s = t.re;
        if s > 0.0 && s < 1.0 {
            return Ok(Vec::new());
        }
        let modulus = ratio.norm().powf(s) * (s - 1.0).abs();
        if (modulus - 1.0).abs() > 1e-12 {
            return Ok(Vec::new());
        }
    }
    let i = Complex64::new(0.0, 1.0);
    let base = i * ratio.ln();
    let mut out: Vec<BranchCandidate> = Vec::new();
    for k in -cfg.k_max..=cfg.k_max {
        let z0 = base + 2.0 * PI * k as f64;
        if let Some((ts, zs)) = polish_branch(t, z0) {
            if (ts - t).norm() > cfg.radius {
                continue;
            }
            let residual = phi_tilde(ts, zs).norm();
            let derivative_residual = phi_tilde_dz(ts, zs).norm();
            if residual < cfg.residual_tol && derivative_residual < cfg.residual_tol {
                let dup = out.iter().any(|c| (c.t - ts).norm() < 1e-9 && (c.z - zs).norm() < 1e-9);
                if !dup {
                    out.push(BranchCandidate {
                        t: ts,
                        z: zs,
                        residual,
                        derivative_residual,
                    });
                }
            }
        }
    }
    Ok(out)
}

fn polish_branch(mut t: Complex64, mut z: Complex64) -> Option<(Complex64, Complex64)> {
    let i = Complex64::new(0.0, 1.0);
    for _ in 0..80 {
        let a = (-i * t * z).exp();
        let b = (-i * z).exp();
        let f = 1.0 + a + b;
        let g = -i * (t * a + b);
        // ∂f/∂t, ∂f/∂z, ∂g/∂t, ∂g/∂z
        let ft = -i * z * a;
        let fz = g;
        let gt = -i * a - t * z * a;
        let gz = -t * t * a - b;
        let det = ft * gz - fz * gt;
        if !det.is_finite() || det.norm() == 0.0 {
            return None;
        }
        let dt = (f * gz - fz * g) / det;
        let dz = (ft * g - f * gt) / det;
        t -= dt;
        z -= dz;
        if !t.is_finite() || !z.is_finite() {
            return None;
        }
        if dt.norm() + dz.norm() < 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    Some((t, z))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub t: f64,
    pub lambda: Complex64,
    pub dlambda: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TruncationReason {
    NearBranch,
    LeftStrip,
    StepUnderflow,
}

impl TruncationReason {
    pub fn as_str(self) -> &'static str {
        match self {
            TruncationReason::NearBranch => "near-branch",
            TruncationReason::LeftStrip => "left-strip",
            TruncationReason::StepUnderflow => "step-underflow",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroTrace {
    pub samples: Vec<TraceSample>,
    /// The trace follows a zero of `φ_t(3^{-k} ·)` after rescaling by `3^k`.
    pub k_index: u32,
    pub truncated: Option<TruncationReason>,
}

/// One row of the JSON trace export.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub re_lambda: f64,
    pub im_lambda: f64,
    pub re_dlambda: f64,
    pub im_dlambda: f64,
    pub k_index: u32,
}

impl ZeroTrace {
    pub fn last(&self) -> &TraceSample {
        self.samples.last().expect("trace has at least its start sample")
    }

    pub fn is_complete(&self) -> bool {
        self.truncated.is_none()
    }

    pub fn rows(&self) -> Vec<TraceRow> {
        self.samples
            .iter()
            .map(|s| TraceRow {
                t: s.t,
                re_lambda: s.lambda.re,
                im_lambda: s.lambda.im,
                re_dlambda: s.dlambda.re,
                im_dlambda: s.dlambda.im,
                k_index: self.k_index,
            })
            .collect()
    }

    /// Zero rescaled to the `k`-th factor, `λ = 3^k λ̃`.
    pub fn rescaled(&self, s: &TraceSample) -> Complex64 {
        s.lambda * 3f64.powi(self.k_index as i32)
    }

    /// `max |dλ| / 3^m` over samples with `|Im λ| ≤ 2·3^{-m}`.
    pub fn derivative_constant(&self, m: u32) -> Option<f64> {
        let band = 2.0 * 3f64.powi(-(m as i32));
        self.samples
            .iter()
            .filter(|s| s.lambda.im.abs() <= band)
            .map(|s| s.dlambda.norm() / 3f64.powi(m as i32))
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuationConfig {
    pub max_step: f64,
    pub min_step: f64,
    pub residual_tol: f64,
    /// More corrector iterations than this halve the step.
    pub max_newton: u32,
    /// Largest corrector displacement accepted.
    pub max_correction: f64,
    pub strip_h: f64,
    /// Scale `m` fixing the critical band `|Im z| ≤ 3^{-m}`.
    pub m: u32,
    pub k_index: u32,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        ContinuationConfig {
            max_step: 1e-3,
            min_step: 1e-12,
            residual_tol: 1e-10,
            max_newton: 5,
            max_correction: 0.05,
            strip_h: STRIP_H,
            m: 4,
            k_index: 0,
        }
    }
}

/// `1e-3·|1-2t|` inside the critical band, `1e-8` elsewhere.
pub fn derivative_floor(t: f64, z: Complex64, m: u32) -> f64 {
    if z.im.abs() <= 3f64.powi(-(m as i32)) {
        1e-3 * (1.0 - 2.0 * t).abs()
    } else {
        1e-8
    }
}

/// `dλ/dt = -∂_tφ̃ / ∂_zφ̃`.
pub fn zero_velocity(t: f64, z: Complex64) -> Complex64 {
    let tc = Complex64::new(t, 0.0);
    -phi_tilde_dt(tc, z) / phi_tilde_dz(tc, z)
}

fn correct(t: f64, guess: Complex64, cfg: &ContinuationConfig) -> Option<Complex64> {
    let tc = Complex64::new(t, 0.0);
    let mut z = guess;
    for _ in 0..cfg.max_newton {
        let step = phi_tilde(tc, z) / phi_tilde_dz(tc, z);
        if !step.is_finite() {
            return None;
        }
        z -= step;
        if (z - guess).norm() > cfg.max_correction {
            return None;
        }
        if phi_tilde(tc, z).norm() < cfg.residual_tol && step.norm() < 1e-13 * z.norm().max(1.0) {
            return Some(z);
        }
    }
    (phi_tilde(tc, z).norm() < cfg.residual_tol).then_some(z)
}

/// Follow a zero of `φ̃_t` from `(t0, λ0)` to `t1` along real `t`.
pub fn continue_zero(t0: f64, lambda0: Complex64, t1: f64, cfg: &ContinuationConfig) -> Result<ZeroTrace> {
    let tc = Complex64::new(t0, 0.0);
    if phi_tilde(tc, lambda0).norm() >= cfg.residual_tol {
        return Err(Error::Domain(format!(
            "start point {lambda0} has residual {:e}",
            phi_tilde(tc, lambda0).norm()
        )));
    }
    if phi_tilde_dz(tc, lambda0).norm() <= derivative_floor(t0, lambda0, cfg.m) {
        return Err(Error::Domain(format!("start point {lambda0} is at a branch point")));
    }
    let mut trace = ZeroTrace {
        samples: vec![TraceSample {
            t: t0,
            lambda: lambda0,
            dlambda: zero_velocity(t0, lambda0),
        }],
        k_index: cfg.k_index,
        truncated: None,
    };
    let dir = (t1 - t0).signum();
    let mut h = cfg.max_step;
    let (mut t, mut z) = (t0, lambda0);
    while (t1 - t) * dir > 0.0 {
        let remaining = (t1 - t).abs();
        let step = h.min(remaining);
        let t_next = if step == remaining { t1 } else { t + dir * step };
        let dz = zero_velocity(t, z);
        let predicted = z + dz * (t_next - t);
        match correct(t_next, predicted, cfg) {
            Some(z_next) => {
                let tn = Complex64::new(t_next, 0.0);
                if phi_tilde_dz(tn, z_next).norm() < derivative_floor(t_next, z_next, cfg.m) {
                    trace.truncated = Some(TruncationReason::NearBranch);
                    break;
                }
                if z_next.im.abs() > 2.0 * cfg.strip_h {
                    trace.truncated = Some(TruncationReason::LeftStrip);
                    break;
                }
                t = t_next;
                z = z_next;
                trace.samples.push(TraceSample {
                    t,
                    lambda: z,
                    dlambda: zero_velocity(t, z),
                });
                h = (h * 1.5).min(cfg.max_step);
            }
            None => {
                h *= 0.5;
                if h < cfg.min_step {
                    trace.truncated = Some(TruncationReason::StepUnderflow);
                    break;
                }
            }
        }
    }
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GSample {
    pub t: f64,
    pub g1: f64,
    pub g2: f64,
    pub dg1: f64,
    pub dg2: f64,
    pub dg1_fd: f64,
    pub dg2_fd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GReport {
    pub samples: Vec<GSample>,
    pub threshold: f64,
    /// `max |g₂' - t g₁' - x̃|`.
    pub identity_error: f64,
    /// `max |g' - g'_fd|` over interior samples.
    pub fd_error: f64,
    pub both_small: usize,
    pub u_components: usize,
    pub v_components: usize,
    pub covered: bool,
}

fn runs(mask: impl Iterator<Item = bool>) -> usize {
    let mut count = 0;
    let mut prev = false;
    for b in mask {
        if b && !prev {
            count += 1;
        }
        prev = b;
    }
    count
}

/// Three-point derivative on a nonuniform grid.
fn nonuniform_derivative(t: &[f64], y: &[f64], i: usize) -> f64 {
    let n = t.len();
    if n < 2 {
        return 0.0;
    }
    if i == 0 {
        return (y[1] - y[0]) / (t[1] - t[0]);
    }
    if i == n - 1 {
        return (y[n - 1] - y[n - 2]) / (t[n - 1] - t[n - 2]);
    }
    let h0 = t[i] - t[i - 1];
    let h1 = t[i + 1] - t[i];
    (-h1 / (h0 * (h0 + h1))) * y[i - 1] + ((h1 - h0) / (h0 * h1)) * y[i] + (h0 / (h1 * (h0 + h1))) * y[i + 1]
}

/// `g₁ = x̃`, `g₂ = t x̃` with `x̃ = Re λ`, and the covering sets
/// `U = {|g₁'| ≥ c 3^{-m}}`, `V = {|g₂'| ≥ c 3^{-m}}`.
pub fn g_functions(trace: &ZeroTrace, c: f64, m: u32) -> GReport {
    let ts: Vec<f64> = trace.samples.iter().map(|s| s.t).collect();
    let g1: Vec<f64> = trace.samples.iter().map(|s| s.lambda.re).collect();
    let g2: Vec<f64> = trace.samples.iter().map(|s| s.t * s.lambda.re).collect();
    let threshold = c * 3f64.powi(-(m as i32));
    let mut samples = Vec::with_capacity(ts.len());
    let mut identity_error: f64 = 0.0;
    let mut fd_error: f64 = 0.0;
    for (i, s) in trace.samples.iter().enumerate() {
        let dg1 = s.dlambda.re;
        let dg2 = s.lambda.re + s.t * dg1;
        let dg1_fd = nonuniform_derivative(&ts, &g1, i);
        let dg2_fd = nonuniform_derivative(&ts, &g2, i);
        identity_error = identity_error.max((dg2 - s.t * dg1 - s.lambda.re).abs());
        if i > 0 && i + 1 < ts.len() {
            fd_error = fd_error.max((dg1 - dg1_fd).abs()).max((dg2 - dg2_fd).abs());
        }
        samples.push(GSample {
            t: s.t,
            g1: g1[i],
            g2: g2[i],
            dg1,
            dg2,
            dg1_fd,
            dg2_fd,
        });
    }
    let in_u = |g: &GSample| g.dg1.abs() >= threshold;
    let in_v = |g: &GSample| g.dg2.abs() >= threshold;
    GReport {
        threshold,
        identity_error,
        fd_error,
        both_small: samples.iter().filter(|g| !in_u(g) && !in_v(g)).count(),
        u_components: runs(samples.iter().map(in_u)),
        v_components: runs(samples.iter().map(in_v)),
        covered: samples.iter().all(|g| in_u(g) || in_v(g)),
        samples,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlaschkeReport {
    pub value_at_center: f64,
    pub sup: f64,
    /// `⌊log₂ C⌋`.
    pub bound: u32,
    /// Zeros in the disc of radius 1/2.
    pub zeros_half_disc: i64,
}

/// Blaschke bound for `f` on the unit disc, with `sup` estimated on a
/// boundary grid of `boundary_samples` points when not supplied.
pub fn blaschke_count<F>(f: &F, sup: Option<f64>, boundary_samples: usize, cfg: &ZeroConfig) -> Result<BlaschkeReport>
where
    F: Fn(Complex64) -> Complex64,
{
    let value_at_center = f(Complex64::new(0.0, 0.0)).norm();
    if value_at_center < 1.0 {
        return Err(Error::Domain(format!("|f(0)| = {value_at_center} < 1")));
    }
    let sup = sup.unwrap_or_else(|| {
        (0..boundary_samples.max(8))
            .map(|i| f(Complex64::from_polar(1.0, 2.0 * PI * i as f64 / boundary_samples.max(8) as f64)).norm())
            .fold(0.0, f64::max)
    });
    let bound = sup.log2().floor().max(0.0) as u32;
    let zeros_half_disc = winding_number_disc(f, Complex64::new(0.0, 0.0), 0.5, cfg)?;
    Ok(BlaschkeReport {
        value_at_center,
        sup,
        bound,
        zeros_half_disc,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallValueReport {
    /// Zeros of the normalised function in `|w| < 1/2`.
    pub zeros: Vec<Complex64>,
    pub eps_m: f64,
    pub small_points: usize,
    pub max_distance: f64,
    /// `1 - max_distance / ε_M`, or 1 for an empty small-value set.
    pub margin: f64,
    pub contained: bool,
}

/// On `|w| ≤ 1/4`, check `{|φ| < ε} ⊆ ∪ B(λ_k, ε_M)` for
/// `φ(w) = φ̃_t(z0 + ρw)/φ̃_t(z0)` and `ε_M = (9/16)(3ε)^{1/M}`, with `M`
/// the number of zeros of `φ` in `|w| < 1/2`.
pub fn small_value_localization(
    t: f64,
    eps: f64,
    z0: Complex64,
    rho: f64,
    grid: usize,
    cfg: &ZeroConfig,
) -> Result<SmallValueReport> {
    let tc = Complex64::new(t, 0.0);
    let base = phi_tilde(tc, z0);
    if base.norm() == 0.0 {
        return Err(Error::Domain(format!("centre {z0} is a zero")));
    }
    let f = |w: Complex64| phi_tilde(tc, z0 + rho * w) / base;
    let df = |w: Complex64| phi_tilde_dz(tc, z0 + rho * w) * rho / base;
    let square = Rect::new(-0.5, 0.5, -0.5, 0.5)?;
    let zeros: Vec<Complex64> = find_zeros_of(&f, &df, &square, cfg)?
        .into_iter()
        .filter(|w| w.norm() < 0.5)
        .collect();
    let count = zeros.len();
    let eps_m = if count == 0 {
        0.0
    } else {
        (9.0 / 16.0) * (3.0 * eps).powf(1.0 / count as f64)
    };

    let mut points: Vec<Complex64> = Vec::new();
    let h = 0.5 / grid as f64;
    for i in 0..=grid {
        for j in 0..=grid {
            let w = Complex64::new(-0.25 + i as f64 * h, -0.25 + j as f64 * h);
            if w.norm() <= 0.25 {
                points.push(w);
            }
        }
    }
    for &zk in &zeros {
        // fine patches at the ε_M scale and at the linearised small-value radius
        let linear = eps / df(zk).norm().max(1e-300);
        for r in [eps_m, 4.0 * linear] {
            let r = r.clamp(1e-14, 0.25);
            let fine = 64;
            for i in 0..=fine {
                for j in 0..=fine {
                    let w = zk + Complex64::new(-r + 2.0 * r * i as f64 / fine as f64, -r + 2.0 * r * j as f64 / fine as f64);
                    if w.norm() <= 0.25 {
                        points.push(w);
                    }
                }
            }
        }
    }

    let mut small_points = 0;
    let mut max_distance: f64 = 0.0;
    for w in points {
        if f(w).norm() < eps {
            small_points += 1;
            let d = zeros.iter().map(|z| (w - z).norm()).fold(f64::INFINITY, f64::min);
            max_distance = max_distance.max(d);
        }
    }
    let (margin, contained) = if small_points == 0 {
        (1.0, true)
    } else if eps_m > 0.0 {
        let m = 1.0 - max_distance / eps_m;
        (m, m > 0.0)
    } else {
        (f64::NEG_INFINITY, false)
    };
    Ok(SmallValueReport {
        zeros,
        eps_m,
        small_points,
        max_distance,
        margin,
        contained,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn winding_counts_polynomial_roots() {
        let f = |z: Complex64| (z - c(0.3)) * (z - Complex64::new(-0.2, 0.4)) * (z - c(5.0));
        let cfg = ZeroConfig::default();
        let r = Rect::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        assert_eq!(winding_number(&f, &r, &cfg).unwrap(), 2);
        let r = Rect::new(0.31, 4.0, -1.0, 1.0).unwrap();
        assert_eq!(winding_number(&f, &r, &cfg).unwrap(), 0);
        let on_edge = Rect::new(0.3, 1.0, -1.0, 1.0).unwrap();
        assert!(matches!(winding_number(&f, &on_edge, &cfg), Err(Error::WindingUnstable { .. })));
    }

    #[test]
    fn cube_root_zero() {
        let cfg = ZeroConfig::default();
        let zs = find_zeros(c(0.5), &Rect::new(4.0, 5.0, -1.0, 1.0).unwrap(), &cfg).unwrap();
        assert_eq!(zs.len(), 1);
        assert!((zs[0] - c(4.0 * PI / 3.0)).norm() < 1e-10);
    }

    #[test]
    fn empty_box_with_grid_lower_bound() {
        let cfg = ZeroConfig::default();
        let rect = Rect::new(0.1, 1.0, -1.0, 1.0).unwrap();
        assert!(find_zeros(c(0.5), &rect, &cfg).unwrap().is_empty());
        // grid oracle: min |φ̃| on the grid exceeds the Lipschitz slack
        let t = c(0.5);
        let n = 200;
        let (hx, hy) = (0.9 / n as f64, 2.0 / n as f64);
        let mut min: f64 = f64::INFINITY;
        for i in 0..=n {
            for j in 0..=n {
                let z = Complex64::new(0.1 + i as f64 * hx, -1.0 + j as f64 * hy);
                min = min.min(phi_tilde(t, z).norm());
            }
        }
        let lipschitz = 0.5 * (0.5f64).exp() + 1f64.exp();
        assert!(min > lipschitz * 0.5 * hx.hypot(hy), "min {min}");
    }

    #[test]
    fn inflated_retry_on_boundary_zero() {
        let cfg = ZeroConfig::default();
        let z = 4.0 * PI / 3.0;
        let rect = Rect::new(z, z + 1.0, -1.0, 1.0).unwrap();
        let zs = find_zeros(c(0.5), &rect, &cfg).unwrap();
        assert_eq!(zs.len(), 1);
        assert!((zs[0].re - z).abs() < 1e-10);
        let tall = Rect::new(0.0, 1.0, -3.0, 3.0).unwrap();
        assert!(matches!(find_zeros(c(0.5), &tall, &cfg), Err(Error::Domain(_))));
    }

    #[test]
    fn zeros_match_closed_form_for_half() {
        // φ̃_{1/2}(z) = 1 + w + w² with w = e^{-iz/2}: zeros at 4π/3 + 4πk and 8π/3 + 4πk
        let cfg = ZeroConfig::default();
        let zs = find_zeros(c(0.5), &Rect::new(0.5, 30.0, -1.0, 1.0).unwrap(), &cfg).unwrap();
        let mut want: Vec<f64> = (0..3)
            .flat_map(|k| [4.0 * PI / 3.0 + 4.0 * PI * k as f64, 8.0 * PI / 3.0 + 4.0 * PI * k as f64])
            .filter(|x| *x < 30.0)
            .collect();
        want.sort_by(f64::total_cmp);
        assert_eq!(zs.len(), want.len());
        for (z, w) in zs.iter().zip(&want) {
            assert!((z - c(*w)).norm() < 1e-10);
        }
    }

    #[test]
    fn zero_count_grows_linearly() {
        let cfg = ZeroConfig::default();
        let t = c(0.3);
        let counts: Vec<usize> = (2..=4)
            .map(|m| {
                let lo = 3f64.powi(-m);
                let hi = 3f64.powi(m);
                find_zeros(t, &Rect::new(lo, hi, -1.0, 1.0).unwrap(), &cfg).unwrap().len()
            })
            .collect();
        for (i, n) in counts.iter().enumerate() {
            let scale = 3f64.powi(i as i32 + 2);
            let ratio = *n as f64 / scale;
            assert!(ratio > 0.05 && ratio < 1.0, "m={}: {n}", i + 2);
        }
        assert!(counts[2] > counts[1] && counts[1] > counts[0]);
    }

    #[test]
    fn residuals_of_found_zeros() {
        let cfg = ZeroConfig::default();
        for t in [0.13, 0.37, 0.71, 0.9] {
            let zs = find_zeros(c(t), &Rect::new(0.2, 40.0, -2.0, 2.0).unwrap(), &cfg).unwrap();
            assert!(!zs.is_empty());
            for z in zs {
                assert!(phi_tilde(c(t), z).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn no_real_branch_points() {
        let cfg = BranchConfig::default();
        for i in 1..1000 {
            let t = i as f64 / 1000.0;
            assert!(branch_candidates(c(t), &cfg).unwrap().is_empty());
        }
        assert!(branch_candidates(c(0.0), &cfg).is_err());
    }

    #[test]
    fn real_derivative_floor_near_half() {
        // zeros near t = 1/2 keep |φ̃'| comparable to |1-2t|
        let cfg = ZeroConfig::default();
        let mut worst = f64::INFINITY;
        for t in [0.45, 0.48, 0.49, 0.51, 0.55] {
            for z in find_zeros(c(t), &Rect::new(0.2, 30.0, -0.5, 0.5).unwrap(), &cfg).unwrap() {
                let d = phi_tilde_dz(c(t), z).norm();
                worst = worst.min(d / (1.0 - 2.0 * t).abs());
            }
        }
        assert!(worst > 1e-3, "{worst}");
    }

    #[test]
    fn complex_branch_candidates_solve_both_equations() {
        let cfg = BranchConfig {
            radius: 0.5,
            ..BranchConfig::default()
        };
        let mut found = 0;
        for re in [0.2, 0.4, 0.5, 0.6, 0.8] {
            let t = Complex64::new(re, 0.1);
            for cand in branch_candidates(t, &cfg).unwrap() {
                assert!(cand.residual < 1e-10 && cand.derivative_residual < 1e-10);
                assert!((cand.t - t).norm() <= cfg.radius);
                assert!(cand.t.im.abs() > 1e-6);
                found += 1;
            }
        }
        assert!(found > 0);
    }

    fn start() -> (f64, Complex64) {
        (0.5, c(4.0 * PI / 3.0))
    }

    #[test]
    fn continuation_matches_fresh_search() {
        let (t0, z0) = start();
        let cfg = ContinuationConfig::default();
        let trace = continue_zero(t0, z0, 0.45, &cfg).unwrap();
        assert!(trace.is_complete(), "{:?}", trace.truncated);
        let end = trace.last();
        assert_eq!(end.t, 0.45);
        let fresh = find_zeros(c(0.45), &Rect::centered(end.lambda, 0.2, 0.2).unwrap(), &ZeroConfig::default()).unwrap();
        assert_eq!(fresh.len(), 1);
        assert!((fresh[0] - end.lambda).norm() < 1e-8);
        for s in &trace.samples {
            assert!(phi_tilde(c(s.t), s.lambda).norm() < 1e-10);
        }
    }

    #[test]
    fn continuation_round_trip() {
        let (t0, z0) = start();
        let cfg = ContinuationConfig::default();
        let there = continue_zero(t0, z0, 0.45, &cfg).unwrap();
        let back = continue_zero(0.45, there.last().lambda, 0.5, &cfg).unwrap();
        assert!(back.is_complete());
        assert!((back.last().lambda - z0).norm() < 1e-8);
    }

    #[test]
    fn continuation_rejects_bad_start() {
        let cfg = ContinuationConfig::default();
        assert!(continue_zero(0.5, c(4.0), 0.45, &cfg).is_err());
    }

    #[test]
    fn velocity_matches_differences() {
        let (t0, z0) = start();
        let cfg = ContinuationConfig {
            max_step: 1e-4,
            ..ContinuationConfig::default()
        };
        let a = continue_zero(t0, z0, t0 - 1e-4, &cfg).unwrap();
        let b = continue_zero(t0, z0, t0 + 1e-4, &cfg).unwrap();
        let fd = (b.last().lambda - a.last().lambda) / 2e-4;
        assert!((fd - zero_velocity(t0, z0)).norm() < 1e-6);
        // the derivative constant on the critical band
        let trace = continue_zero(t0, z0, 0.4, &ContinuationConfig::default()).unwrap();
        let cst = trace.derivative_constant(4).unwrap();
        assert!(cst.is_finite() && cst > 0.0);
    }

    #[test]
    fn g_function_identity_and_cover() {
        let (t0, z0) = start();
        let m = 3;
        let trace = continue_zero(t0, z0, 0.3, &ContinuationConfig { m, ..Default::default() }).unwrap();
        let rep = g_functions(&trace, 0.25, m);
        assert!(rep.identity_error < 1e-8);
        assert!(rep.fd_error < 1e-3, "{}", rep.fd_error);
        assert_eq!(rep.both_small, 0);
        assert!(rep.covered);
        assert!(rep.u_components + rep.v_components >= 1);
    }

    #[test]
    fn trace_rows_carry_scale_tag() {
        let (t0, z0) = start();
        let trace = continue_zero(t0, z0, 0.49, &ContinuationConfig { k_index: 3, ..Default::default() }).unwrap();
        let rows = trace.rows();
        assert_eq!(rows.len(), trace.samples.len());
        assert!(rows.iter().all(|r| r.k_index == 3));
        assert!((trace.rescaled(&trace.samples[0]) - z0 * 27.0).norm() < 1e-12);
    }

    #[test]
    fn blaschke_examples() {
        let cfg = ZeroConfig::default();
        let two = blaschke_count(&|_| c(2.0), None, 256, &cfg).unwrap();
        assert_eq!((two.bound, two.zeros_half_disc), (1, 0));
        let poly = blaschke_count(&|z: Complex64| 16.0 * (z * z - 1.0 / 16.0), None, 4096, &cfg).unwrap();
        assert!(poly.sup <= 17.0 + 1e-12);
        assert_eq!((poly.bound, poly.zeros_half_disc), (4, 2));
        assert!(blaschke_count(&|_| c(0.5), None, 16, &cfg).is_err());
    }

    #[test]
    fn blaschke_for_rescaled_trinomial() {
        let cfg = ZeroConfig::default();
        for t in [0.2, 0.5, 0.77] {
            for x in [1.0, 4.0, 9.5] {
                // centre with |φ̃| ≥ 1/2 inside |z - x| ≤ H
                let tc = c(t);
                let z0 = (0..=48)
                    .map(|j| Complex64::new(x, -STRIP_H + j as f64 * STRIP_H / 24.0))
                    .find(|z| phi_tilde(tc, *z).norm() >= 0.5)
                    .unwrap();
                let base = phi_tilde(tc, z0);
                let f = |w: Complex64| phi_tilde(tc, z0 + 2.0 * w) / base;
                let rep = blaschke_count(&f, None, 2048, &cfg).unwrap();
                assert!(rep.zeros_half_disc <= 5, "t={t} x={x}: {rep:?}");
                assert!(rep.zeros_half_disc as u32 <= rep.bound);
            }
        }
    }

    #[test]
    fn small_values_near_cube_root_zero() {
        let cfg = ZeroConfig::default();
        let z0 = c(4.0 * PI / 3.0 + 0.2);
        let tight = small_value_localization(0.5, 1e-4, z0, 1.0, 200, &cfg).unwrap();
        assert_eq!(tight.zeros.len(), 1);
        assert!(tight.contained && tight.margin > 0.0);
        // the small-value set grows with ε
        let loose = small_value_localization(0.5, 1e-2, z0, 1.0, 200, &cfg).unwrap();
        assert!(loose.contained);
        assert!(loose.max_distance > tight.max_distance);
        assert!(loose.small_points >= tight.small_points);
        // no zeros and ε below the minimum: empty set
        let far = small_value_localization(0.5, 1e-3, c(1.0), 1.0, 100, &cfg).unwrap();
        assert_eq!(far.small_points, 0);
        assert!(far.contained);
    }
}
