//! Orthogonal projections of disc clouds.
//!
//! Direction `θ` projects `z` to `Re(z e^{-iθ}) = x cos θ + y sin θ`; a disc
//! of radius `r` projects to an interval of length `2r`, so the projection
//! multiplicity `f_{n,θ}` of a cloud with `D` discs has mass `2rD`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{cells, DiscCloud, GenerationCap, SimilaritySystem, TriangleConfig};
use crate::intervals::UnionOfIntervals;
use crate::quadrature::{weighted_mean, QuadratureRule};
use crate::step::StepFunction;
use crate::Complex64;

/// Endpoint merge tolerance relative to the hull width.
pub const RELATIVE_MERGE_EPS: f64 = 1e-12;

pub fn project(z: Complex64, theta: f64) -> f64 {
    z.re * theta.cos() + z.im * theta.sin()
}

fn hull_merge_eps(f: &StepFunction) -> f64 {
    f.hull().map_or(0.0, |(a, b)| RELATIVE_MERGE_EPS * (b - a))
}

/// `f_{n,θ}` computed by an exact endpoint sweep.
pub fn multiplicity(cloud: &DiscCloud, theta: f64) -> StepFunction {
    multiplicity_with_eps(cloud, theta, RELATIVE_MERGE_EPS)
}

/// As [`multiplicity`] with endpoint merge tolerance `rel_eps` times the
/// hull width.
pub fn multiplicity_with_eps(cloud: &DiscCloud, theta: f64, rel_eps: f64) -> StepFunction {
    let (c, s) = (theta.cos(), theta.sin());
    let r = cloud.radius();
    let proj: Vec<f64> = cloud.centers().iter().map(|z| z.re * c + z.im * s).collect();
    let (lo, hi) = proj
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| (lo.min(p), hi.max(p)));
    let eps = rel_eps * (hi - lo + 2.0 * r);
    StepFunction::from_intervals(proj.iter().map(|&p| (p - r, p + r)), eps)
}

/// `supp f` with the merge tolerance derived from the hull of `f`.
pub fn support(f: &StepFunction) -> UnionOfIntervals {
    f.support(hull_merge_eps(f))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FavardEstimate {
    pub generation: u32,
    pub value: f64,
    pub theta_samples: usize,
    pub rule: String,
    pub support_min: f64,
    pub support_max: f64,
}

/// Support lengths of `f_{n,θ}` at each node of `rule` on `[0, π)`; nodes
/// are processed in parallel and returned in ascending `θ`.
pub fn support_lengths(cloud: &DiscCloud, nodes: &[(f64, f64)], rel_eps: f64) -> Vec<f64> {
    nodes
        .par_iter()
        .map(|&(theta, _)| support(&multiplicity_with_eps(cloud, theta, rel_eps)).length())
        .collect()
}

/// `π⁻¹ ∫_0^π |supp f_{n,θ}| dθ`.
pub fn favard(
    system: &SimilaritySystem,
    n: u32,
    theta_samples: usize,
    rule: &dyn QuadratureRule,
    cap: GenerationCap,
) -> Result<FavardEstimate> {
    favard_with_eps(system, n, theta_samples, rule, cap, RELATIVE_MERGE_EPS)
}

pub fn favard_with_eps(
    system: &SimilaritySystem,
    n: u32,
    theta_samples: usize,
    rule: &dyn QuadratureRule,
    cap: GenerationCap,
    rel_eps: f64,
) -> Result<FavardEstimate> {
    if theta_samples < 8 {
        return Err(Error::Domain(format!("theta_samples = {theta_samples} < 8")));
    }
    let cloud = cells(system, n, cap)?;
    let nodes = rule.nodes(0.0, std::f64::consts::PI, theta_samples)?;
    let lengths = support_lengths(&cloud, &nodes, rel_eps);
    Ok(FavardEstimate {
        generation: n,
        value: weighted_mean(&nodes, &lengths),
        theta_samples,
        rule: rule.name().to_string(),
        support_min: lengths.iter().copied().fold(f64::INFINITY, f64::min),
        support_max: lengths.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

/// Multiplicity functions for every generation `0..=max_n` at one angle.
pub fn multiplicities_up_to(
    system: &SimilaritySystem,
    max_n: u32,
    theta: f64,
    cap: GenerationCap,
) -> Result<Vec<StepFunction>> {
    (0..=max_n)
        .map(|n| Ok(multiplicity(&cells(system, n, cap)?, theta)))
        .collect()
}

/// `f*_N = max_{n ≤ N} f_{n,θ}` on the merged breakpoint grid.
pub fn sup_multiplicity(system: &SimilaritySystem, max_n: u32, theta: f64, cap: GenerationCap) -> Result<StepFunction> {
    let fs = multiplicities_up_to(system, max_n, theta, cap)?;
    Ok(sup_of(&fs))
}

fn sup_of(fs: &[StepFunction]) -> StepFunction {
    let refs: Vec<&StepFunction> = fs.iter().collect();
    let eps = fs.iter().map(hull_merge_eps).fold(0.0, f64::max);
    StepFunction::pointwise_max(&refs, eps)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSetReport {
    pub level: f64,
    pub set: UnionOfIntervals,
    pub measure: f64,
}

/// `{f ≥ K}`.
pub fn level_set(f: &StepFunction, level: f64) -> Result<LevelSetReport> {
    if !(level > 0.0) {
        return Err(Error::Domain(format!("level {level} must be positive")));
    }
    let set = f.level_set_ge(level, hull_merge_eps(f));
    Ok(LevelSetReport {
        level,
        measure: set.length(),
        set,
    })
}

/// `{f > L}`, the strict level set used by the stacking inequality.
pub fn strict_level_set(f: &StepFunction, level: f64) -> LevelSetReport {
    let set = f.level_set_gt(level, hull_merge_eps(f));
    LevelSetReport {
        level,
        measure: set.length(),
        set,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BadDirection {
    pub measure: f64,
    pub threshold: f64,
    pub bad: bool,
}

/// Is `|{f*_N ≥ K}| ≤ K^{-exponent}`?
pub fn bad_direction(f_sup: &StepFunction, level: f64, exponent: f64) -> Result<BadDirection> {
    let measure = level_set(f_sup, level)?.measure;
    let threshold = level.powf(-exponent);
    Ok(BadDirection {
        measure,
        threshold,
        bad: measure <= threshold,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StackingOutcome {
    /// `|F_{4KM}| / (K |F_K| |F_M|)`.
    Ratio(f64),
    /// One of `F_K`, `F_M` is empty.
    Vacuous,
}

impl StackingOutcome {
    pub fn ratio(self) -> Option<f64> {
        match self {
            StackingOutcome::Ratio(r) => Some(r),
            StackingOutcome::Vacuous => None,
        }
    }
}

/// All generations up to `N` at a fixed angle, with `f*_N` precomputed so
/// that many `(K, M)` pairs can be evaluated cheaply.
#[derive(Debug, Clone)]
pub struct StackingProfile {
    pub theta: f64,
    pub max_n: u32,
    per_generation: Vec<StepFunction>,
    sup: StepFunction,
}

impl StackingProfile {
    pub fn new(system: &SimilaritySystem, max_n: u32, theta: f64, cap: GenerationCap) -> Result<Self> {
        let per_generation = multiplicities_up_to(system, max_n, theta, cap)?;
        let sup = sup_of(&per_generation);
        Ok(StackingProfile {
            theta,
            max_n,
            per_generation,
            sup,
        })
    }

    pub fn sup(&self) -> &StepFunction {
        &self.sup
    }

    pub fn generation(&self, n: u32) -> &StepFunction {
        &self.per_generation[n as usize]
    }

    /// `|F_L| = |{f*_N > L}|`.
    pub fn strict_measure(&self, level: f64) -> f64 {
        strict_level_set(&self.sup, level).measure
    }

    pub fn stacking_ratio(&self, k: f64, m: f64) -> StackingOutcome {
        let fk = self.strict_measure(k);
        let fm = self.strict_measure(m);
        if fk <= 0.0 || fm <= 0.0 {
            return StackingOutcome::Vacuous;
        }
        StackingOutcome::Ratio(self.strict_measure(4.0 * k * m) / (k * fk * fm))
    }

    pub fn bad_direction(&self, level: f64, exponent: f64) -> Result<BadDirection> {
        bad_direction(&self.sup, level, exponent)
    }

    /// `max_{n ≤ N} ‖f_{n,θ}‖²₂`.
    pub fn max_l2_squared(&self) -> f64 {
        self.per_generation.iter().map(|f| f.l2_squared()).fold(0.0, f64::max)
    }
}

pub fn stacking_ratio(
    system: &SimilaritySystem,
    theta: f64,
    max_n: u32,
    k: f64,
    m: f64,
    cap: GenerationCap,
) -> Result<StackingOutcome> {
    Ok(StackingProfile::new(system, max_n, theta, cap)?.stacking_ratio(k, m))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    /// `|{f*_N ≥ K}|`.
    pub level_measure: f64,
    /// Step count `l = min(⌈1/|F|⌉, ⌈K^β⌉)`.
    pub steps: u64,
    /// Generation actually measured, `min(cap, l·N)`.
    pub generation: u32,
    pub capped: bool,
    pub measured: f64,
    pub bound: f64,
}

/// Compare `|proj_θ G_{l·N}|` with `C/K`.
pub fn bootstrap_check(
    system: &SimilaritySystem,
    theta: f64,
    max_n: u32,
    level: f64,
    beta: f64,
    constant: f64,
    cap: GenerationCap,
) -> Result<BootstrapReport> {
    let sup = sup_multiplicity(system, max_n, theta, cap)?;
    let level_measure = level_set(&sup, level)?.measure;
    let by_measure = if level_measure > 0.0 {
        (1.0 / level_measure).ceil()
    } else {
        f64::INFINITY
    };
    let steps = by_measure.min(level.powf(beta).ceil()).max(1.0) as u64;
    let wanted = steps.saturating_mul(max_n as u64);
    let generation = wanted.min(cap.0 as u64) as u32;
    let cloud = cells(system, generation, cap)?;
    let measured = support(&multiplicity(&cloud, theta)).length();
    Ok(BootstrapReport {
        level_measure,
        steps,
        generation,
        capped: wanted > cap.0 as u64,
        measured,
        bound: constant / level,
    })
}

/// Reparameterisation of a projected triangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaToT {
    /// `(c₂ - c₁)/(c₃ - c₁)` after sorting.
    pub t: f64,
    /// `c₃ - c₁`.
    pub scale: f64,
    /// `perm[j]` is the original index of the `j`-th smallest projection.
    pub perm: [usize; 3],
    pub dt_dtheta: f64,
    /// `(c₃-c₁)(s₂-s₁) - (c₂-c₁)(s₃-s₁)`, constant in `θ` up to sign.
    pub numerator: f64,
}

/// Sort the projections `c_j = Re(p_j e^{-iθ})` and form `t`.
pub fn sorted_projection(points: &[Complex64; 3], theta: f64) -> ThetaToT {
    let rot = Complex64::from_polar(1.0, -theta);
    let q: Vec<Complex64> = points.iter().map(|p| p * rot).collect();
    let mut perm = [0usize, 1, 2];
    perm.sort_by(|&a, &b| q[a].re.total_cmp(&q[b].re));
    let c: Vec<f64> = perm.iter().map(|&j| q[j].re).collect();
    let s: Vec<f64> = perm.iter().map(|&j| q[j].im).collect();
    let scale = c[2] - c[0];
    let numerator = scale * (s[1] - s[0]) - (c[1] - c[0]) * (s[2] - s[0]);
    ThetaToT {
        t: (c[1] - c[0]) / scale,
        scale,
        perm,
        dt_dtheta: numerator / (scale * scale),
        numerator,
    }
}

pub fn theta_to_t(cfg: &TriangleConfig, theta: f64) -> ThetaToT {
    sorted_projection(&cfg.p, theta)
}
