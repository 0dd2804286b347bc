//! Self-similar disc systems and their generation-`n` approximants.
//!
//! A [`SimilaritySystem`] is a family of maps `T_j(z) = ratio·z + c_j`. The
//! generation-`n` approximant is the union of the images of the unit disc
//! under all `n`-fold compositions, i.e. discs of radius `ratioⁿ` centred at
//! `c_{a1} + ratio·c_{a2} + … + ratio^{n-1}·c_{an}`. Words `a1 a2 … an` are
//! enumerated lexicographically with `a1` most significant, so a disc's index
//! in [`DiscCloud::centers`] is its word read in base `map_count`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_GENERATION_CAP: u32 = 14;

/// Generation ceiling with an up-front memory estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationCap(pub u32);

impl Default for GenerationCap {
    fn default() -> Self {
        GenerationCap(DEFAULT_GENERATION_CAP)
    }
}

impl GenerationCap {
    /// Bytes needed to hold the centres of a generation-`n` cloud of a
    /// system with `maps` maps.
    pub fn estimate_bytes(maps: usize, n: u32) -> u64 {
        (maps as f64).powi(n as i32).min(u64::MAX as f64 / 32.0) as u64
            * std::mem::size_of::<Complex64>() as u64
    }

    pub fn check(self, maps: usize, n: u32) -> Result<()> {
        if n > self.0 {
            return Err(Error::Resource {
                requested: n,
                cap: self.0,
                bytes: Self::estimate_bytes(maps, n),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilaritySystem {
    ratio: f64,
    centers: Vec<Complex64>,
    open_set_margin: f64,
}

impl SimilaritySystem {
    pub fn new(ratio: f64, centers: Vec<Complex64>) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::Domain(format!("contraction ratio {ratio} not in (0,1)")));
        }
        if centers.len() < 2 {
            return Err(Error::Domain("a similarity system needs at least 2 maps".into()));
        }
        if centers.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Domain("non-finite translation centre".into()));
        }
        for (i, a) in centers.iter().enumerate() {
            for b in &centers[i + 1..] {
                if (a - b).norm() == 0.0 {
                    return Err(Error::Domain("translation centres must be distinct".into()));
                }
            }
        }
        Ok(SimilaritySystem {
            ratio,
            centers,
            open_set_margin: 0.0,
        })
    }

    /// The Sierpinski gasket in disc form: ratio 1/3 and centres
    /// `(1/3)·e^{iπ(1/2 + 2α/3)}` for `α = -1, 0, 1` in that order.
    pub fn gasket() -> Self {
        let centers = [-1.0, 0.0, 1.0]
            .iter()
            .map(|&alpha| gasket_unit(alpha) / 3.0)
            .collect();
        SimilaritySystem {
            ratio: 1.0 / 3.0,
            centers,
            open_set_margin: 0.0,
        }
    }

    /// Four-corner Cantor set of the unit square centred at the origin.
    pub fn four_corner() -> Self {
        let a = 3.0 / 8.0;
        let centers = vec![
            Complex64::new(-a, -a),
            Complex64::new(a, -a),
            Complex64::new(-a, a),
            Complex64::new(a, a),
        ];
        SimilaritySystem {
            ratio: 0.25,
            centers,
            open_set_margin: 0.0,
        }
    }

    /// Gasket whose fixed points form the given triangle (translated so its
    /// centroid sits at the origin).
    pub fn from_triangle(cfg: &TriangleConfig) -> Self {
        let g = (cfg.p[0] + cfg.p[1] + cfg.p[2]) / 3.0;
        let centers = cfg.p.iter().map(|p| (p - g) * (2.0 / 3.0)).collect();
        SimilaritySystem {
            ratio: 1.0 / 3.0,
            centers,
            open_set_margin: 0.0,
        }
    }

    pub fn with_open_set_margin(mut self, margin: f64) -> Result<Self> {
        if !(margin >= 0.0) {
            return Err(Error::Domain("open set margin must be nonnegative".into()));
        }
        self.open_set_margin = margin;
        Ok(self)
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn centers(&self) -> &[Complex64] {
        &self.centers
    }

    pub fn map_count(&self) -> usize {
        self.centers.len()
    }

    pub fn open_set_margin(&self) -> f64 {
        self.open_set_margin
    }

    /// Apply `T_j`.
    pub fn apply(&self, j: usize, z: Complex64) -> Complex64 {
        z * self.ratio + self.centers[j]
    }

    /// Centre of the disc addressed by `word` (outermost map first).
    pub fn word_center(&self, word: &[usize]) -> Complex64 {
        let mut scale = 1.0;
        let mut z = Complex64::new(0.0, 0.0);
        for &a in word {
            z += self.centers[a] * scale;
            scale *= self.ratio;
        }
        z
    }
}

fn gasket_unit(alpha: f64) -> Complex64 {
    Complex64::from_polar(1.0, PI * (0.5 + 2.0 * alpha / 3.0))
}

/// Centres of the generation-`n` gasket, `Σ_k 3^{-k} e^{iπ(1/2 + 2α_k/3)}`,
/// lexicographic in `α ∈ {-1,0,1}ⁿ`.
pub fn gasket_centers(n: u32, cap: GenerationCap) -> Result<Vec<Complex64>> {
    cap.check(3, n)?;
    let units = [gasket_unit(-1.0), gasket_unit(0.0), gasket_unit(1.0)];
    let count = 3usize.pow(n);
    let mut out = Vec::with_capacity(count);
    let mut digits = vec![0usize; n as usize];
    for idx in 0..count {
        let mut rem = idx;
        for d in digits.iter_mut().rev() {
            *d = rem % 3;
            rem /= 3;
        }
        let mut z = Complex64::new(0.0, 0.0);
        let mut w = 1.0;
        for &d in &digits {
            w /= 3.0;
            z += units[d] * w;
        }
        out.push(z);
    }
    Ok(out)
}

/// All generation-`n` discs of a system.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscCloud {
    generation: u32,
    radius: f64,
    map_count: usize,
    centers: Vec<Complex64>,
}

impl DiscCloud {
    pub fn generation(&self) -> u32 {
        self.generation
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn centers(&self) -> &[Complex64] {
        &self.centers
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// The address of disc `index`, outermost map first.
    pub fn word(&self, index: usize) -> Vec<usize> {
        let mut word = vec![0; self.generation as usize];
        let mut rem = index;
        for d in word.iter_mut().rev() {
            *d = rem % self.map_count;
            rem /= self.map_count;
        }
        word
    }
}

/// Generation-`n` cloud of `system`, built by refining generation by
/// generation.
pub fn cells(system: &SimilaritySystem, n: u32, cap: GenerationCap) -> Result<DiscCloud> {
    cap.check(system.map_count(), n)?;
    let mut centers = vec![Complex64::new(0.0, 0.0)];
    let mut scale = 1.0;
    for _ in 0..n {
        let mut next = Vec::with_capacity(centers.len() * system.map_count());
        for z in &centers {
            for c in system.centers() {
                next.push(z + c * scale);
            }
        }
        centers = next;
        scale *= system.ratio();
    }
    Ok(DiscCloud {
        generation: n,
        radius: scale,
        map_count: system.map_count(),
        centers,
    })
}

/// Generation-`n` cloud built by decoding every word independently.
pub fn cells_by_words(system: &SimilaritySystem, n: u32, cap: GenerationCap) -> Result<DiscCloud> {
    cap.check(system.map_count(), n)?;
    let count = system.map_count().pow(n);
    let mut cloud = DiscCloud {
        generation: n,
        radius: system.ratio().powi(n as i32),
        map_count: system.map_count(),
        centers: Vec::with_capacity(count),
    };
    for idx in 0..count {
        let w = cloud.word(idx);
        cloud.centers.push(system.word_center(&w));
    }
    Ok(cloud)
}

/// Three similarity centres with `|p1 - p3| = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleConfig {
    pub p: [Complex64; 3],
    /// Twice the triangle area.
    pub delta: f64,
}

impl TriangleConfig {
    /// Triangle `0, 1/2 + i·height, 1`.
    pub fn isoceles(height: f64) -> Result<Self> {
        degeneracy(
            Complex64::new(0.0, 0.0),
            Complex64::new(0.5, height),
            Complex64::new(1.0, 0.0),
        )
    }

    /// Whether `|p2 - p1|, |p2 - p3| ≤ 1`, the setting in which the
    /// `θ → t` Jacobian is bounded by `δ` and `1/δ`.
    pub fn satisfies_side_bound(&self) -> bool {
        (self.p[1] - self.p[0]).norm() <= 1.0 + 1e-12 && (self.p[1] - self.p[2]).norm() <= 1.0 + 1e-12
    }
}

impl fmt::Display for TriangleConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "triangle({}, {}, {}; delta={})",
            self.p[0], self.p[1], self.p[2], self.delta
        )
    }
}

/// Twice the area of the triangle `p1 p2 p3`, validated into a
/// [`TriangleConfig`].
pub fn degeneracy(p1: Complex64, p2: Complex64, p3: Complex64) -> Result<TriangleConfig> {
    let base = (p1 - p3).norm();
    if (base - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("|p1 - p3| = {base}, expected 1")));
    }
    let delta = ((p2 - p1) * (p3 - p1).conj()).im.abs();
    if delta < 1e-12 {
        return Err(Error::Degenerate(format!("colinear centres (delta = {delta:e})")));
    }
    if delta > 1.0 {
        return Err(Error::Domain(format!("degeneracy {delta} exceeds 1")));
    }
    Ok(TriangleConfig {
        p: [p1, p2, p3],
        delta,
    })
}

/// Builds a system from a textual preset argument.
pub trait PresetBuilder: Send + Sync {
    fn name(&self) -> &'static str;
    fn build(&self, arg: Option<&str>) -> Result<SimilaritySystem>;
}

struct GasketPreset;
struct FourCornerPreset;
struct TrianglePreset;

impl PresetBuilder for GasketPreset {
    fn name(&self) -> &'static str {
        "gasket"
    }
    fn build(&self, arg: Option<&str>) -> Result<SimilaritySystem> {
        no_arg(self.name(), arg)?;
        Ok(SimilaritySystem::gasket())
    }
}

impl PresetBuilder for FourCornerPreset {
    fn name(&self) -> &'static str {
        "four-corner"
    }
    fn build(&self, arg: Option<&str>) -> Result<SimilaritySystem> {
        no_arg(self.name(), arg)?;
        Ok(SimilaritySystem::four_corner())
    }
}

impl PresetBuilder for TrianglePreset {
    fn name(&self) -> &'static str {
        "triangle"
    }
    fn build(&self, arg: Option<&str>) -> Result<SimilaritySystem> {
        let arg = arg.ok_or_else(|| Error::Domain("triangle preset needs triangle:<p2-im>".into()))?;
        let height: f64 = arg
            .trim()
            .parse()
            .map_err(|_| Error::Domain(format!("bad triangle height {arg:?}")))?;
        Ok(SimilaritySystem::from_triangle(&TriangleConfig::isoceles(height)?))
    }
}

fn no_arg(name: &str, arg: Option<&str>) -> Result<()> {
    match arg {
        None => Ok(()),
        Some(a) => Err(Error::Domain(format!("preset {name} takes no argument, got {a:?}"))),
    }
}

/// Name → builder table for the systems the CLI accepts.
pub struct PresetRegistry {
    builders: Vec<Box<dyn PresetBuilder>>,
}

impl Default for PresetRegistry {
    fn default() -> Self {
        PresetRegistry {
            builders: vec![
                Box::new(GasketPreset),
                Box::new(FourCornerPreset),
                Box::new(TrianglePreset),
            ],
        }
    }
}

impl PresetRegistry {
    pub fn register(&mut self, builder: Box<dyn PresetBuilder>) {
        self.builders.retain(|b| b.name() != builder.name());
        self.builders.push(builder);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.builders.iter().map(|b| b.name()).collect()
    }

    /// Resolve `name` or `name:arg`.
    pub fn resolve(&self, spec: &str) -> Result<SimilaritySystem> {
        let (name, arg) = match spec.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (spec, None),
        };
        let builder = self
            .builders
            .iter()
            .find(|b| b.name() == name)
            .ok_or_else(|| Error::Domain(format!("unknown preset {name:?}; known: {:?}", self.names())))?;
        builder.build(arg)
    }
}
