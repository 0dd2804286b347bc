//! Interchangeable quadrature rules and a period-aware panel integrator.
//!
//! Rules are looked up by name through [`QuadratureRegistry`] so that
//! configuration files and the CLI can select them at runtime.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// A rule that turns a sample count on `[a, b]` into weighted nodes.
pub trait QuadratureRule: Send + Sync {
    fn name(&self) -> &'static str;

    /// Weighted nodes for `samples` subdivisions of `[a, b]`. Weights sum to
    /// `b - a` up to rounding.
    fn nodes(&self, a: f64, b: f64, samples: usize) -> Result<Vec<(f64, f64)>>;
}

pub struct Midpoint;
pub struct Simpson;
pub struct GaussLegendre8;

impl QuadratureRule for Midpoint {
    fn name(&self) -> &'static str {
        "midpoint"
    }
    fn nodes(&self, a: f64, b: f64, samples: usize) -> Result<Vec<(f64, f64)>> {
        if samples == 0 {
            return Err(Error::Domain("midpoint rule needs at least one sample".into()));
        }
        let h = (b - a) / samples as f64;
        Ok((0..samples).map(|i| (a + (i as f64 + 0.5) * h, h)).collect())
    }
}

impl QuadratureRule for Simpson {
    fn name(&self) -> &'static str {
        "simpson"
    }
    fn nodes(&self, a: f64, b: f64, samples: usize) -> Result<Vec<(f64, f64)>> {
        if samples < 2 || !samples.is_multiple_of(2) {
            return Err(Error::Domain(format!("simpson rule needs an even sample count, got {samples}")));
        }
        let h = (b - a) / samples as f64;
        Ok((0..=samples)
            .map(|i| {
                let w = if i == 0 || i == samples {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                (a + i as f64 * h, w * h / 3.0)
            })
            .collect())
    }
}

const GL8_X: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GL8_W: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

impl QuadratureRule for GaussLegendre8 {
    fn name(&self) -> &'static str {
        "gauss-legendre"
    }
    fn nodes(&self, a: f64, b: f64, samples: usize) -> Result<Vec<(f64, f64)>> {
        if samples == 0 {
            return Err(Error::Domain("gauss-legendre needs at least one panel".into()));
        }
        let h = (b - a) / samples as f64;
        let mut out = Vec::with_capacity(8 * samples);
        for p in 0..samples {
            let mid = a + (p as f64 + 0.5) * h;
            for (x, w) in GL8_X.iter().zip(GL8_W.iter()) {
                out.push((mid + 0.5 * h * x, 0.5 * h * w));
            }
        }
        Ok(out)
    }
}

/// Weighted mean `Σ wᵢ f(xᵢ) / Σ wᵢ`. Constant integrands come back exact.
pub fn weighted_mean(nodes: &[(f64, f64)], values: &[f64]) -> f64 {
    let num: f64 = nodes.iter().zip(values).map(|((_, w), v)| w * v).sum();
    let den: f64 = nodes.iter().map(|(_, w)| w).sum();
    num / den
}

pub struct QuadratureRegistry {
    rules: Vec<Box<dyn QuadratureRule>>,
}

impl Default for QuadratureRegistry {
    fn default() -> Self {
        QuadratureRegistry {
            rules: vec![Box::new(Midpoint), Box::new(Simpson), Box::new(GaussLegendre8)],
        }
    }
}

impl QuadratureRegistry {
    pub fn register(&mut self, rule: Box<dyn QuadratureRule>) {
        self.rules.retain(|r| r.name() != rule.name());
        self.rules.push(rule);
    }

    pub fn get(&self, name: &str) -> Result<&dyn QuadratureRule> {
        self.rules
            .iter()
            .find(|r| r.name() == name)
            .map(|r| r.as_ref())
            .ok_or_else(|| Error::Domain(format!("unknown quadrature rule {name:?}; known: {:?}", self.names())))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.rules.iter().map(|r| r.name()).collect()
    }
}

/// Result of [`integrate_oscillatory`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelIntegral {
    pub value: f64,
    /// Panels actually evaluated after adaptive refinement.
    pub panels: usize,
}

fn gl8(f: &(impl Fn(f64) -> f64 + ?Sized), a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    GL8_X
        .iter()
        .zip(GL8_W.iter())
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

fn refine(f: &(impl Fn(f64) -> f64 + Sync + ?Sized), a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> (f64, usize) {
    let m = 0.5 * (a + b);
    let left = gl8(f, a, m);
    let right = gl8(f, m, b);
    let split = left + right;
    if depth == 0 || (split - whole).abs() <= tol {
        return (split, 2);
    }
    let (l, pl) = refine(f, a, m, left, 0.5 * tol, depth - 1);
    let (r, pr) = refine(f, m, b, right, 0.5 * tol, depth - 1);
    (l + r, pl + pr)
}

/// Integrate `f` over `[a, b]` with initial panels no wider than
/// `shortest_period / 8`, refining any panel whose 8-point Gauss–Legendre
/// value disagrees with its two halves by more than its share of
/// `abs_tol`. Panels are evaluated in parallel and summed in ascending order.
pub fn integrate_oscillatory<F>(f: F, a: f64, b: f64, shortest_period: f64, abs_tol: f64) -> PanelIntegral
where
    F: Fn(f64) -> f64 + Sync,
{
    if b <= a {
        return PanelIntegral { value: 0.0, panels: 0 };
    }
    let width = shortest_period / 8.0;
    let count = ((b - a) / width).ceil().max(1.0) as usize;
    let h = (b - a) / count as f64;
    let per_panel = abs_tol / count as f64;
    let parts: Vec<(f64, usize)> = (0..count)
        .into_par_iter()
        .map(|p| {
            let lo = a + p as f64 * h;
            let hi = if p + 1 == count { b } else { lo + h };
            let whole = gl8(&f, lo, hi);
            refine(&f, lo, hi, whole, per_panel, 12)
        })
        .collect();
    PanelIntegral {
        value: parts.iter().map(|p| p.0).sum(),
        panels: parts.iter().map(|p| p.1).sum(),
    }
}
