//! Experiment configuration.
//!
//! TOML with one key per line; unknown keys are rejected. The SHA-256 of
//! the canonical JSON form is embedded in every output file.

use std::path::Path;

use favard_core::geometry::{GenerationCap, PresetRegistry, SimilaritySystem};
use favard_core::projection::RELATIVE_MERGE_EPS;
use favard_core::quadrature::QuadratureRegistry;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};
use crate::ledger::ExponentLedger;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: String,
    pub n_max: u32,
    pub theta_samples: usize,
    pub quadrature: String,
    /// Endpoint merge tolerance relative to the hull width.
    pub merge_eps: f64,
    pub generation_cap: u32,
    pub bad_set_exponent: f64,
    pub m: u32,
    /// `ℓ = ⌈α m⌉`.
    pub ell_multiplier: f64,
    /// Defaults to half the ledger bound `3^{-αM}`.
    pub eps_star: Option<f64>,
    pub residual_tol: f64,
    pub seed: u64,
    pub out_dir: String,
    pub beta: f64,
    pub strip_h: f64,

    pub plancherel_x_max: f64,
    pub plancherel_x_cap: f64,
    pub plancherel_tail_tol: f64,
    pub plancherel_n_max: u32,

    pub lemma_samples: usize,
    pub lemma_x_range: f64,

    pub cetsq_sets: usize,
    pub cetsq_k_max: usize,
    pub cetsq_span: f64,

    pub stacking_n: Vec<u32>,
    pub stacking_levels: Vec<f64>,
    pub stacking_thetas: usize,

    pub tiling_m: Vec<u32>,
    pub tiling_t_count: usize,
    pub tiling_rects: usize,
    pub tiling_delta: f64,
    pub tiling_grid: usize,
    pub stability_c: f64,
    pub stability_grid: usize,
    pub domination_c_delta: f64,

    pub energy_n: u32,
    pub energy_t_count: usize,

    pub degenerate_heights: Vec<f64>,
    pub degenerate_n_max: u32,

    pub zero_t0: f64,
    pub zero_t1: f64,
    pub zero_rect: [f64; 4],
    pub zero_max_step: f64,
    pub g_cover_c: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            preset: "gasket".into(),
            n_max: 10,
            theta_samples: 256,
            quadrature: "midpoint".into(),
            merge_eps: RELATIVE_MERGE_EPS,
            generation_cap: GenerationCap::default().0,
            bad_set_exponent: 3.0,
            m: 4,
            ell_multiplier: 1.0,
            eps_star: None,
            residual_tol: 1e-10,
            seed: 20_240_601,
            out_dir: "out".into(),
            beta: 3.0,
            strip_h: favard_core::zeros::STRIP_H,
            plancherel_x_max: 1e4,
            plancherel_x_cap: 1.6e5,
            plancherel_tail_tol: 0.01,
            plancherel_n_max: 3,
            lemma_samples: 1_000_000,
            lemma_x_range: 1e4,
            cetsq_sets: 1000,
            cetsq_k_max: 200,
            cetsq_span: 1000.0,
            stacking_n: vec![6, 7, 8],
            stacking_levels: vec![1.0, 2.0, 3.0, 4.0, 6.0, 8.0],
            stacking_thetas: 16,
            tiling_m: (1..=8).collect(),
            tiling_t_count: 64,
            tiling_rects: 20,
            tiling_delta: 0.1,
            tiling_grid: 128,
            stability_c: favard_core::tiling::DEFAULT_STABILITY_C,
            stability_grid: 100,
            domination_c_delta: favard_core::tiling::DEFAULT_DOMINATION_C_DELTA,
            energy_n: 8,
            energy_t_count: 16,
            degenerate_heights: vec![0.05, 0.1, 0.2, 0.4, 0.8660254037844386],
            degenerate_n_max: 8,
            zero_t0: 0.5,
            zero_t1: 0.45,
            zero_rect: [4.0, 5.0, -1.0, 1.0],
            zero_max_step: 1e-3,
            g_cover_c: 0.25,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("merge_eps", self.merge_eps),
            ("residual_tol", self.residual_tol),
            ("plancherel_x_max", self.plancherel_x_max),
            ("plancherel_tail_tol", self.plancherel_tail_tol),
            ("lemma_x_range", self.lemma_x_range),
            ("cetsq_span", self.cetsq_span),
            ("tiling_delta", self.tiling_delta),
            ("stability_c", self.stability_c),
            ("domination_c_delta", self.domination_c_delta),
            ("zero_max_step", self.zero_max_step),
            ("g_cover_c", self.g_cover_c),
            ("strip_h", self.strip_h),
            ("bad_set_exponent", self.bad_set_exponent),
            ("ell_multiplier", self.ell_multiplier),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(LabError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if let Some(e) = self.eps_star {
            if !(e > 0.0 && e < 1.0) {
                return Err(LabError::Config(format!("eps_star must lie in (0, 1), got {e}")));
            }
        }
        if self.plancherel_x_cap < self.plancherel_x_max {
            return Err(LabError::Config("plancherel_x_cap < plancherel_x_max".into()));
        }
        if self.theta_samples < 8 {
            return Err(LabError::Config(format!("theta_samples = {} < 8", self.theta_samples)));
        }
        if self.stacking_levels.iter().any(|l| !(*l >= 1.0)) {
            return Err(LabError::Config("stacking_levels must be >= 1".into()));
        }
        if self.tiling_grid < 2 || self.stability_grid < 2 {
            return Err(LabError::Config("grids need at least 2 cells per side".into()));
        }
        if self.degenerate_heights.iter().any(|h| !(*h > 0.0)) {
            return Err(LabError::Config("degenerate_heights must be positive".into()));
        }
        QuadratureRegistry::default()
            .get(&self.quadrature)
            .map_err(|e| LabError::Config(e.to_string()))?;
        self.system()?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, ignoring `out_dir`.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serialises");
        if let Some(map) = value.as_object_mut() {
            map.remove("out_dir");
        }
        let canonical = serde_json::to_string(&value).expect("config serialises");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn system(&self) -> Result<SimilaritySystem> {
        PresetRegistry::default()
            .resolve(&self.preset)
            .map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn cap(&self) -> GenerationCap {
        GenerationCap(self.generation_cap)
    }

    pub fn ell(&self) -> u32 {
        (self.ell_multiplier * self.m as f64).ceil() as u32
    }

    pub fn eps_star(&self) -> f64 {
        self.eps_star
            .unwrap_or_else(|| ExponentLedger::compute(self.strip_h, self.beta).default_eps_star())
    }
}
