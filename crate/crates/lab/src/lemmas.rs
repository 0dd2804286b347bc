//! Named lemma checks, run as a suite.

use favard_core::fourier::{cetsq_ratio, FrequencySet};
use favard_core::zeros::{branch_candidates, BranchConfig};
use favard_core::Complex64;
use serde::{Deserialize, Serialize};

use crate::audits;
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::output::Table;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaOutcome {
    pub name: String,
    pub passed: bool,
    pub checked: usize,
    pub violations: usize,
    /// Audit-specific headline number (worst ratio, largest gap, ...).
    pub statistic: f64,
    pub detail: String,
    pub counterexample: Option<serde_json::Value>,
}

impl LemmaOutcome {
    fn new(name: &str, checked: usize, violations: usize, statistic: f64, detail: String) -> Self {
        LemmaOutcome {
            name: name.to_string(),
            passed: violations == 0,
            checked,
            violations,
            statistic,
            detail,
            counterexample: None,
        }
    }

    fn with_counterexample(mut self, value: impl Serialize) -> Self {
        if !self.passed {
            self.counterexample = serde_json::to_value(value).ok();
        }
        self
    }
}

/// A verification run selected by name.
pub trait LemmaCheck: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, cfg: &ExperimentConfig) -> Result<LemmaOutcome>;
}

struct RieszDomination;
struct RieszPeriodMean;
struct Plancherel;
struct Cetsq;
struct BranchPoints;
struct Continuation;
struct RootStability;
struct CriticalUniqueness;
struct FactorDomination;
struct Stacking;
struct P1Energy;

impl LemmaCheck for RieszDomination {
    fn name(&self) -> &'static str {
        "riesz-domination"
    }
    fn run(&self, cfg: &ExperimentConfig) -> Result<LemmaOutcome> {
        let a = audits::riesz_domination_audit(cfg.lemma_samples, cfg.lemma_x_range, cfg.seed);
        Ok(LemmaOutcome::new(self.name(), a.checked, a.violations, a.extreme, "max |φ_t|² - min(r(x), r(tx))".into())
            .with_counterexample(a.first_violation))
    }
}

impl LemmaCheck for RieszPeriodMean {
    fn name(&self) -> &'static str {
        "riesz-period-mean"
    }
    fn run(&self, _cfg: &ExperimentConfig) -> Result<LemmaOutcome> {
        let rows = audits::riesz_period_means(1, 1..=6)?;
        let worst = rows.iter().map(|r| r.relative_error).fold(0.0, f64::max);
        let bad: Vec<_> = rows.iter().filter(|r| r.relative_error >= 1e-6).collect();
        Ok(
            LemmaOutcome::new(self.name(), rows.len(), bad.len(), worst, "max relative error vs (7/9)^ℓ".into())
                .with_counterexample(bad.first()),
        )
    }
}

impl LemmaCheck for Plancherel {
    fn name(&self) -> &'static str {
        "plancherel"
    }
    fn run(&self, cfg: &ExperimentConfig) -> Result<LemmaOutcome> {
        let rows = audits::plancherel_audit(&cfg.system()?, cfg, &[0.4, 1.1])?;
        let worst = rows.iter().map(|r| r.report.relative_gap).fold(0.0, f64::max);
        let bad: Vec<_> = rows.iter().filter(|r| r.report.relative_gap >= 0.02 || !r.decreases()).collect();
        Ok(LemmaOutcome::new(
            self.name(),
            rows.len(),
            bad.len(),
            worst,
            "max relative gap; gap must shrink when X doubles".into(),
        )
        .with_counterexample(bad.first()))
    }
}

impl LemmaCheck for Cetsq {
    fn name(&self) -> &'static str {
        "cetsq"
    }
    fn run(&self, cfg: &ExperimentConfig) -> Result<LemmaOutcome> {
        let rows = audits::cetsq_audit(cfg)?;
        let worst = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
        let mut bad: Vec<serde_json::Value> = rows
            .iter()
            .filter(|r| !r.ratio.is_finite())
            .map(|r| serde_json::json!({"seed": r.seed, "k": r.k}))
            .collect();
        let single = cetsq_ratio(&FrequencySet::unit(vec![0.0])?);
        if single != 0.5 {
            bad.push(serde_json::json!({"single_frequency_ratio": single}));
        }
        Ok(
            LemmaOutcome::new(self.name(), rows.len() + 1, bad.len(), worst, "max energy/S over random sets".into())
                .with_counterexample(bad.first()),
        )
    }
}

impl LemmaCheck for BranchPoints {
    fn name(&self) -> &'static str {
        "branch-points"
    }
    fn run(&self, cfg: &ExperimentConfig) -> Result<LemmaOutcome> {
        let bcfg = BranchConfig {
            residual_tol: cfg.residual_tol,
            ..BranchConfig::default()
        };
        let count = 1000;
        let mut bad = Vec::new();
        for i in 0..count {
            let t = (i as f64 + 0.5) / count as f64;
            let c = branch_candidates(Complex64::new(t, 0.0), &bcfg)?;
            if !c.is_empty() {
                bad.push((t, c.len()));
            }
        }
        Ok(
            LemmaOutcome::new(self.name(), count, bad.len(), bad.len() as f64, "real t with branch candidates".into())
                .with_counterexample(bad.first()),
        )
    }
}

impl LemmaCheck for Continuation {
    fn name(&self) -> &'static str {
        "continuation"
    }
    fn run(&self, cfg: &ExperimentConfig) -> Result<LemmaOutcome> {
        let z = audits::zero_machinery(0.45, 0, cfg)?;
        let ok = z.zero_error < 1e-10 && z.round_trip_error < 1e-8 && z.complete;
        Ok(LemmaOutcome::new(
            self.name(),
            1,
            usize::from(!ok),
            z.round_trip_error,
            "round trip 0.5 → 0.45 → 0.5 of the zero at 4π/3".into(),
        )
        .with_counterexample(z))
    }
}

impl LemmaCheck for RootStability {
    fn name(&self) -> &'static str {
        "root-stability"
    }
    fn run(&self, cfg: &ExperimentConfig) -> Result<LemmaOutcome> {
        let a = audits::root_stability_audit(cfg.stability_grid, 6, cfg.stability_c);
        Ok(LemmaOutcome::new(
            self.name(),
            a.checked,
            a.violations,
            a.min_value,
            format!("min value in range; k = k'+5 reaches {:.6}", a.beyond_range_min),
        )
        .with_counterexample(a))
    }
}

impl LemmaCheck for CriticalUniqueness {
    fn name(&self) -> &'static str {
        "critical-uniqueness"
    }
    fn run(&self, cfg: &ExperimentConfig) -> Result<LemmaOutcome> {
        let a = audits::critical_uniqueness_audit(6, 500, cfg)?;
        Ok(
            LemmaOutcome::new(self.name(), a.checked, a.violations, a.extreme, "max critical indices per rect".into())
                .with_counterexample(a.first_violation),
        )
    }
}

impl LemmaCheck for FactorDomination {
    fn name(&self) -> &'static str {
        "factor-domination"
    }
    fn run(&self, cfg: &ExperimentConfig) -> Result<LemmaOutcome> {
        let a = audits::domination_audit(50, cfg)?;
        let mut o = LemmaOutcome::new(
            self.name(),
            a.checked,
            a.violations,
            a.extreme,
            "min |φ̃_k| below a near-zero factor".into(),
        )
        .with_counterexample(a.first_violation);
        if a.checked == 0 {
            o.passed = false;
            o.detail = "no point met the precondition".into();
        }
        Ok(o)
    }
}

impl LemmaCheck for Stacking {
    fn name(&self) -> &'static str {
        "stacking"
    }
    fn run(&self, cfg: &ExperimentConfig) -> Result<LemmaOutcome> {
        let a = audits::stacking_audit(&cfg.system()?, cfg)?;
        let bad: Vec<_> = a.rows.iter().filter(|r| r.ratio.is_some_and(|v| !v.is_finite())).collect();
        let worst = a.per_n.iter().map(|s| s.c_hat).fold(0.0, f64::max);
        Ok(LemmaOutcome::new(
            self.name(),
            a.rows.len(),
            bad.len(),
            worst,
            format!("max Ĉ; spread across N {:.4}", a.spread()),
        )
        .with_counterexample(bad.first()))
    }
}

impl LemmaCheck for P1Energy {
    fn name(&self) -> &'static str {
        "p1-energy"
    }
    fn run(&self, cfg: &ExperimentConfig) -> Result<LemmaOutcome> {
        let rows = audits::energy_audit(cfg)?;
        let ratios: Vec<f64> = rows.iter().map(|r| r.ratio_to_3m).collect();
        let spread = audits::spread_around_mean(&ratios);
        let floor = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let bad = usize::from(!(floor > 0.0));
        Ok(LemmaOutcome::new(
            self.name(),
            rows.len(),
            bad,
            floor,
            format!("min energy/3^m; spread around mean {spread:.4}"),
        ))
    }
}

pub struct LemmaRegistry {
    checks: Vec<Box<dyn LemmaCheck>>,
}

impl Default for LemmaRegistry {
    fn default() -> Self {
        LemmaRegistry {
            checks: vec![
                Box::new(RieszDomination),
                Box::new(RieszPeriodMean),
                Box::new(Plancherel),
                Box::new(Cetsq),
                Box::new(BranchPoints),
                Box::new(Continuation),
                Box::new(RootStability),
                Box::new(CriticalUniqueness),
                Box::new(FactorDomination),
                Box::new(Stacking),
                Box::new(P1Energy),
            ],
        }
    }
}

impl LemmaRegistry {
    pub fn register(&mut self, check: Box<dyn LemmaCheck>) {
        self.checks.retain(|c| c.name() != check.name());
        self.checks.push(check);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.checks.iter().map(|c| c.name()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&dyn LemmaCheck> {
        self.checks.iter().find(|c| c.name() == name).map(|c| c.as_ref())
    }

    /// Run the named checks in registry order, or all of them.
    pub fn run(&self, cfg: &ExperimentConfig, only: &[String]) -> Result<Vec<LemmaOutcome>> {
        if let Some(bad) = only.iter().find(|n| self.get(n).is_none()) {
            return Err(crate::error::LabError::Config(format!(
                "unknown lemma {bad:?}; known: {:?}",
                self.names()
            )));
        }
        self.checks
            .iter()
            .filter(|c| only.is_empty() || only.iter().any(|n| n == c.name()))
            .map(|c| c.run(cfg))
            .collect()
    }
}

pub fn outcome_table(outcomes: &[LemmaOutcome]) -> Table {
    let mut t = Table::new(&["lemma", "passed", "checked", "violations", "statistic", "detail"]);
    for o in outcomes {
        t.push(vec![
            o.name.clone().into(),
            o.passed.into(),
            o.checked.into(),
            o.violations.into(),
            o.statistic.into(),
            o.detail.clone().into(),
        ]);
    }
    t
}
