//! CLI command bodies. Each writes its CSV/JSON outputs into the output
//! directory and appends an [`ExperimentRecord`].

use std::path::{Path, PathBuf};

use favard_core::geometry::{SimilaritySystem, TriangleConfig};
use favard_core::projection::favard_with_eps;
use favard_core::quadrature::QuadratureRegistry;
use favard_core::zeros::{continue_zero, find_zeros, g_functions, ContinuationConfig, Rect, ZeroConfig};
use favard_core::Complex64;

use crate::audits::{self, SweepRow};
use crate::config::ExperimentConfig;
use crate::decay::{fit_decay, DecayFit};
use crate::error::{LabError, Result};
use crate::ledger::{exponent_ledger, ledger_table};
use crate::lemmas::{outcome_table, LemmaRegistry};
use crate::output::{read_csv, Table};
use crate::record::ExperimentRecord;

pub const COMMANDS: [&str; 9] = [
    "favard-sweep",
    "decay-fit",
    "lemma-suite",
    "zero-trace",
    "tiling-scan",
    "cetsq-audit",
    "stacking-audit",
    "degenerate-sweep",
    "exponent-ledger",
];

/// A configured run rooted at an output directory.
pub struct Session {
    pub cfg: ExperimentConfig,
    pub out: PathBuf,
    hash: String,
}

impl Session {
    pub fn new(cfg: ExperimentConfig, out: impl Into<PathBuf>) -> Result<Self> {
        cfg.validate()?;
        let out = out.into();
        std::fs::create_dir_all(&out)?;
        let hash = cfg.hash();
        Ok(Session { cfg, out, hash })
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write(&self, record: &mut ExperimentRecord, name: &str, table: Table) -> Result<()> {
        table.write_csv(&self.path(name), &self.hash)?;
        record.table(name, table);
        Ok(())
    }

    fn record(&self, command: &str) -> ExperimentRecord {
        ExperimentRecord::start(command, &self.hash, self.cfg.seed)
    }

    /// Persist the record, then turn a failed check into an invariant error.
    fn close(&self, mut record: ExperimentRecord, failure: Option<String>) -> Result<ExperimentRecord> {
        record.passed = failure.is_none();
        if let Some(f) = &failure {
            record.note("failure", f);
        }
        record.finish(&self.out)?;
        match failure {
            Some(f) => Err(LabError::Invariant(f)),
            None => Ok(record),
        }
    }

    pub fn run(&self, command: &str) -> Result<ExperimentRecord> {
        match command {
            "favard-sweep" => self.favard_sweep(),
            "decay-fit" => self.decay_fit().map(|(r, _)| r),
            "lemma-suite" => self.lemma_suite(&[]),
            "zero-trace" => self.zero_trace(),
            "tiling-scan" => self.tiling_scan(),
            "cetsq-audit" => self.cetsq_audit(),
            "stacking-audit" => self.stacking_audit(),
            "degenerate-sweep" => self.degenerate_sweep(),
            "exponent-ledger" => self.exponent_ledger(),
            other => Err(LabError::Config(format!("unknown command {other:?}; known: {COMMANDS:?}"))),
        }
    }

    fn sweep_table(rows: &[SweepRow]) -> Table {
        let mut t = Table::new(&["n", "theta_samples", "favard", "support_min", "support_max", "wall_ms"]);
        for r in rows {
            let e = &r.estimate;
            t.push(vec![
                e.generation.into(),
                e.theta_samples.into(),
                e.value.into(),
                e.support_min.into(),
                e.support_max.into(),
                r.wall_ms.into(),
            ]);
        }
        t
    }

    pub fn favard_sweep(&self) -> Result<ExperimentRecord> {
        let mut record = self.record("favard-sweep");
        let rows = audits::favard_sweep_rows(&self.cfg.system()?, self.cfg.n_max, &self.cfg)?;
        self.write(&mut record, "favard_sweep.csv", Self::sweep_table(&rows))?;
        let failure = audits::first_increase(&rows)
            .map(|(n, a, b)| format!("Favard length increased at n = {n}: {a:.17e} -> {b:.17e}"));
        record.note("favard_last", rows.last().map(|r| r.estimate.value));
        self.close(record, failure)
    }

    /// Favard pairs from `favard_sweep.csv` when it matches this config,
    /// otherwise from a fresh sweep.
    fn favard_pairs(&self) -> Result<Vec<(u32, f64)>> {
        let path = self.path("favard_sweep.csv");
        let fresh = path.exists() && read_csv(&path)?.config_hash == self.hash;
        if !fresh {
            self.favard_sweep()?;
        }
        self.favard_pairs_from_file(&path)
    }

    fn favard_pairs_from_file(&self, path: &Path) -> Result<Vec<(u32, f64)>> {
        let csv = read_csv(path)?;
        let (ni, fi) = (csv.column("n")?, csv.column("favard")?);
        csv.rows
            .iter()
            .map(|r| {
                Ok((
                    r[ni].parse().map_err(|e| LabError::Config(format!("n: {e}")))?,
                    r[fi].parse().map_err(|e| LabError::Config(format!("favard: {e}")))?,
                ))
            })
            .collect()
    }

    pub fn decay_fit(&self) -> Result<(ExperimentRecord, DecayFit)> {
        let pairs = self.favard_pairs()?;
        let mut record = self.record("decay-fit");
        let fit = fit_decay(&pairs)?;
        let mut t = Table::new(&["quantity", "value"]);
        t.push(vec!["exponent".into(), fit.exponent.into()]);
        t.push(vec!["intercept".into(), fit.intercept.into()]);
        t.push(vec!["residual_norm".into(), fit.residual_norm.into()]);
        t.push(vec!["lower_constant".into(), fit.lower_constant.into()]);
        t.push(vec!["lower_argmin".into(), fit.lower_argmin.into()]);
        self.write(&mut record, "decay_fit.csv", t)?;
        record.note("fit", &fit);
        let failure = (!(fit.exponent > 0.0 && fit.exponent <= 1.0 && fit.lower_constant > 0.0)).then(|| {
            format!(
                "decay shape out of range: exponent {} lower constant {}",
                fit.exponent, fit.lower_constant
            )
        });
        self.close(record, failure).map(|r| (r, fit))
    }

    pub fn lemma_suite(&self, only: &[String]) -> Result<ExperimentRecord> {
        let mut record = self.record("lemma-suite");
        let registry = LemmaRegistry::default();
        let outcomes = registry.run(&self.cfg, only)?;
        self.write(&mut record, "lemmas.csv", outcome_table(&outcomes))?;
        if only.is_empty() || only.iter().any(|n| n == "p1-energy") {
            self.write(&mut record, "energy.csv", energy_table(&audits::energy_audit(&self.cfg)?))?;
        }
        let failed: Vec<_> = outcomes.iter().filter(|o| !o.passed).collect();
        if !failed.is_empty() {
            std::fs::write(self.path("lemma_failures.json"), serde_json::to_string_pretty(&failed)?)?;
        }
        let failure = (!failed.is_empty()).then(|| {
            let names: Vec<&str> = failed.iter().map(|o| o.name.as_str()).collect();
            format!("lemma checks failed: {}", names.join(", "))
        });
        self.close(record, failure)
    }

    pub fn zero_trace(&self) -> Result<ExperimentRecord> {
        let cfg = &self.cfg;
        let mut record = self.record("zero-trace");
        let [a, b, c, d] = cfg.zero_rect;
        let rect = Rect::new(a, b, c, d).map_err(|e| LabError::Config(e.to_string()))?;
        let zcfg = ZeroConfig {
            residual_tol: cfg.residual_tol,
            strip_h: cfg.strip_h,
            ..ZeroConfig::default()
        };
        let ccfg = ContinuationConfig {
            max_step: cfg.zero_max_step,
            residual_tol: cfg.residual_tol,
            strip_h: cfg.strip_h,
            m: cfg.m,
            ..ContinuationConfig::default()
        };
        let starts = find_zeros(Complex64::new(cfg.zero_t0, 0.0), &rect, &zcfg)?;
        let mut t = Table::new(&[
            "index",
            "start_re",
            "start_im",
            "end_t",
            "end_re",
            "end_im",
            "samples",
            "truncated",
            "derivative_constant",
            "g_covered",
            "g_identity_error",
        ]);
        for (i, z0) in starts.iter().enumerate() {
            let trace = continue_zero(cfg.zero_t0, *z0, cfg.zero_t1, &ccfg)?;
            std::fs::write(self.path(&format!("trace_{i:03}.json")), serde_json::to_string_pretty(&trace.rows())?)?;
            let g = g_functions(&trace, cfg.g_cover_c, cfg.m);
            let end = trace.last();
            t.push(vec![
                i.into(),
                z0.re.into(),
                z0.im.into(),
                end.t.into(),
                end.lambda.re.into(),
                end.lambda.im.into(),
                trace.samples.len().into(),
                trace.truncated.map_or("none", |r| r.as_str()).into(),
                trace.derivative_constant(cfg.m).unwrap_or(f64::NAN).into(),
                g.covered.into(),
                g.identity_error.into(),
            ]);
        }
        record.note("zeros", starts.len());
        self.write(&mut record, "zero_trace.csv", t)?;
        self.close(record, None)
    }

    pub fn tiling_scan(&self) -> Result<ExperimentRecord> {
        let mut record = self.record("tiling-scan");
        let audit = audits::tiling_audit(&self.cfg)?;
        let mut t = Table::new(&[
            "t",
            "m",
            "x0",
            "delta",
            "min_max_cofactor",
            "critical_k",
            "ssv_interval_count",
            "zero_k",
            "floor_holds",
        ]);
        for r in &audit.rows {
            t.push(vec![
                r.t.into(),
                r.m.into(),
                r.x0.into(),
                r.delta.into(),
                r.min_max_cofactor.into(),
                r.critical_label().into(),
                r.ssv_interval_count.into(),
                r.zero_k.into(),
                r.floor_holds().into(),
            ]);
        }
        self.write(&mut record, "tiling.csv", t)?;
        record.note("rects", audit.rows.len());
        record.note("short_samples", audit.short_samples);
        let failure = (audit.floor_violations + audit.uniqueness_violations > 0).then(|| {
            format!(
                "tiling: {} cofactor floor violations, {} rects with several critical indices",
                audit.floor_violations, audit.uniqueness_violations
            )
        });
        self.close(record, failure)
    }

    pub fn cetsq_audit(&self) -> Result<ExperimentRecord> {
        let mut record = self.record("cetsq-audit");
        let rows = audits::cetsq_audit(&self.cfg)?;
        let mut t = Table::new(&["seed", "k", "energy", "overlap", "ratio", "cet_ratio"]);
        for r in &rows {
            t.push(vec![
                r.seed.into(),
                r.k.into(),
                r.energy.into(),
                r.overlap.into(),
                r.ratio.into(),
                r.cet_ratio.into(),
            ]);
        }
        self.write(&mut record, "cetsq.csv", t)?;
        let max = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
        record.note("max_ratio", max);
        let failure = rows
            .iter()
            .find(|r| !r.ratio.is_finite())
            .map(|r| format!("non-finite ratio for seed {}", r.seed));
        self.close(record, failure)
    }

    pub fn stacking_audit(&self) -> Result<ExperimentRecord> {
        let mut record = self.record("stacking-audit");
        let audit = audits::stacking_audit(&self.cfg.system()?, &self.cfg)?;
        let mut t = Table::new(&["theta", "N", "K", "M", "ratio"]);
        for r in &audit.rows {
            let ratio = r.ratio.map_or_else(|| "vacuous".into(), |v| v.into());
            t.push(vec![r.theta.into(), r.n.into(), r.k.into(), r.m.into(), ratio]);
        }
        self.write(&mut record, "stacking.csv", t)?;
        let mut s = Table::new(&["N", "c_hat", "theta", "K", "M", "finite", "vacuous"]);
        for p in &audit.per_n {
            s.push(vec![
                p.n.into(),
                p.c_hat.into(),
                p.theta.into(),
                p.k.into(),
                p.m.into(),
                p.finite.into(),
                p.vacuous.into(),
            ]);
        }
        self.write(&mut record, "stacking_summary.csv", s)?;
        record.note("spread", audit.spread());
        record.note("drift", audit.drift());
        let failure = audit
            .rows
            .iter()
            .find(|r| r.ratio.is_some_and(|v| !v.is_finite()))
            .map(|r| format!("non-finite stacking ratio at θ = {}, K = {}, M = {}", r.theta, r.k, r.m));
        self.close(record, failure)
    }

    pub fn degenerate_sweep(&self) -> Result<ExperimentRecord> {
        let cfg = &self.cfg;
        let mut record = self.record("degenerate-sweep");
        let registry = QuadratureRegistry::default();
        let rule = registry.get(&cfg.quadrature)?;
        let mut fav = Table::new(&["delta", "height", "n", "favard"]);
        let mut jac = Table::new(&["delta", "angles", "min_jacobian", "max_jacobian", "violations", "applicable"]);
        let mut failures = Vec::new();
        for &h in &cfg.degenerate_heights {
            let tri = TriangleConfig::isoceles(h)?;
            let system = SimilaritySystem::from_triangle(&tri);
            for n in 0..=cfg.degenerate_n_max {
                let e = favard_with_eps(&system, n, cfg.theta_samples, rule, cfg.cap(), cfg.merge_eps)?;
                fav.push(vec![tri.delta.into(), h.into(), n.into(), e.value.into()]);
            }
            let j = audits::jacobian_audit(&tri, 10_000);
            if j.applicable && j.violations > 0 {
                failures.push(format!("δ = {}: {} Jacobian violations", tri.delta, j.violations));
            }
            jac.push(vec![
                j.delta.into(),
                j.angles.into(),
                j.min_jacobian.into(),
                j.max_jacobian.into(),
                j.violations.into(),
                j.applicable.into(),
            ]);
        }
        self.write(&mut record, "degenerate.csv", fav)?;
        self.write(&mut record, "jacobian.csv", jac)?;
        self.close(record, (!failures.is_empty()).then(|| failures.join("; ")))
    }

    pub fn exponent_ledger(&self) -> Result<ExperimentRecord> {
        let mut record = self.record("exponent-ledger");
        let rows = exponent_ledger(self.cfg.strip_h, self.cfg.beta);
        self.write(&mut record, "ledger.csv", ledger_table(&rows))?;
        record.note("default_eps_star", rows[0].default_eps_star());
        self.close(record, None)
    }
}

pub fn energy_table(rows: &[audits::EnergyRow]) -> Table {
    let mut t = Table::new(&["t", "n", "m", "ell", "p1_energy", "ratio_to_3m"]);
    for r in rows {
        t.push(vec![
            r.t.into(),
            r.n.into(),
            r.m.into(),
            r.ell.into(),
            r.energy.into(),
            r.ratio_to_3m.into(),
        ]);
    }
    t
}
