//! Acceptance run: one PASS/FAIL line per criterion.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use favard_core::fourier::{cetsq_ratio, FrequencySet};
use favard_core::geometry::SimilaritySystem;
use favard_core::projection::favard;
use favard_core::quadrature::QuadratureRegistry;
use favard_core::geometry::GenerationCap;
use favard_lab::audits;
use favard_lab::decay::fit_decay;
use favard_lab::ledger::ExponentLedger;
use favard_lab::ExperimentConfig;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

struct Runner {
    results: Vec<bool>,
}

impl Runner {
    fn check(&mut self, id: u32, name: &str, budget: Duration, f: impl FnOnce() -> Result<Outcome, String>) {
        let start = Instant::now();
        let result = f();
        let elapsed = start.elapsed();
        let (passed, detail) = match result {
            Ok(o) => (o.passed && elapsed <= budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let tag = if passed { "PASS" } else { "FAIL" };
        println!(
            "{tag} [{id:>2}] {name}: {detail} ({:.2} s, budget {} s)",
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
        self.results.push(passed);
    }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn main() -> ExitCode {
    let cfg = ExperimentConfig::default();
    let gasket = SimilaritySystem::gasket();
    let mut run = Runner { results: Vec::new() };
    let mut sweep = Vec::new();

    run.check(1, "mass conservation", secs(10), || {
        let a = audits::mass_audit(&gasket, 10, 64, &cfg).map_err(err)?;
        Ok(outcome(
            a.max_relative_error <= 1e-9,
            format!("{} (n, θ) pairs, max relative error {:.3e}", a.checked, a.max_relative_error),
        ))
    });

    run.check(2, "Favard base value and monotonicity", secs(300), || {
        let registry = QuadratureRegistry::default();
        let mut exact = true;
        for name in registry.names() {
            for samples in [8, 64, 256, 1000] {
                let e = favard(&gasket, 0, samples, registry.get(name).map_err(err)?, GenerationCap::default()).map_err(err)?;
                exact &= e.value == 2.0;
            }
        }
        let mut c = cfg.clone();
        c.theta_samples = 256;
        sweep = audits::favard_sweep_rows(&gasket, 10, &c).map_err(err)?;
        let increase = audits::first_increase(&sweep);
        let values: Vec<String> = sweep.iter().map(|r| format!("{:.5}", r.estimate.value)).collect();
        Ok(outcome(
            exact && increase.is_none(),
            format!(
                "Fav(G_0) == 2 at all rules/resolutions: {exact}; first increase {increase:?}; Fav = [{}]",
                values.join(", ")
            ),
        ))
    });

    run.check(3, "decay shape", secs(5), || {
        let pairs: Vec<(u32, f64)> = sweep.iter().map(|r| (r.estimate.generation, r.estimate.value)).collect();
        let fit = fit_decay(&pairs).map_err(err)?;
        Ok(outcome(
            fit.exponent > 0.0 && fit.exponent <= 1.0 && fit.lower_constant > 0.0,
            format!(
                "p̂ = {:.6}, ĉ = min Fav·n/ln n = {:.6} at n = {}, residual {:.3e}",
                fit.exponent, fit.lower_constant, fit.lower_argmin, fit.residual_norm
            ),
        ))
    });

    run.check(4, "Riesz domination audit", secs(10), || {
        let a = audits::riesz_domination_audit(1_000_000, 1e4, cfg.seed);
        Ok(outcome(
            a.violations == 0,
            format!(
                "{} samples, {} violations, max(lhs - rhs) = {:.3e}",
                a.checked, a.violations, a.extreme
            ),
        ))
    });

    run.check(5, "Riesz period mean", secs(30), || {
        let rows = audits::riesz_period_means(1, 1..=6).map_err(err)?;
        let worst = rows.iter().map(|r| r.relative_error).fold(0.0, f64::max);
        Ok(outcome(worst < 1e-6, format!("ℓ = 1..6, max relative error {worst:.3e}")))
    });

    run.check(6, "zero machinery", secs(60), || {
        let z = audits::zero_machinery(0.45, 1000, &cfg).map_err(err)?;
        Ok(outcome(
            z.zero_error < 1e-10 && z.round_trip_error < 1e-8 && z.complete && z.real_t_candidates == 0,
            format!(
                "|λ - 4π/3| = {:.3e}, round trip {:.3e} over {} samples, {} branch candidates for {} real t",
                z.zero_error, z.round_trip_error, z.outbound_samples, z.real_t_candidates, z.real_t_checked
            ),
        ))
    });

    run.check(7, "analytic tiling", secs(600), || {
        let a = audits::tiling_audit(&cfg).map_err(err)?;
        let worst = a
            .rows
            .iter()
            .map(|r| r.min_max_cofactor * 3f64.powi(r.m as i32))
            .fold(f64::INFINITY, f64::min);
        let critical = a.rows.iter().filter(|r| r.critical.len() == 1).count();
        Ok(outcome(
            a.floor_violations == 0 && a.uniqueness_violations == 0,
            format!(
                "{} rects (m = 1..8, 64 t each, {} short samples), {} floor violations, {} multi-critical; \
                 min 3^m·max cofactor {worst:.3}; {critical} rects with one critical index",
                a.rows.len(),
                a.short_samples,
                a.floor_violations,
                a.uniqueness_violations
            ),
        ))
    });

    run.check(8, "root-of-unity stability", secs(60), || {
        let a = audits::root_stability_audit(100, 6, cfg.stability_c);
        Ok(outcome(
            a.violations == 0 && a.checked > 0,
            format!(
                "{} points (100×100 grid per (k, k'), k' = 1..6, k = 1..k'+1), {} violations, {} infeasible, min {:.6}; \
                 k = k'+5 reaches {:.6}",
                a.checked, a.violations, a.infeasible, a.min_value, a.beyond_range_min
            ),
        ))
    });

    run.check(9, "CETSQ audit", secs(60), || {
        let rows = audits::cetsq_audit(&cfg).map_err(err)?;
        let finite = rows.iter().all(|r| r.ratio.is_finite());
        let max = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
        let single = cetsq_ratio(&FrequencySet::unit(vec![0.0]).map_err(err)?);
        Ok(outcome(
            finite && single == 0.5 && rows.len() == 1000,
            format!("{} sets, all finite: {finite}, max ratio {max:.6}, single frequency ratio {single}", rows.len()),
        ))
    });

    run.check(10, "stacking audit", secs(300), || {
        let a = audits::stacking_audit(&gasket, &cfg).map_err(err)?;
        let per: Vec<String> = a
            .per_n
            .iter()
            .map(|s| format!("N={}: Ĉ={:.4} at (θ={:.3}, K={}, M={})", s.n, s.c_hat, s.theta, s.k, s.m))
            .collect();
        let finite = a.rows.iter().all(|r| r.ratio.is_none_or(f64::is_finite));
        Ok(outcome(
            finite && a.spread() <= 0.10,
            format!(
                "{}; max deviation from mean {:.1}%, max/min - 1 = {:.1}%",
                per.join("; "),
                100.0 * a.spread(),
                100.0 * a.drift()
            ),
        ))
    });

    run.check(11, "exponent ledger", secs(1), || {
        let two = ExponentLedger::compute(2.4, 2.0);
        let three = ExponentLedger::compute(2.4, 3.0);
        let ok = two.m == 5
            && two.alpha_min < 21.86
            && (two.eps0_denominator() - 223.0).abs() <= 1.0
            && (two.p_denominator - 225.0).abs() <= 1.0;
        Ok(outcome(
            ok,
            format!(
                "M = {}, α_min = {:.5}, A_min = {:.4}, 1/ε₀ = {:.3}, p denominator {:.3} (β = 2), {:.3} (β = 3)",
                two.m,
                two.alpha_min,
                two.a_min,
                two.eps0_denominator(),
                two.p_denominator,
                three.p_denominator
            ),
        ))
    });

    run.check(12, "Plancherel", secs(120), || {
        let rows = audits::plancherel_audit(&gasket, &cfg, &[0.4, 1.1]).map_err(err)?;
        let worst = rows.iter().map(|r| r.report.relative_gap).fold(0.0, f64::max);
        let decreasing = rows.iter().all(|r| r.decreases());
        let xs: Vec<String> = rows
            .iter()
            .map(|r| format!("n={} θ={}: X={:.0} gap {:.2e}→{:.2e}", r.n, r.theta, r.report.x_max, r.report.relative_gap, r.doubled.relative_gap))
            .collect();
        Ok(outcome(worst < 0.02 && decreasing, format!("max gap {worst:.3e}; {}", xs.join("; "))))
    });

    let passed = run.results.iter().filter(|p| **p).count();
    println!("{passed}/{} criteria passed", run.results.len());
    if passed == run.results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
