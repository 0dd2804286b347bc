//! Exponent bookkeeping for the Favard decay bound.

use serde::{Deserialize, Serialize};

use crate::output::Table;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentLedger {
    pub strip_h: f64,
    /// `(e + 1) e^H`, the sup bound of `φ̃_t` on the strip `|Im z| ≤ H`.
    pub sup_bound: f64,
    /// `⌊log₂((e + 1) e^H)⌋`.
    pub m: u32,
    /// `5 / log₃(9/7)`.
    pub alpha_min: f64,
    /// `M α_min + 2`.
    pub a_min: f64,
    /// `1 / (2 A_min)`.
    pub eps0_max: f64,
    pub beta: f64,
    /// `1/ε₀ + β`.
    pub p_denominator: f64,
    /// `1 / (1/ε₀ + β)`.
    pub p_max: f64,
}

impl ExponentLedger {
    pub fn compute(strip_h: f64, beta: f64) -> Self {
        let e = std::f64::consts::E;
        let sup_bound = (e + 1.0) * strip_h.exp();
        let m = sup_bound.log2().floor() as u32;
        let alpha_min = 5.0 / (9.0f64 / 7.0).log(3.0);
        let a_min = m as f64 * alpha_min + 2.0;
        let eps0_max = 1.0 / (2.0 * a_min);
        let p_denominator = 1.0 / eps0_max + beta;
        ExponentLedger {
            strip_h,
            sup_bound,
            m,
            alpha_min,
            a_min,
            eps0_max,
            beta,
            p_denominator,
            p_max: 1.0 / p_denominator,
        }
    }

    /// `ε* = ½·3^{-α_min M}`, inside the admissible range `ε* < 3^{-αM}`.
    pub fn default_eps_star(&self) -> f64 {
        0.5 * 3f64.powf(-self.alpha_min * self.m as f64)
    }

    pub fn eps0_denominator(&self) -> f64 {
        1.0 / self.eps0_max
    }
}

/// Ledger rows for the configured `β` and both documented endpoints.
pub fn exponent_ledger(strip_h: f64, beta: f64) -> Vec<ExponentLedger> {
    let mut betas = vec![beta];
    for b in [2.0, 3.0] {
        if !betas.contains(&b) {
            betas.push(b);
        }
    }
    betas.into_iter().map(|b| ExponentLedger::compute(strip_h, b)).collect()
}

pub fn ledger_table(rows: &[ExponentLedger]) -> Table {
    let mut table = Table::new(&[
        "H", "sup_bound", "M", "alpha_min", "A_min", "eps0_max", "eps0_denominator", "beta", "p_denominator", "p_max",
    ]);
    for r in rows {
        table.push(vec![
            r.strip_h.into(),
            r.sup_bound.into(),
            r.m.into(),
            r.alpha_min.into(),
            r.a_min.into(),
            r.eps0_max.into(),
            r.eps0_denominator().into(),
            r.beta.into(),
            r.p_denominator.into(),
            r.p_max.into(),
        ]);
    }
    table
}
