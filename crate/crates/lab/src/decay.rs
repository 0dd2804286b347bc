//! Power-law and `log n / n` fits of a Favard table.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub pairs: Vec<(u32, f64)>,
    /// `p̂` in `Fav ≈ C n^{-p̂}`.
    pub exponent: f64,
    /// `ln C`.
    pub intercept: f64,
    /// Euclidean norm of the log-log residuals.
    pub residual_norm: f64,
    /// `min_n Fav·n / ln n`.
    pub lower_constant: f64,
    /// `n` attaining `lower_constant`.
    pub lower_argmin: u32,
}

/// Least squares on `(ln n, ln Fav)` over `n ≥ 2`.
pub fn fit_decay(pairs: &[(u32, f64)]) -> Result<DecayFit> {
    let used: Vec<(f64, f64, u32)> = pairs
        .iter()
        .filter(|(n, _)| *n >= 2)
        .map(|&(n, fav)| ((n as f64).ln(), fav, n))
        .collect();
    if used.len() < 2 {
        return Err(LabError::Config(format!("need Favard values for at least two n >= 2, got {}", used.len())));
    }
    if let Some(&(_, fav, n)) = used.iter().find(|(_, fav, _)| !(*fav > 0.0)) {
        return Err(LabError::Invariant(format!("Fav(G_{n}) = {fav} is not positive")));
    }
    let k = used.len() as f64;
    let mx = used.iter().map(|u| u.0).sum::<f64>() / k;
    let my = used.iter().map(|u| u.1.ln()).sum::<f64>() / k;
    let sxx: f64 = used.iter().map(|u| (u.0 - mx).powi(2)).sum();
    let sxy: f64 = used.iter().map(|u| (u.0 - mx) * (u.1.ln() - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual_norm = used
        .iter()
        .map(|u| (u.1.ln() - intercept - slope * u.0).powi(2))
        .sum::<f64>()
        .sqrt();
    let (lower_constant, lower_argmin) = used
        .iter()
        .map(|&(ln_n, fav, n)| (fav * n as f64 / ln_n, n))
        .fold((f64::INFINITY, 0), |best, c| if c.0 < best.0 { c } else { best });
    Ok(DecayFit {
        pairs: pairs.to_vec(),
        exponent: -slope,
        intercept,
        residual_norm,
        lower_constant,
        lower_argmin,
    })
}
