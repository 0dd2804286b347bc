use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A construction would exceed the configured generation cap.
    #[error("generation {requested} exceeds cap {cap} ({bytes} bytes estimated)")]
    Resource { requested: u32, cap: u32, bytes: u64 },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// The argument principle could not be evaluated robustly on a box.
    #[error("winding count unstable on [{re_lo}, {re_hi}] x [{im_lo}, {im_hi}]")]
    WindingUnstable {
        re_lo: f64,
        re_hi: f64,
        im_lo: f64,
        im_hi: f64,
    },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("fourier truncation tail {tail:e} exceeds tolerance {tol:e} at x_max = {x_max}")]
    Truncation { tail: f64, tol: f64, x_max: f64 },
}
