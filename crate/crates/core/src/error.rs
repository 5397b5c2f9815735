use thiserror::Error;

/// Errors raised by the infiltration solver and its oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The Hopf–Cole variable must stay strictly positive.
    #[error("non-positive Hopf-Cole state w = {w:e} at x = {x:e} m, t = {t:e} s")]
    NonPositiveW { w: f64, x: f64, t: f64 },

    #[error("spectral kernel Delta(lambda, -L) vanished at lambda = {re:e}{im:+e}i")]
    KernelZero { re: f64, im: f64 },

    #[error("integrand pole lies on the contour at lambda = {re:e}{im:+e}i")]
    PoleOnContour { re: f64, im: f64 },

    #[error("contour geometry: {0}")]
    Geometry(String),

    #[error("time t = {t:e} s is below the contour cut-off {t_min:e} s; use the exact initial data or an oracle")]
    EarlyTime { t: f64, t_min: f64 },

    #[error("quadrature did not converge: error estimate {estimate:e} > tolerance {tol:e} after {panels} panels")]
    NonConvergence {
        estimate: f64,
        tol: f64,
        panels: usize,
    },

    #[error("pole strategy mismatch: {0}")]
    StrategyMismatch(String),

    #[error("finite-difference oracle produced w = {w:e} at node {node}, step {step}")]
    InstabilityDetected { w: f64, node: usize, step: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
