//! Epstein–Glaser extension of distributions on ℝ¹ from `ℝ∖{0}` to `ℝ`,
//! W-projections, analytic regularization and minimal subtraction.

pub mod demo;
pub mod distribution;
pub mod extension;
pub mod pairing;
pub mod parser;
pub mod quad;
pub mod regularization;
pub mod testfn;

pub use distribution::{DistributionError, Exponent, Side, SymbolicDistribution1D, Term, TermKind};
pub use extension::*;
pub use pairing::{pair, pair_continued, pair_family, pair_probe, PairingError, Probe};
pub use demo::{d_lambda_probes, feynman_square_demo, scaling_probe, FeynmanSquareReport};
pub use parser::parse_distribution;
pub use regularization::*;
pub use testfn::{TestFunction1D, Window};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EgError {
    #[error(transparent)]
    Pairing(#[from] PairingError),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error("projection order {got} does not match ⌊div⌋ = {expected}")]
    WrongProjectionOrder { expected: i64, got: i64 },
    #[error("w-functions violate ∂^β w_α(0) = δ_αβ by {0:.3e}")]
    DualityViolated(f64),
    #[error("difference of extensions is not supported at the origin (residual {0:.3e})")]
    NonLocalDifference(f64),
    #[error("Laurent fit failed (residual {residual:.3e}); pole order above {cap}")]
    PoleOrderExceeded { residual: f64, cap: usize },
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}
