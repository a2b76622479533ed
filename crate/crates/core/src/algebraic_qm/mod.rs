//! Finite-dimensional involutive algebras, states, GNS representations and Weyl operators.

mod algebra;
mod gns;
mod text;
mod weyl;

pub use algebra::{matrix_units, AlgebraState, FiniteStarAlgebra};
pub use gns::{
    balanced_vector, direct_sum, gns_construct, gns_construct_with_order, gns_uniqueness_check, gram_matrix, gram_rank,
    intertwiner, GnsData, GnsResiduals,
};
pub use text::{algebra_to_text, parse_algebra_text, AlgebraFile};
pub use weyl::{weyl_adjoint_check, weyl_phase, weyl_rep_check, WeylGrid};

/// Numerical tolerance for algebra identities.
pub const TOL: f64 = 1e-10;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("state is not positive: Gram eigenvalue {0:e}")]
    StateNotPositive(f64),
    #[error("GNS {what} check failed with residual {residual:e}")]
    GnsInvariant { what: String, residual: f64 },
    #[error("no intertwiner: residual {0:e}")]
    NoIntertwiner(f64),
    #[error("shift {shift} is not a multiple of the grid spacing {spacing}")]
    ShiftOffGrid { shift: f64, spacing: f64 },
    #[error("dimension mismatch")]
    DimensionMismatch,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
