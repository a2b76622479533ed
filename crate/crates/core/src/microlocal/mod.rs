//! Numerical microlocal analysis: wavefront estimates, cone arithmetic and bicharacteristics.

mod cones;
mod flow;
mod probe;
mod propagation;
mod wavefront;

pub use cones::{cone_pattern, microcausal_check, product_compatible, whitney_sum, Compatibility, ConeClass};
pub use flow::{bicharacteristic_flow, Bicharacteristic, ConformallyFlat, ConstantMetric, FlowPoint, PrincipalSymbol};
pub use probe::GaussExp;
pub use propagation::{null_angle_deg, propagation_check, OffConeProbe, PropagationConfig, PropagationReport};
pub use wavefront::{
    directions, wf_estimate, wf_estimate_extrapolated, SampledDistribution, WfConfig, WfEntry, WfEstimate, ZeroHit,
};

use crate::eg_renorm::PairingError;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MicrolocalError {
    #[error("window around {centre:?} does not fit inside the grid")]
    WindowTooWide { centre: Vec<f64> },
    #[error(transparent)]
    Pairing(#[from] PairingError),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
