//! Certified gate-error bounds for Gaussian implementations of logical gates
//! on finitely squeezed GKP codes.

pub mod circuit;
pub mod error;
pub mod gate_error;
pub mod gkp_states;
pub mod grid;
pub mod matrix_elements;
pub mod numerical_range;
pub mod numerics;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Complex = num_complex::Complex<f64>;
pub type Tolerance = numerics::Tolerance<f64>;
pub type LatticeSumSpec = numerics::LatticeSumSpec<f64>;

pub use gkp_states::{GkpParams, PeakSumState, StateFamily};
pub use gate_error::{GateErrorCertificate, LogicalTarget};
pub use matrix_elements::{FourierConvention, GateSpec, MatrixElements};
