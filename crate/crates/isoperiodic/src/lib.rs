//! Isoperiodic deformations of hyperelliptic curves y² = λ·Π(λ−x_j)(λ−u_j).
//!
//! The library is generic over the real scalar (`f32` or `f64`); the aliases at the root fix
//! `f64`, which is what the command-line tool uses.

pub mod apps;
pub mod cli;
pub mod comb;
pub mod error;
pub mod hypercurve;
pub mod isoflow;
pub mod linalg;
pub mod periodics;
pub mod quad;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Cx, Real};

pub type Complex64 = num_complex::Complex<f64>;
pub type BranchConfig64 = hypercurve::BranchConfig<f64>;
pub type Curve64 = hypercurve::Curve<f64>;
pub type PeriodData64 = periodics::PeriodData<f64>;
pub type OmegaDifferential64 = periodics::OmegaDifferential<f64>;
