//! Linearized quantum dynamics of two Coulomb-coupled optomechanical cavities:
//! steady states, stability, Gaussian covariance and entanglement measures.
//!
//! Numerical code is generic over [`scalar::Real`] (`f32` and `f64`); the
//! aliases below fix the common `f64` and `f32` instantiations.

// Tolerance checks are written `!(x < tol)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod constants;
pub mod conventions;
pub mod covariance;
pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod model;
pub mod poly;
pub mod scalar;
pub mod steadystate;

pub use covariance::{
    output_covariance, output_spectrum, propagate_covariance, solve_lyapunov, CovarianceMatrix,
    CovarianceOptions, OutputSpectrumPoint,
};
pub use dynamics::{build_linear_model, eigen_stability, LinearModel, StabilityReport};
pub use dynamics::{routh_hurwitz, RouthHurwitz};
pub use entanglement::{duan, log_negativity, reduce, BipartitionId, EntanglementReport};
pub use error::{Error, Result};
pub use model::{derive, Coulomb, DerivedParams, Drive, PhysicalParams, PressureSign};
pub use scalar::Real;
pub use steadystate::{
    select_working_point, solve_steady_state, BranchPolicy, SteadyStateOptions, WorkingPoint,
};

pub type PhysicalParams64 = PhysicalParams<f64>;
pub type DerivedParams64 = DerivedParams<f64>;
pub type WorkingPoint64 = WorkingPoint<f64>;
pub type LinearModel64 = LinearModel<f64>;
pub type CovarianceMatrix64 = CovarianceMatrix<f64>;

pub type PhysicalParams32 = PhysicalParams<f32>;
pub type DerivedParams32 = DerivedParams<f32>;
pub type WorkingPoint32 = WorkingPoint<f32>;
pub type LinearModel32 = LinearModel<f32>;
pub type CovarianceMatrix32 = CovarianceMatrix<f32>;
