use thiserror::Error;

/// Failure modes of the simulation pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// A derived quantity violates a unit or sign convention the linearized
    /// model depends on (currently: |lambda| >= omega_m).
    #[error("convention violated: {0}")]
    Convention(String),

    /// The quadratic Coulomb expansion is not trustworthy for this geometry.
    #[error("separation r0 = {r0:e} m is not >> zero-point length {x_zpf:e} m")]
    Validity { r0: f64, x_zpf: f64 },

    #[error("steady state did not converge: {reason} (last residual {residual:e})")]
    NoConvergence { reason: String, residual: f64 },

    #[error("root index {index} out of range for {len} roots")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("eigenvalue iteration did not converge")]
    EigenFailure,

    #[error("drift matrix is not Hurwitz (max Re eig = {max_real_part:e})")]
    UnstableModel { max_real_part: f64 },

    #[error("linear solver failed: {reason} (residual {residual:e})")]
    SolverFailure { reason: String, residual: f64 },

    #[error("time step {dt:e} s exceeds bound {bound:e} s")]
    StepTooLarge { dt: f64, bound: f64 },

    #[error("covariance propagation diverged at t = {time:e} s")]
    DivergenceDetected { time: f64 },

    #[error("resolvent (-i w - A) is singular at w = {omega:e} rad/s")]
    SingularResolvent { omega: f64 },

    #[error("bipartition {selector} cannot be taken from a {dim}x{dim} covariance matrix")]
    BadSelector { selector: String, dim: usize },

    #[error("covariance matrix is unphysical: {0}")]
    UnphysicalCm(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
