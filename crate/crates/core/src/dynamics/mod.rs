//! Linearized fluctuation dynamics `f' = A f + b` around a working point.
//!
//! Fluctuation ordering: `(dq1, dp1, dq2, dp2, dX1, dY1, dX2, dY2)`. Each
//! cavity amplitude is phase-rotated so that `c_s` is real and non-negative,
//! which makes `A` real:
//!
//! ```text
//! dq_m' = omega_m dp_m
//! dp_m' = −omega_m dq_m − gamma_m dp_m + lambda dq_(3-m) + sigma_m F_m dX_m + xi_m
//! dX_m' = −kappa dX_m + Delta_m dY_m + sqrt(2 kappa) X_in,m
//! dY_m' = −kappa dY_m − Delta_m dX_m + sigma_m F_m dq_m + sqrt(2 kappa) Y_in,m
//! ```

mod routh;

use nalgebra::{Complex, SMatrix, Schur};

pub use routh::{routh_hurwitz, Condition, RouthHurwitz};

use crate::error::{Error, Result};
use crate::model::DerivedParams;
use crate::scalar::Real;
use crate::steadystate::WorkingPoint;

pub const DIM: usize = 8;
pub type Mat8<T> = SMatrix<T, DIM, DIM>;

/// Names of the fluctuation components, in matrix order.
pub const ORDERING: [&str; DIM] = ["q1", "p1", "q2", "p2", "X1", "Y1", "X2", "Y2"];

/// Matrix indices of subsystem `m` (0 or 1).
pub mod index {
    pub const fn q(m: usize) -> usize {
        2 * m
    }
    pub const fn p(m: usize) -> usize {
        2 * m + 1
    }
    pub const fn x(m: usize) -> usize {
        4 + 2 * m
    }
    pub const fn y(m: usize) -> usize {
        5 + 2 * m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel<T: Real> {
    /// Drift matrix `A` (rad/s).
    pub drift: Mat8<T>,
    /// Diagonal diffusion matrix `D` (rad/s).
    pub diffusion: Mat8<T>,
    /// Operating point and parameters the matrices were built from; `None`
    /// for models assembled directly from matrices.
    pub origin: Option<(WorkingPoint<T>, DerivedParams<T>)>,
}

impl<T: Real> LinearModel<T> {
    pub fn from_matrices(drift: Mat8<T>, diffusion: Mat8<T>) -> Self {
        LinearModel {
            drift,
            diffusion,
            origin: None,
        }
    }

    /// Rate used to nondimensionalize time in the numerical routines.
    pub fn time_scale(&self) -> T {
        match &self.origin {
            Some((_, d)) => d.omega_m,
            None => {
                let m = self.drift.amax();
                if m > T::zero() {
                    m
                } else {
                    T::one()
                }
            }
        }
    }
}

/// Builds `A` and `D` for the fluctuations around `wp`.
pub fn build_linear_model<T: Real>(wp: &WorkingPoint<T>, d: &DerivedParams<T>) -> LinearModel<T> {
    use index::*;
    let mut a = Mat8::<T>::zeros();
    let mut diff = Mat8::<T>::zeros();
    let mech_noise = d.gamma_m * (T::lit(2.0) * d.nbar_m + T::one());
    let cav_noise = d.kappa * (T::lit(2.0) * d.n_c + T::one());
    for m in 0..2 {
        let other = 1 - m;
        let sigma: T = wp.pressure_sign.sign(m);
        let f = sigma * wp.coupling[m];
        let de = wp.delta_eff[m];

        a[(q(m), p(m))] = d.omega_m;
        a[(p(m), q(m))] = -d.omega_m;
        a[(p(m), p(m))] = -d.gamma_m;
        a[(p(m), q(other))] = d.lambda;
        a[(p(m), x(m))] = f;

        a[(x(m), x(m))] = -d.kappa;
        a[(x(m), y(m))] = de;
        a[(y(m), y(m))] = -d.kappa;
        a[(y(m), x(m))] = -de;
        a[(y(m), q(m))] = f;

        diff[(p(m), p(m))] = mech_noise;
        diff[(x(m), x(m))] = cav_noise;
        diff[(y(m), y(m))] = cav_noise;
    }
    LinearModel {
        drift: a,
        diffusion: diff,
        origin: Some((*wp, *d)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport<T> {
    pub eigenvalues: Vec<Complex<T>>,
    pub max_real_part: T,
    pub is_stable_eigen: bool,
    /// Hurwitz conditions derived from the characteristic polynomial of `A`.
    pub rh_conditions: Vec<Condition>,
    pub is_stable_rh: bool,
    /// Three-condition set evaluated under the literal symbol mapping; informational.
    pub printed_conditions: Vec<Condition>,
}

/// Eigenvalues of the drift matrix, computed on `A / time_scale`.
pub fn eigenvalues<T: Real>(model: &LinearModel<T>) -> Result<Vec<Complex<T>>> {
    if !model.drift.iter().all(|v| v.is_finite()) {
        return Err(Error::EigenFailure);
    }
    let s = model.time_scale();
    let scaled = model.drift / s;
    let schur = Schur::try_new(scaled, T::eps(), 10_000).ok_or(Error::EigenFailure)?;
    Ok(schur
        .complex_eigenvalues()
        .iter()
        .map(|z| Complex::new(z.re * s, z.im * s))
        .collect())
}

/// Eigenvalue stability test: stable iff every `Re(eig) < −margin`.
pub fn eigen_stability<T: Real>(model: &LinearModel<T>, margin: T) -> Result<StabilityReport<T>> {
    let eigenvalues = eigenvalues(model)?;
    let max_real_part = eigenvalues
        .iter()
        .map(|z| z.re)
        .fold(T::min_value().unwrap(), |a, b| a.max(b));
    let rh = routh_hurwitz(model);
    Ok(StabilityReport {
        is_stable_eigen: max_real_part < -margin,
        max_real_part,
        eigenvalues,
        is_stable_rh: rh.is_stable(),
        rh_conditions: rh.derived,
        printed_conditions: rh.printed,
    })
}
