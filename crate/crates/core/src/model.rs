//! Laboratory-unit parameters and the frequency-unit quantities derived from
//! them.
//!
//! Conventions fixed here and used everywhere else:
//!
//! * mirror quadratures `q`, `p` and cavity quadratures `X = (c + c†)/√2`,
//!   `Y = (c − c†)/(i√2)` are dimensionless with `[q, p] = i`, so vacuum
//!   variances are 1/2;
//! * every coupling (`chi`, `lambda`, `eps_p`) is an angular frequency;
//! * `kappa` is the cavity amplitude decay rate (half linewidth), entering the
//!   cavity equation as `−kappa c + √(2 kappa) c_in`.

use crate::constants::{COULOMB_K, HBAR, K_B};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Mechanical cross coupling, given directly or from the mirror charges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coulomb<T> {
    /// Coupling `lambda` (rad/s) multiplying `q_{3−m}` in the momentum equation of mirror `m`.
    Direct { lambda: T },
    /// Net charges (C) and equilibrium separation (m).
    Charges { q1: T, q2: T, r0: T },
}

/// How the drive frequency is specified.
///
/// `Detuning` is preferred: `omega_c − omega_p` is a difference of two
/// ~1e15 rad/s numbers and loses about eight digits when formed explicitly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Drive<T> {
    /// Absolute drive angular frequency `omega_p` (rad/s).
    Frequency(T),
    /// Cavity-to-drive detuning `omega_c − omega_p` (rad/s).
    Detuning(T),
}

/// Direction in which radiation pressure pushes each mirror.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PressureSign {
    /// Both mirrors are pushed along `+q`: `p_m' = ... + chi |c_m|^2`.
    #[default]
    Uniform,
    /// Alternating `(−1)^m` interaction sign: mirror 1 is pushed along `−q`.
    Alternating,
}

impl PressureSign {
    /// Sign `sigma_m` (`m` = 0 or 1) of the radiation-pressure force on mirror `m`.
    pub fn sign<T: Real>(self, m: usize) -> T {
        match (self, m) {
            (PressureSign::Alternating, 0) => -T::one(),
            _ => T::one(),
        }
    }
}

/// Physical description of the two identical cavities, their mirrors, the
/// drives and the thermal bath, in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams<T> {
    /// Mechanical angular frequency (rad/s).
    pub omega_m: T,
    /// Mechanical damping rate (rad/s).
    pub gamma_m: T,
    /// Cavity amplitude decay rate (rad/s).
    pub kappa: T,
    /// Cavity angular frequency (rad/s).
    pub omega_c: T,
    pub drive: Drive<T>,
    /// Cavity length (m).
    pub cavity_length: T,
    /// Input power per cavity (W).
    pub drive_power: T,
    /// Mirror mass (kg).
    pub mirror_mass: T,
    /// Bath temperature (K).
    pub bath_temperature: T,
    pub coulomb: Coulomb<T>,
    pub pressure_sign: PressureSign,
    /// Both cavities, mirrors and drives identical. Only `true` is supported.
    pub symmetric: bool,
}

impl<T: Real> PhysicalParams<T> {
    pub fn detuning(&self) -> T {
        match self.drive {
            Drive::Frequency(wp) => self.omega_c - wp,
            Drive::Detuning(d) => d,
        }
    }

    pub fn omega_p(&self) -> T {
        match self.drive {
            Drive::Frequency(wp) => wp,
            Drive::Detuning(d) => self.omega_c - d,
        }
    }

    /// Checks the field-level invariants (positivity, finiteness).
    pub fn validate(&self) -> Result<()> {
        fn positive<T: Real>(field: &'static str, v: T) -> Result<()> {
            if v.is_finite() && v > T::zero() {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    field,
                    reason: format!("must be finite and > 0, got {:e}", v.as_f64()),
                })
            }
        }
        fn non_negative<T: Real>(field: &'static str, v: T) -> Result<()> {
            if v.is_finite() && v >= T::zero() {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    field,
                    reason: format!("must be finite and >= 0, got {:e}", v.as_f64()),
                })
            }
        }
        if !self.symmetric {
            return Err(Error::InvalidParameter {
                field: "symmetric",
                reason: "only identical cavities and drives are supported".into(),
            });
        }
        positive("omega_m", self.omega_m)?;
        positive("gamma_m", self.gamma_m)?;
        positive("kappa", self.kappa)?;
        positive("omega_c", self.omega_c)?;
        positive("omega_p", self.omega_p())?;
        if !self.detuning().is_finite() {
            return Err(Error::InvalidParameter {
                field: "detuning",
                reason: "must be finite".into(),
            });
        }
        positive("cavity_length", self.cavity_length)?;
        positive("mirror_mass", self.mirror_mass)?;
        non_negative("drive_power", self.drive_power)?;
        non_negative("bath_temperature", self.bath_temperature)?;
        match self.coulomb {
            Coulomb::Direct { lambda } if !lambda.is_finite() => Err(Error::InvalidParameter {
                field: "coulomb.lambda",
                reason: "must be finite".into(),
            }),
            Coulomb::Charges { q1, q2, r0 } => {
                positive("coulomb.separation", r0)?;
                if !(q1.is_finite() && q2.is_finite()) {
                    return Err(Error::InvalidParameter {
                        field: "coulomb.charge",
                        reason: "must be finite".into(),
                    });
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Frequency-unit quantities entering the Langevin equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams<T> {
    pub omega_m: T,
    pub gamma_m: T,
    pub kappa: T,
    /// Detuning `omega_c − omega_p` (rad/s).
    pub delta0: T,
    /// Single-photon radiation-pressure coupling per unit dimensionless `q` (rad/s).
    pub chi: T,
    /// Mechanical cross coupling (rad/s).
    pub lambda: T,
    /// Drive amplitude (rad/s, i.e. sqrt(photons/s)).
    pub eps_p: T,
    /// Mechanical thermal occupation.
    pub nbar_m: T,
    /// Optical thermal occupation.
    pub n_c: T,
    /// Zero-point length scale sqrt(hbar / (m omega_m)) (m).
    pub x_zpf: T,
    pub pressure_sign: PressureSign,
}

/// Bose-Einstein occupation `1 / (exp(hbar omega / k_B T) − 1)`; exactly 0 at `T = 0`.
pub fn thermal_occupation<T: Real>(omega: T, temperature: T) -> T {
    if temperature <= T::zero() {
        return T::zero();
    }
    // hbar/k_B folded into one constant keeps f32 away from its subnormal range.
    let x = T::lit(HBAR / K_B) * omega / temperature;
    T::one() / x.exp_m1()
}

/// Derives the frequency-unit parameter set.
pub fn derive<T: Real>(params: &PhysicalParams<T>) -> Result<DerivedParams<T>> {
    params.validate()?;
    let hbar = T::lit(HBAR);
    let mass_omega = params.mirror_mass * params.omega_m;
    let x_zpf = (hbar / mass_omega).sqrt();
    let chi = params.omega_c / params.cavity_length * x_zpf;

    let lambda = match params.coulomb {
        Coulomb::Direct { lambda } => lambda,
        Coulomb::Charges { q1, q2, r0 } => {
            if r0 <= T::lit(10.0) * x_zpf {
                return Err(Error::Validity {
                    r0: r0.as_f64(),
                    x_zpf: x_zpf.as_f64(),
                });
            }
            // Spring constant 2 k Q1 Q2 / r0^3 (N/m) times x_zpf^2 / hbar = 1 / (m omega_m).
            T::lit(2.0 * COULOMB_K) * q1 * q2 / (r0 * r0 * r0) / mass_omega
        }
    };
    if lambda.abs() >= params.omega_m {
        return Err(Error::Convention(format!(
            "|lambda| = {:e} rad/s must be below omega_m = {:e} rad/s",
            lambda.abs().as_f64(),
            params.omega_m.as_f64()
        )));
    }

    let omega_p = params.omega_p();
    let eps_p = (T::lit(2.0) * params.drive_power * params.kappa / (hbar * omega_p)).sqrt();

    Ok(DerivedParams {
        omega_m: params.omega_m,
        gamma_m: params.gamma_m,
        kappa: params.kappa,
        delta0: params.detuning(),
        chi,
        lambda,
        eps_p,
        nbar_m: thermal_occupation(params.omega_m, params.bath_temperature),
        n_c: thermal_occupation(params.omega_c, params.bath_temperature),
        x_zpf,
        pressure_sign: params.pressure_sign,
    })
}
