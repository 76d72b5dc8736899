//! CODATA physical constants in SI units.

/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380_649e-23;
/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Coulomb constant 1/(4 pi eps0) (N m^2 / C^2).
pub const COULOMB_K: f64 = 8.987_551_792_3e9;
