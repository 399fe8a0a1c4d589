//! Physical constants in SI units.

/// Speed of light in vacuum (m/s).
pub const C_LIGHT: f64 = 299_792_458.0;

/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Vacuum variance of a single quadrature with a = (q + i p) / sqrt(2).
pub const VACUUM_VARIANCE: f64 = 0.5;
