//! Physical constants and frequency conversions.
//!
//! Every frequency inside the crate is angular (rad/s). Inputs quoted as
//! ordinary frequencies go through [`angular`] exactly once.

use std::f64::consts::TAU;

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Planck constant (J·s).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Elementary charge (C).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Magnetic flux quantum `h/2e` (Wb).
pub const FLUX_QUANTUM: f64 = PLANCK / (2.0 * ELEMENTARY_CHARGE);

pub const KHZ: f64 = 1e3;
pub const MHZ: f64 = 1e6;
pub const GHZ: f64 = 1e9;
pub const NS: f64 = 1e-9;
pub const US: f64 = 1e-6;

/// Ordinary frequency (Hz) to angular (rad/s).
pub fn angular(hz: f64) -> f64 {
    TAU * hz
}

/// Angular frequency (rad/s) to ordinary (Hz).
pub fn ordinary(rad_per_s: f64) -> f64 {
    rad_per_s / TAU
}

pub fn mhz(value: f64) -> f64 {
    angular(value * MHZ)
}

pub fn ghz(value: f64) -> f64 {
    angular(value * GHZ)
}
