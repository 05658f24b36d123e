//! Circuit-level relations between device quantities.

use super::bessel::bessel_j0;
use crate::error::{Error, Result};
use crate::units::{FLUX_QUANTUM, HBAR};

/// `ε = 2·Ip·(Φε − Φ0/2)/ħ` in rad/s.
pub fn epsilon_from_flux(flux: f64, persistent_current: f64) -> Result<f64> {
    if !(persistent_current > 0.0) {
        return Err(Error::InvalidArgument("persistent current must be positive".into()));
    }
    Ok(2.0 * persistent_current * (flux - 0.5 * FLUX_QUANTUM) / HBAR)
}

/// `ωqb = √(Δ² + ε²)`.
pub fn qubit_frequency(gap: f64, epsilon: f64) -> f64 {
    gap.hypot(epsilon)
}

/// `Ir = √(ħωr/Lr)`.
pub fn zero_point_current(resonator_frequency: f64, inductance: f64) -> f64 {
    (HBAR * resonator_frequency / inductance).sqrt()
}

/// `g = M·Ip·Ir/ħ` with `Ir = √(ħωr/Lr)`.
pub fn coupling_from_circuit(
    mutual_inductance: f64,
    persistent_current: f64,
    resonator_frequency: f64,
    resonator_inductance: f64,
) -> Result<f64> {
    let inputs = [mutual_inductance, persistent_current, resonator_frequency, resonator_inductance];
    if inputs.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidArgument("circuit coupling inputs must be positive".into()));
    }
    let ir = zero_point_current(resonator_frequency, resonator_inductance);
    Ok(mutual_inductance * persistent_current * ir / HBAR)
}

/// Drive-renormalized exchange `g·J0(2λz/ωz)`. Signed.
pub fn effective_coupling(g: f64, amplitude: f64, drive_frequency: f64) -> Result<f64> {
    if !(drive_frequency > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "drive frequency must be positive, got {drive_frequency}"
        )));
    }
    Ok(g * bessel_j0(2.0 * amplitude / drive_frequency)?)
}
