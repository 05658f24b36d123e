use crate::dynamics::quasienergy_gap;
use crate::error::{Error, Result};
use crate::model::DeviceModel;

fn drive_frequency(model: &DeviceModel) -> Result<f64> {
    model
        .drive()
        .map(|d| d.frequency)
        .ok_or_else(|| Error::InvalidArgument("on/off ratio needs a drive frequency".into()))
}

/// `R = gap(λz)/gap(0)` with the Floquet quasienergy gap as the
/// exchange-frequency instrument.
pub fn onoff_ratio(model: &DeviceModel, lambda_z: f64) -> Result<f64> {
    drive_frequency(model)?;
    if !(lambda_z >= 0.0 && lambda_z.is_finite()) {
        return Err(Error::InvalidArgument(format!("λz must be finite and >= 0, got {lambda_z}")));
    }
    let on = quasienergy_gap(&model.clone().with_drive_amplitude(0.0)?)?;
    if on == 0.0 {
        return Err(Error::Numerical("undriven gap is zero; ratio undefined".into()));
    }
    let off = quasienergy_gap(&model.clone().with_drive_amplitude(lambda_z)?)?;
    Ok(off / on)
}

/// Located switch-off point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchOff {
    /// λz_off (rad/s).
    pub amplitude: f64,
    /// Floquet gap at λz_off (rad/s).
    pub gap: f64,
    /// Gap without drive (rad/s).
    pub undriven_gap: f64,
    /// `gap / undriven_gap`.
    pub ratio: f64,
    pub evaluations: usize,
}

const SEARCH_LO: f64 = 1.15;
const SEARCH_HI: f64 = 1.25;
const MAX_EVALUATIONS: usize = 80;

/// Golden-section minimization of the Floquet gap over
/// `λz ∈ [1.15, 1.25]·ωz`.
pub fn find_switch_off(model: &DeviceModel) -> Result<SwitchOff> {
    let wz = drive_frequency(model)?;
    let gap_at = |lz: f64| -> Result<f64> { quasienergy_gap(&model.clone().with_drive_amplitude(lz)?) };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (SEARCH_LO * wz, SEARCH_HI * wz);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (gap_at(c)?, gap_at(d)?);
    let mut evaluations = 2;
    while evaluations < MAX_EVALUATIONS && (b - a) > 1e-13 * wz {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = gap_at(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = gap_at(d)?;
        }
        evaluations += 1;
    }
    let (amplitude, gap) = if fc < fd { (c, fc) } else { (d, fd) };
    let undriven_gap = gap_at(0.0)?;
    Ok(SwitchOff { amplitude, gap, undriven_gap, ratio: gap / undriven_gap, evaluations: evaluations + 1 })
}
