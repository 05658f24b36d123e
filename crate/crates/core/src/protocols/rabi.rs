use std::f64::consts::TAU;

use rayon::prelude::*;

use super::signal::extract_frequency_below;
use super::sweep::{SpectrumMap, SweepSpec, SweepVariable};
use crate::dynamics::{evolve_lindblad, model_collapses, EvolutionDiagnostics, TimeGrid};
use crate::error::{Error, Result};
use crate::linalg::Qubit;
use crate::model::{DeviceModel, DrivenHamiltonian};

#[derive(Debug, Clone)]
pub struct RabiScan {
    /// `P(λz, t)` with x = λz and y = time.
    pub map: SpectrumMap,
    /// Oscillation frequency per column (Hz); `None` where nothing is
    /// resolvable in the window.
    pub frequencies: Vec<Option<f64>>,
    pub diagnostics: Vec<EvolutionDiagnostics>,
}

pub(crate) fn require_resonance(model: &DeviceModel) -> Result<()> {
    if model.epsilon() != 0.0 {
        return Err(Error::InvalidArgument("protocol needs ε = 0".into()));
    }
    let (d, wr) = (model.gap(), model.resonator_frequency());
    if (d - wr).abs() > 1e-9 * wr {
        return Err(Error::InvalidArgument("protocol needs Δ = ωr".into()));
    }
    Ok(())
}

/// Vacuum-Rabi traces from `|e,0⟩` for each drive amplitude, under the
/// full lab-frame Lindblad dynamics.
///
/// Column frequencies are searched below half the drive frequency so the
/// drive ripple is not mistaken for the exchange oscillation.
pub fn rabi_scan(model: &DeviceModel, lambda_z: &SweepSpec, grid: &TimeGrid) -> Result<RabiScan> {
    lambda_z.expect(SweepVariable::LambdaZ)?;
    require_resonance(model)?;
    let drive = *model
        .drive()
        .ok_or_else(|| Error::InvalidArgument("Rabi scan needs a drive frequency".into()))?;
    let amps = lambda_z.values();
    let rho0 = model.layout().basis_ket(Qubit::Excited, 0).to_density();
    let collapses = model_collapses(model);
    let band = 0.5 * drive.frequency / TAU;

    let runs = amps
        .par_iter()
        .map(|&lz| {
            let m = model.clone().with_drive_amplitude(lz)?;
            evolve_lindblad(&DrivenHamiltonian::lab(&m)?, &collapses, &rho0, grid)
        })
        .collect::<Result<Vec<_>>>()?;

    let times = grid.times();
    let frequencies = runs.iter().map(|r| extract_frequency_below(&r.excited_population, &times, band)).collect();
    let diagnostics = runs.iter().map(|r| r.diagnostics).collect();
    let columns = runs.into_iter().map(|r| r.excited_population).collect();
    let map = SpectrumMap::from_columns(SweepVariable::LambdaZ, amps, SweepVariable::Time, times, columns, vec![])?;
    Ok(RabiScan { map, frequencies, diagnostics })
}
