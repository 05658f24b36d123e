use super::rabi::require_resonance;
use crate::dynamics::{evolve_lindblad, evolve_unitary, model_collapses, EvolutionResult, TimeGrid};
use crate::error::{Error, Result};
use crate::linalg::Qubit;
use crate::model::{build_effective_hamiltonian, DeviceModel, DrivenHamiltonian};

/// Full lab-frame run against the Bessel-renormalized Jaynes–Cummings run.
#[derive(Debug, Clone)]
pub struct EffectiveComparison {
    pub full: EvolutionResult,
    pub effective: EvolutionResult,
    /// Drive amplitude given to the effective model (rad/s).
    pub effective_amplitude: f64,
    /// `max_t |P_full − P_eff|`.
    pub peak_deviation: f64,
}

/// Evolves `|e,0⟩` under the full model at its drive amplitude and under
/// the effective model at `effective_amplitude`, with the model's losses.
///
/// Pass the model's own amplitude to compare at equal drive. At a switch-off
/// point, the two models reach zero coupling at slightly different
/// amplitudes, so each should be given its own.
pub fn compare_effective(model: &DeviceModel, effective_amplitude: f64, grid: &TimeGrid) -> Result<EffectiveComparison> {
    require_resonance(model)?;
    if model.drive().is_none() {
        return Err(Error::InvalidArgument("comparison needs a drive".into()));
    }
    let psi0 = model.layout().basis_ket(Qubit::Excited, 0);
    let collapses = model_collapses(model);
    let full_h = DrivenHamiltonian::lab(model)?;
    let eff_h = build_effective_hamiltonian(&model.clone().with_drive_amplitude(effective_amplitude)?)?;
    let (full, effective) = if collapses.is_empty() {
        (evolve_unitary(&full_h, &psi0, grid)?, evolve_unitary(&eff_h, &psi0, grid)?)
    } else {
        let rho0 = psi0.to_density();
        (
            evolve_lindblad(&full_h, &collapses, &rho0, grid)?,
            evolve_lindblad(&eff_h, &collapses, &rho0, grid)?,
        )
    };
    let peak_deviation = full
        .excited_population
        .iter()
        .zip(&effective.excited_population)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(EffectiveComparison { full, effective, effective_amplitude, peak_deviation })
}
