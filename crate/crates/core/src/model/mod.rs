//! Device parameters, circuit relations, Bessel-function coupling
//! renormalization and Hamiltonian builders.

mod bessel;
mod circuit;
mod hamiltonian;
mod params;

pub use bessel::{bessel_j0, bessel_j1, J0_FIRST_ZERO};
pub use circuit::{coupling_from_circuit, effective_coupling, epsilon_from_flux, qubit_frequency, zero_point_current};
pub use hamiltonian::{
    build_effective_hamiltonian, build_jc_hamiltonian, build_lab_hamiltonian, CouplingForm, DriveProfile,
    DriveWindow, DrivenHamiltonian,
};
pub use params::{
    CouplingParams, DeviceModel, DriveParams, QubitBias, QubitParams, ResonatorParams, DEFAULT_FOCK_CUTOFF,
};
