//! Time evolution: exponential unitary propagation, Lindblad
//! master-equation integration, and one-period Floquet propagators.
//!
//! Time-dependent problems are integrated in the interaction picture of
//! the Hamiltonian's diagonal part when it exposes a [`Frame`]; the
//! longitudinal drive is diagonal, so its fast phase is handled exactly.

mod floquet;
mod frame;
mod grid;
mod lindblad;
mod step;
mod unitary;

pub use floquet::{
    floquet_propagator, floquet_propagator_with, fold_gap, quasienergy_gap, quasienergy_gap_with, FloquetOptions,
    FloquetResult, ResonantPair,
};
pub use frame::Frame;
pub use grid::TimeGrid;

/// Default integrator step cap (s): 40 steps per period of the fastest
/// frequency in `h`, and of the fastest coupling phase in its frame.
pub fn step_cap(h: &dyn Hamiltonian) -> f64 {
    let lab = grid::frequency_cap(h.frequency_bound());
    match h.frame() {
        Some(f) => lab.min(grid::frequency_cap(f.max_rate())),
        None => lab,
    }
}
pub use lindblad::{evolve_lindblad, model_collapses, CollapseSpec};
pub use unitary::evolve_unitary;

use crate::linalg::{ComplexMatrix, DensityMatrix};

/// A (possibly time-dependent) Hamiltonian `H(t)/ħ` in rad/s.
pub trait Hamiltonian: Sync {
    fn dim(&self) -> usize;

    fn at(&self, t: f64) -> ComplexMatrix;

    /// Writes `H(t)` into a preallocated matrix of the right shape.
    fn fill_at(&self, t: f64, out: &mut ComplexMatrix) {
        *out = self.at(t);
    }

    /// Upper bound (rad/s) on the fastest frequency in `H`; sets the step cap.
    fn frequency_bound(&self) -> f64;

    /// Times at which `H` jumps; integrators never step across them.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    fn is_static(&self) -> bool {
        false
    }

    /// Diagonal/off-diagonal split for interaction-picture integration.
    /// Without one, integrators step `H(t)` itself.
    fn frame(&self) -> Option<Frame> {
        None
    }
}

impl Hamiltonian for ComplexMatrix {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn at(&self, _t: f64) -> ComplexMatrix {
        self.clone()
    }

    fn frequency_bound(&self) -> f64 {
        crate::linalg::hermitian_eigenvalues(self).iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn is_static(&self) -> bool {
        true
    }

    fn frame(&self) -> Option<Frame> {
        Some(Frame::new(self, vec![0.0; self.rows()], crate::model::DriveProfile::Off))
    }
}

/// Closure-backed Hamiltonian.
pub struct FnHamiltonian<F> {
    dim: usize,
    frequency_bound: f64,
    f: F,
}

impl<F: Fn(f64) -> ComplexMatrix + Sync> FnHamiltonian<F> {
    pub fn new(dim: usize, frequency_bound: f64, f: F) -> Self {
        Self { dim, frequency_bound, f }
    }
}

impl<F: Fn(f64) -> ComplexMatrix + Sync> Hamiltonian for FnHamiltonian<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn at(&self, t: f64) -> ComplexMatrix {
        (self.f)(t)
    }

    fn frequency_bound(&self) -> f64 {
        self.frequency_bound
    }
}

/// Worst-case numerical health over the output samples of a run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EvolutionDiagnostics {
    pub max_norm_deviation: f64,
    pub max_trace_deviation: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
    pub steps: usize,
}

/// Observable traces sampled on a [`TimeGrid`].
#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    /// Qubit excited-state population P.
    pub excited_population: Vec<f64>,
    /// Mean photon number ⟨a†a⟩.
    pub photon_number: Vec<f64>,
    pub final_state: DensityMatrix,
    pub diagnostics: EvolutionDiagnostics,
}
