//! Dense complex linear algebra on the qubit ⊗ resonator space.
//!
//! Basis convention: the qubit index varies slowest (`|q, n⟩ ↦ q·N + n`),
//! and `|e⟩` is the `σz = +1` state at qubit index 0.

mod eigen;
mod expm;
mod matrix;
mod ops;
mod state;

pub use eigen::{hermitian_eigen, hermitian_eigenvalues, normal_eigen, HermitianEigen};
pub use expm::{matrix_exp, propagator};
pub use matrix::{ComplexMatrix, C64};
pub use ops::{
    annihilation, creation, excited_projector, expectation, partial_trace_resonator, pauli_x, pauli_y,
    pauli_z, photon_number_operator, qubit_operator, resonator_operator, sigma_minus, sigma_plus,
    tensor_product, StateRef,
};
pub use state::{DensityMatrix, HilbertLayout, Ket, Qubit};

pub(crate) use expm::{apply_propagator, ActionWork};
pub(crate) use matrix::{gemm, matvec};
