use super::eigen::hermitian_eigenvalues;
use super::matrix::{ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};

/// Qubit basis label. `Excited` is the `σz = +1` eigenstate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Qubit {
    Excited,
    Ground,
}

impl Qubit {
    /// Row/column of the state in the 2×2 qubit block.
    pub fn index(self) -> usize {
        match self {
            Qubit::Excited => 0,
            Qubit::Ground => 1,
        }
    }
}

/// Truncated qubit ⊗ resonator space, qubit index varying slowest:
/// `|q, n⟩ ↦ q·N + n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertLayout {
    fock_cutoff: usize,
}

impl HilbertLayout {
    pub fn new(fock_cutoff: usize) -> Result<Self> {
        if fock_cutoff < 2 {
            return Err(Error::InvalidArgument(format!(
                "Fock cutoff must be at least 2, got {fock_cutoff}"
            )));
        }
        Ok(Self { fock_cutoff })
    }

    pub fn fock_cutoff(&self) -> usize {
        self.fock_cutoff
    }

    pub fn dim(&self) -> usize {
        2 * self.fock_cutoff
    }

    pub fn index(&self, qubit: Qubit, photons: usize) -> usize {
        assert!(photons < self.fock_cutoff, "photon number {photons} beyond cutoff");
        qubit.index() * self.fock_cutoff + photons
    }

    pub fn basis_ket(&self, qubit: Qubit, photons: usize) -> Ket {
        Ket::basis(self.dim(), self.index(qubit, photons))
    }

    /// Layout matching a joint-space dimension.
    pub fn for_dim(dim: usize) -> Result<Self> {
        if !dim.is_multiple_of(2) {
            return Err(Error::Shape(format!("joint dimension {dim} is not 2·N")));
        }
        Self::new(dim / 2)
    }
}

/// Pure state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    amplitudes: Vec<C64>,
}

impl Ket {
    /// Normalizes the given amplitudes.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if amplitudes.is_empty() || !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidState("ket must have finite, nonzero norm".into()));
        }
        Ok(Self { amplitudes: amplitudes.into_iter().map(|a| a / norm).collect() })
    }

    pub(crate) fn from_raw(amplitudes: Vec<C64>) -> Self {
        Self { amplitudes }
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = C64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Ket) -> C64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn to_density(&self) -> DensityMatrix {
        let n = self.dim();
        let m = ComplexMatrix::from_fn(n, n, |r, c| self.amplitudes[r] * self.amplitudes[c].conj());
        DensityMatrix(m)
    }
}

/// Density operator. Construction through [`DensityMatrix::new`] validates
/// Hermiticity, unit trace and positivity.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-10;
    pub const TRACE_TOL: f64 = 1e-8;
    pub const EIGENVALUE_FLOOR: f64 = -1e-9;

    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidState("density matrix must be square".into()));
        }
        let herm = matrix.hermiticity_error();
        if herm > Self::HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > Self::TRACE_TOL || tr.im.abs() > Self::TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let rho = Self(matrix);
        let min_eig = rho.min_eigenvalue();
        if min_eig < Self::EIGENVALUE_FLOOR {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(rho)
    }

    pub(crate) fn from_raw(matrix: ComplexMatrix) -> Self {
        Self(matrix)
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.0).into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn purity(&self) -> f64 {
        self.0.data().iter().map(|z| z.norm_sqr()).sum()
    }
}
