use super::matrix::{ComplexMatrix, C64, ZERO};
use super::state::{DensityMatrix, HilbertLayout, Ket};
use crate::error::{Error, Result};

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_vec(2, 2, vec![ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO]).unwrap()
}

/// `σz = diag(+1, −1)` in the (|e⟩, |g⟩) basis.
pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_real_diagonal(&[1.0, -1.0])
}

/// `σ+ = |e⟩⟨g|`.
pub fn sigma_plus() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap()
}

/// `σ− = |g⟩⟨e|`.
pub fn sigma_minus() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[0.0, 0.0, 1.0, 0.0]).unwrap()
}

/// Truncated annihilation operator with `a[n−1, n] = √n`.
pub fn annihilation(n: usize) -> Result<ComplexMatrix> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("annihilation operator needs N >= 2, got {n}")));
    }
    let mut a = ComplexMatrix::zeros(n, n);
    for k in 1..n {
        a[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
    }
    Ok(a)
}

pub fn creation(n: usize) -> Result<ComplexMatrix> {
    Ok(annihilation(n)?.dagger())
}

/// Kronecker product `A ⊗ B` of two square matrices.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() || !b.is_square() {
        return Err(Error::Shape("tensor_product expects square matrices".into()));
    }
    let (na, nb) = (a.rows(), b.rows());
    Ok(ComplexMatrix::from_fn(na * nb, na * nb, |r, c| a[(r / nb, c / nb)] * b[(r % nb, c % nb)]))
}

/// `op ⊗ I_N` on the joint space.
pub fn qubit_operator(op: &ComplexMatrix, layout: HilbertLayout) -> Result<ComplexMatrix> {
    if op.rows() != 2 || op.cols() != 2 {
        return Err(Error::Shape("qubit operator must be 2x2".into()));
    }
    tensor_product(op, &ComplexMatrix::identity(layout.fock_cutoff()))
}

/// `I_2 ⊗ op` on the joint space.
pub fn resonator_operator(op: &ComplexMatrix, layout: HilbertLayout) -> Result<ComplexMatrix> {
    if op.rows() != layout.fock_cutoff() || !op.is_square() {
        return Err(Error::Shape("resonator operator must be NxN".into()));
    }
    tensor_product(&ComplexMatrix::identity(2), op)
}

/// `|e⟩⟨e| ⊗ I`.
pub fn excited_projector(layout: HilbertLayout) -> ComplexMatrix {
    let n = layout.fock_cutoff();
    let diag: Vec<f64> = (0..layout.dim()).map(|i| if i < n { 1.0 } else { 0.0 }).collect();
    ComplexMatrix::from_real_diagonal(&diag)
}

/// `I ⊗ a†a`.
pub fn photon_number_operator(layout: HilbertLayout) -> ComplexMatrix {
    let n = layout.fock_cutoff();
    let diag: Vec<f64> = (0..layout.dim()).map(|i| (i % n) as f64).collect();
    ComplexMatrix::from_real_diagonal(&diag)
}

/// Traces out the resonator, leaving the 2×2 qubit state in the (|e⟩, |g⟩) basis.
pub fn partial_trace_resonator(rho: &DensityMatrix, layout: HilbertLayout) -> Result<DensityMatrix> {
    if rho.dim() != layout.dim() {
        return Err(Error::Shape(format!(
            "state has dimension {}, layout expects {}",
            rho.dim(),
            layout.dim()
        )));
    }
    let n = layout.fock_cutoff();
    let m = rho.matrix();
    let reduced = ComplexMatrix::from_fn(2, 2, |q1, q2| (0..n).map(|k| m[(q1 * n + k, q2 * n + k)]).sum());
    Ok(DensityMatrix::from_raw(reduced))
}

/// A state an observable can be evaluated on.
#[derive(Debug, Clone, Copy)]
pub enum StateRef<'a> {
    Pure(&'a Ket),
    Mixed(&'a DensityMatrix),
}

impl<'a> From<&'a Ket> for StateRef<'a> {
    fn from(k: &'a Ket) -> Self {
        StateRef::Pure(k)
    }
}

impl<'a> From<&'a DensityMatrix> for StateRef<'a> {
    fn from(r: &'a DensityMatrix) -> Self {
        StateRef::Mixed(r)
    }
}

const IMAG_RESIDUE_TOL: f64 = 1e-10;

/// `⟨A⟩` for Hermitian `A`.
pub fn expectation<'a>(a: &ComplexMatrix, state: impl Into<StateRef<'a>>) -> Result<f64> {
    if !a.is_hermitian(1e-12) {
        return Err(Error::NotHermitian { deviation: a.hermiticity_error() });
    }
    let value = match state.into() {
        StateRef::Pure(ket) => {
            if ket.dim() != a.rows() {
                return Err(Error::Shape("observable and ket dimensions differ".into()));
            }
            let av = a.mul_vec(ket.amplitudes())?;
            ket.amplitudes().iter().zip(&av).map(|(x, y)| x.conj() * y).sum::<C64>()
        }
        StateRef::Mixed(rho) => {
            if rho.dim() != a.rows() {
                return Err(Error::Shape("observable and density matrix dimensions differ".into()));
            }
            let n = a.rows();
            let (am, rm) = (a.data(), rho.matrix().data());
            (0..n).flat_map(|i| (0..n).map(move |j| am[i * n + j] * rm[j * n + i])).sum::<C64>()
        }
    };
    if value.im.abs() > IMAG_RESIDUE_TOL * value.re.abs().max(1.0) {
        return Err(Error::Numerical(format!("expectation has imaginary residue {:e}", value.im)));
    }
    Ok(value.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::state::Qubit;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn identity_tensor_identity() {
        let p = tensor_product(&ComplexMatrix::identity(2), &ComplexMatrix::identity(3)).unwrap();
        assert_eq!(p, ComplexMatrix::identity(6));
    }

    #[test]
    fn sigma_z_tensor_identity_diagonal() {
        let p = tensor_product(&pauli_z(), &ComplexMatrix::identity(2)).unwrap();
        let d: Vec<f64> = p.diagonal().iter().map(|z| z.re).collect();
        assert_eq!(d, vec![1.0, 1.0, -1.0, -1.0]);
    }

    #[test]
    fn sigma_x_tensor_a_maps_g1_to_e0() {
        let layout = HilbertLayout::new(2).unwrap();
        let op = tensor_product(&pauli_x(), &annihilation(2).unwrap()).unwrap();
        let out = op.mul_vec(layout.basis_ket(Qubit::Ground, 1).amplitudes()).unwrap();
        let expected = layout.basis_ket(Qubit::Excited, 0);
        for (o, e) in out.iter().zip(expected.amplitudes()) {
            assert!((o - e).norm() < 1e-15);
        }
    }

    #[test]
    fn tensor_product_rejects_rectangular() {
        assert!(tensor_product(&ComplexMatrix::zeros(2, 3), &ComplexMatrix::identity(2)).is_err());
    }

    #[test]
    fn annihilation_ladder() {
        let a = annihilation(2).unwrap();
        let one = a.mul_vec(&[ZERO, C64::new(1.0, 0.0)]).unwrap();
        assert_eq!(one, vec![C64::new(1.0, 0.0), ZERO]);
        let zero = a.mul_vec(&[C64::new(1.0, 0.0), ZERO]).unwrap();
        assert_eq!(zero, vec![ZERO, ZERO]);

        let a4 = annihilation(4).unwrap();
        let num = &a4.dagger() * &a4;
        for (k, z) in num.diagonal().iter().enumerate() {
            assert!((z.re - k as f64).abs() < 1e-14 && z.im == 0.0);
        }
    }

    #[test]
    fn truncated_commutator_shows_edge_artifact() {
        let a = annihilation(3).unwrap();
        let comm = a.commutator(&a.dagger()).unwrap();
        let expected = ComplexMatrix::from_real_diagonal(&[1.0, 1.0, -2.0]);
        assert!(comm.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn annihilation_entries_are_exact_square_roots() {
        let a = annihilation(10).unwrap();
        for n in 1..10 {
            assert_eq!(a[(n - 1, n)].re, (n as f64).sqrt());
        }
        assert!(annihilation(1).is_err());
    }

    #[test]
    fn partial_trace_of_product_state() {
        let layout = HilbertLayout::new(3).unwrap();
        let rho_q = ComplexMatrix::from_vec(
            2,
            2,
            vec![C64::new(0.7, 0.0), C64::new(0.1, 0.2), C64::new(0.1, -0.2), C64::new(0.3, 0.0)],
        )
        .unwrap();
        let rho_r = ComplexMatrix::from_real_diagonal(&[0.5, 0.3, 0.2]);
        let joint = DensityMatrix::new(tensor_product(&rho_q, &rho_r).unwrap()).unwrap();
        let reduced = partial_trace_resonator(&joint, layout).unwrap();
        assert!(reduced.matrix().max_abs_diff(&rho_q) < 1e-15);
    }

    #[test]
    fn partial_trace_of_entangled_state_is_maximally_mixed() {
        let layout = HilbertLayout::new(2).unwrap();
        let mut amps = vec![ZERO; 4];
        amps[layout.index(Qubit::Excited, 0)] = C64::new(FRAC_1_SQRT_2, 0.0);
        amps[layout.index(Qubit::Ground, 1)] = C64::new(FRAC_1_SQRT_2, 0.0);
        let rho = Ket::new(amps).unwrap().to_density();
        let reduced = partial_trace_resonator(&rho, layout).unwrap();
        let half = ComplexMatrix::from_real_diagonal(&[0.5, 0.5]);
        assert!(reduced.matrix().max_abs_diff(&half) < 1e-15);
    }

    #[test]
    fn partial_trace_excited_convention() {
        let layout = HilbertLayout::new(4).unwrap();
        let rho = layout.basis_ket(Qubit::Excited, 0).to_density();
        let reduced = partial_trace_resonator(&rho, layout).unwrap();
        assert_eq!(reduced.matrix()[(0, 0)].re, 1.0);
        assert_eq!(reduced.matrix()[(1, 1)].re, 0.0);
        let wrong = HilbertLayout::new(3).unwrap();
        assert!(partial_trace_resonator(&rho, wrong).is_err());
    }

    #[test]
    fn expectations() {
        let e = Ket::basis(2, 0);
        assert_eq!(expectation(&pauli_z(), &e).unwrap(), 1.0);

        let n = annihilation(3).unwrap();
        let num = &n.dagger() * &n;
        assert_eq!(expectation(&num, &Ket::basis(3, 0)).unwrap(), 0.0);
        let sup = Ket::new(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0), ZERO]).unwrap();
        assert!((expectation(&num, &sup).unwrap() - 0.5).abs() < 1e-15);
        assert!((expectation(&num, &sup.to_density()).unwrap() - 0.5).abs() < 1e-15);

        assert!(matches!(expectation(&sigma_plus(), &e), Err(Error::NotHermitian { .. })));
    }
}
