use nalgebra::linalg::{Schur, SymmetricEigen};

use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
/// `vectors` holds the eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// Column `k` as a vector.
    pub fn vector(&self, k: usize) -> Vec<C64> {
        (0..self.vectors.rows()).map(|r| self.vectors[(r, k)]).collect()
    }

    /// `max|A V − V Λ|`, used to flag an unreliable basis.
    pub fn reconstruction_error(&self, a: &ComplexMatrix) -> f64 {
        let av = a * &self.vectors;
        let n = a.rows();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in 0..n {
                let diff = av[(r, c)] - self.vectors[(r, c)] * self.values[c];
                worst = worst.max(diff.norm());
            }
        }
        worst
    }
}

/// Eigen-decomposition of a Hermitian matrix (only the Hermitian part of
/// `a` is used).
pub fn hermitian_eigen(a: &ComplexMatrix) -> HermitianEigen {
    let n = a.rows();
    let herm = ComplexMatrix::from_fn(n, n, |r, c| 0.5 * (a[(r, c)] + a[(c, r)].conj()));
    let eig = SymmetricEigen::new(herm.to_nalgebra());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    HermitianEigen { values, vectors }
}

pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Vec<f64> {
    let n = a.rows();
    let herm = ComplexMatrix::from_fn(n, n, |r, c| 0.5 * (a[(r, c)] + a[(c, r)].conj()));
    let mut values: Vec<f64> = herm.to_nalgebra().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Eigenvalues and orthonormal eigenvectors (columns) of a normal matrix,
/// e.g. a unitary propagator, via the complex Schur form.
pub fn normal_eigen(a: &ComplexMatrix) -> Result<(Vec<C64>, ComplexMatrix)> {
    if !a.is_square() {
        return Err(Error::Shape("eigen-decomposition needs a square matrix".into()));
    }
    let n = a.rows();
    let schur = Schur::try_new(a.to_nalgebra(), 1e-15, 10_000)
        .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
    let (q, t) = schur.unpack();
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let mut off = 0.0f64;
    for r in 0..n {
        for c in (r + 1)..n {
            off = off.max(t[(r, c)].norm());
        }
    }
    if off > 1e-8 * scale {
        return Err(Error::Numerical(format!(
            "matrix is not normal: Schur off-diagonal {off:e}"
        )));
    }
    let values = (0..n).map(|i| t[(i, i)]).collect();
    Ok((values, ComplexMatrix::from_nalgebra(&q)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermitian_eigen_sorted_and_reconstructs() {
        let a = ComplexMatrix::from_vec(
            2,
            2,
            vec![C64::new(1.0, 0.0), C64::new(0.0, -2.0), C64::new(0.0, 2.0), C64::new(-1.0, 0.0)],
        )
        .unwrap();
        let e = hermitian_eigen(&a);
        let r = 5f64.sqrt();
        assert!((e.values[0] + r).abs() < 1e-13 && (e.values[1] - r).abs() < 1e-13);
        assert!(e.reconstruction_error(&a) < 1e-13);
    }

    #[test]
    fn normal_eigen_of_rotation() {
        let u = ComplexMatrix::from_real(2, 2, &[0.0, -1.0, 1.0, 0.0]).unwrap();
        let (vals, vecs) = normal_eigen(&u).unwrap();
        let mut args: Vec<f64> = vals.iter().map(|v| v.arg()).collect();
        args.sort_by(f64::total_cmp);
        assert!((args[0] + std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!((args[1] - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        let id = vecs.dagger().matmul(&vecs).unwrap();
        assert!(id.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn non_normal_is_rejected() {
        let a = ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, 2.0]).unwrap();
        assert!(normal_eigen(&a).is_err());
    }
}
