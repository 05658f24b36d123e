use super::eigen::hermitian_eigen;
use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};

const STRUCTURE_TOL: f64 = 1e-13;

/// Matrix exponential.
///
/// Hermitian and anti-Hermitian arguments go through an eigendecomposition,
/// so `exp(−iHt)` is unitary to rounding. Everything else uses degree-13
/// Padé scaling and squaring.
pub fn matrix_exp(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::Shape(format!("matrix_exp needs a square matrix, got {}x{}", a.rows(), a.cols())));
    }
    if a.max_abs() == 0.0 {
        return Ok(ComplexMatrix::identity(a.rows()));
    }
    if a.is_hermitian(STRUCTURE_TOL) {
        return Ok(exp_hermitian(a, C64::new(1.0, 0.0)));
    }
    if a.is_anti_hermitian(STRUCTURE_TOL) {
        // A = iH with H = −iA Hermitian.
        let h = a.scale(C64::new(0.0, -1.0));
        return Ok(exp_hermitian(&h, C64::new(0.0, 1.0)));
    }
    pade_exp(a)
}

/// `exp(−i·h·dt)` for Hermitian `h`.
pub fn propagator(h: &ComplexMatrix, dt: f64) -> ComplexMatrix {
    exp_hermitian(h, C64::new(0.0, -dt))
}

/// Scratch space for [`apply_propagator`].
#[derive(Debug, Default)]
pub(crate) struct ActionWork {
    entries: Vec<(usize, usize, C64)>,
    term: Vec<C64>,
    next: Vec<C64>,
}

/// `ψ ← exp(−i·h·dt) ψ` by a Taylor series summed to rounding, with the
/// step split so each piece has `‖h·dt‖∞ ≤ 1`. Only nonzero entries of `h`
/// are visited.
pub(crate) fn apply_propagator(h: &ComplexMatrix, dt: f64, psi: &mut [C64], work: &mut ActionWork) {
    let n = h.rows();
    let norm = (0..n).map(|i| h.data()[i * n..(i + 1) * n].iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max);
    let pieces = ((norm * dt.abs()).ceil() as usize).max(1);
    let scale = C64::new(0.0, -dt / pieces as f64);
    work.entries.clear();
    for (k, v) in h.data().iter().enumerate() {
        if *v != C64::new(0.0, 0.0) {
            work.entries.push((k / n, k % n, v * scale));
        }
    }
    work.term.resize(n, C64::new(0.0, 0.0));
    work.next.resize(n, C64::new(0.0, 0.0));
    for _ in 0..pieces {
        work.term.copy_from_slice(psi);
        for k in 1..64 {
            work.next.fill(C64::new(0.0, 0.0));
            for &(i, j, a) in &work.entries {
                work.next[i] += a * work.term[j];
            }
            let inv = 1.0 / k as f64;
            let mut size: f64 = 0.0;
            for (t, x) in work.term.iter_mut().zip(&work.next) {
                *t = x * inv;
                size = size.max(t.norm_sqr());
            }
            for (p, t) in psi.iter_mut().zip(&work.term) {
                *p += t;
            }
            if size < 1e-36 {
                break;
            }
        }
    }
}

/// `exp(z·H)` for Hermitian `H` and complex scalar `z`.
fn exp_hermitian(h: &ComplexMatrix, z: C64) -> ComplexMatrix {
    let eig = hermitian_eigen(h);
    let n = h.rows();
    let phases: Vec<C64> = eig.values.iter().map(|&l| (z * l).exp()).collect();
    let v = &eig.vectors;
    let mut out = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                acc += v[(r, k)] * phases[k] * v[(c, k)].conj();
            }
            out[(r, c)] = acc;
        }
    }
    out
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Scaling and squaring with the [13/13] Padé approximant.
pub(crate) fn pade_exp(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.rows();
    let norm = a.one_norm();
    if !norm.is_finite() {
        return Err(Error::InvalidArgument("matrix_exp of a non-finite matrix".into()));
    }
    let squarings = if norm > THETA13 { (norm / THETA13).log2().ceil() as u32 } else { 0 };
    let a = a.scale_real(0.5f64.powi(squarings as i32));
    let id = ComplexMatrix::identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = PADE13;
    let lin = |c6: f64, c4: f64, c2: f64, c0: f64| -> ComplexMatrix {
        let mut m = a6.scale_real(c6);
        m = &m + &a4.scale_real(c4);
        m = &m + &a2.scale_real(c2);
        if c0 != 0.0 {
            m = &m + &id.scale_real(c0);
        }
        m
    };
    let u_inner = &(&a6 * &lin(b[13], b[11], b[9], 0.0)) + &lin(b[7], b[5], b[3], b[1]);
    let u = &a * &u_inner;
    let v = &(&a6 * &lin(b[12], b[10], b[8], 0.0)) + &lin(b[6], b[4], b[2], b[0]);
    let p = (&v + &u).to_nalgebra();
    let q = (&v - &u).to_nalgebra();
    let mut r = ComplexMatrix::from_nalgebra(
        &q.lu()
            .solve(&p)
            .ok_or_else(|| Error::Numerical("singular Padé denominator".into()))?,
    );
    for _ in 0..squarings {
        r = &r * &r;
    }
    Ok(r)
}
