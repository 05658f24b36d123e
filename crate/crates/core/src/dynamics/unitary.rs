use std::collections::HashMap;

use super::grid::plan;
use super::{EvolutionDiagnostics, EvolutionResult, Hamiltonian, TimeGrid};
use crate::error::{Error, Result};
use super::step::{Generator, Stepper};
use crate::linalg::{matvec, propagator, ComplexMatrix, HilbertLayout, Ket, C64};

/// Excited population and mean photon number of a pure state.
pub(crate) fn ket_observables(psi: &[C64], layout: HilbertLayout) -> (f64, f64) {
    let n = layout.fock_cutoff();
    let mut p = 0.0;
    let mut photons = 0.0;
    for (i, a) in psi.iter().enumerate() {
        let w = a.norm_sqr();
        if i < n {
            p += w;
        }
        photons += (i % n) as f64 * w;
    }
    (p, photons)
}

/// Propagates `psi0` under `H(t)`.
///
/// Static Hamiltonians reuse one exact propagator per distinct step length.
/// Time-dependent ones take fourth-order commutator-free exponential steps,
/// each exponential applied to the state by a Taylor series summed to
/// rounding, so the norm is conserved to rounding as well.
pub fn evolve_unitary(h: &dyn Hamiltonian, psi0: &Ket, grid: &TimeGrid) -> Result<EvolutionResult> {
    let dim = h.dim();
    if psi0.dim() != dim {
        return Err(Error::Shape(format!("state has dimension {}, Hamiltonian {}", psi0.dim(), dim)));
    }
    let layout = HilbertLayout::for_dim(dim)?;
    let intervals = plan(grid, &h.breakpoints(), super::step_cap(h))?;

    let mut psi = psi0.amplitudes().to_vec();
    let mut scratch = vec![C64::new(0.0, 0.0); dim];
    let frame = if h.is_static() { None } else { h.frame() };
    let generator = match &frame {
        Some(f) => Generator::Frame(f),
        None => Generator::Lab(h),
    };
    let mut stepper = Stepper::new(dim);
    if let Some(f) = &frame {
        f.rotate_ket(grid.t_start, &mut psi, 1.0);
    }
    let mut cache: HashMap<u64, ComplexMatrix> = HashMap::new();
    let static_h = h.is_static().then(|| h.at(grid.t_start));

    let times = grid.times();
    let mut excited = Vec::with_capacity(times.len());
    let mut photons = Vec::with_capacity(times.len());
    let mut diag = EvolutionDiagnostics { min_eigenvalue: 0.0, ..Default::default() };
    let mut record = |psi: &[C64], diag: &mut EvolutionDiagnostics| {
        let (p, n) = ket_observables(psi, layout);
        excited.push(p);
        photons.push(n);
        let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        diag.max_norm_deviation = diag.max_norm_deviation.max((norm - 1.0).abs());
    };
    record(&psi, &mut diag);

    for iv in &intervals {
        let dt = iv.step();
        for k in 0..iv.substeps {
            match &static_h {
                Some(hs) => {
                    let u = cache.entry(dt.to_bits()).or_insert_with(|| propagator(hs, dt));
                    matvec(dim, dim, u.data(), &psi, &mut scratch);
                    std::mem::swap(&mut psi, &mut scratch);
                }
                None => stepper.advance(&generator, iv.start + k as f64 * dt, dt, &mut [&mut psi]),
            }
        }
        diag.steps += iv.substeps;
        if iv.sample.is_some() {
            if psi.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
                return Err(Error::Numerical(format!("state became non-finite at t = {:e} s", iv.end)));
            }
            record(&psi, &mut diag);
        }
    }

    if let Some(f) = &frame {
        f.rotate_ket(grid.t_end, &mut psi, -1.0);
    }
    Ok(EvolutionResult {
        times,
        excited_population: excited,
        photon_number: photons,
        final_state: Ket::from_raw(psi).to_density(),
        diagnostics: diag,
    })
}
