use super::grid::plan;
use super::frame::Frame;
use super::step::Generator;
use super::{EvolutionDiagnostics, EvolutionResult, Hamiltonian, TimeGrid};
use crate::error::{Error, Result};
use crate::linalg::{
    annihilation, gemm, hermitian_eigenvalues, qubit_operator, resonator_operator, sigma_minus, ComplexMatrix,
    DensityMatrix, HilbertLayout, C64,
};
use crate::model::DeviceModel;

/// Collapse operator `L` with rate `γ`: dissipator `γ(LρL† − ½{L†L, ρ})`.
#[derive(Debug, Clone)]
pub struct CollapseSpec {
    pub operator: ComplexMatrix,
    pub rate: f64,
}

/// Qubit relaxation `σ−` at `1/T1q` and photon loss `a` at `1/T1r`.
/// Infinite lifetimes contribute nothing.
pub fn model_collapses(model: &DeviceModel) -> Vec<CollapseSpec> {
    let layout = model.layout();
    let mut out = Vec::new();
    if model.qubit_t1().is_finite() {
        out.push(CollapseSpec {
            operator: qubit_operator(&sigma_minus(), layout).expect("2x2"),
            rate: 1.0 / model.qubit_t1(),
        });
    }
    if model.resonator_t1().is_finite() {
        let a = annihilation(layout.fock_cutoff()).expect("cutoff validated");
        out.push(CollapseSpec { operator: resonator_operator(&a, layout).expect("square"), rate: 1.0 / model.resonator_t1() });
    }
    out
}

/// Jump operator storage; ladder operators have one entry per row.
enum Jump {
    Rows(Vec<Option<(usize, C64)>>),
    Dense(ComplexMatrix),
}

impl Jump {
    fn new(l: &ComplexMatrix) -> Self {
        let n = l.rows();
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let mut entry = None;
            for j in 0..n {
                let v = l[(i, j)];
                if v != C64::new(0.0, 0.0) {
                    if entry.is_some() {
                        return Jump::Dense(l.clone());
                    }
                    entry = Some((j, v));
                }
            }
            rows.push(entry);
        }
        Jump::Rows(rows)
    }
}

struct Dissipator {
    ops: Vec<(Jump, f64)>,
    /// Nonzero entries of `½ Σ γ L†L`.
    half_decay: Vec<(usize, usize, C64)>,
    /// `Σ γ‖L†L‖`, the fastest decay rate the channels can produce.
    decay_scale: f64,
}

impl Dissipator {
    fn new(collapses: &[CollapseSpec], dim: usize) -> Result<Self> {
        let mut ops = Vec::new();
        let mut half_decay = ComplexMatrix::zeros(dim, dim);
        let mut decay_scale = 0.0;
        for c in collapses {
            if c.operator.rows() != dim || c.operator.cols() != dim {
                return Err(Error::Shape(format!(
                    "collapse operator is {}x{}, expected {dim}x{dim}",
                    c.operator.rows(),
                    c.operator.cols()
                )));
            }
            if !(c.rate >= 0.0) || !c.rate.is_finite() {
                return Err(Error::InvalidArgument(format!("collapse rate must be finite and >= 0, got {}", c.rate)));
            }
            if c.rate == 0.0 {
                continue;
            }
            let ldl = c.operator.dagger().matmul(&c.operator)?;
            decay_scale += c.rate * hermitian_eigenvalues(&ldl).last().copied().unwrap_or(0.0);
            half_decay = &half_decay + &ldl.scale_real(0.5 * c.rate);
            ops.push((Jump::new(&c.operator), c.rate));
        }
        let half_decay = (0..dim * dim)
            .filter_map(|k| {
                let v = half_decay.data()[k];
                (v != C64::new(0.0, 0.0)).then_some((k / dim, k % dim, v))
            })
            .collect();
        Ok(Self { ops, half_decay, decay_scale })
    }
}

struct Workspace {
    dim: usize,
    h: ComplexMatrix,
    x: Vec<C64>,
    t: Vec<C64>,
    jump: Vec<C64>,
    l: ComplexMatrix,
    ld: ComplexMatrix,
}

impl Workspace {
    fn new(dim: usize) -> Self {
        let zeros = || vec![C64::new(0.0, 0.0); dim * dim];
        Self {
            dim,
            h: ComplexMatrix::zeros(dim, dim),
            x: zeros(),
            t: zeros(),
            jump: zeros(),
            l: ComplexMatrix::zeros(dim, dim),
            ld: ComplexMatrix::zeros(dim, dim),
        }
    }

    /// `out = −i H_eff ρ + h.c. + Σ γ LρL†` with `H_eff = H − ½iΣγL†L`,
    /// every operator taken into the frame when there is one.
    fn rhs(&mut self, generator: &Generator, frame: Option<&Frame>, diss: &Dissipator, time: f64, rho: &[C64], out: &mut [C64]) {
        let n = self.dim;
        let integral = frame.map_or(0.0, |f| f.integral(time));
        let phase = |i: usize, j: usize| match frame {
            Some(f) if i != j => f.entry_phase(i, j, time, integral, 1.0),
            _ => C64::new(1.0, 0.0),
        };
        generator.fill(time, &mut self.h);
        {
            let hd = self.h.data_mut();
            for &(i, j, k) in &diss.half_decay {
                hd[i * n + j] -= C64::new(0.0, 1.0) * k * phase(i, j);
            }
        }
        gemm(n, n, n, self.h.data(), rho, &mut self.x);
        for i in 0..n {
            for j in 0..n {
                // −i·X_ij + conj(−i·X_ji)
                let a = self.x[i * n + j];
                let b = self.x[j * n + i];
                out[i * n + j] = C64::new(a.im + b.im, -a.re + b.re);
            }
        }
        for (jump, rate) in &diss.ops {
            match jump {
                Jump::Rows(rows) => {
                    for (i, ri) in rows.iter().enumerate() {
                        let Some((p, li)) = ri else { continue };
                        let li = li * phase(i, *p) * rate;
                        for (j, rj) in rows.iter().enumerate() {
                            if let Some((q, lj)) = rj {
                                out[i * n + j] += li * rho[p * n + q] * (lj * phase(j, *q)).conj();
                            }
                        }
                    }
                }
                Jump::Dense(l) => {
                    for i in 0..n {
                        for j in 0..n {
                            self.l[(i, j)] = l[(i, j)] * phase(i, j);
                        }
                    }
                    self.ld = self.l.dagger();
                    gemm(n, n, n, self.l.data(), rho, &mut self.t);
                    gemm(n, n, n, &self.t, self.ld.data(), &mut self.jump);
                    for (o, j) in out.iter_mut().zip(&self.jump) {
                        *o += j * rate;
                    }
                }
            }
        }
    }
}

fn axpy_into(out: &mut [C64], base: &[C64], k: &[C64], s: f64) {
    for ((o, b), k) in out.iter_mut().zip(base).zip(k) {
        *o = b + k * s;
    }
}

/// Integrates the Lindblad master equation with classical RK4.
///
/// The step is capped by the Hamiltonian's frequency bound, the grid's
/// `max_step`, and `1/(40 Σγ‖L†L‖)`; steps never straddle drive breakpoints.
pub fn evolve_lindblad(
    h: &dyn Hamiltonian,
    collapses: &[CollapseSpec],
    rho0: &DensityMatrix,
    grid: &TimeGrid,
) -> Result<EvolutionResult> {
    let dim = h.dim();
    if rho0.dim() != dim {
        return Err(Error::Shape(format!("state has dimension {}, Hamiltonian {}", rho0.dim(), dim)));
    }
    DensityMatrix::new(rho0.matrix().clone())?;
    let layout = HilbertLayout::for_dim(dim)?;
    let diss = Dissipator::new(collapses, dim)?;
    let mut cap = super::step_cap(h);
    if diss.decay_scale > 0.0 {
        cap = cap.min(1.0 / (super::grid::STEPS_PER_PERIOD * diss.decay_scale));
    }
    let intervals = plan(grid, &h.breakpoints(), cap)?;

    let zeros = || vec![C64::new(0.0, 0.0); dim * dim];
    let mut ws = Workspace::new(dim);
    let frame = h.frame();
    let generator = match &frame {
        Some(f) => Generator::Frame(f),
        None => Generator::Lab(h),
    };
    let frame = frame.as_ref();
    let mut rho = rho0.matrix().data().to_vec();
    if let Some(f) = frame {
        f.rotate_density(grid.t_start, &mut rho, 1.0);
    }
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (zeros(), zeros(), zeros(), zeros(), zeros());

    let times = grid.times();
    let mut excited = Vec::with_capacity(times.len());
    let mut photons = Vec::with_capacity(times.len());
    let mut diag = EvolutionDiagnostics { min_eigenvalue: f64::INFINITY, ..Default::default() };
    let n_fock = layout.fock_cutoff();
    let mut record = |rho: &[C64], diag: &mut EvolutionDiagnostics| -> Result<()> {
        let m = ComplexMatrix::from_vec(dim, dim, rho.to_vec())?;
        let mut p = 0.0;
        let mut nbar = 0.0;
        let mut tr = 0.0;
        for i in 0..dim {
            let d = rho[i * dim + i].re;
            tr += d;
            if i < n_fock {
                p += d;
            }
            nbar += (i % n_fock) as f64 * d;
        }
        if !tr.is_finite() {
            return Err(Error::Numerical("density matrix became non-finite".into()));
        }
        excited.push(p);
        photons.push(nbar);
        diag.max_trace_deviation = diag.max_trace_deviation.max((tr - 1.0).abs());
        diag.max_hermiticity_error = diag.max_hermiticity_error.max(m.hermiticity_error());
        let lo = hermitian_eigenvalues(&m).first().copied().unwrap_or(0.0);
        diag.min_eigenvalue = diag.min_eigenvalue.min(lo);
        Ok(())
    };
    record(&rho, &mut diag)?;

    for iv in &intervals {
        let dt = iv.step();
        for s in 0..iv.substeps {
            let t0 = iv.start + s as f64 * dt;
            ws.rhs(&generator, frame, &diss, t0, &rho, &mut k1);
            axpy_into(&mut tmp, &rho, &k1, 0.5 * dt);
            ws.rhs(&generator, frame, &diss, t0 + 0.5 * dt, &tmp, &mut k2);
            axpy_into(&mut tmp, &rho, &k2, 0.5 * dt);
            ws.rhs(&generator, frame, &diss, t0 + 0.5 * dt, &tmp, &mut k3);
            axpy_into(&mut tmp, &rho, &k3, dt);
            ws.rhs(&generator, frame, &diss, t0 + dt, &tmp, &mut k4);
            let w = dt / 6.0;
            for i in 0..rho.len() {
                rho[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
            }
        }
        diag.steps += iv.substeps;
        if iv.sample.is_some() {
            record(&rho, &mut diag)?;
        }
    }

    if let Some(f) = frame {
        f.rotate_density(grid.t_end, &mut rho, -1.0);
    }
    Ok(EvolutionResult {
        times,
        excited_population: excited,
        photon_number: photons,
        final_state: DensityMatrix::from_raw(ComplexMatrix::from_vec(dim, dim, rho)?),
        diagnostics: diag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve_unitary;
    use crate::linalg::Qubit;
    use crate::model::{build_jc_hamiltonian, DeviceModel};
    use crate::units::{ghz, mhz, NS, US};

    #[test]
    fn pure_decay_is_exponential() {
        let layout = HilbertLayout::new(3).unwrap();
        let t1 = 0.45 * US;
        let h = ComplexMatrix::zeros(layout.dim(), layout.dim());
        let c = [CollapseSpec { operator: qubit_operator(&sigma_minus(), layout).unwrap(), rate: 1.0 / t1 }];
        let rho0 = layout.basis_ket(Qubit::Excited, 0).to_density();
        let grid = TimeGrid::uniform(0.0, 3.0 * t1, 31).unwrap();
        let r = evolve_lindblad(&h, &c, &rho0, &grid).unwrap();
        for (t, p) in r.times.iter().zip(&r.excited_population) {
            assert!((p - (-t / t1).exp()).abs() < 1e-6, "t={t} p={p}");
        }
        assert!(r.diagnostics.max_trace_deviation < 1e-10);
    }

    #[test]
    fn no_dissipation_matches_unitary() {
        let m = DeviceModel::resonant(mhz(9.14), ghz(2.417)).unwrap();
        let h = build_jc_hamiltonian(&m).unwrap();
        let psi0 = m.layout().basis_ket(Qubit::Excited, 0);
        let grid = TimeGrid::uniform(0.0, 60.0 * NS, 13).unwrap();
        let a = evolve_unitary(&h, &psi0, &grid).unwrap();
        let b = evolve_lindblad(&h, &[], &psi0.to_density(), &grid).unwrap();
        for (x, y) in a.excited_population.iter().zip(&b.excited_population) {
            assert!((x - y).abs() < 1e-7);
        }
    }

    #[test]
    fn sparse_and_dense_jumps_agree() {
        let layout = HilbertLayout::new(3).unwrap();
        let a = resonator_operator(&annihilation(3).unwrap(), layout).unwrap();
        let mixed = &a + &qubit_operator(&sigma_minus(), layout).unwrap();
        assert!(matches!(Jump::new(&a), Jump::Rows(_)));
        assert!(matches!(Jump::new(&mixed), Jump::Dense(_)));
        let h = ComplexMatrix::from_fn(6, 6, |r, c| C64::new(if r == c { r as f64 } else { 0.3 }, 0.0));
        let frame = h.frame().unwrap();
        let rho0 = crate::linalg::Ket::new(vec![C64::new(0.5, 0.0); 6]).unwrap().to_density();
        let c = [CollapseSpec { operator: a.clone(), rate: 1.7 }];
        let sparse = Dissipator::new(&c, 6).unwrap();
        let mut dense = Dissipator::new(&c, 6).unwrap();
        dense.ops = vec![(Jump::Dense(a.clone()), 1.7)];
        let mut ws = Workspace::new(6);
        let mut out_dense = vec![C64::new(0.0, 0.0); 36];
        let mut out_sparse = out_dense.clone();
        let g = Generator::Frame(&frame);
        ws.rhs(&g, Some(&frame), &dense, 0.37, rho0.matrix().data(), &mut out_dense);
        ws.rhs(&g, Some(&frame), &sparse, 0.37, rho0.matrix().data(), &mut out_sparse);
        for (x, y) in out_dense.iter().zip(&out_sparse) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn collapse_shape_checked() {
        let h = ComplexMatrix::zeros(4, 4);
        let c = [CollapseSpec { operator: ComplexMatrix::zeros(2, 2), rate: 1.0 }];
        let rho0 = crate::linalg::Ket::basis(4, 0).to_density();
        let grid = TimeGrid::uniform(0.0, 1.0, 2).unwrap();
        assert!(matches!(evolve_lindblad(&h, &c, &rho0, &grid), Err(Error::Shape(_))));
    }

    #[test]
    fn model_collapses_skip_infinite_lifetimes() {
        let m = DeviceModel::reference_device();
        assert_eq!(model_collapses(&m).len(), 2);
        assert!(model_collapses(&m.without_dissipation()).is_empty());
    }
}
