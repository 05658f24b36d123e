use std::f64::consts::TAU;

use super::step::{Generator, Stepper};
use super::Hamiltonian;
use crate::error::{Error, Result};
use crate::linalg::{normal_eigen, propagator, ComplexMatrix, HilbertLayout, Qubit, C64};
use crate::model::{CouplingForm, DeviceModel, DrivenHamiltonian, DriveProfile};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloquetOptions {
    /// Lower bound on integration steps per period.
    pub min_substeps: usize,
    /// Relative tolerance on `‖H(0) − H(T)‖`.
    pub period_tolerance: f64,
}

impl Default for FloquetOptions {
    fn default() -> Self {
        Self { min_substeps: 512, period_tolerance: 1e-9 }
    }
}

/// The two Floquet modes with the most weight on `|e,0⟩` and `|g,1⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonantPair {
    pub modes: [usize; 2],
    pub quasienergies: [f64; 2],
    /// Zone-folded splitting (rad/s).
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct FloquetResult {
    pub period: f64,
    pub substeps: usize,
    /// One-period propagator `U(T)`.
    pub propagator: ComplexMatrix,
    /// Quasienergies (rad/s) in `(−ω/2, ω/2]`, `ω = 2π/T`.
    pub quasienergies: Vec<f64>,
    /// Floquet modes as columns, ordered like `quasienergies`.
    pub modes: ComplexMatrix,
    /// `(|⟨e,0|φ⟩|², |⟨g,1|φ⟩|²)` per mode.
    pub overlaps: Vec<(f64, f64)>,
}

impl FloquetResult {
    pub fn drive_frequency(&self) -> f64 {
        TAU / self.period
    }

    /// Picks the two modes with the largest weight in `span{|e,0⟩, |g,1⟩}`.
    pub fn resonant_pair(&self) -> Result<ResonantPair> {
        let weight = |k: usize| self.overlaps[k].0 + self.overlaps[k].1;
        let mut order: Vec<usize> = (0..self.overlaps.len()).collect();
        order.sort_by(|&a, &b| weight(b).total_cmp(&weight(a)));
        let (a, b) = (order[0], order[1]);
        if weight(a) < 0.5 || weight(b) < 0.5 {
            return Err(Error::AmbiguousModes { first: weight(a), second: weight(b) });
        }
        let (qa, qb) = (self.quasienergies[a], self.quasienergies[b]);
        Ok(ResonantPair { modes: [a, b], quasienergies: [qa, qb], gap: fold_gap((qa - qb).abs(), self.drive_frequency()) })
    }
}

/// `min_k |δ − kω|`.
pub fn fold_gap(delta: f64, omega: f64) -> f64 {
    let r = delta.abs().rem_euclid(omega);
    r.min(omega - r)
}

fn fold_quasienergy(e: f64, omega: f64) -> f64 {
    let half = 0.5 * omega;
    let mut v = (e + half).rem_euclid(omega) - half;
    if v <= -half {
        v += omega;
    }
    v
}

pub fn floquet_propagator(h: &dyn Hamiltonian, period: f64, layout: HilbertLayout) -> Result<FloquetResult> {
    floquet_propagator_with(h, period, layout, FloquetOptions::default())
}

/// Steps one period (same scheme as [`evolve_unitary`](super::evolve_unitary))
/// and diagonalizes `U(T)`.
pub fn floquet_propagator_with(
    h: &dyn Hamiltonian,
    period: f64,
    layout: HilbertLayout,
    options: FloquetOptions,
) -> Result<FloquetResult> {
    let dim = h.dim();
    if layout.dim() != dim {
        return Err(Error::Shape(format!("layout dimension {} vs Hamiltonian {}", layout.dim(), dim)));
    }
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::InvalidArgument(format!("period must be positive, got {period}")));
    }
    let h0 = h.at(0.0);
    let mismatch = h0.max_abs_diff(&h.at(period));
    if mismatch > options.period_tolerance * h0.max_abs().max(1.0) {
        return Err(Error::PeriodMismatch { mismatch });
    }

    let from_cap = (period / super::step_cap(h)).ceil();
    let mut substeps = (options.min_substeps as f64).max(from_cap) as usize;
    // An even count keeps the step grid symmetric under a half-period shift.
    substeps += substeps % 2;
    let dt = period / substeps as f64;
    let u = if h.is_static() {
        let step = propagator(&h0, dt);
        let mut u = ComplexMatrix::identity(dim);
        for _ in 0..substeps {
            u = step.matmul(&u)?;
        }
        u
    } else {
        let frame = h.frame();
        let generator = match &frame {
            Some(f) => Generator::Frame(f),
            None => Generator::Lab(h),
        };
        let mut columns: Vec<Vec<C64>> = (0..dim)
            .map(|k| (0..dim).map(|i| if i == k { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }).collect())
            .collect();
        let mut stepper = Stepper::new(dim);
        for k in 0..substeps {
            let mut refs: Vec<&mut [C64]> = columns.iter_mut().map(|c| c.as_mut_slice()).collect();
            stepper.advance(&generator, k as f64 * dt, dt, &mut refs);
        }
        if let Some(f) = &frame {
            for c in &mut columns {
                f.rotate_ket(period, c, -1.0);
            }
        }
        ComplexMatrix::from_fn(dim, dim, |r, c| columns[c][r])
    };

    let (values, modes) = normal_eigen(&u)?;
    let omega = TAU / period;
    let quasienergies = values.iter().map(|l| fold_quasienergy(-l.arg() / period, omega)).collect();
    let (ie, ig) = (layout.index(Qubit::Excited, 0), layout.index(Qubit::Ground, 1));
    let overlaps = (0..dim).map(|k| (modes[(ie, k)].norm_sqr(), modes[(ig, k)].norm_sqr())).collect();
    Ok(FloquetResult { period, substeps, propagator: u, quasienergies, modes, overlaps })
}

/// Floquet gap of the resonant pair, Jaynes–Cummings coupling plus the
/// longitudinal drive.
///
/// Counter-rotating terms are dropped here: they add a Bloch–Siegert shift
/// `≈ g²/ωr` that keeps the pair from ever crossing and floors the gap far
/// above the rotating-wave minimum.
pub fn quasienergy_gap(model: &DeviceModel) -> Result<f64> {
    quasienergy_gap_with(model, CouplingForm::RotatingWave)
}

pub fn quasienergy_gap_with(model: &DeviceModel, form: CouplingForm) -> Result<f64> {
    let drive = model
        .drive()
        .ok_or_else(|| Error::InvalidArgument("quasienergy gap needs a drive frequency".into()))?;
    if model.epsilon() != 0.0 {
        return Err(Error::InvalidArgument("quasienergy gap needs ε = 0".into()));
    }
    let (d, wr) = (model.gap(), model.resonator_frequency());
    if (d - wr).abs() > 1e-9 * wr {
        return Err(Error::InvalidArgument(format!(
            "quasienergy gap needs Δ = ωr, got Δ/2π = {:e} Hz, ωr/2π = {:e} Hz",
            d / TAU,
            wr / TAU
        )));
    }
    let h = DrivenHamiltonian::new(model, form, DriveProfile::Continuous(*drive))?;
    let f = floquet_propagator(&h, drive.period(), model.layout())?;
    Ok(f.resonant_pair()?.gap)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve_unitary, TimeGrid};
    use crate::linalg::{matrix_exp, Ket};
    use crate::model::{bessel_j0, build_jc_hamiltonian, effective_coupling, DriveParams, J0_FIRST_ZERO};
    use crate::units::{ghz, mhz};

    fn driven(lz_over_wz: f64, wz: f64) -> DeviceModel {
        DeviceModel::resonant(mhz(9.14), ghz(2.417))
            .unwrap()
            .with_drive(DriveParams::new(lz_over_wz * wz, wz))
            .unwrap()
    }

    #[test]
    fn folding() {
        assert!((fold_gap(0.9, 1.0) - 0.1).abs() < 1e-12);
        assert!((fold_gap(2.3, 1.0) - 0.3).abs() < 1e-12);
        assert_eq!(fold_quasienergy(-0.5, 1.0), 0.5);
        assert!((fold_quasienergy(1.7, 1.0) + 0.3).abs() < 1e-12);
    }

    #[test]
    fn undriven_gap_is_two_g() {
        let m = driven(0.0, mhz(150.0));
        let gap = quasienergy_gap(&m).unwrap();
        assert!((gap - 2.0 * m.g()).abs() < 1e-4 * m.g(), "{}", gap / m.g());
    }

    #[test]
    fn uncoupled_levels_are_degenerate() {
        let m = DeviceModel::resonant(0.0, ghz(2.417)).unwrap().with_drive(DriveParams::new(0.0, mhz(150.0))).unwrap();
        assert!(quasienergy_gap(&m).unwrap() < 1e-6);
    }

    #[test]
    fn static_propagator_matches_exponential() {
        let m = DeviceModel::resonant(mhz(9.14), ghz(2.417)).unwrap();
        let h = build_jc_hamiltonian(&m).unwrap();
        let period = TAU / mhz(150.0);
        let f = floquet_propagator(&h, period, m.layout()).unwrap();
        let exact = matrix_exp(&h.scale(C64::new(0.0, -period))).unwrap();
        assert!(f.propagator.max_abs_diff(&exact) < 1e-9);
    }

    #[test]
    fn gap_follows_bessel_envelope() {
        let wz = mhz(150.0);
        for i in 0..=16 {
            let x = 0.1 * i as f64;
            let m = driven(x, wz);
            let expected = 2.0 * effective_coupling(m.g(), x * wz, wz).unwrap().abs();
            if bessel_j0(2.0 * x).unwrap().abs() <= 0.05 {
                continue;
            }
            let gap = quasienergy_gap(&m).unwrap();
            assert!((gap - expected).abs() < 0.05 * expected, "λz/ωz={x}: {gap} vs {expected}");
        }
    }

    #[test]
    fn gap_nearly_closes_at_bessel_zero() {
        let wz = mhz(150.0);
        let m = driven(J0_FIRST_ZERO / 2.0, wz);
        let gap = quasienergy_gap(&m).unwrap();
        // RWA correction moves the minimum slightly; still far below 2g.
        assert!(gap < 0.01 * 2.0 * m.g(), "{}", gap / TAU);
    }

    #[test]
    fn period_mismatch_detected() {
        let m = driven(1.0, mhz(150.0));
        let h = DrivenHamiltonian::lab(&m).unwrap();
        let wrong = 0.7 * m.drive().unwrap().period();
        assert!(matches!(floquet_propagator(&h, wrong, m.layout()), Err(Error::PeriodMismatch { .. })));
    }

    #[test]
    fn stroboscopic_samples_match_propagator_powers() {
        let m = driven(0.7, mhz(150.0));
        let h = DrivenHamiltonian::lab(&m).unwrap();
        let period = m.drive().unwrap().period();
        let f = floquet_propagator(&h, period, m.layout()).unwrap();
        let k = 12;
        let grid = TimeGrid::new(0.0, k as f64 * period, k + 1, period / (f.substeps as f64 - 0.5)).unwrap();
        let psi0 = m.layout().basis_ket(Qubit::Excited, 0);
        let direct = evolve_unitary(&h, &psi0, &grid).unwrap();
        let mut psi = psi0.amplitudes().to_vec();
        for step in 1..=k {
            psi = f.propagator.mul_vec(&psi).unwrap();
            let p = Ket::new(psi.clone()).unwrap();
            let pe: f64 = p.amplitudes()[..m.fock_cutoff()].iter().map(|a| a.norm_sqr()).sum();
            assert!((pe - direct.excited_population[step]).abs() < 1e-7);
        }
    }
}
