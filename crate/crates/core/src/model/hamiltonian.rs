//! Hamiltonian builders. Every matrix is `H/ħ` in rad/s on the joint
//! qubit ⊗ resonator space of the model's [`HilbertLayout`].

use super::circuit::{effective_coupling, qubit_frequency};
use super::params::{DeviceModel, DriveParams};
use crate::dynamics::{Frame, Hamiltonian};
use crate::error::{Error, Result};
use crate::linalg::{
    annihilation, pauli_x, pauli_z, photon_number_operator, qubit_operator, sigma_minus, sigma_plus,
    tensor_product, ComplexMatrix, HilbertLayout, C64,
};

/// Which qubit–resonator coupling the builder keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingForm {
    /// `g(a† + a)σx`, counter-rotating terms included.
    Full,
    /// `g(a†σ− + aσ+)`, excitation conserving.
    RotatingWave,
}

fn sigma_z_joint(layout: HilbertLayout) -> ComplexMatrix {
    qubit_operator(&pauli_z(), layout).expect("2x2 operator")
}

fn full_coupling(layout: HilbertLayout) -> ComplexMatrix {
    let a = annihilation(layout.fock_cutoff()).expect("cutoff validated");
    let x = &a + &a.dagger();
    tensor_product(&pauli_x(), &x).expect("square operands")
}

fn exchange_coupling(layout: HilbertLayout) -> ComplexMatrix {
    let a = annihilation(layout.fock_cutoff()).expect("cutoff validated");
    let emit = tensor_product(&sigma_minus(), &a.dagger()).expect("square operands");
    let absorb = tensor_product(&sigma_plus(), &a).expect("square operands");
    &emit + &absorb
}

/// Static part `½Δσz + ½εσx + ωr a†a + g·coupling`.
fn static_part(model: &DeviceModel, form: CouplingForm, g: f64) -> ComplexMatrix {
    let layout = model.layout();
    let mut h = sigma_z_joint(layout).scale_real(0.5 * model.gap());
    let eps = model.epsilon();
    if eps != 0.0 {
        h = &h + &qubit_operator(&pauli_x(), layout).expect("2x2").scale_real(0.5 * eps);
    }
    h = &h + &photon_number_operator(layout).scale_real(model.resonator_frequency());
    let coupling = match form {
        CouplingForm::Full => full_coupling(layout),
        CouplingForm::RotatingWave => exchange_coupling(layout),
    };
    &h + &coupling.scale_real(g)
}

fn drive_coefficient(drive: &DriveParams, t: f64) -> f64 {
    drive.amplitude * (drive.frequency * t + drive.phase).cos()
}

/// Lab-frame Hamiltonian at time `t`:
/// `½(Δ + 2λz cos(ωz t + φ))σz + ½εσx + ωr a†a + g(a† + a)σx`.
pub fn build_lab_hamiltonian(model: &DeviceModel, t: f64) -> ComplexMatrix {
    let h = static_part(model, CouplingForm::Full, model.g());
    match model.drive() {
        Some(drive) => &h + &sigma_z_joint(model.layout()).scale_real(drive_coefficient(drive, t)),
        None => h,
    }
}

/// Jaynes–Cummings Hamiltonian `½Δσz + ωr a†a + g(a†σ− + aσ+)`; requires ε = 0.
pub fn build_jc_hamiltonian(model: &DeviceModel) -> Result<ComplexMatrix> {
    require_optimal_point(model)?;
    Ok(static_part(model, CouplingForm::RotatingWave, model.g()))
}

/// Jaynes–Cummings form with `g` replaced by `g·J0(2λz/ωz)`.
pub fn build_effective_hamiltonian(model: &DeviceModel) -> Result<ComplexMatrix> {
    require_optimal_point(model)?;
    let drive = model
        .drive()
        .ok_or_else(|| Error::InvalidArgument("effective Hamiltonian needs a drive".into()))?;
    let g_eff = effective_coupling(model.g(), drive.amplitude, drive.frequency)?;
    Ok(static_part(model, CouplingForm::RotatingWave, g_eff))
}

fn require_optimal_point(model: &DeviceModel) -> Result<()> {
    if model.epsilon() != 0.0 {
        return Err(Error::InvalidArgument(format!(
            "Jaynes-Cummings form needs the optimal point, got epsilon = {:e} rad/s",
            model.epsilon()
        )));
    }
    Ok(())
}

/// One interval during which the longitudinal drive is on. The drive phase
/// restarts at `start`: the coefficient is `λz cos(ωz (t − start) + φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveWindow {
    pub start: f64,
    pub end: f64,
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
}

/// Time profile of the longitudinal drive.
#[derive(Debug, Clone, PartialEq)]
pub enum DriveProfile {
    Off,
    /// `λz cos(ωz t + φ)` for all t.
    Continuous(DriveParams),
    /// Non-overlapping windows in increasing time order.
    Windows(Vec<DriveWindow>),
}

impl DriveProfile {
    pub fn coefficient(&self, t: f64) -> f64 {
        match self {
            DriveProfile::Off => 0.0,
            DriveProfile::Continuous(d) => drive_coefficient(d, t),
            DriveProfile::Windows(ws) => ws
                .iter()
                .find(|w| t >= w.start && t < w.end)
                .map_or(0.0, |w| w.amplitude * (w.frequency * (t - w.start) + w.phase).cos()),
        }
    }

    /// `∫₀ᵗ c(s) ds`.
    pub fn integral(&self, t: f64) -> f64 {
        let swing = |amp: f64, freq: f64, phase: f64, tau: f64| amp / freq * ((freq * tau + phase).sin() - phase.sin());
        match self {
            DriveProfile::Off => 0.0,
            DriveProfile::Continuous(d) => swing(d.amplitude, d.frequency, d.phase, t),
            DriveProfile::Windows(ws) => ws
                .iter()
                .take_while(|w| w.start < t)
                .map(|w| swing(w.amplitude, w.frequency, w.phase, t.min(w.end) - w.start))
                .sum(),
        }
    }

    pub(crate) fn max_amplitude_and_frequency(&self) -> (f64, f64) {
        match self {
            DriveProfile::Off => (0.0, 0.0),
            DriveProfile::Continuous(d) => (d.amplitude, d.frequency),
            DriveProfile::Windows(ws) => ws
                .iter()
                .fold((0.0, 0.0), |(a, f), w| (a.max(w.amplitude), f.max(w.frequency))),
        }
    }

    /// Drops zero-amplitude windows; an empty or all-zero profile becomes `Off`.
    fn normalized(self) -> Self {
        match self {
            DriveProfile::Continuous(d) if d.amplitude == 0.0 => DriveProfile::Off,
            DriveProfile::Windows(ws) => {
                let ws: Vec<_> = ws.into_iter().filter(|w| w.amplitude != 0.0 && w.end > w.start).collect();
                if ws.is_empty() {
                    DriveProfile::Off
                } else {
                    DriveProfile::Windows(ws)
                }
            }
            other => other,
        }
    }
}

/// `H(t) = H_static + c(t)·σz` with `c(t)` from a [`DriveProfile`].
#[derive(Debug, Clone)]
pub struct DrivenHamiltonian {
    static_part: ComplexMatrix,
    sigma_z_diag: Vec<f64>,
    profile: DriveProfile,
    frequency_bound: f64,
}

impl DrivenHamiltonian {
    pub fn new(model: &DeviceModel, form: CouplingForm, profile: DriveProfile) -> Result<Self> {
        if form == CouplingForm::RotatingWave {
            require_optimal_point(model)?;
        }
        let profile = profile.normalized();
        if let DriveProfile::Windows(ws) = &profile {
            for pair in ws.windows(2) {
                if pair[1].start < pair[0].end {
                    return Err(Error::InvalidArgument("drive windows overlap or are unordered".into()));
                }
            }
            if ws.iter().any(|w| !(w.frequency > 0.0) || !(w.amplitude > 0.0)) {
                return Err(Error::InvalidArgument("drive windows need positive amplitude and frequency".into()));
            }
        }
        let layout = model.layout();
        let (lz, wz) = profile.max_amplitude_and_frequency();
        let qubit = model.gap().max(qubit_frequency(model.gap(), model.epsilon()));
        let frequency_bound = qubit.max(model.resonator_frequency()) + 2.0 * lz + wz;
        Ok(Self {
            static_part: static_part(model, form, model.g()),
            sigma_z_diag: sigma_z_joint(layout).diagonal().iter().map(|z| z.re).collect(),
            profile,
            frequency_bound,
        })
    }

    /// Drive taken from the model (continuous, or off when absent).
    pub fn from_model(model: &DeviceModel, form: CouplingForm) -> Result<Self> {
        let profile = model.drive().map_or(DriveProfile::Off, |d| DriveProfile::Continuous(*d));
        Self::new(model, form, profile)
    }

    /// Full lab-frame Hamiltonian with the longitudinal drive, counter-rotating terms kept.
    pub fn lab(model: &DeviceModel) -> Result<Self> {
        Self::from_model(model, CouplingForm::Full)
    }

    /// Jaynes–Cummings plus the longitudinal drive.
    pub fn rotating_wave(model: &DeviceModel) -> Result<Self> {
        Self::from_model(model, CouplingForm::RotatingWave)
    }

    pub fn profile(&self) -> &DriveProfile {
        &self.profile
    }
}

impl Hamiltonian for DrivenHamiltonian {
    fn dim(&self) -> usize {
        self.static_part.rows()
    }

    fn at(&self, t: f64) -> ComplexMatrix {
        let mut h = self.static_part.clone();
        self.fill_at(t, &mut h);
        h
    }

    fn fill_at(&self, t: f64, out: &mut ComplexMatrix) {
        out.data_mut().copy_from_slice(self.static_part.data());
        let c = self.profile.coefficient(t);
        if c != 0.0 {
            let n = self.sigma_z_diag.len();
            let data = out.data_mut();
            for (i, &z) in self.sigma_z_diag.iter().enumerate() {
                data[i * n + i] += C64::new(c * z, 0.0);
            }
        }
    }

    fn frequency_bound(&self) -> f64 {
        self.frequency_bound
    }

    fn breakpoints(&self) -> Vec<f64> {
        match &self.profile {
            DriveProfile::Windows(ws) => ws.iter().flat_map(|w| [w.start, w.end]).collect(),
            _ => Vec::new(),
        }
    }

    fn is_static(&self) -> bool {
        matches!(self.profile, DriveProfile::Off)
    }

    fn frame(&self) -> Option<Frame> {
        Some(Frame::new(&self.static_part, self.sigma_z_diag.clone(), self.profile.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigenvalues, HilbertLayout, Qubit};
    use crate::model::bessel::J0_FIRST_ZERO;
    use crate::units::{ghz, mhz};

    fn driven(lz: f64) -> DeviceModel {
        DeviceModel::resonant(mhz(9.14), ghz(2.417))
            .unwrap()
            .with_drive(DriveParams::new(lz, mhz(150.0)))
            .unwrap()
    }

    fn assert_hermitian(h: &ComplexMatrix) {
        assert!(h.hermiticity_error() <= 1e-12 * h.max_abs());
    }

    #[test]
    fn uncoupled_lab_hamiltonian_is_diagonal_ladder() {
        let m = DeviceModel::resonant(1e-300, ghz(2.0)).unwrap().with_fock_cutoff(3).unwrap();
        let h = build_lab_hamiltonian(&m, 0.0);
        let l = m.layout();
        let e = |q, n| h[(l.index(q, n), l.index(q, n))].re;
        assert!((e(Qubit::Excited, 0) - e(Qubit::Ground, 0) - ghz(2.0)).abs() < 1e-3);
        assert!((e(Qubit::Ground, 2) - e(Qubit::Ground, 1) - ghz(2.0)).abs() < 1e-3);
        for r in 0..6 {
            for c in 0..6 {
                if r != c {
                    assert!(h[(r, c)].norm() < 1e-290);
                }
            }
        }
    }

    #[test]
    fn lab_hamiltonian_is_periodic_and_hermitian() {
        let m = driven(mhz(180.0));
        let period = m.drive().unwrap().period();
        for &t in &[0.0, 1.3e-9, 4.1e-9] {
            let a = build_lab_hamiltonian(&m, t);
            let b = build_lab_hamiltonian(&m, t + period);
            assert_hermitian(&a);
            assert!(a.max_abs_diff(&b) <= 1e-12 * a.max_abs());
        }
    }

    #[test]
    fn sigma_z_coefficient_at_t0() {
        let m = driven(mhz(180.0));
        let h = build_lab_hamiltonian(&m, 0.0);
        let l = m.layout();
        // With the photon ladder removed, the |e,0⟩ and |g,0⟩ diagonals are ±½(Δ + 2λz).
        let e0 = h[(l.index(Qubit::Excited, 0), l.index(Qubit::Excited, 0))].re;
        let g0 = h[(l.index(Qubit::Ground, 0), l.index(Qubit::Ground, 0))].re;
        let expected = 0.5 * (ghz(2.417) + 2.0 * mhz(180.0));
        assert!((e0 - expected).abs() < 1e-6 * expected);
        assert!((g0 + expected).abs() < 1e-6 * expected);
    }

    #[test]
    fn jc_conserves_excitations() {
        let m = DeviceModel::resonant(mhz(9.14), ghz(2.417)).unwrap();
        let h = build_jc_hamiltonian(&m).unwrap();
        assert_hermitian(&h);
        let l = m.layout();
        let n_exc = &photon_number_operator(l) + &crate::linalg::excited_projector(l);
        assert!(h.commutator(&n_exc).unwrap().max_abs() <= 1e-12 * h.max_abs());
        // |g,0⟩ is an eigenvector.
        let g0 = l.index(Qubit::Ground, 0);
        for r in 0..l.dim() {
            if r != g0 {
                assert_eq!(h[(r, g0)].norm(), 0.0);
            }
        }
    }

    #[test]
    fn jc_requires_optimal_point() {
        let m = DeviceModel::resonant(mhz(9.14), ghz(2.417)).unwrap().with_epsilon(mhz(10.0)).unwrap();
        assert!(build_jc_hamiltonian(&m).is_err());
        assert!(build_effective_hamiltonian(&m.with_drive(DriveParams::new(0.0, 1.0)).unwrap()).is_err());
    }

    /// 2×2 analytic oracle: eigenvalues of [[a, g], [g, a]] differ by 2g.
    #[test]
    fn single_excitation_splitting_is_two_g() {
        let g = mhz(9.14);
        let m = DeviceModel::resonant(g, ghz(2.417)).unwrap().with_fock_cutoff(2).unwrap();
        let h = build_jc_hamiltonian(&m).unwrap();
        let l = m.layout();
        let idx = [l.index(Qubit::Excited, 0), l.index(Qubit::Ground, 1)];
        let block = ComplexMatrix::from_fn(2, 2, |r, c| h[(idx[r], idx[c])]);
        let ev = hermitian_eigenvalues(&block);
        assert!(((ev[1] - ev[0]) - 2.0 * g).abs() < 1e-9 * g);
    }

    #[test]
    fn effective_hamiltonian_cases() {
        let jc = build_jc_hamiltonian(&driven(0.0)).unwrap();
        assert_eq!(build_effective_hamiltonian(&driven(0.0)).unwrap(), jc);
        assert!(build_effective_hamiltonian(&driven(0.0).without_drive()).is_err());

        let g = mhz(9.14);
        let off = driven(0.5 * J0_FIRST_ZERO * mhz(150.0));
        let h = build_effective_hamiltonian(&off).unwrap();
        let l = off.layout();
        let coupling = h[(l.index(Qubit::Excited, 0), l.index(Qubit::Ground, 1))];
        assert!(coupling.norm() <= 1e-9 * g);

        let lz = mhz(100.0);
        let m = driven(lz);
        let h = build_effective_hamiltonian(&m).unwrap();
        let idx = [l.index(Qubit::Excited, 0), l.index(Qubit::Ground, 1)];
        let block = ComplexMatrix::from_fn(2, 2, |r, c| h[(idx[r], idx[c])]);
        let ev = hermitian_eigenvalues(&block);
        let g_eff = effective_coupling(g, lz, mhz(150.0)).unwrap();
        assert!(((ev[1] - ev[0]) - 2.0 * g_eff.abs()).abs() < 1e-9 * g);
    }

    #[test]
    fn lab_without_counter_rotating_terms_is_jc() {
        let m = DeviceModel::resonant(mhz(9.14), ghz(2.417)).unwrap();
        let lab = build_lab_hamiltonian(&m, 0.0);
        let jc = build_jc_hamiltonian(&m).unwrap();
        let l = m.layout();
        // Drop entries that change the excitation number.
        let n_exc = |i: usize| (i % l.fock_cutoff()) + usize::from(i < l.fock_cutoff());
        let rwa = ComplexMatrix::from_fn(l.dim(), l.dim(), |r, c| {
            if n_exc(r) == n_exc(c) {
                lab[(r, c)]
            } else {
                C64::new(0.0, 0.0)
            }
        });
        assert!(rwa.max_abs_diff(&jc) <= 1e-12 * jc.max_abs());
        assert!(lab.max_abs_diff(&jc) > 0.5 * mhz(9.14));
    }

    #[test]
    fn driven_hamiltonian_matches_lab_builder() {
        let m = driven(mhz(180.0));
        let h = DrivenHamiltonian::lab(&m).unwrap();
        for &t in &[0.0, 0.7e-9, 3.3e-9] {
            assert!(h.at(t).max_abs_diff(&build_lab_hamiltonian(&m, t)) <= 1e-12 * h.at(t).max_abs());
        }
        assert!(!h.is_static());
        assert!(DrivenHamiltonian::lab(&driven(0.0)).unwrap().is_static());
        let bound = h.frequency_bound();
        assert!((bound - (ghz(2.417) + mhz(360.0) + mhz(150.0))).abs() < 1.0);
    }

    #[test]
    fn windows_restart_phase_and_are_validated() {
        let m = driven(0.0);
        let w = DriveWindow { start: 1e-9, end: 5e-9, amplitude: mhz(180.0), frequency: mhz(150.0), phase: 0.0 };
        let p = DriveProfile::Windows(vec![w]);
        assert_eq!(p.coefficient(0.5e-9), 0.0);
        assert_eq!(p.coefficient(1e-9), mhz(180.0));
        assert_eq!(p.coefficient(5e-9), 0.0);
        let overlapping = DriveProfile::Windows(vec![w, DriveWindow { start: 4e-9, ..w }]);
        assert!(DrivenHamiltonian::new(&m, CouplingForm::Full, overlapping).is_err());
        let h = DrivenHamiltonian::new(&m, CouplingForm::Full, p).unwrap();
        assert_eq!(h.breakpoints(), vec![1e-9, 5e-9]);
    }

    #[test]
    fn every_builder_is_hermitian() {
        let m = driven(mhz(120.0)).with_fock_cutoff(6).unwrap();
        assert_hermitian(&build_lab_hamiltonian(&m, 1e-9));
        assert_hermitian(&build_jc_hamiltonian(&m).unwrap());
        assert_hermitian(&build_effective_hamiltonian(&m).unwrap());
        let biased = m.with_epsilon(ghz(0.5)).unwrap();
        assert_hermitian(&build_lab_hamiltonian(&biased, 2e-9));
        let _ = HilbertLayout::new(2).unwrap();
    }

    #[test]
    fn drive_integral_matches_quadrature() {
        let d = DriveParams { amplitude: 3.0, frequency: 5.0, phase: 0.4 };
        let windows = DriveProfile::Windows(vec![
            DriveWindow { start: 0.2, end: 0.9, amplitude: 2.0, frequency: 7.0, phase: 0.0 },
            DriveWindow { start: 1.3, end: 2.0, amplitude: 1.0, frequency: 11.0, phase: 0.3 },
        ]);
        for profile in [DriveProfile::Continuous(d), windows] {
            let n = 170_000;
            let t_end = 1.7;
            let h = t_end / n as f64;
            let quad: f64 = (0..n).map(|k| profile.coefficient((k as f64 + 0.5) * h) * h).sum();
            assert!((quad - profile.integral(t_end)).abs() < 1e-6, "{profile:?}");
        }
    }
}
