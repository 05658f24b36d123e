use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use qswitch::dynamics::{
    evolve_lindblad, evolve_unitary, model_collapses, step_cap, EvolutionResult, TimeGrid,
};
use qswitch::linalg::Qubit;
use qswitch::model::{DeviceModel, DriveParams, DrivenHamiltonian, J0_FIRST_ZERO};
use qswitch::protocols::{
    compare_effective, find_switch_off, fit_damped_cosine, switch_sequence, Preparation, PulseSchedule, Segment,
};
use qswitch::units::{ghz, mhz, NS, US};

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `|c_e(t)|²` for the damped single-excitation pair `(|e,0⟩, |g,1⟩)` at
/// resonance, from the closed-form eigen-solution of the 2×2 generator.
fn damped_pair_population(g: f64, gamma_q: f64, gamma_r: f64, t: f64) -> f64 {
    let mean = 0.25 * (gamma_q + gamma_r);
    let half_diff = 0.25 * (gamma_q - gamma_r);
    // c_e = e^{−mean t} (cos(Ω t) − (half_diff/Ω) sin(Ω t)), Ω = √(g² − half_diff²)
    let omega = C64::new(g * g - half_diff * half_diff, 0.0).sqrt();
    let c = (omega * t).cos() - (omega * t).sin() * half_diff / omega;
    (-mean * t).exp().powi(2) * c.norm_sqr()
}

#[test]
fn damped_vacuum_rabi_matches_single_excitation_solution() {
    let m = DeviceModel::reference_device().without_drive();
    let h = DrivenHamiltonian::rotating_wave(&m).unwrap();
    let grid = TimeGrid::uniform(0.0, 2.0 * US, 2001).unwrap();
    let rho0 = m.layout().basis_ket(Qubit::Excited, 0).to_density();
    let r = evolve_lindblad(&h, &model_collapses(&m), &rho0, &grid).unwrap();
    let (gq, gr) = (1.0 / m.qubit_t1(), 1.0 / m.resonator_t1());
    let oracle: Vec<f64> = r.times.iter().map(|&t| damped_pair_population(m.g(), gq, gr, t)).collect();
    assert!(max_diff(&r.excited_population, &oracle) < 1e-6);

    let fit = fit_damped_cosine(&r.times, &r.excited_population, m.g() / PI).unwrap();
    let expected = 0.5 * (1.0 / 0.45e-6 + 1.0 / 4.6e-6);
    assert!((fit.decay / expected - 1.0).abs() < 0.02, "decay {} vs {}", fit.decay, expected);
}

#[test]
fn lab_frame_vacuum_rabi_conserves_norm() {
    let m = DeviceModel::reference_device().without_dissipation();
    let h = DrivenHamiltonian::lab(&m).unwrap();
    let grid = TimeGrid::uniform(0.0, 1.0 * US, 1001).unwrap();
    let r = evolve_unitary(&h, &m.layout().basis_ket(Qubit::Excited, 0), &grid).unwrap();
    assert!(r.diagnostics.max_norm_deviation < 1e-8);
    // Counter-rotating terms only shift the exchange slightly.
    let jc: Vec<f64> = r.times.iter().map(|&t| (m.g() * t).cos().powi(2)).collect();
    assert!(max_diff(&r.excited_population, &jc) < 0.01);
}

fn paused_run(model: &DeviceModel, amplitude: f64, grid_step: Option<f64>) -> EvolutionResult {
    let t_cycle = PI / model.g();
    let schedule = PulseSchedule::new(
        Preparation::QubitExcited,
        [
            Segment { duration: t_cycle, lambda_z: 0.0 },
            Segment { duration: 0.6 * US, lambda_z: amplitude },
            Segment { duration: 0.3 * US, lambda_z: 0.0 },
        ],
    )
    .unwrap();
    let mut grid = TimeGrid::uniform(0.0, schedule.total_duration(), 1001).unwrap();
    if let Some(step) = grid_step {
        grid = grid.with_max_step(step).unwrap();
    }
    switch_sequence(model, &schedule, &grid).unwrap()
}

#[test]
fn switch_sequence_converges_in_step_and_cutoff() {
    let dev = DeviceModel::reference_device();
    let off = find_switch_off(&dev).unwrap();
    let m = dev.with_drive_amplitude(off.amplitude).unwrap();
    let cap = step_cap(&DrivenHamiltonian::lab(&m).unwrap());

    let base = paused_run(&m, off.amplitude, None);
    let halved = paused_run(&m, off.amplitude, Some(cap / 2.0));
    assert!(max_diff(&base.excited_population, &halved.excited_population) <= 1e-7);

    let m8 = m.clone().with_fock_cutoff(8).unwrap();
    let wide = paused_run(&m8, off.amplitude, None);
    assert!(max_diff(&base.excited_population, &wide.excited_population) <= 1e-6);
    assert!(max_diff(&base.photon_number, &wide.photon_number) <= 1e-6);

    let d = base.diagnostics;
    assert!(d.max_trace_deviation < 1e-8);
    assert!(d.max_hermiticity_error < 1e-9);
    assert!(d.min_eigenvalue > -1e-7);
}

/// Two-level interaction-picture oracle for the drive-modulated exchange:
/// `i ċ_e = g e^{iθ} c_g`, `i ċ_g = g e^{−iθ} c_e`, with
/// `θ(t) = (2λz/ωz)(sin(ωz t + φ) − sin φ)`; classical RK4 at a fine step.
fn modulated_pair_min_population(g: f64, lz: f64, wz: f64, phase: f64, t_end: f64, steps: usize) -> f64 {
    let x = 2.0 * lz / wz;
    let rhs = |t: f64, c: [C64; 2]| {
        let e = C64::from_polar(1.0, x * ((wz * t + phase).sin() - phase.sin()));
        let mi = C64::new(0.0, -g);
        [mi * e * c[1], mi * e.conj() * c[0]]
    };
    let h = t_end / steps as f64;
    let mut c = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    let mut min_p: f64 = 1.0;
    let axpy = |c: [C64; 2], k: [C64; 2], s: f64| [c[0] + k[0] * s, c[1] + k[1] * s];
    for n in 0..steps {
        let t = n as f64 * h;
        let k1 = rhs(t, c);
        let k2 = rhs(t + 0.5 * h, axpy(c, k1, 0.5 * h));
        let k3 = rhs(t + 0.5 * h, axpy(c, k2, 0.5 * h));
        let k4 = rhs(t + h, axpy(c, k3, h));
        for i in 0..2 {
            c[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0);
        }
        min_p = min_p.min(c[0].norm_sqr());
    }
    min_p
}

fn driven_device(drive_mhz: f64, phase: f64) -> DeviceModel {
    DeviceModel::resonant(mhz(9.14), ghz(2.417))
        .unwrap()
        .with_drive(DriveParams { amplitude: 0.0, frequency: mhz(drive_mhz), phase })
        .unwrap()
}

#[test]
fn ripple_at_switch_off_matches_two_level_oracle() {
    let window = 200.0 * NS;
    for phase in [0.0, PI / 2.0] {
        let m = driven_device(150.0, phase);
        let bessel_zero = 0.5 * J0_FIRST_ZERO * m.drive().unwrap().frequency;
        let m = m.with_drive_amplitude(bessel_zero).unwrap();
        let grid = TimeGrid::uniform(0.0, window, 4001).unwrap();
        let cmp = compare_effective(&m, bessel_zero, &grid).unwrap();
        let oracle = 1.0
            - modulated_pair_min_population(m.g(), bessel_zero, mhz(150.0), phase, window, 400_000);
        let rel = (cmp.peak_deviation - oracle).abs() / oracle;
        assert!(rel < 0.1, "phase {phase}: full {} vs oracle {oracle}", cmp.peak_deviation);
    }
}

#[test]
fn ripple_shrinks_with_drive_frequency() {
    let grid = TimeGrid::uniform(0.0, 2.0 * US, 20001).unwrap();
    for phase in [0.0, PI / 2.0, PI] {
        let mut peaks = Vec::new();
        for wz_mhz in [150.0, 300.0, 600.0] {
            let m = driven_device(wz_mhz, phase);
            let off = find_switch_off(&m).unwrap();
            let m = m.with_drive_amplitude(off.amplitude).unwrap();
            let eff = 0.5 * J0_FIRST_ZERO * TAU * wz_mhz * 1e6;
            peaks.push(compare_effective(&m, eff, &grid).unwrap().peak_deviation);
        }
        assert!(peaks[0] > peaks[1] && peaks[1] > peaks[2], "phase {phase}: {peaks:?}");
        assert!(peaks[1] < 0.02 && peaks[2] < 0.02, "phase {phase}: {peaks:?}");
    }
}
