use rayon::prelude::*;

use super::sweep::{Overlay, SpectrumMap, SweepSpec, SweepVariable};
use crate::dynamics::quasienergy_gap;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, pauli_x, qubit_operator, C64};
use crate::model::{build_lab_hamiltonian, effective_coupling, qubit_frequency, DeviceModel};
use crate::units::mhz;

/// Full width at half maximum of rendered lines.
pub const DEFAULT_LINEWIDTH: f64 = 2.0 * std::f64::consts::PI * 2e6;

/// Relative eigen-reconstruction error above which a column is rejected.
const RECONSTRUCTION_TOL: f64 = 1e-9;

fn lorentzian(f: f64, centre: f64, hwhm: f64) -> f64 {
    hwhm * hwhm / ((f - centre).powi(2) + hwhm * hwhm)
}

fn normalize(columns: &mut [Vec<f64>]) {
    let peak = columns.iter().flatten().fold(0.0_f64, |m, v| m.max(*v));
    if peak > 0.0 {
        columns.iter_mut().flatten().for_each(|v| *v /= peak);
    }
}

/// Transition spectrum versus qubit bias, from eigenvalues of the static
/// lab-frame Hamiltonian.
///
/// Each transition out of the ground state is drawn as a Lorentzian of
/// full width `linewidth` (rad/s) weighted by `|⟨k|σx|0⟩|²`; the map is
/// normalized to its brightest pixel. Overlays: dressed branches `upper`
/// and `lower`, bare `qubit` and `resonator` lines.
pub fn spectrum_scan(
    model: &DeviceModel,
    epsilon: &SweepSpec,
    probe: &SweepSpec,
    linewidth: f64,
) -> Result<SpectrumMap> {
    epsilon.expect(SweepVariable::Epsilon)?;
    probe.expect(SweepVariable::ProbeFrequency)?;
    if !(linewidth > 0.0 && linewidth.is_finite()) {
        return Err(Error::InvalidArgument("linewidth must be positive".into()));
    }
    if model.drive().is_some_and(|d| d.amplitude != 0.0) {
        return Err(Error::InvalidArgument("spectrum scan needs the longitudinal drive off".into()));
    }
    let model = model.clone().without_drive();
    let eps = epsilon.values();
    let freqs = probe.values();
    let sx = qubit_operator(&pauli_x(), model.layout())?;
    let hwhm = 0.5 * linewidth;

    let mut columns = eps
        .par_iter()
        .map(|&e| {
            let h = build_lab_hamiltonian(&model.clone().with_epsilon(e)?, 0.0);
            let eig = hermitian_eigen(&h);
            let err = eig.reconstruction_error(&h);
            if err > RECONSTRUCTION_TOL * h.max_abs() {
                return Err(Error::Numerical(format!("eigenbasis not reproducible at ε = {e:e} rad/s (error {err:e})")));
            }
            let ground = eig.vector(0);
            let kicked = sx.mul_vec(&ground)?;
            let lines: Vec<(f64, f64)> = (1..eig.values.len())
                .map(|k| {
                    let amp: C64 = eig.vector(k).iter().zip(&kicked).map(|(a, b)| a.conj() * b).sum();
                    (eig.values[k] - eig.values[0], amp.norm_sqr())
                })
                .collect();
            Ok(freqs.iter().map(|&f| lines.iter().map(|&(c, w)| w * lorentzian(f, c, hwhm)).sum()).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    normalize(&mut columns);

    let (d, wr, g) = (model.gap(), model.resonator_frequency(), model.g());
    let wq: Vec<f64> = eps.iter().map(|&e| qubit_frequency(d, e)).collect();
    let branch = |sign: f64| -> Vec<f64> {
        wq.iter().map(|&w| 0.5 * (w + wr) + sign * (0.25 * (w - wr).powi(2) + g * g).sqrt()).collect()
    };
    let overlays = vec![
        Overlay { name: "upper".into(), values: branch(1.0) },
        Overlay { name: "lower".into(), values: branch(-1.0) },
        Overlay { name: "qubit".into(), values: wq.clone() },
        Overlay { name: "resonator".into(), values: vec![wr; eps.len()] },
    ];
    SpectrumMap::from_columns(SweepVariable::Epsilon, eps, SweepVariable::ProbeFrequency, freqs, columns, overlays)
}

/// Driven anti-crossing scan: Floquet gap per drive amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct DrivenSpectrum {
    /// Lines at `ωr ± gap/2` rendered over the probe axis. Overlays:
    /// `floquet_gap`, `bessel_gap` (`2g|J0(2λz/ωz)|`), `upper`, `lower`.
    pub map: SpectrumMap,
    /// Floquet quasienergy gap per λz (rad/s).
    pub gaps: Vec<f64>,
    /// `2|g_eff|` per λz (rad/s).
    pub predicted: Vec<f64>,
}

/// [`driven_spectrum_scan_with`] with a probe axis of `ωr ± 2.5g` and the
/// default linewidth.
pub fn driven_spectrum_scan(model: &DeviceModel, lambda_z: &SweepSpec) -> Result<DrivenSpectrum> {
    let (wr, g) = (model.resonator_frequency(), model.g().max(mhz(1.0)));
    let probe = SweepSpec::new(SweepVariable::ProbeFrequency, wr - 2.5 * g, wr + 2.5 * g, 201)?;
    driven_spectrum_scan_with(model, lambda_z, &probe, DEFAULT_LINEWIDTH)
}

pub fn driven_spectrum_scan_with(
    model: &DeviceModel,
    lambda_z: &SweepSpec,
    probe: &SweepSpec,
    linewidth: f64,
) -> Result<DrivenSpectrum> {
    lambda_z.expect(SweepVariable::LambdaZ)?;
    probe.expect(SweepVariable::ProbeFrequency)?;
    if !(linewidth > 0.0 && linewidth.is_finite()) {
        return Err(Error::InvalidArgument("linewidth must be positive".into()));
    }
    let drive = *model
        .drive()
        .ok_or_else(|| Error::InvalidArgument("driven spectrum needs a drive frequency".into()))?;
    let amps = lambda_z.values();
    let gaps = amps
        .par_iter()
        .map(|&lz| quasienergy_gap(&model.clone().with_drive_amplitude(lz)?))
        .collect::<Result<Vec<f64>>>()?;
    let predicted = amps
        .iter()
        .map(|&lz| effective_coupling(model.g(), lz, drive.frequency).map(|g| 2.0 * g.abs()))
        .collect::<Result<Vec<f64>>>()?;

    let wr = model.resonator_frequency();
    let freqs = probe.values();
    let hwhm = 0.5 * linewidth;
    let mut columns: Vec<Vec<f64>> = gaps
        .iter()
        .map(|&gap| {
            freqs.iter().map(|&f| 0.5 * (lorentzian(f, wr + 0.5 * gap, hwhm) + lorentzian(f, wr - 0.5 * gap, hwhm))).collect()
        })
        .collect();
    normalize(&mut columns);
    let overlays = vec![
        Overlay { name: "floquet_gap".into(), values: gaps.clone() },
        Overlay { name: "bessel_gap".into(), values: predicted.clone() },
        Overlay { name: "upper".into(), values: predicted.iter().map(|p| wr + 0.5 * p).collect() },
        Overlay { name: "lower".into(), values: predicted.iter().map(|p| wr - 0.5 * p).collect() },
    ];
    let map = SpectrumMap::from_columns(SweepVariable::LambdaZ, amps, SweepVariable::ProbeFrequency, freqs, columns, overlays)?;
    Ok(DrivenSpectrum { map, gaps, predicted })
}
