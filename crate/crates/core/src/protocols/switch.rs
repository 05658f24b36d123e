use std::f64::consts::{FRAC_1_SQRT_2, PI};

use super::rabi::require_resonance;
use super::signal::{fit_damped_cosine, DampedCosineFit};
use crate::dynamics::{evolve_lindblad, model_collapses, EvolutionResult, TimeGrid};
use crate::error::{Error, Result};
use crate::linalg::{HilbertLayout, Ket, Qubit, C64};
use crate::model::{CouplingForm, DeviceModel, DriveProfile, DriveWindow, DrivenHamiltonian};

/// Initial state, prepared instantaneously at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum Preparation {
    /// `|e,0⟩`.
    QubitExcited,
    /// `(|e,0⟩ − i|g,1⟩)/√2`, the state a quarter Rabi period after `|e,0⟩`.
    EntangledHalfSwap,
    Custom(Ket),
}

impl Preparation {
    pub fn ket(&self, layout: HilbertLayout) -> Result<Ket> {
        match self {
            Preparation::QubitExcited => Ok(layout.basis_ket(Qubit::Excited, 0)),
            Preparation::EntangledHalfSwap => {
                let mut amps = vec![C64::new(0.0, 0.0); layout.dim()];
                amps[layout.index(Qubit::Excited, 0)] = C64::new(FRAC_1_SQRT_2, 0.0);
                amps[layout.index(Qubit::Ground, 1)] = C64::new(0.0, -FRAC_1_SQRT_2);
                Ket::new(amps)
            }
            Preparation::Custom(k) if k.dim() == layout.dim() => Ok(k.clone()),
            Preparation::Custom(k) => {
                Err(Error::Shape(format!("custom state has dimension {}, layout {}", k.dim(), layout.dim())))
            }
        }
    }
}

/// A stretch of time with constant drive amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    /// Seconds.
    pub duration: f64,
    /// λz (rad/s); zero means the drive is off.
    pub lambda_z: f64,
}

/// Piecewise-constant drive amplitude starting at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSchedule {
    preparation: Preparation,
    segments: Vec<Segment>,
}

impl PulseSchedule {
    /// Zero-length segments are dropped, so an empty off window leaves
    /// the schedule identical to one without it.
    pub fn new(preparation: Preparation, segments: impl IntoIterator<Item = Segment>) -> Result<Self> {
        let mut kept = Vec::new();
        for s in segments {
            if !(s.duration >= 0.0 && s.duration.is_finite()) {
                return Err(Error::InvalidArgument(format!("segment duration must be >= 0, got {}", s.duration)));
            }
            if !(s.lambda_z >= 0.0 && s.lambda_z.is_finite()) {
                return Err(Error::InvalidArgument(format!("segment λz must be >= 0, got {}", s.lambda_z)));
            }
            if s.duration > 0.0 {
                kept.push(s);
            }
        }
        if kept.is_empty() {
            return Err(Error::InvalidArgument("schedule has no segment of positive duration".into()));
        }
        Ok(Self { preparation, segments: kept })
    }

    pub fn preparation(&self) -> &Preparation {
        &self.preparation
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Start and end times of each segment.
    pub fn boundaries(&self) -> Vec<(f64, f64)> {
        let mut t = 0.0;
        self.segments
            .iter()
            .map(|s| {
                let start = t;
                t += s.duration;
                (start, t)
            })
            .collect()
    }

    /// Drive windows for the nonzero segments. Adjacent segments with the
    /// same amplitude form one window; the phase restarts at each on-edge.
    pub fn drive_profile(&self, frequency: f64, phase: f64) -> DriveProfile {
        let mut windows: Vec<DriveWindow> = Vec::new();
        for (s, (start, end)) in self.segments.iter().zip(self.boundaries()) {
            if s.lambda_z == 0.0 {
                continue;
            }
            match windows.last_mut() {
                Some(w) if w.end == start && w.amplitude == s.lambda_z => w.end = end,
                _ => windows.push(DriveWindow { start, end, amplitude: s.lambda_z, frequency, phase }),
            }
        }
        if windows.is_empty() {
            DriveProfile::Off
        } else {
            DriveProfile::Windows(windows)
        }
    }
}

/// Lab-frame Lindblad evolution under a switch schedule. The drive
/// frequency and phase come from the model; its amplitude is ignored.
pub fn switch_sequence(model: &DeviceModel, schedule: &PulseSchedule, grid: &TimeGrid) -> Result<EvolutionResult> {
    if grid.t_start != 0.0 {
        return Err(Error::InvalidArgument("switch sequences start at t = 0".into()));
    }
    let profile = match model.drive() {
        Some(d) => schedule.drive_profile(d.frequency, d.phase),
        None if schedule.segments().iter().all(|s| s.lambda_z == 0.0) => DriveProfile::Off,
        None => return Err(Error::InvalidArgument("schedule turns the drive on but the model has no drive".into())),
    };
    let h = DrivenHamiltonian::new(model, CouplingForm::Full, profile)?;
    let rho0 = schedule.preparation().ket(model.layout())?.to_density();
    evolve_lindblad(&h, &model_collapses(model), &rho0, grid)
}

/// Largest departure of `P` from pure qubit decay over `[start, end]`.
///
/// The envelope `P(t0)·exp(−(t − t0)/T1q)` is anchored at the sample `t0`
/// nearest to `start`, so grids should put a sample on the window edge.
/// Returns `None` when the window holds no sample.
pub fn pause_deviation(result: &EvolutionResult, start: f64, end: f64, qubit_t1: f64) -> Option<f64> {
    averaged_pause_deviation(result, start, end, qubit_t1, 0.0)
}

/// As [`pause_deviation`], but compares the running mean of `P` over `span`
/// seconds (one drive period removes the micromotion) with the mean of the
/// envelope over the same samples.
pub fn averaged_pause_deviation(
    result: &EvolutionResult,
    start: f64,
    end: f64,
    qubit_t1: f64,
    span: f64,
) -> Option<f64> {
    let (t, p) = (&result.times, &result.excited_population);
    let first = t.iter().position(|&x| x >= start)?;
    let anchor = match first {
        0 => 0,
        i if start - t[i - 1] < t[i] - start => i - 1,
        i => i,
    };
    let (t0, p0) = (t[anchor], p[anchor]);
    let last = t.iter().rposition(|&x| x <= end)?;
    if last < anchor {
        return None;
    }
    let w = if t.len() > 1 && span > 0.0 { ((span / (t[1] - t[0])).round() as usize).max(1) } else { 1 };
    let envelope = |i: usize| p0 * (-(t[i] - t0) / qubit_t1).exp();
    let mut worst: f64 = 0.0;
    for i in anchor..=last.saturating_sub(w - 1).max(anchor) {
        let hi = (i + w).min(last + 1);
        let n = (hi - i) as f64;
        let mean_p: f64 = p[i..hi].iter().sum::<f64>() / n;
        let mean_env: f64 = (i..hi).map(envelope).sum::<f64>() / n;
        worst = worst.max((mean_p - mean_env).abs());
    }
    Some(worst)
}

/// Swap `|e,0⟩ → |g,1⟩` for `π/(2g)`, hold for `t_off` at the model's drive
/// amplitude, then release until `total`.
pub fn storage_schedule(model: &DeviceModel, t_off: f64, total: f64) -> Result<PulseSchedule> {
    if !(t_off >= 0.0 && t_off.is_finite()) {
        return Err(Error::InvalidArgument(format!("t_off must be >= 0, got {t_off}")));
    }
    if !(model.g() > 0.0) {
        return Err(Error::InvalidArgument("storage needs g > 0".into()));
    }
    let lz = model.drive().map_or(0.0, |d| d.amplitude);
    if t_off > 0.0 && lz == 0.0 {
        return Err(Error::InvalidArgument("storage needs a nonzero switch-off drive amplitude".into()));
    }
    let t_swap = PI / (2.0 * model.g());
    let rest = total - t_swap - t_off;
    if !(rest > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "window of {total:e} s is shorter than swap plus storage ({:e} s)",
            t_swap + t_off
        )));
    }
    PulseSchedule::new(
        Preparation::QubitExcited,
        [
            Segment { duration: t_swap, lambda_z: 0.0 },
            Segment { duration: t_off, lambda_z: lz },
            Segment { duration: rest, lambda_z: 0.0 },
        ],
    )
}

/// Storage run over `grid` (which must start at 0).
pub fn storage_experiment(model: &DeviceModel, t_off: f64, grid: &TimeGrid) -> Result<EvolutionResult> {
    require_resonance(model)?;
    let schedule = storage_schedule(model, t_off, grid.t_end)?;
    switch_sequence(model, &schedule, grid)
}

/// Revival amplitude after storage, relative to an uninterrupted run.
#[derive(Debug, Clone)]
pub struct StorageAnalysis {
    pub storage: EvolutionResult,
    pub reference: EvolutionResult,
    /// Switch-on time of the storage run (s).
    pub release_time: f64,
    pub storage_fit: DampedCosineFit,
    pub reference_fit: DampedCosineFit,
    /// Oscillation amplitude at release, storage over reference.
    pub amplitude_ratio: f64,
    /// `exp(−t_off/T1r)`.
    pub expected_ratio: f64,
    /// Hz.
    pub revival_frequency: f64,
}

fn fit_after(result: &EvolutionResult, release: f64, window: f64, seed: f64) -> Result<(DampedCosineFit, f64)> {
    let (t, p): (Vec<f64>, Vec<f64>) = result
        .times
        .iter()
        .zip(&result.excited_population)
        .filter(|(t, _)| **t >= release && **t <= release + window)
        .map(|(t, p)| (*t, *p))
        .unzip();
    let fit = fit_damped_cosine(&t, &p, seed)?;
    // Amplitude carried back to the release instant.
    let at_release = fit.amplitude * (fit.decay * (fit.origin - release)).exp();
    Ok((fit, at_release))
}

/// Runs the storage sequence and an uninterrupted reference, fits a damped
/// cosine to `window` seconds after each release, and compares amplitudes.
pub fn analyze_storage(model: &DeviceModel, t_off: f64, grid: &TimeGrid, window: f64) -> Result<StorageAnalysis> {
    let t_swap = PI / (2.0 * model.g());
    let release_time = t_swap + t_off;
    if grid.t_end < release_time + window {
        return Err(Error::InvalidArgument("grid ends before the fit window".into()));
    }
    let storage = storage_experiment(model, t_off, grid)?;
    let spacing = grid.spacing();
    let n_ref = ((t_swap + window) / spacing).ceil() as usize + 1;
    let ref_grid = TimeGrid::new(0.0, (n_ref - 1) as f64 * spacing, n_ref, grid.max_step)?;
    let reference = storage_experiment(model, 0.0, &ref_grid)?;

    let seed = model.g() / PI;
    let (storage_fit, a_s) = fit_after(&storage, release_time, window, seed)?;
    let (reference_fit, a_r) = fit_after(&reference, t_swap, window, seed)?;
    Ok(StorageAnalysis {
        storage,
        reference,
        release_time,
        storage_fit,
        reference_fit,
        amplitude_ratio: a_s / a_r,
        expected_ratio: (-t_off / model.resonator_t1()).exp(),
        revival_frequency: storage_fit.frequency,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{ghz, mhz, NS};
    use std::f64::consts::TAU;

    #[test]
    fn schedule_drops_empty_segments_and_merges_windows() {
        let s = PulseSchedule::new(
            Preparation::QubitExcited,
            [
                Segment { duration: 10.0, lambda_z: 0.0 },
                Segment { duration: 0.0, lambda_z: 5.0 },
                Segment { duration: 2.0, lambda_z: 3.0 },
                Segment { duration: 1.0, lambda_z: 3.0 },
                Segment { duration: 4.0, lambda_z: 0.0 },
            ],
        )
        .unwrap();
        assert_eq!(s.segments().len(), 4);
        assert_eq!(s.total_duration(), 17.0);
        match s.drive_profile(7.0, 0.0) {
            DriveProfile::Windows(w) => {
                assert_eq!(w.len(), 1);
                assert_eq!((w[0].start, w[0].end), (10.0, 13.0));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn all_zero_schedule_has_drive_off() {
        let s = PulseSchedule::new(Preparation::QubitExcited, [Segment { duration: 1.0, lambda_z: 0.0 }]).unwrap();
        assert_eq!(s.drive_profile(1.0, 0.0), DriveProfile::Off);
    }

    #[test]
    fn schedule_validation() {
        assert!(PulseSchedule::new(Preparation::QubitExcited, []).is_err());
        assert!(PulseSchedule::new(Preparation::QubitExcited, [Segment { duration: -1.0, lambda_z: 0.0 }]).is_err());
        assert!(PulseSchedule::new(Preparation::QubitExcited, [Segment { duration: 1.0, lambda_z: f64::NAN }]).is_err());
    }

    #[test]
    fn pause_metrics_on_synthetic_trace() {
        let t1 = 2.0;
        let times: Vec<f64> = (0..=400).map(|k| k as f64 * 0.01).collect();
        let ripple = 0.05;
        let p: Vec<f64> = times.iter().map(|t| 0.8 * (-t / t1).exp() + ripple * (TAU * t / 0.1).sin()).collect();
        let r = EvolutionResult {
            times: times.clone(),
            excited_population: p,
            photon_number: vec![0.0; times.len()],
            final_state: Ket::basis(2, 0).to_density(),
            diagnostics: Default::default(),
        };
        let raw = pause_deviation(&r, 0.0, 3.0, t1).unwrap();
        assert!((raw - ripple * (0.4 * PI).sin()).abs() < 1e-12, "{raw}");
        let avg = averaged_pause_deviation(&r, 0.0, 3.0, t1, 0.1).unwrap();
        assert!(avg < 1e-12, "{avg}");
        assert!(pause_deviation(&r, 5.0, 6.0, t1).is_none());
    }

    #[test]
    fn half_swap_state() {
        let layout = HilbertLayout::new(3).unwrap();
        let k = Preparation::EntangledHalfSwap.ket(layout).unwrap();
        assert!((k.amplitudes()[0].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((k.amplitudes()[4].im + FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(Preparation::Custom(Ket::basis(4, 0)).ket(layout).is_err());
    }

    #[test]
    fn storage_schedule_layout() {
        let m = DeviceModel::resonant(mhz(9.14), ghz(2.417))
            .unwrap()
            .with_drive(crate::model::DriveParams::new(mhz(180.0), mhz(150.0)))
            .unwrap();
        let s = storage_schedule(&m, 100.0 * NS, 500.0 * NS).unwrap();
        assert_eq!(s.segments().len(), 3);
        assert!((s.segments()[0].duration - 27.35 * NS).abs() < 0.01 * NS);
        assert!((s.total_duration() - 500.0 * NS).abs() < 1e-18);
        assert!(storage_schedule(&m, 600.0 * NS, 500.0 * NS).is_err());
        assert!(storage_schedule(&m.without_drive(), 100.0 * NS, 500.0 * NS).is_err());
    }
}
