//! Bias-line calibration: the cubic voltage-to-gap map, gap tuning curves,
//! longitudinal-drive waveform synthesis, and anti-crossing fits that
//! recover `g`, `Δ` and `ωr` from spectroscopy peaks.

mod anticrossing;
mod cubic;
mod waveform;

pub use anticrossing::{
    dressed_branches, fit_anticrossing, fit_anticrossing_seeded, AnticrossingFit, SpectrumPeaks,
};
pub use cubic::{
    fit_cubic, gap_tuning_curve, valpha, CubicFit, CubicMap, GapCurve, Monotonicity, REFERENCE_COEFFICIENTS,
    REFERENCE_DOMAIN,
};
pub use waveform::{angular_to_ghz, synthesize_waveform, SampledWaveform, WAVEFORM_MAGIC, WAVEFORM_VERSION};
