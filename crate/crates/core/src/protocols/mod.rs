//! Scripted experiments: spectroscopy maps, driven gap scans, vacuum-Rabi
//! scans, switch sequences, storage, and on/off-ratio estimation.

mod compare;
mod onoff;
mod rabi;
mod signal;
mod spectrum;
mod sweep;
mod switch;

pub use compare::{compare_effective, EffectiveComparison};
pub use onoff::{find_switch_off, onoff_ratio, SwitchOff};
pub use rabi::{rabi_scan, RabiScan};
pub use signal::{extract_frequency, extract_frequency_below, fit_damped_cosine, DampedCosineFit};
pub use spectrum::{
    driven_spectrum_scan, driven_spectrum_scan_with, spectrum_scan, DrivenSpectrum, DEFAULT_LINEWIDTH,
};
pub use sweep::{Overlay, SpectrumMap, SweepSpec, SweepVariable};
pub use switch::{
    analyze_storage, averaged_pause_deviation, pause_deviation, storage_experiment, storage_schedule, switch_sequence, Preparation, PulseSchedule, Segment,
    StorageAnalysis,
};
