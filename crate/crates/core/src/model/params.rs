use crate::error::{Error, Result};
use crate::units::{self, HBAR};

use super::circuit::{epsilon_from_flux, zero_point_current};

/// Where the qubit bias ε comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QubitBias {
    /// ε directly, rad/s.
    Epsilon(f64),
    /// Flux Φε through the qubit loop (Wb); needs the persistent current.
    Flux(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitParams {
    /// Gap Δ (rad/s).
    pub gap: f64,
    pub bias: QubitBias,
    /// Persistent current Ip (A).
    pub persistent_current: Option<f64>,
}

impl QubitParams {
    pub fn at_optimal_point(gap: f64) -> Self {
        Self { gap, bias: QubitBias::Epsilon(0.0), persistent_current: None }
    }

    /// ε in rad/s, resolved from whichever bias is authoritative.
    pub fn epsilon(&self) -> Result<f64> {
        match self.bias {
            QubitBias::Epsilon(eps) => Ok(eps),
            QubitBias::Flux(flux) => {
                let ip = self.persistent_current.ok_or_else(|| {
                    Error::InvalidArgument("flux bias needs the persistent current".into())
                })?;
                epsilon_from_flux(flux, ip)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.gap > 0.0 && self.gap.is_finite()) {
            return Err(Error::InvalidArgument(format!("qubit gap must be positive, got {}", self.gap)));
        }
        if let Some(ip) = self.persistent_current {
            if !(ip > 0.0) {
                return Err(Error::InvalidArgument("persistent current must be positive".into()));
            }
        }
        let eps = self.epsilon()?;
        if !eps.is_finite() {
            return Err(Error::InvalidArgument("qubit bias must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonatorParams {
    /// ωr (rad/s).
    pub frequency: f64,
    /// Lr (H).
    pub inductance: Option<f64>,
}

impl ResonatorParams {
    pub fn new(frequency: f64) -> Self {
        Self { frequency, inductance: None }
    }

    /// `Ir = √(ħωr/Lr)` when the inductance is known.
    pub fn zero_point_current(&self) -> Option<f64> {
        self.inductance.map(|l| zero_point_current(self.frequency, l))
    }

    fn validate(&self) -> Result<()> {
        if !(self.frequency > 0.0 && self.frequency.is_finite()) {
            return Err(Error::InvalidArgument("resonator frequency must be positive".into()));
        }
        if let Some(l) = self.inductance {
            if !(l > 0.0) {
                return Err(Error::InvalidArgument("resonator inductance must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingParams {
    /// g (rad/s).
    pub g: f64,
    /// M (H).
    pub mutual_inductance: Option<f64>,
}

impl CouplingParams {
    pub fn new(g: f64) -> Self {
        Self { g, mutual_inductance: None }
    }
}

/// Longitudinal drive `λz cos(ωz t + φ) σz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams {
    /// λz (rad/s).
    pub amplitude: f64,
    /// ωz (rad/s).
    pub frequency: f64,
    /// φ (rad).
    pub phase: f64,
}

impl DriveParams {
    pub fn new(amplitude: f64, frequency: f64) -> Self {
        Self { amplitude, frequency, phase: 0.0 }
    }

    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.frequency
    }

    fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::InvalidArgument("drive amplitude must be non-negative".into()));
        }
        if !(self.frequency > 0.0 && self.frequency.is_finite()) {
            return Err(Error::InvalidArgument("drive frequency must be positive".into()));
        }
        if !self.phase.is_finite() {
            return Err(Error::InvalidArgument("drive phase must be finite".into()));
        }
        Ok(())
    }
}

/// All device parameters in one validated record.
///
/// Relaxation times are in seconds; `f64::INFINITY` switches the channel off.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceModel {
    qubit: QubitParams,
    resonator: ResonatorParams,
    coupling: CouplingParams,
    drive: Option<DriveParams>,
    qubit_t1: f64,
    resonator_t1: f64,
    fock_cutoff: usize,
}

pub const DEFAULT_FOCK_CUTOFF: usize = 5;

impl DeviceModel {
    pub fn new(qubit: QubitParams, resonator: ResonatorParams, coupling: CouplingParams) -> Result<Self> {
        let model = Self {
            qubit,
            resonator,
            coupling,
            drive: None,
            qubit_t1: f64::INFINITY,
            resonator_t1: f64::INFINITY,
            fock_cutoff: DEFAULT_FOCK_CUTOFF,
        };
        model.validate()?;
        Ok(model)
    }

    /// Qubit at its optimal point, resonant with the resonator, no loss.
    pub fn resonant(g: f64, resonator_frequency: f64) -> Result<Self> {
        Self::new(
            QubitParams::at_optimal_point(resonator_frequency),
            ResonatorParams::new(resonator_frequency),
            CouplingParams::new(g),
        )
    }

    /// The measured flux-qubit device: g/2π = 9.14 MHz, Δ/2π = ωr/2π =
    /// 2.417 GHz, T1 = 0.45 µs (qubit) and 4.6 µs (resonator), with a
    /// 150 MHz drive at zero amplitude.
    pub fn reference_device() -> Self {
        Self::resonant(units::mhz(9.14), units::ghz(2.417))
            .and_then(|m| m.with_t1(0.45e-6, 4.6e-6))
            .and_then(|m| m.with_drive(DriveParams::new(0.0, units::mhz(150.0))))
            .expect("reference parameters are valid")
    }

    pub fn with_drive(mut self, drive: DriveParams) -> Result<Self> {
        drive.validate()?;
        self.drive = Some(drive);
        Ok(self)
    }

    pub fn without_drive(mut self) -> Self {
        self.drive = None;
        self
    }

    /// Same drive, different amplitude.
    pub fn with_drive_amplitude(self, amplitude: f64) -> Result<Self> {
        let drive = self
            .drive
            .ok_or_else(|| Error::InvalidArgument("model has no drive to set the amplitude of".into()))?;
        self.with_drive(DriveParams { amplitude, ..drive })
    }

    pub fn with_t1(mut self, qubit_t1: f64, resonator_t1: f64) -> Result<Self> {
        self.qubit_t1 = qubit_t1;
        self.resonator_t1 = resonator_t1;
        self.validate()?;
        Ok(self)
    }

    pub fn without_dissipation(mut self) -> Self {
        self.qubit_t1 = f64::INFINITY;
        self.resonator_t1 = f64::INFINITY;
        self
    }

    pub fn with_fock_cutoff(mut self, n: usize) -> Result<Self> {
        self.fock_cutoff = n;
        self.validate()?;
        Ok(self)
    }

    pub fn with_coupling(mut self, coupling: CouplingParams) -> Result<Self> {
        self.coupling = coupling;
        self.validate()?;
        Ok(self)
    }

    pub fn with_qubit(mut self, qubit: QubitParams) -> Result<Self> {
        self.qubit = qubit;
        self.validate()?;
        Ok(self)
    }

    pub fn with_resonator(mut self, resonator: ResonatorParams) -> Result<Self> {
        self.resonator = resonator;
        self.validate()?;
        Ok(self)
    }

    pub fn with_epsilon(self, epsilon: f64) -> Result<Self> {
        let qubit = QubitParams { bias: QubitBias::Epsilon(epsilon), ..self.qubit };
        self.with_qubit(qubit)
    }

    pub fn qubit(&self) -> &QubitParams {
        &self.qubit
    }

    pub fn resonator(&self) -> &ResonatorParams {
        &self.resonator
    }

    pub fn coupling(&self) -> &CouplingParams {
        &self.coupling
    }

    pub fn drive(&self) -> Option<&DriveParams> {
        self.drive.as_ref()
    }

    pub fn gap(&self) -> f64 {
        self.qubit.gap
    }

    /// ε (rad/s). Validated at construction, so this cannot fail.
    pub fn epsilon(&self) -> f64 {
        self.qubit.epsilon().expect("validated at construction")
    }

    pub fn resonator_frequency(&self) -> f64 {
        self.resonator.frequency
    }

    pub fn g(&self) -> f64 {
        self.coupling.g
    }

    pub fn qubit_t1(&self) -> f64 {
        self.qubit_t1
    }

    pub fn resonator_t1(&self) -> f64 {
        self.resonator_t1
    }

    pub fn fock_cutoff(&self) -> usize {
        self.fock_cutoff
    }

    pub fn layout(&self) -> crate::linalg::HilbertLayout {
        crate::linalg::HilbertLayout::new(self.fock_cutoff).expect("validated at construction")
    }

    fn validate(&self) -> Result<()> {
        self.qubit.validate()?;
        self.resonator.validate()?;
        // g = 0 is allowed as the decoupled limit.
        if !(self.coupling.g >= 0.0 && self.coupling.g.is_finite()) {
            return Err(Error::InvalidArgument("coupling g must be non-negative".into()));
        }
        if let (Some(m), Some(ip), Some(ir)) = (
            self.coupling.mutual_inductance,
            self.qubit.persistent_current,
            self.resonator.zero_point_current(),
        ) {
            let circuit_g = m * ip * ir / HBAR;
            if (circuit_g - self.coupling.g).abs() > 1e-9 * self.coupling.g.max(circuit_g) {
                return Err(Error::InvalidArgument(format!(
                    "g = {:e} rad/s disagrees with M·Ip·Ir/ħ = {circuit_g:e} rad/s",
                    self.coupling.g
                )));
            }
        }
        for (name, t1) in [("qubit", self.qubit_t1), ("resonator", self.resonator_t1)] {
            if !(t1 > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} T1 must be positive or infinite")));
            }
        }
        if let Some(drive) = &self.drive {
            drive.validate()?;
        }
        if self.fock_cutoff < 2 {
            return Err(Error::InvalidArgument("Fock cutoff must be at least 2".into()));
        }
        Ok(())
    }
}
