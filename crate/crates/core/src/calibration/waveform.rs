use std::f64::consts::TAU;
use std::io::{BufRead, Read, Write};

use super::cubic::CubicMap;
use crate::error::{Error, Result};

/// Samples of the bias-line voltage at a fixed rate.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWaveform {
    sample_rate: f64,
    samples: Vec<f64>,
}

pub const WAVEFORM_MAGIC: [u8; 4] = *b"QSWF";
pub const WAVEFORM_VERSION: u32 = 1;

impl SampledWaveform {
    pub fn new(sample_rate: f64, samples: Vec<f64>) -> Result<Self> {
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!("sample rate must be positive, got {sample_rate}")));
        }
        if let Some(k) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("sample {k} is not finite")));
        }
        Ok(Self { sample_rate, samples })
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 / self.sample_rate
    }

    /// Every sample multiplied by `gain` (attenuator chain).
    pub fn scaled(&self, gain: f64) -> Result<Self> {
        Self::new(self.sample_rate, self.samples.iter().map(|v| v * gain).collect())
    }

    /// `time_s,volts` with a header line, 17 significant digits.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "time_s,volts")?;
        for (k, v) in self.samples.iter().enumerate() {
            writeln!(w, "{:.16e},{:.16e}", self.time(k), v)?;
        }
        Ok(())
    }

    /// Reads the CSV layout written by [`write_csv`](Self::write_csv); the
    /// rate comes from the first time step.
    pub fn read_csv(r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == "time_s,volts" => {}
            _ => return Err(Error::InvalidArgument("waveform CSV must start with 'time_s,volts'".into())),
        }
        let mut times = Vec::new();
        let mut samples = Vec::new();
        for (n, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::InvalidArgument(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = || Error::InvalidArgument(format!("waveform CSV line {}: '{line}'", n + 2));
            let (t, v) = line.split_once(',').ok_or_else(bad)?;
            times.push(t.trim().parse::<f64>().map_err(|_| bad())?);
            samples.push(v.trim().parse::<f64>().map_err(|_| bad())?);
        }
        if times.len() < 2 {
            return Err(Error::InsufficientData("waveform CSV needs two samples to fix the rate".into()));
        }
        Self::new(1.0 / (times[1] - times[0]), samples)
    }

    /// 16-byte header (`QSWF`, version u32, sample rate f64), then the
    /// samples; everything little-endian.
    pub fn write_binary(&self, mut w: impl Write) -> std::io::Result<()> {
        w.write_all(&WAVEFORM_MAGIC)?;
        w.write_all(&WAVEFORM_VERSION.to_le_bytes())?;
        w.write_all(&self.sample_rate.to_le_bytes())?;
        for v in &self.samples {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(mut r: impl Read) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        if bytes.len() < 16 || bytes[..4] != WAVEFORM_MAGIC {
            return Err(Error::InvalidArgument("missing QSWF header".into()));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
        if version != WAVEFORM_VERSION {
            return Err(Error::InvalidArgument(format!("unsupported waveform version {version}")));
        }
        let rate = f64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
        let body = &bytes[16..];
        if body.len() % 8 != 0 {
            return Err(Error::InvalidArgument("truncated sample block".into()));
        }
        let samples = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        Self::new(rate, samples)
    }
}

/// Gap in GHz (the map's variable) for an angular frequency.
pub fn angular_to_ghz(omega: f64) -> f64 {
    omega / TAU * 1e-9
}

/// Bias voltage that makes the qubit gap follow `ωr + 2λz cos(ωz t)`:
/// sample `k` is `V(gap(k/rate))` through the calibrated map, so the map's
/// nonlinearity is pre-compensated.
pub fn synthesize_waveform(
    lambda_z: f64,
    omega_z: f64,
    omega_r: f64,
    map: &CubicMap,
    sample_rate: f64,
    duration: f64,
) -> Result<SampledWaveform> {
    for (name, v) in [("λz", lambda_z), ("ωz", omega_z), ("ωr", omega_r), ("duration", duration)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!("{name} must be finite and non-negative, got {v}")));
        }
    }
    if !(sample_rate > 0.0 && sample_rate.is_finite()) {
        return Err(Error::InvalidArgument(format!("sample rate must be positive, got {sample_rate}")));
    }
    // The whole excursion must be calibrated, whether or not a sample lands on it.
    map.valpha(angular_to_ghz(omega_r + 2.0 * lambda_z))?;
    map.valpha(angular_to_ghz(omega_r - 2.0 * lambda_z))?;
    let n = (duration * sample_rate).round() as usize;
    let samples = (0..n)
        .map(|k| {
            let t = k as f64 / sample_rate;
            map.valpha(angular_to_ghz(omega_r + 2.0 * lambda_z * (omega_z * t).cos()))
        })
        .collect::<Result<Vec<_>>>()?;
    SampledWaveform::new(sample_rate, samples)
}
