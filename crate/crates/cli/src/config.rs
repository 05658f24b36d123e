//! Run configuration: a sectioned `key = value` document.
//!
//! ```text
//! # reference device
//! [device]
//! g = 9.14MHz
//! wr = 2.417GHz
//! delta = 2.417GHz
//! ```
//!
//! Frequencies and times need one of the suffixes `Hz kHz MHz GHz` or
//! `ns us ms s` (case-sensitive, optional space before it). Frequencies are
//! ordinary (cycles per second) and kept that way here; they become angular
//! only when the device model is built.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use qswitch::calibration::{CubicMap, REFERENCE_COEFFICIENTS, REFERENCE_DOMAIN};
use qswitch::model::{CouplingParams, DeviceModel, DriveParams, QubitBias, QubitParams, ResonatorParams};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// 1-based line, or 0 when the problem is a missing key.
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

fn err<T>(line: usize, message: impl Into<String>) -> Result<T> {
    Err(ConfigError { line, message: message.into() })
}

/// Drive amplitude as configured: a frequency, or the numerically located
/// switch-off point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Amplitude {
    Hz(f64),
    SwitchOff,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Duration {
    Seconds(f64),
    /// Fractions of the vacuum-Rabi cycle `π/g`.
    Swap,
    Cycle,
    Quarter,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentSpec {
    pub duration: Duration,
    pub amplitude: Amplitude,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreparationSpec {
    QubitExcited,
    Entangled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }

    pub fn parse_list(s: &str) -> std::result::Result<Vec<Format>, String> {
        let mut out = Vec::new();
        for item in s.split(',').map(str::trim) {
            let f = match item {
                "csv" => Format::Csv,
                "json" => Format::Json,
                "svg" => Format::Svg,
                other => return Err(format!("unknown format '{other}' (expected csv, json, svg)")),
            };
            if !out.contains(&f) {
                out.push(f);
            }
        }
        out.sort();
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeakSource {
    /// Peaks picked from a simulated spectroscopy map.
    Spectrum,
    /// Exact dressed-branch positions plus optional Gaussian noise.
    Model,
    /// `epsilon_hz,peak_hz` rows from `peaks_file`.
    File,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceConfig {
    pub g: f64,
    pub wr: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub wz: f64,
    pub lambda_z: Amplitude,
    pub phase: f64,
    pub t1_qubit: Option<f64>,
    pub t1_resonator: Option<f64>,
    pub fock: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub t_end: f64,
    pub samples: usize,
    pub max_step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub epsilon: Range,
    pub probe: Range,
    pub lambda_z: Range,
    pub linewidth: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchConfig {
    pub preparation: PreparationSpec,
    pub segments: Vec<SegmentSpec>,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StorageConfig {
    pub t_off: f64,
    pub window: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveformConfig {
    pub sample_rate: f64,
    pub duration: f64,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationConfig {
    /// `(c3, c2, c1, c0)` in volts per GHz^k.
    pub coefficients: [f64; 4],
    /// Gap domain in Hz.
    pub domain: (f64, f64),
    /// Volts.
    pub voltages: Range,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub source: PeakSource,
    pub peaks_file: Option<String>,
    pub noise: f64,
    pub seed: u64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: String,
    pub formats: Vec<Format>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSection {
    pub command: Option<String>,
    pub workers: Option<usize>,
}

/// Fully validated configuration with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub device: DeviceConfig,
    pub grid: GridConfig,
    pub sweep: SweepConfig,
    pub switch: SwitchConfig,
    pub storage: StorageConfig,
    pub waveform: WaveformConfig,
    pub calibration: CalibrationConfig,
    pub fit: FitConfig,
    pub output: OutputConfig,
    pub run: RunSection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Frequency,
    Time,
    Count,
    Number,
    Text,
}

const SCHEMA: &[(&str, &[(&str, Kind)])] = &[
    (
        "device",
        &[
            ("g", Kind::Frequency),
            ("wr", Kind::Frequency),
            ("delta", Kind::Frequency),
            ("epsilon", Kind::Frequency),
            ("wz", Kind::Frequency),
            ("lambda_z", Kind::Text),
            ("phase", Kind::Number),
            ("t1_qubit", Kind::Text),
            ("t1_resonator", Kind::Text),
            ("fock", Kind::Count),
        ],
    ),
    ("grid", &[("t_end", Kind::Time), ("samples", Kind::Count), ("max_step", Kind::Time)]),
    (
        "sweep",
        &[
            ("epsilon_start", Kind::Frequency),
            ("epsilon_stop", Kind::Frequency),
            ("epsilon_points", Kind::Count),
            ("probe_start", Kind::Frequency),
            ("probe_stop", Kind::Frequency),
            ("probe_points", Kind::Count),
            ("lambda_start", Kind::Frequency),
            ("lambda_stop", Kind::Frequency),
            ("lambda_points", Kind::Count),
            ("linewidth", Kind::Frequency),
        ],
    ),
    ("switch", &[("preparation", Kind::Text), ("segments", Kind::Text), ("step", Kind::Time)]),
    ("storage", &[("t_off", Kind::Time), ("window", Kind::Time), ("step", Kind::Time)]),
    ("waveform", &[("sample_rate", Kind::Frequency), ("duration", Kind::Time), ("gain", Kind::Number)]),
    (
        "calibration",
        &[
            ("c3", Kind::Number),
            ("c2", Kind::Number),
            ("c1", Kind::Number),
            ("c0", Kind::Number),
            ("domain_lo", Kind::Frequency),
            ("domain_hi", Kind::Frequency),
            ("v_start", Kind::Number),
            ("v_stop", Kind::Number),
            ("v_points", Kind::Count),
        ],
    ),
    (
        "fit",
        &[
            ("source", Kind::Text),
            ("peaks_file", Kind::Text),
            ("noise", Kind::Frequency),
            ("seed", Kind::Count),
            ("threshold", Kind::Number),
        ],
    ),
    ("output", &[("dir", Kind::Text), ("formats", Kind::Text)]),
    ("run", &[("command", Kind::Text), ("workers", Kind::Count)]),
];

const FREQUENCY_SUFFIXES: [(&str, f64); 4] = [("GHz", 1e9), ("MHz", 1e6), ("kHz", 1e3), ("Hz", 1.0)];
const TIME_SUFFIXES: [(&str, f64); 4] = [("ns", 1e-9), ("us", 1e-6), ("ms", 1e-3), ("s", 1.0)];

fn parse_number(raw: &str, line: usize) -> Result<f64> {
    match raw.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => err(line, format!("'{raw}' is not a finite number")),
    }
}

fn parse_suffixed(raw: &str, line: usize, suffixes: &[(&str, f64)], what: &str) -> Result<f64> {
    let s = raw.trim();
    let split = s.find(|c: char| c.is_ascii_alphabetic() && c != 'e' && c != 'E').or_else(|| {
        // An exponent letter can only start the suffix if nothing numeric follows.
        s.find(|c: char| c.is_ascii_alphabetic())
    });
    let Some(at) = split else {
        return err(line, format!("'{s}' needs a {what} unit suffix"));
    };
    let (num, unit) = (s[..at].trim(), s[at..].trim());
    let Some(&(_, scale)) = suffixes.iter().find(|(u, _)| *u == unit) else {
        let allowed: Vec<&str> = suffixes.iter().map(|(u, _)| *u).collect();
        return err(line, format!("unknown {what} unit '{unit}' (expected one of {})", allowed.join(", ")));
    };
    Ok(parse_number(num, line)? * scale)
}

pub fn parse_frequency(raw: &str, line: usize) -> Result<f64> {
    parse_suffixed(raw, line, &FREQUENCY_SUFFIXES, "frequency")
}

pub fn parse_time(raw: &str, line: usize) -> Result<f64> {
    parse_suffixed(raw, line, &TIME_SUFFIXES, "time")
}

#[derive(Debug)]
struct Entry {
    raw: String,
    line: usize,
}

struct Document {
    sections: BTreeMap<&'static str, (usize, BTreeMap<&'static str, Entry>)>,
}

impl Document {
    fn parse(text: &str) -> Result<Self> {
        let mut sections: BTreeMap<&'static str, (usize, BTreeMap<&'static str, Entry>)> = BTreeMap::new();
        let mut current: Option<(&'static str, &'static [(&'static str, Kind)])> = None;
        for (i, raw_line) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let Some(name) = rest.strip_suffix(']') else {
                    return err(line, format!("malformed section header '{content}'"));
                };
                let name = name.trim();
                let Some(&(sname, keys)) = SCHEMA.iter().find(|(s, _)| *s == name) else {
                    return err(line, format!("unknown section [{name}]"));
                };
                if sections.contains_key(sname) {
                    return err(line, format!("duplicate section [{name}]"));
                }
                sections.insert(sname, (line, BTreeMap::new()));
                current = Some((sname, keys));
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return err(line, format!("expected 'key = value', got '{content}'"));
            };
            let (key, value) = (key.trim(), value.trim());
            let Some((sname, keys)) = current else {
                return err(line, format!("key '{key}' appears before any section"));
            };
            let Some(&(kname, _)) = keys.iter().find(|(k, _)| *k == key) else {
                return err(line, format!("unknown key '{key}' in [{sname}]"));
            };
            if value.is_empty() {
                return err(line, format!("key '{key}' has no value"));
            }
            let entries = &mut sections.get_mut(sname).expect("section registered").1;
            if let Some(prev) = entries.get(kname) {
                return err(line, format!("duplicate key '{key}' in [{sname}] (first set on line {})", prev.line));
            }
            entries.insert(kname, Entry { raw: value.to_string(), line });
        }
        Ok(Self { sections })
    }

    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.sections.get(section).and_then(|(_, e)| e.get(key))
    }

    fn kind(section: &str, key: &str) -> Kind {
        SCHEMA
            .iter()
            .find(|(s, _)| *s == section)
            .and_then(|(_, keys)| keys.iter().find(|(k, _)| *k == key))
            .map(|(_, k)| *k)
            .expect("schema key")
    }

    fn value(&self, section: &str, key: &str) -> Result<Option<(f64, usize)>> {
        let Some(e) = self.get(section, key) else { return Ok(None) };
        let v = match Self::kind(section, key) {
            Kind::Frequency => parse_frequency(&e.raw, e.line)?,
            Kind::Time => parse_time(&e.raw, e.line)?,
            Kind::Number => parse_number(&e.raw, e.line)?,
            Kind::Count | Kind::Text => unreachable!("not numeric"),
        };
        Ok(Some((v, e.line)))
    }

    fn required(&self, section: &str, key: &str) -> Result<(f64, usize)> {
        match self.value(section, key)? {
            Some(v) => Ok(v),
            None => err(0, format!("missing required key '{key}' in [{section}]")),
        }
    }

    fn or(&self, section: &str, key: &str, default: f64) -> Result<(f64, usize)> {
        Ok(self.value(section, key)?.unwrap_or((default, 0)))
    }

    fn count(&self, section: &str, key: &str, default: usize) -> Result<(usize, usize)> {
        let Some(e) = self.get(section, key) else { return Ok((default, 0)) };
        match e.raw.parse::<usize>() {
            Ok(v) => Ok((v, e.line)),
            Err(_) => err(e.line, format!("'{}' is not a non-negative integer", e.raw)),
        }
    }

    fn text(&self, section: &str, key: &str) -> Option<(&str, usize)> {
        self.get(section, key).map(|e| (e.raw.as_str(), e.line))
    }
}

fn positive(name: &str, (v, line): (f64, usize)) -> Result<f64> {
    if v > 0.0 {
        Ok(v)
    } else {
        err(line, format!("{name} must be positive, got {v}"))
    }
}

fn non_negative(name: &str, (v, line): (f64, usize)) -> Result<f64> {
    if v >= 0.0 {
        Ok(v)
    } else {
        err(line, format!("{name} must be non-negative, got {v}"))
    }
}

fn parse_amplitude(raw: &str, line: usize) -> Result<Amplitude> {
    match raw.trim() {
        "off" => Ok(Amplitude::SwitchOff),
        "0" => Ok(Amplitude::Hz(0.0)),
        s => {
            let v = parse_frequency(s, line)?;
            if v < 0.0 {
                return err(line, "drive amplitude must be non-negative");
            }
            Ok(Amplitude::Hz(v))
        }
    }
}

fn parse_lifetime(raw: &str, line: usize) -> Result<Option<f64>> {
    match raw.trim() {
        "inf" | "none" => Ok(None),
        s => Ok(Some(positive("relaxation time", (parse_time(s, line)?, line))?)),
    }
}

fn parse_segments(raw: &str, line: usize) -> Result<Vec<SegmentSpec>> {
    let mut out = Vec::new();
    for item in raw.split(',').map(str::trim) {
        let Some((d, a)) = item.split_once('@') else {
            return err(line, format!("segment '{item}' must look like 'duration@amplitude'"));
        };
        let duration = match d.trim() {
            "swap" => Duration::Swap,
            "cycle" => Duration::Cycle,
            "quarter" => Duration::Quarter,
            s => Duration::Seconds(non_negative("segment duration", (parse_time(s, line)?, line))?),
        };
        out.push(SegmentSpec { duration, amplitude: parse_amplitude(a, line)? });
    }
    Ok(out)
}

fn range(doc: &Document, section: &str, prefix: &str, default: Range) -> Result<Range> {
    let (start, _) = doc.or(section, &format!("{prefix}_start"), default.start)?;
    let (stop, line) = doc.or(section, &format!("{prefix}_stop"), default.stop)?;
    let (points, pline) = doc.count(section, &format!("{prefix}_points"), default.points)?;
    if points < 2 {
        return err(pline, format!("{prefix}_points must be at least 2"));
    }
    if !(stop > start) {
        return err(line, format!("{prefix}_stop must exceed {prefix}_start"));
    }
    Ok(Range { start, stop, points })
}

const DEFAULT_SEGMENTS: &str = "cycle@0, 1us@off, 0.5us@0";

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let doc = Document::parse(text)?;

    let device = DeviceConfig {
        g: non_negative("g", doc.required("device", "g")?)?,
        wr: positive("wr", doc.required("device", "wr")?)?,
        delta: positive("delta", doc.required("device", "delta")?)?,
        epsilon: doc.or("device", "epsilon", 0.0)?.0,
        wz: positive("wz", doc.or("device", "wz", 150e6)?)?,
        lambda_z: match doc.text("device", "lambda_z") {
            Some((raw, line)) => parse_amplitude(raw, line)?,
            None => Amplitude::Hz(0.0),
        },
        phase: doc.or("device", "phase", 0.0)?.0,
        t1_qubit: match doc.text("device", "t1_qubit") {
            Some((raw, line)) => parse_lifetime(raw, line)?,
            None => None,
        },
        t1_resonator: match doc.text("device", "t1_resonator") {
            Some((raw, line)) => parse_lifetime(raw, line)?,
            None => None,
        },
        fock: {
            let (n, line) = doc.count("device", "fock", 5)?;
            if n < 2 {
                return err(line, "fock cutoff must be at least 2");
            }
            n
        },
    };

    let grid = GridConfig {
        t_end: positive("t_end", doc.or("grid", "t_end", 2e-6)?)?,
        samples: {
            let (n, line) = doc.count("grid", "samples", 2001)?;
            if n < 2 {
                return err(line, "samples must be at least 2");
            }
            n
        },
        max_step: match doc.value("grid", "max_step")? {
            Some(v) => Some(positive("max_step", v)?),
            None => None,
        },
    };

    let sweep = SweepConfig {
        epsilon: range(&doc, "sweep", "epsilon", Range { start: -300e6, stop: 300e6, points: 61 })?,
        probe: range(&doc, "sweep", "probe", Range { start: 2.3e9, stop: 2.55e9, points: 501 })?,
        lambda_z: range(&doc, "sweep", "lambda", Range { start: 0.0, stop: 1.6 * device.wz, points: 41 })?,
        linewidth: positive("linewidth", doc.or("sweep", "linewidth", 2e6)?)?,
    };

    let switch = SwitchConfig {
        preparation: match doc.text("switch", "preparation") {
            None | Some(("qubit_excited", _)) => PreparationSpec::QubitExcited,
            Some(("entangled", _)) => PreparationSpec::Entangled,
            Some((other, line)) => {
                return err(line, format!("unknown preparation '{other}' (expected qubit_excited or entangled)"))
            }
        },
        segments: match doc.text("switch", "segments") {
            Some((raw, line)) => parse_segments(raw, line)?,
            None => parse_segments(DEFAULT_SEGMENTS, 0)?,
        },
        step: positive("step", doc.or("switch", "step", 0.25e-9)?)?,
    };

    let storage = StorageConfig {
        t_off: non_negative("t_off", doc.or("storage", "t_off", 1.5e-6)?)?,
        window: positive("window", doc.or("storage", "window", 1e-6)?)?,
        step: positive("step", doc.or("storage", "step", 1e-9)?)?,
    };

    let waveform = WaveformConfig {
        sample_rate: positive("sample_rate", doc.or("waveform", "sample_rate", 2.4e9)?)?,
        duration: positive("duration", doc.or("waveform", "duration", 100e-9)?)?,
        gain: doc.or("waveform", "gain", 1.0)?.0,
    };

    let [r3, r2, r1, r0] = REFERENCE_COEFFICIENTS;
    let calibration = CalibrationConfig {
        coefficients: [
            doc.or("calibration", "c3", r3)?.0,
            doc.or("calibration", "c2", r2)?.0,
            doc.or("calibration", "c1", r1)?.0,
            doc.or("calibration", "c0", r0)?.0,
        ],
        domain: {
            let lo = positive("domain_lo", doc.or("calibration", "domain_lo", REFERENCE_DOMAIN.0 * 1e9)?)?;
            let (hi, line) = doc.or("calibration", "domain_hi", REFERENCE_DOMAIN.1 * 1e9)?;
            if !(hi > lo) {
                return err(line, "domain_hi must exceed domain_lo");
            }
            (lo, hi)
        },
        voltages: {
            let (start, _) = doc.or("calibration", "v_start", -2.1)?;
            let (stop, line) = doc.or("calibration", "v_stop", 0.0)?;
            let (points, pline) = doc.count("calibration", "v_points", 43)?;
            if points < 2 {
                return err(pline, "v_points must be at least 2");
            }
            if !(stop > start) {
                return err(line, "v_stop must exceed v_start");
            }
            Range { start, stop, points }
        },
    };

    let fit = FitConfig {
        source: match doc.text("fit", "source") {
            None | Some(("spectrum", _)) => PeakSource::Spectrum,
            Some(("model", _)) => PeakSource::Model,
            Some(("file", _)) => PeakSource::File,
            Some((other, line)) => {
                return err(line, format!("unknown peak source '{other}' (expected spectrum, model or file)"))
            }
        },
        peaks_file: doc.text("fit", "peaks_file").map(|(s, _)| s.to_string()),
        noise: non_negative("noise", doc.or("fit", "noise", 0.0)?)?,
        seed: doc.count("fit", "seed", 7)?.0 as u64,
        threshold: {
            let (t, line) = doc.or("fit", "threshold", 1e-3)?;
            if !(t > 0.0 && t < 1.0) {
                return err(line, "threshold must lie in (0, 1)");
            }
            t
        },
    };
    if fit.source == PeakSource::File && fit.peaks_file.is_none() {
        return err(doc.text("fit", "source").map_or(0, |(_, l)| l), "source = file needs peaks_file");
    }

    let output = OutputConfig {
        dir: doc.text("output", "dir").map_or("qswitch-out".to_string(), |(s, _)| s.to_string()),
        formats: match doc.text("output", "formats") {
            Some((raw, line)) => Format::parse_list(raw).or_else(|m| err(line, m))?,
            None => vec![Format::Csv, Format::Json, Format::Svg],
        },
    };

    let run = RunSection {
        command: doc.text("run", "command").map(|(s, _)| s.to_string()),
        workers: match doc.count("run", "workers", 0)? {
            (0, 0) => None,
            (0, line) => return err(line, "workers must be at least 1"),
            (n, _) => Some(n),
        },
    };

    Ok(RunConfig { device, grid, sweep, switch, storage, waveform, calibration, fit, output, run })
}

fn hz(v: f64) -> String {
    format!("{v:?}Hz")
}

fn sec(v: f64) -> String {
    format!("{v:?}s")
}

fn amplitude_text(a: Amplitude) -> String {
    match a {
        Amplitude::Hz(v) => hz(v),
        Amplitude::SwitchOff => "off".into(),
    }
}

impl RunConfig {
    /// Canonical text with every key written out; parses back to `self`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let d = &self.device;
        let lifetime = |t: Option<f64>| t.map_or("inf".to_string(), sec);
        let _ = writeln!(s, "[device]");
        let _ = writeln!(s, "g = {}\nwr = {}\ndelta = {}\nepsilon = {}", hz(d.g), hz(d.wr), hz(d.delta), hz(d.epsilon));
        let _ = writeln!(s, "wz = {}\nlambda_z = {}\nphase = {:?}", hz(d.wz), amplitude_text(d.lambda_z), d.phase);
        let _ = writeln!(s, "t1_qubit = {}\nt1_resonator = {}", lifetime(d.t1_qubit), lifetime(d.t1_resonator));
        let _ = writeln!(s, "fock = {}\n", d.fock);

        let _ = writeln!(s, "[grid]\nt_end = {}\nsamples = {}", sec(self.grid.t_end), self.grid.samples);
        if let Some(m) = self.grid.max_step {
            let _ = writeln!(s, "max_step = {}", sec(m));
        }
        let _ = writeln!(s);

        let _ = writeln!(s, "[sweep]");
        for (name, r) in [("epsilon", self.sweep.epsilon), ("probe", self.sweep.probe), ("lambda", self.sweep.lambda_z)] {
            let _ = writeln!(
                s,
                "{name}_start = {}\n{name}_stop = {}\n{name}_points = {}",
                hz(r.start),
                hz(r.stop),
                r.points
            );
        }
        let _ = writeln!(s, "linewidth = {}\n", hz(self.sweep.linewidth));

        let prep = match self.switch.preparation {
            PreparationSpec::QubitExcited => "qubit_excited",
            PreparationSpec::Entangled => "entangled",
        };
        let segs: Vec<String> = self
            .switch
            .segments
            .iter()
            .map(|seg| {
                let d = match seg.duration {
                    Duration::Seconds(v) => sec(v),
                    Duration::Swap => "swap".into(),
                    Duration::Cycle => "cycle".into(),
                    Duration::Quarter => "quarter".into(),
                };
                format!("{d}@{}", amplitude_text(seg.amplitude))
            })
            .collect();
        let _ = writeln!(
            s,
            "[switch]\npreparation = {prep}\nsegments = {}\nstep = {}\n",
            segs.join(", "),
            sec(self.switch.step)
        );

        let st = &self.storage;
        let _ = writeln!(s, "[storage]\nt_off = {}\nwindow = {}\nstep = {}\n", sec(st.t_off), sec(st.window), sec(st.step));

        let w = &self.waveform;
        let _ = writeln!(
            s,
            "[waveform]\nsample_rate = {}\nduration = {}\ngain = {:?}\n",
            hz(w.sample_rate),
            sec(w.duration),
            w.gain
        );

        let c = &self.calibration;
        let _ = writeln!(
            s,
            "[calibration]\nc3 = {:?}\nc2 = {:?}\nc1 = {:?}\nc0 = {:?}\ndomain_lo = {}\ndomain_hi = {}",
            c.coefficients[0],
            c.coefficients[1],
            c.coefficients[2],
            c.coefficients[3],
            hz(c.domain.0),
            hz(c.domain.1)
        );
        let _ = writeln!(
            s,
            "v_start = {:?}\nv_stop = {:?}\nv_points = {}\n",
            c.voltages.start, c.voltages.stop, c.voltages.points
        );

        let f = &self.fit;
        let source = match f.source {
            PeakSource::Spectrum => "spectrum",
            PeakSource::Model => "model",
            PeakSource::File => "file",
        };
        let _ = writeln!(s, "[fit]\nsource = {source}");
        if let Some(p) = &f.peaks_file {
            let _ = writeln!(s, "peaks_file = {p}");
        }
        let _ = writeln!(s, "noise = {}\nseed = {}\nthreshold = {:?}\n", hz(f.noise), f.seed, f.threshold);

        let formats: Vec<&str> = self.output.formats.iter().map(|f| f.name()).collect();
        let _ = writeln!(s, "[output]\ndir = {}\nformats = {}\n", self.output.dir, formats.join(","));

        let _ = writeln!(s, "[run]");
        if let Some(c) = &self.run.command {
            let _ = writeln!(s, "command = {c}");
        }
        if let Some(w) = self.run.workers {
            let _ = writeln!(s, "workers = {w}");
        }
        s
    }

    /// Device model with the configured drive. A switch-off amplitude is
    /// left at zero here; commands resolve it with the Floquet search.
    pub fn device_model(&self) -> qswitch::Result<DeviceModel> {
        let d = &self.device;
        let qubit = QubitParams { gap: TAU * d.delta, bias: QubitBias::Epsilon(TAU * d.epsilon), persistent_current: None };
        let amplitude = match d.lambda_z {
            Amplitude::Hz(v) => TAU * v,
            Amplitude::SwitchOff => 0.0,
        };
        DeviceModel::new(qubit, ResonatorParams::new(TAU * d.wr), CouplingParams::new(TAU * d.g))?
            .with_drive(DriveParams { amplitude, frequency: TAU * d.wz, phase: d.phase })?
            .with_t1(d.t1_qubit.unwrap_or(f64::INFINITY), d.t1_resonator.unwrap_or(f64::INFINITY))?
            .with_fock_cutoff(d.fock)
    }

    pub fn cubic_map(&self) -> qswitch::Result<CubicMap> {
        let c = &self.calibration;
        CubicMap::new(c.coefficients, (c.domain.0 * 1e-9, c.domain.1 * 1e-9))
    }

    /// Vacuum-Rabi half-cycle `π/g` in seconds.
    pub fn rabi_cycle(&self) -> f64 {
        PI / (TAU * self.device.g)
    }
}
