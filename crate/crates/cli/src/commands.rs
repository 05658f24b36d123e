use std::f64::consts::{PI, TAU};
use std::path::{Path, PathBuf};

use qswitch::calibration::{
    dressed_branches, fit_anticrossing, gap_tuning_curve, synthesize_waveform, Monotonicity, SpectrumPeaks,
};
use qswitch::dynamics::{quasienergy_gap, EvolutionDiagnostics, EvolutionResult, TimeGrid};
use qswitch::model::{bessel_j0, effective_coupling, DeviceModel, J0_FIRST_ZERO};
use qswitch::protocols::{
    analyze_storage, averaged_pause_deviation, compare_effective, driven_spectrum_scan, find_switch_off,
    pause_deviation, rabi_scan, spectrum_scan, switch_sequence, Preparation, PulseSchedule, Segment, SpectrumMap,
    SweepSpec, SweepVariable, SwitchOff,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde_json::Value;

use crate::config::{Amplitude, Duration, PeakSource, PreparationSpec, Range, RunConfig};
use crate::error::{CliError, Result};
use crate::output::{optional, record, Report, Table};
use crate::svg::{heat_map, line_plot, Axes, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    DrivenSpectrum,
    RabiScan,
    RabiCompare,
    Switch,
    Storage,
    OnoffRatio,
    Waveform,
    GapCurve,
    FitAnticrossing,
}

impl Command {
    pub const ALL: [Command; 10] = [
        Command::Spectrum,
        Command::DrivenSpectrum,
        Command::RabiScan,
        Command::RabiCompare,
        Command::Switch,
        Command::Storage,
        Command::OnoffRatio,
        Command::Waveform,
        Command::GapCurve,
        Command::FitAnticrossing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::DrivenSpectrum => "driven-spectrum",
            Command::RabiScan => "rabi-scan",
            Command::RabiCompare => "rabi-compare",
            Command::Switch => "switch",
            Command::Storage => "storage",
            Command::OnoffRatio => "onoff-ratio",
            Command::Waveform => "waveform",
            Command::GapCurve => "gap-curve",
            Command::FitAnticrossing => "fit-anticrossing",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }

    /// File stem shared by the command's outputs.
    pub fn stem(self) -> String {
        self.name().replace('-', "_")
    }
}

pub struct Context {
    /// Directory relative paths in the configuration resolve against.
    pub base_dir: PathBuf,
    pub verbose: bool,
}

impl Context {
    fn log(&self, msg: &str) {
        if self.verbose {
            eprintln!("qswitch: {msg}");
        }
    }
}

pub fn execute(command: Command, cfg: &RunConfig, ctx: &Context) -> Result<Report> {
    match command {
        Command::Spectrum => spectrum(cfg, ctx),
        Command::DrivenSpectrum => driven_spectrum(cfg, ctx),
        Command::RabiScan => rabi(cfg, ctx),
        Command::RabiCompare => rabi_compare(cfg, ctx),
        Command::Switch => switch(cfg, ctx),
        Command::Storage => storage(cfg, ctx),
        Command::OnoffRatio => onoff(cfg, ctx),
        Command::Waveform => waveform(cfg, ctx),
        Command::GapCurve => gap_curve(cfg, ctx),
        Command::FitAnticrossing => anticrossing(cfg, ctx),
    }
}

fn hz(omega: f64) -> f64 {
    omega / TAU
}

fn sweep(variable: SweepVariable, r: Range) -> Result<SweepSpec> {
    Ok(SweepSpec::new(variable, TAU * r.start, TAU * r.stop, r.points)?)
}

fn linspace(r: Range) -> Vec<f64> {
    let last = (r.points - 1) as f64;
    (0..r.points).map(|i| if i + 1 == r.points { r.stop } else { r.start + (r.stop - r.start) * i as f64 / last }).collect()
}

fn lab_grid(cfg: &RunConfig) -> Result<TimeGrid> {
    Ok(TimeGrid::new(0.0, cfg.grid.t_end, cfg.grid.samples, cfg.grid.max_step.unwrap_or(f64::INFINITY))?)
}

fn switch_off(model: &DeviceModel, ctx: &Context) -> Result<SwitchOff> {
    ctx.log("locating the switch-off amplitude");
    let s = find_switch_off(model)?;
    ctx.log(&format!("switch-off at λz/2π = {:.6} MHz, R = {:.3e}", hz(s.amplitude) * 1e-6, s.ratio));
    Ok(s)
}

/// Configured drive amplitude in rad/s, locating the switch-off point when
/// asked to.
fn drive_amplitude(cfg: &RunConfig, model: &DeviceModel, ctx: &Context) -> Result<(f64, Option<SwitchOff>)> {
    match cfg.device.lambda_z {
        Amplitude::Hz(v) => Ok((TAU * v, None)),
        Amplitude::SwitchOff => {
            let s = switch_off(model, ctx)?;
            Ok((s.amplitude, Some(s)))
        }
    }
}

fn switch_off_summary(s: &SwitchOff) -> Value {
    record(&[
        ("lambda_z_hz", hz(s.amplitude).into()),
        ("ratio", s.ratio.into()),
        ("gap_hz", hz(s.gap).into()),
        ("undriven_gap_hz", hz(s.undriven_gap).into()),
        ("evaluations", (s.evaluations as u64).into()),
    ])
}

fn diagnostics(d: &[EvolutionDiagnostics]) -> Value {
    let max = |f: fn(&EvolutionDiagnostics) -> f64| d.iter().map(f).fold(0.0, f64::max);
    record(&[
        ("max_norm_deviation", max(|x| x.max_norm_deviation).into()),
        ("max_trace_deviation", max(|x| x.max_trace_deviation).into()),
        ("max_hermiticity_error", max(|x| x.max_hermiticity_error).into()),
        ("min_eigenvalue", d.iter().map(|x| x.min_eigenvalue).fold(f64::INFINITY, f64::min).into()),
        ("steps", d.iter().map(|x| x.steps as u64).sum::<u64>().into()),
    ])
}

fn axes(title: &str, x: &str, y: &str) -> Axes {
    Axes { title: title.into(), x_label: x.into(), y_label: y.into() }
}

fn map_columns(map: &SpectrumMap) -> Vec<Vec<f64>> {
    (0..map.x_axis.len()).map(|ix| map.column(ix).to_vec()).collect()
}

fn overlay_series(map: &SpectrumMap, names: &[&str], x_scale: f64, y_scale: f64) -> Vec<Series> {
    let x: Vec<f64> = map.x_axis.iter().map(|v| v * x_scale).collect();
    names
        .iter()
        .filter_map(|n| map.overlay(n))
        .map(|o| Series::line(&o.name, x.clone(), o.values.iter().map(|v| v * y_scale).collect()))
        .collect()
}

fn long_table(map: &SpectrumMap, header: [&'static str; 3], x_scale: f64, y_scale: f64) -> Table {
    let mut t = Table::new(header.to_vec());
    for (ix, x) in map.x_axis.iter().enumerate() {
        for (iy, y) in map.y_axis.iter().enumerate() {
            t.push(vec![x * x_scale, y * y_scale, map.at(ix, iy)]);
        }
    }
    t
}

fn spectrum(cfg: &RunConfig, ctx: &Context) -> Result<Report> {
    let model = cfg.device_model()?.without_drive();
    let eps = sweep(SweepVariable::Epsilon, cfg.sweep.epsilon)?;
    let probe = sweep(SweepVariable::ProbeFrequency, cfg.sweep.probe)?;
    ctx.log(&format!("spectrum over {} × {} points", eps.n_points, probe.n_points));
    let map = spectrum_scan(&model, &eps, &probe, TAU * cfg.sweep.linewidth)?;

    let mut report = Report::new("spectrum");
    report.table("spectrum", long_table(&map, ["epsilon_hz", "probe_hz", "population"], 1.0 / TAU, 1.0 / TAU));
    let ov = |n: &str| map.overlay(n).map(|o| o.values.clone()).unwrap_or_default();
    let (lower, upper, qubit, res) = (ov("lower"), ov("upper"), ov("qubit"), ov("resonator"));
    let mut branches = Table::new(vec!["epsilon_hz", "lower_hz", "upper_hz", "qubit_hz", "resonator_hz"]);
    for i in 0..map.x_axis.len() {
        branches.push(vec![hz(map.x_axis[i]), hz(lower[i]), hz(upper[i]), hz(qubit[i]), hz(res[i])]);
    }
    report.table("spectrum_branches", branches);

    let closest = (0..map.x_axis.len())
        .min_by(|&a, &b| (upper[a] - lower[a]).total_cmp(&(upper[b] - lower[b])))
        .expect("sweep has points");
    let s = &mut report.summary;
    s.set("minimum_splitting_hz", hz(upper[closest] - lower[closest]));
    s.set("minimum_splitting_epsilon_hz", hz(map.x_axis[closest]));
    let peaks = SpectrumPeaks::from_map(&map, cfg.fit.threshold)?;
    let lines = &peaks.observations()[closest].1;
    let picked = (lines.len() == 2).then(|| lines[1] - lines[0]);
    s.measured(
        "resolved_splitting_hz",
        picked,
        &format!("expected two lines at the closest approach, found {}", lines.len()),
    );
    s.set("epsilon_points", eps.n_points as u64);
    s.set("probe_points", probe.n_points as u64);

    let svg = heat_map(
        &axes("Transition spectrum", "ε/2π (MHz)", "probe frequency (GHz)"),
        &map.x_axis.iter().map(|v| hz(*v) * 1e-6).collect::<Vec<_>>(),
        &map.y_axis.iter().map(|v| hz(*v) * 1e-9).collect::<Vec<_>>(),
        &map_columns(&map),
        &overlay_series(&map, &["upper", "lower"], 1e-6 / TAU, 1e-9 / TAU),
    )?;
    report.plot("spectrum", svg);
    Ok(report)
}

fn driven_spectrum(cfg: &RunConfig, ctx: &Context) -> Result<Report> {
    let model = cfg.device_model()?;
    let lam = sweep(SweepVariable::LambdaZ, cfg.sweep.lambda_z)?;
    ctx.log(&format!("Floquet gaps at {} drive amplitudes", lam.n_points));
    let ds = driven_spectrum_scan(&model, &lam)?;
    let map = &ds.map;

    let mut report = Report::new("driven-spectrum");
    report.table("driven_spectrum", long_table(map, ["lambda_z_hz", "probe_hz", "population"], 1.0 / TAU, 1.0 / TAU));
    let mut gaps = Table::new(vec!["lambda_z_hz", "floquet_gap_hz", "bessel_gap_hz"]);
    for (i, lz) in map.x_axis.iter().enumerate() {
        gaps.push(vec![hz(*lz), hz(ds.gaps[i]), hz(ds.predicted[i])]);
    }
    report.table("driven_spectrum_gaps", gaps);

    let imin = (0..ds.gaps.len()).min_by(|&a, &b| ds.gaps[a].total_cmp(&ds.gaps[b])).expect("sweep has points");
    let s = &mut report.summary;
    s.set("minimum_gap_hz", hz(ds.gaps[imin]));
    s.set("minimum_gap_lambda_z_hz", hz(map.x_axis[imin]));
    s.set("bessel_zero_lambda_z_hz", hz(J0_FIRST_ZERO * TAU * cfg.device.wz / 2.0));
    s.set(
        "max_gap_difference_hz",
        hz(ds.gaps.iter().zip(&ds.predicted).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)),
    );
    s.set("lambda_z_points", lam.n_points as u64);

    let x_mhz: Vec<f64> = map.x_axis.iter().map(|v| hz(*v) * 1e-6).collect();
    report.plot(
        "driven_spectrum",
        heat_map(
            &axes("Driven anti-crossing", "λz/2π (MHz)", "probe frequency (GHz)"),
            &x_mhz,
            &map.y_axis.iter().map(|v| hz(*v) * 1e-9).collect::<Vec<_>>(),
            &map_columns(map),
            &overlay_series(map, &["upper", "lower"], 1e-6 / TAU, 1e-9 / TAU),
        )?,
    );
    report.plot(
        "driven_spectrum_gaps",
        line_plot(
            &axes("Exchange gap versus drive amplitude", "λz/2π (MHz)", "gap/2π (MHz)"),
            &[
                Series::line("Floquet", x_mhz.clone(), ds.gaps.iter().map(|g| hz(*g) * 1e-6).collect()),
                Series::line("2g|J0|", x_mhz, ds.predicted.iter().map(|g| hz(*g) * 1e-6).collect()),
            ],
        )?,
    );
    Ok(report)
}

fn rabi(cfg: &RunConfig, ctx: &Context) -> Result<Report> {
    let model = cfg.device_model()?;
    let lam = sweep(SweepVariable::LambdaZ, cfg.sweep.lambda_z)?;
    let grid = lab_grid(cfg)?;
    ctx.log(&format!("{} Rabi traces of {} samples", lam.n_points, grid.n_samples));
    let scan = rabi_scan(&model, &lam, &grid)?;
    let map = &scan.map;
    let wz = TAU * cfg.device.wz;

    let mut report = Report::new("rabi-scan");
    report.table("rabi_scan", long_table(map, ["lambda_z_hz", "time_s", "population"], 1.0 / TAU, 1.0));
    let mut freqs = Table::new(vec!["lambda_z_hz", "frequency_hz", "predicted_hz"]);
    let mut columns = Vec::new();
    let reason = "no exchange oscillation resolvable below half the drive frequency";
    for (i, lz) in map.x_axis.iter().enumerate() {
        let predicted = hz(2.0 * effective_coupling(model.g(), *lz, wz)?.abs());
        let f = scan.frequencies[i];
        freqs.push_optional(vec![Some(hz(*lz)), f, Some(predicted)]);
        let mut col = vec![
            ("lambda_z_hz", hz(*lz).into()),
            ("frequency_hz", optional(f)),
            ("predicted_hz", predicted.into()),
        ];
        if f.is_none() {
            col.push(("frequency_reason", reason.into()));
        }
        columns.push(record(&col));
    }
    report.table("rabi_frequencies", freqs);
    let s = &mut report.summary;
    s.set("columns", Value::Array(columns));
    s.set("diagnostics", diagnostics(&scan.diagnostics));

    report.plot(
        "rabi_scan",
        heat_map(
            &axes("Vacuum Rabi oscillations", "λz/2π (MHz)", "time (µs)"),
            &map.x_axis.iter().map(|v| hz(*v) * 1e-6).collect::<Vec<_>>(),
            &map.y_axis.iter().map(|t| t * 1e6).collect::<Vec<_>>(),
            &map_columns(map),
            &[],
        )?,
    );
    Ok(report)
}

fn rabi_compare(cfg: &RunConfig, ctx: &Context) -> Result<Report> {
    let base = cfg.device_model()?;
    let wz = TAU * cfg.device.wz;
    let (full_amp, so) = drive_amplitude(cfg, &base, ctx)?;
    // At a switch-off point each model is compared at its own zero.
    let eff_amp = if so.is_some() { J0_FIRST_ZERO * wz / 2.0 } else { full_amp };
    let model = base.with_drive_amplitude(full_amp)?;
    let grid = lab_grid(cfg)?;
    ctx.log("full and effective runs");
    let c = compare_effective(&model, eff_amp, &grid)?;

    let mut report = Report::new("rabi-compare");
    let mut t = Table::new(vec!["time_s", "p_full", "p_effective"]);
    for (i, time) in c.full.times.iter().enumerate() {
        t.push(vec![*time, c.full.excited_population[i], c.effective.excited_population[i]]);
    }
    report.table("rabi_compare", t);
    let s = &mut report.summary;
    s.set("peak_deviation", c.peak_deviation);
    s.set("lambda_z_full_hz", hz(full_amp));
    s.set("lambda_z_effective_hz", hz(eff_amp));
    s.set("effective_coupling_hz", hz(effective_coupling(model.g(), eff_amp, wz)?));
    if let Some(so) = &so {
        s.set("switch_off", switch_off_summary(so));
    }
    s.set("diagnostics", diagnostics(&[c.full.diagnostics, c.effective.diagnostics]));

    let us: Vec<f64> = c.full.times.iter().map(|t| t * 1e6).collect();
    report.plot(
        "rabi_compare",
        line_plot(
            &axes("Full versus effective model", "time (µs)", "P(e)"),
            &[
                Series::line("full", us.clone(), c.full.excited_population.clone()),
                Series::line("effective", us, c.effective.excited_population.clone()),
            ],
        )?,
    );
    Ok(report)
}

fn trace_table(r: &EvolutionResult) -> Table {
    let mut t = Table::new(vec!["time_s", "population", "photon_number"]);
    for i in 0..r.times.len() {
        t.push(vec![r.times[i], r.excited_population[i], r.photon_number[i]]);
    }
    t
}

fn switch(cfg: &RunConfig, ctx: &Context) -> Result<Report> {
    let model = cfg.device_model()?;
    let g = TAU * cfg.device.g;
    let so = if cfg.switch.segments.iter().any(|s| s.amplitude == Amplitude::SwitchOff) {
        Some(switch_off(&model, ctx)?)
    } else {
        None
    };

    let mut durations = Vec::with_capacity(cfg.switch.segments.len());
    for seg in &cfg.switch.segments {
        let d = match seg.duration {
            Duration::Seconds(v) => v,
            _ if g <= 0.0 => return Err(CliError::Config("swap-relative durations need g > 0".into())),
            Duration::Swap => PI / (2.0 * g),
            Duration::Cycle => PI / g,
            Duration::Quarter => PI / (4.0 * g),
        };
        durations.push(d);
    }
    // The first segment fixes the sample step so every later edge lands on
    // a sample; later durations are rounded to whole steps.
    let step = match durations[0] {
        d if d > 0.0 => d / (d / cfg.switch.step).round().max(1.0),
        _ => cfg.switch.step,
    };
    let counts: Vec<usize> = durations.iter().map(|d| (d / step).round() as usize).collect();
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(CliError::Config("switch schedule is shorter than one sample step".into()));
    }
    let segments: Vec<Segment> = cfg
        .switch
        .segments
        .iter()
        .zip(&counts)
        .map(|(seg, &n)| Segment {
            duration: n as f64 * step,
            lambda_z: match seg.amplitude {
                Amplitude::Hz(v) => TAU * v,
                Amplitude::SwitchOff => so.as_ref().expect("located above").amplitude,
            },
        })
        .collect();
    let preparation = match cfg.switch.preparation {
        PreparationSpec::QubitExcited => Preparation::QubitExcited,
        PreparationSpec::Entangled => Preparation::EntangledHalfSwap,
    };
    let schedule = PulseSchedule::new(preparation, segments)?;
    let grid = TimeGrid::new(0.0, total as f64 * step, total + 1, cfg.grid.max_step.unwrap_or(f64::INFINITY))?;
    ctx.log(&format!("switch sequence over {} samples", grid.n_samples));
    let r = switch_sequence(&model, &schedule, &grid)?;

    let t1 = model.qubit_t1();
    let period = TAU / (TAU * cfg.device.wz);
    let mut report = Report::new("switch");
    let mut seg_table = Table::new(vec!["start_s", "end_s", "lambda_z_hz"]);
    let mut seg_summary = Vec::new();
    for (seg, (start, end)) in schedule.segments().iter().zip(schedule.boundaries()) {
        seg_table.push(vec![start, end, hz(seg.lambda_z)]);
        let mut rec = vec![
            ("start_s", start.into()),
            ("end_s", end.into()),
            ("lambda_z_hz", hz(seg.lambda_z).into()),
        ];
        if seg.lambda_z > 0.0 {
            let reason: Value = "window holds too few samples".into();
            let raw = pause_deviation(&r, start, end, t1);
            let avg = averaged_pause_deviation(&r, start, end, t1, period);
            rec.push(("pause_deviation", optional(raw)));
            rec.push(("averaged_pause_deviation", optional(avg)));
            if raw.is_none() {
                rec.push(("pause_deviation_reason", reason.clone()));
            }
            if avg.is_none() {
                rec.push(("averaged_pause_deviation_reason", reason));
            }
        }
        seg_summary.push(record(&rec));
    }
    report.table("switch", trace_table(&r));
    report.table("switch_segments", seg_table);
    let s = &mut report.summary;
    s.set("segments", Value::Array(seg_summary));
    s.set("sample_step_s", step);
    s.set("final_population", *r.excited_population.last().expect("grid has samples"));
    if let Some(so) = &so {
        s.set("switch_off", switch_off_summary(so));
    }
    s.set("diagnostics", diagnostics(&[r.diagnostics]));

    let us: Vec<f64> = r.times.iter().map(|t| t * 1e6).collect();
    report.plot(
        "switch",
        line_plot(
            &axes("Switch sequence", "time (µs)", "population"),
            &[
                Series::line("P(e)", us.clone(), r.excited_population.clone()),
                Series::line("⟨a†a⟩", us, r.photon_number.clone()),
            ],
        )?,
    );
    Ok(report)
}

fn storage(cfg: &RunConfig, ctx: &Context) -> Result<Report> {
    let base = cfg.device_model()?;
    let (amp, so) = drive_amplitude(cfg, &base, ctx)?;
    let model = base.with_drive_amplitude(amp)?;
    if !(model.g() > 0.0) {
        return Err(CliError::Config("storage needs g > 0".into()));
    }
    let st = &cfg.storage;
    let total = PI / (2.0 * model.g()) + st.t_off + st.window;
    let n = (total / st.step).ceil() as usize + 1;
    let grid = TimeGrid::new(0.0, (n - 1) as f64 * st.step, n, cfg.grid.max_step.unwrap_or(f64::INFINITY))?;
    ctx.log(&format!("storage for {:e} s plus reference run", st.t_off));
    let a = analyze_storage(&model, st.t_off, &grid, st.window)?;

    let mut report = Report::new("storage");
    report.table("storage", trace_table(&a.storage));
    report.table("storage_reference", trace_table(&a.reference));
    let s = &mut report.summary;
    s.set("amplitude_ratio", a.amplitude_ratio);
    s.set("expected_ratio", a.expected_ratio);
    s.set("revival_frequency_hz", a.revival_frequency);
    s.set("release_time_s", a.release_time);
    s.set("t_off_s", st.t_off);
    s.set("lambda_z_hz", hz(amp));
    let fit = |f: &qswitch::protocols::DampedCosineFit| {
        record(&[
            ("amplitude", f.amplitude.into()),
            ("frequency_hz", f.frequency.into()),
            ("decay_per_s", f.decay.into()),
            ("origin_s", f.origin.into()),
        ])
    };
    s.set("storage_fit", fit(&a.storage_fit));
    s.set("reference_fit", fit(&a.reference_fit));
    if let Some(so) = &so {
        s.set("switch_off", switch_off_summary(so));
    }
    s.set("diagnostics", diagnostics(&[a.storage.diagnostics, a.reference.diagnostics]));

    let us = |r: &EvolutionResult| r.times.iter().map(|t| t * 1e6).collect::<Vec<_>>();
    report.plot(
        "storage",
        line_plot(
            &axes("Photon storage", "time (µs)", "P(e)"),
            &[
                Series::line("storage", us(&a.storage), a.storage.excited_population.clone()),
                Series::line("reference", us(&a.reference), a.reference.excited_population.clone()),
            ],
        )?,
    );
    Ok(report)
}

fn onoff(cfg: &RunConfig, ctx: &Context) -> Result<Report> {
    let model = cfg.device_model()?;
    let so = switch_off(&model, ctx)?;
    let wz = TAU * cfg.device.wz;
    let amps: Vec<f64> = linspace(cfg.sweep.lambda_z).into_iter().map(|v| TAU * v).collect();
    let gaps = amps
        .par_iter()
        .map(|&lz| Ok(quasienergy_gap(&model.clone().with_drive_amplitude(lz)?)?))
        .collect::<Result<Vec<f64>>>()?;

    let mut report = Report::new("onoff-ratio");
    let mut t = Table::new(vec!["lambda_z_hz", "ratio", "bessel_ratio"]);
    let mut ratios = Vec::new();
    let mut bessel = Vec::new();
    for (lz, gap) in amps.iter().zip(&gaps) {
        let (r, b) = (gap / so.undriven_gap, bessel_j0(2.0 * lz / wz)?.abs());
        t.push(vec![hz(*lz), r, b]);
        ratios.push(r);
        bessel.push(b);
    }
    report.table("onoff_ratio", t);
    let s = &mut report.summary;
    s.set("lambda_z_off_hz", hz(so.amplitude));
    s.set("ratio", so.ratio);
    s.set("gap_hz", hz(so.gap));
    s.set("undriven_gap_hz", hz(so.undriven_gap));
    s.set("bessel_zero_lambda_z_hz", hz(J0_FIRST_ZERO * wz / 2.0));
    s.set("evaluations", so.evaluations as u64);

    let x: Vec<f64> = amps.iter().map(|v| hz(*v) * 1e-6).collect();
    report.plot(
        "onoff_ratio",
        line_plot(
            &axes("On/off ratio", "λz/2π (MHz)", "gap(λz)/gap(0)"),
            &[Series::line("Floquet", x.clone(), ratios), Series::line("|J0(2λz/ωz)|", x, bessel)],
        )?,
    );
    Ok(report)
}

fn waveform(cfg: &RunConfig, ctx: &Context) -> Result<Report> {
    let model = cfg.device_model()?;
    let (amp, so) = drive_amplitude(cfg, &model, ctx)?;
    let map = cfg.cubic_map()?;
    let w = &cfg.waveform;
    let wave = synthesize_waveform(amp, TAU * cfg.device.wz, TAU * cfg.device.wr, &map, w.sample_rate, w.duration)?
        .scaled(w.gain)?;
    if wave.samples().is_empty() {
        return Err(CliError::Config("waveform duration is shorter than one sample".into()));
    }

    let mut report = Report::new("waveform");
    let mut t = Table::new(vec!["time_s", "volts"]);
    for (k, v) in wave.samples().iter().enumerate() {
        t.push(vec![wave.time(k), *v]);
    }
    report.table("waveform", t);
    let mut bin = Vec::new();
    wave.write_binary(&mut bin)?;
    report.extra.push(("waveform.qswf".into(), bin));

    let (lo, hi) = wave.samples().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    let s = &mut report.summary;
    s.set("samples", wave.samples().len() as u64);
    s.set("sample_rate_hz", wave.sample_rate());
    s.set("duration_s", wave.duration());
    s.set("samples_per_period", wave.sample_rate() / cfg.device.wz);
    s.set("min_volts", lo);
    s.set("max_volts", hi);
    s.set("lambda_z_hz", hz(amp));
    s.set("gain", w.gain);
    if let Some(so) = &so {
        s.set("switch_off", switch_off_summary(so));
    }

    report.plot(
        "waveform",
        line_plot(
            &axes("Bias-line waveform", "time (ns)", "voltage (V)"),
            &[Series::line(
                "V(t)",
                (0..wave.samples().len()).map(|k| wave.time(k) * 1e9).collect(),
                wave.samples().to_vec(),
            )],
        )?,
    );
    Ok(report)
}

fn gap_curve(cfg: &RunConfig, _ctx: &Context) -> Result<Report> {
    let map = cfg.cubic_map()?;
    let volts = linspace(cfg.calibration.voltages);
    let curve = gap_tuning_curve(&map, &volts, cfg.device.wr * 1e-9)?;

    let mut report = Report::new("gap-curve");
    let mut t = Table::new(vec!["volts", "gap_hz"]);
    for (v, ghz) in &curve.points {
        t.push(vec![*v, ghz * 1e9]);
    }
    report.table("gap_curve", t);
    let s = &mut report.summary;
    s.measured(
        "resonator_crossing_volts",
        curve.resonator_crossing,
        "voltage sweep does not bracket the resonator frequency",
    );
    s.set(
        "monotonicity",
        match map.monotonicity() {
            Some(Monotonicity::Increasing) => "increasing",
            Some(Monotonicity::Decreasing) => "decreasing",
            None => "not monotone",
        },
    );
    let (vlo, vhi) = map.range();
    s.set("voltage_range", Value::Array(vec![vlo.into(), vhi.into()]));
    s.set("resonator_hz", cfg.device.wr);

    report.plot(
        "gap_curve",
        line_plot(
            &axes("Qubit gap versus bias voltage", "voltage (V)", "Δ/2π (GHz)"),
            &[Series::line("Δ(V)", curve.points.iter().map(|p| p.0).collect(), curve.points.iter().map(|p| p.1).collect())],
        )?,
    );
    Ok(report)
}

/// `epsilon_hz,peak_hz` rows, grouped by ε in order of first appearance.
pub fn read_peaks(path: &Path) -> Result<SpectrumPeaks> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "epsilon_hz,peak_hz" => {}
        _ => return Err(CliError::Config(format!("{}: header must be 'epsilon_hz,peak_hz'", path.display()))),
    }
    let mut obs: Vec<(f64, Vec<f64>)> = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let bad = || CliError::Config(format!("{} line {}: expected two numbers, got '{line}'", path.display(), i + 1));
        let (e, f) = line.split_once(',').ok_or_else(bad)?;
        let eps = TAU * e.trim().parse::<f64>().map_err(|_| bad())?;
        let f = f.trim().parse::<f64>().map_err(|_| bad())?;
        match obs.iter_mut().find(|(x, _)| *x == eps) {
            Some((_, ps)) => ps.push(f),
            None => obs.push((eps, vec![f])),
        }
    }
    for (_, ps) in &mut obs {
        ps.sort_by(f64::total_cmp);
    }
    Ok(SpectrumPeaks::new(obs)?)
}

fn anticrossing(cfg: &RunConfig, ctx: &Context) -> Result<Report> {
    let f = &cfg.fit;
    let d = &cfg.device;
    let eps: Vec<f64> = linspace(cfg.sweep.epsilon).into_iter().map(|v| TAU * v).collect();
    let mut peaks = match f.source {
        PeakSource::Model => SpectrumPeaks::from_model(TAU * d.g, TAU * d.delta, TAU * d.wr, &eps)?,
        PeakSource::Spectrum => {
            let model = cfg.device_model()?.without_drive();
            let probe = sweep(SweepVariable::ProbeFrequency, cfg.sweep.probe)?;
            ctx.log("simulating the spectroscopy map for peak picking");
            let map = spectrum_scan(&model, &sweep(SweepVariable::Epsilon, cfg.sweep.epsilon)?, &probe, TAU * cfg.sweep.linewidth)?;
            SpectrumPeaks::from_map(&map, f.threshold)?
        }
        PeakSource::File => read_peaks(&ctx.base_dir.join(f.peaks_file.as_deref().expect("validated with the config")))?,
    };
    if f.noise > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(f.seed);
        let normal = Normal::new(0.0, f.noise).map_err(|e| CliError::Config(e.to_string()))?;
        let noisy = peaks
            .observations()
            .iter()
            .map(|(e, ps)| {
                let mut ps: Vec<f64> = ps.iter().map(|p| p + normal.sample(&mut rng)).collect();
                ps.sort_by(f64::total_cmp);
                (*e, ps)
            })
            .collect();
        peaks = SpectrumPeaks::new(noisy)?;
    }
    let fit = fit_anticrossing(&peaks)?;

    let mut report = Report::new("fit-anticrossing");
    let mut t = Table::new(vec!["epsilon_hz", "peak_hz", "model_hz"]);
    let (mut px, mut py) = (Vec::new(), Vec::new());
    for (e, ps) in peaks.observations() {
        let (lo, hi) = dressed_branches(fit.g, fit.delta, fit.omega_r, *e);
        for p in ps {
            let m = if (p - hz(lo)).abs() <= (p - hz(hi)).abs() { hz(lo) } else { hz(hi) };
            t.push(vec![hz(*e), *p, m]);
            px.push(hz(*e) * 1e-6);
            py.push(p * 1e-9);
        }
    }
    report.table("fit_anticrossing", t);
    let s = &mut report.summary;
    s.set("g_hz", hz(fit.g));
    s.set("delta_hz", hz(fit.delta));
    s.set("omega_r_hz", hz(fit.omega_r));
    s.set("residual_hz", fit.residual);
    s.set("resolution_floor_hz", hz(fit.resolution_floor));
    s.set("resolved", fit.resolved);
    s.set("iterations", fit.iterations as u64);
    s.set("peaks", peaks.len() as u64);
    s.set("lower_branch_peaks", fit.branch_counts.0 as u64);
    s.set("upper_branch_peaks", fit.branch_counts.1 as u64);
    s.set(
        "source",
        match f.source {
            PeakSource::Model => "model",
            PeakSource::Spectrum => "spectrum",
            PeakSource::File => "file",
        },
    );

    let mut es: Vec<f64> = peaks.observations().iter().map(|(e, _)| *e).collect();
    es.sort_by(f64::total_cmp);
    let branches: Vec<(f64, f64)> = es.iter().map(|e| dressed_branches(fit.g, fit.delta, fit.omega_r, *e)).collect();
    let ex: Vec<f64> = es.iter().map(|e| hz(*e) * 1e-6).collect();
    report.plot(
        "fit_anticrossing",
        line_plot(
            &axes("Anti-crossing fit", "ε/2π (MHz)", "frequency (GHz)"),
            &[
                Series::points("peaks", px, py),
                Series::line("lower", ex.clone(), branches.iter().map(|b| hz(b.0) * 1e-9).collect()),
                Series::line("upper", ex, branches.iter().map(|b| hz(b.1) * 1e-9).collect()),
            ],
        )?,
    );
    Ok(report)
}
