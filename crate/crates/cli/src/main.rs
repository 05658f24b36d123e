use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use qswitch_cli::{run, CliError, Format, Invocation};

const AFTER_HELP: &str = "\
Each run writes <command>.csv tables, <command>.json, <command>.svg plots and
manifest.json into the output directory (QSWITCH_OUT > --out > [output] dir).
Exit codes: 0 success, 2 configuration or input error, 3 numerical failure,
4 file-system error. Errors are also printed on stderr as JSON.";

#[derive(Parser)]
#[command(name = "qswitch", version, about = "Simulate and calibrate a longitudinally driven qubit-resonator switch", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Option<Cmd>,
    /// Run configuration (sectioned key = value file).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Comma-separated subset of csv,json,svg.
    #[arg(long, global = true, value_name = "LIST")]
    format: Option<String>,
    /// Worker threads for parameter sweeps.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    /// Progress on stderr.
    #[arg(long, global = true)]
    verbose: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Transition spectrum versus qubit bias ε.
    #[command(after_help = "spectrum.csv: epsilon_hz,probe_hz,population\n\
        spectrum_branches.csv: epsilon_hz,lower_hz,upper_hz,qubit_hz,resonator_hz")]
    Spectrum,
    /// Floquet exchange gap and rendered lines versus drive amplitude λz.
    #[command(after_help = "driven_spectrum.csv: lambda_z_hz,probe_hz,population\n\
        driven_spectrum_gaps.csv: lambda_z_hz,floquet_gap_hz,bessel_gap_hz")]
    DrivenSpectrum,
    /// Vacuum-Rabi traces from |e,0⟩ for each λz in the sweep.
    #[command(after_help = "rabi_scan.csv: lambda_z_hz,time_s,population\n\
        rabi_frequencies.csv: lambda_z_hz,frequency_hz,predicted_hz (empty frequency: not resolvable)")]
    RabiScan,
    /// Full lab-frame model against the Bessel-renormalized model.
    #[command(after_help = "rabi_compare.csv: time_s,p_full,p_effective")]
    RabiCompare,
    /// Piecewise drive schedule from [switch].
    #[command(after_help = "switch.csv: time_s,population,photon_number\n\
        switch_segments.csv: start_s,end_s,lambda_z_hz")]
    Switch,
    /// Swap into the resonator, hold with the coupling off, release.
    #[command(after_help = "storage.csv, storage_reference.csv: time_s,population,photon_number")]
    Storage,
    /// Locate the switch-off amplitude and tabulate gap(λz)/gap(0).
    #[command(after_help = "onoff_ratio.csv: lambda_z_hz,ratio,bessel_ratio")]
    OnoffRatio,
    /// Bias-line voltage waveform through the calibrated cubic map.
    #[command(after_help = "waveform.csv: time_s,volts; waveform.qswf: binary samples")]
    Waveform,
    /// Qubit gap versus bias voltage by inverting the cubic map.
    #[command(after_help = "gap_curve.csv: volts,gap_hz")]
    GapCurve,
    /// Fit g, Δ and ωr to spectroscopy peaks.
    #[command(after_help = "fit_anticrossing.csv: epsilon_hz,peak_hz,model_hz")]
    FitAnticrossing,
}

impl Cmd {
    fn name(self) -> &'static str {
        match self {
            Cmd::Spectrum => "spectrum",
            Cmd::DrivenSpectrum => "driven-spectrum",
            Cmd::RabiScan => "rabi-scan",
            Cmd::RabiCompare => "rabi-compare",
            Cmd::Switch => "switch",
            Cmd::Storage => "storage",
            Cmd::OnoffRatio => "onoff-ratio",
            Cmd::Waveform => "waveform",
            Cmd::GapCurve => "gap-curve",
            Cmd::FitAnticrossing => "fit-anticrossing",
        }
    }
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return fail(CliError::Config(e.kind().to_string()));
        }
    };
    let Some(config) = cli.config else {
        return fail(CliError::Config("--config PATH is required".into()));
    };
    let formats = match cli.format.as_deref().map(Format::parse_list).transpose() {
        Ok(f) => f,
        Err(m) => return fail(CliError::Config(m)),
    };
    let inv = Invocation {
        command: cli.command.map(|c| c.name().to_string()),
        config,
        out: cli.out,
        env_out: std::env::var_os("QSWITCH_OUT").filter(|v| !v.is_empty()).map(PathBuf::from),
        formats,
        workers: cli.workers,
        verbose: cli.verbose,
    };
    match run(&inv) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}
