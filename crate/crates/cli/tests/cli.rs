use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qswitch_cli::config::parse_config;
use qswitch_cli::svg::{heat_map, line_plot, ramp, Axes, Series, SvgError};
use serde_json::Value;

const DEVICE: &str = "[device]\ng = 9.14MHz\nwr = 2.417GHz\ndelta = 2.417GHz\nwz = 150MHz\n";

fn qswitch(dir: &Path, config: &str, args: &[&str]) -> Output {
    let path = dir.join("run.conf");
    std::fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_qswitch"))
        .args(args)
        .arg("--config")
        .arg(&path)
        .env_remove("QSWITCH_OUT")
        .output()
        .unwrap()
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))).unwrap()
}

fn error_json(out: &Output) -> Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().rev().find(|l| l.starts_with('{')).expect("error JSON on stderr");
    serde_json::from_str(line).unwrap()
}

#[test]
fn bad_suffix_exits_two_and_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = qswitch(dir.path(), "[device]\ng = 9.14MHz\nwr = 2.417GHz\ndelta = 2.417GHz\nwz = 150 Mhz\n", &["onoff-ratio"]);
    assert_eq!(out.status.code(), Some(2));
    let e = error_json(&out);
    assert_eq!(e["error"]["kind"], "config");
    assert!(e["error"]["message"].as_str().unwrap().starts_with("line 5:"), "{e}");
}

#[test]
fn unknown_command_and_missing_config_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("{DEVICE}[run]\ncommand = teleport\n");
    assert_eq!(qswitch(dir.path(), &cfg, &[]).status.code(), Some(2));
    let missing = Command::new(env!("CARGO_BIN_EXE_qswitch")).arg("gap-curve").output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
    let absent = Command::new(env!("CARGO_BIN_EXE_qswitch"))
        .args(["gap-curve", "--config", "/nonexistent/run.conf"])
        .output()
        .unwrap();
    assert_eq!(absent.status.code(), Some(4));
}

#[test]
fn unwritable_output_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let out = qswitch(dir.path(), DEVICE, &["gap-curve", "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(error_json(&out)["error"]["kind"], "io");
}

#[test]
fn out_of_domain_waveform_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = qswitch(dir.path(), &format!("{DEVICE}lambda_z = 400MHz\n"), &["waveform", "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(error_json(&out)["error"]["message"].as_str().unwrap().contains("outside domain"));
}

#[test]
fn onoff_ratio_reaches_the_switch_off_point() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let cfg = format!("{DEVICE}[sweep]\nlambda_points = 5\n");
    let out = qswitch(dir.path(), &cfg, &["onoff-ratio", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = json(out_dir.join("onoff_ratio.json"));
    assert!(s["ratio"].as_f64().unwrap() < 1e-5);
    let lz = s["lambda_z_off_hz"].as_f64().unwrap();
    assert!((175e6..=185e6).contains(&lz), "{lz}");
}

#[test]
fn zero_drive_waveform_is_constant() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("w");
    let out = qswitch(dir.path(), DEVICE, &["waveform", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("waveform.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("time_s,volts"));
    let volts: Vec<&str> = lines.map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(volts.len(), 240);
    assert!(volts.iter().all(|v| *v == volts[0]));
    let bin = std::fs::read(out_dir.join("waveform.qswf")).unwrap();
    assert_eq!(&bin[..4], b"QSWF");
}

#[test]
fn manifest_lists_checksums_and_echoes_a_reparsable_config() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("g");
    let out = qswitch(dir.path(), DEVICE, &["gap-curve", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success());
    let m = json(out_dir.join("manifest.json"));
    let files = m["files"].as_array().unwrap();
    let names: Vec<&str> = files.iter().map(|f| f["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["gap_curve.csv", "gap_curve.json", "gap_curve.svg"]);
    for f in files {
        let bytes = std::fs::read(out_dir.join(f["name"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"], qswitch_cli::output::sha256_hex(&bytes));
    }
    let echoed = parse_config(m["config"].as_str().unwrap()).unwrap();
    assert_eq!(parse_config(&echoed.to_text()).unwrap(), echoed);
    assert_eq!(echoed.device, parse_config(DEVICE).unwrap().device);
    assert!(m["wall_clock_seconds"].as_f64().unwrap() >= 0.0);

    let s = json(out_dir.join("gap_curve.json"));
    assert!((s["resonator_crossing_volts"].as_f64().unwrap() - -1.2273411).abs() < 1e-6);
}

#[test]
fn environment_overrides_out_and_format_filters_files() {
    let dir = tempfile::tempdir().unwrap();
    let (env_dir, flag_dir) = (dir.path().join("env"), dir.path().join("flag"));
    std::fs::write(dir.path().join("run.conf"), DEVICE).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qswitch"))
        .args(["gap-curve", "--format", "json", "--out", flag_dir.to_str().unwrap(), "--config"])
        .arg(dir.path().join("run.conf"))
        .env("QSWITCH_OUT", &env_dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(!flag_dir.exists());
    let mut names: Vec<String> =
        std::fs::read_dir(&env_dir).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["gap_curve.json", "manifest.json"]);
}

#[test]
fn unresolvable_crossing_is_a_null_with_reason() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("g");
    let cfg = format!("{DEVICE}[calibration]\nv_start = -2.0\nv_stop = -1.5\n");
    assert!(qswitch(dir.path(), &cfg, &["gap-curve", "--out", out_dir.to_str().unwrap()]).status.success());
    let s = json(out_dir.join("gap_curve.json"));
    assert!(s["resonator_crossing_volts"].is_null());
    assert!(s["resonator_crossing_volts_reason"].is_string());
}

#[test]
fn anticrossing_fit_from_a_peaks_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut peaks = String::from("epsilon_hz,peak_hz\n");
    let (g, d, wr) = (9.14e6_f64, 2.417e9_f64, 2.417e9_f64);
    for k in -10..=10 {
        let eps = 40e6 * k as f64;
        let wq = d.hypot(eps);
        let r = (0.5 * (wq - wr)).hypot(g);
        peaks.push_str(&format!("{eps},{}\n{eps},{}\n", 0.5 * (wq + wr) - r, 0.5 * (wq + wr) + r));
    }
    std::fs::write(dir.path().join("peaks.csv"), peaks).unwrap();
    let cfg = format!("{DEVICE}[fit]\nsource = file\npeaks_file = peaks.csv\n");
    let out_dir = dir.path().join("f");
    let out = qswitch(dir.path(), &cfg, &["fit-anticrossing", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = json(out_dir.join("fit_anticrossing.json"));
    assert!((s["g_hz"].as_f64().unwrap() / g - 1.0).abs() < 1e-6);
    assert_eq!(s["peaks"], 42);
}

#[test]
fn two_point_series_is_one_segment_under_the_axis_transform() {
    let svg = line_plot(&Axes::default(), &[Series::line("s", vec![0.0, 1.0], vec![0.0, 1.0])]).unwrap();
    // Plot area spans x ∈ [80, 690] and y ∈ [40, 420] with y flipped.
    assert!(svg.contains(r#"points="80.00,420.00 690.00,40.00""#), "{svg}");
    assert_eq!(svg.matches("<polyline").count(), 1);
}

#[test]
fn two_by_two_heat_map_is_four_ramp_coloured_cells() {
    let values = vec![vec![0.0, 1.0], vec![0.25, 0.5]];
    let svg = heat_map(&Axes::default(), &[0.0, 1.0], &[0.0, 1.0], &values, &[]).unwrap();
    let cells: Vec<&str> = svg.lines().filter(|l| l.starts_with("<rect") && l.contains("rgb(")).collect();
    assert_eq!(cells.len(), 4);
    for v in [0.0, 1.0, 0.25, 0.5] {
        let (r, g, b) = ramp(v);
        assert!(svg.contains(&format!("fill=\"rgb({r},{g},{b})\"")), "{v}");
    }
    assert_eq!(ramp(0.0), (0, 0, 255));
    assert_eq!(ramp(1.0), (255, 0, 0));
    assert!(!svg.contains("href"));
}

#[test]
fn svg_rejects_nan_and_empty_data() {
    let nan = line_plot(&Axes::default(), &[Series::line("s", vec![0.0, 1.0], vec![0.0, f64::NAN])]);
    assert!(matches!(nan, Err(SvgError::NonFinite(_))));
    assert!(matches!(line_plot(&Axes::default(), &[]), Err(SvgError::Empty(_))));
    assert!(matches!(
        line_plot(&Axes::default(), &[Series::line("s", vec![], vec![])]),
        Err(SvgError::Empty(_))
    ));
    assert!(heat_map(&Axes::default(), &[0.0], &[0.0], &[vec![f64::NAN]], &[]).is_err());
    assert!(heat_map(&Axes::default(), &[], &[], &[], &[]).is_err());
}

#[test]
fn help_documents_csv_schemas() {
    let out = Command::new(env!("CARGO_BIN_EXE_qswitch")).args(["rabi-scan", "--help"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("lambda_z_hz,time_s,population"), "{text}");
}
