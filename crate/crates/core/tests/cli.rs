//! Config parsing, run outputs and the command-line contract.

use std::fs;
use std::path::Path;
use std::process::Command as Process;

use tpespec::config::{parse_config_text, Command, Origin, PRESETS};
use tpespec::{calibrate, parse_config, parse_preset, run, Error};

const MINIMAL: &str = "\
[run]
command = spectrum

[carriers]
material = GaAs
density_cm3 = 1.2e18
temperature_K = 330
";

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn bin() -> Process {
    Process::new(env!("CARGO_BIN_EXE_tpespec"))
}

fn parse_error(text: &str) -> (String, usize) {
    match parse_config_text("t.cfg", text, Origin::Dir(".".into()), "t") {
        Err(Error::Parse { key, line, .. }) => (key, line),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn minimal_bulk_config_gets_documented_defaults() {
    let plan = parse_config_text("min.cfg", MINIMAL, Origin::Dir(".".into()), "min").unwrap();
    let i = &plan.inputs;
    assert_eq!(plan.command, Command::Spectrum);
    assert_eq!(i.seed, 1);
    assert_eq!((i.grid.lo_ev, i.grid.hi_ev, i.grid.points), (0.55, 1.15, 600));
    assert_eq!(i.carriers.gamma_per_s, 1e13);
    assert_eq!(i.geometry.solid_angle_fraction, 0.01);
    assert_eq!(i.calibration.gap_offset_ev, 0.0);
    let r = plan.resolved().unwrap();
    assert_eq!(r.grid.len(), 600);
    assert_eq!(r.state.n, 1.2e18);
}

#[test]
fn invalid_values_name_key_and_line() {
    let bad = MINIMAL.replace("density_cm3 = 1.2e18", "density_cm3 = -1");
    assert_eq!(parse_error(&bad), ("density_cm3".into(), 6));
    let unknown = MINIMAL.replace("temperature_K = 330", "temperature_K = 330\ncolour = red");
    assert_eq!(parse_error(&unknown), ("colour".into(), 8));
    let unparsable = MINIMAL.replace("= 330", "= warm");
    assert_eq!(parse_error(&unparsable).0, "temperature_K");
    assert_eq!(parse_error("[run]\nsystem = bulk\n").0, "command");
    assert_eq!(parse_error(&format!("{MINIMAL}\n[optics]\nlens = 1\n")).0, "optics");
    let eta = format!("{MINIMAL}\n[coincidence]\neta_si = 1.5\n");
    assert_eq!(parse_error(&eta), ("eta_si".into(), 10));
}

#[test]
fn config_echo_parses_back_to_the_same_inputs() {
    for (name, _) in PRESETS.iter().filter(|(n, _)| *n != "calibration") {
        let plan = parse_preset(name).unwrap();
        let echo = plan.inputs.to_config();
        let again = parse_config_text("echo.cfg", &echo, Origin::Dir(".".into()), name).unwrap();
        assert_eq!(plan.inputs, again.inputs, "preset {name}");
        assert_eq!(echo, again.inputs.to_config());
    }
}

fn assert_same_csvs(a: &Path, b: &Path) {
    let mut n = 0;
    for entry in fs::read_dir(a).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "csv") {
            let other = b.join(p.file_name().unwrap());
            assert_eq!(fs::read(&p).unwrap(), fs::read(&other).unwrap(), "{}", p.display());
            n += 1;
        }
    }
    assert!(n > 0);
}

#[test]
fn rerun_from_echo_is_bit_identical() {
    let tmp = tempfile::tempdir().unwrap();
    for name in ["fig1a", "fig4"] {
        let first = tmp.path().join(format!("{name}-a"));
        run(&parse_preset(name).unwrap().with_seed(9).with_output_dir(&first)).unwrap();
        let second = tmp.path().join(format!("{name}-b"));
        run(&parse_config(first.join("config.echo.cfg")).unwrap().with_output_dir(&second)).unwrap();
        assert_same_csvs(&first, &second);
    }
}

#[test]
fn run_writes_summary_plot_and_spectra() {
    let tmp = tempfile::tempdir().unwrap();
    let report = run(&parse_preset("fig3b").unwrap().with_output_dir(tmp.path())).unwrap();
    for f in ["spontaneous.csv", "onephoton.csv", "summary.txt", "spectrum.svg", "comparison.svg", "config.echo.cfg"] {
        assert!(tmp.path().join(f).is_file(), "{f}");
    }
    let csv = fs::read_to_string(tmp.path().join("spontaneous.csv")).unwrap();
    assert!(csv.starts_with("energy_eV,wavelength_nm,rate_per_s_per_eV\n"));
    let summary = fs::read_to_string(tmp.path().join("summary.txt")).unwrap();
    assert!(summary.contains("power_ratio = "));
    assert!(report.summary.get_f64("tpe.center_eV").is_some());
}

#[test]
fn calibration_is_a_fixed_point() {
    let plan = parse_preset("calibrate").unwrap();
    let first = calibrate(&plan).unwrap();
    let mut inputs = plan.inputs.clone();
    inputs.calibration.gap_offset_ev = first.gap_offset_ev;
    inputs.calibration.strain_shift_ev = first.strain_shift_ev;
    let again = calibrate(&tpespec::config::plan_from_inputs(inputs, "again").unwrap()).unwrap();
    assert!((again.gap_offset_ev - first.gap_offset_ev).abs() < 1e-6);
    assert!((again.strain_shift_ev - first.strain_shift_ev).abs() < 1e-6);
    // the shipped frozen file holds these constants
    let shipped = parse_preset("fig1a").unwrap().inputs.calibration;
    assert!((shipped.gap_offset_ev - first.gap_offset_ev).abs() < 1e-6);
    assert!((shipped.strain_shift_ev - first.strain_shift_ev).abs() < 1e-6);
}

#[test]
fn calibration_file_resolves_next_to_config() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "cal.cfg", "[calibration]\ngap_offset_eV = 0.1\n");
    let cfg = MINIMAL.replace("command = spectrum", "command = spectrum\ncalibration = cal.cfg");
    let plan = parse_config(write(tmp.path(), "run.cfg", &cfg)).unwrap();
    assert_eq!(plan.inputs.calibration.gap_offset_ev, 0.1);
    let missing = MINIMAL.replace("command = spectrum", "command = spectrum\ncalibration = nope.cfg");
    match parse_config(write(tmp.path(), "bad.cfg", &missing)) {
        Err(Error::Parse { key, line, .. }) => assert_eq!((key.as_str(), line), ("calibration", 3)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn exit_codes_follow_the_contract() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let ok = write(tmp.path(), "ok.cfg", MINIMAL);
    let status = |args: &[&str]| bin().args(args).status().unwrap().code().unwrap();
    let s = |p: &Path| p.display().to_string();

    assert_eq!(status(&["spectrum", "--config", &s(&ok), "--out", &s(&out)]), 0);
    assert!(out.join("spontaneous.csv").is_file());

    assert_eq!(status(&[]), 1);
    assert_eq!(status(&["spectrum"]), 1);
    assert_eq!(status(&["paint", "--config", &s(&ok)]), 1);
    let bad = write(tmp.path(), "bad.cfg", &MINIMAL.replace("1.2e18", "-1"));
    assert_eq!(status(&["spectrum", "--config", &s(&bad)]), 1);

    let physics = write(
        tmp.path(),
        "phys.cfg",
        &format!("{}\n[stimulation]\nenergies_eV = 1.5\n", MINIMAL.replace("spectrum", "stimulated")),
    );
    assert_eq!(status(&["stimulated", "--config", &s(&physics), "--out", &s(&out)]), 2);

    let blocker = write(tmp.path(), "file", "");
    assert_eq!(status(&["spectrum", "--config", &s(&ok), "--out", &s(&blocker.join("x"))]), 3);
    assert_eq!(status(&["spectrum", "--config", &s(&tmp.path().join("absent.cfg"))]), 3);
}

#[test]
fn output_root_comes_from_environment_unless_overridden() {
    let tmp = tempfile::tempdir().unwrap();
    let code = bin()
        .args(["calibrate", "--preset", "calibrate"])
        .env("TPESPEC_OUT", tmp.path())
        .output()
        .unwrap();
    assert!(code.status.success());
    assert!(tmp.path().join("calibrate").join("calibration.cfg").is_file());
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.cfg",
        "[run]\ncommand = coincidence\nseed = 4\n\n[coincidence]\nn_pulses = 100000\ndelay_lo_us = -50\ndelay_hi_us = 50\n",
    );
    let run_with = |extra: &[&str], dir: &str| {
        let out = tmp.path().join(dir);
        let mut args = vec!["coincidence", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        assert!(bin().args(&args).status().unwrap().success());
        fs::read_to_string(out.join("coincidence.csv")).unwrap()
    };
    let base = run_with(&[], "a");
    assert_eq!(base, run_with(&["--seed", "4"], "b"));
    assert_ne!(base, run_with(&["--seed", "5"], "c"));
    let echo = fs::read_to_string(tmp.path().join("c").join("config.echo.cfg")).unwrap();
    assert!(echo.contains("seed = 5"));
}
