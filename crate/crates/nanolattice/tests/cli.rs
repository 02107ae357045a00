use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nanolattice::{emit_plan, parse_lattice_spec, parse_plan};
use nanolattice_core::compiler::compile_drive_plan;

fn specs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs")
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nanolattice"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const OSCILLATOR: &str = r#"
[[hardware.modes]]
label = "m"
kind = "mechanical"
frequency = 3.0
damping = 0.2
truncation = 14

[lattice]

[simulation]
model = "free"
duration = 4.0
samples = 81
stepper = "adaptive:1e-10,1e-12"

[simulation.initial]
coherent = { m = [0.8, 0.3] }
"#;

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(|x| x.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn ring_plan_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = specs().join("ring4.toml");
    let o = run(&["compile", "--spec", spec_path.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("plan.toml")).unwrap();
    let plan = parse_plan(&text).unwrap();
    let spec = parse_lattice_spec(&std::fs::read_to_string(&spec_path).unwrap()).unwrap();
    let direct = compile_drive_plan(&spec.graph, &spec.hardware, &spec.constraints).unwrap();
    assert_eq!(plan, direct);
    assert_eq!(plan.edges.len(), 4);
    assert_eq!(emit_plan(&plan), text);
    let diag: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("diagnostics.json")).unwrap()).unwrap();
    assert_eq!(diag["pass"], true);
}

#[test]
fn degenerate_modes_exit_with_guard_band_code() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(specs().join("ring4.toml")).unwrap().replacen("frequency = 27.0", "frequency = 20.0", 1);
    let spec = write(dir.path(), "degenerate.toml", &text);
    let o = run(&["compile", "--spec", spec.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(dir.path().join("compile_report.json").exists());
    assert!(!dir.path().join("plan.toml").exists());
}

#[test]
fn parse_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let text = OSCILLATOR.replace("truncation = 14", "truncation = fourteen");
    let spec = write(dir.path(), "bad.toml", &text);
    let o = run(&["compile", "--spec", spec.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("line 7"), "{}", stderr(&o));
}

#[test]
fn missing_initial_state_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = OSCILLATOR.split("[simulation.initial]").next().unwrap().to_string();
    let spec = write(dir.path(), "noinit.toml", &text);
    let o = run(&["simulate", "--spec", spec.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("initial"), "{}", stderr(&o));
}

#[test]
fn free_oscillator_follows_damped_rotation() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "osc.toml", OSCILLATOR);
    let o = run(&["simulate", "--spec", spec.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (header, rows) = csv_rows(&dir.path().join("simulation.csv"));
    assert_eq!(header, ["time", "n@m", "a_re@m", "a_im@m"]);
    assert_eq!(rows.len(), 81);
    let (w, k) = (3.0_f64, 0.2_f64);
    for row in &rows {
        let t = row[0];
        let (re, im) = (0.8 * (w * t).cos() + 0.3 * (w * t).sin(), 0.3 * (w * t).cos() - 0.8 * (w * t).sin());
        let decay = (-k * t).exp();
        assert!((row[2] - re * decay).abs() < 1e-7, "t={t}");
        assert!((row[3] - im * decay).abs() < 1e-7, "t={t}");
        assert!((row[1] - 0.73 * decay * decay).abs() < 1e-7, "t={t}");
    }
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("simulation.json")).unwrap()).unwrap();
    let cols = json["columns"].as_array().unwrap();
    assert_eq!(cols.len(), 4);
    assert_eq!(cols[0]["name"], "time");
}

#[test]
fn zero_duration_gives_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "osc.toml", &OSCILLATOR.replace("duration = 4.0", "duration = 0.0"));
    let o = run(&["simulate", "--spec", spec.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (_, rows) = csv_rows(&dir.path().join("simulation.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], 0.0);
}

#[test]
fn dimension_cap_exits_with_resource_code() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "osc.toml", &OSCILLATOR.replace("samples = 81", "samples = 81\ndim_cap = 10"));
    let o = run(&["simulate", "--spec", spec.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn dims_override_changes_truncation() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "osc.toml", &OSCILLATOR.replace("duration = 4.0", "duration = 0.0"));
    let o = run(&["simulate", "--spec", spec.to_str().unwrap(), "--dims", "m=4"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).starts_with("dim 4,"), "{}", stdout(&o));
    let o = run(&["simulate", "--spec", spec.to_str().unwrap(), "--dims", "q=4"], dir.path());
    assert_eq!(code(&o), 1);
}

#[test]
fn random_initial_state_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(specs().join("ring4.toml"))
        .unwrap()
        .replace("duration = 20000.0", "duration = 1000.0")
        .replace("samples = 101", "samples = 5")
        .replace("fock = { m1 = 1 }", "random = true");
    let spec = write(dir.path(), "rand.toml", &text);
    let mut outputs = Vec::new();
    for seed in ["7", "7", "8"] {
        let out = dir.path().join(format!("seed{}", outputs.len()));
        let o = run(&["simulate", "--spec", spec.to_str().unwrap(), "--seed", seed], &out);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        outputs.push(std::fs::read_to_string(out.join("simulation.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_ne!(outputs[0], outputs[2]);
}

#[test]
fn driven_model_accepts_a_plan_file() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(specs().join("dimer.toml"))
        .unwrap()
        .replace("model = \"lattice\"", "model = \"driven\"")
        .replace("duration = 2000.0", "duration = 0.0");
    let spec = write(dir.path(), "driven.toml", &text);
    let o = run(&["compile", "--spec", spec.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let plan = dir.path().join("plan.toml");
    let o = run(&["simulate", "--spec", spec.to_str().unwrap(), "--plan", plan.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (header, rows) = csv_rows(&dir.path().join("simulation.csv"));
    assert_eq!(rows.len(), 1);
    assert!(header.contains(&"n@m1".to_string()));
    assert_eq!(rows[0][1], 1.0);
}

#[test]
fn large_epsilon_kerr_warns_and_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "kerr", "--set", "epsilon=0.5"], dir.path());
    assert_eq!(code(&o), 4);
    assert!(stdout(&o).contains("warning: |epsilon| = 0.5"), "{}", stdout(&o));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("verify_kerr.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], false);
}

#[test]
fn loose_tolerance_file_turns_a_failure_into_a_pass() {
    let dir = tempfile::tempdir().unwrap();
    let tol = write(dir.path(), "tol.toml", "kerr_phase = 0.5\nkerr_dephasing = 0.5\ntop_population = 0.1\n");
    let o = run(&["verify", "kerr", "--set", "epsilon=0.5", "--tol-file", tol.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let bad = write(dir.path(), "bad.toml", "kerr_phse = 0.5\n");
    let o = run(&["verify", "kerr", "--tol-file", bad.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 1);
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["verify", "nope"], dir.path())), 1);
    assert_eq!(code(&run(&["verify", "hop", "--set", "foo=1"], dir.path())), 1);
    assert_eq!(code(&run(&["sweep", "hop", "--grid", "0.01"], dir.path())), 1);
    assert_eq!(code(&run(&["sweep", "kerr-scaling", "--grid", "0.1,0.2,0.3"], dir.path())), 1);
    assert_eq!(code(&run(&["frobnicate"], dir.path())), 1);
    assert_eq!(code(&run(&["--help"], dir.path())), 0);
    assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn sweep_output_is_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut csvs = Vec::new();
    for w in ["1", "3"] {
        let out = dir.path().join(w);
        let o = run(&["sweep", "hop", "--grid", "0.04,0.02,0.01", "--workers", w], &out);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        csvs.push(std::fs::read_to_string(out.join("sweep_hop.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    assert_eq!(csvs[0].lines().count(), 4);
}

#[test]
fn output_directory_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_nanolattice"))
        .args(["verify", "perturbative"])
        .env("NANOLATTICE_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(dir.path().join("verify_perturbative.json").exists());
}
