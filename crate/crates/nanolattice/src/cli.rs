//! `nanolattice compile | simulate | verify | sweep`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use nalgebra::DVector;
use nanolattice_core::compiler::{compile_drive_plan, validate_plan, DrivePlan};
use nanolattice_core::dynamics::{default_observables, integrate, linspace, DensityMatrix, IntegrateOptions, Stepper};
use nanolattice_core::models::{build_bose_hubbard, damping_dissipators, free_terms, EffectiveParams, MasterEquationModel};
use nanolattice_core::operators::{CompositeSpace, ModeKind};
use nanolattice_core::verify::{
    verify_bose_hubbard_composite, verify_hop_scenario, verify_kerr_scaling, verify_kerr_scenario, verify_perturbative,
    CompositeModels, CompositeScenario, HopScenario, KerrScenario, ScalingParameter, Tolerances, VerificationReport,
};
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::json;

use crate::error::{AppError, AppResult, ParseError};
use crate::lattice::{parse_lattice_spec, parse_stepper, InitialState, LatticeSpec, ModelChoice};
use crate::output;
use crate::plan::{emit_plan, parse_plan};
use crate::sweep::{parse_grid, run_sweep};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "NANOLATTICE_OUT";
const DEFAULT_OUT: &str = "nanolattice-out";

pub const SCENARIOS: [&str; 5] = ["hop", "kerr", "kerr-scaling", "perturbative", "composite"];

#[derive(Debug, Parser)]
#[command(name = "nanolattice", version, about = "Compile, simulate and verify driven boson lattices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output directory (default: $NANOLATTICE_OUT, else ./nanolattice-out).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Truncation overrides, `label=dim,label=dim`.
    #[arg(long, global = true)]
    pub dims: Option<String>,
    /// `adaptive`, `adaptive:RTOL,ATOL` or `rk4:DT`.
    #[arg(long, global = true)]
    pub stepper: Option<String>,
    /// TOML file overriding verification tolerances.
    #[arg(long = "tol-file", global = true)]
    pub tol_file: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,
    /// Seed for random initial states.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile a lattice spec into a drive plan.
    Compile {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Integrate the model selected by the spec's [simulation] section.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        /// Use this plan instead of compiling the spec (driven model only).
        #[arg(long)]
        plan: Option<PathBuf>,
    },
    /// Run a verification scenario, or `all`.
    Verify {
        scenario: String,
        /// Scenario parameter override, `key=value`; repeatable.
        #[arg(long = "set")]
        set: Vec<String>,
    },
    /// Run a scenario over a grid of its small parameter.
    Sweep {
        /// `kerr` (grid of ε) or `hop` (grid of adiabaticity).
        scenario: String,
        #[arg(long)]
        grid: String,
    },
}

/// Parses arguments, runs, prints errors; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> AppResult<()> {
    let out = out_dir(cli.out.as_deref());
    match &cli.command {
        Command::Compile { spec } => cmd_compile(spec, &out).map(|_| ()),
        Command::Simulate { spec, plan } => cmd_simulate(cli, spec, plan.as_deref(), &out),
        Command::Verify { scenario, set } => cmd_verify(cli, scenario, set, &out),
        Command::Sweep { scenario, grid } => cmd_sweep(cli, scenario, grid, &out),
    }
}

fn out_dir(flag: Option<&Path>) -> PathBuf {
    match flag {
        Some(p) => p.to_path_buf(),
        None => std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
    }
}

fn ensure_dir(dir: &Path) -> AppResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))
}

fn read(path: &Path) -> AppResult<String> {
    std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))
}

pub fn load_spec(path: &Path) -> AppResult<LatticeSpec> {
    parse_lattice_spec(&read(path)?).map_err(|source| AppError::Parse { path: path.into(), source })
}

/// Writes `plan.toml` and `diagnostics.json`; an infeasible target writes
/// `compile_report.json` and fails with exit code 2.
pub fn cmd_compile(spec_path: &Path, out: &Path) -> AppResult<DrivePlan> {
    let spec = load_spec(spec_path)?;
    ensure_dir(out)?;
    let plan = match compile_drive_plan(&spec.graph, &spec.hardware, &spec.constraints) {
        Ok(p) => p,
        Err(e) => {
            output::write_json(&out.join("compile_report.json"), &json!({ "feasible": false, "error": e.to_string() }))?;
            return Err(e.into());
        }
    };
    let report = validate_plan(&plan, &spec.hardware, &spec.constraints)?;
    output::write_text(&out.join("plan.toml"), &emit_plan(&plan))?;
    let mut diag = output::validation_json(&report);
    diag["feasible"] = json!(true);
    output::write_json(&out.join("diagnostics.json"), &diag)?;
    print!("{}", output::plan_table(&plan, &report));
    Ok(plan)
}

fn apply_dims(spec: &mut LatticeSpec, dims: &str) -> AppResult<()> {
    for item in dims.split(',').filter(|s| !s.trim().is_empty()) {
        let (label, d) = item
            .split_once('=')
            .ok_or_else(|| AppError::Usage(format!("--dims entry `{item}` is not label=dim")))?;
        let d: usize = d.trim().parse().map_err(|_| AppError::Usage(format!("--dims entry `{item}`: bad dimension")))?;
        if d < 2 {
            return Err(AppError::Usage(format!("--dims entry `{item}`: dimension must be at least 2")));
        }
        let mode = spec
            .hardware
            .modes
            .iter_mut()
            .find(|m| m.label == label.trim())
            .ok_or_else(|| AppError::Usage(format!("--dims: unknown mode `{}`", label.trim())))?;
        mode.truncation_dim = d;
    }
    Ok(())
}

fn check_cap(space: &CompositeSpace, cap: usize) -> AppResult<()> {
    if space.total_dim() > cap {
        return Err(nanolattice_core::Error::ResourceCap { dim: space.total_dim(), cap }.into());
    }
    Ok(())
}

/// Normalized truncated coherent state `e^{-|α|²/2} Σ αⁿ/√n! |n⟩`.
fn coherent_amplitudes(alpha: Complex64, dim: usize) -> Vec<Complex64> {
    let mut amps = Vec::with_capacity(dim);
    let mut c = Complex64::new(1.0, 0.0);
    for n in 0..dim {
        if n > 0 {
            c = c * alpha / (n as f64).sqrt();
        }
        amps.push(c);
    }
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amps.into_iter().map(|a| a / norm).collect()
}

pub fn initial_state(space: &CompositeSpace, init: &InitialState, seed: u64) -> AppResult<DensityMatrix> {
    let n = space.total_dim();
    if init.random {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut psi = DVector::from_fn(n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let norm = psi.norm();
        psi /= Complex64::new(norm, 0.0);
        return Ok(DensityMatrix::pure(&psi)?);
    }
    for l in init.fock.keys().chain(init.coherent.keys()) {
        if space.slot_of(l).is_err() {
            let names: Vec<&str> = space.modes().iter().map(|m| m.label.as_str()).collect();
            return Err(AppError::Usage(format!("initial state names unknown mode `{l}`; modes are {}", names.join(", "))));
        }
    }
    let mut factors: Vec<Vec<Complex64>> = Vec::new();
    for m in space.modes() {
        let d = m.truncation_dim;
        let mut f = vec![Complex64::new(0.0, 0.0); d];
        if let Some(&k) = init.fock.get(&m.label) {
            if k >= d {
                return Err(AppError::Usage(format!("fock state {k} of `{}` exceeds its truncation {d}", m.label)));
            }
            f[k] = Complex64::new(1.0, 0.0);
        } else if let Some(&(re, im)) = init.coherent.get(&m.label) {
            f = coherent_amplitudes(Complex64::new(re, im), d);
        } else {
            f[0] = Complex64::new(1.0, 0.0);
        }
        factors.push(f);
    }
    let psi = DVector::from_fn(n, |i, _| {
        space.occupations(i).iter().zip(&factors).map(|(&k, f)| f[k]).product::<Complex64>()
    });
    Ok(DensityMatrix::pure(&psi)?)
}

fn simulation_model(spec: &LatticeSpec, model: ModelChoice, plan: Option<&Path>, cap: usize) -> AppResult<MasterEquationModel> {
    let hw = &spec.hardware;
    match model {
        ModelChoice::Lattice => {
            let dims: Vec<usize> =
                spec.graph.nodes.iter().map(|(l, _)| hw.mode(l).map(|m| m.truncation_dim)).collect::<Result<_, _>>()?;
            let total: usize = dims.iter().product();
            if total > cap {
                return Err(nanolattice_core::Error::ResourceCap { dim: total, cap }.into());
            }
            Ok(build_bose_hubbard(&spec.graph, &dims)?)
        }
        ModelChoice::Driven => {
            let plan = match plan {
                Some(p) => parse_plan(&read(p)?).map_err(|source| AppError::Parse { path: p.into(), source })?,
                None => compile_drive_plan(&spec.graph, hw, &spec.constraints)?,
            };
            Ok(CompositeModels::build(&spec.graph, hw, &plan, cap)?.full)
        }
        ModelChoice::Free => {
            let modes = hw.modes.iter().filter(|m| m.kind != ModeKind::AuxiliaryPairMember).cloned().collect();
            let space = CompositeSpace::new(modes)?;
            check_cap(&space, cap)?;
            Ok(MasterEquationModel::new(free_terms(&space)?, damping_dissipators(&space)?)?)
        }
    }
}

pub fn cmd_simulate(cli: &Cli, spec_path: &Path, plan: Option<&Path>, out: &Path) -> AppResult<()> {
    let mut spec = load_spec(spec_path)?;
    if let Some(d) = &cli.dims {
        apply_dims(&mut spec, d)?;
    }
    let Some(sim) = spec.simulation.clone() else {
        return Err(AppError::Parse {
            path: spec_path.into(),
            source: ParseError::new("missing [simulation] section"),
        });
    };
    let stepper = match &cli.stepper {
        Some(s) => parse_stepper(s).map_err(AppError::Usage)?,
        None => sim.stepper,
    };
    let model = simulation_model(&spec, sim.model, plan, sim.dim_cap)?;
    let rho0 = initial_state(&model.space, &sim.initial, cli.seed)?;
    let times = if sim.duration == 0.0 { vec![0.0] } else { linspace(0.0, sim.duration, sim.samples - 1) };
    let opts = IntegrateOptions::new(stepper).with_observables(default_observables(&model.space)?);
    let result = integrate(&model, &rho0, &times, &opts)?;
    ensure_dir(out)?;
    output::write_simulation(out, &result)?;
    let d = &result.diagnostics;
    println!(
        "dim {}, {} samples, {} steps ({} rejected); trace drift {:.3e}, min eigenvalue {:.3e}, top Fock population {:.3e}",
        model.dim(),
        result.times.len(),
        d.steps,
        d.rejected_steps,
        d.max_trace_drift,
        d.min_eigenvalue,
        d.max_top_population
    );
    for w in &d.warnings {
        println!("warning: {w}");
    }
    Ok(())
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    hop_rate: Option<f64>,
    hop_distance: Option<f64>,
    hop_closed_distance: Option<f64>,
    kerr_phase: Option<f64>,
    kerr_dephasing: Option<f64>,
    composite_frequency: Option<f64>,
    composite_distance: Option<f64>,
    scaling_ratio: Option<f64>,
    monotone_margin: Option<f64>,
    fit_self_test: Option<f64>,
    trace_drift: Option<f64>,
    min_eigenvalue: Option<f64>,
    top_population: Option<f64>,
}

/// Tolerances with the fields present in the TOML text replaced.
pub fn parse_tolerances(text: &str) -> Result<Tolerances, ParseError> {
    let r: RawTolerances = toml::from_str(text).map_err(|e| ParseError::from_toml(text, &e))?;
    let d = Tolerances::default();
    Ok(Tolerances {
        hop_rate: r.hop_rate.unwrap_or(d.hop_rate),
        hop_distance: r.hop_distance.unwrap_or(d.hop_distance),
        hop_closed_distance: r.hop_closed_distance.unwrap_or(d.hop_closed_distance),
        kerr_phase: r.kerr_phase.unwrap_or(d.kerr_phase),
        kerr_dephasing: r.kerr_dephasing.unwrap_or(d.kerr_dephasing),
        composite_frequency: r.composite_frequency.unwrap_or(d.composite_frequency),
        composite_distance: r.composite_distance.unwrap_or(d.composite_distance),
        scaling_ratio: r.scaling_ratio.unwrap_or(d.scaling_ratio),
        monotone_margin: r.monotone_margin.unwrap_or(d.monotone_margin),
        fit_self_test: r.fit_self_test.unwrap_or(d.fit_self_test),
        trace_drift: r.trace_drift.unwrap_or(d.trace_drift),
        min_eigenvalue: r.min_eigenvalue.unwrap_or(d.min_eigenvalue),
        top_population: r.top_population.unwrap_or(d.top_population),
    })
}

fn tolerances(cli: &Cli) -> AppResult<Tolerances> {
    match &cli.tol_file {
        None => Ok(Tolerances::default()),
        Some(p) => parse_tolerances(&read(p)?).map_err(|source| AppError::Parse { path: p.clone(), source }),
    }
}

fn parse_sets(sets: &[String]) -> AppResult<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for s in sets {
        let (k, v) = s.split_once('=').ok_or_else(|| AppError::Usage(format!("--set `{s}` is not key=value")))?;
        let v: f64 = v.trim().parse().map_err(|_| AppError::Usage(format!("--set `{s}`: bad number")))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}

fn take(sets: &mut BTreeMap<String, f64>, key: &str) -> Option<f64> {
    sets.remove(key)
}

fn reject_rest(scenario: &str, sets: &BTreeMap<String, f64>, allowed: &[&str]) -> AppResult<()> {
    match sets.keys().next() {
        None => Ok(()),
        Some(k) => Err(AppError::Usage(format!(
            "scenario `{scenario}` has no parameter `{k}`; available: {}",
            allowed.join(", ")
        ))),
    }
}

fn kerr_scenario(sets: &mut BTreeMap<String, f64>, stepper: Option<Stepper>) -> KerrScenario {
    let mut s = KerrScenario::at_epsilon(take(sets, "epsilon").unwrap_or(0.1));
    if let Some(a) = take(sets, "alpha") {
        s.params.alpha = a;
    }
    if let Some(o) = take(sets, "omega") {
        s.params.omega_big = o;
    }
    if let Some(k) = take(sets, "kappa") {
        s.params.kappa = k;
    }
    if let Some(n) = take(sets, "samples") {
        s.samples = n as usize;
    }
    if let Some(st) = stepper {
        s.stepper = st;
    }
    s
}

/// One named scenario with `key=value` overrides.
pub fn run_scenario(name: &str, sets: &[String], stepper: Option<Stepper>, tol: &Tolerances) -> AppResult<VerificationReport> {
    let mut sets = parse_sets(sets)?;
    let report = match name {
        "hop" => {
            let mut s = HopScenario::at_adiabaticity(
                take(&mut sets, "adiabaticity").unwrap_or(0.01),
                take(&mut sets, "delta_omega").unwrap_or(1.0),
                take(&mut sets, "kappa").unwrap_or(1.0),
            );
            if let Some(p) = take(&mut sets, "periods") {
                s.periods = p;
            }
            if let Some(st) = stepper {
                s.stepper = st;
            }
            reject_rest(name, &sets, &["adiabaticity", "delta_omega", "kappa", "periods"])?;
            verify_hop_scenario(&s, tol)?
        }
        "kerr" | "kerr-scaling" => {
            let s = kerr_scenario(&mut sets, stepper);
            reject_rest(name, &sets, &["epsilon", "alpha", "omega", "kappa", "samples"])?;
            if name == "kerr" {
                verify_kerr_scenario(&s, tol)?
            } else {
                verify_kerr_scaling(&s, tol)?
            }
        }
        "perturbative" => {
            let eps = take(&mut sets, "epsilon").unwrap_or(0.2);
            reject_rest(name, &sets, &["epsilon"])?;
            let p = EffectiveParams { omega_big: 2.0, ..Default::default() }.with_qubit(1.0, 1.0 / eps);
            verify_perturbative(&p, tol)?
        }
        "composite" => {
            let mut s = CompositeScenario::default();
            if let Some(d) = take(&mut sets, "delta") {
                s.delta = d;
            }
            if let Some(a) = take(&mut sets, "alpha_c") {
                s.alpha_c = a;
            }
            if let Some(m) = take(&mut sets, "mech_dim") {
                s.mech_dim = m as usize;
            }
            reject_rest(name, &sets, &["delta", "alpha_c", "mech_dim"])?;
            verify_bose_hubbard_composite(&s, tol)?
        }
        _ => {
            return Err(AppError::Usage(format!("unknown scenario `{name}`; available: {}, all", SCENARIOS.join(", "))));
        }
    };
    Ok(report)
}

pub fn cmd_verify(cli: &Cli, scenario: &str, sets: &[String], out: &Path) -> AppResult<()> {
    let tol = tolerances(cli)?;
    let stepper = cli.stepper.as_deref().map(parse_stepper).transpose().map_err(AppError::Usage)?;
    let names: Vec<&str> = if scenario == "all" {
        if !sets.is_empty() {
            return Err(AppError::Usage("--set applies to a single scenario, not `all`".into()));
        }
        SCENARIOS.to_vec()
    } else {
        vec![scenario]
    };
    if let Some(n) = names.iter().find(|n| !SCENARIOS.contains(n)) {
        return Err(AppError::Usage(format!("unknown scenario `{n}`; available: {}, all", SCENARIOS.join(", "))));
    }
    ensure_dir(out)?;
    let mut reports = Vec::new();
    for n in names {
        let r = run_scenario(n, sets, stepper, &tol)?;
        output::write_report(out, &r)?;
        print!("{}", output::report_table(&r));
        reports.push(r);
    }
    if reports.len() > 1 {
        println!("\n{:<16} result", "scenario");
        for r in &reports {
            println!("{:<16} {}", r.name, if r.pass { "PASS" } else { "FAIL" });
        }
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(AppError::Tolerance(format!("tolerance failure in {}", failed.join(", "))))
    }
}

pub fn cmd_sweep(cli: &Cli, scenario: &str, grid: &str, out: &Path) -> AppResult<()> {
    let parameter = match scenario {
        "kerr" => ScalingParameter::Epsilon,
        "hop" => ScalingParameter::HopAdiabaticity,
        _ => return Err(AppError::Usage(format!("unknown sweep `{scenario}`; available: kerr, hop"))),
    };
    let grid = parse_grid(grid)?;
    let tol = tolerances(cli)?;
    let table = run_sweep(parameter, &grid, &tol, cli.workers)?;
    ensure_dir(out)?;
    let csv = output::sweep_csv(&table, &grid)?;
    output::write_text(&out.join(format!("sweep_{scenario}.csv")), &csv)?;
    print!("{csv}");
    println!("exponent {:.4}, monotone {}", table.exponent, table.monotone);
    Ok(())
}
