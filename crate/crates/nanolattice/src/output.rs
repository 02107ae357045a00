//! CSV and JSON writers and plain-text tables.
//!
//! Time-series columns are `time` followed by `<observable>@<mode-label>`;
//! the JSON form lists the same columns in the same order.

use std::fmt::Write as _;
use std::path::Path;

use nanolattice_core::compiler::{DrivePlan, ValidationReport};
use nanolattice_core::dynamics::{Diagnostics, SimulationResult};
use nanolattice_core::verify::{Bound, ScalingTable, VerificationReport};
use serde_json::{json, Value};

use crate::error::{AppError, AppResult};

fn write_file(path: &Path, contents: &str) -> AppResult<()> {
    std::fs::write(path, contents).map_err(|e| AppError::io(path, e))
}

pub fn simulation_csv(r: &SimulationResult) -> AppResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = std::iter::once("time").chain(r.names.iter().map(String::as_str));
    w.write_record(header).map_err(csv_err)?;
    for (t, row) in r.times.iter().zip(&r.values) {
        let fields = std::iter::once(*t).chain(row.iter().copied()).map(|x| format!("{x:.16e}"));
        w.write_record(fields).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| AppError::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn csv_err(e: csv::Error) -> AppError {
    AppError::Usage(format!("csv: {e}"))
}

pub fn diagnostics_json(d: &Diagnostics) -> Value {
    json!({
        "max_trace_drift": d.max_trace_drift,
        "min_eigenvalue": d.min_eigenvalue,
        "max_hermitian_defect": d.max_hermitian_defect,
        "max_top_population": d.max_top_population,
        "truncation_violation": d.truncation_violation,
        "steps": d.steps,
        "rejected_steps": d.rejected_steps,
        "warnings": d.warnings,
    })
}

pub fn simulation_json(r: &SimulationResult) -> Value {
    let mut series = vec![json!({ "name": "time", "values": r.times })];
    for (k, name) in r.names.iter().enumerate() {
        let values: Vec<f64> = r.values.iter().map(|row| row[k]).collect();
        series.push(json!({ "name": name, "values": values }));
    }
    json!({ "columns": series, "diagnostics": diagnostics_json(&r.diagnostics) })
}

/// Writes `simulation.csv` and `simulation.json` into `dir`.
pub fn write_simulation(dir: &Path, r: &SimulationResult) -> AppResult<()> {
    write_file(&dir.join("simulation.csv"), &simulation_csv(r)?)?;
    let text = serde_json::to_string_pretty(&simulation_json(r)).expect("json values serialize");
    write_file(&dir.join("simulation.json"), &text)
}

pub fn report_json(r: &VerificationReport) -> Value {
    let metrics: Vec<Value> = r
        .metrics
        .iter()
        .map(|m| {
            json!({
                "name": m.name,
                "value": m.value,
                "limit": m.limit,
                "bound": match m.bound { Bound::AtMost => "at_most", Bound::AtLeast => "at_least" },
                "pass": m.pass,
            })
        })
        .collect();
    let regime: Vec<Value> = r.regime.iter().map(|(k, v)| json!({ "name": k, "value": v })).collect();
    json!({
        "name": r.name,
        "pass": r.pass,
        "metrics": metrics,
        "regime": regime,
        "warnings": r.warnings,
        "times": r.times,
        "trace_distance": r.trace_distance,
    })
}

pub fn write_report(dir: &Path, r: &VerificationReport) -> AppResult<()> {
    let text = serde_json::to_string_pretty(&report_json(r)).expect("json values serialize");
    write_file(&dir.join(format!("verify_{}.json", r.name)), &text)
}

pub fn validation_json(v: &ValidationReport) -> Value {
    let budgets: Vec<Value> = v
        .budgets
        .iter()
        .map(|b| {
            json!({
                "element": b.element,
                "rate": b.rate,
                "parasitic": b.parasitic,
                "quality": b.quality,
                "min_quality": b.min_quality,
                "adiabaticity": b.adiabaticity,
                "adiabaticity_max": b.adiabaticity_max,
                "pass": b.pass,
            })
        })
        .collect();
    let triples: Vec<Value> = v
        .guard
        .triples
        .iter()
        .map(|t| json!({ "mechanical": t.mechanical, "auxiliary": t.auxiliary, "tone": t.tone, "detuning": t.detuning }))
        .collect();
    json!({
        "pass": v.pass,
        "resonance_exact": v.resonance_exact,
        "guard_band": {
            "threshold": v.guard.threshold,
            "min_detuning": v.guard.min_detuning,
            "pass": v.guard.pass,
            "triples": triples,
        },
        "budgets": budgets,
    })
}

pub fn write_json(path: &Path, v: &Value) -> AppResult<()> {
    write_file(path, &serde_json::to_string_pretty(v).expect("json values serialize"))
}

pub fn write_text(path: &Path, text: &str) -> AppResult<()> {
    write_file(path, text)
}

/// Human-readable plan summary.
pub fn plan_table(plan: &DrivePlan, v: &ValidationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<4} {:<10} {:>22} {:>22} {:>22}", "tone", "target", "frequency", "|amplitude|", "phase");
    for (k, t) in plan.tones.iter().enumerate() {
        let _ = writeln!(
            out,
            "{:<4} {:<10} {:>22.12e} {:>22.12e} {:>22.12e}",
            k,
            t.target,
            t.frequency,
            t.amplitude.norm(),
            t.amplitude.arg()
        );
    }
    for e in &plan.edges {
        let _ = writeln!(
            out,
            "edge {}-{} via {}: detuning {:e}, hopping {:e}, damping {:e}",
            e.nodes.0, e.nodes.1, e.auxiliary, e.detuning, e.hopping, e.damping
        );
    }
    for s in &plan.sites {
        let _ = writeln!(
            out,
            "site {} via {}: epsilon {:e}, alpha {:e}, kerr {:e}, dephasing {:e}",
            s.node, s.pair, s.epsilon, s.alpha, s.kerr, s.dephasing
        );
    }
    let _ = writeln!(
        out,
        "guard band {:e}: min spurious detuning {:e} ({})",
        v.guard.threshold,
        v.guard.min_detuning,
        if v.guard.pass { "ok" } else { "VIOLATED" }
    );
    for b in &v.budgets {
        let _ = writeln!(
            out,
            "{}: quality {:e} (min {:e}), adiabaticity {:e} (max {:e}) {}",
            b.element,
            b.quality,
            b.min_quality,
            b.adiabaticity,
            b.adiabaticity_max,
            if b.pass { "ok" } else { "FAIL" }
        );
    }
    out
}

/// One line per metric plus a verdict.
pub fn report_table(r: &VerificationReport) -> String {
    let mut out = format!("[{}] {}\n", r.name, if r.pass { "PASS" } else { "FAIL" });
    for m in &r.metrics {
        let op = match m.bound {
            Bound::AtMost => "<=",
            Bound::AtLeast => ">=",
        };
        let _ = writeln!(out, "  {:<32} {:>13.5e} {op} {:<11.4e} {}", m.name, m.value, m.limit, if m.pass { "ok" } else { "FAIL" });
    }
    for w in &r.warnings {
        let _ = writeln!(out, "  warning: {w}");
    }
    out
}

/// Sweep table: one row per grid point, in grid order.
pub fn sweep_csv(table: &ScalingTable, grid: &[f64]) -> AppResult<String> {
    let names: Vec<String> = table.rows.first().map(|r| r.report.metrics.iter().map(|m| m.name.clone()).collect()).unwrap_or_default();
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = ["parameter", "max_trace_distance", "pass"].into_iter().map(String::from).chain(names.iter().cloned());
    w.write_record(header).map_err(csv_err)?;
    for x in grid {
        let Some(row) = table.rows.iter().find(|r| r.parameter.to_bits() == x.to_bits()) else { continue };
        let mut fields = vec![format!("{:.16e}", row.parameter), format!("{:.16e}", row.max_trace_distance), row.report.pass.to_string()];
        for n in &names {
            fields.push(row.report.metric(n).map_or(String::new(), |m| format!("{:.16e}", m.value)));
        }
        w.write_record(fields).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| AppError::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
