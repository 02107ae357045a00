//! Drive-plan files: TOML with every float written to 17 significant digits,
//! so `parse_plan(&emit_plan(p)) == p` holds bit for bit.

use std::fmt::Write as _;

use nanolattice_core::compiler::{DrivePlan, DriveTone, EdgeAssignment, GuardBandReport, SiteAssignment, SpuriousTriple};
use num_complex::Complex64;
use serde::Deserialize;

use crate::error::ParseError;

fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.16e}")
    }
}

fn string(s: &str) -> String {
    toml::Value::String(s.into()).to_string()
}

/// Serializes a plan.
pub fn emit_plan(plan: &DrivePlan) -> String {
    let mut out = String::from("# nanolattice drive plan\n");
    let g = &plan.guard;
    let _ = writeln!(out, "\n[guard]");
    let _ = writeln!(out, "threshold = {}", num(g.threshold));
    let _ = writeln!(out, "min_detuning = {}", num(g.min_detuning));
    let _ = writeln!(out, "pass = {}", g.pass);
    for t in &g.triples {
        let _ = writeln!(out, "\n[[guard.triples]]");
        let _ = writeln!(out, "mechanical = {}", string(&t.mechanical));
        let _ = writeln!(out, "auxiliary = {}", string(&t.auxiliary));
        let _ = writeln!(out, "tone = {}", t.tone);
        let _ = writeln!(out, "detuning = {}", num(t.detuning));
    }
    for t in &plan.tones {
        let _ = writeln!(out, "\n[[tones]]");
        let _ = writeln!(out, "target = {}", string(&t.target));
        let _ = writeln!(out, "frequency = {}", num(t.frequency));
        let _ = writeln!(out, "amplitude = [{}, {}]", num(t.amplitude.re), num(t.amplitude.im));
    }
    for e in &plan.edges {
        let _ = writeln!(out, "\n[[edges]]");
        let _ = writeln!(out, "nodes = [{}, {}]", string(&e.nodes.0), string(&e.nodes.1));
        let _ = writeln!(out, "auxiliary = {}", string(&e.auxiliary));
        let _ = writeln!(out, "detuning = {}", num(e.detuning));
        let _ = writeln!(out, "tones = [{}, {}]", e.tones[0], e.tones[1]);
        let _ = writeln!(out, "tone_detunings = [{}, {}]", num(e.tone_detunings[0]), num(e.tone_detunings[1]));
        let _ = writeln!(out, "coupling = {}", num(e.coupling));
        let _ = writeln!(out, "hopping = {}", num(e.hopping));
        let _ = writeln!(out, "damping = {}", num(e.damping));
    }
    for s in &plan.sites {
        let _ = writeln!(out, "\n[[sites]]");
        let _ = writeln!(out, "node = {}", string(&s.node));
        let _ = writeln!(out, "pair = {}", string(&s.pair));
        let _ = writeln!(out, "mixing = {}", num(s.mixing));
        let _ = writeln!(out, "detuning = {}", num(s.detuning));
        if let Some(m) = s.modulation {
            let _ = writeln!(out, "modulation = {}", num(m));
        }
        let _ = writeln!(out, "epsilon = {}", num(s.epsilon));
        let _ = writeln!(out, "drive_detuning = {}", num(s.drive_detuning));
        let _ = writeln!(out, "alpha = {}", num(s.alpha));
        let _ = writeln!(out, "tone = {}", s.tone);
        let _ = writeln!(out, "kerr = {}", num(s.kerr));
        let _ = writeln!(out, "dephasing = {}", num(s.dephasing));
    }
    out
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlan {
    guard: RawGuard,
    #[serde(default)]
    tones: Vec<RawTone>,
    #[serde(default)]
    edges: Vec<RawEdge>,
    #[serde(default)]
    sites: Vec<RawSite>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGuard {
    threshold: f64,
    min_detuning: f64,
    pass: bool,
    #[serde(default)]
    triples: Vec<RawTriple>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTriple {
    mechanical: String,
    auxiliary: String,
    tone: usize,
    detuning: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTone {
    target: String,
    frequency: f64,
    amplitude: [f64; 2],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    nodes: [String; 2],
    auxiliary: String,
    detuning: f64,
    tones: [usize; 2],
    tone_detunings: [f64; 2],
    coupling: f64,
    hopping: f64,
    damping: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSite {
    node: String,
    pair: String,
    mixing: f64,
    detuning: f64,
    modulation: Option<f64>,
    epsilon: f64,
    drive_detuning: f64,
    alpha: f64,
    tone: usize,
    kerr: f64,
    dephasing: f64,
}

/// Reads a plan written by [`emit_plan`].
pub fn parse_plan(text: &str) -> Result<DrivePlan, ParseError> {
    let raw: RawPlan = toml::from_str(text).map_err(|e| ParseError::from_toml(text, &e))?;
    let tones: Vec<DriveTone> = raw
        .tones
        .into_iter()
        .map(|t| DriveTone::new(&t.target, t.frequency, Complex64::new(t.amplitude[0], t.amplitude[1])))
        .collect();
    let in_range = |k: usize| {
        if k < tones.len() {
            Ok(k)
        } else {
            Err(ParseError::new(format!("tone index {k} out of range ({} tones)", tones.len())))
        }
    };
    let mut edges = Vec::with_capacity(raw.edges.len());
    for e in raw.edges {
        let [a, b] = e.nodes;
        edges.push(EdgeAssignment {
            nodes: (a, b),
            auxiliary: e.auxiliary,
            detuning: e.detuning,
            tones: [in_range(e.tones[0])?, in_range(e.tones[1])?],
            tone_detunings: e.tone_detunings,
            coupling: e.coupling,
            hopping: e.hopping,
            damping: e.damping,
        });
    }
    let mut sites = Vec::with_capacity(raw.sites.len());
    for s in raw.sites {
        sites.push(SiteAssignment {
            node: s.node,
            pair: s.pair,
            mixing: s.mixing,
            detuning: s.detuning,
            modulation: s.modulation,
            epsilon: s.epsilon,
            drive_detuning: s.drive_detuning,
            alpha: s.alpha,
            tone: in_range(s.tone)?,
            kerr: s.kerr,
            dephasing: s.dephasing,
        });
    }
    let guard = GuardBandReport {
        threshold: raw.guard.threshold,
        min_detuning: raw.guard.min_detuning,
        pass: raw.guard.pass,
        triples: raw
            .guard
            .triples
            .into_iter()
            .map(|t| SpuriousTriple { mechanical: t.mechanical, auxiliary: t.auxiliary, tone: t.tone, detuning: t.detuning })
            .collect(),
    };
    Ok(DrivePlan { tones, edges, sites, guard })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_plan_round_trips() {
        let p = DrivePlan::empty();
        let text = emit_plan(&p);
        assert_eq!(parse_plan(&text).unwrap(), p);
    }

    #[test]
    fn awkward_floats_round_trip() {
        let mut p = DrivePlan::empty();
        for x in [0.1, 1.0 / 3.0, -2.5e-300, f64::MIN_POSITIVE, 1e308, std::f64::consts::PI] {
            p.tones.push(DriveTone::new("b\"q", x, Complex64::new(-x, x * x)));
        }
        p.guard.min_detuning = f64::INFINITY;
        let q = parse_plan(&emit_plan(&p)).unwrap();
        for (a, b) in p.tones.iter().zip(&q.tones) {
            assert_eq!(a.frequency.to_bits(), b.frequency.to_bits());
            assert_eq!(a.amplitude.im.to_bits(), b.amplitude.im.to_bits());
        }
        assert_eq!(q, p);
    }

    #[test]
    fn bad_tone_index_rejected() {
        let text = "[guard]\nthreshold = 1.0\nmin_detuning = inf\npass = true\n[[sites]]\nnode = \"a\"\npair = \"p\"\nmixing = 1.0\ndetuning = 1.0\nepsilon = 0.1\ndrive_detuning = 1.0\nalpha = 1.0\ntone = 3\nkerr = 0.0\ndephasing = 0.0\n";
        assert!(parse_plan(text).unwrap_err().message.contains("tone index"));
    }
}
