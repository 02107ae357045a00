//! Lattice spec documents (TOML): hardware registry, target lattice,
//! compiler constraints and an optional simulation section.
//!
//! The schema is documented in `docs/lattice-format.md`.

use std::collections::{BTreeMap, BTreeSet};

use nanolattice_core::compiler::{Constraints, Hardware, ModePair, PairCoupling};
use nanolattice_core::dynamics::Stepper;
use nanolattice_core::models::{Coupling, LatticeGraph};
use nanolattice_core::operators::{ModeKind, ModeSpec};
use serde::Deserialize;
use toml::Spanned;

use crate::error::ParseError;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    hardware: RawHardware,
    lattice: RawLattice,
    #[serde(default)]
    constraints: RawConstraints,
    simulation: Option<Spanned<RawSimulation>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHardware {
    modes: Vec<Spanned<RawMode>>,
    #[serde(default)]
    pairs: Vec<Spanned<RawPair>>,
    #[serde(default)]
    g: Vec<Spanned<RawG>>,
    #[serde(default)]
    f: Vec<Spanned<RawF>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMode {
    label: String,
    kind: String,
    frequency: f64,
    #[serde(default)]
    damping: f64,
    truncation: i64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPair {
    label: String,
    members: [String; 2],
    mixing: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawG {
    mechanical: String,
    auxiliary: String,
    rate: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawF {
    mechanical: String,
    pair: String,
    rate: f64,
    modulation: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLattice {
    #[serde(default)]
    nodes: Vec<Spanned<RawNode>>,
    #[serde(default)]
    edges: Vec<Spanned<RawEdge>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    label: String,
    #[serde(default)]
    kerr: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    nodes: [String; 2],
    hopping: f64,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawConstraints {
    guard_band: Option<f64>,
    beta_max: Option<f64>,
    alpha_max: Option<f64>,
    adiabaticity_max: Option<f64>,
    epsilon_max: Option<f64>,
    hop_detuning: Option<f64>,
    site_detuning: Option<f64>,
    max_damping_ratio: Option<f64>,
    min_hop_quality: Option<f64>,
    min_kerr_quality: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSimulation {
    model: String,
    duration: f64,
    samples: usize,
    stepper: Option<String>,
    dim_cap: Option<usize>,
    initial: RawInitial,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    #[serde(default)]
    fock: BTreeMap<String, usize>,
    #[serde(default)]
    coherent: BTreeMap<String, [f64; 2]>,
    #[serde(default)]
    random: bool,
}

/// Which model `simulate` integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelChoice {
    /// Target Bose-Hubbard lattice in the rotating frame.
    Lattice,
    /// Compiled driven model: nodes, edge auxiliaries and site supermodes.
    Driven,
    /// Undriven hardware modes in the lab frame, with their damping.
    Free,
}

impl ModelChoice {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "lattice" => Some(Self::Lattice),
            "driven" => Some(Self::Driven),
            "free" => Some(Self::Free),
            _ => None,
        }
    }
}

/// Product state of Fock and coherent factors (vacuum elsewhere), or a seeded random pure state.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InitialState {
    pub fock: BTreeMap<String, usize>,
    pub coherent: BTreeMap<String, (f64, f64)>,
    pub random: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSpec {
    pub model: ModelChoice,
    pub duration: f64,
    pub samples: usize,
    pub stepper: Stepper,
    pub dim_cap: usize,
    pub initial: InitialState,
}

pub const DEFAULT_DIM_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    pub hardware: Hardware,
    pub graph: LatticeGraph,
    pub constraints: Constraints,
    pub simulation: Option<SimulationSpec>,
}

/// `adaptive`, `adaptive:RTOL,ATOL` or `rk4:DT`.
pub fn parse_stepper(s: &str) -> Result<Stepper, String> {
    let (kind, args) = s.split_once(':').unwrap_or((s, ""));
    let nums = || -> Result<Vec<f64>, String> {
        args.split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| format!("bad number `{x}` in stepper `{s}`")))
            .collect()
    };
    match kind.trim() {
        "adaptive" if args.is_empty() => Ok(Stepper::adaptive()),
        "adaptive" => match nums()?.as_slice() {
            &[rtol, atol] if rtol > 0.0 && atol > 0.0 => Ok(Stepper::Adaptive { rtol, atol, max_steps: 50_000_000 }),
            _ => Err(format!("stepper `{s}`: expected adaptive:RTOL,ATOL with positive tolerances")),
        },
        "rk4" => match nums()?.as_slice() {
            &[dt] if dt > 0.0 => Ok(Stepper::Rk4Fixed { dt }),
            _ => Err(format!("stepper `{s}`: expected rk4:DT with a positive step")),
        },
        _ => Err(format!("unknown stepper `{s}`; use adaptive, adaptive:RTOL,ATOL or rk4:DT")),
    }
}

fn err<T>(text: &str, span: &std::ops::Range<usize>, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError::at(text, span.start, msg))
}

/// Parses and validates a lattice spec document.
pub fn parse_lattice_spec(text: &str) -> Result<LatticeSpec, ParseError> {
    let raw: RawSpec = toml::from_str(text).map_err(|e| ParseError::from_toml(text, &e))?;

    let mut hw = Hardware::default();
    for m in &raw.hardware.modes {
        let span = m.span();
        let m = m.get_ref();
        let Some(kind) = ModeKind::parse(&m.kind) else {
            return err(text, &span, format!("mode `{}`: unknown kind `{}`", m.label, m.kind));
        };
        if m.truncation < 2 {
            return err(text, &span, format!("mode `{}`: truncation must be at least 2, got {}", m.label, m.truncation));
        }
        if hw.modes.iter().any(|x| x.label == m.label) {
            return err(text, &span, format!("duplicate mode label `{}`", m.label));
        }
        let spec = ModeSpec::new(m.label.as_str(), kind, m.frequency, m.damping, m.truncation as usize)
            .or_else(|e| err(text, &span, e.to_string()))?;
        hw.modes.push(spec);
    }
    let known = |label: &str| hw.modes.iter().any(|m| m.label == label);
    for p in &raw.hardware.pairs {
        let span = p.span();
        let p = p.get_ref();
        for m in &p.members {
            if !known(m) {
                return err(text, &span, format!("pair `{}`: unknown member `{m}`", p.label));
            }
        }
        hw.pairs.push(ModePair {
            label: p.label.clone(),
            members: (p.members[0].clone(), p.members[1].clone()),
            mixing: p.mixing,
        });
    }
    for g in &raw.hardware.g {
        let span = g.span();
        let g = g.get_ref();
        for l in [&g.mechanical, &g.auxiliary] {
            if !known(l) {
                return err(text, &span, format!("g coupling: unknown mode `{l}`"));
            }
        }
        hw.g.push(Coupling::new(&g.mechanical, &g.auxiliary, g.rate));
    }
    for f in &raw.hardware.f {
        let span = f.span();
        let f = f.get_ref();
        if !known(&f.mechanical) {
            return err(text, &span, format!("f coupling: unknown mode `{}`", f.mechanical));
        }
        if !raw.hardware.pairs.iter().any(|p| p.get_ref().label == f.pair) {
            return err(text, &span, format!("f coupling: unknown pair `{}`", f.pair));
        }
        hw.f.push(PairCoupling { mechanical: f.mechanical.clone(), pair: f.pair.clone(), rate: f.rate, modulation: f.modulation });
    }
    hw.validate().map_err(|e| ParseError::new(format!("hardware: {e}")))?;

    let mut nodes = Vec::new();
    for n in &raw.lattice.nodes {
        let span = n.span();
        let n = n.get_ref();
        match hw.mode(&n.label) {
            Ok(m) if m.kind == ModeKind::Mechanical => {}
            Ok(_) => return err(text, &span, format!("node `{}` is not a mechanical mode", n.label)),
            Err(_) => return err(text, &span, format!("node `{}` is not a hardware mode", n.label)),
        }
        if nodes.iter().any(|(l, _): &(String, f64)| l == &n.label) {
            return err(text, &span, format!("duplicate node `{}`", n.label));
        }
        nodes.push((n.label.clone(), n.kerr));
    }
    let mut edges = Vec::new();
    let mut seen = BTreeSet::new();
    for e in &raw.lattice.edges {
        let span = e.span();
        let e = e.get_ref();
        let [a, b] = &e.nodes;
        for l in [a, b] {
            if !nodes.iter().any(|(n, _)| n == l) {
                return err(text, &span, format!("edge {a}-{b}: unknown node `{l}`"));
            }
        }
        let key = if a <= b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
        if !seen.insert(key) {
            return err(text, &span, format!("duplicate edge {a}-{b}"));
        }
        edges.push(((a.clone(), b.clone()), e.hopping));
    }
    let graph = LatticeGraph::new(nodes, edges).map_err(|e| ParseError::new(format!("lattice: {e}")))?;

    let d = Constraints::default();
    let c = &raw.constraints;
    let constraints = Constraints {
        guard_band: c.guard_band,
        beta_max: c.beta_max.unwrap_or(d.beta_max),
        alpha_max: c.alpha_max.unwrap_or(d.alpha_max),
        adiabaticity_max: c.adiabaticity_max.unwrap_or(d.adiabaticity_max),
        epsilon_max: c.epsilon_max.unwrap_or(d.epsilon_max),
        hop_detuning: c.hop_detuning,
        site_detuning: c.site_detuning,
        max_damping_ratio: c.max_damping_ratio.unwrap_or(d.max_damping_ratio),
        min_hop_quality: c.min_hop_quality.unwrap_or(d.min_hop_quality),
        min_kerr_quality: c.min_kerr_quality.unwrap_or(d.min_kerr_quality),
    };

    let simulation = match &raw.simulation {
        None => None,
        Some(s) => {
            let span = s.span();
            let s = s.get_ref();
            let Some(model) = ModelChoice::parse(&s.model) else {
                return err(text, &span, format!("unknown model `{}`; use lattice, driven or free", s.model));
            };
            if !(s.duration >= 0.0) || !s.duration.is_finite() {
                return err(text, &span, format!("duration must be finite and non-negative, got {}", s.duration));
            }
            if s.duration > 0.0 && s.samples < 2 {
                return err(text, &span, format!("a positive duration needs at least 2 samples, got {}", s.samples));
            }
            let stepper = match &s.stepper {
                None => Stepper::adaptive(),
                Some(x) => parse_stepper(x).or_else(|m| err(text, &span, m))?,
            };
            let i = &s.initial;
            if i.random && !(i.fock.is_empty() && i.coherent.is_empty()) {
                return err(text, &span, "a random initial state cannot be combined with fock or coherent factors");
            }
            if let Some(l) = i.fock.keys().find(|l| i.coherent.contains_key(*l)) {
                return err(text, &span, format!("mode `{l}` has both a fock and a coherent initial factor"));
            }
            Some(SimulationSpec {
                model,
                duration: s.duration,
                samples: s.samples,
                stepper,
                dim_cap: s.dim_cap.unwrap_or(DEFAULT_DIM_CAP),
                initial: InitialState {
                    fock: i.fock.clone(),
                    coherent: i.coherent.iter().map(|(k, v)| (k.clone(), (v[0], v[1]))).collect(),
                    random: i.random,
                },
            })
        }
    };

    Ok(LatticeSpec { hardware: hw, graph, constraints, simulation })
}
