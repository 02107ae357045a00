//! Drive-plan compilation: map a target lattice onto hardware modes and
//! drive tones, with guard-band and rate-budget diagnostics.
//!
//! Edge tones use the red-sideband resonance `ν = Ω_b − ω_n − Δω`, so each
//! tone turns `b†b(a + a†)` into the beam splitter `β b†a + h.c.` detuned by
//! `Δω`. Sites use the supermode resonance `2s = ω_n + Δ (+ δ)` and a tone on
//! the upper supermode `c` detuned below the drive by `Ω`.

mod validate;

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;

pub use validate::{validate_plan, GuardBandReport, RateBudget, SpuriousTriple, ValidationReport};

use crate::error::{Error, Result};
use crate::math::{sqrt, PI};
use crate::models::{hop_rates, kerr_rates, Coupling, LatticeGraph};
use crate::operators::{ModeKind, ModeSpec};

/// Coherent drive component `β e^{-iνt}` on one mode (or pair).
#[derive(Debug, Clone, PartialEq)]
pub struct DriveTone {
    pub target: String,
    pub frequency: f64,
    pub amplitude: Complex64,
}

impl DriveTone {
    pub fn new(target: &str, frequency: f64, amplitude: Complex64) -> Self {
        Self { target: target.into(), frequency, amplitude }
    }
}

/// Two linearly mixed auxiliary modes sharing a frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct ModePair {
    pub label: String,
    pub members: (String, String),
    /// Mixing rate `s`.
    pub mixing: f64,
}

/// Mechanical-to-pair coupling `f_nj`, optionally modulated at `δ_nj`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCoupling {
    pub mechanical: String,
    pub pair: String,
    pub rate: f64,
    pub modulation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Hardware {
    pub modes: Vec<ModeSpec>,
    pub pairs: Vec<ModePair>,
    pub g: Vec<Coupling>,
    pub f: Vec<PairCoupling>,
}

impl Hardware {
    pub fn mode(&self, label: &str) -> Result<&ModeSpec> {
        self.modes.iter().find(|m| m.label == label).ok_or_else(|| Error::UnknownLabel(label.into()))
    }

    pub fn pair(&self, label: &str) -> Result<&ModePair> {
        self.pairs.iter().find(|p| p.label == label).ok_or_else(|| Error::UnknownLabel(label.into()))
    }

    /// Shared frequency and damping of a pair's members.
    pub fn pair_mode(&self, pair: &ModePair) -> Result<&ModeSpec> {
        self.mode(&pair.members.0)
    }

    pub fn g_rate(&self, mech: &str, aux: &str) -> f64 {
        self.g.iter().filter(|c| c.mechanical == mech && c.auxiliary == aux).map(|c| c.rate).sum()
    }

    pub fn f_coupling(&self, mech: &str, pair: &str) -> Option<&PairCoupling> {
        self.f.iter().find(|c| c.mechanical == mech && c.pair == pair && c.rate != 0.0)
    }

    pub fn mechanical(&self) -> impl Iterator<Item = &ModeSpec> {
        self.modes.iter().filter(|m| m.kind == ModeKind::Mechanical)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for m in &self.modes {
            m.validate()?;
            if !seen.insert(m.label.as_str()) {
                return Err(Error::DuplicateLabel(m.label.clone()));
            }
        }
        let mut members = BTreeSet::new();
        for p in &self.pairs {
            if !seen.insert(p.label.as_str()) {
                return Err(Error::DuplicateLabel(p.label.clone()));
            }
            let (c, d) = (self.mode(&p.members.0)?, self.mode(&p.members.1)?);
            for m in [c, d] {
                if m.kind != ModeKind::AuxiliaryPairMember {
                    return Err(Error::InvalidMode(format!("`{}` is not a pair member", m.label)));
                }
                if !members.insert(m.label.as_str()) {
                    return Err(Error::InvalidMode(format!("`{}` belongs to two pairs", m.label)));
                }
            }
            if c.frequency != d.frequency || c.damping_rate != d.damping_rate {
                return Err(Error::InvalidMode(format!(
                    "pair `{}` members must share frequency and damping",
                    p.label
                )));
            }
            if !(p.mixing > 0.0) {
                return Err(Error::InvalidMode(format!("pair `{}` needs a positive mixing rate", p.label)));
            }
        }
        for c in &self.g {
            if self.mode(&c.mechanical)?.kind != ModeKind::Mechanical {
                return Err(Error::InvalidMode(format!("g coupling source `{}` is not mechanical", c.mechanical)));
            }
            if self.mode(&c.auxiliary)?.kind != ModeKind::Auxiliary {
                return Err(Error::InvalidMode(format!("g coupling target `{}` is not an auxiliary", c.auxiliary)));
            }
        }
        for c in &self.f {
            if self.mode(&c.mechanical)?.kind != ModeKind::Mechanical {
                return Err(Error::InvalidMode(format!("f coupling source `{}` is not mechanical", c.mechanical)));
            }
            self.pair(&c.pair)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraints {
    /// Minimum spurious detuning; `None` means 10× the largest effective rate.
    pub guard_band: Option<f64>,
    pub beta_max: f64,
    pub alpha_max: f64,
    /// Bound on `g|β|/√(Δω²+κ²)`.
    pub adiabaticity_max: f64,
    /// Bound on `|ε| = |f/Δ|`.
    pub epsilon_max: f64,
    /// Edge detuning `Δω`; `None` means `κ` of the assigned auxiliary.
    pub hop_detuning: Option<f64>,
    /// Site drive detuning `|Ω|`; `None` means `κ` of the assigned pair.
    pub site_detuning: Option<f64>,
    /// Upper bound on `γ'/λ = κ/Δω`.
    pub max_damping_ratio: f64,
    /// Lower bounds on `λ/γ'` and `χ/Γ` checked by validation.
    pub min_hop_quality: f64,
    pub min_kerr_quality: f64,
}

impl Default for Constraints {
    fn default() -> Self {
        Self {
            guard_band: None,
            beta_max: f64::INFINITY,
            alpha_max: f64::INFINITY,
            adiabaticity_max: 0.1,
            epsilon_max: 0.2,
            hop_detuning: None,
            site_detuning: None,
            max_damping_ratio: 1.0,
            min_hop_quality: 0.0,
            min_kerr_quality: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeAssignment {
    pub nodes: (String, String),
    pub auxiliary: String,
    /// `Δω` of the first tone.
    pub detuning: f64,
    /// Indices into `DrivePlan::tones`, one per node.
    pub tones: [usize; 2],
    /// `(Ω_b − ω_n) − ν` for each tone as stored.
    pub tone_detunings: [f64; 2],
    /// `g|β|`, equal for both tones.
    pub coupling: f64,
    /// Signed hopping `ζ` realized.
    pub hopping: f64,
    /// Induced damping rate `γ'`.
    pub damping: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SiteAssignment {
    pub node: String,
    pub pair: String,
    pub mixing: f64,
    /// `Δ = 2s − ω_n − δ`.
    pub detuning: f64,
    pub modulation: Option<f64>,
    pub epsilon: f64,
    /// Signed drive detuning `Ω` of the supermode `c`.
    pub drive_detuning: f64,
    pub alpha: f64,
    pub tone: usize,
    pub kerr: f64,
    pub dephasing: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrivePlan {
    pub tones: Vec<DriveTone>,
    pub edges: Vec<EdgeAssignment>,
    pub sites: Vec<SiteAssignment>,
    pub guard: GuardBandReport,
}

impl DrivePlan {
    pub fn empty() -> Self {
        Self { tones: Vec::new(), edges: Vec::new(), sites: Vec::new(), guard: GuardBandReport::empty(0.0) }
    }

    /// Largest of `|λ|` and `|χ|` over the plan.
    pub fn largest_rate(&self) -> f64 {
        let e = self.edges.iter().map(|e| e.hopping.abs());
        let s = self.sites.iter().map(|s| s.kerr.abs());
        e.chain(s).fold(0.0, f64::max)
    }
}

fn edge_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.into(), b.into())
    } else {
        (b.into(), a.into())
    }
}

/// Greedy deterministic compilation.
///
/// Edges are processed in lexicographic order of their sorted node labels and
/// take the lowest-frequency free auxiliary coupled to both nodes; sites are
/// processed in label order and take the lowest-frequency free pair with
/// `|ε| ≤ epsilon_max`. Zero targets are not assigned.
pub fn compile_drive_plan(graph: &LatticeGraph, hw: &Hardware, c: &Constraints) -> Result<DrivePlan> {
    graph.validate()?;
    hw.validate()?;
    for (label, _) in &graph.nodes {
        if hw.mode(label)?.kind != ModeKind::Mechanical {
            return Err(Error::InvalidLattice(format!("node `{label}` is not a mechanical mode")));
        }
    }
    let mut plan = DrivePlan::empty();
    let mut used = BTreeSet::new();

    let mut edges: Vec<((String, String), f64)> =
        graph.edges.iter().map(|((a, b), z)| (edge_key(a, b), *z)).filter(|e| e.1 != 0.0).collect();
    edges.sort_by(|x, y| x.0.cmp(&y.0));
    let mut auxiliaries: Vec<&ModeSpec> = hw.modes.iter().filter(|m| m.kind == ModeKind::Auxiliary).collect();
    auxiliaries.sort_by(|x, y| x.frequency.total_cmp(&y.frequency).then(x.label.cmp(&y.label)));

    for ((n1, n2), zeta) in edges {
        let (m1, m2) = (hw.mode(&n1)?, hw.mode(&n2)?);
        let mut last_err = None;
        let mut done = false;
        for b in auxiliaries.iter().filter(|b| !used.contains(b.label.as_str())) {
            let (g1, g2) = (hw.g_rate(&n1, &b.label), hw.g_rate(&n2, &b.label));
            if g1 == 0.0 || g2 == 0.0 {
                continue;
            }
            match assign_edge(&n1, &n2, m1, m2, b, g1, g2, zeta, c, plan.tones.len()) {
                Ok((edge, tones)) => {
                    used.insert(b.label.clone());
                    plan.tones.extend(tones);
                    plan.edges.push(edge);
                    done = true;
                    break;
                }
                Err(e) => last_err = Some(e),
            }
        }
        if !done {
            return Err(last_err.unwrap_or_else(|| {
                Error::Infeasible(format!("no free auxiliary mode couples to both `{n1}` and `{n2}`"))
            }));
        }
    }

    let mut nodes: Vec<&(String, f64)> = graph.nodes.iter().filter(|n| n.1 != 0.0).collect();
    nodes.sort_by(|x, y| x.0.cmp(&y.0));
    let mut pairs: Vec<&ModePair> = hw.pairs.iter().collect();
    pairs.sort_by(|x, y| {
        let fx = hw.pair_mode(x).map(|m| m.frequency).unwrap_or(0.0);
        let fy = hw.pair_mode(y).map(|m| m.frequency).unwrap_or(0.0);
        fx.total_cmp(&fy).then(x.label.cmp(&y.label))
    });
    for (node, xi) in nodes {
        let mech = hw.mode(node)?;
        let mut last_err = None;
        let mut done = false;
        for pair in pairs.iter().filter(|p| !used.contains(p.label.as_str())) {
            let Some(fc) = hw.f_coupling(node, &pair.label) else { continue };
            match assign_site(node, mech, pair, hw.pair_mode(pair)?, fc, *xi, c, plan.tones.len()) {
                Ok((site, tone)) => {
                    used.insert(pair.label.clone());
                    plan.tones.push(tone);
                    plan.sites.push(site);
                    done = true;
                    break;
                }
                Err(e) => last_err = Some(e),
            }
        }
        if !done {
            return Err(last_err.unwrap_or_else(|| Error::Infeasible(format!("no free mode pair couples to `{node}`"))));
        }
    }

    let threshold = c.guard_band.unwrap_or(10.0 * plan.largest_rate());
    plan.guard = validate::guard_band(&plan, hw, threshold)?;
    if !plan.guard.pass {
        let worst = plan
            .guard
            .worst()
            .map(|t| format!("{} / {} / tone {} at detuning {}", t.mechanical, t.auxiliary, t.tone, t.detuning))
            .unwrap_or_default();
        return Err(Error::GuardBand(format!(
            "spurious resonance within guard band {threshold}: {worst}"
        )));
    }
    Ok(plan)
}

#[allow(clippy::too_many_arguments)]
fn assign_edge(
    n1: &str,
    n2: &str,
    m1: &ModeSpec,
    m2: &ModeSpec,
    b: &ModeSpec,
    g1: f64,
    g2: f64,
    zeta: f64,
    c: &Constraints,
    first_tone: usize,
) -> Result<(EdgeAssignment, Vec<DriveTone>)> {
    let kappa = b.damping_rate;
    let dw = match c.hop_detuning {
        Some(d) => d,
        None if kappa > 0.0 => kappa,
        None => {
            return Err(Error::Infeasible(format!(
                "auxiliary `{}` is undamped; set an explicit hop detuning",
                b.label
            )))
        }
    };
    if !(dw > 0.0) {
        return Err(Error::Infeasible(format!("hop detuning must be positive, got {dw}")));
    }
    if kappa / dw > c.max_damping_ratio {
        return Err(Error::Infeasible(format!(
            "edge {n1}-{n2} via `{}`: damping ratio kappa/delta_omega = {} exceeds {}",
            b.label,
            kappa / dw,
            c.max_damping_ratio
        )));
    }
    let den = dw * dw + kappa * kappa;
    let coupling = sqrt(zeta.abs() * den / dw);
    let (beta1, beta2) = (coupling / g1.abs(), coupling / g2.abs());
    if beta1.max(beta2) > c.beta_max {
        return Err(Error::Infeasible(format!(
            "edge {n1}-{n2} via `{}` needs |beta| = {} above the limit {}",
            b.label,
            beta1.max(beta2),
            c.beta_max
        )));
    }
    // Hop term −λ e^{iφ} a₁†a₂ + h.c.; φ = π gives +|ζ|. Signs of g are absorbed.
    let phase2 = if zeta > 0.0 { PI } else { 0.0 };
    let s1 = if g1 < 0.0 { -1.0 } else { 1.0 };
    let s2 = if g2 < 0.0 { -1.0 } else { 1.0 };
    let amp1 = Complex64::new(s1 * beta1, 0.0);
    let amp2 = Complex64::from_polar(s2 * beta2, phase2);
    let x1 = b.frequency - m1.frequency;
    let x2 = b.frequency - m2.frequency;
    let (nu1, nu2) = (x1 - dw, x2 - dw);
    if !(nu1 > 0.0 && nu2 > 0.0) {
        return Err(Error::Infeasible(format!(
            "edge {n1}-{n2} via `{}` needs a non-positive drive frequency",
            b.label
        )));
    }
    let tones = alloc::vec![DriveTone::new(&b.label, nu1, amp1), DriveTone::new(&b.label, nu2, amp2)];
    let (lambda, gamma) = hop_rates(coupling, dw, kappa)?;
    let edge = EdgeAssignment {
        nodes: (n1.into(), n2.into()),
        auxiliary: b.label.clone(),
        detuning: x1 - nu1,
        tones: [first_tone, first_tone + 1],
        tone_detunings: [x1 - nu1, x2 - nu2],
        coupling,
        hopping: lambda * zeta.signum(),
        damping: gamma,
    };
    Ok((edge, tones))
}

#[allow(clippy::too_many_arguments)]
fn assign_site(
    node: &str,
    mech: &ModeSpec,
    pair: &ModePair,
    member: &ModeSpec,
    fc: &PairCoupling,
    xi: f64,
    c: &Constraints,
    tone: usize,
) -> Result<(SiteAssignment, DriveTone)> {
    let delta_mod = fc.modulation.unwrap_or(0.0);
    let detuning = 2.0 * pair.mixing - mech.frequency - delta_mod;
    if detuning == 0.0 {
        return Err(Error::Infeasible(format!("site `{node}` is exactly resonant with pair `{}`", pair.label)));
    }
    let epsilon = fc.rate / detuning;
    if epsilon.abs() > c.epsilon_max {
        return Err(Error::Infeasible(format!(
            "site `{node}` with pair `{}`: |epsilon| = {} exceeds {}",
            pair.label,
            epsilon.abs(),
            c.epsilon_max
        )));
    }
    let kappa = member.damping_rate;
    let omega_abs = match c.site_detuning {
        Some(o) => o,
        None if kappa > 0.0 => kappa,
        None => {
            return Err(Error::Infeasible(format!(
                "pair `{}` is undamped; set an explicit site detuning",
                pair.label
            )))
        }
    };
    if !(omega_abs > 0.0) {
        return Err(Error::Infeasible(format!("site detuning must be positive, got {omega_abs}")));
    }
    let omega = omega_abs * xi.signum();
    let den = omega * omega + kappa * kappa;
    // χ = (εfα/4)² Ω/(Ω²+κ²)
    let alpha = 4.0 / (epsilon * fc.rate).abs() * sqrt(xi.abs() * den / omega_abs);
    if alpha > c.alpha_max {
        return Err(Error::Infeasible(format!(
            "site `{node}` needs alpha = {alpha} above the limit {}",
            c.alpha_max
        )));
    }
    let (kerr, dephasing) = kerr_rates(epsilon * fc.rate * alpha / 4.0, omega, kappa)?;
    let upper = member.frequency + pair.mixing;
    let frequency = upper + omega;
    if !(frequency > 0.0) {
        return Err(Error::Infeasible(format!("site `{node}` needs a non-positive drive frequency")));
    }
    let site = SiteAssignment {
        node: node.into(),
        pair: pair.label.clone(),
        mixing: pair.mixing,
        detuning,
        modulation: fc.modulation,
        epsilon,
        drive_detuning: omega,
        alpha,
        tone,
        kerr,
        dephasing,
    };
    Ok((site, DriveTone::new(&pair.label, frequency, Complex64::new(alpha, 0.0))))
}
