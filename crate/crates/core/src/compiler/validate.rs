use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{Constraints, DrivePlan, Hardware};
use crate::error::Result;
use crate::math::sqrt;
use crate::operators::ModeKind;

/// A (mechanical mode, driven mode, tone) combination that is not intended.
#[derive(Debug, Clone, PartialEq)]
pub struct SpuriousTriple {
    pub mechanical: String,
    pub auxiliary: String,
    pub tone: usize,
    /// Rotation left over in the frame where the intended terms are static.
    pub detuning: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuardBandReport {
    pub threshold: f64,
    pub triples: Vec<SpuriousTriple>,
    /// `+inf` when there are no spurious triples.
    pub min_detuning: f64,
    pub pass: bool,
}

impl GuardBandReport {
    pub fn empty(threshold: f64) -> Self {
        Self { threshold, triples: Vec::new(), min_detuning: f64::INFINITY, pass: true }
    }

    pub fn worst(&self) -> Option<&SpuriousTriple> {
        self.triples.iter().min_by(|a, b| a.detuning.total_cmp(&b.detuning))
    }
}

/// Enumerates spurious triples for every tone of the plan.
///
/// Edge tone on `b`: every mechanical mode coupled to `b` other than the
/// intended one, detuned by `|(Ω_b − ω_n − ν) − Δω_b|`. Site tone on a pair:
/// every other mechanical mode coupled to the pair, detuned by
/// `|2s − ω_n − δ|`.
pub(crate) fn guard_band(plan: &DrivePlan, hw: &Hardware, threshold: f64) -> Result<GuardBandReport> {
    let mut report = GuardBandReport::empty(threshold);
    for edge in &plan.edges {
        let b = hw.mode(&edge.auxiliary)?;
        let intended = [&edge.nodes.0, &edge.nodes.1];
        for (slot, &k) in edge.tones.iter().enumerate() {
            let nu = plan.tones[k].frequency;
            for m in hw.mechanical() {
                if hw.g_rate(&m.label, &b.label) == 0.0 || m.label == *intended[slot] {
                    continue;
                }
                let r = (b.frequency - m.frequency) - nu;
                report.triples.push(SpuriousTriple {
                    mechanical: m.label.clone(),
                    auxiliary: b.label.clone(),
                    tone: k,
                    detuning: (r - edge.detuning).abs(),
                });
            }
        }
    }
    for site in &plan.sites {
        for fc in hw.f.iter().filter(|c| c.pair == site.pair && c.rate != 0.0 && c.mechanical != site.node) {
            let m = hw.mode(&fc.mechanical)?;
            let detuning = (2.0 * site.mixing - m.frequency - fc.modulation.unwrap_or(0.0)).abs();
            report.triples.push(SpuriousTriple {
                mechanical: m.label.clone(),
                auxiliary: site.pair.clone(),
                tone: site.tone,
                detuning,
            });
        }
    }
    report.min_detuning = report.triples.iter().map(|t| t.detuning).fold(f64::INFINITY, f64::min);
    report.pass = report.min_detuning >= threshold;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateBudget {
    pub element: String,
    /// Effective rate `λ` or `χ`.
    pub rate: f64,
    /// Parasitic rate `γ'` or `Γ`.
    pub parasitic: f64,
    /// `|rate| / parasitic`, `+inf` without loss.
    pub quality: f64,
    pub min_quality: f64,
    /// Coupling over `√(detuning² + κ²)`.
    pub adiabaticity: f64,
    pub adiabaticity_max: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub guard: GuardBandReport,
    pub budgets: Vec<RateBudget>,
    /// Every stored detuning equals its resonance expression exactly.
    pub resonance_exact: bool,
    pub pass: bool,
}

fn quality(rate: f64, parasitic: f64) -> f64 {
    if parasitic == 0.0 {
        f64::INFINITY
    } else {
        rate.abs() / parasitic
    }
}

/// Report-only check of a plan against hardware and constraints.
pub fn validate_plan(plan: &DrivePlan, hw: &Hardware, c: &Constraints) -> Result<ValidationReport> {
    let threshold = c.guard_band.unwrap_or(10.0 * plan.largest_rate());
    let guard = guard_band(plan, hw, threshold)?;
    let mut budgets = Vec::new();
    let mut exact = true;
    for e in &plan.edges {
        let b = hw.mode(&e.auxiliary)?;
        for (slot, &k) in e.tones.iter().enumerate() {
            let n = if slot == 0 { &e.nodes.0 } else { &e.nodes.1 };
            let x = b.frequency - hw.mode(n)?.frequency;
            exact &= x - plan.tones[k].frequency == e.tone_detunings[slot];
        }
        exact &= e.detuning == e.tone_detunings[0];
        let kappa = b.damping_rate;
        let adiabaticity = e.coupling / sqrt(e.detuning * e.detuning + kappa * kappa);
        let q = quality(e.hopping, e.damping);
        budgets.push(RateBudget {
            element: format!("edge {}-{}", e.nodes.0, e.nodes.1),
            rate: e.hopping,
            parasitic: e.damping,
            quality: q,
            min_quality: c.min_hop_quality,
            adiabaticity,
            adiabaticity_max: c.adiabaticity_max,
            pass: q >= c.min_hop_quality && adiabaticity <= c.adiabaticity_max,
        });
    }
    for s in &plan.sites {
        let pair = hw.pair(&s.pair)?;
        let member = hw.pair_mode(pair)?;
        let mech = hw.mode(&s.node)?;
        exact &= mech.kind == ModeKind::Mechanical
            && 2.0 * s.mixing - mech.frequency - s.modulation.unwrap_or(0.0) == s.detuning;
        let kappa = member.damping_rate;
        let pref = s.epsilon * hw.f_coupling(&s.node, &s.pair).map(|f| f.rate).unwrap_or(0.0) * s.alpha / 4.0;
        let adiabaticity = pref.abs() / sqrt(s.drive_detuning * s.drive_detuning + kappa * kappa);
        let q = quality(s.kerr, s.dephasing);
        budgets.push(RateBudget {
            element: format!("site {}", s.node),
            rate: s.kerr,
            parasitic: s.dephasing,
            quality: q,
            min_quality: c.min_kerr_quality,
            adiabaticity,
            adiabaticity_max: c.adiabaticity_max,
            pass: q >= c.min_kerr_quality && adiabaticity <= c.adiabaticity_max && s.epsilon.abs() <= c.epsilon_max,
        });
    }
    let pass = guard.pass && exact && budgets.iter().all(|b| b.pass);
    Ok(ValidationReport { guard, budgets, resonance_exact: exact, pass })
}
