//! Model transformations: interaction picture, RWA filtering, supermodes,
//! the Schwinger qubit, second-order perturbative diagonalization and
//! adiabatic elimination of a fast damped mode.
//!
//! Rotation convention: a term `c e^{-iwt} M` has rotation `w`. In the
//! interaction picture each annihilator of a mode at frequency `ω` adds `+ω`
//! and each creator adds `-ω`; a drive factor `β e^{-iνt}` adds `+ν`.

mod elimination;
mod perturbative;
mod supermode;
mod terms;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

pub use elimination::{adiabatic_eliminate, Elimination};
pub use perturbative::{perturbative_diagonalize, Diagonalized};
pub use supermode::{schwinger_qubit_ops, supermode_transform, SchwingerOps};
pub use terms::{AssembledHamiltonian, Term, TermKind, TermSum};

use crate::error::{Error, Result};
use crate::models::MasterEquationModel;
use crate::operators::{Monomial, Poly};

/// Mode frequencies read off the free terms; free terms must be number operators.
pub fn free_frequencies(ts: &TermSum) -> Result<Vec<f64>> {
    let mut freqs = vec![0.0; ts.space().len()];
    for t in ts.terms().iter().filter(|t| t.kind == TermKind::Free) {
        match t.monomial.as_number() {
            Some(slot) if t.rotation == 0.0 && t.coefficient.im == 0.0 => freqs[slot] += t.coefficient.re,
            _ => {
                return Err(Error::Unsupported(format!(
                    "free term `{}` is not a real number operator",
                    t.label
                )))
            }
        }
    }
    Ok(freqs)
}

/// Rotates every interaction term with the free Hamiltonian and drops the free terms.
pub fn to_interaction_picture(model: &MasterEquationModel) -> Result<TermSum> {
    let ts = &model.hamiltonian;
    let freqs = free_frequencies(ts)?;
    let mut out = TermSum::new(ts.space().clone());
    for t in ts.terms().iter().filter(|t| t.kind == TermKind::Interaction) {
        let rotation = t.rotation + t.monomial.frequency_balance(&freqs);
        out.push(t.coefficient, t.monomial.clone(), rotation, t.label.clone(), TermKind::Interaction)?;
    }
    Ok(out)
}

/// Moves to a frame rotating each slot at an extra `shifts[s]`, adding `-Σ δ_s n_s`.
pub fn rotate_frame(ts: &TermSum, shifts: &[f64]) -> Result<TermSum> {
    if shifts.len() != ts.space().len() {
        return Err(Error::DimensionMismatch { expected: ts.space().len(), found: shifts.len() });
    }
    let mut out = TermSum::new(ts.space().clone());
    for t in ts.terms() {
        let rotation = t.rotation + t.monomial.frequency_balance(shifts);
        out.push(t.coefficient, t.monomial.clone(), rotation, t.label.clone(), t.kind)?;
    }
    for (slot, &d) in shifts.iter().enumerate() {
        if d != 0.0 {
            let label = format!("frame:{}", ts.space().mode(slot)?.label);
            out.push_poly(&Poly::number(slot).scale_real(-d), 0.0, &label, TermKind::Interaction)?;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TermRecord {
    pub label: String,
    pub monomial: Monomial,
    pub rotation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceReport {
    pub cutoff: f64,
    pub kept_terms: Vec<TermRecord>,
    pub dropped_terms: Vec<TermRecord>,
    /// `+inf` when nothing was dropped.
    pub min_dropped_detuning: f64,
    /// `-inf` when nothing was kept.
    pub max_kept_detuning: f64,
    pub warnings: Vec<String>,
}

impl ResonanceReport {
    pub fn is_ambiguous(&self) -> bool {
        !self.warnings.is_empty()
    }
}

/// Keeps terms with `|rotation| <= cutoff`.
///
/// The cutoff is flagged as ambiguous when a dropped term sits within
/// `2·cutoff` or a kept term beyond `cutoff/2`.
pub fn rwa_filter(ts: &TermSum, cutoff: f64) -> Result<(TermSum, ResonanceReport)> {
    if !(cutoff >= 0.0) {
        return Err(Error::InvalidArgument(format!("RWA cutoff must be >= 0, got {cutoff}")));
    }
    let mut kept = TermSum::new(ts.space().clone());
    let mut report = ResonanceReport {
        cutoff,
        kept_terms: Vec::new(),
        dropped_terms: Vec::new(),
        min_dropped_detuning: f64::INFINITY,
        max_kept_detuning: f64::NEG_INFINITY,
        warnings: Vec::new(),
    };
    for t in ts.terms() {
        let rec = TermRecord { label: t.label.clone(), monomial: t.monomial.clone(), rotation: t.rotation };
        let w = t.rotation.abs();
        if w <= cutoff {
            kept.push_term(t.clone());
            report.max_kept_detuning = report.max_kept_detuning.max(w);
            report.kept_terms.push(rec);
        } else {
            report.min_dropped_detuning = report.min_dropped_detuning.min(w);
            report.dropped_terms.push(rec);
        }
    }
    if cutoff > 0.0 {
        if report.min_dropped_detuning < 2.0 * cutoff {
            report.warnings.push(format!(
                "dropped term at detuning {} is within a factor 2 of the cutoff {}",
                report.min_dropped_detuning, cutoff
            ));
        }
        if report.max_kept_detuning > 0.5 * cutoff {
            report.warnings.push(format!(
                "kept term at detuning {} exceeds half the cutoff {}",
                report.max_kept_detuning, cutoff
            ));
        }
    }
    Ok((kept, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::DriveTone;
    use crate::models::{build_displaced_coupling, build_radiation_pressure, Coupling};
    use crate::operators::{CompositeSpace, ModeKind, ModeSpec};
    use num_complex::Complex64;

    fn space() -> CompositeSpace {
        CompositeSpace::new(vec![
            ModeSpec::new("a", ModeKind::Mechanical, 1.0, 0.0, 3).unwrap(),
            ModeSpec::new("b", ModeKind::Auxiliary, 7.0, 0.1, 3).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn undriven_pressure_terms_rotate_at_mechanical_frequency() {
        let m = build_radiation_pressure(&[Coupling::new("a", "b", 0.01)], &space()).unwrap();
        let ip = to_interaction_picture(&m).unwrap();
        assert_eq!(ip.len(), 2);
        for t in ip.terms() {
            assert_eq!(t.rotation.abs(), 1.0);
        }
        let (kept, report) = rwa_filter(&ip, 0.1).unwrap();
        assert!(kept.is_empty());
        assert_eq!(report.dropped_terms.len(), 2);
    }

    #[test]
    fn free_theory_is_empty() {
        let m = build_radiation_pressure(&[], &space()).unwrap();
        assert!(to_interaction_picture(&m).unwrap().is_empty());
    }

    #[test]
    fn resonant_sideband_term_is_static() {
        let tone = DriveTone::new("b", 6.0, Complex64::new(1.0, 0.0));
        let m = build_displaced_coupling(&[Coupling::new("a", "b", 0.01)], &[tone], &space()).unwrap();
        let ip = to_interaction_picture(&m).unwrap();
        let (kept, _) = rwa_filter(&ip, 0.0).unwrap();
        let labels: Vec<String> = kept.terms().iter().map(|t| t.monomial.describe(Some(ip.space()))).collect();
        assert_eq!(kept.len(), 2, "{labels:?}");
        assert!(labels.contains(&"ab†".into()) && labels.contains(&"a†b".into()));
    }

    #[test]
    fn lossless_with_infinite_cutoff() {
        let tone = DriveTone::new("b", 5.5, Complex64::new(0.3, 0.4));
        let m = build_displaced_coupling(&[Coupling::new("a", "b", 0.2)], &[tone], &space()).unwrap();
        let ip = to_interaction_picture(&m).unwrap();
        let (kept, report) = rwa_filter(&ip, f64::INFINITY).unwrap();
        assert!(report.dropped_terms.is_empty());
        let t = 0.37;
        let diff = kept.operator_at(t).max_abs_diff(&ip.operator_at(t)).unwrap();
        assert_eq!(diff, 0.0);
        kept.check_hermitian_pairing(1e-12).unwrap();
    }

    #[test]
    fn negative_cutoff_rejected() {
        let m = build_radiation_pressure(&[], &space()).unwrap();
        assert!(rwa_filter(&m.hamiltonian, -1.0).is_err());
    }
}
