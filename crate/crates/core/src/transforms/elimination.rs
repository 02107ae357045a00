use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::perturbative::normalize_jump;
use super::{TermKind, TermSum};
use crate::error::{Error, Result};
use crate::math::sqrt;
use crate::models::{Dissipator, MasterEquationModel};
use crate::operators::{Monomial, Poly};

#[derive(Debug, Clone)]
pub struct Elimination {
    pub model: MasterEquationModel,
    /// Coupling operator `K` in `b†K + K†b`, on the reduced slots.
    pub coupling: Poly,
    /// True when `K = K†`, i.e. the coupling is `(b + b†)K`.
    pub dispersive: bool,
    pub warnings: Vec<String>,
}

const ADIABATIC_WARN: f64 = 0.1;

/// Eliminates a fast mode `b` with frequency `omega` and amplitude decay `kappa`
/// (dissipator `2κ D(b)`) coupled as `b†K + K†b`.
///
/// Adds `−ω/(ω²+κ²) K†K` to the Hamiltonian and `2κ/(ω²+κ²) D(K)`; for a
/// Hermitian `K` this is the dispersive rule `(b + b†)K → K², D(K)`. The
/// fast mode's own `b†b` term and damping are consumed.
pub fn adiabatic_eliminate(
    model: &MasterEquationModel,
    fast_slot: usize,
    omega: f64,
    kappa: f64,
) -> Result<Elimination> {
    if !model.is_static() {
        return Err(Error::Unsupported("adiabatic elimination needs a static Hamiltonian".into()));
    }
    let den = omega * omega + kappa * kappa;
    if den == 0.0 {
        return Err(Error::ZeroDenominator("omega^2 + kappa^2"));
    }
    let b = fast_slot;
    model.space.mode(b)?;
    let mut rest = Poly::zero();
    let mut k = Poly::zero();
    let mut kdag = Poly::zero();
    let mut own_frequency = 0.0;
    let mut warnings = Vec::new();
    for (m, coeff) in model.hamiltonian.static_poly().terms() {
        let stripped: Vec<_> = m.powers().iter().copied().filter(|p| p.0 != b).collect();
        let stripped = Monomial::from_powers(stripped);
        match m.power_of(b) {
            (0, 0) => rest.add_term(*coeff, m.clone()),
            (1, 0) => k.add_term(*coeff, stripped),
            (0, 1) => kdag.add_term(*coeff, stripped),
            (1, 1) if stripped.is_identity() => own_frequency += coeff.re,
            _ => {
                return Err(Error::Unsupported(format!(
                    "term {} is neither linear in the fast mode nor its free term",
                    m.describe(Some(&model.space))
                )))
            }
        }
    }
    if k.is_empty() {
        return Err(Error::Unsupported("fast mode is not coupled".into()));
    }
    if k.adjoint().sub(&kdag).max_coefficient() > 1e-12 * k.max_coefficient() {
        return Err(Error::Unsupported("coupling is not of the form b†K + K†b".into()));
    }
    if own_frequency != 0.0 && (own_frequency - omega).abs() > 1e-12 * omega.abs().max(1.0) {
        warnings.push(format!("model gives the fast mode frequency {own_frequency}, eliminating with {omega}"));
    }
    let fast_damping = model.space.mode(b)?.damping_rate;
    if fast_damping != kappa {
        warnings.push(format!("model gives the fast mode damping {fast_damping}, eliminating with {kappa}"));
    }
    let ratio = k.max_coefficient() / sqrt(den);
    if ratio > ADIABATIC_WARN {
        warnings.push(format!("coupling/sqrt(omega^2+kappa^2) = {ratio} exceeds {ADIABATIC_WARN}"));
    }
    let dispersive = k.hermitian_defect() <= 1e-12 * k.max_coefficient();
    let shift = k.adjoint().mul(&k).scale_real(-omega / den);
    let keep = |slot: usize| if slot < b { slot } else { slot - 1 };
    let space = model.space.without_slot(b)?;
    let mut h = TermSum::new(space.clone());
    for t in model.hamiltonian.terms() {
        if !t.monomial.touches(b) {
            h.push(
                t.coefficient,
                t.monomial.try_remap(|s| Some(keep(s))).expect("slot kept"),
                0.0,
                t.label.clone(),
                t.kind,
            )?;
        }
    }
    h.push_poly(&shift.remap_slots(keep), 0.0, "eliminated", TermKind::Interaction)?;
    let mut diss = Vec::new();
    for d in &model.dissipators {
        if d.poly.touches(b) {
            if d.poly.len() != 1 || d.poly.coefficient(&Monomial::from_powers(alloc::vec![(b, 0, 1)])).norm() == 0.0 {
                return Err(Error::Unsupported(format!("dissipator `{}` mixes the fast mode", d.label)));
            }
            continue;
        }
        diss.push(Dissipator::new(&space, d.rate, d.poly.remap_slots(keep), d.label.clone())?);
    }
    let coupling = k.remap_slots(keep);
    if kappa > 0.0 {
        let (l, weight) = normalize_jump(&coupling);
        diss.push(Dissipator::new(&space, 2.0 * kappa / den * weight, l, "induced:eliminated")?);
    }
    Ok(Elimination { model: MasterEquationModel::new(h, diss)?, coupling, dispersive, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_effective_hop, build_kerr_effective, damping_dissipators, EffectiveParams};
    use crate::operators::{CompositeSpace, ModeKind, ModeSpec};
    use alloc::vec;
    use num_complex::Complex64;

    fn mode(label: &str, kind: ModeKind, damping: f64, dim: usize) -> ModeSpec {
        ModeSpec::new(label, kind, 1.0, damping, dim).unwrap()
    }

    #[test]
    fn dispersive_reproduces_kerr_builder() {
        let (omega, kappa, pref) = (1.5, 0.3, 0.05);
        let space = CompositeSpace::new(vec![
            mode("a", ModeKind::Mechanical, 0.0, 4),
            mode("c", ModeKind::Auxiliary, kappa, 3),
        ])
        .unwrap();
        let mut h = TermSum::new(space.clone());
        h.push_poly(&Poly::number(1).scale_real(-omega), 0.0, "c", TermKind::Interaction).unwrap();
        let x = Poly::a(1).add(&Poly::adag(1)).mul(&Poly::number(0)).scale_real(pref);
        h.push_poly(&x, 0.0, "drive", TermKind::Interaction).unwrap();
        let m = MasterEquationModel::new(h, damping_dissipators(&space).unwrap()).unwrap();
        let out = adiabatic_eliminate(&m, 1, -omega, kappa).unwrap();
        assert!(out.dispersive);
        let p = EffectiveParams { omega_big: omega, kappa, alpha: 4.0 * pref, ..Default::default() }.with_qubit(1.0, 1.0);
        let want = build_kerr_effective(&p, space.mode(0).unwrap()).unwrap();
        let diff = out.model.hamiltonian.static_poly().sub(&want.hamiltonian.static_poly());
        assert!(diff.max_coefficient() < 1e-15);
        let (got, exp) = (&out.model.dissipators[0], &want.dissipators[0]);
        assert!((got.rate - exp.rate).abs() < 1e-15);
        assert_eq!(got.poly, exp.poly);
    }

    #[test]
    fn linear_reproduces_hop_builder_up_to_number_shift() {
        let (g, dw, kappa) = (0.02, 1.0, 0.5);
        let i = Complex64::new(0.0, 1.0);
        let space = CompositeSpace::new(vec![
            mode("a1", ModeKind::Mechanical, 0.0, 3),
            mode("a2", ModeKind::Mechanical, 0.0, 3),
            mode("b", ModeKind::Auxiliary, kappa, 3),
        ])
        .unwrap();
        let k = Poly::a(0).add(&Poly::a(1).scale(i)).scale_real(g);
        let mut h = TermSum::new(space.clone());
        h.push_poly(&Poly::number(2).scale_real(dw), 0.0, "b", TermKind::Interaction).unwrap();
        let c = Poly::adag(2).mul(&k);
        h.push_poly(&c.add(&c.adjoint()), 0.0, "g", TermKind::Interaction).unwrap();
        let m = MasterEquationModel::new(h, damping_dissipators(&space).unwrap()).unwrap();
        let out = adiabatic_eliminate(&m, 2, dw, kappa).unwrap();
        assert!(!out.dispersive);
        let p = EffectiveParams { g, beta: Complex64::new(1.0, 0.0), delta_omega: dw, kappa, ..Default::default() };
        let want = build_effective_hop(&p, space.mode(0).unwrap(), space.mode(1).unwrap()).unwrap();
        let (lambda, _) = p.hop_rates().unwrap();
        let shift = Poly::number(0).add(&Poly::number(1)).scale_real(-lambda);
        let diff = out.model.hamiltonian.static_poly().sub(&want.hamiltonian.static_poly()).sub(&shift);
        assert!(diff.max_coefficient() < 1e-18);
        let (got, exp) = (&out.model.dissipators[0], &want.dissipators[0]);
        assert!((got.rate - exp.rate).abs() < 1e-18);
        assert!(got.poly.sub(&exp.poly).max_coefficient() < 1e-15);
    }

    #[test]
    fn strong_damping_suppresses_hamiltonian() {
        let space = CompositeSpace::new(vec![
            mode("a", ModeKind::Mechanical, 0.0, 3),
            mode("c", ModeKind::Auxiliary, 1e6, 2),
        ])
        .unwrap();
        let mut h = TermSum::new(space.clone());
        let x = Poly::a(1).add(&Poly::adag(1)).mul(&Poly::number(0));
        h.push_poly(&x, 0.0, "drive", TermKind::Interaction).unwrap();
        let m = MasterEquationModel::new(h, damping_dissipators(&space).unwrap()).unwrap();
        let out = adiabatic_eliminate(&m, 1, 1.0, 1e6).unwrap();
        assert!(out.model.hamiltonian.static_poly().max_coefficient() < 1e-11);
    }

    #[test]
    fn unrecognized_shape() {
        let space = CompositeSpace::new(vec![
            mode("a", ModeKind::Mechanical, 0.0, 3),
            mode("c", ModeKind::Auxiliary, 0.1, 3),
        ])
        .unwrap();
        let mut h = TermSum::new(space.clone());
        let x = Poly::a(1).mul(&Poly::a(1)).mul(&Poly::adag(0));
        h.push_poly(&x.add(&x.adjoint()), 0.0, "two-photon", TermKind::Interaction).unwrap();
        let m = MasterEquationModel::new(h, Vec::new()).unwrap();
        assert!(matches!(adiabatic_eliminate(&m, 1, 1.0, 0.1), Err(Error::Unsupported(_))));
    }
}
