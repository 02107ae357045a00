use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{TermKind, TermSum};
use crate::error::{Error, Result};
use crate::models::{Dissipator, MasterEquationModel};
use crate::operators::{Monomial, Poly};

/// Second-order result on the `[a, c]` space, `d` left in vacuum.
#[derive(Debug, Clone)]
pub struct Diagonalized {
    pub model: MasterEquationModel,
    /// `ε = f / Δ`.
    pub epsilon: f64,
    /// Anti-Hermitian generator `S`; the transformed Hamiltonian is `e^S H e^{-S}`.
    pub generator: Poly,
    pub warnings: Vec<String>,
}

const EPSILON_WARN: f64 = 0.3;

/// Removes the flip coupling `f(X + X†)`, `X = a d c†`, to second order in `ε`.
///
/// Expects the slot layout `[a, c, d]` of the intermediate qubit model with a
/// diagonal quadratic part. With `[H0, X] = 2Δ X` the generator is
/// `S = (ε/2)(X − X†)` and the result is `P₀(H0 + ½[S, V])P₀` where `P₀`
/// projects `d` onto vacuum. Jump operators become `P₀(L + [S, L])P₀`.
pub fn perturbative_diagonalize(model: &MasterEquationModel) -> Result<Diagonalized> {
    if model.space.len() != 3 || !model.is_static() {
        return Err(Error::Unsupported("expected a static model on slots [a, c, d]".into()));
    }
    let (a, c, d) = (0usize, 1usize, 2usize);
    let h = model.hamiltonian.static_poly();
    let mut h0 = Poly::zero();
    let mut v = Poly::zero();
    for (m, coeff) in h.terms() {
        if m.is_diagonal() {
            h0.add_term(*coeff, m.clone());
        } else {
            v.add_term(*coeff, m.clone());
        }
    }
    let x_mono = Monomial::from_powers(alloc::vec![(a, 0, 1), (c, 1, 0), (d, 0, 1)]);
    let f = v.coefficient(&x_mono);
    let shape_ok = v.is_empty() || (v.len() == 2 && f.im == 0.0 && v.coefficient(&x_mono.adjoint()) == f);
    if !shape_ok {
        return Err(Error::Unsupported("coupling is not of the form f(a d c† + h.c.)".into()));
    }
    let f = f.re;
    let x = Poly::term(Complex64::new(1.0, 0.0), x_mono);
    let comm = h0.commutator(&x);
    let omega_x = comm.coefficient(&x.terms().next().unwrap().0.clone());
    if comm.len() != 1 || omega_x.im != 0.0 || omega_x.re == 0.0 {
        return Err(Error::Unsupported("free part does not rotate the coupling uniformly".into()));
    }
    let delta = omega_x.re / 2.0;
    let epsilon = f / delta;
    let mut warnings = Vec::new();
    if epsilon.abs() > EPSILON_WARN {
        warnings.push(format!("epsilon = {epsilon} exceeds {EPSILON_WARN}; second order is unreliable"));
    }
    let s = x.sub(&x.adjoint()).scale_real(epsilon / 2.0);
    let h2 = h0.add(&s.commutator(&v).scale_real(0.5)).project_vacuum(d).chop(1e-15);
    let keep = |slot: usize| if slot < d { slot } else { slot - 1 };
    let space = model.space.without_slot(d)?;
    let mut ts = TermSum::new(space.clone());
    ts.push_poly(&h2.remap_slots(keep), 0.0, "second-order", TermKind::Interaction)?;

    let mut diss = Vec::new();
    for dsp in &model.dissipators {
        let l = dsp.poly.add(&s.commutator(&dsp.poly)).project_vacuum(d).chop(1e-15);
        if l.is_empty() || dsp.rate == 0.0 {
            continue;
        }
        let (l, weight) = normalize_jump(&l);
        let label = if dsp.poly.touches(d) { format!("induced:{}", dsp.label) } else { dsp.label.clone() };
        diss.push(Dissipator::new(&space, dsp.rate * weight, l.remap_slots(keep), label)?);
    }
    Ok(Diagonalized { model: MasterEquationModel::new(ts, diss)?, epsilon, generator: s, warnings })
}

/// Splits `L = c·L̂` with the largest coefficient of `L̂` equal to one; returns `(L̂, |c|²)`.
pub(crate) fn normalize_jump(l: &Poly) -> (Poly, f64) {
    let mut lead = Complex64::new(0.0, 0.0);
    for (_, coeff) in l.terms() {
        if coeff.norm() > lead.norm() {
            lead = *coeff;
        }
    }
    let mut out = Poly::zero();
    for (m, coeff) in l.terms() {
        out.add_term(if *coeff == lead { Complex64::new(1.0, 0.0) } else { coeff / lead }, m.clone());
    }
    (out, lead.norm_sqr())
}
