use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{TermKind, TermSum};
use crate::error::{Error, Result};
use crate::math::FRAC_1_SQRT_2;
use crate::models::{Dissipator, MasterEquationModel};
use crate::operators::{CompositeSpace, Monomial, Poly, SparseOperator};

/// Beam-splitter change of variables `c = (c̃ + d̃)/√2`, `d = (c̃ − d̃)/√2`
/// on the two given slots. The map is its own inverse.
///
/// Number operators on the pair that come out static are collected as free
/// terms, and the pair mode frequencies are updated to match.
pub fn supermode_transform(model: &MasterEquationModel, c_slot: usize, d_slot: usize) -> Result<MasterEquationModel> {
    let space = &model.space;
    let (c, d) = (space.mode(c_slot)?, space.mode(d_slot)?);
    if c_slot == d_slot || c.truncation_dim != d.truncation_dim {
        return Err(Error::InvalidArgument(format!(
            "`{}` and `{}` do not form a pair with equal truncation",
            c.label, d.label
        )));
    }
    let mut images = BTreeMap::new();
    images.insert(c_slot, Poly::a(c_slot).add(&Poly::a(d_slot)).scale_real(FRAC_1_SQRT_2));
    images.insert(d_slot, Poly::a(c_slot).sub(&Poly::a(d_slot)).scale_real(FRAC_1_SQRT_2));
    let on_pair = |m: &Monomial| m.powers().iter().all(|p| p.0 == c_slot || p.0 == d_slot);

    // (monomial, rotation bits, kind) -> (coefficient, label)
    let mut merged: Vec<(Monomial, f64, TermKind, Complex64, alloc::string::String)> = Vec::new();
    for t in model.hamiltonian.terms() {
        let image = Poly::term(t.coefficient, t.monomial.clone()).substitute(&images);
        let quadratic_pair = on_pair(&t.monomial) && t.monomial.powers().iter().map(|p| p.1 + p.2).sum::<u32>() == 2;
        for (m, coeff) in image.terms() {
            let number = m.as_number();
            let free = t.rotation == 0.0
                && number.is_some()
                && (t.kind == TermKind::Free
                    || (quadratic_pair && number.is_some_and(|s| s == c_slot || s == d_slot)));
            let kind = if free { TermKind::Free } else { TermKind::Interaction };
            match merged
                .iter_mut()
                .find(|e| e.0 == *m && e.1.to_bits() == t.rotation.to_bits() && e.2 == kind)
            {
                Some(e) => e.3 += coeff,
                None => merged.push((m.clone(), t.rotation, kind, *coeff, t.label.clone())),
            }
        }
    }
    let scale = merged.iter().map(|e| e.3.norm()).fold(0.0, f64::max);
    merged.retain(|e| e.3.norm() > 1e-14 * scale.max(1.0));
    for e in merged.iter_mut() {
        e.3 = chop_parts(e.3, 1e-14 * scale.max(1.0));
    }

    let mut modes = space.modes().to_vec();
    for slot in [c_slot, d_slot] {
        let w: f64 = merged
            .iter()
            .filter(|e| e.2 == TermKind::Free && e.0.as_number() == Some(slot))
            .map(|e| e.3.re)
            .sum();
        if w > 0.0 {
            modes[slot].frequency = w;
        }
    }
    let new_space = CompositeSpace::new(modes)?;
    let mut h = TermSum::new(new_space.clone());
    for (m, w, kind, coeff, label) in merged {
        h.push(coeff, m, w, label, kind)?;
    }
    let mut diss = Vec::new();
    for dsp in &model.dissipators {
        let l = dsp.poly.substitute(&images).chop(1e-15);
        diss.push(Dissipator::new(&new_space, dsp.rate, l, dsp.label.clone())?);
    }
    MasterEquationModel::new(h, diss)
}

fn chop_parts(c: Complex64, tol: f64) -> Complex64 {
    let f = |x: f64| if x.abs() <= tol { 0.0 } else { x };
    Complex64::new(f(c.re), f(c.im))
}

/// Spin-1/2 operators on the single-excitation subspace of a `(c, d)` pair.
///
/// Basis order: index 0 is `|c=1, d=0⟩` (`σz = +1`), index 1 is `|c=0, d=1⟩`.
#[derive(Debug, Clone)]
pub struct SchwingerOps {
    pub sigma_z: SparseOperator,
    pub sigma_plus: SparseOperator,
    pub sigma_minus: SparseOperator,
    /// Composite indices of the two basis states.
    pub basis: [usize; 2],
}

/// `σz = c†c − d†d`, `σ+ = d c†`, restricted to one pair excitation.
pub fn schwinger_qubit_ops(space: &CompositeSpace, c_slot: usize, d_slot: usize) -> Result<SchwingerOps> {
    if c_slot == d_slot {
        return Err(Error::InvalidArgument("Schwinger pair needs two distinct slots".into()));
    }
    let mut occ = alloc::vec![0usize; space.len()];
    occ[c_slot] = 1;
    let up = space.index_of(&occ)?;
    occ[c_slot] = 0;
    occ[d_slot] = 1;
    let down = space.index_of(&occ)?;
    let basis = [up, down];
    let sz = Poly::number(c_slot).sub(&Poly::number(d_slot)).to_operator(space)?.restrict(&basis);
    let sp = Poly::a(d_slot).mul(&Poly::adag(c_slot)).to_operator(space)?.restrict(&basis);
    if sz.is_zero() {
        return Err(Error::InvalidArgument("single-excitation subspace is empty".into()));
    }
    let sm = sp.adjoint();
    Ok(SchwingerOps { sigma_z: sz, sigma_plus: sp, sigma_minus: sm, basis })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_pair_with_mixing, EffectiveParams};
    use crate::operators::{ModeKind, ModeSpec};
    use alloc::vec;

    fn pair_space(dim: usize) -> CompositeSpace {
        CompositeSpace::new(vec![
            ModeSpec::new("a", ModeKind::Mechanical, 1.0, 0.0, 2).unwrap(),
            ModeSpec::new("ct", ModeKind::AuxiliaryPairMember, 5.0, 0.1, dim).unwrap(),
            ModeSpec::new("dt", ModeKind::AuxiliaryPairMember, 5.0, 0.1, dim).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn mixing_maps_to_splitting() {
        let p = EffectiveParams { f: 0.0, s: 0.7, ..Default::default() };
        let m = build_pair_with_mixing(&p, &pair_space(3)).unwrap();
        let out = supermode_transform(&m, 1, 2).unwrap();
        assert!((out.space.mode(1).unwrap().frequency - 5.7).abs() < 1e-12);
        assert!((out.space.mode(2).unwrap().frequency - 4.3).abs() < 1e-12);
        for t in out.hamiltonian.terms() {
            assert_eq!(t.kind, TermKind::Free, "{}", t.label);
        }
    }

    #[test]
    fn involution() {
        let p = EffectiveParams { f: 0.3, s: 0.7, ..Default::default() };
        let m = build_pair_with_mixing(&p, &pair_space(3)).unwrap();
        let twice = supermode_transform(&supermode_transform(&m, 1, 2).unwrap(), 1, 2).unwrap();
        let a = m.hamiltonian.static_poly();
        let b = twice.hamiltonian.static_poly();
        assert!(a.sub(&b).max_coefficient() < 1e-12);
        for (x, y) in m.dissipators.iter().zip(&twice.dissipators) {
            assert!(x.poly.sub(&y.poly).max_coefficient() < 1e-12);
        }
    }

    #[test]
    fn schwinger_algebra() {
        let s = CompositeSpace::new(vec![
            ModeSpec::new("c", ModeKind::Auxiliary, 5.0, 0.0, 3).unwrap(),
            ModeSpec::new("d", ModeKind::Auxiliary, 4.0, 0.0, 3).unwrap(),
        ])
        .unwrap();
        let q = schwinger_qubit_ops(&s, 0, 1).unwrap();
        let comm = q.sigma_plus.commutator(&q.sigma_minus).unwrap();
        assert_eq!(comm, q.sigma_z);
        assert_eq!(q.sigma_z.matmul(&q.sigma_z).unwrap(), SparseOperator::identity(2));
        // σ+ |d=1⟩ = |c=1⟩
        assert_eq!(q.sigma_plus.get(0, 1), Complex64::new(1.0, 0.0));
    }
}
