//! Truncated Fock-space operators and their tensor embedding.
//!
//! Composite indexing is row-major: slot 0 is the most significant digit,
//! so for modes with truncations `[d0, d1, ..]` the basis state
//! `|n0, n1, ..⟩` has index `((n0 * d1) + n1) * d2 + ..`.

mod sparse;
mod word;

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;

pub use sparse::SparseOperator;
pub use word::{Ladder, Monomial, Poly};

use crate::error::{Error, Result};
use crate::math::sqrt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModeKind {
    Mechanical,
    Auxiliary,
    AuxiliaryPairMember,
}

impl ModeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModeKind::Mechanical => "mechanical",
            ModeKind::Auxiliary => "auxiliary",
            ModeKind::AuxiliaryPairMember => "auxiliary_pair_member",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "mechanical" => Some(ModeKind::Mechanical),
            "auxiliary" => Some(ModeKind::Auxiliary),
            "auxiliary_pair_member" => Some(ModeKind::AuxiliaryPairMember),
            _ => None,
        }
    }
}

/// One physical mode: frequency and damping in rad/s, Fock truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSpec {
    pub label: String,
    pub kind: ModeKind,
    pub frequency: f64,
    pub damping_rate: f64,
    pub truncation_dim: usize,
}

impl ModeSpec {
    pub fn new(
        label: impl Into<String>,
        kind: ModeKind,
        frequency: f64,
        damping_rate: f64,
        truncation_dim: usize,
    ) -> Result<Self> {
        let spec = Self { label: label.into(), kind, frequency, damping_rate, truncation_dim };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.truncation_dim < 2 {
            return Err(Error::InvalidDimension(self.truncation_dim));
        }
        if !(self.frequency > 0.0) || !self.frequency.is_finite() {
            return Err(Error::InvalidMode(alloc::format!(
                "mode `{}` frequency must be positive, got {}",
                self.label, self.frequency
            )));
        }
        if !(self.damping_rate >= 0.0) || !self.damping_rate.is_finite() {
            return Err(Error::InvalidMode(alloc::format!(
                "mode `{}` damping must be non-negative, got {}",
                self.label, self.damping_rate
            )));
        }
        Ok(())
    }
}

/// Ordered tensor product of modes.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeSpace {
    modes: Vec<ModeSpec>,
    total_dim: usize,
}

impl CompositeSpace {
    pub fn new(modes: Vec<ModeSpec>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for m in &modes {
            m.validate()?;
            if !seen.insert(m.label.as_str()) {
                return Err(Error::DuplicateLabel(m.label.clone()));
            }
        }
        let total_dim = modes.iter().map(|m| m.truncation_dim).product();
        Ok(Self { modes, total_dim })
    }

    pub fn modes(&self) -> &[ModeSpec] {
        &self.modes
    }

    pub fn mode(&self, slot: usize) -> Result<&ModeSpec> {
        self.modes
            .get(slot)
            .ok_or(Error::SlotOutOfRange { slot, modes: self.modes.len() })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn dims(&self) -> Vec<usize> {
        self.modes.iter().map(|m| m.truncation_dim).collect()
    }

    pub fn slot_of(&self, label: &str) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| m.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.into()))
    }

    /// Composite index of a Fock configuration.
    pub fn index_of(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.modes.len() {
            return Err(Error::DimensionMismatch { expected: self.modes.len(), found: occupations.len() });
        }
        let mut idx = 0;
        for (n, m) in occupations.iter().zip(&self.modes) {
            if *n >= m.truncation_dim {
                return Err(Error::InvalidArgument(alloc::format!(
                    "occupation {} exceeds truncation of `{}`",
                    n, m.label
                )));
            }
            idx = idx * m.truncation_dim + n;
        }
        Ok(idx)
    }

    /// Fock configuration of a composite index.
    pub fn occupations(&self, mut index: usize) -> Vec<usize> {
        let mut occ = alloc::vec![0; self.modes.len()];
        for (slot, m) in self.modes.iter().enumerate().rev() {
            occ[slot] = index % m.truncation_dim;
            index /= m.truncation_dim;
        }
        occ
    }

    /// Subspace keeping the given slots in their original order.
    pub fn subspace(&self, slots: &[usize]) -> Result<Self> {
        let mut modes = Vec::with_capacity(slots.len());
        for &s in slots {
            modes.push(self.mode(s)?.clone());
        }
        Self::new(modes)
    }

    pub fn without_slot(&self, slot: usize) -> Result<Self> {
        self.mode(slot)?;
        let keep: Vec<usize> = (0..self.len()).filter(|&s| s != slot).collect();
        self.subspace(&keep)
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        Err(Error::InvalidDimension(dim))
    } else {
        Ok(())
    }
}

/// Ladder operator with entries (n-1, n) = sqrt(n).
pub fn annihilation(dim: usize) -> Result<SparseOperator> {
    check_dim(dim)?;
    SparseOperator::from_triplets(dim, (1..dim).map(|n| (n - 1, n, Complex64::new(sqrt(n as f64), 0.0))))
}

pub fn creation(dim: usize) -> Result<SparseOperator> {
    Ok(annihilation(dim)?.adjoint())
}

pub fn number(dim: usize) -> Result<SparseOperator> {
    check_dim(dim)?;
    Ok(SparseOperator::diagonal((0..dim).map(|n| Complex64::new(n as f64, 0.0))))
}

/// I ⊗ .. ⊗ op ⊗ .. ⊗ I with `op` in `slot`.
pub fn embed(op: &SparseOperator, space: &CompositeSpace, slot: usize) -> Result<SparseOperator> {
    let mode = space.mode(slot)?;
    if op.dim() != mode.truncation_dim {
        return Err(Error::DimensionMismatch { expected: mode.truncation_dim, found: op.dim() });
    }
    let dims = space.dims();
    let before: usize = dims[..slot].iter().product();
    let after: usize = dims[slot + 1..].iter().product();
    let inner = op.dim();
    let mut trip = Vec::with_capacity(before * after * op.nnz());
    for b in 0..before {
        for &(r, c, v) in op.entries() {
            for a in 0..after {
                trip.push(((b * inner + r) * after + a, (b * inner + c) * after + a, v));
            }
        }
    }
    SparseOperator::from_triplets(space.total_dim(), trip)
}

pub fn commutator(a: &SparseOperator, b: &SparseOperator) -> Result<SparseOperator> {
    a.commutator(b)
}

/// Embedded annihilation operator of one slot.
pub fn mode_annihilation(space: &CompositeSpace, slot: usize) -> Result<SparseOperator> {
    embed(&annihilation(space.mode(slot)?.truncation_dim)?, space, slot)
}

/// Embedded number operator of one slot.
pub fn mode_number(space: &CompositeSpace, slot: usize) -> Result<SparseOperator> {
    embed(&number(space.mode(slot)?.truncation_dim)?, space, slot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn space(dims: &[usize]) -> CompositeSpace {
        let modes = dims
            .iter()
            .enumerate()
            .map(|(i, &d)| ModeSpec::new(alloc::format!("m{i}"), ModeKind::Mechanical, 1.0 + i as f64, 0.0, d).unwrap())
            .collect();
        CompositeSpace::new(modes).unwrap()
    }

    #[test]
    fn qubit_ladder() {
        let a = annihilation(2).unwrap();
        assert_eq!(a.entries(), &[(0, 1, c(1.0))]);
    }

    #[test]
    fn three_level_ladder() {
        let a = annihilation(3).unwrap();
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.get(0, 1), c(1.0));
        assert_eq!(a.get(1, 2), c(sqrt(2.0)));
    }

    #[test]
    fn number_is_adag_a() {
        for d in 2..=6 {
            let a = annihilation(d).unwrap();
            let n = &a.adjoint() * &a;
            let diff = n.max_abs_diff(&number(d).unwrap()).unwrap();
            assert!(diff < 1e-15, "dim {d}: {diff}");
        }
        let n4 = number(4).unwrap();
        assert_eq!(n4, SparseOperator::diagonal([c(0.0), c(1.0), c(2.0), c(3.0)]));
    }

    #[test]
    fn invalid_dimensions() {
        assert_eq!(annihilation(1), Err(Error::InvalidDimension(1)));
        assert_eq!(number(0), Err(Error::InvalidDimension(0)));
    }

    #[test]
    fn embedding_is_slot_zero_major() {
        let s = space(&[2, 2]);
        let n0 = embed(&number(2).unwrap(), &s, 0).unwrap();
        assert_eq!(n0, SparseOperator::diagonal([c(0.0), c(0.0), c(1.0), c(1.0)]));
        let id = embed(&SparseOperator::identity(2), &s, 1).unwrap();
        assert_eq!(id, SparseOperator::identity(4));
    }

    #[test]
    fn embed_errors() {
        let s = space(&[2, 3]);
        assert!(matches!(embed(&number(2).unwrap(), &s, 5), Err(Error::SlotOutOfRange { .. })));
        assert!(matches!(embed(&number(2).unwrap(), &s, 1), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn truncated_commutator_boundary_defect() {
        // [a, a†] = diag(1, .., 1, -(d-1)) once truncated.
        for d in 2..=8 {
            let a = annihilation(d).unwrap();
            let comm = commutator(&a, &a.adjoint()).unwrap().to_dense();
            for n in 0..d {
                let want = if n + 1 == d { -((d - 1) as f64) } else { 1.0 };
                assert!((comm[(n, n)].re - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn adjoint_involution_and_negation() {
        let a = annihilation(5).unwrap().scale(Complex64::new(0.3, -1.2));
        assert_eq!(a.adjoint().adjoint(), a);
        assert!(a.add_checked(&(-&a)).unwrap().is_zero());
    }

    #[test]
    fn index_round_trip() {
        let s = space(&[2, 3, 4]);
        for i in 0..s.total_dim() {
            assert_eq!(s.index_of(&s.occupations(i)).unwrap(), i);
        }
        assert_eq!(s.occupations(23), vec![1, 2, 3]);
    }

    #[test]
    fn duplicate_labels_rejected() {
        let m = ModeSpec::new("x", ModeKind::Mechanical, 1.0, 0.0, 2).unwrap();
        assert_eq!(CompositeSpace::new(vec![m.clone(), m]), Err(Error::DuplicateLabel("x".into())));
    }
}
