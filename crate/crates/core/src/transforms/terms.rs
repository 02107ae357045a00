use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math::{cos, sin};
use crate::operators::{CompositeSpace, Monomial, Poly, SparseOperator};

/// Whether a term belongs to the free (number-operator) Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermKind {
    Free,
    Interaction,
}

/// `coefficient * e^{-i rotation t} * monomial`.
#[derive(Debug, Clone)]
pub struct Term {
    pub coefficient: Complex64,
    pub monomial: Monomial,
    pub rotation: f64,
    pub label: String,
    pub kind: TermKind,
    operator: SparseOperator,
}

impl Term {
    pub fn operator(&self) -> &SparseOperator {
        &self.operator
    }
}

/// Sum of labelled monomial terms, each with its own rotation frequency.
#[derive(Debug, Clone)]
pub struct TermSum {
    space: CompositeSpace,
    terms: Vec<Term>,
}

fn phase(rotation: f64, t: f64) -> Complex64 {
    let x = -rotation * t;
    Complex64::new(cos(x), sin(x))
}

impl TermSum {
    pub fn new(space: CompositeSpace) -> Self {
        Self { space, terms: Vec::new() }
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(
        &mut self,
        coefficient: Complex64,
        monomial: Monomial,
        rotation: f64,
        label: impl Into<String>,
        kind: TermKind,
    ) -> Result<()> {
        if !rotation.is_finite() || !coefficient.re.is_finite() || !coefficient.im.is_finite() {
            return Err(Error::InvalidArgument("non-finite term".into()));
        }
        let operator = monomial.to_operator(&self.space)?;
        self.terms.push(Term { coefficient, monomial, rotation, label: label.into(), kind, operator });
        Ok(())
    }

    /// One term per monomial of `poly`, all sharing a rotation and label.
    pub fn push_poly(&mut self, poly: &Poly, rotation: f64, label: &str, kind: TermKind) -> Result<()> {
        for (m, c) in poly.terms() {
            self.push(*c, m.clone(), rotation, label, kind)?;
        }
        Ok(())
    }

    pub fn from_poly(space: CompositeSpace, poly: &Poly, label: &str) -> Result<Self> {
        let mut ts = Self::new(space);
        ts.push_poly(poly, 0.0, label, TermKind::Interaction)?;
        Ok(ts)
    }

    pub fn extend(&mut self, other: &TermSum) -> Result<()> {
        if other.space != self.space {
            return Err(Error::InvalidArgument("term sums live on different spaces".into()));
        }
        self.terms.extend(other.terms.iter().cloned());
        Ok(())
    }

    pub(crate) fn push_term(&mut self, term: Term) {
        self.terms.push(term);
    }

    /// Rebuilds the sum on another space through a slot map; terms touching
    /// a dropped slot (`None`) are an error.
    pub fn map_space(&self, space: CompositeSpace, map: impl Fn(usize) -> Option<usize>) -> Result<Self> {
        let mut out = Self::new(space);
        for t in &self.terms {
            let m = t.monomial.try_remap(&map).ok_or_else(|| {
                Error::InvalidArgument(alloc::format!("term `{}` acts on a dropped slot", t.label))
            })?;
            out.push(t.coefficient, m, t.rotation, t.label.clone(), t.kind)?;
        }
        Ok(out)
    }

    pub fn is_static(&self) -> bool {
        self.terms.iter().all(|t| t.rotation == 0.0)
    }

    /// Sum of all terms ignoring rotation, as a polynomial.
    pub fn static_poly(&self) -> Poly {
        let mut p = Poly::zero();
        for t in &self.terms {
            p.add_term(t.coefficient, t.monomial.clone());
        }
        p
    }

    pub fn operator_at(&self, t: f64) -> SparseOperator {
        let dim = self.space.total_dim();
        let trip = self.terms.iter().flat_map(|term| {
            let c = term.coefficient * phase(term.rotation, t);
            term.operator.entries().iter().map(move |&(r, col, v)| (r, col, v * c))
        });
        SparseOperator::from_triplets(dim, trip.collect::<Vec<_>>()).expect("term operators share the space")
    }

    /// Terms merged per distinct rotation frequency.
    pub fn assemble(&self) -> AssembledHamiltonian {
        let mut groups: Vec<(f64, Vec<(usize, usize, Complex64)>)> = Vec::new();
        for term in &self.terms {
            let idx = match groups.iter().position(|g| g.0.to_bits() == term.rotation.to_bits()) {
                Some(i) => i,
                None => {
                    groups.push((term.rotation, Vec::new()));
                    groups.len() - 1
                }
            };
            let c = term.coefficient;
            groups[idx].1.extend(term.operator.entries().iter().map(|&(r, col, v)| (r, col, v * c)));
        }
        let dim = self.space.total_dim();
        AssembledHamiltonian {
            dim,
            parts: groups
                .into_iter()
                .map(|(w, trip)| (w, SparseOperator::from_triplets(dim, trip).expect("in range")))
                .collect(),
        }
    }

    /// Every term must have a partner `(c*, m†, -w)` with matching total coefficient.
    pub fn check_hermitian_pairing(&self, tol: f64) -> Result<()> {
        let scale = self.terms.iter().map(|t| t.coefficient.norm()).fold(0.0, f64::max).max(1.0);
        for t in &self.terms {
            let want = t.monomial.adjoint();
            let mut partner = Complex64::new(0.0, 0.0);
            let mut own = Complex64::new(0.0, 0.0);
            for u in &self.terms {
                if u.monomial == want && (u.rotation + t.rotation).abs() <= tol * scale.max(t.rotation.abs()) {
                    partner += u.coefficient;
                }
                if u.monomial == t.monomial && (u.rotation - t.rotation).abs() <= tol * scale.max(t.rotation.abs()) {
                    own += u.coefficient;
                }
            }
            if (partner - own.conj()).norm() > tol * scale {
                return Err(Error::NotHermitian((partner - own.conj()).norm() / scale));
            }
        }
        Ok(())
    }

    pub fn hermitian_defect_at(&self, t: f64) -> f64 {
        self.operator_at(t).hermitian_defect()
    }

    /// Discrete term signature: (monomial, rotation) pairs sorted.
    pub fn signature(&self) -> Vec<(Monomial, f64)> {
        let mut sig: Vec<(Monomial, f64)> =
            self.terms.iter().map(|t| (t.monomial.clone(), t.rotation)).collect();
        sig.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        sig
    }
}

/// Hamiltonian as `Σ_w e^{-iwt} H_w`.
#[derive(Debug, Clone)]
pub struct AssembledHamiltonian {
    dim: usize,
    parts: Vec<(f64, SparseOperator)>,
}

impl AssembledHamiltonian {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn parts(&self) -> &[(f64, SparseOperator)] {
        &self.parts
    }

    pub fn is_static(&self) -> bool {
        self.parts.iter().all(|p| p.0 == 0.0)
    }

    /// Restriction of every part to the given basis indices.
    pub fn restrict(&self, basis: &[usize]) -> Self {
        Self { dim: basis.len(), parts: self.parts.iter().map(|(w, op)| (*w, op.restrict(basis))).collect() }
    }

    pub fn at(&self, t: f64) -> SparseOperator {
        if self.parts.len() == 1 && self.parts[0].0 == 0.0 {
            return self.parts[0].1.clone();
        }
        let trip: Vec<_> = self
            .parts
            .iter()
            .flat_map(|(w, op)| {
                let c = phase(*w, t);
                op.entries().iter().map(move |&(r, col, v)| (r, col, v * c))
            })
            .collect();
        SparseOperator::from_triplets(self.dim, trip).expect("in range")
    }
}
