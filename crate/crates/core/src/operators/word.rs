//! Symbolic bosonic ladder algebra in normal order.
//!
//! A [`Monomial`] is a product over slots of `(a_s†)^m (a_s)^n`; a [`Poly`]
//! is a complex combination of monomials. Products are normal ordered with
//! the exact canonical commutation relation, so identities such as
//! `a a† = a†a + 1` hold symbolically even though they fail at the edge of a
//! truncated Fock space. Matrices are only produced by [`Poly::to_operator`].

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use num_complex::Complex64;

use super::{CompositeSpace, SparseOperator};
use crate::error::{Error, Result};
use crate::math::sqrt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Create(usize),
    Annihilate(usize),
}

/// Normal-ordered product; entries `(slot, creations, annihilations)` sorted by slot.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<(usize, u32, u32)>);

impl Monomial {
    pub fn identity() -> Self {
        Self(Vec::new())
    }

    pub fn from_powers(mut powers: Vec<(usize, u32, u32)>) -> Self {
        powers.retain(|p| p.1 + p.2 > 0);
        powers.sort_unstable_by_key(|p| p.0);
        let mut merged: Vec<(usize, u32, u32)> = Vec::new();
        for p in powers {
            match merged.last() {
                Some(last) if last.0 == p.0 => panic!("slot {} listed twice in a monomial", p.0),
                _ => merged.push(p),
            }
        }
        Self(merged)
    }

    pub fn powers(&self) -> &[(usize, u32, u32)] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    /// (creations, annihilations) on one slot.
    pub fn power_of(&self, slot: usize) -> (u32, u32) {
        self.0.iter().find(|p| p.0 == slot).map(|p| (p.1, p.2)).unwrap_or((0, 0))
    }

    pub fn touches(&self, slot: usize) -> bool {
        self.0.iter().any(|p| p.0 == slot)
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.iter().map(|&(s, m, n)| (s, n, m)).collect())
    }

    /// True when the monomial is a function of number operators only.
    pub fn is_diagonal(&self) -> bool {
        self.0.iter().all(|p| p.1 == p.2)
    }

    /// Single number operator `a_s† a_s`, if that is what this is.
    pub fn as_number(&self) -> Option<usize> {
        match self.0.as_slice() {
            [(s, 1, 1)] => Some(*s),
            _ => None,
        }
    }

    /// Σ_s (annihilations - creations) * freq_s.
    pub fn frequency_balance(&self, freqs: &[f64]) -> f64 {
        self.0.iter().map(|&(s, m, n)| (n as f64 - m as f64) * freqs[s]).sum()
    }

    pub fn describe(&self, space: Option<&CompositeSpace>) -> String {
        if self.0.is_empty() {
            return "1".into();
        }
        let mut out = String::new();
        for &(s, m, n) in &self.0 {
            let name = space
                .and_then(|sp| sp.mode(s).ok())
                .map(|md| md.label.clone())
                .unwrap_or_else(|| alloc::format!("#{s}"));
            for (pow, dag) in [(m, "†"), (n, "")] {
                match pow {
                    0 => {}
                    1 => {
                        let _ = write!(out, "{name}{dag}");
                    }
                    p => {
                        let _ = write!(out, "{name}{dag}^{p}");
                    }
                }
            }
        }
        out
    }

    /// Renames slots; `None` from `f` drops the whole monomial.
    pub fn try_remap(&self, f: impl Fn(usize) -> Option<usize>) -> Option<Self> {
        let powers = self.0.iter().map(|&(s, m, n)| f(s).map(|t| (t, m, n))).collect::<Option<Vec<_>>>()?;
        Some(Self::from_powers(powers))
    }

    fn remap(&self, f: &impl Fn(usize) -> usize) -> Self {
        Self::from_powers(self.0.iter().map(|&(s, m, n)| (f(s), m, n)).collect())
    }

    /// Matrix of the monomial on `space`; states pushed past a truncation are dropped.
    pub fn to_operator(&self, space: &CompositeSpace) -> Result<SparseOperator> {
        for &(s, _, _) in &self.0 {
            space.mode(s)?;
        }
        let dims = space.dims();
        let mut strides = alloc::vec![1usize; dims.len()];
        for s in (0..dims.len().saturating_sub(1)).rev() {
            strides[s] = strides[s + 1] * dims[s + 1];
        }
        let mut trip = Vec::new();
        'cols: for col in 0..space.total_dim() {
            let mut row = col;
            let mut amp = 1.0;
            for &(s, m, n) in &self.0 {
                let k = (col / strides[s]) % dims[s];
                if (k as u32) < n {
                    continue 'cols;
                }
                let mid = k - n as usize;
                let out = mid + m as usize;
                if out >= dims[s] {
                    continue 'cols;
                }
                amp *= sqrt(falling(k, n) * falling(out, m));
                row = row - k * strides[s] + out * strides[s];
            }
            trip.push((row, col, Complex64::new(amp, 0.0)));
        }
        SparseOperator::from_triplets(space.total_dim(), trip)
    }
}

/// k (k-1) .. (k-p+1)
fn falling(k: usize, p: u32) -> f64 {
    (0..p as usize).map(|i| (k - i) as f64).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Normal-ordered product of two monomials as (coefficient, monomial) terms.
fn monomial_product(x: &Monomial, y: &Monomial) -> Vec<(f64, Monomial)> {
    let mut slots: Vec<usize> = x.0.iter().chain(y.0.iter()).map(|p| p.0).collect();
    slots.sort_unstable();
    slots.dedup();
    let mut acc: Vec<(f64, Vec<(usize, u32, u32)>)> = alloc::vec![(1.0, Vec::new())];
    for s in slots {
        let (m1, n1) = x.power_of(s);
        let (m2, n2) = y.power_of(s);
        // a^{n1} a†^{m2} = Σ_k C(n1,k) C(m2,k) k! a†^{m2-k} a^{n1-k}
        let options: Vec<(f64, u32, u32)> = (0..=n1.min(m2))
            .map(|k| {
                (binomial(n1, k) * binomial(m2, k) * factorial(k), m1 + m2 - k, n1 + n2 - k)
            })
            .collect();
        let mut next = Vec::with_capacity(acc.len() * options.len());
        for (c, pw) in &acc {
            for &(w, m, n) in &options {
                let mut p = pw.clone();
                p.push((s, m, n));
                next.push((c * w, p));
            }
        }
        acc = next;
    }
    acc.into_iter().map(|(c, p)| (c, Monomial::from_powers(p))).collect()
}

/// Complex combination of normal-ordered monomials.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Poly(BTreeMap<Monomial, Complex64>);

impl Poly {
    pub fn zero() -> Self {
        Self(BTreeMap::new())
    }

    pub fn constant(c: Complex64) -> Self {
        Self::term(c, Monomial::identity())
    }

    pub fn term(c: Complex64, m: Monomial) -> Self {
        let mut p = Self::zero();
        p.add_term(c, m);
        p
    }

    pub fn ladder(l: Ladder) -> Self {
        let m = match l {
            Ladder::Create(s) => Monomial::from_powers(alloc::vec![(s, 1, 0)]),
            Ladder::Annihilate(s) => Monomial::from_powers(alloc::vec![(s, 0, 1)]),
        };
        Self::term(Complex64::new(1.0, 0.0), m)
    }

    pub fn a(slot: usize) -> Self {
        Self::ladder(Ladder::Annihilate(slot))
    }

    pub fn adag(slot: usize) -> Self {
        Self::ladder(Ladder::Create(slot))
    }

    pub fn number(slot: usize) -> Self {
        Self::term(Complex64::new(1.0, 0.0), Monomial::from_powers(alloc::vec![(slot, 1, 1)]))
    }

    /// Ordered product of ladder operators.
    pub fn word(ladders: &[Ladder]) -> Self {
        ladders
            .iter()
            .fold(Self::constant(Complex64::new(1.0, 0.0)), |acc, &l| acc.mul(&Self::ladder(l)))
    }

    pub fn add_term(&mut self, c: Complex64, m: Monomial) {
        let e = self.0.entry(m).or_insert(Complex64::new(0.0, 0.0));
        *e += c;
        // keep the map canonical
        let zero = e.norm() == 0.0;
        if zero {
            self.0.retain(|_, v| v.norm() != 0.0);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Complex64)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> Complex64 {
        self.0.get(m).copied().unwrap_or_default()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.0 {
            out.add_term(*c, m.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.0 {
            out.add_term(c * s, m.clone());
        }
        out
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &other.0 {
                for (w, m) in monomial_product(m1, m2) {
                    out.add_term(c1 * c2 * w, m);
                }
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::constant(Complex64::new(1.0, 0.0)), |acc, _| acc.mul(self))
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.0 {
            out.add_term(c.conj(), m.adjoint());
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    /// Largest coefficient magnitude of `self - self†`.
    pub fn hermitian_defect(&self) -> f64 {
        self.sub(&self.adjoint()).0.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_coefficient(&self) -> f64 {
        self.0.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Drops coefficients below `tol`.
    pub fn chop(&self, tol: f64) -> Self {
        Self(self.0.iter().filter(|(_, c)| c.norm() > tol).map(|(m, c)| (m.clone(), *c)).collect())
    }

    pub fn touches(&self, slot: usize) -> bool {
        self.0.keys().any(|m| m.touches(slot))
    }

    /// Vacuum projection of one slot: keeps monomials that do not act on it.
    pub fn project_vacuum(&self, slot: usize) -> Self {
        Self(self.0.iter().filter(|(m, _)| !m.touches(slot)).map(|(m, c)| (m.clone(), *c)).collect())
    }

    /// Renames slots through `f`.
    pub fn remap_slots(&self, f: impl Fn(usize) -> usize) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.0 {
            out.add_term(*c, m.remap(&f));
        }
        out
    }

    /// Replaces the annihilation operator of each slot in `images` by the
    /// given polynomial (creation operators by its adjoint).
    pub fn substitute(&self, images: &BTreeMap<usize, Poly>) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let mut out = Self::zero();
        for (m, c) in &self.0 {
            let mut acc = Self::constant(*c);
            for &(s, cr, an) in m.powers() {
                let factor = match images.get(&s) {
                    Some(img) => img.adjoint().pow(cr).mul(&img.pow(an)),
                    None => Self::term(one, Monomial::from_powers(alloc::vec![(s, cr, an)])),
                };
                acc = acc.mul(&factor);
            }
            out = out.add(&acc);
        }
        out
    }

    pub fn to_operator(&self, space: &CompositeSpace) -> Result<SparseOperator> {
        let mut trip = Vec::new();
        for (m, c) in &self.0 {
            let op = m.to_operator(space)?;
            trip.extend(op.entries().iter().map(|&(r, col, v)| (r, col, v * c)));
        }
        SparseOperator::from_triplets(space.total_dim(), trip)
    }

    /// Largest slot index referenced, if any.
    pub fn max_slot(&self) -> Option<usize> {
        self.0.keys().flat_map(|m| m.powers().iter().map(|p| p.0)).max()
    }

    pub fn check_slots(&self, space: &CompositeSpace) -> Result<()> {
        match self.max_slot() {
            Some(s) if s >= space.len() => Err(Error::SlotOutOfRange { slot: s, modes: space.len() }),
            _ => Ok(()),
        }
    }

    pub fn describe(&self, space: Option<&CompositeSpace>) -> String {
        let mut out = String::new();
        for (i, (m, c)) in self.0.iter().enumerate() {
            if i > 0 {
                out.push_str(" + ");
            }
            let _ = write!(out, "({:.6}{:+.6}i) {}", c.re, c.im, m.describe(space));
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}
