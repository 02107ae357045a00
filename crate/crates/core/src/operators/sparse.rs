use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex square matrix in canonical coordinate-list form.
///
/// Entries are sorted row-major, deduplicated, and exact zeros are dropped,
/// so two operators are equal exactly when their entry lists are equal.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    dim: usize,
    entries: Vec<(usize, usize, Complex64)>,
    hermitian_hint: Option<bool>,
}

impl PartialEq for SparseOperator {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.entries == other.entries
    }
}

impl SparseOperator {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: Vec::new(), hermitian_hint: Some(true) }
    }

    pub fn identity(dim: usize) -> Self {
        let entries = (0..dim).map(|i| (i, i, Complex64::new(1.0, 0.0))).collect();
        Self { dim, entries, hermitian_hint: Some(true) }
    }

    pub fn diagonal<I: IntoIterator<Item = Complex64>>(values: I) -> Self {
        let values: Vec<_> = values.into_iter().collect();
        let dim = values.len();
        Self::from_triplets(dim, values.into_iter().enumerate().map(|(i, v)| (i, i, v)))
            .expect("diagonal indices are in range")
    }

    /// Builds an operator from arbitrary triplets; duplicates are summed.
    pub fn from_triplets<I>(dim: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Complex64)>,
    {
        let mut entries: Vec<_> = triplets.into_iter().collect();
        if let Some(&(r, c, _)) = entries.iter().find(|(r, c, _)| *r >= dim || *c >= dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: r.max(c) + 1 });
        }
        entries.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut merged: Vec<(usize, usize, Complex64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|e| e.2 != Complex64::new(0.0, 0.0));
        Ok(Self { dim, entries: merged, hermitian_hint: None })
    }

    pub fn from_dense(m: &DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        let dim = m.nrows();
        let mut trip = Vec::new();
        for r in 0..dim {
            for c in 0..dim {
                let v = m[(r, c)];
                if v != Complex64::new(0.0, 0.0) {
                    trip.push((r, c, v));
                }
            }
        }
        Self::from_triplets(dim, trip)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, Complex64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn hermitian_hint(&self) -> Option<bool> {
        self.hermitian_hint
    }

    /// Marks the operator as Hermitian after checking it.
    pub fn with_hermitian_hint(mut self) -> Result<Self> {
        let defect = self.hermitian_defect();
        if defect > 1e-12 {
            return Err(Error::NotHermitian(defect));
        }
        self.hermitian_hint = Some(true);
        Ok(self)
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries
            .binary_search_by(|e| (e.0, e.1).cmp(&(row, col)))
            .map(|i| self.entries[i].2)
            .unwrap_or_default()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.2.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        crate::math::sqrt(self.entries.iter().map(|e| e.2.norm_sqr()).sum())
    }

    /// max|M - M†| / max|M|, or 0 for the zero operator.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let diff = self.sub_checked(&self.adjoint()).expect("same dimension");
        diff.max_abs() / scale
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.hermitian_defect() <= rel_tol
    }

    pub fn adjoint(&self) -> Self {
        let trip = self.entries.iter().map(|&(r, c, v)| (c, r, v.conj()));
        let mut out = Self::from_triplets(self.dim, trip).expect("indices in range");
        out.hermitian_hint = self.hermitian_hint;
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let trip = self.entries.iter().map(|&(r, c, v)| (r, c, v * s));
        Self::from_triplets(self.dim, trip).expect("indices in range")
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }

    pub fn add_checked(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let trip = self.entries.iter().chain(other.entries.iter()).copied();
        Self::from_triplets(self.dim, trip)
    }

    pub fn sub_checked(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let trip = self
            .entries
            .iter()
            .copied()
            .chain(other.entries.iter().map(|&(r, c, v)| (r, c, -v)));
        Self::from_triplets(self.dim, trip)
    }

    /// Row start offsets into `entries` (length dim + 1).
    fn row_offsets(&self) -> Vec<usize> {
        let mut offsets = alloc::vec![0usize; self.dim + 1];
        for e in &self.entries {
            offsets[e.0 + 1] += 1;
        }
        for i in 0..self.dim {
            offsets[i + 1] += offsets[i];
        }
        offsets
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let offsets = other.row_offsets();
        let mut trip = Vec::new();
        for &(r, k, a) in &self.entries {
            for &(_, c, b) in &other.entries[offsets[k]..offsets[k + 1]] {
                trip.push((r, c, a * b));
            }
        }
        Self::from_triplets(self.dim, trip)
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.sub_checked(&other.matmul(self)?)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let dim = self.dim * other.dim;
        let mut trip = Vec::with_capacity(self.nnz() * other.nnz());
        for &(r1, c1, v1) in &self.entries {
            for &(r2, c2, v2) in &other.entries {
                trip.push((r1 * other.dim + r2, c1 * other.dim + c2, v1 * v2));
            }
        }
        Self::from_triplets(dim, trip).expect("indices in range")
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.iter().filter(|e| e.0 == e.1).map(|e| e.2).sum()
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        let mut out = DVector::zeros(self.dim);
        for &(r, c, a) in &self.entries {
            out[r] += a * v[c];
        }
        out
    }

    /// `out += s * self * m` for a dense square `m`.
    pub fn mul_dense_left_acc(&self, m: &DMatrix<Complex64>, s: Complex64, out: &mut DMatrix<Complex64>) {
        let n = m.ncols();
        for &(r, k, a) in &self.entries {
            let sa = s * a;
            for j in 0..n {
                out[(r, j)] += sa * m[(k, j)];
            }
        }
    }

    /// `out += s * m * self` for a dense square `m`.
    pub fn mul_dense_right_acc(&self, m: &DMatrix<Complex64>, s: Complex64, out: &mut DMatrix<Complex64>) {
        let n = m.nrows();
        let src = m.as_slice();
        let dst = out.as_mut_slice();
        for &(k, c, a) in &self.entries {
            let sa = s * a;
            for (d, x) in dst[c * n..(c + 1) * n].iter_mut().zip(&src[k * n..(k + 1) * n]) {
                *d += sa * x;
            }
        }
    }

    /// Expectation value tr(self * rho).
    pub fn expectation(&self, rho: &DMatrix<Complex64>) -> Complex64 {
        self.entries.iter().map(|&(r, c, a)| a * rho[(c, r)]).sum()
    }

    /// Restriction to the given basis indices (in order).
    pub fn restrict(&self, basis: &[usize]) -> Self {
        let mut pos = alloc::collections::BTreeMap::new();
        for (i, &b) in basis.iter().enumerate() {
            pos.insert(b, i);
        }
        let trip = self.entries.iter().filter_map(|&(r, c, v)| {
            Some((*pos.get(&r)?, *pos.get(&c)?, v))
        });
        Self::from_triplets(basis.len(), trip).expect("indices in range")
    }

    /// Entrywise comparison; largest absolute difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub_checked(other)?.max_abs())
    }
}

impl Add for &SparseOperator {
    type Output = SparseOperator;
    fn add(self, rhs: Self) -> SparseOperator {
        self.add_checked(rhs).expect("operator dimensions must match")
    }
}

impl Sub for &SparseOperator {
    type Output = SparseOperator;
    fn sub(self, rhs: Self) -> SparseOperator {
        self.sub_checked(rhs).expect("operator dimensions must match")
    }
}

impl Mul for &SparseOperator {
    type Output = SparseOperator;
    fn mul(self, rhs: Self) -> SparseOperator {
        self.matmul(rhs).expect("operator dimensions must match")
    }
}

impl Neg for &SparseOperator {
    type Output = SparseOperator;
    fn neg(self) -> SparseOperator {
        self.scale_real(-1.0)
    }
}
