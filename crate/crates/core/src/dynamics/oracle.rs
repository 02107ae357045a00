use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::state::DensityMatrix;
use crate::error::{Error, Result};
use crate::math;
use crate::operators::SparseOperator;

const HERMITIAN_TOL: f64 = 1e-10;

/// Exact closed-system evolution `U(t) = V e^{−iEt} V†` for a static Hamiltonian.
#[derive(Debug, Clone)]
pub struct ClosedPropagator {
    energies: Vec<f64>,
    vectors: DMatrix<Complex64>,
}

impl ClosedPropagator {
    pub fn new(h: &SparseOperator) -> Result<Self> {
        let scale = h.max_abs().max(1e-300);
        let defect = h.hermitian_defect();
        if defect > HERMITIAN_TOL * scale.max(1.0) {
            return Err(Error::NotHermitian(defect / scale));
        }
        let mut dense = h.to_dense();
        let n = dense.nrows();
        for j in 0..n {
            for i in 0..j {
                let v = 0.5 * (dense[(i, j)] + dense[(j, i)].conj());
                dense[(i, j)] = v;
                dense[(j, i)] = v.conj();
            }
            dense[(j, j)].im = 0.0;
        }
        let eig = SymmetricEigen::new(dense);
        Ok(Self { energies: eig.eigenvalues.iter().copied().collect(), vectors: eig.eigenvectors })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Eigenvectors as columns, in the order of `energies`.
    pub fn vectors(&self) -> &DMatrix<Complex64> {
        &self.vectors
    }

    pub fn unitary(&self, t: f64) -> DMatrix<Complex64> {
        let mut vd = self.vectors.clone();
        for (k, &e) in self.energies.iter().enumerate() {
            let ph = Complex64::new(math::cos(e * t), -math::sin(e * t));
            for i in 0..vd.nrows() {
                vd[(i, k)] *= ph;
            }
        }
        vd * self.vectors.adjoint()
    }

    pub fn evolve_vector(&self, psi: &DVector<Complex64>, t: f64) -> Result<DVector<Complex64>> {
        if psi.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: psi.len() });
        }
        let mut c = self.vectors.adjoint() * psi;
        for (k, &e) in self.energies.iter().enumerate() {
            c[k] *= Complex64::new(math::cos(e * t), -math::sin(e * t));
        }
        Ok(&self.vectors * c)
    }

    pub fn evolve(&self, rho: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: rho.dim() });
        }
        let u = self.unitary(t);
        Ok(DensityMatrix::from_matrix_unchecked(&u * rho.matrix() * u.adjoint()))
    }
}

/// `e^{−iKt}` for a Hermitian `K`.
pub fn unitary_exp(k: &SparseOperator, t: f64) -> Result<DMatrix<Complex64>> {
    Ok(ClosedPropagator::new(k)?.unitary(t))
}

/// States `U(t) ρ0 U(t)†` at each requested time.
pub fn propagate_closed_oracle(h: &SparseOperator, rho0: &DensityMatrix, times: &[f64]) -> Result<Vec<DensityMatrix>> {
    let p = ClosedPropagator::new(h)?;
    times.iter().map(|&t| p.evolve(rho0, t)).collect()
}
