use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math::sqrt;
use crate::operators::CompositeSpace;

/// Dense density matrix with trace, Hermiticity and positivity checked on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<Complex64>,
}

pub const TRACE_TOL: f64 = 1e-9;
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-8;

impl DensityMatrix {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        let rho = Self { matrix };
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidArgument(alloc::format!("density matrix trace {tr} is not 1")));
        }
        let h = rho.hermitian_defect();
        if h > HERMITIAN_TOL {
            return Err(Error::NotHermitian(h));
        }
        let e = rho.min_eigenvalue();
        if e < -POSITIVITY_TOL {
            return Err(Error::InvalidArgument(alloc::format!("density matrix has eigenvalue {e}")));
        }
        Ok(rho)
    }

    /// Wraps a matrix without checks; used for intermediate integrator states.
    pub fn from_matrix_unchecked(matrix: DMatrix<Complex64>) -> Self {
        Self { matrix }
    }

    /// `|ψ⟩⟨ψ|` after normalizing `ψ`.
    pub fn pure(psi: &DVector<Complex64>) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::InvalidArgument("zero state vector".into()));
        }
        let v = psi.unscale(norm);
        Ok(Self { matrix: &v * v.adjoint() })
    }

    pub fn fock(space: &CompositeSpace, occupations: &[usize]) -> Result<Self> {
        let mut psi = DVector::zeros(space.total_dim());
        psi[space.index_of(occupations)?] = Complex64::new(1.0, 0.0);
        Self::pure(&psi)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: DMatrix::identity(dim, dim).unscale(dim as f64) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// `max|ρ − ρ†|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..=j {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[(i, j)]
    }
}

/// Eigenvalues of the Hermitian part of `m`.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let h = (m + m.adjoint()).scale(0.5);
    SymmetricEigen::new(h).eigenvalues.iter().copied().collect()
}

fn check_same(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(())
}

/// `½‖ρ₁ − ρ₂‖₁`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    check_same(a, b)?;
    let d = &a.matrix - &b.matrix;
    let s: f64 = hermitian_eigenvalues(&d).iter().map(|x| x.abs()).sum();
    Ok((0.5 * s).clamp(0.0, 1.0))
}

/// Uhlmann fidelity `(tr √(√ρ₁ ρ₂ √ρ₁))²`.
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    check_same(a, b)?;
    let h = (&a.matrix + a.matrix.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(h);
    let roots = eig.eigenvalues.map(|x| Complex64::new(sqrt(x.max(0.0)), 0.0));
    let v = &eig.eigenvectors;
    let sqrt_a = v * DMatrix::from_diagonal(&roots) * v.adjoint();
    let m = &sqrt_a * &b.matrix * &sqrt_a;
    let s: f64 = hermitian_eigenvalues(&m).iter().map(|x| sqrt(x.max(0.0))).sum();
    Ok((s * s).clamp(0.0, 1.0))
}

/// Reduced state on `keep` (kept slots stay in ascending order).
pub fn partial_trace(
    rho: &DensityMatrix,
    space: &CompositeSpace,
    keep: &[usize],
) -> Result<(DensityMatrix, CompositeSpace)> {
    if rho.dim() != space.total_dim() {
        return Err(Error::DimensionMismatch { expected: space.total_dim(), found: rho.dim() });
    }
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    for &s in &keep {
        space.mode(s)?;
    }
    let sub = space.subspace(&keep)?;
    let traced: Vec<usize> = (0..space.len()).filter(|s| !keep.contains(s)).collect();
    let env = space.subspace(&traced).map(|s| s.total_dim()).unwrap_or(1);
    let n = space.total_dim();
    // split each composite index into (kept index, environment index)
    let mut split = Vec::with_capacity(n);
    let dims = space.dims();
    for idx in 0..n {
        let occ = space.occupations(idx);
        let (mut k, mut e) = (0usize, 0usize);
        for s in 0..dims.len() {
            if keep.contains(&s) {
                k = k * dims[s] + occ[s];
            } else {
                e = e * dims[s] + occ[s];
            }
        }
        split.push((k, e));
    }
    let mut by_env: Vec<Vec<(usize, usize)>> = alloc::vec![Vec::new(); env.max(1)];
    for (idx, &(k, e)) in split.iter().enumerate() {
        by_env[e].push((k, idx));
    }
    let d = sub.total_dim();
    let mut out = DMatrix::zeros(d, d);
    for group in &by_env {
        for &(ki, i) in group {
            for &(kj, j) in group {
                out[(ki, kj)] += rho.matrix[(i, j)];
            }
        }
    }
    Ok((DensityMatrix::from_matrix_unchecked(out), sub))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::FRAC_1_SQRT_2;
    use crate::operators::{ModeKind, ModeSpec};
    use alloc::vec;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn qubit_space(n: usize) -> CompositeSpace {
        let modes = (0..n)
            .map(|i| ModeSpec::new(alloc::format!("q{i}"), ModeKind::Mechanical, 1.0, 0.0, 2).unwrap())
            .collect();
        CompositeSpace::new(modes).unwrap()
    }

    #[test]
    fn metrics_on_simple_states() {
        let zero = DensityMatrix::pure(&DVector::from_vec(vec![c(1.0), c(0.0)])).unwrap();
        let one = DensityMatrix::pure(&DVector::from_vec(vec![c(0.0), c(1.0)])).unwrap();
        let plus = DensityMatrix::pure(&DVector::from_vec(vec![c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)])).unwrap();
        assert!(trace_distance(&zero, &zero).unwrap() < 1e-15);
        assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-12);
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity(&zero, &one).unwrap() < 1e-12);
        // pure states: D = sqrt(1 - |<a|b>|^2) = 1/sqrt(2)
        assert!((trace_distance(&zero, &plus).unwrap() - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((fidelity(&zero, &plus).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bell_state_reduces_to_mixed() {
        let s = qubit_space(2);
        let mut psi = DVector::zeros(4);
        psi[0] = c(1.0);
        psi[3] = c(1.0);
        let rho = DensityMatrix::pure(&psi).unwrap();
        let (red, sub) = partial_trace(&rho, &s, &[1]).unwrap();
        assert_eq!(sub.len(), 1);
        assert!((red.matrix() - DMatrix::identity(2, 2).scale(0.5)).norm() < 1e-15);
    }

    #[test]
    fn product_state_factor_recovered() {
        let s = qubit_space(3);
        let rho = DensityMatrix::fock(&s, &[1, 0, 1]).unwrap();
        let (red, _) = partial_trace(&rho, &s, &[0, 2]).unwrap();
        let want = DensityMatrix::fock(&qubit_space(2), &[1, 1]).unwrap();
        assert_eq!(red.matrix(), want.matrix());
        assert!((red.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_states_rejected() {
        assert!(DensityMatrix::new(DMatrix::identity(2, 2)).is_err());
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 0)] = c(1.5);
        m[(1, 1)] = c(-0.5);
        assert!(DensityMatrix::new(m).is_err());
        assert!(partial_trace(&DensityMatrix::maximally_mixed(4), &qubit_space(2), &[5]).is_err());
    }
}
