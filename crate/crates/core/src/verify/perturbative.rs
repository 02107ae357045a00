use alloc::vec::Vec;

use num_complex::Complex64;

use super::{Metric, Tolerances, VerificationReport};
use crate::dynamics::unitary_exp;
use crate::error::{Error, Result};
use crate::models::{build_intermediate_qubit_model, EffectiveParams};
use crate::operators::{ModeKind, ModeSpec};
use crate::transforms::perturbative_diagonalize;

/// Residuals of `e^S H' e^{−S}` on the interior of the `d`-vacuum sector, in units of `f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbativeResidual {
    pub epsilon: f64,
    /// Largest coupling from the `d = 0` sector to `d = 1`.
    pub off_block: f64,
    /// Largest deviation of the `d = 0` block from the second-order Hamiltonian.
    pub block: f64,
}

/// Conjugates the closed intermediate qubit model by the exponential of its
/// generator. States within three ladder steps of a truncation edge are skipped.
pub fn perturbative_residual(p: &EffectiveParams, mech_dim: usize, pair_dim: usize) -> Result<PerturbativeResidual> {
    const MARGIN: usize = 4;
    if mech_dim <= MARGIN || pair_dim <= MARGIN || p.f == 0.0 {
        return Err(Error::InvalidArgument("need f != 0 and truncations above 4".into()));
    }
    let closed = EffectiveParams { kappa: 0.0, ..*p };
    let mode = ModeSpec::new("a", ModeKind::Mechanical, 1.0, 0.0, mech_dim)?;
    let model = build_intermediate_qubit_model(&closed, &mode, pair_dim)?;
    let diag = perturbative_diagonalize(&model)?;
    let space = &model.space;
    let s = diag.generator.to_operator(space)?;
    let u = unitary_exp(&s.scale(Complex64::new(0.0, 1.0)), 1.0)?;
    let h = model.static_hamiltonian()?.to_dense();
    let ht = &u * h * u.adjoint();
    let h2 = diag.model.static_hamiltonian()?;
    let reduced = &diag.model.space;

    let mut interior = Vec::new();
    let mut excited = Vec::new();
    for idx in 0..space.total_dim() {
        let occ = space.occupations(idx);
        if occ[2] == 0 && occ[0] + MARGIN <= mech_dim && occ[1] + MARGIN <= pair_dim {
            interior.push((idx, reduced.index_of(&occ[..2])?));
        } else if occ[2] == 1 {
            excited.push(idx);
        }
    }
    let scale = p.f.abs();
    let mut off_block = 0.0f64;
    let mut block = 0.0f64;
    for &(i, ri) in &interior {
        for &j in &excited {
            off_block = off_block.max(ht[(i, j)].norm() / scale);
        }
        for &(j, rj) in &interior {
            block = block.max((ht[(i, j)] - h2.get(ri, rj)).norm() / scale);
        }
    }
    Ok(PerturbativeResidual { epsilon: diag.epsilon, off_block, block })
}

/// Residual scaling between `ε` and `ε/2` (`Δ` doubled).
pub fn verify_perturbative(p: &EffectiveParams, tol: &Tolerances) -> Result<VerificationReport> {
    let (mech_dim, pair_dim) = (7, 5);
    let coarse = perturbative_residual(p, mech_dim, pair_dim)?;
    let fine = perturbative_residual(&p.with_qubit(p.f, 2.0 * p.delta), mech_dim, pair_dim)?;
    let mut report = VerificationReport::new("perturbative");
    report.regime.push(("epsilon".into(), coarse.epsilon));
    report.regime.push(("off_block".into(), coarse.off_block));
    report.regime.push(("off_block_halved".into(), fine.off_block));
    report.regime.push(("block".into(), coarse.block));
    report.regime.push(("block_halved".into(), fine.block));
    report.push(Metric::at_least("off_block_ratio", coarse.off_block / fine.off_block, tol.scaling_ratio));
    report.push(Metric::at_least("block_ratio", coarse.block / fine.block, tol.scaling_ratio));
    Ok(report.finish())
}
