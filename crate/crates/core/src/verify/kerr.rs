use alloc::format;
use alloc::vec::Vec;

use nalgebra::DVector;
use num_complex::Complex64;

use super::{relative_error, unwrap_phase, Metric, Tolerances, VerificationReport};
use crate::dynamics::{integrate, linspace, partial_trace, trace_distance, DensityMatrix, IntegrateOptions, Stepper};
use crate::error::{Error, Result};
use crate::math::{atan2, linear_fit, ln, sqrt};
use crate::models::{build_driven_pair_model, build_kerr_effective, EffectiveParams};
use crate::operators::{CompositeSpace, ModeKind, ModeSpec};

const EPSILON_WARN: f64 = 0.2;
const EPSILON_LIMIT: f64 = 1.0;

/// Mechanical mode and a driven supermode pair in the drive frame, slots `[a, c, d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KerrScenario {
    /// Uses `f`, `delta`, `epsilon`, `alpha`, `omega_big` and `kappa`.
    pub params: EffectiveParams,
    pub mech_dim: usize,
    pub c_dim: usize,
    pub d_dim: usize,
    pub d_damping: f64,
    /// Duration as the dimensionless product `|χ| T`.
    pub chi_time: f64,
    pub samples: usize,
    pub stepper: Stepper,
}

impl KerrScenario {
    pub fn new(params: EffectiveParams) -> Self {
        Self {
            params,
            mech_dim: 5,
            c_dim: 3,
            d_dim: 3,
            d_damping: 0.0,
            chi_time: 1.5,
            samples: 300,
            // near-pure states over many fast periods; looser tolerances leak below −1e-8
            stepper: Stepper::Adaptive { rtol: 4e-10, atol: 4e-12, max_steps: 50_000_000 },
        }
    }

    /// `f = 1`, `Δ = 1/ε`, `Ω = 1.8`, `κ = 0.5`, `α = 2`.
    pub fn at_epsilon(epsilon: f64) -> Self {
        let p = EffectiveParams { alpha: 2.0, omega_big: 1.8, kappa: 0.5, ..Default::default() }
            .with_qubit(1.0, 1.0 / epsilon);
        Self::new(p)
    }

    /// Same drive with `Δ` doubled, halving `ε`.
    pub fn halved(&self) -> Self {
        let mut s = self.clone();
        s.params = s.params.with_qubit(self.params.f, 2.0 * self.params.delta);
        s
    }

    fn duration(&self) -> Result<f64> {
        let (chi, _) = self.params.kerr_rates()?;
        Ok(if chi == 0.0 { self.chi_time * 1e3 } else { self.chi_time / chi.abs() })
    }
}

fn arg(z: Complex64) -> f64 {
    atan2(z.im, z.re)
}

/// `arg⟨0|ρ|2⟩ − 2 arg⟨0|ρ|1⟩` of a single-mode state.
pub fn phase_signature(rho: &DensityMatrix) -> f64 {
    arg(rho.get(0, 2)) - 2.0 * arg(rho.get(0, 1))
}

/// `e^{−iδ n t} ρ e^{iδ n t}` for a single mode.
fn co_rotate(rho: &DensityMatrix, delta: f64, t: f64) -> DensityMatrix {
    let mut m = rho.matrix().clone();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let w = -delta * t * (i as f64 - j as f64);
            m[(i, j)] *= Complex64::new(crate::math::cos(w), crate::math::sin(w));
        }
    }
    DensityMatrix::from_matrix_unchecked(m)
}

fn superposition(space: &CompositeSpace) -> Result<DensityMatrix> {
    let mut psi = DVector::zeros(space.total_dim());
    let w = Complex64::new(1.0 / sqrt(3.0), 0.0);
    for n in 0..3 {
        let mut occ = alloc::vec![0; space.len()];
        occ[0] = n;
        psi[space.index_of(&occ)?] = w;
    }
    DensityMatrix::pure(&psi)
}

struct KerrFits {
    slope: f64,
    decay: f64,
}

fn fit(times: &[f64], states: &[DensityMatrix]) -> KerrFits {
    let phases: Vec<f64> = states.iter().map(phase_signature).collect();
    let (slope, _) = linear_fit(times, &unwrap_phase(&phases));
    let logs: Vec<f64> = states.iter().map(|r| ln(r.get(0, 2).norm())).collect();
    let (s, _) = linear_fit(times, &logs);
    KerrFits { slope, decay: -s }
}

pub fn verify_kerr(p: &EffectiveParams, tol: &Tolerances) -> Result<VerificationReport> {
    verify_kerr_scenario(&KerrScenario::new(*p), tol)
}

pub fn verify_kerr_scenario(s: &KerrScenario, tol: &Tolerances) -> Result<VerificationReport> {
    let p = &s.params;
    p.validate()?;
    let mut report = VerificationReport::new("kerr");
    let (chi, gamma) = p.kerr_rates()?;
    report.regime.push(("epsilon".into(), p.epsilon));
    report.regime.push(("chi".into(), chi));
    report.regime.push(("gamma".into(), gamma));
    if p.epsilon.abs() > EPSILON_LIMIT {
        return Err(Error::Regime(format!("|epsilon| = {} exceeds {EPSILON_LIMIT}", p.epsilon.abs())));
    }
    if p.epsilon.abs() > EPSILON_WARN {
        report.warnings.push(format!("|epsilon| = {} above {EPSILON_WARN}", p.epsilon.abs()));
    }

    let mode = ModeSpec::new("a", ModeKind::Mechanical, 1.0, 0.0, s.mech_dim)?;
    let full = build_driven_pair_model(p, &mode, s.c_dim, s.d_dim, s.d_damping)?;
    let effective = build_kerr_effective(p, &mode)?;
    let times = linspace(0.0, s.duration()?, s.samples);
    let opts = IntegrateOptions::new(s.stepper).storing_states();
    let rf = integrate(&full, &superposition(&full.space)?, &times, &opts)?;
    let re = integrate(&effective, &superposition(&effective.space)?, &times, &opts)?;
    report.regime.push(("top_fock_population".into(), rf.diagnostics.max_top_population));

    let mut reduced = Vec::with_capacity(times.len());
    for a in rf.states.as_ref().expect("stored") {
        reduced.push(partial_trace(a, &full.space, &[0])?.0);
    }
    let eff_states = re.states.as_ref().expect("stored");
    // static frequency renormalisation of the mechanical mode, absent from the effective model
    let drift: Vec<f64> = reduced.iter().zip(eff_states).map(|(a, b)| arg(a.get(0, 1)) - arg(b.get(0, 1))).collect();
    let (shift, _) = linear_fit(&times, &unwrap_phase(&drift));
    report.regime.push(("frequency_shift".into(), shift));
    for ((a, b), &t) in reduced.iter().zip(eff_states).zip(&times) {
        report.trace_distance.push(trace_distance(a, &co_rotate(b, shift, t))?);
    }
    report.times = times.clone();

    let ff = fit(&times, &reduced);
    let fe = fit(&times, eff_states);
    report.regime.push(("phase_slope".into(), ff.slope));
    report.regime.push(("coherence_decay".into(), ff.decay));
    report.regime.push(("max_trace_distance".into(), report.max_trace_distance()));
    report.push(Metric::at_most("phase_slope_error", relative_error(ff.slope, 2.0 * chi), tol.kerr_phase));
    report.push(Metric::at_most("dephasing_error", relative_error(ff.decay, 4.0 * gamma), tol.kerr_dephasing));
    report.push(Metric::at_most("fit_self_test", relative_error(fe.slope, 2.0 * chi), tol.fit_self_test));
    report.push_diagnostics("full_", &rf.diagnostics, tol);
    report.push_diagnostics("effective_", &re.diagnostics, tol);
    Ok(report.finish())
}

/// Phase-slope error at `ε` against the same drive at `ε/2`. Carries the
/// metrics of both runs, the second prefixed `halved_`.
pub fn verify_kerr_scaling(s: &KerrScenario, tol: &Tolerances) -> Result<VerificationReport> {
    let coarse = verify_kerr_scenario(s, tol)?;
    let fine = verify_kerr_scenario(&s.halved(), tol)?;
    let err = |r: &VerificationReport| r.metric("phase_slope_error").map(|m| m.value).unwrap_or(f64::NAN);
    let (e1, e2) = (err(&coarse), err(&fine));
    let mut report = VerificationReport::new("kerr_scaling");
    report.metrics.extend(coarse.metrics.iter().cloned());
    for m in &fine.metrics {
        report.push(Metric { name: format!("halved_{}", m.name), ..m.clone() });
    }
    report.times = coarse.times.clone();
    report.trace_distance = coarse.trace_distance.clone();
    report.regime.push(("epsilon".into(), s.params.epsilon));
    report.regime.push(("phase_error".into(), e1));
    report.regime.push(("phase_error_halved".into(), e2));
    report.warnings.extend(coarse.warnings);
    report.warnings.extend(fine.warnings);
    let ratio = if e2 == 0.0 { f64::INFINITY } else { e1 / e2 };
    report.push(Metric::at_least("phase_error_ratio", ratio, tol.scaling_ratio));
    Ok(report.finish())
}
