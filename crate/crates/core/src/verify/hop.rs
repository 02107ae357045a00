use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{default_stepper, first_maximum, relative_error, Metric, Tolerances, VerificationReport};
use crate::compiler::DriveTone;
use crate::dynamics::{
    default_observables, integrate, linspace, partial_trace, trace_distance, DensityMatrix, IntegrateOptions, Stepper,
};
use crate::error::{Error, Result};
use crate::math::{sqrt, PI};
use crate::models::{build_displaced_coupling, build_effective_hop, damping_dissipators, Coupling, EffectiveParams, MasterEquationModel};
use crate::operators::{CompositeSpace, ModeKind, ModeSpec};
use crate::transforms::{rotate_frame, rwa_filter, to_interaction_picture, ResonanceReport, TermSum};

const ADIABATICITY_WARN: f64 = 0.1;
const ADIABATICITY_LIMIT: f64 = 0.5;

/// Two mechanical modes sharing one damped auxiliary, driven on the red
/// sidebands `ν_n = Ω_b − ω_n − Δω` with amplitudes `β` and `iβ`.
#[derive(Debug, Clone, PartialEq)]
pub struct HopScenario {
    /// Uses `g`, `beta`, `delta_omega` and `kappa`.
    pub params: EffectiveParams,
    pub mech_frequencies: [f64; 2],
    pub aux_frequency: f64,
    pub mech_dim: usize,
    pub aux_dim: usize,
    /// Duration in units of the swap period `π/λ`.
    pub periods: f64,
    pub samples: usize,
    pub stepper: Stepper,
}

impl HopScenario {
    pub fn new(params: EffectiveParams) -> Self {
        Self {
            params,
            mech_frequencies: [20.0, 27.0],
            aux_frequency: 100.0,
            mech_dim: 3,
            aux_dim: 2,
            periods: 1.0,
            samples: 400,
            stepper: default_stepper(),
        }
    }

    /// Scenario with `g|β| / √(Δω² + κ²) = x` and `g = 0.1`.
    pub fn at_adiabaticity(x: f64, delta_omega: f64, kappa: f64) -> Self {
        let g = 0.1;
        let coupling = x * sqrt(delta_omega * delta_omega + kappa * kappa);
        Self::new(EffectiveParams {
            g,
            beta: Complex64::new(coupling / g, 0.0),
            delta_omega,
            kappa,
            ..Default::default()
        })
    }

    pub fn adiabaticity(&self) -> f64 {
        let p = &self.params;
        p.hop_coupling() / sqrt(p.delta_omega * p.delta_omega + p.kappa * p.kappa)
    }

    fn space(&self) -> Result<CompositeSpace> {
        let [w1, w2] = self.mech_frequencies;
        CompositeSpace::new(vec![
            ModeSpec::new("a1", ModeKind::Mechanical, w1, 0.0, self.mech_dim)?,
            ModeSpec::new("a2", ModeKind::Mechanical, w2, 0.0, self.mech_dim)?,
            ModeSpec::new("b", ModeKind::Auxiliary, self.aux_frequency, self.params.kappa, self.aux_dim)?,
        ])
    }
}

/// Zeroes rotation frequencies that differ from zero by rounding only.
pub(crate) fn snap_static(ts: &TermSum, scale: f64) -> Result<TermSum> {
    let mut out = TermSum::new(ts.space().clone());
    for t in ts.terms() {
        let r = if t.rotation.abs() <= 1e-9 * scale { 0.0 } else { t.rotation };
        out.push(t.coefficient, t.monomial.clone(), r, t.label.clone(), t.kind)?;
    }
    Ok(out)
}

/// Lab-frame displaced coupling reduced to the static sideband model:
/// interaction picture, RWA at cutoff `2Δω`, then a frame rotating `b` at `−Δω`.
pub fn hop_full_model(s: &HopScenario) -> Result<(MasterEquationModel, ResonanceReport)> {
    let p = &s.params;
    if !(p.delta_omega > 0.0) {
        return Err(Error::InvalidArgument(format!("hop detuning must be positive, got {}", p.delta_omega)));
    }
    let space = s.space()?;
    let [w1, w2] = s.mech_frequencies;
    let tones = [
        DriveTone::new("b", s.aux_frequency - w1 - p.delta_omega, p.beta),
        DriveTone::new("b", s.aux_frequency - w2 - p.delta_omega, p.beta * Complex64::new(0.0, 1.0)),
    ];
    if tones.iter().any(|t| !(t.frequency > 0.0)) {
        return Err(Error::InvalidArgument("sideband drive frequency must be positive".into()));
    }
    let gs = [Coupling::new("a1", "b", p.g), Coupling::new("a2", "b", p.g)];
    let lab = build_displaced_coupling(&gs, &tones, &space)?;
    let ip = to_interaction_picture(&lab)?;
    let (kept, report) = rwa_filter(&ip, 2.0 * p.delta_omega)?;
    let rotated = rotate_frame(&kept, &[0.0, 0.0, -p.delta_omega])?;
    let rotated = snap_static(&rotated, s.aux_frequency)?;
    if !rotated.is_static() {
        return Err(Error::Unsupported("sideband model is not static in the rotating frame".into()));
    }
    Ok((MasterEquationModel::new(rotated, damping_dissipators(&space)?)?, report))
}

/// Time `λ t*` of the first maximum of `⟨n₂⟩` in the effective hop model
/// started from `|1, 0⟩`, for damping ratio `κ/Δω`.
pub fn swap_time_constant(damping_ratio: f64) -> Result<f64> {
    let r = damping_ratio;
    let p = EffectiveParams {
        g: sqrt(1.0 + r * r),
        beta: Complex64::new(1.0, 0.0),
        delta_omega: 1.0,
        kappa: r,
        ..Default::default()
    };
    let m1 = ModeSpec::new("a1", ModeKind::Mechanical, 1.0, 0.0, 2)?;
    let m2 = ModeSpec::new("a2", ModeKind::Mechanical, 1.0, 0.0, 2)?;
    let model = build_effective_hop(&p, &m1, &m2)?;
    let times = linspace(0.0, PI, 4000);
    let opts = IntegrateOptions::new(Stepper::Adaptive { rtol: 1e-12, atol: 1e-14, max_steps: 10_000_000 })
        .with_observables(default_observables(&model.space)?);
    let r = integrate(&model, &DensityMatrix::fock(&model.space, &[1, 0])?, &times, &opts)?;
    first_maximum(&times, &r.column("n@a2").expect("observable"))
        .ok_or_else(|| Error::Regime(format!("no swap maximum within one period at kappa/delta_omega = {damping_ratio}")))
}

/// Hop check with the default scenario geometry.
pub fn verify_hop(p: &EffectiveParams, tol: &Tolerances) -> Result<VerificationReport> {
    verify_hop_scenario(&HopScenario::new(*p), tol)
}

pub fn verify_hop_scenario(s: &HopScenario, tol: &Tolerances) -> Result<VerificationReport> {
    let p = &s.params;
    p.validate()?;
    let mut report = VerificationReport::new("hop");
    let (lambda, gamma) = p.hop_rates()?;
    let x = s.adiabaticity();
    report.regime.push(("adiabaticity".into(), x));
    report.regime.push(("lambda".into(), lambda));
    report.regime.push(("gamma_prime".into(), gamma));
    if x > ADIABATICITY_LIMIT {
        return Err(Error::Regime(format!("g|beta|/sqrt(dw^2+kappa^2) = {x} exceeds {ADIABATICITY_LIMIT}")));
    }
    if x > ADIABATICITY_WARN {
        report.warnings.push(format!("adiabaticity {x} above {ADIABATICITY_WARN}"));
    }

    let (full, resonance) = hop_full_model(s)?;
    report.warnings.extend(resonance.warnings.iter().cloned());
    report.regime.push(("rwa_min_dropped_detuning".into(), resonance.min_dropped_detuning));
    let space = full.space.clone();
    let effective = build_effective_hop(p, space.mode(0)?, space.mode(1)?)?;

    let duration = if lambda == 0.0 { 1.0 } else { s.periods * PI / lambda };
    let times = linspace(0.0, duration, s.samples);
    let full_opts = IntegrateOptions::new(s.stepper).with_observables(default_observables(&space)?).storing_states();
    let rf = integrate(&full, &DensityMatrix::fock(&space, &[1, 0, 0])?, &times, &full_opts)?;
    let eff_opts =
        IntegrateOptions::new(s.stepper).with_observables(default_observables(&effective.space)?).storing_states();
    let re = integrate(&effective, &DensityMatrix::fock(&effective.space, &[1, 0])?, &times, &eff_opts)?;
    report.regime.push(("top_fock_population".into(), rf.diagnostics.max_top_population));

    let full_states = rf.states.as_ref().expect("stored");
    let eff_states = re.states.as_ref().expect("stored");
    for (a, b) in full_states.iter().zip(eff_states) {
        let (reduced, _) = partial_trace(a, &space, &[0, 1])?;
        report.trace_distance.push(trace_distance(&reduced, b)?);
    }
    report.times = times.clone();
    let limit = if p.kappa == 0.0 { tol.hop_closed_distance } else { tol.hop_distance };
    let dmax = report.max_trace_distance();
    report.push(Metric::at_most("reduced_trace_distance", dmax, limit));

    if lambda != 0.0 {
        let tau = swap_time_constant(p.kappa / p.delta_omega)?;
        let fit = |n2: Vec<f64>| first_maximum(&times, &n2).map(|t| tau / t);
        let lf = fit(rf.column("n@a2").expect("observable"))
            .ok_or_else(|| Error::Regime("full model shows no swap maximum".into()))?;
        let le = fit(re.column("n@a2").expect("observable"))
            .ok_or_else(|| Error::Regime("effective model shows no swap maximum".into()))?;
        report.regime.push(("lambda_fit".into(), lf));
        report.push(Metric::at_most("swap_rate_error", relative_error(lf, lambda), tol.hop_rate));
        report.push(Metric::at_most("fit_self_test", relative_error(le, lambda), tol.fit_self_test));
    }
    report.push_diagnostics("full_", &rf.diagnostics, tol);
    report.push_diagnostics("effective_", &re.diagnostics, tol);
    Ok(report.finish())
}
