//! End-to-end checks of the effective models against the driven models they
//! are derived from.

mod composite;
mod hop;
mod kerr;
mod perturbative;
mod scaling;

use alloc::string::String;
use alloc::vec::Vec;

pub use composite::{composite_hardware, verify_bose_hubbard_composite, CompositeModels, CompositeScenario};
pub use hop::{hop_full_model, swap_time_constant, verify_hop, verify_hop_scenario, HopScenario};
pub use kerr::{phase_signature, verify_kerr, verify_kerr_scaling, verify_kerr_scenario, KerrScenario};
pub use perturbative::{perturbative_residual, verify_perturbative, PerturbativeResidual};
pub use scaling::{run_point, scaling_study, scaling_table, ScalingParameter, ScalingRow, ScalingTable};

use crate::dynamics::{Diagnostics, Stepper};

/// Pass thresholds shared by all scenarios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative error of the fitted swap rate.
    pub hop_rate: f64,
    /// Reduced-state trace distance of the hop scenario.
    pub hop_distance: f64,
    /// Same, closed system.
    pub hop_closed_distance: f64,
    /// Relative error of the Kerr phase-signature slope.
    pub kerr_phase: f64,
    /// Relative error of the coherence decay rate.
    pub kerr_dephasing: f64,
    /// Relative error of composite dressed-level spacings.
    pub composite_frequency: f64,
    pub composite_distance: f64,
    /// Minimum error reduction when the small parameter halves.
    pub scaling_ratio: f64,
    /// Slack allowed on monotone error decrease.
    pub monotone_margin: f64,
    pub fit_self_test: f64,
    pub trace_drift: f64,
    pub min_eigenvalue: f64,
    pub top_population: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hop_rate: 0.05,
            hop_distance: 0.05,
            hop_closed_distance: 0.02,
            kerr_phase: 0.10,
            kerr_dephasing: 0.15,
            composite_frequency: 0.10,
            composite_distance: 0.10,
            scaling_ratio: 3.0,
            monotone_margin: 0.05,
            fit_self_test: 1e-3,
            trace_drift: 1e-9,
            min_eigenvalue: -1e-8,
            top_population: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub bound: Bound,
    pub pass: bool,
}

impl Metric {
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, limit, bound: Bound::AtMost, pass: value <= limit }
    }

    pub fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, limit, bound: Bound::AtLeast, pass: value >= limit }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerificationReport {
    pub name: String,
    pub metrics: Vec<Metric>,
    /// Sample times of the state comparison.
    pub times: Vec<f64>,
    /// Reduced-state trace distance between the two models at each time.
    pub trace_distance: Vec<f64>,
    /// Small parameters and other regime indicators.
    pub regime: Vec<(String, f64)>,
    pub warnings: Vec<String>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn new(name: &str) -> Self {
        Self { name: name.into(), ..Default::default() }
    }

    pub fn push(&mut self, m: Metric) {
        self.metrics.push(m);
    }

    pub fn metric(&self, name: &str) -> Option<&Metric> {
        self.metrics.iter().find(|m| m.name == name)
    }

    pub fn max_trace_distance(&self) -> f64 {
        self.trace_distance.iter().copied().fold(0.0, f64::max)
    }

    pub fn regime_value(&self, name: &str) -> Option<f64> {
        self.regime.iter().find(|r| r.0 == name).map(|r| r.1)
    }

    /// Adds the dynamics invariants of one integration run.
    pub fn push_diagnostics(&mut self, prefix: &str, d: &Diagnostics, tol: &Tolerances) {
        self.push(Metric::at_most(&alloc::format!("{prefix}trace_drift"), d.max_trace_drift, tol.trace_drift));
        self.push(Metric::at_least(&alloc::format!("{prefix}min_eigenvalue"), d.min_eigenvalue, tol.min_eigenvalue));
        self.push(Metric::at_most(&alloc::format!("{prefix}top_fock_population"), d.max_top_population, tol.top_population));
        self.warnings.extend(d.warnings.iter().cloned());
    }

    pub fn finish(mut self) -> Self {
        self.pass = self.metrics.iter().all(|m| m.pass);
        self
    }
}

/// Default stepper of the verification runs.
pub fn default_stepper() -> Stepper {
    Stepper::Adaptive { rtol: 1e-8, atol: 1e-10, max_steps: 20_000_000 }
}

/// Time of the first local maximum of `y`, refined by a parabola through the
/// three samples around it. `None` if `y` never turns over.
pub fn first_maximum(t: &[f64], y: &[f64]) -> Option<f64> {
    for i in 1..y.len().saturating_sub(1) {
        if y[i] > y[i - 1] && y[i] >= y[i + 1] {
            let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
            let h = t[i + 1] - t[i];
            let den = y0 - 2.0 * y1 + y2;
            let shift = if den == 0.0 { 0.0 } else { 0.5 * (y0 - y2) / den };
            return Some(t[i] + shift * h);
        }
    }
    None
}

/// Unwraps a phase series so consecutive samples differ by less than π.
pub fn unwrap_phase(phases: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phases.len());
    let mut offset = 0.0;
    for (i, &p) in phases.iter().enumerate() {
        if i > 0 {
            let prev = phases[i - 1];
            offset -= crate::math::TAU * crate::math::round((p - prev) / crate::math::TAU);
        }
        out.push(p + offset);
    }
    out
}

fn relative_error(value: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        value.abs()
    } else {
        (value - reference).abs() / reference.abs()
    }
}
