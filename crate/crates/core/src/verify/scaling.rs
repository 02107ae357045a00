use alloc::vec::Vec;

use super::{verify_hop_scenario, verify_kerr_scenario, HopScenario, KerrScenario, Tolerances, VerificationReport};
use crate::error::{Error, Result};
use crate::math::{linear_fit, ln};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingParameter {
    /// `ε = f/Δ` of the Kerr chain, varied through `Δ`.
    Epsilon,
    /// `g|β| / √(Δω² + κ²)` of the hop, varied through `|β|`.
    HopAdiabaticity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub parameter: f64,
    pub max_trace_distance: f64,
    pub report: VerificationReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingTable {
    pub parameter: ScalingParameter,
    /// Sorted by decreasing parameter.
    pub rows: Vec<ScalingRow>,
    /// Exponent `p` of `error ∝ parameter^p`.
    pub exponent: f64,
    /// Error decreases with the parameter, up to the monotone margin.
    pub monotone: bool,
}

/// One scenario run per point.
pub fn run_point(parameter: ScalingParameter, x: f64, tol: &Tolerances) -> Result<ScalingRow> {
    let report = match parameter {
        ScalingParameter::Epsilon => verify_kerr_scenario(&KerrScenario::at_epsilon(x), tol)?,
        ScalingParameter::HopAdiabaticity => verify_hop_scenario(&HopScenario::at_adiabaticity(x, 1.0, 1.0), tol)?,
    };
    Ok(ScalingRow { parameter: x, max_trace_distance: report.max_trace_distance(), report })
}

/// Assembles a table from already computed rows.
pub fn scaling_table(parameter: ScalingParameter, mut rows: Vec<ScalingRow>, tol: &Tolerances) -> Result<ScalingTable> {
    if rows.len() < 3 {
        return Err(Error::InvalidArgument("a scaling study needs at least 3 points".into()));
    }
    rows.sort_by(|a, b| b.parameter.total_cmp(&a.parameter));
    let monotone =
        rows.windows(2).all(|w| w[1].max_trace_distance <= w[0].max_trace_distance * (1.0 + tol.monotone_margin));
    let xs: Vec<f64> = rows.iter().map(|r| ln(r.parameter)).collect();
    let ys: Vec<f64> = rows.iter().map(|r| ln(r.max_trace_distance)).collect();
    let (exponent, _) = linear_fit(&xs, &ys);
    Ok(ScalingTable { parameter, rows, exponent, monotone })
}

/// Maximum reduced-state trace distance against the small parameter.
pub fn scaling_study(parameter: ScalingParameter, points: &[f64], tol: &Tolerances) -> Result<ScalingTable> {
    if points.len() < 3 {
        return Err(Error::InvalidArgument("a scaling study needs at least 3 points".into()));
    }
    if points.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::InvalidArgument("scaling points must be positive".into()));
    }
    let rows = points.iter().map(|&x| run_point(parameter, x, tol)).collect::<Result<Vec<_>>>()?;
    scaling_table(parameter, rows, tol)
}
