use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DVector;
use num_complex::Complex64;

use super::hop::snap_static;
use super::{relative_error, Metric, Tolerances, VerificationReport};
use crate::compiler::{compile_drive_plan, Constraints, DrivePlan, Hardware, ModePair, PairCoupling};
use crate::dynamics::{linspace, partial_trace, trace_distance, ClosedPropagator, DensityMatrix};
use crate::error::{Error, Result};
use crate::math::{sqrt, PI};
use crate::models::{
    build_bose_hubbard, build_displaced_coupling, damping_dissipators, driven_pair_terms, frame_mode, Coupling,
    EffectiveParams, LatticeGraph, MasterEquationModel,
};
use crate::operators::{CompositeSpace, ModeKind, ModeSpec};
use crate::transforms::{rotate_frame, rwa_filter, to_interaction_picture, ResonanceReport};

/// Two-site chain: two mechanical modes, one hop auxiliary, one driven pair per site.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeScenario {
    pub f: f64,
    pub delta: f64,
    /// Site drive detuning `Ω`.
    pub omega_big: f64,
    /// Displacement `α/2` of the driven supermode.
    pub alpha_c: f64,
    pub delta_omega: f64,
    pub g: f64,
    pub mech_frequencies: [f64; 2],
    pub aux_frequency: f64,
    pub pair_frequencies: [f64; 2],
    pub mech_dim: usize,
    pub aux_dim: usize,
    pub samples: usize,
    /// Hard limit on the full Hilbert-space dimension.
    pub dim_cap: usize,
    /// Drop the site drives (ξ = 0).
    pub sites_off: bool,
}

impl Default for CompositeScenario {
    fn default() -> Self {
        Self {
            f: 1.0,
            delta: 10.0,
            omega_big: 1.8,
            alpha_c: 0.3,
            delta_omega: 1.0,
            g: 0.01,
            mech_frequencies: [20.0, 27.0],
            aux_frequency: 100.0,
            pair_frequencies: [60.0, 75.0],
            mech_dim: 4,
            aux_dim: 2,
            samples: 41,
            dim_cap: 512,
            sites_off: false,
        }
    }
}

impl CompositeScenario {
    /// Target `ξ = ζ = (εfα/4)²/Ω`.
    pub fn target(&self) -> f64 {
        let p = self.f / self.delta * self.f * self.alpha_c / 2.0;
        p * p / self.omega_big
    }
}

/// Hardware, lattice and constraints realising the scenario.
pub fn composite_hardware(s: &CompositeScenario) -> Result<(Hardware, LatticeGraph, Constraints)> {
    let labels = ["a1", "a2"];
    let mut hw = Hardware::default();
    for (l, &w) in labels.iter().zip(&s.mech_frequencies) {
        hw.modes.push(ModeSpec::new(*l, ModeKind::Mechanical, w, 0.0, s.mech_dim)?);
    }
    hw.modes.push(ModeSpec::new("b", ModeKind::Auxiliary, s.aux_frequency, 0.0, s.aux_dim)?);
    for (k, (l, &w)) in labels.iter().zip(&s.pair_frequencies).enumerate() {
        let pair = format!("p{}", k + 1);
        let (c, d) = (format!("{pair}x"), format!("{pair}y"));
        hw.modes.push(ModeSpec::new(c.as_str(), ModeKind::AuxiliaryPairMember, w, 0.0, 2)?);
        hw.modes.push(ModeSpec::new(d.as_str(), ModeKind::AuxiliaryPairMember, w, 0.0, 2)?);
        let mixing = (s.delta + s.mech_frequencies[k]) / 2.0;
        hw.pairs.push(ModePair { label: pair.clone(), members: (c, d), mixing });
        hw.g.push(Coupling::new(l, "b", s.g));
        hw.f.push(PairCoupling { mechanical: (*l).into(), pair, rate: s.f, modulation: None });
    }
    let xi = if s.sites_off { 0.0 } else { s.target() };
    let graph = LatticeGraph::new(
        vec![("a1".into(), xi), ("a2".into(), xi)],
        vec![(("a1".into(), "a2".into()), s.target())],
    )?;
    let constraints =
        Constraints { hop_detuning: Some(s.delta_omega), site_detuning: Some(s.omega_big), ..Default::default() };
    Ok((hw, graph, constraints))
}

#[derive(Debug, Clone)]
pub struct CompositeModels {
    pub plan: DrivePlan,
    pub full: MasterEquationModel,
    /// Lattice model with the compiled rates.
    pub effective: MasterEquationModel,
    pub resonance: Vec<ResonanceReport>,
}

impl CompositeModels {
    /// Full model from a compiled plan; slots are the nodes, the edge
    /// auxiliaries, then `(c, d)` of every site.
    pub fn build(graph: &LatticeGraph, hw: &Hardware, plan: &DrivePlan, dim_cap: usize) -> Result<Self> {
        let mut modes: Vec<ModeSpec> = Vec::new();
        for (label, _) in &graph.nodes {
            modes.push(hw.mode(label)?.clone());
        }
        for e in &plan.edges {
            modes.push(hw.mode(&e.auxiliary)?.clone());
        }
        for site in &plan.sites {
            let member = hw.pair_mode(hw.pair(&site.pair)?)?;
            let dim = member.truncation_dim;
            modes.push(frame_mode(&format!("{}:c", site.pair), ModeKind::Auxiliary, member.damping_rate, dim)?);
            modes.push(frame_mode(&format!("{}:d", site.pair), ModeKind::Auxiliary, member.damping_rate, dim)?);
        }
        let total: usize = modes.iter().map(|m| m.truncation_dim).product();
        if total > dim_cap {
            return Err(Error::ResourceCap { dim: total, cap: dim_cap });
        }
        let space = CompositeSpace::new(modes)?;
        let mut h = crate::transforms::TermSum::new(space.clone());
        let mut resonance = Vec::new();
        let nodes = graph.nodes.len();
        for (k, e) in plan.edges.iter().enumerate() {
            let slots = [space.slot_of(&e.nodes.0)?, space.slot_of(&e.nodes.1)?, nodes + k];
            let sub = space.subspace(&slots)?;
            let tones: Vec<_> = e.tones.iter().map(|&i| plan.tones[i].clone()).collect();
            let gs: Vec<Coupling> = [&e.nodes.0, &e.nodes.1]
                .iter()
                .map(|n| Coupling::new(n, &e.auxiliary, hw.g_rate(n, &e.auxiliary)))
                .collect();
            let lab = build_displaced_coupling(&gs, &tones, &sub)?;
            let ip = to_interaction_picture(&lab)?;
            let (kept, report) = rwa_filter(&ip, 2.0 * e.detuning.abs())?;
            let rotated = snap_static(&rotate_frame(&kept, &[0.0, 0.0, -e.detuning])?, sub.mode(2)?.frequency)?;
            h.extend(&rotated.map_space(space.clone(), |i| Some(slots[i]))?)?;
            resonance.push(report);
        }
        let first_pair = nodes + plan.edges.len();
        for (k, site) in plan.sites.iter().enumerate() {
            let pair = hw.pair(&site.pair)?;
            let fc = hw
                .f_coupling(&site.node, &pair.label)
                .ok_or_else(|| Error::UnknownLabel(format!("{}:{}", site.node, pair.label)))?;
            let p = EffectiveParams {
                alpha: site.alpha,
                omega_big: site.drive_detuning,
                kappa: hw.pair_mode(pair)?.damping_rate,
                ..Default::default()
            }
            .with_qubit(fc.rate, site.detuning);
            let a = space.slot_of(&site.node)?;
            h.extend(&driven_pair_terms(&space, a, first_pair + 2 * k, first_pair + 2 * k + 1, &p)?)?;
        }
        let full = MasterEquationModel::new(h, damping_dissipators(&space)?)?;

        let compiled = LatticeGraph::new(
            graph
                .nodes
                .iter()
                .map(|(l, _)| (l.clone(), plan.sites.iter().find(|s| &s.node == l).map(|s| s.kerr).unwrap_or(0.0)))
                .collect(),
            plan.edges.iter().map(|e| (e.nodes.clone(), e.hopping)).collect(),
        )?;
        let dims: Vec<usize> = graph.nodes.iter().map(|(l, _)| hw.mode(l).map(|m| m.truncation_dim)).collect::<Result<_>>()?;
        let effective = build_bose_hubbard(&compiled, &dims)?;
        Ok(Self { plan: plan.clone(), full, effective, resonance })
    }
}

/// Energies of the `count` eigenstates with most weight on `bare`, ascending.
fn dressed_levels(p: &ClosedPropagator, bare: &[usize], count: usize) -> Vec<f64> {
    let v = p.vectors();
    let mut weights: Vec<(f64, usize)> =
        (0..p.dim()).map(|k| (bare.iter().map(|&i| v[(i, k)].norm_sqr()).sum::<f64>(), k)).collect();
    weights.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    let mut e: Vec<f64> = weights.iter().take(count).map(|&(_, k)| p.energies()[k]).collect();
    e.sort_by(f64::total_cmp);
    e
}

pub fn verify_bose_hubbard_composite(s: &CompositeScenario, tol: &Tolerances) -> Result<VerificationReport> {
    let (hw, graph, constraints) = composite_hardware(s)?;
    let plan = compile_drive_plan(&graph, &hw, &constraints)?;
    let models = CompositeModels::build(&graph, &hw, &plan, s.dim_cap)?;
    if !models.full.dissipators.is_empty() || !models.full.is_static() {
        return Err(Error::Unsupported("composite check needs a closed static model".into()));
    }
    let mut report = VerificationReport::new("composite");
    let space = &models.full.space;
    report.regime.push(("total_dim".into(), space.total_dim() as f64));
    for e in &plan.edges {
        let kappa = hw.mode(&e.auxiliary)?.damping_rate;
        report.regime.push(("hop_adiabaticity".into(), e.coupling / sqrt(e.detuning * e.detuning + kappa * kappa)));
    }
    for site in &plan.sites {
        report.regime.push((format!("epsilon:{}", site.node), site.epsilon));
    }
    for r in &models.resonance {
        report.warnings.extend(r.warnings.iter().cloned());
    }

    let zeta = s.target();
    let exact = plan.edges.iter().map(|e| relative_error(e.hopping, zeta)).chain(
        plan.sites.iter().map(|site| relative_error(site.kerr, if s.sites_off { 0.0 } else { zeta })),
    );
    report.push(Metric::at_most("compiled_rate_error", exact.fold(0.0, f64::max), 1e-12));

    let full = ClosedPropagator::new(&models.full.static_hamiltonian()?)?;
    let eff = ClosedPropagator::new(&models.effective.static_hamiltonian()?)?;
    let m = s.mech_dim;
    let rest = space.total_dim() / (m * m);
    let bare_full: Vec<usize> = (0..=2).map(|n1| (n1 * m + (2 - n1)) * rest).collect();
    let bare_eff: Vec<usize> = (0..=2).map(|n1| n1 * m + (2 - n1)).collect();
    let lf = dressed_levels(&full, &bare_full, 3);
    let le = dressed_levels(&eff, &bare_eff, 3);
    let mut freq_err = 0.0f64;
    for k in 0..2 {
        let (df, de) = (lf[k + 1] - lf[k], le[k + 1] - le[k]);
        report.regime.push((format!("level_spacing_{k}"), df));
        report.regime.push((format!("level_spacing_{k}_target"), de));
        freq_err = freq_err.max(relative_error(df, de));
    }
    report.push(Metric::at_most("frequency_error", freq_err, tol.composite_frequency));

    let duration = if zeta == 0.0 { 1.0 } else { PI / zeta };
    let times = linspace(0.0, duration, s.samples);
    let mut psi_full = DVector::zeros(space.total_dim());
    psi_full[bare_full[2]] = Complex64::new(1.0, 0.0);
    let mut psi_eff = DVector::zeros(m * m);
    psi_eff[bare_eff[2]] = Complex64::new(1.0, 0.0);
    for &t in &times {
        let a = DensityMatrix::pure(&full.evolve_vector(&psi_full, t)?)?;
        let (reduced, _) = partial_trace(&a, space, &[0, 1])?;
        let b = DensityMatrix::pure(&eff.evolve_vector(&psi_eff, t)?)?;
        report.trace_distance.push(trace_distance(&reduced, &b)?);
    }
    report.times = times;
    let dmax = report.max_trace_distance();
    report.push(Metric::at_most("reduced_trace_distance", dmax, tol.composite_distance));
    Ok(report.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oversized_space_is_rejected() {
        let s = CompositeScenario { mech_dim: 6, ..Default::default() };
        let (hw, graph, c) = composite_hardware(&s).unwrap();
        let plan = compile_drive_plan(&graph, &hw, &c).unwrap();
        assert!(matches!(CompositeModels::build(&graph, &hw, &plan, s.dim_cap), Err(Error::ResourceCap { .. })));
    }
}
