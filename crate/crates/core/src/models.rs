//! Hamiltonian and dissipator builders, full and effective.
//!
//! Damping convention: a mode with amplitude decay rate `κ` carries the
//! dissipator `2κ D(b)`. Effective builders follow the same convention, so a
//! channel with rate `γ` appears with Lindblad coefficient `2γ`.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::compiler::DriveTone;
use crate::error::{Error, Result};
use crate::operators::{CompositeSpace, ModeKind, ModeSpec, Poly, SparseOperator};
use crate::transforms::{TermKind, TermSum};

/// Frequency recorded on modes that only exist in a rotating frame.
pub const FRAME_FREQUENCY: f64 = 1.0;

/// One Lindblad channel `rate * D(L)`.
#[derive(Debug, Clone)]
pub struct Dissipator {
    pub rate: f64,
    pub poly: Poly,
    pub operator: SparseOperator,
    pub label: String,
}

impl Dissipator {
    pub fn new(space: &CompositeSpace, rate: f64, poly: Poly, label: impl Into<String>) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::InvalidArgument(format!("dissipator rate must be >= 0, got {rate}")));
        }
        poly.check_slots(space)?;
        let operator = poly.to_operator(space)?;
        Ok(Self { rate, poly, operator, label: label.into() })
    }
}

#[derive(Debug, Clone)]
pub struct MasterEquationModel {
    pub space: CompositeSpace,
    pub hamiltonian: TermSum,
    pub dissipators: Vec<Dissipator>,
}

impl MasterEquationModel {
    pub fn new(hamiltonian: TermSum, dissipators: Vec<Dissipator>) -> Result<Self> {
        let space = hamiltonian.space().clone();
        for d in &dissipators {
            if d.operator.dim() != space.total_dim() {
                return Err(Error::DimensionMismatch { expected: space.total_dim(), found: d.operator.dim() });
            }
        }
        hamiltonian.check_hermitian_pairing(1e-10)?;
        let defect = hamiltonian.hermitian_defect_at(0.0);
        if defect > 1e-10 {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self { space, hamiltonian, dissipators })
    }

    pub fn dim(&self) -> usize {
        self.space.total_dim()
    }

    pub fn is_static(&self) -> bool {
        self.hamiltonian.is_static()
    }

    pub fn static_hamiltonian(&self) -> Result<SparseOperator> {
        if !self.is_static() {
            return Err(Error::Unsupported("Hamiltonian is time dependent".into()));
        }
        Ok(self.hamiltonian.operator_at(0.0))
    }

    pub fn dissipator(&self, label: &str) -> Option<&Dissipator> {
        self.dissipators.iter().find(|d| d.label == label)
    }
}

/// Target lattice: on-site Kerr `ξ` per node, hopping `ζ` per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeGraph {
    pub nodes: Vec<(String, f64)>,
    pub edges: Vec<((String, String), f64)>,
}

impl LatticeGraph {
    pub fn new(nodes: Vec<(String, f64)>, edges: Vec<((String, String), f64)>) -> Result<Self> {
        let g = Self { nodes, edges };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for (label, xi) in &self.nodes {
            if !seen.insert(label.as_str()) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
            if !xi.is_finite() {
                return Err(Error::InvalidLattice(format!("node `{label}` has non-finite Kerr strength")));
            }
        }
        let mut pairs = BTreeSet::new();
        for ((a, b), zeta) in &self.edges {
            for l in [a, b] {
                if !seen.contains(l.as_str()) {
                    return Err(Error::UnknownLabel(l.clone()));
                }
            }
            if a == b {
                return Err(Error::InvalidLattice(format!("self-edge on `{a}`")));
            }
            let key = if a < b { (a, b) } else { (b, a) };
            if !pairs.insert(key) {
                return Err(Error::InvalidLattice(format!("duplicate edge {a}-{b}")));
            }
            if !zeta.is_finite() {
                return Err(Error::InvalidLattice(format!("edge {a}-{b} has non-finite hopping")));
            }
        }
        Ok(())
    }

    pub fn node_index(&self, label: &str) -> Result<usize> {
        self.nodes.iter().position(|n| n.0 == label).ok_or_else(|| Error::UnknownLabel(label.into()))
    }
}

/// Parameters of the effective-model chains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveParams {
    pub g: f64,
    pub beta: Complex64,
    pub delta_omega: f64,
    pub kappa: f64,
    pub f: f64,
    pub s: f64,
    pub delta: f64,
    pub alpha: f64,
    /// Drive detuning of the supermode `c` in the Kerr chain.
    pub omega_big: f64,
    pub epsilon: f64,
    pub delta_mod: Option<f64>,
}

impl Default for EffectiveParams {
    fn default() -> Self {
        Self {
            g: 0.0,
            beta: Complex64::new(0.0, 0.0),
            delta_omega: 0.0,
            kappa: 0.0,
            f: 0.0,
            s: 0.0,
            delta: 0.0,
            alpha: 0.0,
            omega_big: 0.0,
            epsilon: 0.0,
            delta_mod: None,
        }
    }
}

impl EffectiveParams {
    /// Sets `f` and `delta` and derives `epsilon = f / delta`.
    pub fn with_qubit(mut self, f: f64, delta: f64) -> Self {
        self.f = f;
        self.delta = delta;
        self.epsilon = if delta == 0.0 { 0.0 } else { f / delta };
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= 0.0) {
            return Err(Error::InvalidArgument(format!("kappa must be >= 0, got {}", self.kappa)));
        }
        if self.delta != 0.0 && self.epsilon != self.f / self.delta {
            return Err(Error::InvalidArgument("epsilon must equal f / delta".into()));
        }
        Ok(())
    }

    /// `g |β|`.
    pub fn hop_coupling(&self) -> f64 {
        self.g * self.beta.norm()
    }

    /// `(λ, γ')` of the linear hop.
    pub fn hop_rates(&self) -> Result<(f64, f64)> {
        hop_rates(self.hop_coupling(), self.delta_omega, self.kappa)
    }

    /// `ε f α / 4`.
    pub fn kerr_prefactor(&self) -> f64 {
        self.epsilon * self.f * self.alpha / 4.0
    }

    /// `(χ, Γ)` of the Kerr chain.
    pub fn kerr_rates(&self) -> Result<(f64, f64)> {
        kerr_rates(self.kerr_prefactor(), self.omega_big, self.kappa)
    }
}

/// `λ = G²Δω/(Δω²+κ²)`, `γ' = G²κ/(Δω²+κ²)`.
pub fn hop_rates(coupling: f64, delta_omega: f64, kappa: f64) -> Result<(f64, f64)> {
    let den = delta_omega * delta_omega + kappa * kappa;
    if den == 0.0 {
        return Err(Error::ZeroDenominator("delta_omega^2 + kappa^2"));
    }
    let g2 = coupling * coupling;
    Ok((g2 * delta_omega / den, g2 * kappa / den))
}

/// `χ = P²Ω/(Ω²+κ²)`, `Γ = P²κ/(Ω²+κ²)`.
pub fn kerr_rates(prefactor: f64, omega: f64, kappa: f64) -> Result<(f64, f64)> {
    let den = omega * omega + kappa * kappa;
    if den == 0.0 {
        return Err(Error::ZeroDenominator("omega^2 + kappa^2"));
    }
    let p2 = prefactor * prefactor;
    Ok((p2 * omega / den, p2 * kappa / den))
}

/// Rotating-frame mode with a placeholder frequency.
pub fn frame_mode(label: &str, kind: ModeKind, damping: f64, dim: usize) -> Result<ModeSpec> {
    ModeSpec::new(label, kind, FRAME_FREQUENCY, damping, dim)
}

/// `2κ D(b)` for every mode with nonzero damping.
pub fn damping_dissipators(space: &CompositeSpace) -> Result<Vec<Dissipator>> {
    let mut out = Vec::new();
    for (slot, m) in space.modes().iter().enumerate() {
        if m.damping_rate > 0.0 {
            out.push(Dissipator::new(space, 2.0 * m.damping_rate, Poly::a(slot), format!("damping:{}", m.label))?);
        }
    }
    Ok(out)
}

/// `Σ ω_s a_s†a_s` over all modes, as free terms.
pub fn free_terms(space: &CompositeSpace) -> Result<TermSum> {
    let mut ts = TermSum::new(space.clone());
    for (slot, m) in space.modes().iter().enumerate() {
        ts.push_poly(&Poly::number(slot).scale_real(m.frequency), 0.0, &format!("free:{}", m.label), TermKind::Free)?;
    }
    Ok(ts)
}

/// `Σ ξ (a†a)² + Σ ζ (a_n a_m† + a_n† a_m)`; no dissipators.
pub fn build_bose_hubbard(graph: &LatticeGraph, dims: &[usize]) -> Result<MasterEquationModel> {
    graph.validate()?;
    if dims.len() != graph.nodes.len() {
        return Err(Error::DimensionMismatch { expected: graph.nodes.len(), found: dims.len() });
    }
    let modes = graph
        .nodes
        .iter()
        .zip(dims)
        .map(|((label, _), &d)| frame_mode(label, ModeKind::Mechanical, 0.0, d))
        .collect::<Result<Vec<_>>>()?;
    let space = CompositeSpace::new(modes)?;
    let mut h = TermSum::new(space);
    for (slot, (label, xi)) in graph.nodes.iter().enumerate() {
        if *xi != 0.0 {
            let n = Poly::number(slot);
            h.push_poly(&n.mul(&n).scale_real(*xi), 0.0, &format!("kerr:{label}"), TermKind::Interaction)?;
        }
    }
    for ((a, b), zeta) in &graph.edges {
        if *zeta == 0.0 {
            continue;
        }
        let (i, j) = (graph.node_index(a)?, graph.node_index(b)?);
        let hop = Poly::a(i).mul(&Poly::adag(j)).add(&Poly::adag(i).mul(&Poly::a(j)));
        h.push_poly(&hop.scale_real(*zeta), 0.0, &format!("hop:{a}-{b}"), TermKind::Interaction)?;
    }
    MasterEquationModel::new(h, Vec::new())
}

/// Coupling table entry `g_nj` by mode label.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    pub mechanical: String,
    pub auxiliary: String,
    pub rate: f64,
}

impl Coupling {
    pub fn new(mechanical: &str, auxiliary: &str, rate: f64) -> Self {
        Self { mechanical: mechanical.into(), auxiliary: auxiliary.into(), rate }
    }
}

fn coupling_slots(space: &CompositeSpace, c: &Coupling) -> Result<(usize, usize)> {
    let n = space.slot_of(&c.mechanical)?;
    let j = space.slot_of(&c.auxiliary)?;
    if n == j {
        return Err(Error::InvalidArgument(format!("coupling of `{}` to itself", c.mechanical)));
    }
    Ok((n, j))
}

/// Free terms plus `Σ g_nj b_j†b_j (a_n + a_n†)`, with mode damping.
pub fn build_radiation_pressure(gs: &[Coupling], space: &CompositeSpace) -> Result<MasterEquationModel> {
    let mut h = free_terms(space)?;
    for c in gs {
        let (n, j) = coupling_slots(space, c)?;
        let x = Poly::a(n).add(&Poly::adag(n));
        let term = Poly::number(j).mul(&x).scale_real(c.rate);
        h.push_poly(&term, 0.0, &format!("g:{}:{}", c.mechanical, c.auxiliary), TermKind::Interaction)?;
    }
    MasterEquationModel::new(h, damping_dissipators(space)?)
}

/// Radiation-pressure model in the displacement picture of the drive
/// `β(t) = Σ_k β_k e^{-iν_k t}` on each auxiliary.
pub fn build_displaced_coupling(
    gs: &[Coupling],
    tones: &[DriveTone],
    space: &CompositeSpace,
) -> Result<MasterEquationModel> {
    for t in tones {
        space.slot_of(&t.target)?;
    }
    let mut h = free_terms(space)?;
    for c in gs {
        let (n, j) = coupling_slots(space, c)?;
        let x = Poly::a(n).add(&Poly::adag(n)).scale_real(c.rate);
        let tag = format!("{}:{}", c.mechanical, c.auxiliary);
        h.push_poly(&Poly::number(j).mul(&x), 0.0, &format!("g:{tag}"), TermKind::Interaction)?;
        let mine: Vec<&DriveTone> = tones.iter().filter(|t| t.target == c.auxiliary).collect();
        for (k, t) in mine.iter().enumerate() {
            let up = Poly::adag(j).mul(&x).scale(t.amplitude);
            h.push_poly(&up, t.frequency, &format!("g*beta{k}:{tag}"), TermKind::Interaction)?;
            let down = Poly::a(j).mul(&x).scale(t.amplitude.conj());
            h.push_poly(&down, -t.frequency, &format!("g*beta{k}*:{tag}"), TermKind::Interaction)?;
        }
        for (k, tk) in mine.iter().enumerate() {
            for (l, tl) in mine.iter().enumerate() {
                let coeff = tk.amplitude * tl.amplitude.conj();
                h.push_poly(
                    &x.scale(coeff),
                    tk.frequency - tl.frequency,
                    &format!("g*beta{k}*beta{l}*:{tag}"),
                    TermKind::Interaction,
                )?;
            }
        }
    }
    MasterEquationModel::new(h, damping_dissipators(space)?)
}

/// `λ i(a₁a₂† − a₂a₁†)` with induced damping `2γ' D(a₁ + i a₂)`.
pub fn build_effective_hop(p: &EffectiveParams, m1: &ModeSpec, m2: &ModeSpec) -> Result<MasterEquationModel> {
    let (lambda, gamma) = p.hop_rates()?;
    let space = CompositeSpace::new(vec![m1.clone(), m2.clone()])?;
    let i = Complex64::new(0.0, 1.0);
    let hop = Poly::a(0).mul(&Poly::adag(1)).sub(&Poly::a(1).mul(&Poly::adag(0))).scale(i * lambda);
    let mut h = TermSum::new(space.clone());
    h.push_poly(&hop, 0.0, "hop", TermKind::Interaction)?;
    let mut diss = Vec::new();
    if gamma > 0.0 {
        let l = Poly::a(0).add(&Poly::a(1).scale(i));
        diss.push(Dissipator::new(&space, 2.0 * gamma, l, "induced:hop")?);
    }
    MasterEquationModel::new(h, diss)
}

/// Mechanical mode coupled to a mixed pair `(c̃, d̃)`; slots `[a, c̃, d̃]`.
///
/// The pair enters with opposite signs, `f (c̃†c̃ − d̃†d̃)(a + a†)`, which is
/// the form that maps onto the photon-flip coupling of the supermodes.
pub fn build_pair_with_mixing(p: &EffectiveParams, space: &CompositeSpace) -> Result<MasterEquationModel> {
    if space.len() != 3 {
        return Err(Error::InvalidArgument("pair model needs slots [mechanical, c~, d~]".into()));
    }
    let (c, d) = (space.mode(1)?, space.mode(2)?);
    if c.frequency != d.frequency {
        return Err(Error::InvalidMode(format!(
            "pair members `{}` and `{}` must share a frequency ({} vs {})",
            c.label, d.label, c.frequency, d.frequency
        )));
    }
    let mut h = free_terms(space)?;
    let x = Poly::a(0).add(&Poly::adag(0));
    let coupling = Poly::number(1).sub(&Poly::number(2)).mul(&x).scale_real(p.f);
    h.push_poly(&coupling, 0.0, "f", TermKind::Interaction)?;
    let mix = Poly::a(1).mul(&Poly::adag(2)).add(&Poly::a(2).mul(&Poly::adag(1))).scale_real(p.s);
    h.push_poly(&mix, 0.0, "mixing", TermKind::Interaction)?;
    MasterEquationModel::new(h, damping_dissipators(space)?)
}

/// `χ (a†a)²` with dephasing `2Γ D(a†a)`.
pub fn build_kerr_effective(p: &EffectiveParams, mode: &ModeSpec) -> Result<MasterEquationModel> {
    let (chi, gamma) = p.kerr_rates()?;
    let space = CompositeSpace::new(vec![mode.clone()])?;
    let n = Poly::number(0);
    let mut h = TermSum::new(space.clone());
    h.push_poly(&n.mul(&n).scale_real(chi), 0.0, "kerr", TermKind::Interaction)?;
    let mut diss = Vec::new();
    if gamma > 0.0 {
        diss.push(Dissipator::new(&space, 2.0 * gamma, n, "induced:kerr")?);
    }
    MasterEquationModel::new(h, diss)
}

/// `χ_x (a†a)(b†b)`.
pub fn build_cross_kerr(chi_x: f64, a: &ModeSpec, b: &ModeSpec) -> Result<MasterEquationModel> {
    if a.label == b.label {
        return Err(Error::InvalidArgument(format!("cross-Kerr needs two distinct modes, got `{}` twice", a.label)));
    }
    let space = CompositeSpace::new(vec![a.clone(), b.clone()])?;
    let mut h = TermSum::new(space);
    h.push_poly(&Poly::number(0).mul(&Poly::number(1)).scale_real(chi_x), 0.0, "cross-kerr", TermKind::Interaction)?;
    MasterEquationModel::new(h, Vec::new())
}

/// `Ω(c†c + d†d) + Δ(c†c − d†d) + f(a d c† + a† d† c)` on slots `[a, c, d]`,
/// with `2κ D(c)` and `2κ D(d)`.
pub fn build_intermediate_qubit_model(
    p: &EffectiveParams,
    mode: &ModeSpec,
    pair_dim: usize,
) -> Result<MasterEquationModel> {
    p.validate()?;
    let space = CompositeSpace::new(vec![
        mode.clone(),
        frame_mode("c", ModeKind::Auxiliary, p.kappa, pair_dim)?,
        frame_mode("d", ModeKind::Auxiliary, p.kappa, pair_dim)?,
    ])?;
    let mut h = TermSum::new(space.clone());
    h.push_poly(&Poly::number(1).scale_real(p.omega_big + p.delta), 0.0, "c", TermKind::Interaction)?;
    h.push_poly(&Poly::number(2).scale_real(p.omega_big - p.delta), 0.0, "d", TermKind::Interaction)?;
    h.push_poly(&flip_coupling(0, 1, 2).scale_real(p.f), 0.0, "f", TermKind::Interaction)?;
    MasterEquationModel::new(h, damping_dissipators(&space)?)
}

/// `a d c† + a† d† c`.
pub fn flip_coupling(a: usize, c: usize, d: usize) -> Poly {
    let x = Poly::a(a).mul(&Poly::a(d)).mul(&Poly::adag(c));
    x.add(&x.adjoint())
}

/// Driven Kerr chain in the drive frame, `c` displaced by real `α/2`:
/// `−Ω c†c − (Ω + 2Δ) d†d + f(a d c† + h.c.) + f(α/2)(a d + a† d†)`,
/// slots `[a, c, d]`, damping `2κ D(c)` plus `2κ_d D(d)`.
pub fn build_driven_pair_model(
    p: &EffectiveParams,
    mode: &ModeSpec,
    c_dim: usize,
    d_dim: usize,
    d_damping: f64,
) -> Result<MasterEquationModel> {
    p.validate()?;
    let space = CompositeSpace::new(vec![
        mode.clone(),
        frame_mode("c", ModeKind::Auxiliary, p.kappa, c_dim)?,
        frame_mode("d", ModeKind::Auxiliary, d_damping, d_dim)?,
    ])?;
    let h = driven_pair_terms(&space, 0, 1, 2, p)?;
    MasterEquationModel::new(h, damping_dissipators(&space)?)
}

/// Driven-pair Hamiltonian terms on arbitrary slots of `space`.
pub fn driven_pair_terms(space: &CompositeSpace, a: usize, c: usize, d: usize, p: &EffectiveParams) -> Result<TermSum> {
    let mut h = TermSum::new(space.clone());
    let tag = &space.mode(a)?.label;
    h.push_poly(&Poly::number(c).scale_real(-p.omega_big), 0.0, &format!("c:{tag}"), TermKind::Interaction)?;
    h.push_poly(
        &Poly::number(d).scale_real(-p.omega_big - 2.0 * p.delta),
        0.0,
        &format!("d:{tag}"),
        TermKind::Interaction,
    )?;
    h.push_poly(&flip_coupling(a, c, d).scale_real(p.f), 0.0, &format!("f:{tag}"), TermKind::Interaction)?;
    let sq = Poly::a(a).mul(&Poly::a(d));
    let sq = sq.add(&sq.adjoint()).scale_real(p.f * p.alpha / 2.0);
    h.push_poly(&sq, 0.0, &format!("f*alpha:{tag}"), TermKind::Interaction)?;
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, SymmetricEigen};

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn mech(label: &str, dim: usize) -> ModeSpec {
        ModeSpec::new(label, ModeKind::Mechanical, 1.0, 0.0, dim).unwrap()
    }

    fn eigenvalues(m: DMatrix<Complex64>) -> Vec<f64> {
        let mut e: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    #[test]
    fn single_site_kerr_diagonal() {
        let g = LatticeGraph::new(vec![("a".into(), 1.0)], vec![]).unwrap();
        let m = build_bose_hubbard(&g, &[3]).unwrap();
        let h = m.static_hamiltonian().unwrap();
        assert_eq!(h, SparseOperator::diagonal([re(0.0), re(1.0), re(4.0)]));
    }

    #[test]
    fn two_site_hop_block() {
        let g = LatticeGraph::new(
            vec![("a".into(), 0.0), ("b".into(), 0.0)],
            vec![(("a".into(), "b".into()), 1.0)],
        )
        .unwrap();
        let m = build_bose_hubbard(&g, &[2, 2]).unwrap();
        let h = m.static_hamiltonian().unwrap();
        let block = h.restrict(&[1, 2]).to_dense();
        let e = eigenvalues(block);
        assert!((e[0] + 1.0).abs() < 1e-12 && (e[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lattice_validation() {
        assert!(LatticeGraph::new(vec![("a".into(), 0.0)], vec![(("a".into(), "z".into()), 1.0)]).is_err());
        assert!(LatticeGraph::new(vec![("a".into(), 0.0)], vec![(("a".into(), "a".into()), 1.0)]).is_err());
        let nodes = vec![("a".into(), 0.0), ("b".into(), 0.0)];
        let e = vec![(("a".into(), "b".into()), 1.0), (("b".into(), "a".into()), 1.0)];
        assert!(LatticeGraph::new(nodes, e).is_err());
    }

    #[test]
    fn hop_rates_examples() {
        assert_eq!(hop_rates(1.0, 1.0, 0.0).unwrap(), (1.0, 0.0));
        assert_eq!(hop_rates(1.0, 0.0, 1.0).unwrap(), (0.0, 1.0));
        assert!(matches!(hop_rates(1.0, 0.0, 0.0), Err(Error::ZeroDenominator(_))));
        let (l1, _) = hop_rates(0.3, 1.2, 0.4).unwrap();
        let (l2, _) = hop_rates(0.3, -1.2, 0.4).unwrap();
        assert_eq!(l1, -l2);
    }

    #[test]
    fn kerr_rates_examples() {
        assert_eq!(kerr_rates(1.0, 1.0, 0.0).unwrap(), (1.0, 0.0));
        let (chi, gamma) = kerr_rates(0.7, 2.0, 2.0).unwrap();
        assert_eq!(chi, gamma);
    }

    #[test]
    fn effective_hop_conserves_number() {
        let p = EffectiveParams { g: 1.0, beta: Complex64::new(0.3, 0.2), delta_omega: 1.0, kappa: 0.5, ..Default::default() };
        let m = build_effective_hop(&p, &mech("a1", 3), &mech("a2", 3)).unwrap();
        let h = m.static_hamiltonian().unwrap();
        let n = Poly::number(0).add(&Poly::number(1)).to_operator(&m.space).unwrap();
        assert!(h.commutator(&n).unwrap().max_abs() < 1e-12);
        assert_eq!(h.hermitian_defect(), 0.0);
        assert_eq!(m.dissipators.len(), 1);
    }

    #[test]
    fn cross_kerr_spectrum() {
        let m = build_cross_kerr(0.5, &mech("a", 3), &mech("b", 4)).unwrap();
        let h = m.static_hamiltonian().unwrap();
        for n in 0..3 {
            for k in 0..4 {
                let i = m.space.index_of(&[n, k]).unwrap();
                assert_eq!(h.get(i, i).re, 0.5 * (n * k) as f64);
            }
        }
        assert!(build_cross_kerr(0.5, &mech("a", 3), &mech("a", 3)).is_err());
    }

    #[test]
    fn intermediate_model_conserves_pair_number() {
        let p = EffectiveParams { omega_big: 5.0, ..Default::default() }.with_qubit(0.4, 2.0);
        let m = build_intermediate_qubit_model(&p, &mech("a", 3), 3).unwrap();
        let h = m.static_hamiltonian().unwrap();
        let n = Poly::number(1).add(&Poly::number(2)).to_operator(&m.space).unwrap();
        assert!(h.commutator(&n).unwrap().max_abs() < 1e-12);
        // |1_a, 0_c, 1_d> and |0_a, 1_c, 0_d> couple with strength f.
        let i = m.space.index_of(&[1, 0, 1]).unwrap();
        let j = m.space.index_of(&[0, 1, 0]).unwrap();
        let block = h.restrict(&[i, j]).to_dense();
        let (e1, e2) = (5.0 - 2.0, 5.0 + 2.0);
        let mean = 0.5 * (e1 + e2);
        let split = crate::math::sqrt(0.25 * (e2 - e1) * (e2 - e1) + 0.16);
        let e = eigenvalues(block);
        assert!((e[0] - (mean - split)).abs() < 1e-12 && (e[1] - (mean + split)).abs() < 1e-12);
    }

    #[test]
    fn pair_frequency_mismatch_rejected() {
        let space = CompositeSpace::new(vec![
            mech("a", 2),
            ModeSpec::new("ct", ModeKind::AuxiliaryPairMember, 3.0, 0.0, 2).unwrap(),
            ModeSpec::new("dt", ModeKind::AuxiliaryPairMember, 3.5, 0.0, 2).unwrap(),
        ])
        .unwrap();
        assert!(matches!(build_pair_with_mixing(&EffectiveParams::default(), &space), Err(Error::InvalidMode(_))));
    }
}
