use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::state::{hermitian_eigenvalues, DensityMatrix};
use crate::error::{Error, Result};
use crate::models::MasterEquationModel;
use crate::operators::{CompositeSpace, Poly, SparseOperator};
use crate::transforms::AssembledHamiltonian;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Precompiled generator `ρ̇ = −i[H(t), ρ] + Σ k D(L)ρ`.
///
/// Evaluated as `ρ̇ = i(A − A†) + Σ k L ρ L†` with `A = ρ H_eff†` and
/// `H_eff = H − (i/2) Σ k L†L`, so only right products with sparse
/// operators are needed.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    dim: usize,
    hamiltonian: AssembledHamiltonian,
    decay: SparseOperator,
    jumps: Vec<(f64, SparseOperator)>,
    static_heff_adj: Option<SparseOperator>,
}

impl Liouvillian {
    pub fn new(model: &MasterEquationModel) -> Result<Self> {
        let dim = model.dim();
        let mut decay = SparseOperator::zeros(dim);
        let mut jumps = Vec::new();
        for d in &model.dissipators {
            if d.rate == 0.0 {
                continue;
            }
            let l = &d.operator;
            decay = decay.add_checked(&l.adjoint().matmul(l)?.scale_real(0.5 * d.rate))?;
            jumps.push((d.rate, l.adjoint()));
        }
        let hamiltonian = model.hamiltonian.assemble();
        let mut out = Self { dim, hamiltonian, decay, jumps, static_heff_adj: None };
        if out.hamiltonian.is_static() {
            out.static_heff_adj = Some(out.heff_adjoint(0.0));
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The same generator acting on the span of `basis` (sorted full-space indices).
    pub fn restricted(&self, basis: &[usize]) -> Self {
        Self {
            dim: basis.len(),
            hamiltonian: self.hamiltonian.restrict(basis),
            decay: self.decay.restrict(basis),
            jumps: self.jumps.iter().map(|(k, l)| (*k, l.restrict(basis))).collect(),
            static_heff_adj: self.static_heff_adj.as_ref().map(|h| h.restrict(basis)),
        }
    }

    /// Basis states connected to the support of `rho` by the Hamiltonian or a
    /// jump operator. Their span is invariant, so evolving there is exact.
    pub fn reachable_basis(&self, rho: &DMatrix<Complex64>) -> Vec<usize> {
        let n = self.dim;
        let mut adj = alloc::vec![Vec::new(); n];
        for op in self.hamiltonian.parts().iter().map(|p| &p.1).chain(core::iter::once(&self.decay)) {
            for &(r, c, _) in op.entries() {
                if r != c {
                    adj[r].push(c);
                    adj[c].push(r);
                }
            }
        }
        // stored as L†, so an entry (r, c) means L takes r to c
        for (_, ldag) in &self.jumps {
            for &(r, c, _) in ldag.entries() {
                adj[r].push(c);
            }
        }
        let mut seen = alloc::vec![false; n];
        let mut stack: Vec<usize> = (0..n).filter(|&i| (0..n).any(|j| rho[(i, j)] != Complex64::new(0.0, 0.0))).collect();
        for &i in &stack {
            seen[i] = true;
        }
        while let Some(i) = stack.pop() {
            for &j in &adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        (0..n).filter(|&i| seen[i]).collect()
    }

    /// `H_eff(t)† = H(t) + (i/2) Σ k L†L`.
    fn heff_adjoint(&self, t: f64) -> SparseOperator {
        let h = self.hamiltonian.at(t);
        h.add_checked(&self.decay.scale(I)).expect("same dimension")
    }

    /// Writes `ρ̇` into `out`.
    pub fn apply(&self, t: f64, rho: &DMatrix<Complex64>, out: &mut DMatrix<Complex64>) {
        let mut ws = Workspace::new(self.dim);
        self.apply_with(t, rho, out, &mut ws);
    }

    /// As [`Liouvillian::apply`], reusing scratch buffers.
    pub fn apply_with(&self, t: f64, rho: &DMatrix<Complex64>, out: &mut DMatrix<Complex64>, ws: &mut Workspace) {
        let n = self.dim;
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let owned;
        let heff_adj = match &self.static_heff_adj {
            Some(h) => h,
            None => {
                owned = self.heff_adjoint(t);
                &owned
            }
        };
        ws.a.fill(zero);
        heff_adj.mul_dense_right_acc(rho, one, &mut ws.a);
        {
            let a = ws.a.as_slice();
            let o = out.as_mut_slice();
            for j in 0..n {
                for i in 0..n {
                    o[j * n + i] = I * (a[j * n + i] - a[i * n + j].conj());
                }
            }
        }
        for (k, ldag) in &self.jumps {
            // B = ρ L†, then L ρ L† = B† L† (ρ Hermitian)
            ws.b.fill(zero);
            ldag.mul_dense_right_acc(rho, one, &mut ws.b);
            {
                let b = ws.b.as_slice();
                let bt = ws.bt.as_mut_slice();
                for j in 0..n {
                    for i in 0..n {
                        bt[j * n + i] = b[i * n + j].conj();
                    }
                }
            }
            ldag.mul_dense_right_acc(&ws.bt, Complex64::new(*k, 0.0), out);
        }
    }
}

/// Scratch buffers for [`Liouvillian::apply_with`].
#[derive(Debug, Clone)]
pub struct Workspace {
    a: DMatrix<Complex64>,
    b: DMatrix<Complex64>,
    bt: DMatrix<Complex64>,
}

impl Workspace {
    pub fn new(dim: usize) -> Self {
        Self { a: DMatrix::zeros(dim, dim), b: DMatrix::zeros(dim, dim), bt: DMatrix::zeros(dim, dim) }
    }
}

/// `−i[H(t), ρ] + Σ k D(L)ρ`.
pub fn lindblad_rhs(model: &MasterEquationModel, rho: &DensityMatrix, t: f64) -> Result<DMatrix<Complex64>> {
    if rho.dim() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: rho.dim() });
    }
    let l = Liouvillian::new(model)?;
    let mut out = DMatrix::zeros(rho.dim(), rho.dim());
    l.apply(t, rho.matrix(), &mut out);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stepper {
    /// Classic fourth-order Runge-Kutta with at most `dt` per step.
    Rk4Fixed { dt: f64 },
    /// Dormand-Prince 5(4) with step control.
    Adaptive { rtol: f64, atol: f64, max_steps: usize },
}

impl Stepper {
    pub fn adaptive() -> Self {
        Stepper::Adaptive { rtol: 1e-9, atol: 1e-11, max_steps: 50_000_000 }
    }
}

/// Hermitian observable recorded at each sample time.
#[derive(Debug, Clone)]
pub struct Observable {
    pub name: String,
    pub operator: SparseOperator,
}

/// `n@m`, `a_re@m` and `a_im@m` for every mode `m`.
pub fn default_observables(space: &CompositeSpace) -> Result<Vec<Observable>> {
    let mut out = Vec::new();
    for (slot, m) in space.modes().iter().enumerate() {
        let a = Poly::a(slot);
        let ad = Poly::adag(slot);
        out.push(Observable { name: format!("n@{}", m.label), operator: Poly::number(slot).to_operator(space)? });
        out.push(Observable { name: format!("a_re@{}", m.label), operator: a.add(&ad).scale_real(0.5).to_operator(space)? });
        out.push(Observable {
            name: format!("a_im@{}", m.label),
            operator: a.sub(&ad).scale(Complex64::new(0.0, -0.5)).to_operator(space)?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct IntegrateOptions {
    pub stepper: Stepper,
    pub observables: Vec<Observable>,
    pub store_states: bool,
    /// Eigenvalue checks at every sample up to this dimension, at the end only above it.
    pub positivity_check_dim: usize,
    pub top_population_limit: f64,
    /// Integrate only on the invariant subspace reached from the initial support.
    pub reduce_subspace: bool,
}

impl IntegrateOptions {
    pub fn new(stepper: Stepper) -> Self {
        Self { stepper, observables: Vec::new(), store_states: false, positivity_check_dim: 256, top_population_limit: 1e-3, reduce_subspace: true }
    }

    pub fn with_observables(mut self, observables: Vec<Observable>) -> Self {
        self.observables = observables;
        self
    }

    pub fn storing_states(mut self) -> Self {
        self.store_states = true;
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub max_trace_drift: f64,
    pub min_eigenvalue: f64,
    pub max_hermitian_defect: f64,
    /// Largest population in any mode's top Fock level.
    pub max_top_population: f64,
    pub truncation_violation: bool,
    pub steps: usize,
    pub rejected_steps: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub times: Vec<f64>,
    pub names: Vec<String>,
    /// `values[i][k]`: observable `k` at `times[i]`.
    pub values: Vec<Vec<f64>>,
    pub states: Option<Vec<DensityMatrix>>,
    pub final_state: DensityMatrix,
    pub diagnostics: Diagnostics,
}

impl SimulationResult {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.names.iter().position(|n| n == name)?;
        Some(self.values.iter().map(|row| row[k]).collect())
    }
}

struct Monitor {
    top_levels: Vec<Vec<usize>>,
    check_dim: usize,
    limit: f64,
    diag: Diagnostics,
}

impl Monitor {
    /// `basis` lists the full-space index of each integrated row.
    fn new(space: &CompositeSpace, basis: &[usize], opts: &IntegrateOptions) -> Self {
        let dims = space.dims();
        let mut top_levels = alloc::vec![Vec::new(); dims.len()];
        for (row, &idx) in basis.iter().enumerate() {
            for (s, &o) in space.occupations(idx).iter().enumerate() {
                if o + 1 == dims[s] {
                    top_levels[s].push(row);
                }
            }
        }
        let diag = Diagnostics { min_eigenvalue: f64::INFINITY, ..Default::default() };
        Self { top_levels, check_dim: opts.positivity_check_dim, limit: opts.top_population_limit, diag }
    }

    fn sample(&mut self, rho: &DMatrix<Complex64>, last: bool) {
        let d = &mut self.diag;
        d.max_trace_drift = d.max_trace_drift.max((rho.trace() - Complex64::new(1.0, 0.0)).norm());
        let state = DensityMatrix::from_matrix_unchecked(rho.clone());
        d.max_hermitian_defect = d.max_hermitian_defect.max(state.hermitian_defect());
        for idx in &self.top_levels {
            let p: f64 = idx.iter().map(|&i| rho[(i, i)].re).sum();
            d.max_top_population = d.max_top_population.max(p);
        }
        if rho.nrows() <= self.check_dim || last {
            let e = hermitian_eigenvalues(rho).into_iter().fold(f64::INFINITY, f64::min);
            d.min_eigenvalue = d.min_eigenvalue.min(e);
        }
    }

    fn finish(mut self) -> Diagnostics {
        if self.diag.max_top_population > self.limit {
            self.diag.truncation_violation = true;
            self.diag.warnings.push(format!(
                "top Fock level population {} exceeds {}",
                self.diag.max_top_population, self.limit
            ));
        }
        self.diag
    }
}

fn axpy(y: &mut DMatrix<Complex64>, a: f64, x: &DMatrix<Complex64>) {
    for (yi, xi) in y.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *yi += xi * a;
    }
}

/// `out = y + Σ c_j x_j`.
fn combine(out: &mut DMatrix<Complex64>, y: &DMatrix<Complex64>, terms: &[(f64, &[Complex64])]) {
    let o = out.as_mut_slice();
    o.copy_from_slice(y.as_slice());
    for &(c, x) in terms {
        for (oi, xi) in o.iter_mut().zip(x) {
            *oi += xi * c;
        }
    }
}

fn symmetrize(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    for j in 0..n {
        for i in 0..j {
            let v = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
        m[(j, j)].im = 0.0;
    }
}

struct Rk4 {
    k: [DMatrix<Complex64>; 4],
    tmp: DMatrix<Complex64>,
    ws: Workspace,
}

impl Rk4 {
    fn new(n: usize) -> Self {
        let z = || DMatrix::zeros(n, n);
        Self { k: [z(), z(), z(), z()], tmp: z(), ws: Workspace::new(n) }
    }

    fn step(&mut self, l: &Liouvillian, t: f64, h: f64, y: &mut DMatrix<Complex64>) {
        l.apply_with(t, y, &mut self.k[0], &mut self.ws);
        self.tmp.copy_from(y);
        axpy(&mut self.tmp, 0.5 * h, &self.k[0]);
        l.apply_with(t + 0.5 * h, &self.tmp, &mut self.k[1], &mut self.ws);
        self.tmp.copy_from(y);
        axpy(&mut self.tmp, 0.5 * h, &self.k[1]);
        l.apply_with(t + 0.5 * h, &self.tmp, &mut self.k[2], &mut self.ws);
        self.tmp.copy_from(y);
        axpy(&mut self.tmp, h, &self.k[2]);
        l.apply_with(t + h, &self.tmp, &mut self.k[3], &mut self.ws);
        axpy(y, h / 6.0, &self.k[0]);
        axpy(y, h / 3.0, &self.k[1]);
        axpy(y, h / 3.0, &self.k[2]);
        axpy(y, h / 6.0, &self.k[3]);
    }
}

// Dormand-Prince 5(4) tableau
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct Dopri {
    k: Vec<DMatrix<Complex64>>,
    tmp: DMatrix<Complex64>,
    ws: Workspace,
    h: f64,
}

impl Dopri {
    fn new(n: usize) -> Self {
        Self { k: (0..7).map(|_| DMatrix::zeros(n, n)).collect(), tmp: DMatrix::zeros(n, n), ws: Workspace::new(n), h: 0.0 }
    }

    /// Advances `y` from `t` to `t_end`; returns (accepted, rejected) step counts.
    fn advance(
        &mut self,
        l: &Liouvillian,
        t: f64,
        t_end: f64,
        y: &mut DMatrix<Complex64>,
        rtol: f64,
        atol: f64,
        budget: usize,
    ) -> Result<(usize, usize)> {
        let (mut accepted, mut rejected) = (0usize, 0usize);
        let mut t = t;
        let mut fresh = false;
        if self.h == 0.0 {
            self.h = ((t_end - t) / 100.0).max(1e-6);
        }
        let span = t_end.abs().max(1.0);
        while t_end - t > 1e-13 * span {
            if accepted + rejected > budget {
                return Err(Error::Integration(format!("step budget {budget} exhausted at t = {t}")));
            }
            if self.h < 1e-13 * span {
                return Err(Error::Integration(format!("step size underflow at t = {t}")));
            }
            let clipped = self.h >= t_end - t;
            let h = if clipped { t_end - t } else { self.h };
            if !fresh {
                l.apply_with(t, y, &mut self.k[0], &mut self.ws);
            }
            for s in 1..7 {
                {
                    let terms: Vec<(f64, &[Complex64])> = DP_A[s][..s]
                        .iter()
                        .zip(&self.k)
                        .filter(|(a, _)| **a != 0.0)
                        .map(|(a, k)| (h * a, k.as_slice()))
                        .collect();
                    combine(&mut self.tmp, y, &terms);
                }
                let (_, tail) = self.k.split_at_mut(s);
                l.apply_with(t + DP_C[s] * h, &self.tmp, &mut tail[0], &mut self.ws);
            }
            // tmp holds the fifth-order solution; error in the RMS norm
            let tr_before = y.trace();
            let n = y.nrows();
            let sc = atol + rtol * y.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let e = &mut self.ws.a;
            e.fill(Complex64::new(0.0, 0.0));
            for (k, (b5, b4)) in self.k.iter().zip(DP_B5.iter().zip(&DP_B4)) {
                if b5 != b4 {
                    axpy(e, h * (b5 - b4), k);
                }
            }
            let acc: f64 = e.as_slice().iter().map(|v| v.norm_sqr()).sum::<f64>() / (sc * sc);
            let mut err = crate::math::sqrt(acc / (n * n) as f64);
            let drift = (self.tmp.trace() - tr_before).norm() / atol.max(1e-15);
            err = err.max(drift);
            if err <= 1.0 {
                y.copy_from(&self.tmp);
                t += h;
                accepted += 1;
                // last stage is evaluated at the new point
                self.k.swap(0, 6);
                fresh = true;
            } else {
                rejected += 1;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * crate::math::powf(err, -0.2)).clamp(0.2, 5.0) };
            // a step shortened to land on the sample time says nothing about the natural step size
            if !(clipped && err <= 1.0) {
                self.h = h * factor;
            }
        }
        Ok((accepted, rejected))
    }
}

/// Evolves `rho0` and samples at `times` (strictly increasing; `times[0]` is the start).
pub fn integrate(
    model: &MasterEquationModel,
    rho0: &DensityMatrix,
    times: &[f64],
    opts: &IntegrateOptions,
) -> Result<SimulationResult> {
    if rho0.dim() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: rho0.dim() });
    }
    if times.is_empty() || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("time grid must be non-empty and strictly increasing".into()));
    }
    for o in &opts.observables {
        if o.operator.dim() != model.dim() {
            return Err(Error::DimensionMismatch { expected: model.dim(), found: o.operator.dim() });
        }
    }
    let full = Liouvillian::new(model)?;
    let basis = if opts.reduce_subspace { full.reachable_basis(rho0.matrix()) } else { (0..model.dim()).collect() };
    let reduced = basis.len() < model.dim();
    let l = if reduced { full.restricted(&basis) } else { full };
    let n = l.dim();
    let mut y = if reduced { restrict_dense(rho0.matrix(), &basis) } else { rho0.matrix().clone() };
    let observables: Vec<SparseOperator> = opts
        .observables
        .iter()
        .map(|o| if reduced { o.operator.restrict(&basis) } else { o.operator.clone() })
        .collect();
    let mut monitor = Monitor::new(&model.space, &basis, opts);
    let mut values = Vec::with_capacity(times.len());
    let mut states = opts.store_states.then(Vec::new);
    let full_dim = model.dim();
    let embed = |y: &DMatrix<Complex64>| if reduced { embed_dense(y, &basis, full_dim) } else { y.clone() };
    let record = |y: &DMatrix<Complex64>, values: &mut Vec<Vec<f64>>, states: &mut Option<Vec<DensityMatrix>>| {
        values.push(observables.iter().map(|o| o.expectation(y).re).collect());
        if let Some(s) = states.as_mut() {
            s.push(DensityMatrix::from_matrix_unchecked(embed(y)));
        }
    };
    record(&y, &mut values, &mut states);
    monitor.sample(&y, times.len() == 1);
    let mut rk4 = Rk4::new(n);
    let mut dopri = Dopri::new(n);
    for (i, w) in times.windows(2).enumerate() {
        let (t0, t1) = (w[0], w[1]);
        match opts.stepper {
            Stepper::Rk4Fixed { dt } => {
                if !(dt > 0.0) {
                    return Err(Error::InvalidArgument(format!("RK4 step must be positive, got {dt}")));
                }
                let steps = libm::ceil((t1 - t0) / dt - 1e-9).max(1.0) as usize;
                let h = (t1 - t0) / steps as f64;
                for s in 0..steps {
                    rk4.step(&l, t0 + s as f64 * h, h, &mut y);
                }
                monitor.diag.steps += steps;
            }
            Stepper::Adaptive { rtol, atol, max_steps } => {
                let used = monitor.diag.steps + monitor.diag.rejected_steps;
                let (a, r) = dopri.advance(&l, t0, t1, &mut y, rtol, atol, max_steps.saturating_sub(used))?;
                monitor.diag.steps += a;
                monitor.diag.rejected_steps += r;
            }
        }
        symmetrize(&mut y);
        record(&y, &mut values, &mut states);
        monitor.sample(&y, i + 2 == times.len());
    }
    Ok(SimulationResult {
        times: times.to_vec(),
        names: opts.observables.iter().map(|o| o.name.clone()).collect(),
        values,
        states,
        final_state: DensityMatrix::from_matrix_unchecked(embed(&y)),
        diagnostics: monitor.finish(),
    })
}

fn restrict_dense(m: &DMatrix<Complex64>, basis: &[usize]) -> DMatrix<Complex64> {
    DMatrix::from_fn(basis.len(), basis.len(), |i, j| m[(basis[i], basis[j])])
}

fn embed_dense(m: &DMatrix<Complex64>, basis: &[usize], dim: usize) -> DMatrix<Complex64> {
    let mut out = DMatrix::zeros(dim, dim);
    for (i, &bi) in basis.iter().enumerate() {
        for (j, &bj) in basis.iter().enumerate() {
            out[(bi, bj)] = m[(i, j)];
        }
    }
    out
}

/// `n + 1` evenly spaced samples on `[t0, t1]`.
pub fn linspace(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    if n == 0 {
        return alloc::vec![t0];
    }
    (0..=n).map(|i| if i == n { t1 } else { t0 + (t1 - t0) * i as f64 / n as f64 }).collect()
}
