//! Joint integration of the Lindblad master equation and the weak-invariant
//! equation, with fluctuation-growth and entropy diagnostics.
//!
//! The state obeys
//! ρ̇ = −i[H,ρ] − Σ c_n (L_n†L_n ρ + ρ L_n†L_n − 2 L_n ρ L_n†)
//! and a weak invariant obeys the adjoint equation
//! İ = −i[H,I] + Σ c_n (L_n†L_n I + I L_n†L_n − 2 L_n† I L_n),
//! which keeps tr(Iρ) fixed while tr(I²ρ) − tr(Iρ)² grows at the rate
//! 2 Σ c_n ⟨[L_n,I]†[L_n,I]⟩.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::diff;
use crate::eigen::hermitian_eigen;
use crate::error::{Error, Result};
use crate::math;
use crate::matrix::{Matrix, I, ONE};
use crate::operator::{clip_variance, DensityMatrix, HermitianOperator, Tolerances};

/// Rates above `−RATE_TOL` are accepted; tiny negatives are treated as zero.
pub const RATE_TOL: f64 = 1e-12;

/// Eigenvalues at or below this are left out of entropy sums.
pub const ENTROPY_FLOOR: f64 = 1e-15;

type TimeFn<T> = Box<dyn Fn(f64) -> T + Send + Sync>;

enum OperatorFn {
    Constant(Term),
    Varying(TimeFn<Matrix>),
}

struct Dissipator {
    op: OperatorFn,
    rate: TimeFn<Result<f64>>,
}

/// Time-dependent Lindblad generator: a Hamiltonian plus dissipators
/// (L_n(t), c_n(t)).
pub struct LindbladGenerator {
    dim: usize,
    hamiltonian: TimeFn<Matrix>,
    dissipators: Vec<Dissipator>,
    rate_tol: f64,
}

impl core::fmt::Debug for LindbladGenerator {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("LindbladGenerator")
            .field("dim", &self.dim)
            .field("dissipators", &self.dissipators.len())
            .finish()
    }
}

impl LindbladGenerator {
    pub fn new(dim: usize, hamiltonian: impl Fn(f64) -> Matrix + Send + Sync + 'static) -> Self {
        Self { dim, hamiltonian: Box::new(hamiltonian), dissipators: Vec::new(), rate_tol: RATE_TOL }
    }

    /// Adds a constant Lindblad operator with rate `c(t)`.
    pub fn with_dissipator(self, op: Matrix, rate: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.with_fallible_dissipator(op, move |t| Ok(rate(t)))
    }

    /// Adds a constant Lindblad operator whose rate evaluation may fail.
    pub fn with_fallible_dissipator(
        mut self,
        op: Matrix,
        rate: impl Fn(f64) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        self.dissipators.push(Dissipator { op: OperatorFn::Constant(Term::new(op, 0.0)), rate: Box::new(rate) });
        self
    }

    /// Adds a time-dependent Lindblad operator.
    pub fn with_varying_dissipator(
        mut self,
        op: impl Fn(f64) -> Matrix + Send + Sync + 'static,
        rate: impl Fn(f64) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        self.dissipators.push(Dissipator { op: OperatorFn::Varying(Box::new(op)), rate: Box::new(rate) });
        self
    }

    pub fn with_rate_tolerance(mut self, tol: f64) -> Self {
        self.rate_tol = tol;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_dissipators(&self) -> usize {
        self.dissipators.len()
    }

    /// Rates c_n(t), validated for sign.
    pub fn rates(&self, t: f64) -> Result<Vec<f64>> {
        self.dissipators.iter().enumerate().map(|(index, d)| self.checked_rate(index, d, t)).collect()
    }

    fn checked_rate(&self, index: usize, d: &Dissipator, t: f64) -> Result<f64> {
        let value = (d.rate)(t)?;
        if !(value >= -self.rate_tol) {
            return Err(Error::NegativeRate { index, t, value });
        }
        Ok(value.max(0.0))
    }

    /// Everything needed to evaluate right-hand sides at time `t`.
    pub fn at(&self, t: f64) -> Result<GeneratorAt> {
        let h = (self.hamiltonian)(t);
        self.check_dim(&h)?;
        let residual = h.hermiticity_residual();
        let tol = Tolerances::default().herm * h.max_abs().max(1.0);
        if !(residual <= tol) {
            return Err(Error::NotHermitian { residual, tol });
        }
        let hamiltonian = if residual == 0.0 { h } else { h.hermitian_part() };
        let mut terms = Vec::with_capacity(self.dissipators.len());
        for (index, d) in self.dissipators.iter().enumerate() {
            let rate = self.checked_rate(index, d, t)?;
            let term = match &d.op {
                OperatorFn::Constant(term) => Term { rate, ..term.clone() },
                OperatorFn::Varying(f) => Term::new(f(t), rate),
            };
            self.check_dim(&term.op)?;
            terms.push(term);
        }
        Ok(GeneratorAt { t, hamiltonian, terms })
    }

    fn check_dim(&self, m: &Matrix) -> Result<()> {
        if m.dim() != self.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: m.dim() });
        }
        Ok(())
    }
}

/// One dissipator evaluated at a fixed time, with its derived products.
#[derive(Debug, Clone)]
pub struct Term {
    pub rate: f64,
    pub op: Matrix,
    pub op_dag: Matrix,
    /// L†L
    pub op_dag_op: Matrix,
    /// [L†, L]
    pub op_comm: Matrix,
}

impl Term {
    fn new(op: Matrix, rate: f64) -> Self {
        let op_dag = op.adjoint();
        let op_dag_op = (&op_dag * &op).hermitian_part();
        let op_op_dag = op.matmul_adjoint(&op).hermitian_part();
        let op_comm = &op_dag_op - &op_op_dag;
        Self { rate, op, op_dag, op_dag_op, op_comm }
    }
}

/// A generator frozen at time `t`.
#[derive(Debug, Clone)]
pub struct GeneratorAt {
    pub t: f64,
    pub hamiltonian: Matrix,
    pub terms: Vec<Term>,
}

impl GeneratorAt {
    /// Lindblad right-hand side for a Hermitian ρ; the result is exactly Hermitian.
    pub fn state_rhs(&self, rho: &Matrix) -> Matrix {
        let hr = &self.hamiltonian * rho;
        let mut out = anti_hermitian_to_hermitian(&hr);
        for term in self.terms.iter().filter(|t| t.rate != 0.0) {
            let m = &term.op_dag_op * rho;
            let lrl = (&term.op * rho).matmul_adjoint(&term.op);
            out.axpy(-ONE * term.rate, &hermitian_sum(&m));
            out.axpy(ONE * (2.0 * term.rate), &lrl);
        }
        out.hermitian_part()
    }

    /// Weak-invariant right-hand side for a Hermitian I; the result is exactly Hermitian.
    pub fn invariant_rhs(&self, inv: &Matrix) -> Matrix {
        let hi = &self.hamiltonian * inv;
        let mut out = anti_hermitian_to_hermitian(&hi);
        for term in self.terms.iter().filter(|t| t.rate != 0.0) {
            let m = &term.op_dag_op * inv;
            let lil = (&term.op_dag * inv).matmul(&term.op);
            out.axpy(ONE * term.rate, &hermitian_sum(&m));
            out.axpy(-ONE * (2.0 * term.rate), &lil);
        }
        out.hermitian_part()
    }

    /// 2 Σ c_n tr([L_n,I]†[L_n,I] ρ)
    pub fn growth_rate(&self, inv: &Matrix, rho: &Matrix) -> f64 {
        let mut acc = 0.0;
        for term in self.terms.iter().filter(|t| t.rate != 0.0) {
            let c = &(&term.op * inv) - &(inv * &term.op);
            let cr = &c * rho;
            // tr(C† M) = Σ conj(C_ij) M_ij
            let s: f64 = c.as_slice().iter().zip(cr.as_slice()).map(|(a, b)| (a.conj() * b).re).sum();
            acc += 2.0 * term.rate * s;
        }
        acc
    }

    /// 2 Σ c_n tr([L_n†,L_n] w) for a weight matrix `w` (ρ or an escort density).
    pub fn commutator_bound(&self, w: &Matrix) -> f64 {
        self.terms.iter().filter(|t| t.rate != 0.0).map(|t| 2.0 * t.rate * t.op_comm.trace_product(w).re).sum()
    }
}

/// −i(X − X†) for X = A·B with A, B Hermitian, i.e. −i[A,B].
fn anti_hermitian_to_hermitian(x: &Matrix) -> Matrix {
    let mut out = x - &x.adjoint();
    out = out.scale_c(-I);
    out
}

/// X + X†
fn hermitian_sum(x: &Matrix) -> Matrix {
    x + &x.adjoint()
}

pub fn lindblad_rhs(gen: &LindbladGenerator, rho: &DensityMatrix, t: f64) -> Result<Matrix> {
    check_dim(gen, rho)?;
    Ok(gen.at(t)?.state_rhs(rho))
}

pub fn weak_invariant_rhs(gen: &LindbladGenerator, inv: &HermitianOperator, t: f64) -> Result<Matrix> {
    check_dim(gen, inv)?;
    Ok(gen.at(t)?.invariant_rhs(inv))
}

/// İ − (weak-invariant right-hand side) for a candidate I(t) with known
/// time derivative. Zero when I is a weak invariant of `gen`.
pub fn weak_invariant_residual(gen: &LindbladGenerator, inv: &Matrix, inv_dot: &Matrix, t: f64) -> Result<Matrix> {
    check_dim(gen, inv)?;
    check_dim(gen, inv_dot)?;
    Ok(inv_dot - &gen.at(t)?.invariant_rhs(inv))
}

/// d(ΔI)²/dt = 2 Σ c_n ⟨[L_n,I]†[L_n,I]⟩
pub fn fluctuation_growth_rate(
    gen: &LindbladGenerator,
    inv: &HermitianOperator,
    rho: &DensityMatrix,
    t: f64,
) -> Result<f64> {
    check_dim(gen, inv)?;
    check_dim(gen, rho)?;
    Ok(gen.at(t)?.growth_rate(inv, rho))
}

/// 2 Σ c_n ⟨[L_n†,L_n]⟩, the lower bound on dS/dt.
pub fn entropy_rate_bound(gen: &LindbladGenerator, rho: &DensityMatrix, t: f64) -> Result<f64> {
    check_dim(gen, rho)?;
    Ok(gen.at(t)?.commutator_bound(rho))
}

/// 2 Σ c_n ⟨[L_n†,L_n]⟩_α with the α-expectation taken in the escort density.
pub fn renyi_rate_bound(gen: &LindbladGenerator, rho: &DensityMatrix, t: f64, alpha: f64) -> Result<f64> {
    check_dim(gen, rho)?;
    let escort = escort_density(rho, alpha)?;
    Ok(gen.at(t)?.commutator_bound(&escort))
}

fn check_dim(gen: &LindbladGenerator, m: &Matrix) -> Result<()> {
    if m.dim() != gen.dim() {
        return Err(Error::DimensionMismatch { left: gen.dim(), right: m.dim() });
    }
    Ok(())
}

fn check_order(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidOrder { alpha });
    }
    Ok(())
}

fn vn_from_eigenvalues(eigs: &[f64]) -> f64 {
    -eigs.iter().filter(|&&l| l > ENTROPY_FLOOR).map(|&l| l * math::ln(l)).sum::<f64>()
}

fn renyi_from_eigenvalues(eigs: &[f64], alpha: f64) -> f64 {
    if alpha == 1.0 {
        return vn_from_eigenvalues(eigs);
    }
    let s: f64 = eigs.iter().filter(|&&l| l > ENTROPY_FLOOR).map(|&l| math::powf(l, alpha)).sum();
    math::ln(s) / (1.0 - alpha)
}

/// Escort weights λ^α / Σ λ^α over the retained eigenvalues.
fn escort_weights(eigs: &[f64], alpha: f64) -> Vec<f64> {
    let raw: Vec<f64> = eigs.iter().map(|&l| if l > ENTROPY_FLOOR { math::powf(l, alpha) } else { 0.0 }).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|w| w / total).collect()
}

fn weighted(vectors: &Matrix, weights: &[f64]) -> Matrix {
    let n = vectors.dim();
    let scaled = Matrix::from_fn(n, |i, k| vectors[(i, k)] * weights[k]);
    scaled.matmul_adjoint(vectors).hermitian_part()
}

/// −tr ρ ln ρ
pub fn vn_entropy(rho: &DensityMatrix) -> Result<f64> {
    let (eigs, _) = hermitian_eigen(rho)?;
    Ok(vn_from_eigenvalues(&eigs))
}

/// (1 − α)⁻¹ ln tr ρ^α; the von Neumann limit at α = 1.
pub fn renyi_entropy(rho: &DensityMatrix, alpha: f64) -> Result<f64> {
    check_order(alpha)?;
    let (eigs, _) = hermitian_eigen(rho)?;
    Ok(renyi_from_eigenvalues(&eigs, alpha))
}

/// ρ^α / tr ρ^α
pub fn escort_density(rho: &DensityMatrix, alpha: f64) -> Result<DensityMatrix> {
    check_order(alpha)?;
    let (eigs, vectors) = hermitian_eigen(rho)?;
    DensityMatrix::new(weighted(&vectors, &escort_weights(&eigs, alpha)))
}

/// Per-node diagnostics recorded along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeRecord {
    pub t: f64,
    pub exp_i: f64,
    pub var_i: f64,
    /// tr(I²ρ)
    pub second_moment: f64,
    pub growth_formula: f64,
    /// Finite-difference derivative of `var_i` (one-sided at the ends).
    pub growth_fd: f64,
    pub s_vn: f64,
    pub s_renyi: f64,
    pub bound_vn: f64,
    pub bound_renyi: f64,
    pub trace_err: f64,
    pub min_eig: f64,
}

/// How the invariant is advanced alongside the state.
pub enum InvariantSource<'a> {
    /// Integrate the weak-invariant equation forward from I(t0).
    Evolve(HermitianOperator),
    /// Take I(t) from a known solution, e.g. an isoenergetic Hamiltonian.
    Prescribed(&'a (dyn Fn(f64) -> Result<Matrix> + Sync)),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationSettings {
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    /// Rényi order recorded in the trajectory.
    pub alpha: f64,
    /// Allowed drift of ⟨I⟩, relative to max(1, |⟨I(t0)⟩|).
    pub conservation_tol: f64,
    /// Integration aborts once min eig ρ falls below `−positivity_floor`.
    pub positivity_floor: f64,
}

impl IntegrationSettings {
    pub fn new(t0: f64, t1: f64, dt: f64) -> Self {
        Self { t0, t1, dt, alpha: 2.0, conservation_tol: 1e-7, positivity_floor: 1e-8 }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    /// Number of uniform steps; the step actually taken is `(t1 − t0) / steps`.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidStep { dt: self.dt });
        }
        if !(self.t1 > self.t0) || !self.t1.is_finite() || !self.t0.is_finite() {
            return Err(Error::InvalidInterval { t0: self.t0, t1: self.t1 });
        }
        let raw = (self.t1 - self.t0) / self.dt;
        Ok((math::ceil(raw - 1e-9) as usize).max(1))
    }

    pub fn times(&self) -> Result<Vec<f64>> {
        let n = self.steps()?;
        let h = (self.t1 - self.t0) / n as f64;
        Ok((0..=n).map(|k| if k == n { self.t1 } else { self.t0 + k as f64 * h }).collect())
    }
}

/// A sampled solution with its diagnostic series.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub alpha: f64,
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub invariants: Vec<HermitianOperator>,
    pub records: Vec<NodeRecord>,
}

/// Outcome of a lower-bound check on a rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    /// min over interior nodes of `rate − bound + allowance`; passes iff ≥ 0.
    pub min_slack: f64,
    pub worst_index: usize,
}

impl BoundCheck {
    pub fn passed(&self) -> bool {
        self.min_slack >= 0.0
    }
}

/// Checks `d(series)/dt ≥ bound − max(abs_floor, rel·|bound|)` at interior nodes.
pub fn rate_bound_check(times: &[f64], series: &[f64], bound: &[f64], abs_floor: f64, rel: f64) -> BoundCheck {
    let rate = diff::derivative(times, series);
    let mut out = BoundCheck { min_slack: f64::INFINITY, worst_index: 0 };
    for i in 1..times.len().saturating_sub(1) {
        let slack = rate[i] - bound[i] + abs_floor.max(rel * bound[i].abs());
        let slack = if slack.is_nan() { f64::NEG_INFINITY } else { slack };
        if slack < out.min_slack {
            out = BoundCheck { min_slack: slack, worst_index: i };
        }
    }
    out
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn column(&self, f: impl Fn(&NodeRecord) -> f64) -> Vec<f64> {
        self.records.iter().map(f).collect()
    }

    /// Largest |⟨I(t)⟩ − ⟨I(t0)⟩|.
    pub fn conservation_drift(&self) -> f64 {
        let e0 = self.records[0].exp_i;
        self.records.iter().map(|r| (r.exp_i - e0).abs()).fold(0.0, f64::max)
    }

    /// Finite-difference growth against the formula at interior nodes.
    pub fn growth_agreement(&self, abs_floor: f64, rel: f64) -> diff::Agreement {
        let fd = self.column(|r| r.growth_fd);
        let formula = self.column(|r| r.growth_formula);
        diff::agreement(&fd, &formula, 1..self.len().saturating_sub(1), abs_floor, rel)
    }

    /// Largest single-step decrease of (ΔI)².
    pub fn variance_max_decrease(&self) -> f64 {
        diff::max_step_decrease(&self.column(|r| r.var_i))
    }

    /// Largest fall of tr(I²ρ) below any earlier value.
    pub fn second_moment_max_drop(&self) -> f64 {
        diff::max_drop(&self.column(|r| r.second_moment))
    }

    /// Entropy-rate bound check for the recorded von Neumann series.
    pub fn vn_bound_check(&self, abs_floor: f64, rel: f64) -> BoundCheck {
        rate_bound_check(&self.times, &self.column(|r| r.s_vn), &self.column(|r| r.bound_vn), abs_floor, rel)
    }

    /// Rényi entropy and its rate bound at order `alpha`, recomputed from the
    /// stored states.
    pub fn renyi_series(&self, gen: &LindbladGenerator, alpha: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        check_order(alpha)?;
        let mut s = Vec::with_capacity(self.len());
        let mut b = Vec::with_capacity(self.len());
        for (&t, rho) in self.times.iter().zip(&self.states) {
            let (eigs, vectors) = hermitian_eigen(rho)?;
            s.push(renyi_from_eigenvalues(&eigs, alpha));
            b.push(gen.at(t)?.commutator_bound(&weighted(&vectors, &escort_weights(&eigs, alpha))));
        }
        Ok((s, b))
    }

    pub fn renyi_bound_check(
        &self,
        gen: &LindbladGenerator,
        alpha: f64,
        abs_floor: f64,
        rel: f64,
    ) -> Result<BoundCheck> {
        let (s, b) = self.renyi_series(gen, alpha)?;
        Ok(rate_bound_check(&self.times, &s, &b, abs_floor, rel))
    }
}

/// One classic RK4 step of the state equation alone.
pub fn rk4_state_step(gen: &LindbladGenerator, rho: &Matrix, t: f64, dt: f64) -> Result<Matrix> {
    let g1 = gen.at(t)?;
    let g2 = gen.at(t + 0.5 * dt)?;
    let g4 = gen.at(t + dt)?;
    Ok(rk4(rho, dt, |stage, x| match stage {
        0 => g1.state_rhs(x),
        3 => g4.state_rhs(x),
        _ => g2.state_rhs(x),
    }))
}

fn rk4(y: &Matrix, h: f64, f: impl Fn(usize, &Matrix) -> Matrix) -> Matrix {
    let k1 = f(0, y);
    let mut y2 = y.clone();
    y2.axpy(ONE * (0.5 * h), &k1);
    let k2 = f(1, &y2);
    let mut y3 = y.clone();
    y3.axpy(ONE * (0.5 * h), &k2);
    let k3 = f(2, &y3);
    let mut y4 = y.clone();
    y4.axpy(ONE * h, &k3);
    let k4 = f(3, &y4);
    let mut out = y.clone();
    out.axpy(ONE * (h / 6.0), &k1);
    out.axpy(ONE * (h / 3.0), &k2);
    out.axpy(ONE * (h / 3.0), &k3);
    out.axpy(ONE * (h / 6.0), &k4);
    out.hermitian_part()
}

/// Integrates state and invariant together with shared RK4 stages.
pub fn integrate(
    gen: &LindbladGenerator,
    rho0: &DensityMatrix,
    i0: &HermitianOperator,
    settings: &IntegrationSettings,
) -> Result<Trajectory> {
    integrate_with(gen, rho0, InvariantSource::Evolve(i0.clone()), settings)
}

pub fn integrate_with(
    gen: &LindbladGenerator,
    rho0: &DensityMatrix,
    source: InvariantSource<'_>,
    settings: &IntegrationSettings,
) -> Result<Trajectory> {
    check_dim(gen, rho0)?;
    check_order(settings.alpha)?;
    let times = settings.times()?;
    let n = times.len() - 1;
    let h = (settings.t1 - settings.t0) / n as f64;

    let mut rho: Matrix = (**rho0).clone();
    let mut inv = match &source {
        InvariantSource::Evolve(i0) => i0.matrix().clone(),
        InvariantSource::Prescribed(f) => f(times[0])?,
    };
    check_dim(gen, &inv)?;

    let mut traj = Trajectory {
        alpha: settings.alpha,
        times: Vec::with_capacity(n + 1),
        states: Vec::with_capacity(n + 1),
        invariants: Vec::with_capacity(n + 1),
        records: Vec::with_capacity(n + 1),
    };

    let mut current = gen.at(times[0])?;
    let mut exp0 = None;
    for k in 0..=n {
        let t = times[k];
        let record = measure(&current, &rho, &inv, settings.alpha)?;
        if record.min_eig < -settings.positivity_floor {
            return Err(Error::PositivityBreach { t, min_eig: record.min_eig });
        }
        let e0 = *exp0.get_or_insert(record.exp_i);
        let tol = settings.conservation_tol * e0.abs().max(1.0);
        let drift = (record.exp_i - e0).abs();
        if !(drift <= tol) {
            return Err(Error::ConservationBreach { t, drift, tol });
        }
        traj.times.push(t);
        traj.states.push(DensityMatrix::measured(rho.clone(), record.trace_err, record.min_eig));
        traj.invariants.push(HermitianOperator::new(inv.clone())?);
        traj.records.push(record);
        if k == n {
            break;
        }

        let mid = gen.at(t + 0.5 * h)?;
        let next = gen.at(times[k + 1])?;
        let stage = |s: usize| match s {
            0 => &current,
            3 => &next,
            _ => &mid,
        };
        rho = rk4(&rho, h, |s, x| stage(s).state_rhs(x));
        inv = match &source {
            InvariantSource::Evolve(_) => rk4(&inv, h, |s, x| stage(s).invariant_rhs(x)),
            InvariantSource::Prescribed(f) => f(times[k + 1])?,
        };
        if !rho.is_finite() || !inv.is_finite() {
            return Err(Error::NonFinite { t: times[k + 1] });
        }
        current = next;
    }

    let var = traj.column(|r| r.var_i);
    let fd = diff::derivative(&traj.times, &var);
    for (r, d) in traj.records.iter_mut().zip(fd) {
        r.growth_fd = d;
    }
    Ok(traj)
}

fn measure(at: &GeneratorAt, rho: &Matrix, inv: &Matrix, alpha: f64) -> Result<NodeRecord> {
    let (eigs, vectors) = hermitian_eigen(rho)?;
    let ir = inv * rho;
    let exp_i = ir.trace().re;
    let second_moment = inv.trace_product(&ir).re;
    let var_i = clip_variance(second_moment - exp_i * exp_i)?.value;
    let escort = weighted(&vectors, &escort_weights(&eigs, alpha));
    Ok(NodeRecord {
        t: at.t,
        exp_i,
        var_i,
        second_moment,
        growth_formula: at.growth_rate(inv, rho),
        growth_fd: f64::NAN,
        s_vn: vn_from_eigenvalues(&eigs),
        s_renyi: renyi_from_eigenvalues(&eigs, alpha),
        bound_vn: at.commutator_bound(rho),
        bound_renyi: at.commutator_bound(&escort),
        trace_err: (rho.trace().re - 1.0).abs(),
        min_eig: eigs.first().copied().unwrap_or(0.0),
    })
}

/// Builds the diagonal state `diag(p)`, normalized.
pub fn diagonal_state(p: &[f64]) -> Result<DensityMatrix> {
    let total: f64 = p.iter().sum();
    if !(total > 0.0) || p.iter().any(|&x| x < 0.0) {
        return Err(Error::InvalidParameter("diagonal weights must be nonnegative with positive sum".into()));
    }
    let scaled: Vec<f64> = p.iter().map(|x| x / total).collect();
    DensityMatrix::new(Matrix::from_diagonal(&scaled))
}
