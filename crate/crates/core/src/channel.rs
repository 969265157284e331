//! Completely positive trace-preserving maps in Kraus form.
//!
//! A channel carries the time stamps of the interval it propagates over, so
//! finite-time maps can be chained from short-time factors with [`compose`].
//! The adjoint map acts on observables; because the Kraus operators resolve
//! the identity, the adjoint fixes 𝟙, and the Kadison gap
//! Φ*(I²) − Φ*(I)² is positive semidefinite for every Hermitian I.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lindblad::LindbladGenerator;
use crate::math;
use crate::matrix::{pauli, Matrix, C64, I, ONE};
use crate::operator::{DensityMatrix, HermitianOperator, Tolerances};
use crate::random::{haar_isometry, Rng};

/// Default bound on ‖Σ V†V − 𝟙‖_max.
pub const CPTP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    dim: usize,
    kraus: Vec<Matrix>,
    t_from: f64,
    t_to: f64,
    tp_residual: f64,
    tp_tol: f64,
}

impl QuantumChannel {
    pub fn new(kraus: Vec<Matrix>, t_from: f64, t_to: f64) -> Result<Self> {
        Self::with_tolerance(kraus, t_from, t_to, CPTP_TOL)
    }

    pub fn with_tolerance(kraus: Vec<Matrix>, t_from: f64, t_to: f64, tp_tol: f64) -> Result<Self> {
        let first = kraus.first().ok_or(Error::EmptyKraus)?;
        let dim = first.dim();
        for k in &kraus {
            first.check_same_dim(k)?;
        }
        let tp_residual = tp_residual(&kraus, dim);
        if !(tp_residual <= tp_tol) {
            return Err(Error::NotTracePreserving { residual: tp_residual, tol: tp_tol });
        }
        Ok(Self { dim, kraus, t_from, t_to, tp_residual, tp_tol })
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(alloc::vec![Matrix::identity(dim)], 0.0, 0.0).expect("identity is trace preserving")
    }

    /// Single-Kraus channel ρ ↦ UρU†.
    pub fn unitary(u: Matrix) -> Result<Self> {
        Self::new(alloc::vec![u], 0.0, 0.0)
    }

    /// {√(1−p)𝟙, √p σ₁}
    pub fn bit_flip(p: f64) -> Result<Self> {
        check_probability(p)?;
        let [x, _, _] = pauli();
        Self::new(alloc::vec![Matrix::identity(2).scale(math::sqrt(1.0 - p)), x.scale(math::sqrt(p))], 0.0, 0.0)
    }

    /// {√(1−p)𝟙, √(p/3)σ₁, √(p/3)σ₂, √(p/3)σ₃}
    pub fn depolarizing(p: f64) -> Result<Self> {
        check_probability(p)?;
        let s = math::sqrt(p / 3.0);
        let mut kraus = alloc::vec![Matrix::identity(2).scale(math::sqrt(1.0 - p))];
        kraus.extend(pauli().iter().map(|m| m.scale(s)));
        Self::new(kraus, 0.0, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[Matrix] {
        &self.kraus
    }

    pub fn t_from(&self) -> f64 {
        self.t_from
    }

    pub fn t_to(&self) -> f64 {
        self.t_to
    }

    /// Relabels the interval this channel propagates over.
    pub fn over(mut self, t_from: f64, t_to: f64) -> Self {
        self.t_from = t_from;
        self.t_to = t_to;
        self
    }

    /// Measured ‖Σ V†V − 𝟙‖_max.
    pub fn tp_residual(&self) -> f64 {
        self.tp_residual
    }

    /// Σ_k V_k X V_k† for an arbitrary matrix.
    pub fn apply_matrix(&self, x: &Matrix) -> Result<Matrix> {
        self.check_dim(x)?;
        let mut out = Matrix::zeros(self.dim);
        for v in &self.kraus {
            out += &(v * x).matmul_adjoint(v);
        }
        Ok(out)
    }

    /// Σ_k V_k ρ V_k†, certified as a state.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let out = self.apply_matrix(rho)?;
        let tol = Tolerances {
            trace: Tolerances::default().trace + self.dim as f64 * self.tp_residual,
            ..Tolerances::default()
        };
        DensityMatrix::with_tolerances(out, &tol)
    }

    /// Σ_k V_k† X V_k for an arbitrary matrix.
    pub fn adjoint_apply_matrix(&self, x: &Matrix) -> Result<Matrix> {
        self.check_dim(x)?;
        let mut out = Matrix::zeros(self.dim);
        for v in &self.kraus {
            out += &(&v.adjoint() * x).matmul(v);
        }
        Ok(out)
    }

    /// Φ*(X) = Σ_k V_k† X V_k. Given a later invariant I(t′), this is the
    /// earlier member I(t) of the pair.
    pub fn adjoint_apply(&self, x: &HermitianOperator) -> Result<HermitianOperator> {
        HermitianOperator::new(self.adjoint_apply_matrix(x)?)
    }

    /// Φ*(I²) − (Φ*(I))²
    pub fn kadison_gap(&self, i: &HermitianOperator) -> Result<HermitianOperator> {
        let square = HermitianOperator::new(i.matrix() * i.matrix())?;
        let of_square = self.adjoint_apply(&square)?;
        let image = self.adjoint_apply(i)?;
        HermitianOperator::new(of_square.matrix() - &(image.matrix() * image.matrix()))
    }

    fn check_dim(&self, x: &Matrix) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: x.dim() });
        }
        Ok(())
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(alloc::format!("probability must lie in [0, 1], got {p}")));
    }
    Ok(())
}

fn tp_residual(kraus: &[Matrix], dim: usize) -> f64 {
    let mut sum = Matrix::zeros(dim);
    for v in kraus {
        sum += &v.adjoint().matmul(v);
    }
    (&sum - &Matrix::identity(dim)).max_abs()
}

/// The channel `later ∘ earlier`, with Kraus list {W_j V_k} (j outer).
pub fn compose(later: &QuantumChannel, earlier: &QuantumChannel) -> Result<QuantumChannel> {
    if later.dim != earlier.dim {
        return Err(Error::DimensionMismatch { left: later.dim, right: earlier.dim });
    }
    let gap = (later.t_from - earlier.t_to).abs();
    if gap > 1e-12 * later.t_from.abs().max(1.0) {
        return Err(Error::TimeStampMismatch { later_from: later.t_from, earlier_to: earlier.t_to });
    }
    let kraus: Vec<Matrix> = later.kraus.iter().flat_map(|w| earlier.kraus.iter().map(move |v| w * v)).collect();
    let tol = (later.tp_tol + earlier.tp_tol) * later.dim as f64 + 1e-12;
    QuantumChannel::with_tolerance(kraus, earlier.t_from, later.t_to, tol)
}

/// Short-time Kraus factor of a Lindblad generator:
/// V₀ = 𝟙 − i dt H − dt Σ c_n L_n†L_n and V_n = √(2 c_n dt) L_n.
///
/// Trace preservation holds only to second order in `dt`; the channel records
/// the measured residual and accepts anything within `10·dt²·scale²`.
pub fn lindblad_step_channel(gen: &LindbladGenerator, t: f64, dt: f64) -> Result<QuantumChannel> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidStep { dt });
    }
    let at = gen.at(t)?;
    let n = gen.dim();
    let mut v0 = Matrix::identity(n);
    v0.axpy(-I * dt, &at.hamiltonian);
    let mut scale = at.hamiltonian.max_abs();
    let mut kraus = Vec::with_capacity(at.terms.len() + 1);
    for term in &at.terms {
        if term.rate == 0.0 {
            continue;
        }
        v0.axpy(-ONE * (dt * term.rate), &term.op_dag_op);
        scale = scale.max(term.rate * term.op_dag_op.max_abs());
        kraus.push(term.op.scale(math::sqrt(2.0 * term.rate * dt)));
    }
    kraus.insert(0, v0);
    let scale = scale.max(1.0) * n as f64;
    let tol = (10.0 * dt * dt * scale * scale).max(CPTP_TOL);
    QuantumChannel::with_tolerance(kraus, t, t + dt, tol)
}

/// Composition of `steps` short-time factors covering `[t, t + dt]`.
pub fn lindblad_channel(gen: &LindbladGenerator, t: f64, dt: f64, steps: usize) -> Result<QuantumChannel> {
    if steps == 0 {
        return Err(Error::InvalidParameter("need at least one micro-step".into()));
    }
    let h = dt / steps as f64;
    let stamp = |k: usize| if k == steps { t + dt } else { t + k as f64 * h };
    let mut acc = lindblad_step_channel(gen, t, h)?.over(t, stamp(1));
    for k in 1..steps {
        let step = lindblad_step_channel(gen, stamp(k), h)?.over(stamp(k), stamp(k + 1));
        acc = compose(&step, &acc)?;
    }
    Ok(acc)
}

/// Random channel from a Haar isometry 𝒞^dim → 𝒞^(dim·n_kraus) cut into
/// `n_kraus` square blocks. Deterministic in `seed`.
pub fn random_channel(dim: usize, n_kraus: usize, seed: u64) -> Result<QuantumChannel> {
    let mut rng = Rng::seed(seed);
    random_channel_with(&mut rng, dim, n_kraus)
}

pub fn random_channel_with(rng: &mut Rng, dim: usize, n_kraus: usize) -> Result<QuantumChannel> {
    if dim < 2 || n_kraus < 1 {
        return Err(Error::InvalidParameter(alloc::format!(
            "random channel needs dim >= 2 and at least one Kraus operator (got {dim}, {n_kraus})"
        )));
    }
    let cols = haar_isometry(rng, dim * n_kraus, dim);
    let kraus = (0..n_kraus).map(|k| Matrix::from_fn(dim, |i, j| cols[j][k * dim + i])).collect();
    QuantumChannel::with_tolerance(kraus, 0.0, 1.0, 1e-12)
}

/// Kraus operators assembled from plain rows, handy in tests and configs.
pub fn kraus_from_entries(dim: usize, entries: &[Vec<C64>]) -> Result<Vec<Matrix>> {
    entries
        .iter()
        .map(|e| {
            let m = Matrix::from_row_major(e.clone())?;
            if m.dim() != dim {
                return Err(Error::DimensionMismatch { left: dim, right: m.dim() });
            }
            Ok(m)
        })
        .collect()
}
