//! Two isoenergetic models in which the Hamiltonian itself is a weak invariant.
//!
//! * A unit-mass oscillator with decreasing stiffness, H = K₁ + k(t)K₂, built
//!   on a truncated Fock space from the su(1,1) generators K₁ = p²/2,
//!   K₂ = x²/2, K₃ = (px + xp)/2. The single Lindblad operator is K₂ with
//!   rate c = −k̇/2.
//! * A spin in a magnetic field, H = B(t)·σ, with L_n = σ_n and rates fixed
//!   by the field history.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lindblad::{weak_invariant_residual, LindbladGenerator};
use crate::math;
use crate::matrix::{pauli, Matrix, C64};
use crate::operator::{DensityMatrix, HermitianOperator};

/// Smallest truncation accepted for the oscillator.
pub const MIN_FOCK: usize = 8;

/// Fock levels at the top of the truncation excluded from algebra checks.
pub const ALGEBRA_MARGIN: usize = 2;

/// Levels excluded when checking the invariant equation, whose nested
/// commutators reach two levels deeper than a single product.
pub const RESIDUAL_MARGIN: usize = 4;

/// Largest occupation tolerated in the top two Fock levels.
pub const EDGE_OCCUPATION_TOL: f64 = 1e-8;

/// Coefficient sign tolerance shared by both models.
pub const COEFF_TOL: f64 = 1e-12;

/// The su(1,1) generators on a truncated Fock space.
#[derive(Debug, Clone)]
pub struct Su11Ops {
    pub k1: Matrix,
    pub k2: Matrix,
    pub k3: Matrix,
    pub omega_ref: f64,
}

/// Builds K₁, K₂, K₃ at reference frequency `omega_ref` from their
/// normal-ordered ladder forms
/// K₁ = (ω/4)(2n + 1 − a² − a†²), K₂ = (2n + 1 + a² + a†²)/(4ω), K₃ = (i/2)(a†² − a²).
/// Each matrix is the exact truncation of the infinite operator.
pub fn build_su11_ops(n_fock: usize, omega_ref: f64) -> Result<Su11Ops> {
    if n_fock < MIN_FOCK {
        return Err(Error::InvalidParameter(alloc::format!("n_fock must be at least {MIN_FOCK}, got {n_fock}")));
    }
    if !(omega_ref > 0.0 && omega_ref.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!("reference frequency must be positive, got {omega_ref}")));
    }
    // ⟨n−2| a² |n⟩ = √(n(n−1))
    let lower2 = |i: usize, j: usize| if j == i + 2 { math::sqrt((j * (j - 1)) as f64) } else { 0.0 };
    let number = |i: usize, j: usize| if i == j { (2 * i + 1) as f64 } else { 0.0 };
    let k1 =
        Matrix::from_fn(n_fock, |i, j| C64::new(0.25 * omega_ref * (number(i, j) - lower2(i, j) - lower2(j, i)), 0.0));
    let k2 =
        Matrix::from_fn(n_fock, |i, j| C64::new((number(i, j) + lower2(i, j) + lower2(j, i)) / (4.0 * omega_ref), 0.0));
    let k3 = Matrix::from_fn(n_fock, |i, j| C64::new(0.0, 0.5 * (lower2(j, i) - lower2(i, j))));
    Ok(Su11Ops { k1, k2, k3, omega_ref })
}

/// Ladder operator a on `n_fock` levels.
pub fn annihilation(n_fock: usize) -> Matrix {
    Matrix::from_fn(n_fock, |i, j| C64::new(if j == i + 1 { math::sqrt(j as f64) } else { 0.0 }, 0.0))
}

/// Largest entry of `m` on the leading block that drops the top `margin` levels.
pub fn interior_max_abs(m: &Matrix, margin: usize) -> f64 {
    m.leading_block(m.dim().saturating_sub(margin)).max_abs()
}

/// Total population in the top `levels` basis states.
pub fn edge_occupation(rho: &Matrix, levels: usize) -> f64 {
    let n = rho.dim();
    (n.saturating_sub(levels)..n).map(|i| rho[(i, i)].re).sum()
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(f64) -> [f64; 3] + Send + Sync>;

/// Oscillator with stiffness k(t) = ω(t)² and its analytic derivative.
#[derive(Clone)]
pub struct OscillatorModel {
    pub n_fock: usize,
    pub k: ScalarFn,
    pub kdot: ScalarFn,
    ops: Arc<Su11Ops>,
}

impl core::fmt::Debug for OscillatorModel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("OscillatorModel").field("n_fock", &self.n_fock).field("omega_ref", &self.ops.omega_ref).finish()
    }
}

impl OscillatorModel {
    /// Operators are built at ω_ref = √k(0).
    pub fn new(
        n_fock: usize,
        k: impl Fn(f64) -> f64 + Send + Sync + 'static,
        kdot: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let k0 = k(0.0);
        if !(k0 > 0.0) {
            return Err(Error::NonPositiveStiffness { t: 0.0, k: k0 });
        }
        let ops = Arc::new(build_su11_ops(n_fock, math::sqrt(k0))?);
        Ok(Self { n_fock, k: Arc::new(k), kdot: Arc::new(kdot), ops })
    }

    /// k(t) = k0 / (1 + rate·t).
    pub fn inverse_linear(n_fock: usize, k0: f64, rate: f64) -> Result<Self> {
        Self::new(n_fock, move |t| k0 / (1.0 + rate * t), move |t| -k0 * rate / ((1.0 + rate * t) * (1.0 + rate * t)))
    }

    pub fn ops(&self) -> &Su11Ops {
        &self.ops
    }

    /// Dissipation rate c(t) = −k̇(t)/2, rejecting increasing stiffness.
    pub fn rate(&self, t: f64) -> Result<f64> {
        let k = (self.k)(t);
        if !(k > 0.0) {
            return Err(Error::NonPositiveStiffness { t, k });
        }
        let kdot = (self.kdot)(t);
        if !(kdot <= COEFF_TOL) {
            return Err(Error::StiffnessNotDecreasing { t, kdot });
        }
        Ok((-0.5 * kdot).max(0.0))
    }

    /// Checks strict decrease and positivity of k at every node.
    pub fn validate(&self, times: &[f64]) -> Result<()> {
        for &t in times {
            self.rate(t)?;
            let kdot = (self.kdot)(t);
            if !(kdot < 0.0) {
                return Err(Error::StiffnessNotDecreasing { t, kdot });
            }
        }
        Ok(())
    }

    pub fn hamiltonian(&self, t: f64) -> Matrix {
        let mut h = self.ops.k1.clone();
        h.axpy(C64::new((self.k)(t), 0.0), &self.ops.k2);
        h
    }

    pub fn hamiltonian_dot(&self, t: f64) -> Matrix {
        self.ops.k2.scale((self.kdot)(t))
    }

    /// State with density `weights(E_n)` in the eigenbasis of H(0).
    fn state_from_spectrum(&self, weight: impl Fn(f64) -> f64) -> Result<DensityMatrix> {
        let spec = HermitianOperator::new(self.hamiltonian(0.0))?.eigh()?;
        let e0 = spec.min();
        let w: Vec<f64> = spec.eigenvalues.iter().map(|&e| weight(e - e0)).collect();
        let total: f64 = w.iter().sum();
        DensityMatrix::new(spec.with_values(&w.iter().map(|x| x / total).collect::<Vec<_>>()))
    }

    /// Ground state of H(0).
    pub fn ground_state(&self) -> Result<DensityMatrix> {
        self.state_from_spectrum(|e| if e == 0.0 { 1.0 } else { 0.0 })
    }

    /// Gibbs state of H(0) at `temperature`.
    pub fn thermal_state(&self, temperature: f64) -> Result<DensityMatrix> {
        if !(temperature > 0.0) {
            return Err(Error::NonPositiveTemperature { temperature });
        }
        self.state_from_spectrum(|e| math::exp(-e / temperature))
    }

    pub fn generator(&self) -> LindbladGenerator {
        oscillator_generator(self)
    }
}

/// H(t) = K₁ + k(t)K₂ with the single Lindblad operator K₂ at rate −k̇/2.
pub fn oscillator_generator(m: &OscillatorModel) -> LindbladGenerator {
    let hm = m.clone();
    let rm = m.clone();
    LindbladGenerator::new(m.n_fock, move |t| hm.hamiltonian(t))
        .with_fallible_dissipator(m.ops.k2.clone(), move |t| rm.rate(t))
}

/// −k̇(t)⟨K₃²⟩, the predicted growth of (ΔH)².
pub fn oscillator_predicted_growth(m: &OscillatorModel, rho: &DensityMatrix, t: f64) -> Result<f64> {
    let occupation = edge_occupation(rho, 2);
    if occupation > EDGE_OCCUPATION_TOL {
        return Err(Error::TruncationBreach { occupation });
    }
    let k3 = &m.ops.k3;
    let k3_rho = k3 * &**rho;
    Ok(-(m.kdot)(t) * k3.trace_product(&k3_rho).re)
}

/// Interior size of the weak-invariant residual for I = H(t), together with
/// ‖∂H/∂t‖ for scaling.
pub fn oscillator_invariant_residual(m: &OscillatorModel, gen: &LindbladGenerator, t: f64) -> Result<(f64, f64)> {
    let hdot = m.hamiltonian_dot(t);
    let r = weak_invariant_residual(gen, &m.hamiltonian(t), &hdot, t)?;
    Ok((interior_max_abs(&r, RESIDUAL_MARGIN), hdot.max_abs()))
}

/// Spin in a field B(t) with its analytic derivative.
#[derive(Clone)]
pub struct SpinModel {
    pub b: VectorFn,
    pub bdot: VectorFn,
}

impl core::fmt::Debug for SpinModel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("SpinModel").field("b0", &(self.b)(0.0)).finish()
    }
}

impl SpinModel {
    pub fn new(
        b: impl Fn(f64) -> [f64; 3] + Send + Sync + 'static,
        bdot: impl Fn(f64) -> [f64; 3] + Send + Sync + 'static,
    ) -> Self {
        Self { b: Arc::new(b), bdot: Arc::new(bdot) }
    }

    /// B_i(t) = b0_i · exp(r_i t).
    pub fn exponential(b0: [f64; 3], rates: [f64; 3]) -> Self {
        Self::new(
            move |t| core::array::from_fn(|i| b0[i] * math::exp(rates[i] * t)),
            move |t| core::array::from_fn(|i| rates[i] * b0[i] * math::exp(rates[i] * t)),
        )
    }

    pub fn field(&self, t: f64) -> [f64; 3] {
        (self.b)(t)
    }

    pub fn field_squared(&self, t: f64) -> f64 {
        self.field(t).iter().map(|x| x * x).sum()
    }

    pub fn hamiltonian(&self, t: f64) -> Matrix {
        field_dot_sigma(&(self.b)(t))
    }

    pub fn hamiltonian_dot(&self, t: f64) -> Matrix {
        field_dot_sigma(&(self.bdot)(t))
    }

    /// Checks realizability at every node and that the field actually moves.
    pub fn validate(&self, times: &[f64]) -> Result<()> {
        for &t in times {
            let c = spin_coefficients(self, t)?;
            if c.iter().all(|&x| x == 0.0) {
                return Err(Error::StaticField { t });
            }
        }
        Ok(())
    }

    /// Gibbs state of H(0) at `temperature`: (𝟙 − tanh(|B|/T) B̂·σ)/2.
    pub fn thermal_state(&self, temperature: f64) -> Result<DensityMatrix> {
        if !(temperature > 0.0) {
            return Err(Error::NonPositiveTemperature { temperature });
        }
        let b = self.field(0.0);
        let norm = math::sqrt(self.field_squared(0.0));
        let th = libm::tanh(norm / temperature);
        let unit: [f64; 3] = core::array::from_fn(|i| b[i] / norm);
        let mut rho = Matrix::identity(2);
        rho.axpy(C64::new(-th, 0.0), &field_dot_sigma(&unit));
        DensityMatrix::new(rho.scale(0.5))
    }

    pub fn generator(&self) -> LindbladGenerator {
        spin_generator(self)
    }
}

fn field_dot_sigma(b: &[f64; 3]) -> Matrix {
    let mut h = Matrix::zeros(2);
    for (bi, s) in b.iter().zip(pauli().iter()) {
        h.axpy(C64::new(*bi, 0.0), s);
    }
    h
}

/// c₁ = (−Ḃ₁/B₁ + Ḃ₂/B₂ + Ḃ₃/B₃)/8 and cyclic permutations.
pub fn spin_coefficients(m: &SpinModel, t: f64) -> Result<[f64; 3]> {
    let b = (m.b)(t);
    let bdot = (m.bdot)(t);
    for (component, &bi) in b.iter().enumerate() {
        if !(bi.abs() > COEFF_TOL) {
            return Err(Error::VanishingField { t, component });
        }
    }
    let g: [f64; 3] = core::array::from_fn(|i| bdot[i] / b[i]);
    let total = g[0] + g[1] + g[2];
    let mut c = [0.0; 3];
    for i in 0..3 {
        let value = (total - 2.0 * g[i]) / 8.0;
        if !(value >= -COEFF_TOL) {
            return Err(Error::UnrealizableField { t, index: i, value });
        }
        c[i] = value.max(0.0);
    }
    // Ḃ_i = 4(c_j + c_k)B_i must reproduce the field derivative
    for i in 0..3 {
        let rebuilt = 4.0 * (c[(i + 1) % 3] + c[(i + 2) % 3]) * b[i];
        if !((rebuilt - bdot[i]).abs() <= 1e-10 * bdot[i].abs().max(1.0)) {
            return Err(Error::UnrealizableField { t, index: i, value: rebuilt - bdot[i] });
        }
    }
    Ok(c)
}

/// H(t) = B(t)·σ with L_n = σ_n at the field-determined rates.
pub fn spin_generator(m: &SpinModel) -> LindbladGenerator {
    let hm = m.clone();
    let mut gen = LindbladGenerator::new(2, move |t| hm.hamiltonian(t));
    for (n, sigma) in pauli().into_iter().enumerate() {
        let rm = m.clone();
        gen = gen.with_fallible_dissipator(sigma, move |t| Ok(spin_coefficients(&rm, t)?[n]));
    }
    gen
}

/// 2B·Ḃ = d|B|²/dt, the state-independent growth of (ΔH)².
pub fn spin_predicted_growth(m: &SpinModel, t: f64) -> f64 {
    let b = (m.b)(t);
    let bdot = (m.bdot)(t);
    2.0 * (b[0] * bdot[0] + b[1] * bdot[1] + b[2] * bdot[2])
}

/// Size of the weak-invariant residual for I = H(t), with ‖∂H/∂t‖ for scaling.
pub fn spin_invariant_residual(m: &SpinModel, gen: &LindbladGenerator, t: f64) -> Result<(f64, f64)> {
    let hdot = m.hamiltonian_dot(t);
    let r = weak_invariant_residual(gen, &m.hamiltonian(t), &hdot, t)?;
    Ok((r.max_abs(), hdot.max_abs()))
}
