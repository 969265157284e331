//! Certified operator types and the algebra every other module leans on.
//!
//! All matrix functions go through a single primitive, the Hermitian
//! eigen-decomposition. Every certification records the residual it measured
//! so callers can report it.

use alloc::vec::Vec;
use core::ops::Deref;

use crate::eigen::hermitian_eigen;
use crate::error::{Error, Result};
use crate::math;
use crate::matrix::{Matrix, C64};

/// Tolerances used when certifying operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub herm: f64,
    pub psd: f64,
    pub trace: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { herm: 1e-10, psd: 1e-10, trace: 1e-9 }
    }
}

/// Largest tolerated imaginary part of an expectation value.
pub const IMAG_RESIDUAL_TOL: f64 = 1e-9;

/// Negative variances smaller than this in magnitude are rounding noise.
pub const VARIANCE_CLIP: f64 = 1e-10;

/// Square matrix whose deviation from its adjoint is within `herm` tolerance.
///
/// The stored entries are symmetrized on construction, so the wrapped matrix
/// is exactly Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: Matrix,
    residual: f64,
}

impl HermitianOperator {
    pub fn new(matrix: Matrix) -> Result<Self> {
        Self::with_tolerance(matrix, Tolerances::default().herm)
    }

    pub fn with_tolerance(matrix: Matrix, tol: f64) -> Result<Self> {
        if matrix.dim() == 0 {
            return Err(Error::InvalidParameter("operator dimension must be at least 1".into()));
        }
        let residual = matrix.hermiticity_residual();
        let scale = matrix.max_abs().max(1.0);
        if !(residual <= tol * scale) {
            return Err(Error::NotHermitian { residual, tol: tol * scale });
        }
        Ok(Self { matrix: matrix.hermitian_part(), residual })
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: Matrix::identity(dim), residual: 0.0 }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self { matrix: Matrix::from_diagonal(diag), residual: 0.0 }
    }

    /// Residual measured before symmetrization.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    /// `self + a·𝟙`
    pub fn shifted(&self, a: f64) -> Self {
        let mut m = self.matrix.clone();
        for i in 0..m.dim() {
            m[(i, i)] += C64::new(a, 0.0);
        }
        Self { matrix: m, residual: self.residual }
    }

    pub fn eigh(&self) -> Result<Spectrum> {
        eigh(self)
    }
}

impl Deref for HermitianOperator {
    type Target = Matrix;
    fn deref(&self) -> &Matrix {
        &self.matrix
    }
}

/// Positive semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: HermitianOperator,
    trace_error: f64,
    min_eigenvalue: f64,
}

impl DensityMatrix {
    pub fn new(matrix: Matrix) -> Result<Self> {
        Self::with_tolerances(matrix, &Tolerances::default())
    }

    pub fn with_tolerances(matrix: Matrix, tol: &Tolerances) -> Result<Self> {
        let op = HermitianOperator::with_tolerance(matrix, tol.herm)?;
        let trace = op.trace().re;
        let trace_error = (trace - 1.0).abs();
        if !(trace_error <= tol.trace) {
            return Err(Error::TraceNotUnit { trace, tol: tol.trace });
        }
        let min_eigenvalue = eigh(&op)?.min();
        if min_eigenvalue < -tol.psd {
            return Err(Error::NotPositive { min_eig: min_eigenvalue });
        }
        Ok(Self { op, trace_error, min_eigenvalue })
    }

    /// Wraps a matrix without certifying it. Used inside integrators, which
    /// monitor positivity and trace themselves and report breaches.
    pub(crate) fn trusted(matrix: Matrix) -> Self {
        Self {
            op: HermitianOperator { matrix: matrix.hermitian_part(), residual: 0.0 },
            trace_error: 0.0,
            min_eigenvalue: 0.0,
        }
    }

    /// Wraps an integrator state together with diagnostics already measured on it.
    pub(crate) fn measured(matrix: Matrix, trace_error: f64, min_eigenvalue: f64) -> Self {
        Self { trace_error, min_eigenvalue, ..Self::trusted(matrix) }
    }

    /// Projector onto basis state `index`.
    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut diag = alloc::vec![0.0; dim];
        diag[index] = 1.0;
        Self::trusted(Matrix::from_diagonal(&diag))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::trusted(Matrix::identity(dim).scale(1.0 / dim as f64))
    }

    /// |ψ⟩⟨ψ| for a vector normalized here.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if !(norm2 > 0.0) {
            return Err(Error::InvalidParameter("state vector has zero norm".into()));
        }
        let n = psi.len();
        Ok(Self::trusted(Matrix::from_fn(n, |i, j| psi[i] * psi[j].conj() / norm2)))
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn trace_error(&self) -> f64 {
        self.trace_error
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }
}

impl Deref for DensityMatrix {
    type Target = Matrix;
    fn deref(&self) -> &Matrix {
        &self.op.matrix
    }
}

/// Eigenvalues in ascending order with the matching unitary of eigenvector columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

impl Spectrum {
    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// V·diag(values)·V† for replacement eigenvalues given in ascending-λ order.
    pub fn with_values(&self, values: &[f64]) -> Matrix {
        let mut it = values.iter();
        self.map(|_| *it.next().unwrap_or(&0.0))
    }

    /// V·diag(f(λ))·V†
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Matrix {
        let v = &self.eigenvectors;
        let n = v.dim();
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let scaled = Matrix::from_fn(n, |i, k| v[(i, k)] * fl[k]);
        scaled.matmul_adjoint(v).hermitian_part()
    }

    /// ‖A − VΛV†‖_max for the operator this spectrum came from.
    pub fn reconstruction_error(&self, a: &Matrix) -> f64 {
        (a - &self.map(|l| l)).max_abs()
    }
}

pub fn eigh(a: &HermitianOperator) -> Result<Spectrum> {
    let (eigenvalues, eigenvectors) = hermitian_eigen(a.matrix())?;
    Ok(Spectrum { eigenvalues, eigenvectors })
}

/// exp(s·A)
pub fn expm_herm(a: &HermitianOperator, s: f64) -> Result<HermitianOperator> {
    let spec = eigh(a)?;
    Ok(HermitianOperator { matrix: spec.map(|l| math::exp(s * l)), residual: 0.0 })
}

/// AB − BA
pub fn commutator(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    a.check_same_dim(b)?;
    Ok(&(a * b) - &(b * a))
}

/// An expectation value with the imaginary residue it carried.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Expectation {
    pub value: f64,
    pub imag_residual: f64,
}

pub fn expectation_detailed(a: &Matrix, rho: &DensityMatrix) -> Result<Expectation> {
    a.check_same_dim(rho)?;
    let z = a.trace_product(rho);
    let imag_residual = z.im.abs();
    let scale = a.max_abs().max(1.0);
    if imag_residual > IMAG_RESIDUAL_TOL * scale {
        return Err(Error::ImaginaryExpectation { residual: imag_residual });
    }
    Ok(Expectation { value: z.re, imag_residual })
}

/// Re tr(Aρ)
pub fn expectation(a: &Matrix, rho: &DensityMatrix) -> Result<f64> {
    expectation_detailed(a, rho).map(|e| e.value)
}

/// A variance and the negative rounding residue clipped from it, if any.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Variance {
    pub value: f64,
    pub clipped: f64,
}

pub fn variance_detailed(a: &Matrix, rho: &DensityMatrix) -> Result<Variance> {
    let mean = expectation(a, rho)?;
    let a_rho = a * &**rho;
    let second = a.trace_product(&a_rho).re;
    clip_variance(second - mean * mean)
}

pub(crate) fn clip_variance(raw: f64) -> Result<Variance> {
    if raw >= 0.0 {
        Ok(Variance { value: raw, clipped: 0.0 })
    } else if raw >= -VARIANCE_CLIP {
        log::debug!("clipping rounding-level negative variance {raw:e}");
        Ok(Variance { value: 0.0, clipped: -raw })
    } else {
        Err(Error::NegativeVariance { value: raw })
    }
}

/// ⟨A²⟩ − ⟨A⟩²
pub fn variance(a: &Matrix, rho: &DensityMatrix) -> Result<f64> {
    variance_detailed(a, rho).map(|v| v.value)
}

/// Smallest eigenvalue of A − B.
pub fn min_eigenvalue_of_difference(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    a.check_same_dim(b)?;
    let diff = HermitianOperator { matrix: (a.matrix() - b.matrix()).hermitian_part(), residual: 0.0 };
    Ok(eigh(&diff)?.min())
}

/// A ≥ B in the operator order, up to `tol`.
pub fn operator_geq(a: &HermitianOperator, b: &HermitianOperator, tol: f64) -> Result<bool> {
    Ok(min_eigenvalue_of_difference(a, b)? >= -tol)
}

/// tr|A| for Hermitian A.
pub fn trace_norm(a: &HermitianOperator) -> Result<f64> {
    Ok(eigh(a)?.eigenvalues.iter().map(|l| l.abs()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{pauli, I, ONE};
    use crate::random::{random_hermitian, Rng};

    fn herm(m: Matrix) -> HermitianOperator {
        HermitianOperator::new(m).unwrap()
    }

    #[test]
    fn pauli_commutator() {
        let [x, y, z] = pauli();
        let c = commutator(&x, &y).unwrap();
        assert!((&c - &z.scale_c(I * 2.0)).max_abs() < 1e-15);
    }

    #[test]
    fn self_commutator_vanishes() {
        let mut rng = Rng::seed(3);
        let a = random_hermitian(&mut rng, 5);
        assert_eq!(commutator(&a, &a).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn commutator_dimension_mismatch() {
        let e = commutator(&Matrix::identity(2), &Matrix::identity(3)).unwrap_err();
        assert_eq!(e, Error::DimensionMismatch { left: 2, right: 3 });
    }

    #[test]
    fn expectation_examples() {
        let [x, y, z] = pauli();
        let up = DensityMatrix::basis_state(2, 0);
        assert_eq!(expectation(&z, &up).unwrap(), 1.0);
        let mixed = DensityMatrix::maximally_mixed(2);
        let rho = DensityMatrix::new(Matrix::from_rows([[(0.7, 0.0), (0.1, 0.2)], [(0.1, -0.2), (0.3, 0.0)]])).unwrap();
        assert!((expectation(&Matrix::identity(2), &rho).unwrap() - 1.0).abs() < 1e-15);
        let mut bsig = x.scale(1.0);
        bsig.axpy(ONE * 2.0, &y);
        bsig.axpy(ONE * 3.0, &z);
        assert!(expectation(&bsig, &mixed).unwrap().abs() < 1e-15);
    }

    #[test]
    fn expectation_flags_non_hermitian_input() {
        let a = Matrix::from_rows([[(0.0, 1.0), (0.0, 0.0)], [(0.0, 0.0), (0.0, 0.0)]]);
        let up = DensityMatrix::basis_state(2, 0);
        assert!(matches!(expectation(&a, &up), Err(Error::ImaginaryExpectation { .. })));
    }

    #[test]
    fn variance_examples() {
        let [_, _, z] = pauli();
        assert_eq!(variance(&z, &DensityMatrix::maximally_mixed(2)).unwrap(), 1.0);
        assert_eq!(variance(&z, &DensityMatrix::basis_state(2, 0)).unwrap(), 0.0);
    }

    #[test]
    fn variance_clipping_policy() {
        assert_eq!(clip_variance(-1e-12).unwrap(), Variance { value: 0.0, clipped: 1e-12 });
        assert!(matches!(clip_variance(-1e-6), Err(Error::NegativeVariance { .. })));
    }

    #[test]
    fn operator_order_examples() {
        let two = herm(Matrix::identity(2).scale(2.0));
        let one = HermitianOperator::identity(2);
        assert!(operator_geq(&two, &one, 0.0).unwrap());
        let [_, _, z] = pauli();
        assert!(!operator_geq(&herm(z), &herm(Matrix::zeros(2)), 1e-12).unwrap());
    }

    #[test]
    fn operator_order_rejects_non_hermitian() {
        let a = Matrix::from_rows([[(0.0, 0.0), (1.0, 0.0)], [(0.0, 0.0), (0.0, 0.0)]]);
        assert!(matches!(HermitianOperator::new(a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn eigh_and_expm_of_sigma_z() {
        let [_, _, z] = pauli();
        let z = herm(z);
        assert_eq!(eigh(&z).unwrap().eigenvalues, [-1.0, 1.0]);
        let s = 0.37;
        let e = expm_herm(&z, s).unwrap();
        let want = Matrix::from_diagonal(&[math::exp(s), math::exp(-s)]);
        assert!((e.matrix() - &want).max_abs() < 1e-14);
        assert!((expm_herm(&z, 0.0).unwrap().matrix() - &Matrix::identity(2)).max_abs() < 1e-15);
    }

    #[test]
    fn eigh_reconstructs_random_operators() {
        let mut rng = Rng::seed(11);
        for dim in [1, 2, 3, 5, 8, 17, 40, 64] {
            let a = random_hermitian(&mut rng, dim);
            let spec = eigh(&a).unwrap();
            let scale = a.max_abs();
            assert!(spec.reconstruction_error(&a) <= 1e-9 * scale, "dim {dim}");
            let v = &spec.eigenvectors;
            let gram = v.adjoint().matmul(v);
            assert!((&gram - &Matrix::identity(dim)).max_abs() < 1e-12, "dim {dim}");
            assert!(spec.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eigh_handles_degenerate_and_diagonal_input() {
        let a = herm(Matrix::identity(6).scale(3.0));
        let spec = eigh(&a).unwrap();
        assert!(spec.eigenvalues.iter().all(|&l| (l - 3.0).abs() < 1e-15));
        let d = HermitianOperator::from_diagonal(&[4.0, -1.0, 2.0, 2.0]);
        assert_eq!(eigh(&d).unwrap().eigenvalues, [-1.0, 2.0, 2.0, 4.0]);
        assert!(eigh(&herm(Matrix::zeros(3))).unwrap().eigenvalues.iter().all(|&l| l == 0.0));
    }

    #[test]
    fn expm_inverse_property() {
        let mut rng = Rng::seed(5);
        for dim in 1..=8 {
            let a = random_hermitian(&mut rng, dim);
            let p = expm_herm(&a, 1.0).unwrap();
            let m = expm_herm(&a, -1.0).unwrap();
            assert!((&(p.matrix() * m.matrix()) - &Matrix::identity(dim)).max_abs() < 1e-10);
        }
    }

    #[test]
    fn density_matrix_certification() {
        assert!(matches!(DensityMatrix::new(Matrix::from_diagonal(&[0.5, 0.6])), Err(Error::TraceNotUnit { .. })));
        assert!(matches!(DensityMatrix::new(Matrix::from_diagonal(&[1.2, -0.2])), Err(Error::NotPositive { .. })));
        let rho = DensityMatrix::new(Matrix::from_diagonal(&[0.25, 0.75])).unwrap();
        assert_eq!(rho.min_eigenvalue(), 0.25);
    }
}
