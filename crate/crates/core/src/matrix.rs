//! Dense square complex matrices.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<C64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries; `data.len()` must be a perfect square.
    pub fn from_row_major(data: Vec<C64>) -> Result<Self> {
        let dim = (0..=data.len()).find(|d| d * d >= data.len()).unwrap_or(0);
        if dim * dim != data.len() {
            return Err(Error::NotSquare { rows: dim, len: data.len() });
        }
        Ok(Self { dim, data })
    }

    /// Convenience constructor from real parts and imaginary parts given as nested rows.
    pub fn from_rows<const N: usize>(rows: [[(f64, f64); N]; N]) -> Self {
        Self::from_fn(N, |i, j| C64::new(rows[i][j].0, rows[i][j].1))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        Self::from_fn(n, |i, j| self.data[j * n + i].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// tr(self · other) without forming the product.
    pub fn trace_product(&self, other: &Matrix) -> C64 {
        debug_assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += self.data[i * n + k] * other.data[k * n + i];
            }
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        crate::math::sqrt(self.data.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max))
    }

    /// Largest entry-wise deviation from the conjugate transpose.
    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = self.data[i * n + j] - self.data[j * n + i].conj();
                worst = worst.max(d.norm_sqr());
            }
        }
        crate::math::sqrt(worst)
    }

    /// (A + A†)/2. The result is bitwise Hermitian.
    pub fn hermitian_part(&self) -> Self {
        let n = self.dim;
        let mut out = self.clone();
        for i in 0..n {
            out.data[i * n + i] = C64::new(self.data[i * n + i].re, 0.0);
            for j in (i + 1)..n {
                let v = (self.data[i * n + j] + self.data[j * n + i].conj()) * 0.5;
                out.data[i * n + j] = v;
                out.data[j * n + i] = v.conj();
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_c(&self, s: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * s).collect() }
    }

    /// self += s · other
    pub fn axpy(&mut self, s: C64, other: &Matrix) {
        debug_assert_eq!(self.dim, other.dim);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            let orow = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Matrix { dim: n, data: out }
    }

    /// self · other†
    pub fn matmul_adjoint(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        let n = self.dim;
        Matrix::from_fn(n, |i, j| {
            let a = &self.data[i * n..(i + 1) * n];
            let b = &other.data[j * n..(j + 1) * n];
            a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
        })
    }

    pub(crate) fn check_same_dim(&self, other: &Matrix) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: other.dim });
        }
        Ok(())
    }

    /// Leading `keep × keep` block.
    pub fn leading_block(&self, keep: usize) -> Matrix {
        let keep = keep.min(self.dim);
        Matrix::from_fn(keep, |i, j| self[(i, j)])
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim, "add dimension mismatch");
        Matrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim, "sub dimension mismatch");
        Matrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.matmul(rhs)
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        Matrix { dim: self.dim, data: self.data.iter().map(|z| -z).collect() }
    }
}

impl AddAssign<&Matrix> for Matrix {
    fn add_assign(&mut self, rhs: &Matrix) {
        self.axpy(ONE, rhs);
    }
}

impl SubAssign<&Matrix> for Matrix {
    fn sub_assign(&mut self, rhs: &Matrix) {
        self.axpy(-ONE, rhs);
    }
}

/// Pauli matrices σ₁, σ₂, σ₃ in the basis where σ₃ = diag(1, −1).
pub fn pauli() -> [Matrix; 3] {
    [
        Matrix::from_rows([[(0.0, 0.0), (1.0, 0.0)], [(1.0, 0.0), (0.0, 0.0)]]),
        Matrix::from_rows([[(0.0, 0.0), (0.0, -1.0)], [(0.0, 1.0), (0.0, 0.0)]]),
        Matrix::from_rows([[(1.0, 0.0), (0.0, 0.0)], [(0.0, 0.0), (-1.0, 0.0)]]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_matches_hand_product() {
        let [x, y, z] = pauli();
        // σ₁σ₂ = iσ₃
        let prod = &x * &y;
        assert_eq!(prod, z.scale_c(I));
        assert_eq!(x.matmul_adjoint(&y), &x * &y.adjoint());
    }

    #[test]
    fn trace_product_matches_trace_of_product() {
        let a = Matrix::from_fn(3, |i, j| C64::new(i as f64 + 1.0, j as f64 - 0.5));
        let b = Matrix::from_fn(3, |i, j| C64::new((i * j) as f64, 1.0));
        let d = a.trace_product(&b) - (&a * &b).trace();
        assert!(d.norm() < 1e-12);
    }

    #[test]
    fn hermitian_part_is_exact() {
        let a = Matrix::from_fn(4, |i, j| C64::new(0.1 * (i + 2 * j) as f64, 0.3 * i as f64 - 0.7 * j as f64));
        let h = a.hermitian_part();
        assert_eq!(h, h.adjoint());
    }

    #[test]
    fn from_row_major_rejects_non_square() {
        assert!(matches!(Matrix::from_row_major(vec![ONE; 5]), Err(Error::NotSquare { .. })));
        assert_eq!(Matrix::from_row_major(vec![ONE; 4]).unwrap().dim(), 2);
    }
}
