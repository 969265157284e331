//! Seeded sampling of random operators, states, and isometries.

use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math;
use crate::matrix::{Matrix, C64};
use crate::operator::{DensityMatrix, HermitianOperator};

/// Deterministic generator; identical seeds give bitwise identical streams.
#[derive(Debug, Clone)]
pub struct Rng {
    inner: ChaCha8Rng,
    spare: Option<f64>,
}

impl Rng {
    pub fn seed(seed: u64) -> Self {
        Self { inner: ChaCha8Rng::seed_from_u64(seed), spare: None }
    }

    /// Independent stream for work item `index` under a master seed.
    pub fn stream(seed: u64, index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(index);
        Self { inner, spare: None }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `lo..=hi`.
    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.next_u64() % (hi - lo + 1) as u64) as usize
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = math::sqrt(-2.0 * math::ln(u1));
        let phi = 2.0 * core::f64::consts::PI * u2;
        self.spare = Some(r * math::sin(phi));
        r * math::cos(phi)
    }

    /// Complex normal with unit variance split evenly between parts.
    pub fn complex_normal(&mut self) -> C64 {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        C64::new(self.normal() * s, self.normal() * s)
    }
}

pub fn random_matrix(rng: &mut Rng, dim: usize) -> Matrix {
    Matrix::from_fn(dim, |_, _| rng.complex_normal())
}

/// GUE-like Hermitian operator.
pub fn random_hermitian(rng: &mut Rng, dim: usize) -> HermitianOperator {
    let g = random_matrix(rng, dim);
    HermitianOperator::new(g.hermitian_part()).expect("Hermitian part is Hermitian")
}

/// Full-rank random state GG†/tr(GG†).
pub fn random_density(rng: &mut Rng, dim: usize) -> DensityMatrix {
    let g = random_matrix(rng, dim);
    let gg = g.matmul_adjoint(&g);
    let tr = gg.trace().re;
    DensityMatrix::trusted(gg.scale(1.0 / tr))
}

/// Haar-random isometry with `rows ≥ cols`, returned as row-major columns of
/// length `rows` (column `j` is `out[j]`).
pub fn haar_isometry(rng: &mut Rng, rows: usize, cols: usize) -> Vec<Vec<C64>> {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let mut columns: Vec<Vec<C64>> = (0..cols).map(|_| (0..rows).map(|_| rng.complex_normal()).collect()).collect();
    // Gram-Schmidt (run twice for rounding-level orthogonality) gives R with a
    // positive real diagonal, which makes Q Haar distributed.
    for j in 0..cols {
        for _ in 0..2 {
            let (head, tail) = columns.split_at_mut(j);
            let cj = &mut tail[0];
            for qk in head.iter() {
                let proj: C64 = qk.iter().zip(cj.iter()).map(|(a, b)| a.conj() * b).sum();
                for (c, q) in cj.iter_mut().zip(qk) {
                    *c -= proj * q;
                }
            }
            let norm = math::sqrt(cj.iter().map(|z| z.norm_sqr()).sum());
            for c in cj.iter_mut() {
                *c /= norm;
            }
        }
    }
    columns
}

/// Haar-random unitary.
pub fn haar_unitary(rng: &mut Rng, dim: usize) -> Matrix {
    let cols = haar_isometry(rng, dim, dim);
    Matrix::from_fn(dim, |i, j| cols[j][i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = Rng::seed(42);
        let mut b = Rng::seed(42);
        for _ in 0..10 {
            assert_eq!(a.normal().to_bits(), b.normal().to_bits());
        }
        let mut c = Rng::stream(42, 1);
        let mut d = Rng::stream(42, 2);
        assert_ne!(c.next_u64(), d.next_u64());
    }

    #[test]
    fn normal_moments_are_plausible() {
        let mut rng = Rng::seed(1);
        let n = 20000;
        let xs: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.03);
        assert!((var - 1.0).abs() < 0.05);
    }

    #[test]
    fn isometry_columns_are_orthonormal() {
        let mut rng = Rng::seed(9);
        let cols = haar_isometry(&mut rng, 12, 3);
        for i in 0..3 {
            for j in 0..3 {
                let ip: C64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| a.conj() * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - C64::new(want, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn random_density_is_a_state() {
        let mut rng = Rng::seed(2);
        let rho = random_density(&mut rng, 5);
        DensityMatrix::new((*rho).clone()).unwrap();
    }
}
