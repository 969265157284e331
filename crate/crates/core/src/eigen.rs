//! Hermitian eigen-decomposition.
//!
//! Householder reduction to a complex tridiagonal form, a diagonal phase
//! change that makes the off-diagonal real, then implicit QL iterations with
//! Wilkinson-style shifts. Eigenvectors are accumulated throughout.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::matrix::{Matrix, C64, ONE, ZERO};

const MAX_QL_ITERATIONS: usize = 64;

/// Eigenvalues (ascending) and the unitary whose columns are the eigenvectors.
pub(crate) fn hermitian_eigen(a: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let n = a.dim();
    if n == 0 {
        return Ok((Vec::new(), Matrix::zeros(0)));
    }
    let mut w = a.hermitian_part();
    let mut q = Matrix::identity(n);

    tridiagonalize(&mut w, &mut q);

    let mut diag: Vec<f64> = (0..n).map(|i| w[(i, i)].re).collect();
    let mut off: Vec<f64> = vec_zeros(n);
    let mut phase = ONE;
    for i in 0..n - 1 {
        let e = w[(i + 1, i)];
        let mag = e.norm();
        // column i already carries `phase`; choose the next so the coupling is real
        for r in 0..n {
            q[(r, i)] *= phase;
        }
        if mag > 0.0 {
            phase *= e / mag;
        }
        off[i] = mag;
    }
    for r in 0..n {
        q[(r, n - 1)] *= phase;
    }

    tridiagonal_ql(&mut diag, &mut off, &mut q)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = Matrix::from_fn(n, |r, c| q[(r, order[c])]);
    Ok((values, vectors))
}

fn vec_zeros(n: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(n);
    v.resize(n, 0.0);
    v
}

/// In-place reduction `w ← H w H`, accumulating `q ← q H` for each reflector.
fn tridiagonalize(w: &mut Matrix, q: &mut Matrix) {
    let n = w.dim();
    if n < 3 {
        return;
    }
    let mut v: Vec<C64> = Vec::with_capacity(n);
    let mut p: Vec<C64> = Vec::with_capacity(n);
    for k in 0..n - 2 {
        let start = k + 1;
        v.clear();
        v.extend((start..n).map(|i| w[(i, k)]));
        let xnorm = math::sqrt(v.iter().map(|z| z.norm_sqr()).sum());
        let tail: f64 = v[1..].iter().map(|z| z.norm_sqr()).sum();
        if xnorm == 0.0 || tail == 0.0 {
            continue;
        }
        let x0 = v[0];
        let ph = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let alpha = -ph * xnorm;
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let tau = 2.0 / vnorm2;

        p.clear();
        for i in start..n {
            let row = &w.row(i)[start..];
            let s: C64 = row.iter().zip(&v).map(|(a, b)| a * b).sum();
            p.push(s * tau);
        }
        let vp: f64 = v.iter().zip(&p).map(|(a, b)| (a.conj() * b).re).sum();
        let half = 0.5 * tau * vp;
        for (pi, vi) in p.iter_mut().zip(&v) {
            *pi -= vi * half;
        }
        for (ii, i) in (start..n).enumerate() {
            for (jj, j) in (start..n).enumerate() {
                let upd = v[ii] * p[jj].conj() + p[ii] * v[jj].conj();
                w[(i, j)] -= upd;
            }
        }
        w[(start, k)] = alpha;
        w[(k, start)] = alpha.conj();
        for i in start + 1..n {
            w[(i, k)] = ZERO;
            w[(k, i)] = ZERO;
        }

        for r in 0..n {
            let s: C64 = (start..n).zip(&v).map(|(j, vj)| q[(r, j)] * vj).sum();
            let s = s * tau;
            for (j, vj) in (start..n).zip(&v) {
                q[(r, j)] -= s * vj.conj();
            }
        }
    }
}

/// Implicit QL on a real symmetric tridiagonal matrix; `off[i]` couples `i` and `i + 1`.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], z: &mut Matrix) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > MAX_QL_ITERATIONS {
                return Err(Error::EigenFailure { iterations });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = math::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r.abs() } else { -r.abs() });
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = math::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let zi = z[(k, i)];
                    let zi1 = z[(k, i + 1)];
                    z[(k, i + 1)] = zi * s + zi1 * c;
                    z[(k, i)] = zi * c - zi1 * s;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
