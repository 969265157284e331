//! Finite differences on sampled series and the comparisons built on them.

use alloc::vec::Vec;

/// Derivative estimate at every node: central differences inside, second-order
/// one-sided three-point formulas at both ends (uniform spacing assumed there).
pub fn derivative(times: &[f64], values: &[f64]) -> Vec<f64> {
    let n = times.len().min(values.len());
    let mut out = alloc::vec![f64::NAN; n];
    if n < 2 {
        return out;
    }
    if n == 2 {
        let d = (values[1] - values[0]) / (times[1] - times[0]);
        return alloc::vec![d, d];
    }
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - values[i - 1]) / (times[i + 1] - times[i - 1]);
    }
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (times[2] - times[0]);
    out[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (times[n - 1] - times[n - 3]);
    out
}

/// Fourth-order central derivative at node `i` of a uniformly spaced series.
/// `None` within two nodes of either end.
pub fn five_point(values: &[f64], h: f64, i: usize) -> Option<f64> {
    if i < 2 || i + 2 >= values.len() {
        return None;
    }
    let v = |k: usize| values[k];
    Some((v(i - 2) - 8.0 * v(i - 1) + 8.0 * v(i + 1) - v(i + 2)) / (12.0 * h))
}

/// Largest single-step decrease `v[i] − v[i+1]`, or 0 when the series never falls.
pub fn max_step_decrease(values: &[f64]) -> f64 {
    values.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max)
}

/// Largest `v[i] − v[j]` over `i < j`: how far the series ever falls below an
/// earlier value.
pub fn max_drop(values: &[f64]) -> f64 {
    let mut peak = f64::NEG_INFINITY;
    let mut worst = 0.0f64;
    for &v in values {
        peak = peak.max(v);
        worst = worst.max(peak - v);
    }
    worst
}

/// Agreement of two series under `|a − b| ≤ max(abs_floor, rel · |b|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Agreement {
    /// Largest `|a − b|` over compared nodes.
    pub max_abs_diff: f64,
    /// Largest `|a − b| / allowed`; the check passes iff this is at most 1.
    pub worst_ratio: f64,
    pub worst_index: usize,
    pub compared: usize,
}

impl Agreement {
    pub fn passed(&self) -> bool {
        self.worst_ratio <= 1.0
    }
}

/// Compares `a` against reference `b` over `range`.
pub fn agreement(a: &[f64], b: &[f64], range: core::ops::Range<usize>, abs_floor: f64, rel: f64) -> Agreement {
    let mut out = Agreement { max_abs_diff: 0.0, worst_ratio: 0.0, worst_index: range.start, compared: 0 };
    for i in range {
        let diff = (a[i] - b[i]).abs();
        let allowed = abs_floor.max(rel * b[i].abs());
        let ratio = if diff.is_nan() { f64::INFINITY } else { diff / allowed };
        out.compared += 1;
        out.max_abs_diff = out.max_abs_diff.max(diff);
        if ratio > out.worst_ratio {
            out.worst_ratio = ratio;
            out.worst_index = i;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, h: f64) -> Vec<f64> {
        (0..n).map(|i| i as f64 * h).collect()
    }

    #[test]
    fn quadratic_is_differentiated_exactly() {
        let t = grid(11, 0.1);
        let v: Vec<f64> = t.iter().map(|x| 3.0 * x * x - x + 2.0).collect();
        let d = derivative(&t, &v);
        for (x, dx) in t.iter().zip(&d) {
            assert!((dx - (6.0 * x - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn five_point_is_exact_on_quartic() {
        let h = 0.05;
        let t = grid(20, h);
        let v: Vec<f64> = t.iter().map(|x| x.powi(4) - 2.0 * x.powi(3)).collect();
        assert_eq!(five_point(&v, h, 1), None);
        assert_eq!(five_point(&v, h, 18), None);
        for (i, &x) in t.iter().enumerate().take(18).skip(2) {
            let want = 4.0 * x.powi(3) - 6.0 * x * x;
            assert!((five_point(&v, h, i).unwrap() - want).abs() < 1e-10);
        }
    }

    #[test]
    fn drops_and_decreases() {
        let v = [1.0, 2.0, 1.5, 1.7, 0.9, 3.0];
        assert!((max_step_decrease(&v) - 0.8).abs() < 1e-15);
        assert!((max_drop(&v) - 1.1).abs() < 1e-15);
        assert_eq!(max_drop(&[1.0, 2.0, 3.0]), 0.0);
    }

    #[test]
    fn agreement_uses_floor_and_relative_part() {
        let a = [1.0, 100.1, 0.0];
        let b = [1.0 + 1e-7, 100.0, 1e-9];
        let ag = agreement(&a, &b, 0..3, 1e-6, 1e-3);
        assert!(ag.passed());
        assert_eq!(ag.worst_index, 1);
        let bad = agreement(&a, &b, 0..3, 1e-6, 1e-4);
        assert!(!bad.passed());
    }
}
