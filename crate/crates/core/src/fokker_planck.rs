//! Classical weak invariants of a one-dimensional Fokker-Planck equation.
//!
//! The density evolves by ∂P/∂t = −∂x(KP) + ∂²x(DP). A function J(x,t) with
//! ∂J/∂t = −K ∂xJ − D ∂²xJ has a conserved average, and its variance grows at
//! 2⟨D(∂xJ)²⟩. For the Ornstein-Uhlenbeck drift K = −γx and constant D, the
//! quadratic J = a x² + b x + e solves this exactly with
//! ȧ = 2γa, ḃ = γb, ė = −2Da, so only P needs a grid.

use alloc::vec::Vec;

use crate::diff;
use crate::error::{Error, Result};
use crate::math;

/// Negative values above this magnitude are rejected rather than clipped.
pub const NEGATIVE_CLIP: f64 = 1e-12;
pub const MASS_TOL: f64 = 1e-6;
/// Largest allowed boundary value relative to the peak.
pub const BOUNDARY_RATIO: f64 = 1e-10;

/// Uniform nodes `x_min + i·h`, `i < n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub x_min: f64,
    pub h: f64,
    pub n: usize,
}

impl Grid {
    pub fn uniform(x_min: f64, x_max: f64, h: f64) -> Result<Self> {
        if !(h > 0.0 && x_max > x_min) {
            return Err(Error::InvalidParameter(alloc::format!(
                "grid needs x_max > x_min and h > 0 (got [{x_min}, {x_max}], h = {h})"
            )));
        }
        let cells = libm::round((x_max - x_min) / h);
        if cells < 4.0 {
            return Err(Error::InvalidParameter("grid needs at least five nodes".into()));
        }
        Ok(Self { x_min, h: (x_max - x_min) / cells, n: cells as usize + 1 })
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.h
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.x(i))
    }

    /// Trapezoid rule for sampled values.
    pub fn integrate(&self, values: impl Iterator<Item = f64>) -> f64 {
        let last = self.n - 1;
        values.enumerate().map(|(i, v)| if i == 0 || i == last { 0.5 * v } else { v }).sum::<f64>() * self.h
    }
}

/// Sampled probability density.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDistribution {
    grid: Grid,
    values: Vec<f64>,
}

impl GridDistribution {
    /// Certifies nonnegativity (clipping rounding-level negatives), unit
    /// mass, and decay at both ends.
    pub fn new(grid: Grid, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::DimensionMismatch { left: grid.n, right: values.len() });
        }
        for v in values.iter_mut() {
            if !(*v >= -NEGATIVE_CLIP) {
                return Err(Error::NegativeProbability { value: *v });
            }
            *v = v.max(0.0);
        }
        let mass = grid.integrate(values.iter().copied());
        if !((mass - 1.0).abs() <= MASS_TOL) {
            return Err(Error::MassNotUnit { mass });
        }
        let peak = values.iter().copied().fold(0.0, f64::max);
        let edge = values[0].max(values[grid.n - 1]);
        if edge > BOUNDARY_RATIO * peak {
            return Err(Error::BoundaryLeak { ratio: edge / peak });
        }
        Ok(Self { grid, values })
    }

    /// Normal density with the given mean and variance, renormalized on the grid.
    pub fn gaussian(grid: Grid, mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!("variance must be positive, got {variance}")));
        }
        let raw: Vec<f64> = grid.nodes().map(|x| math::exp(-(x - mean) * (x - mean) / (2.0 * variance))).collect();
        let mass = grid.integrate(raw.iter().copied());
        Self::new(grid, raw.iter().map(|v| v / mass).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mass(&self) -> f64 {
        self.grid.integrate(self.values.iter().copied())
    }

    /// ∫ f(x) P(x) dx
    pub fn average(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.grid.integrate(self.grid.nodes().zip(&self.values).map(|(x, p)| f(x) * p))
    }

    /// −∫ P ln P dx
    pub fn entropy(&self) -> f64 {
        -self.grid.integrate(self.values.iter().map(|&p| if p > 0.0 { p * math::ln(p) } else { 0.0 }))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Polynomial with ascending coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly(self.0.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.0.is_empty() || other.0.is_empty() {
            return Poly(Vec::new());
        }
        let mut out = alloc::vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }
}

/// J(x,t) = a(t)x² + b(t)x + e(t) for the Ornstein-Uhlenbeck process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyInvariant {
    pub gamma: f64,
    pub diffusion: f64,
    pub a0: f64,
    pub b0: f64,
    pub e0: f64,
}

/// Quadratic invariant for drift −γx and constant diffusion D.
pub fn ou_invariant_coeffs(gamma: f64, diffusion: f64, a0: f64, b0: f64, e0: f64) -> Result<PolyInvariant> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(alloc::format!("drift rate must be positive, got {gamma}")));
    }
    if !(diffusion > 0.0) {
        return Err(Error::InvalidParameter(alloc::format!("diffusion must be positive, got {diffusion}")));
    }
    Ok(PolyInvariant { gamma, diffusion, a0, b0, e0 })
}

impl PolyInvariant {
    /// (a, b, e) at time t.
    pub fn coeffs(&self, t: f64) -> (f64, f64, f64) {
        let g2 = math::exp(2.0 * self.gamma * t);
        let a = self.a0 * g2;
        let b = self.b0 * math::exp(self.gamma * t);
        let e = self.e0 - self.diffusion * self.a0 / self.gamma * (g2 - 1.0);
        (a, b, e)
    }

    pub fn poly(&self, t: f64) -> Poly {
        let (a, b, e) = self.coeffs(t);
        Poly(alloc::vec![e, b, a])
    }

    pub fn value(&self, x: f64, t: f64) -> f64 {
        let (a, b, e) = self.coeffs(t);
        (a * x + b) * x + e
    }

    /// ∂J/∂x
    pub fn slope(&self, x: f64, t: f64) -> f64 {
        let (a, b, _) = self.coeffs(t);
        2.0 * a * x + b
    }

    /// ∂J/∂t + K ∂xJ + D ∂²xJ with K = −γx; zero for an invariant.
    pub fn residual(&self, x: f64, t: f64) -> f64 {
        let (a, b, _) = self.coeffs(t);
        let (ad, bd, ed) = (2.0 * self.gamma * a, self.gamma * b, -2.0 * self.diffusion * a);
        let dt = (ad * x + bd) * x + ed;
        dt - self.gamma * x * self.slope(x, t) + self.diffusion * 2.0 * a
    }
}

/// Drift K(x,t) or diffusion D(x,t).
pub type Field<'a> = &'a dyn Fn(f64, f64) -> f64;

fn rhs_values(grid: &Grid, p: &[f64], drift: Field<'_>, diffusion: Field<'_>, t: f64) -> Vec<f64> {
    let n = grid.n;
    let h = grid.h;
    let kp: Vec<f64> = (0..n).map(|i| drift(grid.x(i), t) * p[i]).collect();
    let dp: Vec<f64> = (0..n).map(|i| diffusion(grid.x(i), t) * p[i]).collect();
    let at = |v: &[f64], i: isize| if i < 0 || i as usize >= n { 0.0 } else { v[i as usize] };
    (0..n as isize)
        .map(|i| {
            let adv = (at(&kp, i + 1) - at(&kp, i - 1)) / (2.0 * h);
            let dif = (at(&dp, i + 1) - 2.0 * at(&dp, i) + at(&dp, i - 1)) / (h * h);
            dif - adv
        })
        .collect()
}

fn min_diffusion(grid: &Grid, diffusion: Field<'_>, t: f64) -> Result<(f64, f64)> {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for x in grid.nodes() {
        let d = diffusion(x, t);
        lo = lo.min(d);
        hi = hi.max(d);
    }
    if !(lo > 0.0) {
        return Err(Error::InvalidParameter(alloc::format!("diffusion must be positive on the grid (min {lo})")));
    }
    Ok((lo, hi))
}

/// −∂x(KP) + ∂²x(DP) by centered differences in flux form, zero outside the grid.
pub fn fp_rhs(p: &GridDistribution, drift: Field<'_>, diffusion: Field<'_>, t: f64) -> Result<Vec<f64>> {
    min_diffusion(&p.grid, diffusion, t)?;
    Ok(rhs_values(&p.grid, &p.values, drift, diffusion, t))
}

/// Largest explicit step allowed for the grid: h²/(2 max D).
pub fn stability_limit(grid: &Grid, diffusion: Field<'_>, t: f64) -> Result<f64> {
    let (_, hi) = min_diffusion(grid, diffusion, t)?;
    Ok(grid.h * grid.h / (2.0 * hi))
}

/// One RK4 step of the discretized equation.
pub fn rk4_step(grid: &Grid, p: &[f64], drift: Field<'_>, diffusion: Field<'_>, t: f64, dt: f64) -> Vec<f64> {
    let axpy = |y: &[f64], s: f64, k: &[f64]| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    let k1 = rhs_values(grid, p, drift, diffusion, t);
    let k2 = rhs_values(grid, &axpy(p, 0.5 * dt, &k1), drift, diffusion, t + 0.5 * dt);
    let k3 = rhs_values(grid, &axpy(p, 0.5 * dt, &k2), drift, diffusion, t + 0.5 * dt);
    let k4 = rhs_values(grid, &axpy(p, dt, &k3), drift, diffusion, t + dt);
    (0..p.len()).map(|i| p[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
}

/// J̄ = ∫ J P dx
pub fn bar_j(j: &PolyInvariant, p: &GridDistribution, t: f64) -> f64 {
    p.average(|x| j.value(x, t))
}

/// (δJ)² = ∫ J² P dx − J̄²
pub fn variance_j(j: &PolyInvariant, p: &GridDistribution, t: f64) -> f64 {
    let m = bar_j(j, p, t);
    p.average(|x| {
        let v = j.value(x, t) - m;
        v * v
    })
}

/// 2 ∫ D (∂xJ)² P dx
pub fn classical_growth_rate(j: &PolyInvariant, p: &GridDistribution, diffusion: Field<'_>, t: f64) -> f64 {
    2.0 * p.average(|x| {
        let s = j.slope(x, t);
        diffusion(x, t) * s * s
    })
}

/// d⟨J²⟩/dt evaluated through the backward generator, with J² treated as its
/// own polynomial: ∫ P [K(∂x(J²) − 2J∂xJ) + D(∂²x(J²) − 2J∂²xJ)] dx.
/// The drift enters explicitly, so comparing drifts tests that it drops out.
pub fn generator_growth_rate(j: &Poly, p: &GridDistribution, drift: Field<'_>, diffusion: Field<'_>, t: f64) -> f64 {
    let j1 = j.derivative();
    let j2 = j1.derivative();
    let sq = j.mul(j);
    let sq1 = sq.derivative();
    let sq2 = sq1.derivative();
    p.average(|x| {
        let jx = j.eval(x);
        let k = drift(x, t);
        let d = diffusion(x, t);
        k * (sq1.eval(x) - 2.0 * jx * j1.eval(x)) + d * (sq2.eval(x) - 2.0 * jx * j2.eval(x))
    })
}

/// Parameters of an Ornstein-Uhlenbeck run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuSettings {
    pub gamma: f64,
    pub diffusion: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub h: f64,
    pub initial_mean: f64,
    pub initial_var: f64,
    pub a0: f64,
    pub b0: f64,
    pub e0: f64,
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    pub record_every: usize,
}

impl Default for OuSettings {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            diffusion: 1.0,
            x_min: -8.0,
            x_max: 8.0,
            h: 0.02,
            initial_mean: 1.0,
            initial_var: 0.5,
            a0: 1.0,
            b0: 1.0,
            e0: 0.0,
            t0: 0.0,
            t1: 1.0,
            dt: 1e-4,
            record_every: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FpRecord {
    pub t: f64,
    pub bar_j: f64,
    pub var_j: f64,
    pub growth_formula: f64,
    pub growth_fd: f64,
    pub entropy: f64,
    pub mass_err: f64,
    pub min_p: f64,
}

#[derive(Debug, Clone)]
pub struct FpTrajectory {
    pub invariant: PolyInvariant,
    pub records: Vec<FpRecord>,
    pub final_state: GridDistribution,
}

impl FpTrajectory {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    /// Largest |J̄(t) − J̄(t0)| / max(|J̄(t0)|, 1e-300).
    pub fn conservation_rel_drift(&self) -> f64 {
        let j0 = self.records[0].bar_j;
        let scale = j0.abs().max(f64::MIN_POSITIVE);
        self.records.iter().map(|r| (r.bar_j - j0).abs() / scale).fold(0.0, f64::max)
    }

    pub fn variance_max_decrease(&self) -> f64 {
        diff::max_step_decrease(&self.records.iter().map(|r| r.var_j).collect::<Vec<_>>())
    }

    pub fn growth_agreement(&self, abs_floor: f64, rel: f64) -> diff::Agreement {
        let fd: Vec<f64> = self.records.iter().map(|r| r.growth_fd).collect();
        let formula: Vec<f64> = self.records.iter().map(|r| r.growth_formula).collect();
        diff::agreement(&fd, &formula, 1..self.records.len().saturating_sub(1), abs_floor, rel)
    }
}

/// Evolves a Gaussian initial density under K = −γx and constant D with RK4,
/// recording the invariant's statistics every `record_every` steps.
pub fn run_ou(s: &OuSettings) -> Result<FpTrajectory> {
    let j = ou_invariant_coeffs(s.gamma, s.diffusion, s.a0, s.b0, s.e0)?;
    let grid = Grid::uniform(s.x_min, s.x_max, s.h)?;
    let gamma = s.gamma;
    let dcoef = s.diffusion;
    let drift = move |x: f64, _t: f64| -gamma * x;
    let diffusion = move |_x: f64, _t: f64| dcoef;
    if !(s.dt > 0.0 && s.dt.is_finite()) {
        return Err(Error::InvalidStep { dt: s.dt });
    }
    if !(s.t1 > s.t0) {
        return Err(Error::InvalidInterval { t0: s.t0, t1: s.t1 });
    }
    if s.record_every == 0 {
        return Err(Error::InvalidParameter("record_every must be at least 1".into()));
    }
    let limit = stability_limit(&grid, &diffusion, s.t0)?;
    let steps = (math::ceil((s.t1 - s.t0) / s.dt - 1e-9) as usize).max(1);
    let dt = (s.t1 - s.t0) / steps as f64;
    if dt > limit {
        return Err(Error::StabilityLimit { dt, limit });
    }

    let mut p = GridDistribution::gaussian(grid, s.initial_mean, s.initial_var)?;
    let mut records = Vec::with_capacity(steps / s.record_every + 2);
    let record = |p: &GridDistribution, t: f64| FpRecord {
        t,
        bar_j: bar_j(&j, p, t),
        var_j: variance_j(&j, p, t),
        growth_formula: classical_growth_rate(&j, p, &diffusion, t),
        growth_fd: f64::NAN,
        entropy: p.entropy(),
        mass_err: (p.mass() - 1.0).abs(),
        min_p: p.min(),
    };
    records.push(record(&p, s.t0));
    for k in 0..steps {
        let t = s.t0 + k as f64 * dt;
        let next = rk4_step(&grid, p.values(), &drift, &diffusion, t, dt);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { t: t + dt });
        }
        let t_next = if k + 1 == steps { s.t1 } else { s.t0 + (k + 1) as f64 * dt };
        if (k + 1) % s.record_every == 0 || k + 1 == steps {
            p = GridDistribution::new(grid, next)?;
            records.push(record(&p, t_next));
        } else {
            p = GridDistribution { grid, values: next };
        }
    }
    let times: Vec<f64> = records.iter().map(|r| r.t).collect();
    let var: Vec<f64> = records.iter().map(|r| r.var_j).collect();
    for (r, d) in records.iter_mut().zip(diff::derivative(&times, &var)) {
        r.growth_fd = d;
    }
    Ok(FpTrajectory { invariant: j, records, final_state: p })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::uniform(-8.0, 8.0, 0.02).unwrap()
    }

    #[test]
    fn grid_has_expected_nodes() {
        let g = grid();
        assert_eq!(g.n, 801);
        assert!((g.x(800) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn distribution_invariants_are_enforced() {
        let g = grid();
        let p = GridDistribution::gaussian(g, 0.0, 1.0).unwrap();
        assert!((p.mass() - 1.0).abs() < 1e-14);
        let mut v = p.values().to_vec();
        v[400] = -1e-6;
        assert!(matches!(GridDistribution::new(g, v), Err(Error::NegativeProbability { .. })));
        let flat = alloc::vec![1.0 / 16.0; g.n];
        assert!(matches!(GridDistribution::new(g, flat), Err(Error::BoundaryLeak { .. })));
        let double: Vec<f64> = p.values().iter().map(|x| 2.0 * x).collect();
        assert!(matches!(GridDistribution::new(g, double), Err(Error::MassNotUnit { .. })));
        let mut tiny = p.values().to_vec();
        tiny[3] = -1e-13;
        assert_eq!(GridDistribution::new(g, tiny).unwrap().values()[3], 0.0);
    }

    #[test]
    fn stationary_gaussian_is_nearly_fixed() {
        let p = GridDistribution::gaussian(grid(), 0.0, 1.0).unwrap();
        let rhs = fp_rhs(&p, &|x, _| -x, &|_, _| 1.0, 0.0).unwrap();
        let worst = rhs.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(worst <= 1e-4, "{worst}");
        assert!(grid().integrate(rhs.iter().copied()).abs() <= 1e-9);
    }

    #[test]
    fn pure_diffusion_spreads_at_twice_d() {
        let g = grid();
        let mut p = GridDistribution::gaussian(g, 0.0, 0.5).unwrap();
        let var0 = p.average(|x| x * x);
        let dt = 1e-4;
        for k in 0..1000 {
            let next = rk4_step(&g, p.values(), &|_, _| 0.0, &|_, _| 1.0, k as f64 * dt, dt);
            p = GridDistribution::new(g, next).unwrap();
        }
        let rate = (p.average(|x| x * x) - var0) / 0.1;
        assert!((rate - 2.0).abs() < 0.02);
    }

    #[test]
    fn rhs_requires_positive_diffusion() {
        let p = GridDistribution::gaussian(grid(), 0.0, 1.0).unwrap();
        assert!(fp_rhs(&p, &|_, _| 0.0, &|_, _| 0.0, 0.0).is_err());
    }

    #[test]
    fn ou_coefficient_examples() {
        let j = ou_invariant_coeffs(1.0, 1.0, 1.0, 0.0, 0.0).unwrap();
        let (a, b, e) = j.coeffs(math::ln(math::sqrt(2.0)));
        assert!((a - 2.0).abs() < 1e-14 && b == 0.0 && (e + 1.0).abs() < 1e-14);
        let lin = ou_invariant_coeffs(1.5, 0.3, 0.0, 1.0, 0.2).unwrap();
        let (a, b, e) = lin.coeffs(0.7);
        assert_eq!(a, 0.0);
        assert!((b - math::exp(1.05)).abs() < 1e-14);
        assert_eq!(e, 0.2);
        for (x, t) in [(0.3, 0.0), (-2.0, 0.4), (5.0, 1.0)] {
            let full = ou_invariant_coeffs(1.2, 0.7, 0.8, -0.4, 0.1).unwrap();
            assert!(full.residual(x, t).abs() <= 1e-12 * full.value(x, t).abs().max(1.0) * 10.0);
        }
        assert!(ou_invariant_coeffs(0.0, 1.0, 1.0, 0.0, 0.0).is_err());
        assert!(ou_invariant_coeffs(1.0, -1.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn averages_on_stationary_state() {
        let p = GridDistribution::gaussian(grid(), 0.0, 1.0).unwrap();
        let one = ou_invariant_coeffs(1.0, 1.0, 0.0, 0.0, 1.0).unwrap();
        assert!((bar_j(&one, &p, 0.0) - 1.0).abs() < 1e-14);
        let sq = ou_invariant_coeffs(1.0, 1.0, 1.0, 0.0, 0.0).unwrap();
        assert!((bar_j(&sq, &p, 0.0) - 1.0).abs() < 1e-10);
        let lin = ou_invariant_coeffs(1.0, 1.0, 0.0, 1.0, 0.0).unwrap();
        assert!((classical_growth_rate(&lin, &p, &|_, _| 1.0, 0.0) - 2.0).abs() < 1e-10);
        assert_eq!(classical_growth_rate(&one, &p, &|_, _| 1.0, 0.0), 0.0);
    }

    #[test]
    fn drift_drops_out_of_generator_rate() {
        let p = GridDistribution::gaussian(grid(), 1.0, 0.5).unwrap();
        let j = ou_invariant_coeffs(1.0, 1.0, 1.0, 1.0, 0.0).unwrap().poly(0.0);
        let slow = generator_growth_rate(&j, &p, &|x, _| -x, &|_, _| 1.0, 0.0);
        let fast = generator_growth_rate(&j, &p, &|x, _| -3.0 * x, &|_, _| 1.0, 0.0);
        assert!((slow - fast).abs() <= 1e-10);
        let formula =
            classical_growth_rate(&ou_invariant_coeffs(1.0, 1.0, 1.0, 1.0, 0.0).unwrap(), &p, &|_, _| 1.0, 0.0);
        assert!((slow - formula).abs() < 1e-10 * formula);
    }

    #[test]
    fn polynomial_arithmetic() {
        let p = Poly(alloc::vec![1.0, 2.0, 3.0]);
        assert_eq!(p.eval(2.0), 17.0);
        assert_eq!(p.derivative(), Poly(alloc::vec![2.0, 6.0]));
        assert_eq!(p.mul(&Poly(alloc::vec![0.0, 1.0])), Poly(alloc::vec![0.0, 1.0, 2.0, 3.0]));
    }

    #[test]
    fn unstable_step_is_rejected() {
        let s = OuSettings { dt: 1e-3, t1: 0.01, ..OuSettings::default() };
        assert!(matches!(run_ou(&s), Err(Error::StabilityLimit { .. })));
    }

    #[test]
    fn short_ou_run_conserves_and_grows() {
        let s = OuSettings { t1: 0.1, ..OuSettings::default() };
        let run = run_ou(&s).unwrap();
        assert_eq!(run.records.len(), 101);
        assert!(run.conservation_rel_drift() < 1e-6);
        assert!(run.variance_max_decrease() <= 1e-8);
        assert!(run.growth_agreement(1e-4, 1e-2).passed());
    }
}
