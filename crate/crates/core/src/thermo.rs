//! Local-equilibrium description of slow isoenergetic processes.
//!
//! Along such a process the subsystem is approximated by the canonical state
//! of H(t) whose energy equals the conserved U. The energy variance of that
//! state is T²C, and since it grows, 2CṪ + TĊ = (1/T)·d(T²C)/dt is positive.

use alloc::vec::Vec;

use crate::diff;
use crate::error::{Error, Result};
use crate::math;
use crate::operator::{trace_norm, DensityMatrix, HermitianOperator};

/// Bracket for the temperature root solve, in units of the spectral radius.
const T_BRACKET: (f64, f64) = (1e-6, 1e6);

/// Relative width at which bisection hands over to Newton.
const BISECTION_WIDTH: f64 = 1e-3;

const MAX_NEWTON: usize = 60;

fn check_temperature(temperature: f64) -> Result<()> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::NonPositiveTemperature { temperature });
    }
    Ok(())
}

/// Canonical energy and energy variance for a spectrum.
pub fn canonical_moments(eigenvalues: &[f64], temperature: f64) -> Result<(f64, f64)> {
    check_temperature(temperature)?;
    let e0 = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = eigenvalues.iter().map(|&e| math::exp(-(e - e0) / temperature)).collect();
    let z: f64 = w.iter().sum();
    let u: f64 = eigenvalues.iter().zip(&w).map(|(e, w)| e * w).sum::<f64>() / z;
    let var: f64 = eigenvalues.iter().zip(&w).map(|(e, w)| (e - u) * (e - u) * w).sum::<f64>() / z;
    Ok((u, var))
}

/// e^{−H/T} / tr e^{−H/T}
pub fn canonical_state(h: &HermitianOperator, temperature: f64) -> Result<DensityMatrix> {
    check_temperature(temperature)?;
    let spec = h.eigh()?;
    let e0 = spec.min();
    let z: f64 = spec.eigenvalues.iter().map(|&e| math::exp(-(e - e0) / temperature)).sum();
    DensityMatrix::new(spec.map(|e| math::exp(-(e - e0) / temperature) / z))
}

/// C = (ΔH)²_T / T²
pub fn specific_heat(h: &HermitianOperator, temperature: f64) -> Result<f64> {
    let (_, var) = canonical_moments(&h.eigh()?.eigenvalues, temperature)?;
    Ok(var / (temperature * temperature))
}

/// Temperature at which the canonical energy of `h` equals `energy`.
pub fn solve_isoenergetic_temperature(h: &HermitianOperator, energy: f64) -> Result<f64> {
    solve_temperature(&h.eigh()?.eigenvalues, energy)
}

/// Root of T ↦ U(T) − energy for a spectrum.
pub fn solve_temperature(eigenvalues: &[f64], energy: f64) -> Result<f64> {
    let n = eigenvalues.len() as f64;
    let min = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = eigenvalues.iter().sum::<f64>() / n;
    let out_of_range = Error::EnergyOutOfRange { energy, min, max: mean };
    if !(energy > min && energy < mean) {
        return Err(out_of_range);
    }
    let radius = eigenvalues.iter().map(|e| e.abs()).fold(0.0, f64::max);
    let root_tol = 1e-10 * radius;
    let f = |t: f64| canonical_moments(eigenvalues, t).map(|(u, _)| u - energy);

    let (mut lo, mut hi) = (T_BRACKET.0 * radius, T_BRACKET.1 * radius);
    if !(f(lo)? < 0.0 && f(hi)? > 0.0) {
        return Err(out_of_range);
    }
    while hi - lo > BISECTION_WIDTH * lo {
        let mid = math::sqrt(lo * hi);
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let mut t = 0.5 * (lo + hi);
    for _ in 0..MAX_NEWTON {
        let (u, var) = canonical_moments(eigenvalues, t)?;
        let slope = var / (t * t);
        if !(slope > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!("canonical energy is flat at T = {t}")));
        }
        let step = (u - energy) / slope;
        let next = (t - step).clamp(lo, hi);
        let done = (next - t).abs() <= 4.0 * f64::EPSILON * t;
        t = next;
        if done {
            break;
        }
    }
    let residual = f(t)?.abs();
    if !(residual <= root_tol.max(f64::EPSILON * energy.abs())) {
        return Err(Error::InvalidParameter(alloc::format!("temperature solve stalled with residual {residual:.3e}")));
    }
    Ok(t)
}

/// Canonical description of a process at fixed internal energy.
#[derive(Debug, Clone, PartialEq)]
pub struct IsoenergeticPath {
    pub times: Vec<f64>,
    pub temperature: Vec<f64>,
    pub specific_heat: Vec<f64>,
    /// (ΔH)² of the canonical state at each node.
    pub energy_variance: Vec<f64>,
    pub internal_energy: f64,
}

impl IsoenergeticPath {
    /// Solves for T(t) on each node for the Hamiltonian family `h`.
    pub fn solve(times: &[f64], internal_energy: f64, h: impl Fn(f64) -> Result<HermitianOperator>) -> Result<Self> {
        let mut path = Self {
            times: times.to_vec(),
            temperature: Vec::with_capacity(times.len()),
            specific_heat: Vec::with_capacity(times.len()),
            energy_variance: Vec::with_capacity(times.len()),
            internal_energy,
        };
        for &t in times {
            let eigs = h(t)?.eigh()?.eigenvalues;
            let temp = solve_temperature(&eigs, internal_energy)?;
            let (_, var) = canonical_moments(&eigs, temp)?;
            path.temperature.push(temp);
            path.specific_heat.push(var / (temp * temp));
            path.energy_variance.push(var);
        }
        Ok(path)
    }

    /// Uniform node spacing; errors if the grid is not uniform to rounding.
    fn spacing(&self) -> Result<f64> {
        let n = self.times.len();
        if n < 5 {
            return Err(Error::InvalidParameter("relation check needs at least five nodes".into()));
        }
        let h = (self.times[n - 1] - self.times[0]) / (n - 1) as f64;
        for w in self.times.windows(2) {
            if ((w[1] - w[0]) - h).abs() > 1e-9 * h {
                return Err(Error::InvalidParameter("relation check needs a uniform time grid".into()));
            }
        }
        Ok(h)
    }
}

/// Evaluation of 2CṪ + TĊ along a path.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationReport {
    /// Node indices where fourth-order central differences are available.
    pub nodes: Vec<usize>,
    /// 2CṪ + TĊ per evaluated node.
    pub lhs: Vec<f64>,
    /// d(ΔH)²/dt per evaluated node.
    pub variance_rate: Vec<f64>,
    pub min_lhs: f64,
    /// Largest |T·lhs − d(ΔH)²/dt| / |d(ΔH)²/dt|.
    pub identity_rel_err: f64,
}

impl RelationReport {
    pub fn positive(&self) -> bool {
        self.min_lhs > 0.0
    }
}

/// Evaluates the relation with fourth-order central differences at interior nodes.
pub fn check_relation(path: &IsoenergeticPath) -> Result<RelationReport> {
    let h = path.spacing()?;
    let n = path.times.len();
    let mut report = RelationReport {
        nodes: Vec::new(),
        lhs: Vec::new(),
        variance_rate: Vec::new(),
        min_lhs: f64::INFINITY,
        identity_rel_err: 0.0,
    };
    for i in 2..n - 2 {
        let (Some(tdot), Some(cdot), Some(vdot)) = (
            diff::five_point(&path.temperature, h, i),
            diff::five_point(&path.specific_heat, h, i),
            diff::five_point(&path.energy_variance, h, i),
        ) else {
            continue;
        };
        let (t, c) = (path.temperature[i], path.specific_heat[i]);
        let lhs = 2.0 * c * tdot + t * cdot;
        let scale = vdot.abs().max(f64::MIN_POSITIVE);
        let rel = (t * lhs - vdot).abs() / scale;
        report.nodes.push(i);
        report.lhs.push(lhs);
        report.variance_rate.push(vdot);
        report.min_lhs = report.min_lhs.min(lhs);
        report.identity_rel_err = report.identity_rel_err.max(if vdot == 0.0 && lhs == 0.0 { 0.0 } else { rel });
    }
    Ok(report)
}

/// tr|ρ − ρ_canonical|, how far the actual state is from local equilibrium.
pub fn canonical_gap(rho: &DensityMatrix, h: &HermitianOperator, temperature: f64) -> Result<f64> {
    let can = canonical_state(h, temperature)?;
    trace_norm(&HermitianOperator::new(&**rho - &*can)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{pauli, Matrix};
    use crate::random::{random_hermitian, Rng};

    fn spin_z(b: f64) -> HermitianOperator {
        HermitianOperator::new(pauli()[2].scale(b)).unwrap()
    }

    fn sech2(x: f64) -> f64 {
        let c = libm::cosh(x);
        1.0 / (c * c)
    }

    #[test]
    fn canonical_state_closed_form() {
        let rho = canonical_state(&spin_z(1.0), 1.0).unwrap();
        let z = 2.0 * libm::cosh(1.0);
        let want = Matrix::from_diagonal(&[math::exp(-1.0) / z, math::exp(1.0) / z]);
        assert!((&*rho - &want).max_abs() < 1e-15);
        let hot = canonical_state(&spin_z(1.0), 1e6).unwrap();
        assert!((&*hot - &Matrix::identity(2).scale(0.5)).max_abs() < 1e-5);
    }

    #[test]
    fn canonical_state_commutes_with_hamiltonian() {
        let mut rng = Rng::seed(4);
        let h = random_hermitian(&mut rng, 5);
        let rho = canonical_state(&h, 0.7).unwrap();
        let c = &(h.matrix() * &*rho) - &(&*rho * h.matrix());
        assert!(c.max_abs() < 1e-12);
        assert!(matches!(canonical_state(&h, 0.0), Err(Error::NonPositiveTemperature { .. })));
    }

    #[test]
    fn spin_specific_heat_closed_form() {
        for (b, t) in [(1.0, 1.0), (2.0, 0.7), (0.3, 5.0)] {
            let want = (b / t) * (b / t) * sech2(b / t);
            assert!((specific_heat(&spin_z(b), t).unwrap() - want).abs() < 1e-10);
        }
        assert!((specific_heat(&spin_z(1.0), 1.0).unwrap() - 0.419_974_341_614_026_1).abs() < 1e-12);
        assert!(specific_heat(&spin_z(1.0), 1e6).unwrap() < 1e-11);
    }

    #[test]
    fn specific_heat_is_the_energy_slope() {
        let h = spin_z(1.0);
        let eigs = h.eigh().unwrap().eigenvalues;
        let dt = 1e-5;
        let up = canonical_moments(&eigs, 1.0 + dt).unwrap().0;
        let down = canonical_moments(&eigs, 1.0 - dt).unwrap().0;
        let slope = (up - down) / (2.0 * dt);
        let c = specific_heat(&h, 1.0).unwrap();
        assert!((slope - c).abs() < 1e-5 * c);
    }

    #[test]
    fn temperature_solve_inverts_spin_energy() {
        let b = 1.7;
        let t = solve_isoenergetic_temperature(&spin_z(b), -b * libm::tanh(1.0)).unwrap();
        assert!((t - b).abs() < 1e-12);
        let cold = solve_isoenergetic_temperature(&spin_z(1.0), -1.0 + 1e-6).unwrap();
        assert!(cold < 0.2);
        assert!(matches!(solve_isoenergetic_temperature(&spin_z(1.0), 0.0), Err(Error::EnergyOutOfRange { .. })));
        assert!(matches!(solve_isoenergetic_temperature(&spin_z(1.0), -1.5), Err(Error::EnergyOutOfRange { .. })));
    }

    #[test]
    fn temperature_solve_on_random_spectrum() {
        let mut rng = Rng::seed(44);
        let h = random_hermitian(&mut rng, 6);
        let eigs = h.eigh().unwrap().eigenvalues;
        for t in [0.1, 0.8, 3.0] {
            let (u, _) = canonical_moments(&eigs, t).unwrap();
            let solved = solve_temperature(&eigs, u).unwrap();
            assert!((solved - t).abs() < 1e-8 * t);
        }
    }

    #[test]
    fn static_hamiltonian_gives_flat_relation() {
        let times: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let path = IsoenergeticPath::solve(&times, -0.5, |_| Ok(spin_z(1.0))).unwrap();
        let report = check_relation(&path).unwrap();
        assert_eq!(report.nodes.len(), 7);
        assert!(report.lhs.iter().all(|x| x.abs() < 1e-12));
        assert!(report.variance_rate.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn growing_field_gives_positive_relation() {
        let times: Vec<f64> = (0..51).map(|i| i as f64 * 0.01).collect();
        let b0 = 1.0;
        let u = -b0 * libm::tanh(b0 / 2.0);
        let path = IsoenergeticPath::solve(&times, u, |t| Ok(spin_z(b0 * math::exp(0.8 * t)))).unwrap();
        for (i, &t) in times.iter().enumerate() {
            let (uu, var) =
                canonical_moments(&[-b0 * math::exp(0.8 * t), b0 * math::exp(0.8 * t)], path.temperature[i]).unwrap();
            assert!((uu - u).abs() < 1e-10);
            let temp = path.temperature[i];
            assert!((var - temp * temp * path.specific_heat[i]).abs() < 1e-12);
        }
        let report = check_relation(&path).unwrap();
        assert!(report.positive());
        assert!(report.identity_rel_err < 1e-6, "{}", report.identity_rel_err);
    }

    #[test]
    fn canonical_gap_of_canonical_state_is_zero() {
        let h = spin_z(1.0);
        let rho = canonical_state(&h, 0.9).unwrap();
        assert!(canonical_gap(&rho, &h, 0.9).unwrap() < 1e-14);
        let gap = canonical_gap(&DensityMatrix::basis_state(2, 1), &h, 1e6).unwrap();
        assert!((gap - 1.0).abs() < 1e-5);
    }
}
