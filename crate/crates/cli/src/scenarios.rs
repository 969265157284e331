//! Scenario runners. Each produces the tables to write and the checks that
//! go into the verdict.

use rayon::prelude::*;
use weakinv_core::channel::random_channel_with;
use weakinv_core::diff::agreement;
use weakinv_core::fokker_planck::{
    self, generator_growth_rate, ou_invariant_coeffs, FpTrajectory, Grid, GridDistribution, OuSettings, MASS_TOL,
    NEGATIVE_CLIP,
};
use weakinv_core::lindblad::{
    integrate, integrate_with, IntegrationSettings, InvariantSource, LindbladGenerator, Trajectory,
};
use weakinv_core::models::{
    edge_occupation, oscillator_invariant_residual, oscillator_predicted_growth, spin_coefficients,
    spin_invariant_residual, spin_predicted_growth, OscillatorModel, SpinModel,
};
use weakinv_core::operator::{expectation, min_eigenvalue_of_difference, variance};
use weakinv_core::random::{random_density, random_hermitian, Rng};
use weakinv_core::thermo::{canonical_gap, canonical_state, check_relation, IsoenergeticPath};
use weakinv_core::{DensityMatrix, HermitianOperator, Matrix, Result};

use crate::config::{
    ExperimentConfig, FuzzParams, InitialState, InvariantMode, OscillatorParams, OuParams, Params, SpinParams,
};
use crate::report::{series_table, Cell, Check, Table, SERIES_HEADER};

pub const FUZZ_HEADER: [&str; 11] = [
    "index",
    "dim",
    "n_kraus",
    "tp_residual",
    "unital_residual",
    "duality_residual",
    "kadison_min_eig",
    "exp_before",
    "exp_after",
    "var_before",
    "var_after",
];

pub const THERMO_HEADER: [&str; 7] = ["t", "T", "C", "U", "var_canonical", "relation_lhs", "canonical_gap"];

/// Tables keyed by file name (the first is always `series.csv`) and checks.
#[derive(Debug)]
pub struct Outcome {
    pub tables: Vec<(&'static str, Table)>,
    pub checks: Vec<Check>,
    /// Choices the run made on the user's behalf, such as the initial state.
    pub notes: Vec<String>,
}

pub fn execute(config: &ExperimentConfig, threads: usize) -> Result<Outcome> {
    match &config.params {
        Params::Spin(p) => spin(config, p),
        Params::Oscillator(p) => oscillator(config, p),
        Params::ChannelFuzz(p) => channel_fuzz(config, p, threads),
        Params::ThermoSpin(p) => thermo_spin(config, p),
        Params::FpOu(p) => fp_ou(config, p),
    }
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::NEG_INFINITY, |a, b| if b.is_nan() || a.is_nan() { f64::NAN } else { a.max(b) })
}

fn min_of(values: impl IntoIterator<Item = f64>) -> f64 {
    -max_of(values.into_iter().map(|v| -v))
}

fn settings(config: &ExperimentConfig) -> IntegrationSettings {
    IntegrationSettings::new(config.t0, config.t1, config.dt).with_alpha(config.alpha)
}

/// Reruns with half the step and compares var I at the shared nodes.
fn step_halving_check(
    config: &ExperimentConfig,
    traj: &Trajectory,
    rerun: impl FnOnce(&IntegrationSettings) -> Result<Trajectory>,
) -> Result<Check> {
    let steps = settings(config).steps()?;
    let half = (config.t1 - config.t0) / (2 * steps) as f64;
    let fine = rerun(&IntegrationSettings::new(config.t0, config.t1, half).with_alpha(config.alpha))?;
    let mut worst = 0.0f64;
    for (i, r) in traj.records.iter().enumerate() {
        match fine.records.get(2 * i) {
            Some(f) if (f.t - r.t).abs() <= 1e-12 * r.t.abs().max(1.0) => {
                worst = worst.max((f.var_i - r.var_i).abs() / r.var_i.abs().max(1.0));
            }
            _ => {
                worst = f64::NAN;
                break;
            }
        }
    }
    Ok(Check::at_most(
        "step_halving_convergence",
        "fixed-step integration converged: var I at dt vs dt/2 on shared nodes (relative)",
        worst,
        0.0,
        1e-8,
    ))
}

/// Checks every quantum trajectory must satisfy.
fn trajectory_checks(traj: &Trajectory, gen: &LindbladGenerator, conservation_tol: f64) -> Result<Vec<Check>> {
    let e0 = traj.records[0].exp_i;
    let growth = traj.growth_agreement(1e-6, 1e-3);
    let vn = traj.vn_bound_check(1e-6, 1e-3);
    let renyi = traj.renyi_bound_check(gen, traj.alpha, 1e-6, 1e-3)?;
    Ok(vec![
        Check::within(
            "expectation_conserved",
            "weak invariant: <I> constant in time (relative drift)",
            traj.conservation_drift() / e0.abs().max(1.0),
            0.0,
            conservation_tol,
        ),
        Check::at_most(
            "variance_nondecreasing",
            "monotone fluctuation growth: largest one-step decrease of var I",
            traj.variance_max_decrease(),
            0.0,
            1e-9,
        ),
        Check::at_most(
            "second_moment_nondecreasing",
            "monotone growth of <I^2>: largest drop below an earlier value",
            traj.second_moment_max_drop(),
            0.0,
            1e-9,
        ),
        Check::at_most(
            "growth_rate_equality",
            "d var I/dt = 2 sum c <[L,I]^dag [L,I]>: worst |fd - formula| / max(1e-6, 1e-3 |formula|)",
            growth.worst_ratio,
            1.0,
            0.0,
        ),
        Check::at_least(
            "growth_rate_nonnegative",
            "fluctuation growth rate is a sum of nonnegative terms",
            min_of(traj.column(|r| r.growth_formula)),
            0.0,
            1e-12,
        ),
        Check::at_least(
            "vn_entropy_rate_bound",
            "dS/dt >= 2 sum c <[L^dag, L]>: min slack after allowance max(1e-6, 1e-3 |bound|)",
            vn.min_slack,
            0.0,
            0.0,
        ),
        Check::at_least(
            "renyi_entropy_rate_bound",
            "Renyi dS_alpha/dt >= escort-weighted commutator bound: min slack after allowance",
            renyi.min_slack,
            0.0,
            0.0,
        ),
        Check::at_most(
            "trace_preserved",
            "density matrix keeps unit trace (largest |tr rho - 1|)",
            max_of(traj.column(|r| r.trace_err)),
            0.0,
            1e-9,
        ),
        Check::at_least(
            "state_positive",
            "density matrix stays positive semidefinite (smallest eigenvalue)",
            min_of(traj.column(|r| r.min_eig)),
            0.0,
            1e-8,
        ),
    ])
}

/// With Hermitian Lindblad operators every commutator bound vanishes.
fn hermitian_bound_checks(traj: &Trajectory, gen: &LindbladGenerator) -> Result<Vec<Check>> {
    let (_, renyi) = traj.renyi_series(gen, traj.alpha)?;
    Ok(vec![
        Check::within(
            "hermitian_lindblad_vn_bound_zero",
            "Hermitian Lindblad operators: von Neumann rate bound is zero",
            max_of(traj.column(|r| r.bound_vn.abs())),
            0.0,
            1e-12,
        ),
        Check::within(
            "hermitian_lindblad_renyi_bound_zero",
            "Hermitian Lindblad operators: Renyi rate bound is zero",
            max_of(renyi.iter().map(|b| b.abs())),
            0.0,
            1e-12,
        ),
    ])
}

struct SpinRun {
    model: SpinModel,
    gen: LindbladGenerator,
    traj: Trajectory,
    i0: HermitianOperator,
}

fn spin_run(config: &ExperimentConfig, p: &SpinParams) -> Result<SpinRun> {
    let model = SpinModel::exponential(p.b0, p.rates);
    let settings = settings(config);
    model.validate(&settings.times()?)?;
    let gen = model.generator();
    let i0 = HermitianOperator::new(model.hamiltonian(config.t0))?;
    let rho0 = canonical_state(&i0, p.initial_temperature)?;
    log::info!("integrating spin model over [{}, {}] with dt = {}", config.t0, config.t1, config.dt);
    let traj = integrate(&gen, &rho0, &i0, &settings)?;
    Ok(SpinRun { model, gen, traj, i0 })
}

fn spin_checks(config: &ExperimentConfig, p: &SpinParams, run: &SpinRun) -> Result<Vec<Check>> {
    let SpinRun { model, gen, traj, i0 } = run;
    let mut checks = trajectory_checks(traj, gen, 1e-8)?;
    checks.extend(hermitian_bound_checks(traj, gen)?);

    let mut min_c = f64::INFINITY;
    let mut residual = 0.0f64;
    let mut rate_err = 0.0f64;
    for (&t, r) in traj.times.iter().zip(&traj.records) {
        min_c = min_c.min(min_of(spin_coefficients(model, t)?));
        let (res, scale) = spin_invariant_residual(model, gen, t)?;
        residual = residual.max(res / scale.max(f64::MIN_POSITIVE));
        let predicted = spin_predicted_growth(model, t);
        rate_err = rate_err.max((r.growth_formula - predicted).abs() / predicted.abs().max(1.0));
    }
    let gain = traj.records.last().expect("trajectory has nodes").var_i - traj.records[0].var_i;
    let b2_gain = model.field_squared(config.t1) - model.field_squared(config.t0);
    let gain_err = (gain - b2_gain).abs() / b2_gain.abs().max(f64::MIN_POSITIVE);

    let shifted = integrate(gen, &traj.states[0], &i0.shifted(p.shift), &settings(config))?;
    checks.push(step_halving_check(config, traj, |s| integrate(gen, &traj.states[0], i0, s))?);
    let shift_dev = max_of(traj.records.iter().zip(&shifted.records).map(|(a, b)| (a.var_i - b.var_i).abs()));

    checks.extend([
        Check::at_least(
            "dissipation_coefficients_nonnegative",
            "spin model: c_n = (sum_m g_m - 2 g_n)/8 with g = Bdot/B stays nonnegative",
            min_c,
            0.0,
            0.0,
        ),
        Check::at_most(
            "hamiltonian_is_weak_invariant",
            "spin model: H(t) solves the invariant equation (residual / |dH/dt|)",
            residual,
            0.0,
            1e-10,
        ),
        Check::within(
            "closed_form_variance_gain",
            "spin model: var H(t1) - var H(t0) = B^2(t1) - B^2(t0) (relative error)",
            gain_err,
            0.0,
            1e-6,
        ),
        Check::at_most(
            "closed_form_growth_rate",
            "spin model: growth rate equals 2 B . dB/dt (relative error)",
            rate_err,
            0.0,
            1e-6,
        ),
        Check::within(
            "shift_symmetry",
            "I -> I + a 1 leaves the variance series unchanged (largest deviation)",
            shift_dev,
            0.0,
            1e-9,
        ),
    ]);
    Ok(checks)
}

fn spin_notes(p: &SpinParams) -> Vec<String> {
    vec![format!(
        "initial state: Gibbs state of H(t0) at T = {} (a modelling choice; override with params.initial_temperature)",
        p.initial_temperature
    )]
}

fn spin(config: &ExperimentConfig, p: &SpinParams) -> Result<Outcome> {
    let run = spin_run(config, p)?;
    let checks = spin_checks(config, p, &run)?;
    Ok(Outcome { tables: vec![("series.csv", series_table(&run.traj))], checks, notes: spin_notes(p) })
}

/// Ground or Gibbs state of H(t0).
fn oscillator_initial_state(model: &OscillatorModel, t0: f64, p: &OscillatorParams) -> Result<DensityMatrix> {
    let h = HermitianOperator::new(model.hamiltonian(t0))?;
    match p.initial {
        InitialState::Thermal => canonical_state(&h, p.initial_temperature),
        InitialState::Ground => {
            let spec = h.eigh()?;
            let mut weights = vec![0.0; spec.eigenvalues.len()];
            weights[0] = 1.0;
            DensityMatrix::new(spec.with_values(&weights))
        }
    }
}

fn oscillator(config: &ExperimentConfig, p: &OscillatorParams) -> Result<Outcome> {
    let model = OscillatorModel::inverse_linear(p.n_fock, p.k0, p.k_rate)?;
    let settings = settings(config);
    let times = settings.times()?;
    model.validate(&times)?;
    let gen = model.generator();
    let rho0 = oscillator_initial_state(&model, config.t0, p)?;
    log::info!("integrating oscillator (n_fock = {}) over [{}, {}]", p.n_fock, config.t0, config.t1);
    let i0 = HermitianOperator::new(model.hamiltonian(config.t0))?;
    let m = model.clone();
    let h = move |t: f64| Ok(m.hamiltonian(t));
    let solve = |s: &IntegrationSettings| match p.invariant {
        InvariantMode::Hamiltonian => integrate_with(&gen, &rho0, InvariantSource::Prescribed(&h), s),
        InvariantMode::Evolve => integrate(&gen, &rho0, &i0, s),
    };
    let traj = solve(&settings)?;

    let mut checks = trajectory_checks(&traj, &gen, 1e-7)?;
    checks.extend(hermitian_bound_checks(&traj, &gen)?);
    checks.push(step_halving_check(config, &traj, solve)?);

    let mut predicted = Vec::with_capacity(traj.len());
    let mut edge = 0.0f64;
    let mut max_kdot = f64::NEG_INFINITY;
    let mut residual = 0.0f64;
    for (&t, rho) in traj.times.iter().zip(&traj.states) {
        predicted.push(oscillator_predicted_growth(&model, rho, t)?);
        edge = edge.max(edge_occupation(rho, 2));
        max_kdot = max_kdot.max((model.kdot)(t));
        let (res, scale) = oscillator_invariant_residual(&model, &gen, t)?;
        residual = residual.max(res / scale.max(f64::MIN_POSITIVE));
    }
    let fd = traj.column(|r| r.growth_fd);
    let law = agreement(&fd, &predicted, 1..fd.len().saturating_sub(1), 1e-5, 1e-3);
    checks.extend([
        Check::at_most(
            "stiffness_decreasing",
            "oscillator model: k(t) decreases monotonically (largest dk/dt)",
            max_kdot,
            0.0,
            0.0,
        ),
        Check::at_most(
            "hamiltonian_is_weak_invariant",
            "oscillator model: H(t) solves the invariant equation away from the truncation edge",
            residual,
            0.0,
            1e-9,
        ),
        Check::at_most(
            "oscillator_growth_law",
            "oscillator model: d var H/dt = -dk/dt <K3^2> (worst |fd - law| / max(1e-5, 1e-3 |law|))",
            law.worst_ratio,
            1.0,
            0.0,
        ),
        Check::at_most(
            "truncation_edge_occupation",
            "truncated Fock space: occupation of the top two levels stays negligible",
            edge,
            0.0,
            1e-8,
        ),
    ]);
    let initial = match p.initial {
        InitialState::Ground => "ground state of H(t0)".to_owned(),
        InitialState::Thermal => format!("Gibbs state of H(t0) at T = {}", p.initial_temperature),
    };
    let invariant = match p.invariant {
        InvariantMode::Hamiltonian => "I(t) = H(t) prescribed",
        InvariantMode::Evolve => "I(t) integrated from H(t0)",
    };
    let notes = vec![
        format!("initial state: {initial} (a modelling choice; override with params.initial)"),
        format!("invariant: {invariant}"),
    ];
    Ok(Outcome { tables: vec![("series.csv", series_table(&traj))], checks, notes })
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct FuzzRow {
    index: u64,
    dim: usize,
    n_kraus: usize,
    tp_residual: f64,
    unital_residual: f64,
    duality_residual: f64,
    kadison_min_eig: f64,
    exp_before: f64,
    exp_after: f64,
    var_before: f64,
    var_after: f64,
}

/// Work item `index` depends only on `(seed, index)`, never on scheduling.
fn fuzz_one(seed: u64, index: u64, p: &FuzzParams) -> Result<FuzzRow> {
    let mut rng = Rng::stream(seed, index);
    let dim = rng.range(2, p.max_dim);
    let n_kraus = rng.range(1, p.max_kraus);
    let ch = random_channel_with(&mut rng, dim, n_kraus)?;
    let i_later = random_hermitian(&mut rng, dim);
    let rho = random_density(&mut rng, dim);

    let unit = ch.adjoint_apply(&HermitianOperator::identity(dim))?;
    let unital_residual = (unit.matrix() - &Matrix::identity(dim)).max_abs();
    let out = ch.apply(&rho)?;
    let i_earlier = ch.adjoint_apply(&i_later)?;
    let exp_after = expectation(&i_later, &out)?;
    let exp_before = expectation(&i_earlier, &rho)?;
    let duality_residual = (i_later.trace_product(&out) - i_earlier.trace_product(&rho)).norm();
    let gap = ch.kadison_gap(&i_later)?;
    let zero = HermitianOperator::new(Matrix::zeros(dim))?;
    Ok(FuzzRow {
        index,
        dim,
        n_kraus,
        tp_residual: ch.tp_residual(),
        unital_residual,
        duality_residual,
        kadison_min_eig: min_eigenvalue_of_difference(&gap, &zero)?,
        exp_before,
        exp_after,
        var_before: variance(&i_earlier, &rho)?,
        var_after: variance(&i_later, &out)?,
    })
}

fn channel_fuzz(config: &ExperimentConfig, p: &FuzzParams, threads: usize) -> Result<Outcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| weakinv_core::Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;
    log::info!("fuzzing {} channels on {threads} threads", p.n_channels);
    let rows: Vec<FuzzRow> = pool.install(|| {
        (0..p.n_channels as u64).into_par_iter().map(|j| fuzz_one(config.seed, j, p)).collect::<Result<_>>()
    })?;

    let mut table = Table::new(&FUZZ_HEADER);
    for r in &rows {
        table.push(&[
            Cell::U(r.index),
            Cell::U(r.dim as u64),
            Cell::U(r.n_kraus as u64),
            Cell::F(r.tp_residual),
            Cell::F(r.unital_residual),
            Cell::F(r.duality_residual),
            Cell::F(r.kadison_min_eig),
            Cell::F(r.exp_before),
            Cell::F(r.exp_after),
            Cell::F(r.var_before),
            Cell::F(r.var_after),
        ]);
    }
    let checks = vec![
        Check::at_most(
            "trace_preserving",
            "Kraus completeness sum K^dag K = 1 (largest residual)",
            max_of(rows.iter().map(|r| r.tp_residual)),
            0.0,
            weakinv_core::channel::CPTP_TOL,
        ),
        Check::at_most(
            "adjoint_unital",
            "Heisenberg-picture map is unital: Phi*(1) = 1 (largest residual)",
            max_of(rows.iter().map(|r| r.unital_residual)),
            0.0,
            1e-9,
        ),
        Check::at_most(
            "adjoint_duality",
            "tr(X Phi(rho)) = tr(Phi*(X) rho) (largest residual)",
            max_of(rows.iter().map(|r| r.duality_residual)),
            0.0,
            1e-9,
        ),
        Check::at_least(
            "kadison_gap_psd",
            "Kadison-Schwarz: Phi*(I^2) - Phi*(I)^2 >= 0 (smallest eigenvalue)",
            min_of(rows.iter().map(|r| r.kadison_min_eig)),
            0.0,
            1e-9,
        ),
        Check::at_most(
            "pulled_back_expectation_preserved",
            "<Phi*(I)>_rho = <I>_Phi(rho) (largest deviation)",
            max_of(rows.iter().map(|r| (r.exp_after - r.exp_before).abs())),
            0.0,
            1e-9,
        ),
        Check::at_most(
            "variance_nondecreasing",
            "monotone fluctuation growth across a channel: largest var(before) - var(after)",
            max_of(rows.iter().map(|r| r.var_before - r.var_after)),
            0.0,
            1e-9,
        ),
    ];
    Ok(Outcome { tables: vec![("series.csv", table)], checks, notes: Vec::new() })
}

fn thermo_spin(config: &ExperimentConfig, p: &SpinParams) -> Result<Outcome> {
    let run = spin_run(config, p)?;
    let mut checks = spin_checks(config, p, &run)?;
    let model = &run.model;
    let energy = expectation(&run.i0, &run.traj.states[0])?;
    let m = model.clone();
    let path = IsoenergeticPath::solve(&run.traj.times, energy, |t| HermitianOperator::new(m.hamiltonian(t)))?;
    let relation = check_relation(&path)?;

    let mut table = Table::new(&THERMO_HEADER);
    let mut lhs = vec![f64::NAN; path.times.len()];
    for (&i, &v) in relation.nodes.iter().zip(&relation.lhs) {
        lhs[i] = v;
    }
    let mut closed = 0.0f64;
    for (i, &t) in path.times.iter().enumerate() {
        let temp = path.temperature[i];
        let h = HermitianOperator::new(model.hamiltonian(t))?;
        let gap = canonical_gap(&run.traj.states[i], &h, temp)?;
        table.push(&[
            Cell::F(t),
            Cell::F(temp),
            Cell::F(path.specific_heat[i]),
            Cell::F(path.internal_energy),
            Cell::F(path.energy_variance[i]),
            Cell::F(lhs[i]),
            Cell::F(gap),
        ]);
        let x = model.field_squared(t).sqrt() / temp;
        let sech = 1.0 / x.cosh();
        closed = closed.max((path.specific_heat[i] - x * x * sech * sech).abs());
    }
    let t_err = (path.temperature[0] - p.initial_temperature).abs() / p.initial_temperature;
    checks.extend([
        Check::at_least(
            "thermo_relation_positive",
            "isoenergetic canonical path: 2 C dT/dt + T dC/dt > 0 at interior nodes (minimum)",
            relation.min_lhs,
            0.0,
            0.0,
        ),
        Check::within(
            "thermo_relation_identity",
            "T (2 C dT/dt + T dC/dt) = d var_canonical H/dt (relative error)",
            relation.identity_rel_err,
            0.0,
            1e-6,
        ),
        Check::within(
            "closed_form_specific_heat",
            "spin canonical ensemble: C = (B/T)^2 sech^2(B/T) (largest error)",
            closed,
            0.0,
            1e-10,
        ),
        Check::within(
            "initial_temperature_recovered",
            "energy solve returns the preparation temperature at t0 (relative error)",
            t_err,
            0.0,
            1e-8,
        ),
    ]);
    let mut notes = spin_notes(p);
    notes.push("canonical_gap in thermo.csv is a diagnostic of how far the state is from the canonical path".into());
    Ok(Outcome { tables: vec![("series.csv", series_table(&run.traj)), ("thermo.csv", table)], checks, notes })
}

fn ou_settings(config: &ExperimentConfig, p: &OuParams) -> OuSettings {
    OuSettings {
        gamma: p.gamma,
        diffusion: p.diffusion,
        x_min: p.x_min,
        x_max: p.x_max,
        h: p.h,
        initial_mean: p.initial_mean,
        initial_var: p.initial_var,
        a0: p.a0,
        b0: p.b0,
        e0: p.e0,
        t0: config.t0,
        t1: config.t1,
        dt: config.dt,
        record_every: p.record_every,
    }
}

/// Classical run in the standard series layout: the invariant's moments
/// fill the I columns, Shannon entropy fills S_vn, probability mass error
/// and the smallest density value stand in for the trace and eigenvalue
/// columns. Columns without a classical counterpart are NaN.
fn fp_series(run: &FpTrajectory) -> Table {
    let mut table = Table::new(&SERIES_HEADER);
    for r in &run.records {
        table.push(&[
            Cell::F(r.t),
            Cell::F(r.bar_j),
            Cell::F(r.var_j),
            Cell::F(r.growth_formula),
            Cell::F(r.growth_fd),
            Cell::F(r.entropy),
            Cell::F(f64::NAN),
            Cell::F(f64::NAN),
            Cell::F(f64::NAN),
            Cell::F(r.mass_err),
            Cell::F(r.min_p),
        ]);
    }
    table
}

fn fp_ou(config: &ExperimentConfig, p: &OuParams) -> Result<Outcome> {
    let s = ou_settings(config, p);
    log::info!("Fokker-Planck run on [{}, {}] with h = {}, dt = {}", s.x_min, s.x_max, s.h, s.dt);
    let run = fokker_planck::run_ou(&s)?;

    let grid = Grid::uniform(s.x_min, s.x_max, s.h)?;
    let p0 = GridDistribution::gaussian(grid, s.initial_mean, s.initial_var)?;
    let j = ou_invariant_coeffs(s.gamma, s.diffusion, s.a0, s.b0, s.e0)?;
    let j0 = j.poly(s.t0);
    let d = s.diffusion;
    let (g1, g2) = (s.gamma, p.gamma_alt);
    let rate1 = generator_growth_rate(&j0, &p0, &|x, _| -g1 * x, &|_, _| d, s.t0);
    let rate2 = generator_growth_rate(&j0, &p0, &|x, _| -g2 * x, &|_, _| d, s.t0);
    let scale = rate1.abs().max(1.0);

    let mut residual = 0.0f64;
    let mut j_scale = 0.0f64;
    for t in [s.t0, 0.5 * (s.t0 + s.t1), s.t1] {
        for x in grid.nodes() {
            residual = residual.max(j.residual(x, t).abs());
            j_scale = j_scale.max(j.value(x, t).abs());
        }
    }
    let growth = run.growth_agreement(1e-4, 1e-2);
    let checks = vec![
        Check::within(
            "invariant_expectation_conserved",
            "classical invariant: mean of J(x,t) constant under the Fokker-Planck flow (relative drift)",
            run.conservation_rel_drift(),
            0.0,
            1e-6,
        ),
        Check::at_most(
            "invariant_variance_nondecreasing",
            "classical fluctuation growth: largest one-step decrease of var J",
            run.variance_max_decrease(),
            0.0,
            1e-8,
        ),
        Check::at_most(
            "growth_rate_equality",
            "d var J/dt = 2 <D (dJ/dx)^2>: worst |fd - formula| / max(1e-4, 1e-2 |formula|)",
            growth.worst_ratio,
            1.0,
            0.0,
        ),
        Check::at_least(
            "growth_rate_nonnegative",
            "classical growth rate is a diffusion-weighted square",
            min_of(run.records.iter().map(|r| r.growth_formula)),
            0.0,
            0.0,
        ),
        Check::within(
            "drift_independence",
            "growth rate at fixed J, P, D does not depend on the drift (relative difference)",
            (rate1 - rate2).abs() / scale,
            0.0,
            1e-10,
        ),
        Check::at_most(
            "invariant_equation_residual",
            "J(x,t) solves the backward equation (largest residual / largest |J|)",
            residual / j_scale.max(f64::MIN_POSITIVE),
            0.0,
            1e-12,
        ),
        Check::at_most(
            "probability_mass_conserved",
            "grid density keeps unit mass (largest error)",
            max_of(run.records.iter().map(|r| r.mass_err)),
            0.0,
            MASS_TOL,
        ),
        Check::at_least(
            "density_nonnegative",
            "grid density stays nonnegative (smallest value)",
            min_of(run.records.iter().map(|r| r.min_p)),
            0.0,
            NEGATIVE_CLIP,
        ),
    ];
    let notes = vec![format!("initial density: Gaussian with mean {} and variance {}", p.initial_mean, p.initial_var)];
    Ok(Outcome { tables: vec![("series.csv", fp_series(&run))], checks, notes })
}
