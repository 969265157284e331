use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not square ({rows} rows, {len} entries)")]
    NotSquare { rows: usize, len: usize },

    #[error("operator is not Hermitian (residual {residual:.3e} > {tol:.3e})")]
    NotHermitian { residual: f64, tol: f64 },

    #[error("density matrix trace is {trace} (tolerance {tol:.1e})")]
    TraceNotUnit { trace: f64, tol: f64 },

    #[error("operator is not positive semidefinite (min eigenvalue {min_eig:.3e})")]
    NotPositive { min_eig: f64 },

    #[error("expectation has imaginary residue {residual:.3e}; input is not Hermitian")]
    ImaginaryExpectation { residual: f64 },

    #[error("variance {value:.3e} is negative beyond rounding; state is corrupted")]
    NegativeVariance { value: f64 },

    #[error("eigen-solver failed to converge after {iterations} iterations")]
    EigenFailure { iterations: usize },

    #[error("Kraus list is empty")]
    EmptyKraus,

    #[error("Kraus operators are not trace preserving (residual {residual:.3e} > {tol:.3e})")]
    NotTracePreserving { residual: f64, tol: f64 },

    #[error("channel time stamps do not chain: later starts at {later_from}, earlier ends at {earlier_to}")]
    TimeStampMismatch { later_from: f64, earlier_to: f64 },

    #[error("dissipation rate c[{index}] = {value:.3e} is negative at t = {t}")]
    NegativeRate { index: usize, t: f64, value: f64 },

    #[error("step size must be positive and finite, got {dt}")]
    InvalidStep { dt: f64 },

    #[error("time interval [{t0}, {t1}] is empty")]
    InvalidInterval { t0: f64, t1: f64 },

    #[error("positivity breach at t = {t}: min eigenvalue {min_eig:.3e}; reduce the step size")]
    PositivityBreach { t: f64, min_eig: f64 },

    #[error("conservation breach at t = {t}: drift {drift:.3e} exceeds {tol:.3e}")]
    ConservationBreach { t: f64, drift: f64, tol: f64 },

    #[error("integration produced non-finite values at t = {t}; reduce the step size")]
    NonFinite { t: f64 },

    #[error("Renyi order must be positive, got {alpha}")]
    InvalidOrder { alpha: f64 },

    #[error("stiffness must decrease for an isoenergetic oscillator; kdot = {kdot:.3e} at t = {t}")]
    StiffnessNotDecreasing { t: f64, kdot: f64 },

    #[error("stiffness must stay positive; k = {k:.3e} at t = {t}")]
    NonPositiveStiffness { t: f64, k: f64 },

    #[error("field component B[{component}] vanishes at t = {t}")]
    VanishingField { t: f64, component: usize },

    #[error(
        "coefficient c[{index}] = {value:.3e} is negative at t = {t}; field history is not isoenergetically realizable"
    )]
    UnrealizableField { t: f64, index: usize, value: f64 },

    #[error("all dissipation coefficients vanish at t = {t}; the Hamiltonian is not a moving weak invariant")]
    StaticField { t: f64 },

    #[error("state leaks into the truncation edge (top-level occupation {occupation:.3e})")]
    TruncationBreach { occupation: f64 },

    #[error("temperature must be positive, got {temperature}")]
    NonPositiveTemperature { temperature: f64 },

    #[error("internal energy {energy} outside the canonical range ({min}, {max})")]
    EnergyOutOfRange { energy: f64, min: f64, max: f64 },

    #[error("explicit step {dt:.3e} violates the stability limit {limit:.3e}")]
    StabilityLimit { dt: f64, limit: f64 },

    #[error("probability value {value:.3e} is negative")]
    NegativeProbability { value: f64 },

    #[error("distribution mass is {mass}, not 1")]
    MassNotUnit { mass: f64 },

    #[error("distribution does not decay at the boundary (edge/max = {ratio:.3e})")]
    BoundaryLeak { ratio: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
