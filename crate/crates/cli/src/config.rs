//! Experiment configuration: one JSON document, validated before any
//! computation runs.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("config is not valid: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("params for scenario `{scenario}`: {source}")]
    Params { scenario: Scenario, source: serde_json::Error },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Spin,
    Oscillator,
    ChannelFuzz,
    ThermoSpin,
    FpOu,
}

impl Scenario {
    pub const ALL: [Scenario; 5] =
        [Scenario::Spin, Scenario::Oscillator, Scenario::ChannelFuzz, Scenario::ThermoSpin, Scenario::FpOu];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Spin => "spin",
            Scenario::Oscillator => "oscillator",
            Scenario::ChannelFuzz => "channel_fuzz",
            Scenario::ThermoSpin => "thermo_spin",
            Scenario::FpOu => "fp_ou",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            Scenario::Spin => "spin-1/2 in a growing field B(t); H(t) evolved as a weak invariant, closed-form variance gain B^2(t) - B^2(0)",
            Scenario::Oscillator => "truncated oscillator with decreasing stiffness k(t); growth law -kdot<K3^2> from the su(1,1) algebra",
            Scenario::ChannelFuzz => "seeded random CPTP channels; Kadison-Schwarz gap, unitality, duality and variance monotonicity",
            Scenario::ThermoSpin => "isoenergetic canonical path of the spin model; specific-heat / temperature relation",
            Scenario::FpOu => "Ornstein-Uhlenbeck Fokker-Planck run with a quadratic classical invariant",
        }
    }

    pub fn anchor(self) -> &'static str {
        match self {
            Scenario::Spin => "three-generator su(2) model with time-dependent dissipation coefficients",
            Scenario::Oscillator => "su(1,1) oscillator model, stiffness must decrease monotonically",
            Scenario::ChannelFuzz => "monotone fluctuation growth under unital adjoint maps",
            Scenario::ThermoSpin => "variance growth as 2C dT/dt + T dC/dt along the canonical path",
            Scenario::FpOu => "classical analogue: invariants of the backward Kolmogorov equation",
        }
    }

    fn default_interval(self) -> (f64, f64, f64) {
        match self {
            Scenario::FpOu => (0.0, 1.0, 1e-4),
            _ => (0.0, 0.5, 1e-3),
        }
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Scenario,
    #[serde(default)]
    params: Option<Value>,
    t0: Option<f64>,
    t1: Option<f64>,
    dt: Option<f64>,
    alpha: Option<f64>,
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpinParams {
    pub b0: [f64; 3],
    pub rates: [f64; 3],
    pub initial_temperature: f64,
    pub shift: f64,
}

impl Default for SpinParams {
    fn default() -> Self {
        Self { b0: [1.0, 2.0, 3.0], rates: [0.8; 3], initial_temperature: 2.0, shift: 2.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    Ground,
    Thermal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvariantMode {
    /// I(t) = H(t), known to solve the invariant equation.
    Hamiltonian,
    /// I(0) = H(0) propagated by the integrator.
    Evolve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OscillatorParams {
    pub k0: f64,
    pub k_rate: f64,
    pub n_fock: usize,
    pub initial: InitialState,
    pub initial_temperature: f64,
    pub invariant: InvariantMode,
}

impl Default for OscillatorParams {
    fn default() -> Self {
        Self {
            k0: 1.0,
            k_rate: 0.5,
            n_fock: 60,
            initial: InitialState::Ground,
            initial_temperature: 1.0,
            invariant: InvariantMode::Hamiltonian,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FuzzParams {
    pub n_channels: usize,
    pub max_dim: usize,
    pub max_kraus: usize,
}

impl Default for FuzzParams {
    fn default() -> Self {
        Self { n_channels: 200, max_dim: 6, max_kraus: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OuParams {
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
    pub record_every: usize,
    /// Alternative drift rate for the drift-independence spot check.
    pub gamma_alt: f64,
}

impl Default for OuParams {
    fn default() -> Self {
        let s = weakinv_core::fokker_planck::OuSettings::default();
        Self {
            gamma: s.gamma,
            diffusion: s.diffusion,
            x_min: s.x_min,
            x_max: s.x_max,
            h: s.h,
            initial_mean: s.initial_mean,
            initial_var: s.initial_var,
            a0: s.a0,
            b0: s.b0,
            e0: s.e0,
            record_every: s.record_every,
            gamma_alt: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    Spin(SpinParams),
    Oscillator(OscillatorParams),
    ChannelFuzz(FuzzParams),
    ThermoSpin(SpinParams),
    FpOu(OuParams),
}

/// A validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub params: Params,
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    pub alpha: f64,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
}

fn params<T: DeserializeOwned + Default>(scenario: Scenario, value: Option<Value>) -> Result<T, ConfigError> {
    match value {
        None => Ok(T::default()),
        Some(v) => serde_json::from_value(v).map_err(|source| ConfigError::Params { scenario, source }),
    }
}

fn require(ok: bool, msg: impl FnOnce() -> String) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError::Invalid(msg()))
    }
}

fn positive(name: &str, v: f64) -> Result<(), ConfigError> {
    require(v > 0.0 && v.is_finite(), || format!("{name} must be positive and finite, got {v}"))
}

fn finite(name: &str, v: f64) -> Result<(), ConfigError> {
    require(v.is_finite(), || format!("{name} must be finite, got {v}"))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = serde_json::from_str(text)?;
        let scenario = raw.scenario;
        let params = match scenario {
            Scenario::Spin => Params::Spin(params(scenario, raw.params)?),
            Scenario::Oscillator => Params::Oscillator(params(scenario, raw.params)?),
            Scenario::ChannelFuzz => Params::ChannelFuzz(params(scenario, raw.params)?),
            Scenario::ThermoSpin => Params::ThermoSpin(params(scenario, raw.params)?),
            Scenario::FpOu => Params::FpOu(params(scenario, raw.params)?),
        };
        let (t0, t1, dt) = scenario.default_interval();
        let config = Self {
            scenario,
            params,
            t0: raw.t0.unwrap_or(t0),
            t1: raw.t1.unwrap_or(t1),
            dt: raw.dt.unwrap_or(dt),
            alpha: raw.alpha.unwrap_or(2.0),
            seed: raw.seed.unwrap_or(0),
            output_dir: raw.output_dir,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_owned(), source })?;
        Self::from_json(&text)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        finite("t0", self.t0)?;
        finite("t1", self.t1)?;
        positive("dt", self.dt)?;
        require(self.t1 > self.t0, || format!("t1 ({}) must exceed t0 ({})", self.t1, self.t0))?;
        require(self.dt <= self.t1 - self.t0, || format!("dt ({}) exceeds the interval length", self.dt))?;
        positive("alpha", self.alpha)?;
        match &self.params {
            Params::Spin(p) | Params::ThermoSpin(p) => {
                for (i, b) in p.b0.iter().enumerate() {
                    require(b.is_finite() && *b != 0.0, || format!("b0[{i}] must be finite and nonzero, got {b}"))?;
                }
                for (i, r) in p.rates.iter().enumerate() {
                    finite(&format!("rates[{i}]"), *r)?;
                }
                positive("initial_temperature", p.initial_temperature)?;
                finite("shift", p.shift)?;
            }
            Params::Oscillator(p) => {
                positive("k0", p.k0)?;
                finite("k_rate", p.k_rate)?;
                require(p.n_fock >= weakinv_core::models::MIN_FOCK, || {
                    format!("n_fock must be at least {}, got {}", weakinv_core::models::MIN_FOCK, p.n_fock)
                })?;
                positive("initial_temperature", p.initial_temperature)?;
            }
            Params::ChannelFuzz(p) => {
                require(p.n_channels >= 1, || "n_channels must be at least 1".into())?;
                require((2..=64).contains(&p.max_dim), || format!("max_dim must lie in 2..=64, got {}", p.max_dim))?;
                require(p.max_kraus >= 1, || "max_kraus must be at least 1".into())?;
            }
            Params::FpOu(p) => {
                positive("gamma", p.gamma)?;
                positive("gamma_alt", p.gamma_alt)?;
                positive("diffusion", p.diffusion)?;
                positive("h", p.h)?;
                positive("initial_var", p.initial_var)?;
                finite("initial_mean", p.initial_mean)?;
                require(p.x_max > p.x_min, || "x_max must exceed x_min".into())?;
                require(p.record_every >= 1, || "record_every must be at least 1".into())?;
                for (name, v) in [("a0", p.a0), ("b0", p.b0), ("e0", p.e0)] {
                    finite(name, v)?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_scenario_defaults() {
        let c = ExperimentConfig::from_json(r#"{"scenario": "fp_ou"}"#).unwrap();
        assert_eq!((c.t0, c.t1, c.dt), (0.0, 1.0, 1e-4));
        assert_eq!(c.params, Params::FpOu(OuParams::default()));
        let c = ExperimentConfig::from_json(r#"{"scenario": "spin", "params": {"b0": [1, 2, 4]}}"#).unwrap();
        let Params::Spin(p) = c.params else { panic!("wrong params") };
        assert_eq!(p.b0, [1.0, 2.0, 4.0]);
        assert_eq!(p.rates, [0.8; 3]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"scenario": "spin", "dtt": 0.1}"#).is_err());
        let e = ExperimentConfig::from_json(r#"{"scenario": "spin", "params": {"b_0": [1, 2, 3]}}"#).unwrap_err();
        assert!(matches!(e, ConfigError::Params { .. }));
        assert!(ExperimentConfig::from_json(r#"{"scenario": "heat"}"#).is_err());
    }

    #[test]
    fn bad_values_are_rejected() {
        for text in [
            r#"{"scenario": "spin", "dt": -0.001}"#,
            r#"{"scenario": "spin", "t0": 1, "t1": 0.5}"#,
            r#"{"scenario": "spin", "alpha": 0}"#,
            r#"{"scenario": "spin", "params": {"b0": [0, 1, 2]}}"#,
            r#"{"scenario": "oscillator", "params": {"n_fock": 3}}"#,
            r#"{"scenario": "channel_fuzz", "params": {"max_dim": 1}}"#,
            r#"{"scenario": "fp_ou", "params": {"diffusion": 0}}"#,
        ] {
            assert!(matches!(ExperimentConfig::from_json(text), Err(ConfigError::Invalid(_))), "{text}");
        }
    }
}
