//! Flat `key = value` run configuration.
//!
//! One key per line, `#` starts a comment. Unknown and repeated keys are
//! rejected. [`RunConfig::to_text`] writes a file that parses back to the
//! same value.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::distributions::JumpLaw;
use crate::error::{Error, Result};
use crate::market::MarketParams;
use crate::montecarlo::SimConfig;
use crate::solver::Knob;
use crate::solver::ModelParams;
use crate::statedep::{Coefficient, Policy, StateModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(Error::Config(format!("format must be csv or json, got {s:?}"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Csv => "csv",
            Self::Json => "json",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LawKind {
    Exponential,
    Gamma,
    Deterministic,
}

impl FromStr for LawKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exponential" => Ok(Self::Exponential),
            "gamma" => Ok(Self::Gamma),
            "deterministic" => Ok(Self::Deterministic),
            _ => Err(Error::Config(format!(
                "law must be exponential, gamma or deterministic, got {s:?}"
            ))),
        }
    }
}

impl fmt::Display for LawKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Exponential => "exponential",
            Self::Gamma => "gamma",
            Self::Deterministic => "deterministic",
        })
    }
}

/// Spending rule requested for curves and simulations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ControlSpec {
    /// The optimum for the model (bang-bang in the linear case).
    Optimal,
    None,
    Rate { rate: f64 },
    /// Unbounded spending, simulated at `cap_m`.
    Max,
    /// Spending capped at `cap` in the linear case.
    Cap { cap: f64 },
}

impl FromStr for ControlSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split_whitespace().collect();
        match parts.as_slice() {
            ["optimal"] => Ok(Self::Optimal),
            ["none"] => Ok(Self::None),
            ["max"] => Ok(Self::Max),
            ["cap", v] => Ok(Self::Cap { cap: parse_f64("control", v)? }),
            [v] => Ok(Self::Rate { rate: parse_f64("control", v)? }),
            _ => Err(Error::Config(format!(
                "control must be optimal, none, max, `cap M` or a rate, got {s:?}"
            ))),
        }
    }
}

impl fmt::Display for ControlSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Optimal => f.write_str("optimal"),
            Self::None => f.write_str("none"),
            Self::Max => f.write_str("max"),
            Self::Cap { cap } => write!(f, "cap {cap}"),
            Self::Rate { rate } => write!(f, "{rate}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HeatAxis {
    Gamma,
    Delta,
    Rho,
    Lambda,
}

impl HeatAxis {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Gamma => "gamma",
            Self::Delta => "delta",
            Self::Rho => "rho",
            Self::Lambda => "lambda",
        }
    }

    pub fn apply(&self, p: ModelParams, v: f64) -> ModelParams {
        match self {
            Self::Gamma => p.with_gamma(v),
            Self::Delta => p.with_delta(v),
            Self::Rho => p.with_rho(v),
            Self::Lambda => p.with_lambda(v),
        }
    }
}

impl FromStr for HeatAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gamma" => Ok(Self::Gamma),
            "delta" => Ok(Self::Delta),
            "rho" => Ok(Self::Rho),
            "lambda" => Ok(Self::Lambda),
            _ => Err(Error::Config(format!(
                "heat-map axis must be gamma, delta, rho or lambda, got {s:?}"
            ))),
        }
    }
}

impl fmt::Display for HeatAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Inclusive grid `min..=max` with `n` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self> {
        let g = Self { min, max, n };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || !(self.min < self.max) || !self.min.is_finite() || !self.max.is_finite() {
            return Err(Error::Config(format!(
                "grid needs n >= 2 and finite min < max, got {}..{} with {} points",
                self.min, self.max, self.n
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let h = (self.max - self.min) / (self.n - 1) as f64;
        (0..self.n)
            .map(|i| if i + 1 == self.n { self.max } else { self.min + h * i as f64 })
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunConfig {
    pub scenario: Option<String>,

    pub law: Option<LawKind>,
    pub nu: Option<f64>,
    pub shape: Option<f64>,
    pub rate: Option<f64>,
    pub jump_value: Option<f64>,

    pub rho: Option<f64>,
    pub lambda: Option<f64>,
    pub delta: Option<f64>,
    pub gamma: Option<f64>,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,

    pub state_rho: Option<Coefficient>,
    pub state_lambda: Option<Coefficient>,
    pub state_delta: Option<Coefficient>,

    pub control: Option<ControlSpec>,
    pub exposure: Option<f64>,
    pub x0: Option<f64>,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub x_n: Option<usize>,

    pub heat_x: Option<HeatAxis>,
    pub heat_x_min: Option<f64>,
    pub heat_x_max: Option<f64>,
    pub heat_x_n: Option<usize>,
    pub heat_y: Option<HeatAxis>,
    pub heat_y_min: Option<f64>,
    pub heat_y_max: Option<f64>,
    pub heat_y_n: Option<usize>,

    pub knob: Option<Knob>,
    pub sweep_start: Option<f64>,
    pub sweep_end: Option<f64>,
    pub sweep_n: Option<usize>,

    pub seed: Option<u64>,
    pub paths: Option<usize>,
    pub threads: Option<usize>,
    pub barrier: Option<f64>,
    pub barrier_tail: Option<f64>,
    pub t_max: Option<f64>,
    pub euler_dt: Option<f64>,
    pub cap_m: Option<f64>,

    pub out: Option<String>,
    pub format: Option<Format>,
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| Error::Config(format!("{key}: expected a number, got {v:?}")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.parse::<usize>()
        .map_err(|_| Error::Config(format!("{key}: expected a non-negative integer, got {v:?}")))
}

fn parse_u64(key: &str, v: &str) -> Result<u64> {
    v.parse::<u64>()
        .map_err(|_| Error::Config(format!("{key}: expected a 64-bit unsigned integer, got {v:?}")))
}

/// Every key the file format accepts, in output order.
pub const KEYS: &[&str] = &[
    "scenario", "law", "nu", "shape", "rate", "jump_value", "rho", "lambda", "delta", "gamma", "mu",
    "sigma", "state_rho", "state_lambda", "state_delta", "control", "exposure", "x0", "x_min", "x_max",
    "x_n", "heat_x", "heat_x_min", "heat_x_max", "heat_x_n", "heat_y", "heat_y_min", "heat_y_max",
    "heat_y_n", "knob", "sweep_start", "sweep_end", "sweep_n", "seed", "paths", "threads", "barrier",
    "barrier_tail", "t_max", "euler_dt", "cap_m", "out", "format",
];

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = std::collections::HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`, got {raw:?}", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!("line {}: key {key:?} given twice", lineno + 1)));
            }
            cfg.set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "scenario" => self.scenario = Some(v.to_string()),
            "law" => self.law = Some(v.parse()?),
            "nu" => self.nu = Some(parse_f64(key, v)?),
            "shape" => self.shape = Some(parse_f64(key, v)?),
            "rate" => self.rate = Some(parse_f64(key, v)?),
            "jump_value" => self.jump_value = Some(parse_f64(key, v)?),
            "rho" => self.rho = Some(parse_f64(key, v)?),
            "lambda" => self.lambda = Some(parse_f64(key, v)?),
            "delta" => self.delta = Some(parse_f64(key, v)?),
            "gamma" => self.gamma = Some(parse_f64(key, v)?),
            "mu" => self.mu = Some(parse_f64(key, v)?),
            "sigma" => self.sigma = Some(parse_f64(key, v)?),
            "state_rho" => self.state_rho = Some(v.parse()?),
            "state_lambda" => self.state_lambda = Some(v.parse()?),
            "state_delta" => self.state_delta = Some(v.parse()?),
            "control" => self.control = Some(v.parse()?),
            "exposure" => self.exposure = Some(parse_f64(key, v)?),
            "x0" => self.x0 = Some(parse_f64(key, v)?),
            "x_min" => self.x_min = Some(parse_f64(key, v)?),
            "x_max" => self.x_max = Some(parse_f64(key, v)?),
            "x_n" => self.x_n = Some(parse_usize(key, v)?),
            "heat_x" => self.heat_x = Some(v.parse()?),
            "heat_x_min" => self.heat_x_min = Some(parse_f64(key, v)?),
            "heat_x_max" => self.heat_x_max = Some(parse_f64(key, v)?),
            "heat_x_n" => self.heat_x_n = Some(parse_usize(key, v)?),
            "heat_y" => self.heat_y = Some(v.parse()?),
            "heat_y_min" => self.heat_y_min = Some(parse_f64(key, v)?),
            "heat_y_max" => self.heat_y_max = Some(parse_f64(key, v)?),
            "heat_y_n" => self.heat_y_n = Some(parse_usize(key, v)?),
            "knob" => self.knob = Some(v.parse()?),
            "sweep_start" => self.sweep_start = Some(parse_f64(key, v)?),
            "sweep_end" => self.sweep_end = Some(parse_f64(key, v)?),
            "sweep_n" => self.sweep_n = Some(parse_usize(key, v)?),
            "seed" => self.seed = Some(parse_u64(key, v)?),
            "paths" => self.paths = Some(parse_usize(key, v)?),
            "threads" => self.threads = Some(parse_usize(key, v)?),
            "barrier" => self.barrier = Some(parse_f64(key, v)?),
            "barrier_tail" => self.barrier_tail = Some(parse_f64(key, v)?),
            "t_max" => self.t_max = Some(parse_f64(key, v)?),
            "euler_dt" => self.euler_dt = Some(parse_f64(key, v)?),
            "cap_m" => self.cap_m = Some(parse_f64(key, v)?),
            "out" => self.out = Some(v.to_string()),
            "format" => self.format = Some(v.parse()?),
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Text form of one key, if set.
    fn get(&self, key: &str) -> Option<String> {
        fn s<T: ToString>(v: &Option<T>) -> Option<String> {
            v.as_ref().map(ToString::to_string)
        }
        match key {
            "scenario" => self.scenario.clone(),
            "law" => s(&self.law),
            "nu" => s(&self.nu),
            "shape" => s(&self.shape),
            "rate" => s(&self.rate),
            "jump_value" => s(&self.jump_value),
            "rho" => s(&self.rho),
            "lambda" => s(&self.lambda),
            "delta" => s(&self.delta),
            "gamma" => s(&self.gamma),
            "mu" => s(&self.mu),
            "sigma" => s(&self.sigma),
            "state_rho" => s(&self.state_rho),
            "state_lambda" => s(&self.state_lambda),
            "state_delta" => s(&self.state_delta),
            "control" => s(&self.control),
            "exposure" => s(&self.exposure),
            "x0" => s(&self.x0),
            "x_min" => s(&self.x_min),
            "x_max" => s(&self.x_max),
            "x_n" => s(&self.x_n),
            "heat_x" => s(&self.heat_x),
            "heat_x_min" => s(&self.heat_x_min),
            "heat_x_max" => s(&self.heat_x_max),
            "heat_x_n" => s(&self.heat_x_n),
            "heat_y" => s(&self.heat_y),
            "heat_y_min" => s(&self.heat_y_min),
            "heat_y_max" => s(&self.heat_y_max),
            "heat_y_n" => s(&self.heat_y_n),
            "knob" => self.knob.map(|k| k.name().to_string()),
            "sweep_start" => s(&self.sweep_start),
            "sweep_end" => s(&self.sweep_end),
            "sweep_n" => s(&self.sweep_n),
            "seed" => s(&self.seed),
            "paths" => s(&self.paths),
            "threads" => s(&self.threads),
            "barrier" => s(&self.barrier),
            "barrier_tail" => s(&self.barrier_tail),
            "t_max" => s(&self.t_max),
            "euler_dt" => s(&self.euler_dt),
            "cap_m" => s(&self.cap_m),
            "out" => self.out.clone(),
            "format" => s(&self.format),
            _ => None,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            if let Some(v) = self.get(key) {
                out.push_str(&format!("{key} = {v}\n"));
            }
        }
        out
    }

    /// Keys set in `other` replace those here.
    pub fn overlay(&mut self, other: &RunConfig) -> Result<()> {
        for key in KEYS {
            if let Some(v) = other.get(key) {
                self.set(key, &v)?;
            }
        }
        Ok(())
    }

    fn require<T: Copy>(v: Option<T>, key: &str) -> Result<T> {
        v.ok_or_else(|| Error::Config(format!("missing key `{key}`")))
    }

    pub fn jump_law(&self) -> Result<JumpLaw> {
        match self.law.unwrap_or(LawKind::Exponential) {
            LawKind::Exponential => JumpLaw::exponential(Self::require(self.nu, "nu")?),
            LawKind::Gamma => JumpLaw::gamma(Self::require(self.shape, "shape")?, Self::require(self.rate, "rate")?),
            LawKind::Deterministic => JumpLaw::deterministic(Self::require(self.jump_value, "jump_value")?),
        }
    }

    pub fn model_params(&self) -> Result<ModelParams> {
        ModelParams::new(
            Self::require(self.rho, "rho")?,
            Self::require(self.lambda, "lambda")?,
            Self::require(self.delta, "delta")?,
            Self::require(self.gamma, "gamma")?,
        )
    }

    /// Index parameters when both `mu` and `sigma` are given.
    pub fn market(&self) -> Result<Option<MarketParams>> {
        match (self.mu, self.sigma) {
            (Some(mu), Some(sigma)) => Ok(Some(MarketParams::new(mu, sigma)?)),
            (None, None) => Ok(None),
            _ => Err(Error::Config("mu and sigma must be given together".into())),
        }
    }

    pub fn is_state_dependent(&self) -> bool {
        self.state_rho.is_some() || self.state_lambda.is_some() || self.state_delta.is_some()
    }

    pub fn state_model(&self) -> Result<StateModel> {
        StateModel::new(
            Self::require(self.state_rho, "state_rho")?,
            Self::require(self.state_lambda, "state_lambda")?,
            Self::require(self.state_delta, "state_delta")?,
            Self::require(self.gamma, "gamma")?,
        )
    }

    /// Spending rule for the state-dependent model.
    pub fn state_policy(&self, model: &StateModel) -> Result<Policy> {
        Ok(match self.control.unwrap_or(ControlSpec::Optimal) {
            ControlSpec::Optimal if model.gamma < 1.0 => Policy::Optimal,
            ControlSpec::Optimal | ControlSpec::Max => Policy::BangBang { cap: None },
            ControlSpec::Cap { cap } => Policy::BangBang { cap: Some(cap) },
            ControlSpec::None => Policy::Constant { rate: 0.0 },
            ControlSpec::Rate { rate } => Policy::Constant { rate },
        })
    }

    pub fn x_grid(&self) -> Result<Grid> {
        Grid::new(
            Self::require(self.x_min, "x_min")?,
            Self::require(self.x_max, "x_max")?,
            Self::require(self.x_n, "x_n")?,
        )
    }

    pub fn heat_grids(&self) -> Result<(HeatAxis, Grid, HeatAxis, Grid)> {
        let x = Grid::new(
            Self::require(self.heat_x_min, "heat_x_min")?,
            Self::require(self.heat_x_max, "heat_x_max")?,
            Self::require(self.heat_x_n, "heat_x_n")?,
        )?;
        let y = Grid::new(
            Self::require(self.heat_y_min, "heat_y_min")?,
            Self::require(self.heat_y_max, "heat_y_max")?,
            Self::require(self.heat_y_n, "heat_y_n")?,
        )?;
        let ax = Self::require(self.heat_x, "heat_x")?;
        let ay = Self::require(self.heat_y, "heat_y")?;
        if ax == ay {
            return Err(Error::Config("heat_x and heat_y must differ".into()));
        }
        Ok((ax, x, ay, y))
    }

    /// Explicit sweep `(start, end, n)` if all three keys are set.
    pub fn sweep(&self) -> Result<Option<(f64, f64, usize)>> {
        match (self.sweep_start, self.sweep_end, self.sweep_n) {
            (Some(a), Some(b), Some(n)) => Ok(Some((a, b, n))),
            (None, None, None) => Ok(None),
            _ => Err(Error::Config("sweep_start, sweep_end and sweep_n go together".into())),
        }
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config("randomised commands need an explicit seed (--seed or `seed`)".into()))
    }

    /// Simulation settings; `barrier` is used when the config does not set one.
    pub fn sim_config(&self, barrier: f64) -> Result<SimConfig> {
        let mut c = SimConfig::new(self.paths.unwrap_or(100_000), self.seed()?, self.barrier.unwrap_or(barrier));
        if let Some(v) = self.barrier_tail {
            c.barrier_tail = v;
        }
        if let Some(v) = self.t_max {
            c.t_max = v;
        }
        if let Some(v) = self.euler_dt {
            c.euler_dt = v;
        }
        if let Some(v) = self.cap_m {
            c.cap_m = v;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn barrier_tail(&self) -> f64 {
        self.barrier_tail.unwrap_or(1e-4)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# comment line
law = exponential
nu = 0.1   # trailing comment
rho = 0.1
lambda = 0.1
delta = 1
gamma = 0.5
mu = 0.1
sigma = 0.2
state_rho = affine 1 1 1
state_lambda = rational 0.1 1.2
state_delta = constant 0.4
control = cap 1000
knob = delta_inf
x_min = 0
x_max = 10
x_n = 11
seed = 42
format = json
";

    #[test]
    fn parses_and_round_trips() {
        let c = RunConfig::parse(SAMPLE).unwrap();
        assert_eq!(c.nu, Some(0.1));
        assert_eq!(c.state_lambda, Some(Coefficient::rational(0.1, 1.2)));
        assert_eq!(c.control, Some(ControlSpec::Cap { cap: 1000.0 }));
        assert_eq!(c.knob, Some(Knob::DeltaInf));
        assert_eq!(c.format, Some(Format::Json));
        let again = RunConfig::parse(&c.to_text()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        assert!(matches!(RunConfig::parse("colour = red"), Err(Error::Config(_))));
        assert!(RunConfig::parse("rho = 1\nrho = 2").is_err());
        assert!(RunConfig::parse("rho 1").is_err());
        assert!(RunConfig::parse("rho = abc").is_err());
        assert!(RunConfig::parse("format = xml").is_err());
    }

    #[test]
    fn overlay_replaces_keys() {
        let mut c = RunConfig::parse(SAMPLE).unwrap();
        let flags = RunConfig {
            seed: Some(7),
            paths: Some(2000),
            ..Default::default()
        };
        c.overlay(&flags).unwrap();
        assert_eq!(c.seed, Some(7));
        assert_eq!(c.paths, Some(2000));
        assert_eq!(c.rho, Some(0.1));
    }

    #[test]
    fn builds_domain_objects() {
        let c = RunConfig::parse(SAMPLE).unwrap();
        assert_eq!(c.jump_law().unwrap(), JumpLaw::exponential(0.1).unwrap());
        assert!(c.model_params().is_ok());
        assert!(c.market().unwrap().is_some());
        let grid = c.x_grid().unwrap();
        assert_eq!(grid.points().len(), 11);
        assert_eq!(grid.points()[10], 10.0);
        let m = RunConfig {
            gamma: Some(1.0),
            ..c.clone()
        };
        let sm = m.state_model().unwrap();
        assert_eq!(m.state_policy(&sm).unwrap(), Policy::BangBang { cap: Some(1000.0) });
        assert!(RunConfig::default().seed().is_err());
        assert!(RunConfig { mu: Some(1.0), ..Default::default() }.market().is_err());
    }

    #[test]
    fn control_strings() {
        for s in ["optimal", "none", "max", "cap 50", "0.25"] {
            let c: ControlSpec = s.parse().unwrap();
            assert_eq!(c.to_string(), s);
        }
        assert!("cap".parse::<ControlSpec>().is_err());
    }
}
