//! Experiment configuration: built-in defaults, overlaid by a JSON file,
//! overlaid by `key=value` overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use almost_thermal::{Alpha, AlphaGrid, InhomogeneityKind, ModelParams, Population, ReservoirModel};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Dynamics,
    WorkDist,
    HeatDist,
    SecondLaws,
    LongTerm,
    Scaling,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Dynamics,
        Experiment::WorkDist,
        Experiment::HeatDist,
        Experiment::SecondLaws,
        Experiment::LongTerm,
        Experiment::Scaling,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Dynamics => "dynamics",
            Experiment::WorkDist => "work_dist",
            Experiment::HeatDist => "heat_dist",
            Experiment::SecondLaws => "second_laws",
            Experiment::LongTerm => "long_term",
            Experiment::Scaling => "scaling",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == norm)
            .ok_or_else(|| {
                let known: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
                CliError::config("experiment", format!("unknown experiment `{s}`; expected one of {}", known.join(", ")))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(CliError::config("format", format!("expected `csv` or `json`, got `{s}`"))),
        }
    }
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub d: usize,
    pub beta: f64,
    pub g0: f64,
    /// Partial-swap angle in radians.
    pub theta: f64,
    pub kind: InhomogeneityKind,
    pub sigma: f64,
    /// Ground-state populations of qubit inputs. Empty means the
    /// experiment's default set.
    pub p0: Vec<f64>,
    /// Full input population; takes precedence over `p0` where one state
    /// is needed.
    pub population: Option<Vec<f64>>,
    pub steps: usize,
    pub samples: usize,
    pub alphas: AlphaGrid,
    pub seed: u64,
    pub delta_min: f64,
    pub delta_max: f64,
    pub delta_points: usize,
    pub n_values: Vec<u64>,
    pub xi_values: Vec<f64>,
    pub c_values: Vec<f64>,
    pub sequential: bool,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Per-experiment defaults.
    pub fn defaults(experiment: Experiment) -> Self {
        let mut cfg = ExperimentConfig {
            experiment,
            d: 2,
            beta: 1.0,
            g0: 1.0,
            theta: 0.1,
            kind: InhomogeneityKind::Hamiltonian,
            sigma: 0.02,
            p0: Vec::new(),
            population: None,
            steps: 200,
            samples: 10_000,
            alphas: AlphaGrid::default(),
            seed: 1,
            delta_min: -0.2,
            delta_max: 0.2,
            delta_points: 401,
            n_values: vec![10, 100, 1_000, 10_000, 100_000, 1_000_000],
            xi_values: vec![0.5, 1.0, 2.0],
            c_values: vec![3.0],
            sequential: false,
            format: OutputFormat::Csv,
            out: None,
        };
        match experiment {
            Experiment::Dynamics => {
                cfg.sigma = 0.05;
                cfg.p0 = vec![0.5];
            }
            Experiment::WorkDist | Experiment::HeatDist => cfg.samples = 1_000_000,
            Experiment::SecondLaws => cfg.p0 = vec![0.75],
            Experiment::LongTerm => {
                cfg.sigma = 0.05;
                cfg.p0 = vec![0.735];
                cfg.steps = 500;
                cfg.samples = 100;
                cfg.alphas = AlphaGrid::new(vec![Alpha::One, Alpha::Infinity]).expect("static grid");
            }
            Experiment::Scaling => {}
        }
        cfg
    }

    /// Layers `file` (a JSON object) and then `overrides` on top of the
    /// defaults of `experiment`. Override values are parsed as JSON where
    /// possible and taken as strings otherwise.
    pub fn resolve(experiment: Experiment, file: Option<Value>, overrides: &[(String, String)]) -> Result<Self, CliError> {
        let base = serde_json::to_value(Self::defaults(experiment)).expect("defaults serialize");
        let Value::Object(mut map) = base else {
            unreachable!("config serializes to an object")
        };
        if let Some(file) = file {
            let Value::Object(file) = file else {
                return Err(CliError::config("config", "the config file must hold a JSON object"));
            };
            if let Some(name) = file.get("experiment") {
                let named = name
                    .as_str()
                    .ok_or_else(|| CliError::config("experiment", "must be a string"))?
                    .parse::<Experiment>()?;
                if named != experiment {
                    return Err(CliError::config(
                        "experiment",
                        format!("config file is for `{named}` but `{experiment}` was requested"),
                    ));
                }
            }
            merge(&mut map, file)?;
        }
        let mut extra = Map::new();
        for (key, raw) in overrides {
            if key == "experiment" {
                return Err(CliError::config("experiment", "pass the experiment as the positional argument"));
            }
            extra.insert(key.clone(), parse_override(raw));
        }
        merge(&mut map, extra)?;
        Self::from_map(map)
    }

    fn from_map(mut map: Map<String, Value>) -> Result<Self, CliError> {
        // orders are strings so that `inf` survives JSON; accept bare numbers too
        if let Some(Value::Array(alphas)) = map.get_mut("alphas") {
            for a in alphas.iter_mut() {
                if let Value::Number(n) = a {
                    *a = Value::String(n.to_string());
                }
            }
        }
        let cfg: Self = serde_json::from_value(Value::Object(map.clone())).map_err(|e| {
            // serde_json reports the field only in the message; recover it
            // by retrying each key against the defaults
            let field = map
                .keys()
                .find(|k| field_fails(&map, k))
                .cloned()
                .unwrap_or_else(|| "config".to_owned());
            CliError::Config { field, reason: e.to_string() }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(experiment: Experiment, path: &Path, overrides: &[(String, String)]) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config("config", format!("cannot read {}: {e}", path.display())))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::config("config", format!("{} is not valid JSON: {e}", path.display())))?;
        Self::resolve(experiment, Some(value), overrides)
    }

    pub fn params(&self) -> Result<ModelParams, CliError> {
        ModelParams::new(self.d, self.beta, self.g0, self.theta).map_err(field_error)
    }

    pub fn reservoir(&self) -> Result<ReservoirModel, CliError> {
        ReservoirModel::new(self.kind, self.sigma).map_err(field_error)
    }

    /// The single input state of experiments that evolve one state.
    pub fn input_state(&self) -> Result<Population, CliError> {
        if let Some(pop) = &self.population {
            let p = Population::new(pop.clone()).map_err(|e| CliError::config("population", e.to_string()))?;
            if p.dim() != self.d {
                return Err(CliError::config(
                    "population",
                    format!("has {} entries but d = {}", p.dim(), self.d),
                ));
            }
            return Ok(p);
        }
        if self.d != 2 {
            return Err(CliError::config("population", format!("required when d = {} (p0 describes qubits)", self.d)));
        }
        let p0 = *self
            .p0
            .first()
            .ok_or_else(|| CliError::config("p0", "needs at least one value"))?;
        Population::qubit(p0).map_err(|e| CliError::config("p0", e.to_string()))
    }

    /// Qubit inputs of the distribution experiments; defaults to
    /// `{0.5, thermal, 0.9}`.
    pub fn qubit_inputs(&self) -> Vec<f64> {
        if self.p0.is_empty() {
            let thermal = 1.0 / (1.0 + (-self.beta * self.g0).exp());
            vec![0.5, thermal, 0.9]
        } else {
            self.p0.clone()
        }
    }

    pub fn delta_grid(&self) -> Vec<f64> {
        let n = self.delta_points;
        if n == 1 {
            return vec![self.delta_min];
        }
        let h = (self.delta_max - self.delta_min) / (n - 1) as f64;
        (0..n)
            .map(|i| {
                let x = self.delta_min + i as f64 * h;
                // land exactly on the reference point when the grid crosses it
                if x.abs() < 1e-3 * h {
                    0.0
                } else {
                    x
                }
            })
            .collect()
    }

    fn validate(&self) -> Result<(), CliError> {
        self.params()?;
        self.reservoir()?;
        for &p in &self.p0 {
            if !(0.0..=1.0).contains(&p) {
                return Err(CliError::config("p0", format!("entries must lie in [0, 1], got {p}")));
            }
        }
        if let Some(pop) = &self.population {
            Population::new(pop.clone()).map_err(|e| CliError::config("population", e.to_string()))?;
        }
        if self.samples == 0 {
            return Err(CliError::config("samples", "must be at least 1"));
        }
        if self.alphas.is_empty() {
            return Err(CliError::config("alphas", "must not be empty"));
        }
        if !(self.delta_min.is_finite() && self.delta_max.is_finite() && self.delta_min <= self.delta_max) {
            return Err(CliError::config("delta_min", "needs finite delta_min <= delta_max"));
        }
        if self.delta_min <= -1.0 {
            return Err(CliError::config("delta_min", "must exceed -1"));
        }
        if self.delta_points == 0 {
            return Err(CliError::config("delta_points", "must be at least 1"));
        }
        if self.n_values.contains(&0) {
            return Err(CliError::config("n_values", "entries must be at least 1"));
        }
        if self.c_values.iter().any(|&c| !(c.is_finite() && c > 0.0)) {
            return Err(CliError::config("c_values", "entries must be finite and positive"));
        }
        if self.xi_values.iter().any(|x| !x.is_finite()) {
            return Err(CliError::config("xi_values", "entries must be finite"));
        }
        Ok(())
    }
}

fn field_error(e: almost_thermal::Error) -> CliError {
    match e {
        almost_thermal::Error::InvalidParameter { name, reason } => CliError::config(name, reason),
        other => other.into(),
    }
}

fn merge(map: &mut Map<String, Value>, layer: Map<String, Value>) -> Result<(), CliError> {
    for (key, value) in layer {
        if !map.contains_key(&key) {
            return Err(CliError::config(key, "unknown field"));
        }
        map.insert(key, value);
    }
    Ok(())
}

fn field_fails(map: &Map<String, Value>, key: &str) -> bool {
    let experiment = map
        .get("experiment")
        .and_then(|v| serde_json::from_value::<Experiment>(v.clone()).ok())
        .unwrap_or(Experiment::Dynamics);
    let Value::Object(mut probe) = serde_json::to_value(ExperimentConfig::defaults(experiment)).expect("defaults serialize")
    else {
        unreachable!()
    };
    probe.insert(key.to_owned(), map[key].clone());
    serde_json::from_value::<ExperimentConfig>(Value::Object(probe)).is_err()
}

fn parse_override(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| {
        // bare comma lists such as `alphas=1,2,inf`
        if raw.contains(',') {
            Value::Array(raw.split(',').map(|s| parse_override(s.trim())).collect())
        } else {
            Value::String(raw.to_owned())
        }
    })
}
