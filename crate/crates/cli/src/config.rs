//! JSON run configuration.
//!
//! A config is parsed, then [`resolve`](RunConfig::resolve)d: command-line
//! overrides are applied and every defaulted field is filled in, so the
//! echo embedded in each report is the complete input of the run.

use std::path::Path;

use popdyn::abel::{ScalarPeriodicRhs, DEFAULT_GRID};
use popdyn::floquet::{PeriodicModel, DEFAULT_SAMPLES};
use popdyn::{IntegratorConfig, PeriodicFunction};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_TRAJECTORY_SAMPLES: usize = 512;
pub const DEFAULT_SWEEP_INSTANCES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Coords {
    Population,
    Reciprocal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub initial: Vec<InitialCondition>,
    #[serde(default)]
    pub t_span: Option<[f64; 2]>,
    #[serde(default)]
    pub integrator: IntegratorSettings,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub coords: Option<Coords>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub view: Option<View>,
    #[serde(default)]
    pub output: OutputPaths,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    PredatorPrey {
        b: f64,
        d: f64,
    },
    Competing {
        a: f64,
        b: f64,
        c: f64,
        d: f64,
    },
    PeriodicPredatorPrey {
        b: f64,
        d: f64,
        period: f64,
        #[serde(default)]
        beta: Option<PeriodicFunction>,
        #[serde(default)]
        delta: Option<PeriodicFunction>,
    },
    Abel {
        period: f64,
        #[serde(default)]
        a0: Option<CoefficientSpec>,
        #[serde(default)]
        a1: Option<CoefficientSpec>,
        #[serde(default)]
        a2: Option<CoefficientSpec>,
        #[serde(default)]
        a3: Option<CoefficientSpec>,
        #[serde(default)]
        bracket: Option<[f64; 2]>,
        #[serde(default)]
        grid: Option<usize>,
        #[serde(default)]
        hypothesis_samples: Option<usize>,
    },
}

/// A constant, or a `{period, mean, cos, sin}` Fourier series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefficientSpec {
    Constant(f64),
    Periodic(PeriodicFunction),
}

impl CoefficientSpec {
    fn to_function(&self, period: f64) -> Result<PeriodicFunction, CliError> {
        match self {
            CoefficientSpec::Constant(v) => Ok(PeriodicFunction::constant(period, *v)?),
            CoefficientSpec::Periodic(f) => Ok(f.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialCondition {
    pub x: f64,
    #[serde(default)]
    pub y: Option<f64>,
}

/// `null` leaves a field at its default; `max_step: null` means unbounded.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSettings {
    #[serde(default)]
    pub rtol: Option<f64>,
    #[serde(default)]
    pub atol: Option<f64>,
    #[serde(default)]
    pub max_step: Option<f64>,
    #[serde(default)]
    pub blowup_threshold: Option<f64>,
    #[serde(default)]
    pub max_steps: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct View {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default)]
    pub csv: Option<String>,
    #[serde(default)]
    pub report: Option<String>,
    #[serde(default)]
    pub svg: Option<String>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub samples: Option<usize>,
    pub coords: Option<Coords>,
    pub seed: Option<u64>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ModelConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ModelConfig::PredatorPrey { .. } => "predator_prey",
            ModelConfig::Competing { .. } => "competing",
            ModelConfig::PeriodicPredatorPrey { .. } => "periodic_predator_prey",
            ModelConfig::Abel { .. } => "abel",
        }
    }

    pub fn is_planar(&self) -> bool {
        !matches!(self, ModelConfig::Abel { .. })
    }

    /// Natural time scale: the period for periodic systems, 10 otherwise.
    fn default_t_end(&self) -> f64 {
        match self {
            ModelConfig::PredatorPrey { b, d } => popdyn::predator_prey::period(*b, *d),
            ModelConfig::Competing { .. } => 10.0,
            ModelConfig::PeriodicPredatorPrey { period, .. } | ModelConfig::Abel { period, .. } => {
                *period
            }
        }
    }

    pub fn periodic_model(&self) -> Result<PeriodicModel, CliError> {
        match self {
            ModelConfig::PeriodicPredatorPrey {
                b,
                d,
                period,
                beta,
                delta,
            } => {
                let zero = PeriodicFunction::zero(*period)?;
                Ok(PeriodicModel::new(
                    *b,
                    *d,
                    beta.clone().unwrap_or_else(|| zero.clone()),
                    delta.clone().unwrap_or(zero),
                )?)
            }
            other => Err(config_err(format!(
                "expected a periodic_predator_prey model, got {}",
                other.name()
            ))),
        }
    }

    pub fn abel_rhs(&self) -> Result<ScalarPeriodicRhs, CliError> {
        match self {
            ModelConfig::Abel {
                period,
                a0,
                a1,
                a2,
                a3,
                ..
            } => {
                let coef = |c: &Option<CoefficientSpec>| match c {
                    Some(c) => c.to_function(*period),
                    None => Ok(PeriodicFunction::zero(*period)?),
                };
                Ok(ScalarPeriodicRhs::abel(
                    coef(a0)?,
                    coef(a1)?,
                    coef(a2)?,
                    coef(a3)?,
                )?)
            }
            other => Err(config_err(format!(
                "expected an abel model, got {}",
                other.name()
            ))),
        }
    }

    fn resolve(&mut self) -> Result<(), CliError> {
        let positive = |pairs: &[(&str, f64)]| -> Result<(), CliError> {
            for (name, v) in pairs {
                if !(v.is_finite() && *v > 0.0) {
                    return Err(config_err(format!(
                        "model.{name} must be positive and finite, got {v}"
                    )));
                }
            }
            Ok(())
        };
        match self {
            ModelConfig::PredatorPrey { b, d } => positive(&[("b", *b), ("d", *d)]),
            ModelConfig::Competing { a, b, c, d } => {
                positive(&[("a", *a), ("b", *b), ("c", *c), ("d", *d)])
            }
            ModelConfig::PeriodicPredatorPrey {
                b,
                d,
                period,
                beta,
                delta,
            } => {
                positive(&[("b", *b), ("d", *d), ("period", *period)])?;
                for f in [&mut *beta, &mut *delta] {
                    if f.is_none() {
                        *f = Some(PeriodicFunction::zero(*period)?);
                    }
                }
                self.periodic_model().map(|_| ())
            }
            ModelConfig::Abel {
                period,
                a0,
                a1,
                a2,
                a3,
                bracket,
                grid,
                hypothesis_samples,
            } => {
                positive(&[("period", *period)])?;
                for c in [&mut *a0, &mut *a1, &mut *a2, &mut *a3] {
                    if c.is_none() {
                        *c = Some(CoefficientSpec::Constant(0.0));
                    }
                }
                let br = *bracket.get_or_insert([-3.0, 3.0]);
                if !(br[0].is_finite() && br[1].is_finite() && br[0] < br[1]) {
                    return Err(config_err(format!(
                        "model.bracket {br:?} must be finite and increasing"
                    )));
                }
                if *grid.get_or_insert(DEFAULT_GRID) < 2 {
                    return Err(config_err("model.grid must be at least 2"));
                }
                hypothesis_samples.get_or_insert(16);
                self.abel_rhs().map(|_| ())
            }
        }
    }
}

impl IntegratorSettings {
    fn resolve(&mut self) -> Result<(), CliError> {
        let d = IntegratorConfig::default();
        self.rtol.get_or_insert(d.rtol);
        self.atol.get_or_insert(d.atol);
        self.blowup_threshold.get_or_insert(d.blowup_threshold);
        self.max_steps.get_or_insert(d.max_steps);
        self.build()
            .validate()
            .map_err(|e| config_err(format!("integrator: {e}")))
    }

    pub fn build(&self) -> IntegratorConfig {
        let d = IntegratorConfig::default();
        IntegratorConfig {
            rtol: self.rtol.unwrap_or(d.rtol),
            atol: self.atol.unwrap_or(d.atol),
            max_step: self.max_step.unwrap_or(d.max_step),
            blowup_threshold: self.blowup_threshold.unwrap_or(d.blowup_threshold),
            max_steps: self.max_steps.unwrap_or(d.max_steps),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| config_err(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Apply overrides, fill defaults and validate. Idempotent.
    pub fn resolve(mut self, over: Overrides) -> Result<Self, CliError> {
        self.model.resolve()?;
        self.integrator.resolve()?;

        let planar = self.model.is_planar();
        for (i, ic) in self.initial.iter().enumerate() {
            let ok = ic.x.is_finite()
                && match (planar, ic.y) {
                    (true, Some(y)) => ic.x > 0.0 && y.is_finite() && y > 0.0,
                    (true, None) => false,
                    (false, y) => y.is_none(),
                };
            if !ok {
                let want = if planar {
                    "positive x and y"
                } else {
                    "a finite x and no y"
                };
                return Err(config_err(format!("initial[{i}] must have {want}")));
            }
        }

        let span = *self.t_span.get_or_insert([0.0, self.model.default_t_end()]);
        if !(span[0].is_finite() && span[1].is_finite() && span[0] < span[1]) {
            return Err(config_err(format!(
                "t_span {span:?} must be finite and increasing"
            )));
        }

        let default_samples = match self.model {
            ModelConfig::PeriodicPredatorPrey { .. } => DEFAULT_SAMPLES,
            ModelConfig::Abel { .. } if self.seed.or(over.seed).is_some() => {
                DEFAULT_SWEEP_INSTANCES
            }
            _ => DEFAULT_TRAJECTORY_SAMPLES,
        };
        let samples = *self
            .samples
            .insert(over.samples.or(self.samples).unwrap_or(default_samples));
        if samples < 2 {
            return Err(config_err("samples must be at least 2"));
        }
        self.coords = Some(over.coords.or(self.coords).unwrap_or(Coords::Population));
        if let Some(seed) = over.seed {
            self.seed = Some(seed);
        }
        if let Some(v) = self.view {
            let ok = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] < r[1];
            if !(ok(v.x) && ok(v.y)) {
                return Err(config_err("view ranges must be finite and increasing"));
            }
        }
        Ok(self)
    }

    pub fn samples(&self) -> usize {
        self.samples.unwrap_or(DEFAULT_TRAJECTORY_SAMPLES)
    }

    pub fn coords(&self) -> Coords {
        self.coords.unwrap_or(Coords::Population)
    }

    pub fn t_span(&self) -> (f64, f64) {
        let s = self.t_span.unwrap_or([0.0, self.model.default_t_end()]);
        (s[0], s[1])
    }

    /// The one initial condition a single-trajectory command needs.
    pub fn single_initial(&self, command: &str) -> Result<InitialCondition, CliError> {
        match self.initial.as_slice() {
            [ic] => Ok(*ic),
            other => Err(config_err(format!(
                "{command} needs exactly one initial condition, got {}",
                other.len()
            ))),
        }
    }
}
