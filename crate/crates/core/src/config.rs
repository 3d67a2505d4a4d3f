//! Run configuration in a flat `key = value` text format.
//!
//! ```text
//! # comment
//! omega = 0.4
//! scheme = energy-conserving
//! ```
//!
//! Keys and defaults:
//!
//! | key               | default             | meaning                                   |
//! |-------------------|---------------------|-------------------------------------------|
//! | `omega`           | 0.4                 | tunnel splitting, > 0                     |
//! | `xi`              | 0.09                | Kondo parameter, >= 0                     |
//! | `beta`            | 12.5                | inverse temperature, > 0                  |
//! | `n_modes`         | 200                 | bath oscillators                          |
//! | `omega_c`         | 1                   | Ohmic cutoff frequency                    |
//! | `omega_max`       | 3                   | highest bath frequency                    |
//! | `scheme`          | `energy-conserving` | or `primitive`                            |
//! | `c_energy`        | 0.01                | energy window, > 0 (`inf` allowed)        |
//! | `jump_rule`       | `first-order`       | or `exact-rescale`                        |
//! | `tau`             | 0.01                | time step, > 0                            |
//! | `t_max`           | 20                  | integer multiple of `tau`                 |
//! | `n_traj`          | 1000                | trajectories (bath draws)                 |
//! | `seed`            | 1                   | master seed                               |
//! | `record_stride`   | 10                  | steps between records; divides the steps  |
//! | `enumerate_pairs` | true                | run all 4 initial pairs per bath draw     |
//! | `weight_cap`      | 1e8                 | flag trajectories with larger `|weight|`  |
//! | `truncate`        | false               | drop flagged trajectories from estimates  |

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bath::ModelParams;
use crate::error::{Error, Result};
use crate::hopping::{JumpRule, SamplingScheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemeKind {
    Primitive,
    EnergyConserving,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Primitive => "primitive",
            SchemeKind::EnergyConserving => "energy-conserving",
        }
    }
}

pub(crate) fn jump_rule_name(rule: JumpRule) -> &'static str {
    match rule {
        JumpRule::ExactRescale => "exact-rescale",
        JumpRule::FirstOrderShift => "first-order",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub omega: f64,
    pub xi: f64,
    pub beta: f64,
    pub n_modes: usize,
    pub omega_c: f64,
    pub omega_max: f64,
    pub scheme: SchemeKind,
    pub c_energy: f64,
    pub jump_rule: JumpRule,
    pub tau: f64,
    pub t_max: f64,
    pub n_traj: usize,
    pub seed: u64,
    pub record_stride: usize,
    pub enumerate_pairs: bool,
    pub weight_cap: f64,
    pub truncate: bool,
}

pub const KEYS: &[&str] = &[
    "omega",
    "xi",
    "beta",
    "n_modes",
    "omega_c",
    "omega_max",
    "scheme",
    "c_energy",
    "jump_rule",
    "tau",
    "t_max",
    "n_traj",
    "seed",
    "record_stride",
    "enumerate_pairs",
    "weight_cap",
    "truncate",
];

pub const PRESETS: &[&str] = &["fig1", "fig2", "uncoupled", "oracle-small"];

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            omega: 0.4,
            xi: 0.09,
            beta: 12.5,
            n_modes: 200,
            omega_c: 1.0,
            omega_max: 3.0,
            scheme: SchemeKind::EnergyConserving,
            c_energy: 0.01,
            jump_rule: JumpRule::FirstOrderShift,
            tau: 0.01,
            t_max: 20.0,
            n_traj: 1000,
            seed: 1,
            record_stride: 10,
            enumerate_pairs: true,
            weight_cap: 1e8,
            truncate: false,
        }
    }
}

fn parse_f64(name: &'static str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| Error::invalid(name, format!("expected a real number, got `{v}`")))
}

fn parse_usize(name: &'static str, v: &str) -> Result<usize> {
    v.parse::<usize>()
        .map_err(|_| Error::invalid(name, format!("expected a nonnegative integer, got `{v}`")))
}

fn parse_bool(name: &'static str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::invalid(name, format!("expected true or false, got `{v}`"))),
    }
}

fn static_key(key: &str) -> Option<&'static str> {
    KEYS.iter().copied().find(|k| *k == key)
}

impl RunConfig {
    /// Built-in parameter sets.
    pub fn preset(name: &str) -> Result<Self> {
        let text = match name {
            "fig1" => include_str!("../presets/fig1.conf"),
            "fig2" => include_str!("../presets/fig2.conf"),
            "uncoupled" => include_str!("../presets/uncoupled.conf"),
            "oracle-small" => include_str!("../presets/oracle-small.conf"),
            _ => return Err(Error::UnknownPreset(name.to_string())),
        };
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_file(path)?;
        Ok(cfg)
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text)
    }

    /// Applies `key = value` lines on top of the current values.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::MalformedLine {
                    line: i + 1,
                    text: raw.to_string(),
                });
            };
            self.set_at(k.trim(), v.trim(), i + 1)?;
        }
        Ok(())
    }

    /// Sets one key, as given on the command line.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        self.set_at(key, value, 0)
    }

    fn set_at(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let Some(name) = static_key(key) else {
            return Err(Error::UnknownKey {
                key: key.to_string(),
                line,
                valid: KEYS.join(", "),
            });
        };
        match name {
            "omega" => self.omega = parse_f64(name, value)?,
            "xi" => self.xi = parse_f64(name, value)?,
            "beta" => self.beta = parse_f64(name, value)?,
            "n_modes" => self.n_modes = parse_usize(name, value)?,
            "omega_c" => self.omega_c = parse_f64(name, value)?,
            "omega_max" => self.omega_max = parse_f64(name, value)?,
            "scheme" => {
                self.scheme = match value {
                    "primitive" => SchemeKind::Primitive,
                    "energy-conserving" => SchemeKind::EnergyConserving,
                    _ => {
                        return Err(Error::invalid(
                            name,
                            format!("expected primitive or energy-conserving, got `{value}`"),
                        ))
                    }
                }
            }
            "c_energy" => self.c_energy = parse_f64(name, value)?,
            "jump_rule" => {
                self.jump_rule = match value {
                    "exact-rescale" => JumpRule::ExactRescale,
                    "first-order" => JumpRule::FirstOrderShift,
                    _ => {
                        return Err(Error::invalid(
                            name,
                            format!("expected exact-rescale or first-order, got `{value}`"),
                        ))
                    }
                }
            }
            "tau" => self.tau = parse_f64(name, value)?,
            "t_max" => self.t_max = parse_f64(name, value)?,
            "n_traj" => self.n_traj = parse_usize(name, value)?,
            "seed" => {
                self.seed = value.parse::<u64>().map_err(|_| {
                    Error::invalid(name, format!("expected a 64-bit unsigned integer, got `{value}`"))
                })?
            }
            "record_stride" => self.record_stride = parse_usize(name, value)?,
            "enumerate_pairs" => self.enumerate_pairs = parse_bool(name, value)?,
            "weight_cap" => self.weight_cap = parse_f64(name, value)?,
            "truncate" => self.truncate = parse_bool(name, value)?,
            _ => unreachable!("key list and match arms out of sync"),
        }
        Ok(())
    }

    /// Number of steps `t_max / tau`, required to be a positive integer.
    pub fn n_steps(&self) -> Result<usize> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::invalid("tau", "time step must be > 0"));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::invalid("t_max", "final time must be > 0"));
        }
        let ratio = self.t_max / self.tau;
        let n = ratio.round();
        if n < 1.0 || (ratio - n).abs() > 1e-9 * n {
            return Err(Error::invalid(
                "t_max",
                format!("t_max / tau = {ratio} is not a positive integer"),
            ));
        }
        Ok(n as usize)
    }

    pub fn model_params(&self) -> Result<ModelParams> {
        ModelParams::new(self.omega, self.xi, self.beta)
    }

    pub fn sampling_scheme(&self) -> Result<SamplingScheme> {
        match self.scheme {
            SchemeKind::Primitive => Ok(SamplingScheme::primitive(self.jump_rule)),
            SchemeKind::EnergyConserving => {
                SamplingScheme::energy_conserving(self.c_energy, self.jump_rule)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model_params()?;
        if self.n_modes == 0 {
            return Err(Error::invalid("n_modes", "must be >= 1"));
        }
        if !(self.omega_c > 0.0 && self.omega_c.is_finite()) {
            return Err(Error::invalid("omega_c", "must be > 0"));
        }
        if !(self.omega_max > 0.0 && self.omega_max.is_finite()) {
            return Err(Error::invalid("omega_max", "must be > 0"));
        }
        if !(self.c_energy > 0.0) {
            return Err(Error::invalid("c_energy", "energy window must be > 0"));
        }
        let n = self.n_steps()?;
        if self.n_traj == 0 {
            return Err(Error::invalid("n_traj", "must be >= 1"));
        }
        if self.record_stride == 0 || n % self.record_stride != 0 {
            return Err(Error::invalid(
                "record_stride",
                format!("must be >= 1 and divide the step count {n}"),
            ));
        }
        if !(self.weight_cap > 0.0) {
            return Err(Error::invalid("weight_cap", "must be > 0"));
        }
        Ok(())
    }

    /// Same configuration with the other sampling scheme.
    pub fn with_scheme(&self, scheme: SchemeKind) -> Self {
        Self {
            scheme,
            ..self.clone()
        }
    }

    /// Resolved configuration in the key-value format. Floats use Rust's
    /// shortest round-trip representation, so parsing the output restores
    /// the configuration exactly.
    pub fn to_kv_string(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("omega", self.omega.to_string());
        put("xi", self.xi.to_string());
        put("beta", self.beta.to_string());
        put("n_modes", self.n_modes.to_string());
        put("omega_c", self.omega_c.to_string());
        put("omega_max", self.omega_max.to_string());
        put("scheme", self.scheme.name().to_string());
        put("c_energy", self.c_energy.to_string());
        put("jump_rule", jump_rule_name(self.jump_rule).to_string());
        put("tau", self.tau.to_string());
        put("t_max", self.t_max.to_string());
        put("n_traj", self.n_traj.to_string());
        put("seed", self.seed.to_string());
        put("record_stride", self.record_stride.to_string());
        put("enumerate_pairs", self.enumerate_pairs.to_string());
        put("weight_cap", self.weight_cap.to_string());
        put("truncate", self.truncate.to_string());
        s
    }
}
