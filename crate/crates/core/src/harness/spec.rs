//! Experiment specifications, read from TOML.
//!
//! ```toml
//! name = "irai"
//! profile = "desk"
//! trials = 200
//! seed = 7
//!
//! [base]
//! num_aps = 16
//!
//! [sweep]
//! path = "irai_rel_noise_db"
//! values = [-20.0, -10.0, 0.0, 10.0]
//!
//! [[arms]]
//! name = "dtdd"
//! duplex = "dtdd"
//!
//! [[arms]]
//! name = "fd"
//! duplex = "fd"
//! overrides = { n_tx = 4, n_rx = 4 }
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{DuplexMode, SystemConfig};
use crate::error::{Error, Result};
use crate::scenario::PilotScheme;
use crate::schedule::ScheduleMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    #[default]
    Desk,
    Paper,
}

impl Profile {
    pub fn config(self) -> SystemConfig {
        match self {
            Profile::Desk => SystemConfig::desk(),
            Profile::Paper => SystemConfig::paper(),
        }
    }

    pub fn trials(self) -> usize {
        match self {
            Profile::Desk => 200,
            Profile::Paper => 5000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scheduling {
    #[default]
    Greedy,
    /// Greedy with equal power during candidate evaluation.
    Cheap,
    Exhaustive,
}

/// How far down the pipeline a trial runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    /// Pilot allocation and estimation statistics only.
    Pilots,
    #[default]
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Arm {
    pub name: String,
    #[serde(default)]
    pub duplex: DuplexMode,
    /// Config keys set after the sweep value, e.g. antenna counts.
    #[serde(default)]
    pub overrides: serde_json::Map<String, Value>,
    #[serde(default = "yes")]
    pub power_control: bool,
    #[serde(default)]
    pub scheduling: Scheduling,
    #[serde(default)]
    pub pilot_scheme: PilotScheme,
    #[serde(default)]
    pub stage: Stage,
}

fn yes() -> bool {
    true
}

impl Arm {
    pub fn schedule_mode(&self) -> ScheduleMode {
        if self.power_control && self.scheduling != Scheduling::Cheap {
            ScheduleMode::Full
        } else {
            ScheduleMode::Cheap
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    /// Dotted config path, e.g. `simple_pl.exponent`.
    pub path: String,
    pub values: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    #[serde(default)]
    pub profile: Profile,
    /// Config keys applied on top of the profile.
    #[serde(default)]
    pub base: serde_json::Map<String, Value>,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    /// Defaults to the profile's trial count.
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub arms: Vec<Arm>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

fn default_seed() -> u64 {
    1
}

/// Sets `path` (dot separated) inside a JSON object, creating tables as needed.
pub fn set_path(root: &mut Value, path: &str, v: Value) -> Result<()> {
    let mut cur = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, key) in parts.iter().enumerate() {
        let obj = cur.as_object_mut().ok_or_else(|| Error::InvalidConfig(format!("`{path}` is not a table path")))?;
        if i + 1 == parts.len() {
            obj.insert(key.to_string(), v);
            return Ok(());
        }
        cur = obj.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    Err(Error::InvalidConfig("empty config path".into()))
}

fn apply(cfg: &SystemConfig, map: &serde_json::Map<String, Value>) -> Result<SystemConfig> {
    let mut v = serde_json::to_value(cfg)?;
    for (k, x) in map {
        set_path(&mut v, k, x.clone())?;
    }
    serde_json::from_value(v).map_err(|e| Error::InvalidConfig(e.to_string()))
}

impl ExperimentSpec {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let spec: Self = toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn trials(&self) -> usize {
        self.trials.unwrap_or_else(|| self.profile.trials())
    }

    /// Sweep values, or a single `null` point when there is no sweep.
    pub fn sweep_values(&self) -> Vec<Value> {
        self.sweep.as_ref().map_or_else(|| vec![Value::Null], |s| s.values.clone())
    }

    /// Fully resolved config for one arm at one sweep value.
    pub fn resolve(&self, arm: &Arm, sweep_value: &Value) -> Result<SystemConfig> {
        let mut cfg = apply(&self.profile.config(), &self.base)?;
        if let Some(s) = &self.sweep {
            let mut one = serde_json::Map::new();
            one.insert(s.path.clone(), sweep_value.clone());
            cfg = apply(&cfg, &one)?;
        }
        cfg = apply(&cfg, &arm.overrides)?;
        cfg.duplex = arm.duplex;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.arms.is_empty() {
            return Err(Error::InvalidConfig("experiment has no arms".into()));
        }
        let mut names: Vec<&str> = self.arms.iter().map(|a| a.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig("arm names must be unique".into()));
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(Error::InvalidConfig("sweep has no values".into()));
            }
            if s.values.iter().any(|v| v.as_f64().is_some_and(|x| !x.is_finite())) {
                return Err(Error::InvalidConfig("sweep values must be finite".into()));
            }
        }
        for arm in &self.arms {
            if arm.duplex == DuplexMode::Fd && arm.scheduling == Scheduling::Exhaustive {
                return Err(Error::InvalidConfig(format!("arm `{}`: FD has nothing to schedule", arm.name)));
            }
            for v in self.sweep_values() {
                self.resolve(arm, &v)?;
            }
        }
        Ok(())
    }
}

/// Sweep value as written to result tables.
pub fn sweep_label(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
