//! Flat `key = value` run configuration with dotted keys.
//!
//! ```text
//! # comment
//! model = corotational
//! params.a = 1
//! grid.n = 64
//! stepper.dt = 1e-3
//! stepper.t_end = 1
//! init.family = random_small
//! init.seed = 7
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::dynamics::StepperConfig;
use crate::fields::{ModelParams, ParamsError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, found `{text}`")]
    Syntax { line: usize, text: String },
    #[error("key `{0}` given more than once")]
    Duplicate(String),
    #[error("unknown key `{0}`")]
    Unknown(String),
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("key `{key}` = `{value}`: {reason}")]
    Invalid {
        key: String,
        value: String,
        reason: String,
    },
    #[error("key `{key}` is not used by init.family = {family}")]
    Unused { key: String, family: String },
    #[error("cannot read config {path}: {message}")]
    Io { path: String, message: String },
}

const KNOWN_KEYS: &[&str] = &[
    "model",
    "params.a",
    "params.mu",
    "params.nu",
    "params.alpha",
    "params.b",
    "grid.n",
    "grid.L",
    "stepper.dt",
    "stepper.t_end",
    "stepper.cfl_safety",
    "sampling.record_every",
    "sampling.checkpoint_every",
    "init.family",
    "init.seed",
    "init.amplitude",
    "init.band",
    "init.A",
    "init.eps",
    "init.c",
    "init.path",
    "output_dir",
    "smallness_c",
    "log_constant_C",
    "sobolev_s",
    "fit.window",
];

/// Keys holding a single number; these are the valid sweep axes.
pub const NUMERIC_KEYS: &[&str] = &[
    "params.a",
    "params.mu",
    "params.nu",
    "params.alpha",
    "params.b",
    "grid.n",
    "grid.L",
    "stepper.dt",
    "stepper.t_end",
    "stepper.cfl_safety",
    "sampling.record_every",
    "sampling.checkpoint_every",
    "init.seed",
    "init.amplitude",
    "init.band",
    "init.A",
    "init.eps",
    "init.c",
    "smallness_c",
    "log_constant_C",
    "sobolev_s",
];

/// Environment variable that, when set, is the base for relative
/// `output_dir` values.
pub const OUTPUT_ROOT_ENV: &str = "OLDROYD_OUTPUT_ROOT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Corotational,
    General,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum InitFamily {
    Zero,
    TaylorGreen,
    RandomSmall { seed: u64, amplitude: f64, band: i64 },
    Remark12 { amplitude: f64, eps: f64 },
    Remark15 { eps: f64 },
    ConstantStress { c: f64 },
    Checkpoint { path: PathBuf },
}

impl InitFamily {
    fn name(&self) -> &'static str {
        match self {
            InitFamily::Zero => "zero",
            InitFamily::TaylorGreen => "taylor_green",
            InitFamily::RandomSmall { .. } => "random_small",
            InitFamily::Remark12 { .. } => "remark12",
            InitFamily::Remark15 { .. } => "remark15",
            InitFamily::ConstantStress { .. } => "constant_stress",
            InitFamily::Checkpoint { .. } => "checkpoint",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelKind,
    pub params: ModelParams,
    pub n: usize,
    pub box_len: f64,
    pub stepper: StepperConfig,
    pub record_every: u64,
    /// Steps between checkpoints; 0 writes only the final one.
    pub checkpoint_every: u64,
    pub init: InitFamily,
    pub output_dir: PathBuf,
    pub smallness_c: f64,
    pub log_constant_c: f64,
    pub sobolev_s: f64,
    pub fit_window: Option<(f64, f64)>,
}

/// Raw key/value pairs in file order of first appearance.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                text: raw.to_string(),
            })?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || v.is_empty() {
                return Err(ConfigError::Syntax {
                    line: i + 1,
                    text: raw.to_string(),
                });
            }
            if !KNOWN_KEYS.contains(&k) {
                return Err(ConfigError::Unknown(k.to_string()));
            }
            if entries.insert(k.to_string(), v.to_string()).is_some() {
                return Err(ConfigError::Duplicate(k.to_string()));
            }
        }
        Ok(Self { entries })
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(ConfigError::Unknown(key.to_string()));
        }
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    fn number(&self, key: &'static str, default: Option<f64>) -> Result<f64, ConfigError> {
        match self.get(key) {
            Some(v) => v.parse::<f64>().map_err(|_| invalid(key, v, "not a number")),
            None => default.ok_or(ConfigError::Missing(key)),
        }
    }

    fn integer(&self, key: &'static str, default: Option<u64>) -> Result<u64, ConfigError> {
        match self.get(key) {
            Some(v) => parse_integer(v).ok_or_else(|| invalid(key, v, "not a nonnegative integer")),
            None => default.ok_or(ConfigError::Missing(key)),
        }
    }

    pub fn build(&self) -> Result<RunConfig, ConfigError> {
        RunConfig::from_map(self)
    }
}

/// Integers may be written as `64` or, from numeric sweeps, as `64.0`.
fn parse_integer(v: &str) -> Option<u64> {
    if let Ok(i) = v.parse::<u64>() {
        return Some(i);
    }
    let f = v.parse::<f64>().ok()?;
    (f >= 0.0 && f.fract() == 0.0 && f < 9.0e15).then_some(f as u64)
}

fn invalid(key: &str, value: &str, reason: &str) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    }
}

fn params_error(e: ParamsError, map: &ConfigMap) -> ConfigError {
    match e {
        ParamsError::Invalid { name, value, reason } => {
            let key = format!("params.{name}");
            let shown = map.get(&key).map(str::to_string).unwrap_or_else(|| value.to_string());
            invalid(&key, &shown, reason)
        }
    }
}

/// Parses `t_lo:t_hi`.
pub fn parse_window(text: &str) -> Option<(f64, f64)> {
    let (a, b) = text.split_once(':')?;
    let lo = a.trim().parse::<f64>().ok()?;
    let hi = b.trim().parse::<f64>().ok()?;
    (lo.is_finite() && hi.is_finite() && lo < hi).then_some((lo, hi))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        ConfigMap::parse(text)?.build()
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        ConfigMap::from_file(path)?.build()
    }

    fn from_map(map: &ConfigMap) -> Result<Self, ConfigError> {
        let model = match map.get("model") {
            Some("corotational") | None => ModelKind::Corotational,
            Some("general") => ModelKind::General,
            Some(other) => return Err(invalid("model", other, "expected `corotational` or `general`")),
        };
        let a = map.number("params.a", Some(1.0))?;
        let mu = map.number("params.mu", Some(1.0))?;
        let nu = map.number("params.nu", Some(0.0))?;
        let params = match model {
            ModelKind::Corotational => {
                let alpha = map.number("params.alpha", Some(0.0))?;
                let b = map.number("params.b", Some(0.0))?;
                ModelParams {
                    a,
                    mu,
                    nu,
                    alpha,
                    b,
                    corotational: true,
                }
            }
            ModelKind::General => ModelParams {
                a,
                mu,
                nu,
                alpha: map.number("params.alpha", Some(1.0))?,
                b: map.number("params.b", Some(0.0))?,
                corotational: false,
            },
        };
        params.validate().map_err(|e| params_error(e, map))?;

        let n = map.integer("grid.n", None)?;
        if n < 16 || n % 2 != 0 || n > 1 << 14 {
            return Err(invalid("grid.n", map.get("grid.n").unwrap_or(""), "must be even, at least 16 and at most 16384"));
        }
        let box_len = map.number("grid.L", Some(2.0 * std::f64::consts::PI))?;
        if !(box_len.is_finite() && box_len > 0.0) {
            return Err(invalid("grid.L", map.get("grid.L").unwrap_or(""), "must be finite and positive"));
        }

        let stepper = StepperConfig {
            dt: map.number("stepper.dt", None)?,
            t_end: map.number("stepper.t_end", None)?,
            cfl_safety: map.number("stepper.cfl_safety", Some(0.5))?,
        };
        stepper.validate().map_err(|e| match e {
            crate::dynamics::DynamicsError::InvalidConfig { name, reason, .. } => {
                let key = format!("stepper.{name}");
                let shown = map.get(&key).unwrap_or("").to_string();
                invalid(&key, &shown, reason)
            }
            other => invalid("stepper", "", &other.to_string()),
        })?;
        let ratio = stepper.t_end / stepper.dt;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return Err(invalid(
                "stepper.t_end",
                map.get("stepper.t_end").unwrap_or(""),
                "must be an integer multiple of stepper.dt",
            ));
        }

        let record_every = map.integer("sampling.record_every", Some(10))?;
        if record_every == 0 {
            return Err(invalid("sampling.record_every", "0", "must be at least 1"));
        }
        let checkpoint_every = map.integer("sampling.checkpoint_every", Some(0))?;

        let init = Self::init_from_map(map)?;

        let output_dir = PathBuf::from(map.get("output_dir").unwrap_or("out"));
        let smallness_c = map.number("smallness_c", Some(0.1))?;
        if !(smallness_c.is_finite() && smallness_c > 0.0) {
            return Err(invalid("smallness_c", map.get("smallness_c").unwrap_or(""), "must be positive"));
        }
        let log_constant_c = map.number("log_constant_C", Some(std::f64::consts::E))?;
        if !(log_constant_c.is_finite() && log_constant_c >= 1.0) {
            return Err(invalid(
                "log_constant_C",
                map.get("log_constant_C").unwrap_or(""),
                "must be at least 1 so the logarithm stays positive",
            ));
        }
        let sobolev_s = map.number("sobolev_s", Some(3.0))?;
        if !(sobolev_s.is_finite() && sobolev_s > 0.0) {
            return Err(invalid("sobolev_s", map.get("sobolev_s").unwrap_or(""), "must be positive"));
        }
        let fit_window = match map.get("fit.window") {
            Some(v) => Some(parse_window(v).ok_or_else(|| invalid("fit.window", v, "expected `t_lo:t_hi` with t_lo < t_hi"))?),
            None => None,
        };

        Ok(Self {
            model,
            params,
            n: n as usize,
            box_len,
            stepper,
            record_every,
            checkpoint_every,
            init,
            output_dir,
            smallness_c,
            log_constant_c,
            sobolev_s,
            fit_window,
        })
    }

    fn init_from_map(map: &ConfigMap) -> Result<InitFamily, ConfigError> {
        let family = map.get("init.family").ok_or(ConfigError::Missing("init.family"))?;
        let init = match family {
            "zero" => InitFamily::Zero,
            "taylor_green" => InitFamily::TaylorGreen,
            "random_small" => InitFamily::RandomSmall {
                seed: map.integer("init.seed", Some(0))?,
                amplitude: map.number("init.amplitude", Some(1e-2))?,
                band: map.integer("init.band", Some(crate::init_data::RANDOM_BAND as u64))? as i64,
            },
            "remark12" => InitFamily::Remark12 {
                amplitude: map.number("init.A", None)?,
                eps: map.number("init.eps", None)?,
            },
            "remark15" => InitFamily::Remark15 {
                eps: map.number("init.eps", None)?,
            },
            "constant_stress" => InitFamily::ConstantStress {
                c: map.number("init.c", None)?,
            },
            "checkpoint" => InitFamily::Checkpoint {
                path: PathBuf::from(map.get("init.path").ok_or(ConfigError::Missing("init.path"))?),
            },
            other => {
                return Err(invalid(
                    "init.family",
                    other,
                    "expected zero, taylor_green, random_small, remark12, remark15, constant_stress or checkpoint",
                ))
            }
        };
        let used: &[&str] = match &init {
            InitFamily::Zero | InitFamily::TaylorGreen => &[],
            InitFamily::RandomSmall { .. } => &["init.seed", "init.amplitude", "init.band"],
            InitFamily::Remark12 { .. } => &["init.A", "init.eps"],
            InitFamily::Remark15 { .. } => &["init.eps"],
            InitFamily::ConstantStress { .. } => &["init.c"],
            InitFamily::Checkpoint { .. } => &["init.path"],
        };
        for key in map.entries.keys() {
            if key.starts_with("init.") && key != "init.family" && !used.contains(&key.as_str()) {
                return Err(ConfigError::Unused {
                    key: key.clone(),
                    family: init.name().to_string(),
                });
            }
        }
        Ok(init)
    }

    /// `output_dir`, placed under the output-root environment variable when
    /// that is set and the configured path is relative.
    pub fn resolved_output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_ROOT_ENV) {
            Some(root) if self.output_dir.is_relative() => PathBuf::from(root).join(&self.output_dir),
            _ => self.output_dir.clone(),
        }
    }
}
