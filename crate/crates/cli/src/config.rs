//! Run configuration: JSON file merged with command-line flags (flags win).

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use tauber_core::model::FamilySpec;
use tauber_core::{StaircaseFamily, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Eval,
    Transform,
    Continue,
    Poles,
    Abscissa,
    Exponent,
    Omega,
    Scan,
    Verify,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub re_min: Option<f64>,
    pub re_max: Option<f64>,
    pub re_step: Option<f64>,
    pub im_min: Option<f64>,
    pub im_max: Option<f64>,
    pub im_step: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub tol: Option<f64>,
}

/// Contents of a `--config` file; every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub family: Option<FamilySpec>,
    pub grid: GridConfig,
    pub output: OutputConfig,
    pub tolerances: Tolerances,
}

/// Problems with the requested run, reported with exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl<E: std::error::Error> From<E> for ConfigError {
    fn from(e: E) -> Self {
        ConfigError(e.to_string())
    }
}

/// Inclusive `a..b`, or a single value `a` meaning `a..a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Span {
    pub lo: f64,
    pub hi: f64,
}

impl FromStr for Span {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let parse = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("'{t}' is not a decimal number"))
                .and_then(|v| if v.is_finite() { Ok(v) } else { Err(format!("'{t}' is not finite")) })
        };
        match text.split_once("..") {
            Some((a, b)) => Ok(Span { lo: parse(a)?, hi: parse(b)? }),
            None => {
                let v = parse(text)?;
                Ok(Span { lo: v, hi: v })
            }
        }
    }
}

/// Evenly spaced points `lo, lo + step, …` not exceeding `hi`.
pub fn axis(lo: f64, hi: f64, step: f64, name: &str) -> Result<Vec<f64>, ConfigError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(ConfigError(format!("{name} step must be positive, got {step}")));
    }
    if !(lo <= hi) {
        return Err(ConfigError(format!("empty grid: {name} range {lo}..{hi}")));
    }
    let n = ((hi - lo) / step * (1.0 + 1e-12) + 1e-9).floor() as usize + 1;
    if n > 1_000_000 {
        return Err(ConfigError(format!("{name} axis has {n} points")));
    }
    Ok((0..n).map(|k| lo + k as f64 * step).collect())
}

/// Family flags after merging; `None` leaves the config file value.
#[derive(Debug, Clone, Default)]
pub struct FamilyFlags {
    pub variant: Option<Variant>,
    pub gamma: Option<f64>,
    pub c_up: Option<f64>,
    pub c_down: Option<f64>,
    pub base: Option<f64>,
    pub i_cap: Option<u32>,
}

impl FamilyFlags {
    /// Flags over the file spec; an asymmetric family with neither width
    /// given defaults to `c_up = 2`, `c_down = 1`.
    pub fn resolve(&self, file: Option<&FamilySpec>) -> Result<StaircaseFamily, ConfigError> {
        let variant = self
            .variant
            .or(file.map(|f| f.variant))
            .ok_or_else(|| ConfigError("--variant is required".into()))?;
        let gamma = self
            .gamma
            .or(file.map(|f| f.gamma))
            .ok_or_else(|| ConfigError("--gamma is required".into()))?;
        let mut c_up = self.c_up.or(file.map(|f| f.c_up));
        let mut c_down = self.c_down.or(file.and_then(|f| f.c_down));
        if variant == Variant::Asymmetric && self.c_up.is_none() && c_down.is_none() {
            c_up = Some(2.0);
            c_down = Some(1.0);
        }
        let spec = FamilySpec {
            variant,
            gamma,
            c_up: c_up.unwrap_or(1.0),
            c_down,
            base: self.base.or(file.map(|f| f.base)).unwrap_or(tauber_core::model::DEFAULT_BASE),
            i_cap: self.i_cap.or(file.map(|f| f.i_cap)).unwrap_or(tauber_core::model::DEFAULT_I_CAP),
            i_start: None,
        };
        Ok(spec.build()?)
    }
}

pub fn load(path: &std::path::Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
}
