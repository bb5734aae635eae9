//! TOML run configuration.
//!
//! ```toml
//! h = 0.5
//! u = 2
//! e = 10
//! f_forget = 1
//! n_points = 10000
//! fitness = "rnd"            # or a number
//! sign_counts = [1, 1, 1]    # or "rnd"
//! seed = 7
//!
//! [[overrides]]
//! ordinal = 999
//! e = 1000
//! ```
//!
//! `--set key=value` overrides are applied to the parsed document before it
//! is checked, so they obey the same rules as the file itself.

use std::path::Path;

use beliefnet_core::engine::{FitnessSource, PointOverride, SignCountsSource};
use beliefnet_core::{SignCounts, SimConfig};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    Parse(String),
    #[error("invalid override `{0}`: expected key=value")]
    Override(String),
    #[error(transparent)]
    Model(#[from] beliefnet_core::Error),
}

/// A value that is either fixed or drawn at random per input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Random<T> {
    Fixed(T),
    Keyword(String),
}

const RANDOM: &str = "rnd";

impl<T> Random<T> {
    fn resolve(&self, key: &str) -> Result<Option<&T>, ConfigError> {
        match self {
            Random::Fixed(v) => Ok(Some(v)),
            Random::Keyword(k) if k.eq_ignore_ascii_case(RANDOM) => Ok(None),
            Random::Keyword(k) => Err(ConfigError::Parse(format!(
                "{key} must be a value or \"{RANDOM}\", got \"{k}\""
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverrideFile {
    pub ordinal: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign_counts: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e: Option<u32>,
}

/// On-disk form of [`SimConfig`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub h: f64,
    pub u: u32,
    pub e: u32,
    pub f_forget: u32,
    pub n_points: u32,
    pub fitness: Random<f64>,
    pub sign_counts: Random<[f64; 3]>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub overrides: Vec<OverrideFile>,
}

impl ConfigFile {
    pub fn from_sim(config: &SimConfig) -> Self {
        let counts = |c: SignCounts| [c.a, c.b, c.c];
        ConfigFile {
            h: config.h,
            u: config.u,
            e: config.e,
            f_forget: config.f_forget,
            n_points: config.n_points,
            fitness: match config.fitness {
                FitnessSource::Constant(f) => Random::Fixed(f),
                FitnessSource::Uniform => Random::Keyword(RANDOM.into()),
            },
            sign_counts: match config.sign_counts {
                SignCountsSource::Constant(c) => Random::Fixed(counts(c)),
                SignCountsSource::Uniform => Random::Keyword(RANDOM.into()),
            },
            seed: config.seed,
            overrides: config
                .overrides
                .iter()
                .map(|o| OverrideFile {
                    ordinal: o.ordinal,
                    fitness: o.fitness,
                    sign_counts: o.sign_counts.map(counts),
                    e: o.e,
                })
                .collect(),
        }
    }

    /// Converts to a validated simulation configuration.
    pub fn to_sim(&self) -> Result<SimConfig, ConfigError> {
        let counts = |[a, b, c]: [f64; 3]| SignCounts::new(a, b, c);
        let config = SimConfig {
            h: self.h,
            u: self.u,
            e: self.e,
            f_forget: self.f_forget,
            n_points: self.n_points,
            fitness: self
                .fitness
                .resolve("fitness")?
                .map_or(FitnessSource::Uniform, |&f| FitnessSource::Constant(f)),
            sign_counts: self
                .sign_counts
                .resolve("sign_counts")?
                .map_or(SignCountsSource::Uniform, |&c| {
                    SignCountsSource::Constant(counts(c))
                }),
            overrides: self
                .overrides
                .iter()
                .map(|o| PointOverride {
                    ordinal: o.ordinal,
                    fitness: o.fitness,
                    sign_counts: o.sign_counts.map(counts),
                    e: o.e,
                })
                .collect(),
            seed: self.seed,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Parses `text`, applies `key=value` overrides, then validates.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<SimConfig, ConfigError> {
    let mut table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    for raw in overrides {
        let (key, value) = raw
            .split_once('=')
            .ok_or_else(|| ConfigError::Override(raw.clone()))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError::Override(raw.clone()));
        }
        table.insert(key.to_owned(), parse_value(value.trim()));
    }
    let file: ConfigFile = table
        .try_into()
        .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    file.to_sim()
}

/// Reads a value as TOML, falling back to a bare string (`fitness=rnd`).
fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_owned()))
}

pub fn load_config(path: &Path, overrides: &[String]) -> Result<SimConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text, overrides)
}
