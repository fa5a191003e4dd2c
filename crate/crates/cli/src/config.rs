//! Flat key-value experiment configuration.
//!
//! A config file is a sequence of `key = value` lines (`#` starts a
//! comment).  Keys must belong to the experiment's declared parameter
//! schema plus the universal keys `seed` and `workers`; unknown keys are
//! rejected.  Command-line flags override file values; the output
//! directory may additionally be overridden by the `QUILTLAB_OUT`
//! environment variable (CLI flag > environment > default `out`).

use quiltlab_core::{Error, Result};
use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

/// A typed scalar parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamValue {
    Int(i64),
    Float(f64),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Float(v) => write!(f, "{v}"),
        }
    }
}

/// One declared parameter of an experiment: name, full-tier default and
/// fast-tier default.  The two defaults share a type.
#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    pub name: &'static str,
    pub full: ParamValue,
    pub fast: ParamValue,
    pub help: &'static str,
}

/// Integer parameter spec.
pub const fn int(name: &'static str, full: i64, fast: i64, help: &'static str) -> ParamSpec {
    ParamSpec { name, full: ParamValue::Int(full), fast: ParamValue::Int(fast), help }
}

/// Floating parameter spec.
pub const fn float(name: &'static str, full: f64, fast: f64, help: &'static str) -> ParamSpec {
    ParamSpec { name, full: ParamValue::Float(full), fast: ParamValue::Float(fast), help }
}

/// The execution tier: `full` uses the acceptance-scale defaults, `fast`
/// uses reduced sizes for quick smoke verification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tier {
    Fast,
    Full,
}

impl Tier {
    pub fn name(self) -> &'static str {
        match self {
            Tier::Fast => "fast",
            Tier::Full => "full",
        }
    }
}

/// A fully resolved run configuration for one experiment.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub experiment: String,
    pub seed: u64,
    pub workers: usize,
    pub out_dir: PathBuf,
    pub params: BTreeMap<String, ParamValue>,
}

impl RunConfig {
    /// Resolve a configuration from schema defaults, an optional config
    /// file, and command-line overrides (in that precedence order).
    #[allow(clippy::too_many_arguments)]
    pub fn resolve(
        experiment: &str,
        schema: &[ParamSpec],
        tier: Tier,
        file: Option<&str>,
        seed: Option<u64>,
        draws: Option<i64>,
        workers: Option<usize>,
        out: Option<PathBuf>,
    ) -> Result<RunConfig> {
        let mut params: BTreeMap<String, ParamValue> = schema
            .iter()
            .map(|s| {
                let v = match tier {
                    Tier::Full => s.full,
                    Tier::Fast => s.fast,
                };
                (s.name.to_string(), v)
            })
            .collect();
        let mut cfg_seed: u64 = 1;
        let mut cfg_workers: usize = default_workers();

        if let Some(text) = file {
            for (lineno, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    Error::Domain(format!("config line {}: expected key = value", lineno + 1))
                })?;
                let (key, value) = (key.trim(), value.trim());
                match key {
                    "seed" => {
                        cfg_seed = value.parse().map_err(|_| {
                            Error::Domain(format!("config: seed `{value}` is not a u64"))
                        })?;
                    }
                    "workers" => {
                        cfg_workers = parse_workers(value)?;
                    }
                    _ => {
                        let slot = params.get_mut(key).ok_or_else(|| {
                            Error::Domain(format!(
                                "config: unknown key `{key}` for experiment `{experiment}`"
                            ))
                        })?;
                        *slot = parse_like(key, value, *slot)?;
                    }
                }
            }
        }

        if let Some(d) = draws {
            if !params.contains_key("draws") {
                return Err(Error::Domain(format!(
                    "experiment `{experiment}` takes no draw count"
                )));
            }
            if d < 0 {
                return Err(Error::Domain("draws must be non-negative".into()));
            }
            params.insert("draws".into(), ParamValue::Int(d));
        }

        let out_dir = out
            .or_else(|| std::env::var_os("QUILTLAB_OUT").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"));

        Ok(RunConfig {
            experiment: experiment.to_string(),
            seed: seed.unwrap_or(cfg_seed),
            workers: workers.unwrap_or(cfg_workers),
            out_dir,
            params,
        })
    }

    /// Typed accessors.  Panics on a missing key are programming errors:
    /// every experiment only reads keys from its own schema.
    pub fn f64(&self, key: &str) -> f64 {
        match self.params[key] {
            ParamValue::Float(v) => v,
            ParamValue::Int(v) => v as f64,
        }
    }

    pub fn i64(&self, key: &str) -> i64 {
        match self.params[key] {
            ParamValue::Int(v) => v,
            ParamValue::Float(v) => v as i64,
        }
    }

    pub fn usize(&self, key: &str) -> usize {
        self.i64(key).max(0) as usize
    }

    pub fn u64(&self, key: &str) -> u64 {
        self.i64(key).max(0) as u64
    }

    /// Canonical `key = value` listing (config echo for the manifest).
    /// The worker count is deliberately excluded: outputs do not depend
    /// on it, and the manifest must not either.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m: BTreeMap<String, String> =
            self.params.iter().map(|(k, v)| (k.clone(), v.to_string())).collect();
        m.insert("seed".into(), self.seed.to_string());
        m
    }
}

fn parse_workers(value: &str) -> Result<usize> {
    let w: usize = value
        .parse()
        .map_err(|_| Error::Domain(format!("workers `{value}` is not a positive integer")))?;
    if w == 0 {
        return Err(Error::Domain("workers must be at least 1".into()));
    }
    Ok(w)
}

/// Parse `value` with the same type as the schema default `like`.
fn parse_like(key: &str, value: &str, like: ParamValue) -> Result<ParamValue> {
    match like {
        ParamValue::Int(_) => value
            .parse::<i64>()
            .map(ParamValue::Int)
            .map_err(|_| Error::Domain(format!("config: `{key}` expects an integer, got `{value}`"))),
        ParamValue::Float(_) => value
            .parse::<f64>()
            .map(ParamValue::Float)
            .map_err(|_| Error::Domain(format!("config: `{key}` expects a number, got `{value}`"))),
    }
}

/// Default worker count: the machine's available parallelism.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}
