//! Run configuration: a flat `key = value` document with dotted section keys.
//!
//! ```text
//! # Benjamin equation, random data
//! model.gamma = 1
//! n_modes = 128
//! initial.kind = random_sobolev
//! initial.mu = 3
//! integrator.t_end = 2
//! ```
//!
//! Blank lines and `#` comments are ignored; values may be quoted. Every key
//! must be one of [`KNOWN_KEYS`]; later `--override key=value` arguments
//! replace file entries.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use benjamin_core::{InitialDataSpec, IntegratorConfig, Method, ModelParams};
use thiserror::Error;

/// Accepted keys and their defaults (`-` marks required or kind-dependent keys).
pub const KNOWN_KEYS: &[(&str, &str)] = &[
    ("model.m", "1"),
    ("model.r", "0.5"),
    ("model.gamma", "0"),
    ("model.delta", "1"),
    ("model.q", "1"),
    ("model.domain_scale", "1"),
    ("n_modes", "-"),
    ("seed", "0"),
    ("output.dir", "benj-out"),
    ("initial.kind", "gaussian"),
    ("initial.amplitude", "1"),
    ("initial.width", "0.5"),
    ("initial.center", "0"),
    ("initial.mode", "1"),
    ("initial.speed", "0.5"),
    ("initial.mu", "2"),
    ("initial.tol", "1e-12"),
    ("initial.max_iter", "500"),
    ("initial.path", "-"),
    ("integrator.method", "etdrk4"),
    ("integrator.dt", "auto"),
    ("integrator.t_end", "1"),
    ("integrator.snapshot_stride", "100"),
    ("converge.n_values", "16,32,64,128"),
    ("converge.n_ref", "auto"),
    ("converge.study", "self"),
    ("converge.ref_dt_divisor", "4"),
    ("converge.max_over_time", "false"),
    ("converge.check_dt", "false"),
    ("soliton.speed", "0.5"),
    ("soliton.tol", "1e-12"),
    ("soliton.max_iter", "500"),
];

/// Where an entry came from, for error messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Override(usize),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Override(n) => write!(f, "override {n}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{origin}: {message}")]
    Syntax { origin: Origin, message: String },

    #[error("{origin}: unknown key `{key}`")]
    UnknownKey { origin: Origin, key: String },

    #[error("{origin}: key `{key}`: {message}")]
    Value {
        origin: Origin,
        key: String,
        message: String,
    },

    #[error("missing required key `{0}`")]
    Missing(&'static str),

    #[error(transparent)]
    Invalid(#[from] benjamin_core::Error),
}

/// Parsed but not yet validated entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigDocument {
    entries: BTreeMap<String, (String, Origin)>,
}

impl ConfigDocument {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut doc = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let origin = Origin::Line(i + 1);
            let (key, value) = split_entry(line, origin)?;
            if doc.entries.contains_key(key) {
                return Err(ConfigError::Syntax {
                    origin,
                    message: format!("duplicate key `{key}`"),
                });
            }
            doc.entries.insert(key.to_string(), (value.to_string(), origin));
        }
        Ok(doc)
    }

    /// Apply a `key=value` override; `index` counts from 1.
    pub fn apply_override(&mut self, index: usize, text: &str) -> Result<(), ConfigError> {
        let origin = Origin::Override(index);
        let (key, value) = split_entry(text.trim(), origin)?;
        self.entries.insert(key.to_string(), (value.to_string(), origin));
        Ok(())
    }

    /// Effective explicit entries, for the run manifest.
    pub fn entries(&self) -> BTreeMap<String, String> {
        self.entries.iter().map(|(k, (v, _))| (k.clone(), v.clone())).collect()
    }

    fn raw(&self, key: &str) -> Option<(&str, Origin)> {
        debug_assert!(KNOWN_KEYS.iter().any(|(k, _)| *k == key), "{key}");
        self.entries.get(key).map(|(v, o)| (v.as_str(), *o))
    }

    fn get<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.raw(key) {
            None => Ok(default),
            Some((v, origin)) => v.parse().map_err(|e: T::Err| ConfigError::Value {
                origin,
                key: key.to_string(),
                message: format!("cannot parse `{v}`: {e}"),
            }),
        }
    }

    fn get_auto(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.raw(key) {
            Some(("auto", _)) | None => Ok(None),
            Some(_) => self.get(key, 0.0).map(Some),
        }
    }

    fn value_error(&self, key: &str, message: String) -> ConfigError {
        match self.raw(key) {
            Some((_, origin)) => ConfigError::Value {
                origin,
                key: key.to_string(),
                message,
            },
            None => ConfigError::Syntax {
                origin: Origin::Line(0),
                message: format!("{key}: {message}"),
            },
        }
    }

    /// The model section alone (enough for recomputing invariants).
    pub fn model(&self) -> Result<ModelParams, ConfigError> {
        Ok(ModelParams::new(
            self.get("model.m", 1)?,
            self.get("model.r", 0.5)?,
            self.get("model.gamma", 0.0)?,
            self.get("model.delta", 1.0)?,
            self.get("model.q", 1)?,
            self.get("model.domain_scale", 1.0)?,
        )?)
    }

    pub fn output_dir(&self) -> PathBuf {
        PathBuf::from(self.raw("output.dir").map_or("benj-out", |(v, _)| v))
    }
}

fn split_entry(line: &str, origin: Origin) -> Result<(&str, &str), ConfigError> {
    let Some((key, value)) = line.split_once('=') else {
        return Err(ConfigError::Syntax {
            origin,
            message: format!("expected `key = value`, found `{line}`"),
        });
    };
    let key = key.trim();
    if key.is_empty() {
        return Err(ConfigError::Syntax {
            origin,
            message: "empty key".into(),
        });
    }
    if !KNOWN_KEYS.iter().any(|(k, _)| *k == key) {
        return Err(ConfigError::UnknownKey {
            origin,
            key: key.to_string(),
        });
    }
    let value = value.trim();
    let value = value
        .strip_prefix('"')
        .and_then(|v| v.strip_suffix('"'))
        .unwrap_or(value);
    Ok((key, value))
}

/// Step size and horizon; `dt = None` resolves to the default policy once
/// the initial data is known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorSettings {
    pub method: Method,
    pub dt: Option<f64>,
    pub t_end: f64,
    pub snapshot_stride: usize,
}

impl IntegratorSettings {
    pub fn resolve(&self, params: &ModelParams, n_modes: usize, amplitude: f64) -> benjamin_core::Result<IntegratorConfig> {
        let dt = self
            .dt
            .unwrap_or_else(|| benjamin_core::timestep::default_time_step(params, n_modes, amplitude))
            .min(self.t_end);
        IntegratorConfig::new(self.method, dt, self.t_end, self.snapshot_stride)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Study {
    SelfConvergence,
    Intermediate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergeSettings {
    pub n_values: Vec<usize>,
    pub n_ref: usize,
    pub study: Study,
    pub ref_dt_divisor: u32,
    pub max_over_time: bool,
    pub check_dt: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonSettings {
    pub speed: f64,
    pub tol: f64,
    pub max_iter: usize,
}

/// A fully validated run configuration with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelParams,
    pub initial: InitialDataSpec,
    pub integrator: IntegratorSettings,
    pub n_modes: usize,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub converge: ConvergeSettings,
    pub soliton: SolitonSettings,
}

impl RunConfig {
    pub fn from_document(doc: &ConfigDocument) -> Result<Self, ConfigError> {
        let model = doc.model()?;
        let n_modes: usize = doc.get("n_modes", 0)?;
        if doc.raw("n_modes").is_none() {
            return Err(ConfigError::Missing("n_modes"));
        }
        if n_modes == 0 {
            return Err(doc.value_error("n_modes", "requires n_modes >= 1".into()));
        }
        let seed = doc.get("seed", 0u64)?;
        let initial = initial_spec(doc, seed)?;

        let method = doc.get("integrator.method", Method::Etdrk4)?;
        let dt = doc.get_auto("integrator.dt")?;
        let t_end = doc.get("integrator.t_end", 1.0)?;
        let snapshot_stride = doc.get("integrator.snapshot_stride", 100usize)?;
        IntegratorConfig::new(method, dt.unwrap_or(t_end), t_end, snapshot_stride)?;
        let integrator = IntegratorSettings {
            method,
            dt,
            t_end,
            snapshot_stride,
        };

        let n_values = parse_list(doc, "converge.n_values", "16,32,64,128")?;
        let n_ref = match doc.get_auto("converge.n_ref")? {
            None => 4 * n_values.iter().copied().max().unwrap_or(1),
            Some(v) if v >= 1.0 && v.fract() == 0.0 => v as usize,
            Some(v) => return Err(doc.value_error("converge.n_ref", format!("requires a positive integer, got {v}"))),
        };
        let study = match doc.raw("converge.study").map_or("self", |(v, _)| v) {
            "self" => Study::SelfConvergence,
            "intermediate" => Study::Intermediate,
            other => {
                return Err(doc.value_error(
                    "converge.study",
                    format!("expected `self` or `intermediate`, got `{other}`"),
                ))
            }
        };
        let ref_dt_divisor = doc.get("converge.ref_dt_divisor", 4u32)?;
        if ref_dt_divisor == 0 {
            return Err(doc.value_error("converge.ref_dt_divisor", "requires ref_dt_divisor >= 1".into()));
        }
        let converge = ConvergeSettings {
            n_values,
            n_ref,
            study,
            ref_dt_divisor,
            max_over_time: doc.get("converge.max_over_time", false)?,
            check_dt: doc.get("converge.check_dt", false)?,
        };

        let soliton = SolitonSettings {
            speed: doc.get("soliton.speed", 0.5)?,
            tol: doc.get("soliton.tol", 1e-12)?,
            max_iter: doc.get("soliton.max_iter", 500)?,
        };

        Ok(Self {
            model,
            initial,
            integrator,
            n_modes,
            output_dir: doc.output_dir(),
            seed,
            converge,
            soliton,
        })
    }
}

fn initial_spec(doc: &ConfigDocument, seed: u64) -> Result<InitialDataSpec, ConfigError> {
    let kind = doc.raw("initial.kind").map_or("gaussian", |(v, _)| v);
    Ok(match kind {
        "gaussian" => InitialDataSpec::Gaussian {
            amplitude: doc.get("initial.amplitude", 1.0)?,
            width: doc.get("initial.width", 0.5)?,
            center: doc.get("initial.center", 0.0)?,
        },
        "cosine" => InitialDataSpec::Cosine {
            amplitude: doc.get("initial.amplitude", 1.0)?,
            mode: doc.get("initial.mode", 1)?,
        },
        "kdv_soliton" => InitialDataSpec::KdvSoliton {
            speed: doc.get("initial.speed", 0.5)?,
            center: doc.get("initial.center", 0.0)?,
        },
        "random_sobolev" => InitialDataSpec::RandomSobolev {
            mu: doc.get("initial.mu", 2.0)?,
            seed,
        },
        "petviashvili_wave" => InitialDataSpec::PetviashviliWave {
            speed: doc.get("initial.speed", 0.5)?,
            tol: doc.get("initial.tol", 1e-12)?,
            max_iter: doc.get("initial.max_iter", 500)?,
        },
        "file" => match doc.raw("initial.path") {
            Some((path, _)) => InitialDataSpec::File { path: path.into() },
            None => return Err(ConfigError::Missing("initial.path")),
        },
        other => {
            return Err(doc.value_error(
                "initial.kind",
                format!(
                    "unknown kind `{other}` (expected gaussian, cosine, kdv_soliton, random_sobolev, petviashvili_wave or file)"
                ),
            ))
        }
    })
}

fn parse_list(doc: &ConfigDocument, key: &str, default: &str) -> Result<Vec<usize>, ConfigError> {
    let text = doc.raw(key).map_or(default, |(v, _)| v);
    let values = text
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| doc.value_error(key, format!("expected a comma-separated list of integers: {e}")))?;
    if values.is_empty() || values[0] == 0 || values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(doc.value_error(key, "values must be positive and strictly increasing".into()));
    }
    Ok(values)
}

/// Parse a document and apply overrides in order.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<(ConfigDocument, RunConfig), ConfigError> {
    let mut doc = ConfigDocument::parse(text)?;
    for (i, o) in overrides.iter().enumerate() {
        doc.apply_override(i + 1, o)?;
    }
    let cfg = RunConfig::from_document(&doc)?;
    Ok((doc, cfg))
}
