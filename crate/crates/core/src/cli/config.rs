//! Experiment files.
//!
//! A file is flat `key = value` text with `[section]` headers and `#`
//! comments (parsed as TOML). Every section other than `[defaults]` is one
//! named experiment; its keys override those in `[defaults]`. The only
//! top-level key is `output_dir`.
//!
//! ```toml
//! output_dir = "results"
//!
//! [defaults]
//! code = "regular"          # or "alist", with alist = "path/to/H.alist"
//! channel = "awgn_mac"      # or "complex_mac"
//! power_ratio = "2/3"
//! snr_start = 0.0
//! snr_stop = 6.0
//! snr_step = 0.5
//! seed = 1
//!
//! [jncld]
//! frontend = "jncld"
//!
//! [mmse]
//! frontend = "mmse"
//! ```
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `code` | required | `"regular"` or `"alist"` |
//! | `n_bits`, `col_degree`, `row_degree`, `code_seed` | 1010, 3, 6, 1 | regular construction |
//! | `alist` | required for `code = "alist"` | path to the matrix |
//! | `channel` | required | `"awgn_mac"` or `"complex_mac"` |
//! | `frontend` | required | `"jncld"`, `"mmse"` or `"brute_force"` |
//! | `power_ratio` | 2/3 | `P_A h_A² / P_B h_B²`; number or `"p/q"` |
//! | `total_power` | 2 | `P_A h_A² + P_B h_B²` |
//! | `gain_a`, `gain_b` | 1 | channel gains |
//! | `phase` | `"block"` | `"block"`, `"symbol"` or `"fixed"` (with `theta_a`, `theta_b`) |
//! | `snr_db` or `snr_start`/`snr_stop`/`snr_step` | required | relay SNR grid in dB |
//! | `max_iters` | 30 | BP iterations |
//! | `min_errors` | 200 | frame errors per point before stopping |
//! | `max_trials` | 1000000 | frames per point at most |
//! | `seed` | required | master seed |
//! | `scope` | `"relay_only"` | or `"end_to_end"` |
//! | `bc_snr_db` | MAC SNR | broadcast SNR (end_to_end only) |

use std::path::{Path, PathBuf};

use thiserror::Error;
use toml::{Table, Value};

use crate::relay_sim::{
    ChannelKind, CodeSpec, Frontend, PhaseModel, Scope, SimConfig, StoppingRule,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("missing required key `{0}`")]
    MissingKey(String),
    #[error("`{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("no config blocks")]
    NoBlocks,
}

/// One named experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentBlock {
    pub name: String,
    pub config: SimConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentFile {
    pub output_dir: Option<PathBuf>,
    pub blocks: Vec<ExperimentBlock>,
}

const BLOCK_KEYS: &[&str] = &[
    "code",
    "n_bits",
    "col_degree",
    "row_degree",
    "code_seed",
    "alist",
    "channel",
    "frontend",
    "power_ratio",
    "total_power",
    "gain_a",
    "gain_b",
    "phase",
    "theta_a",
    "theta_b",
    "snr_db",
    "snr_start",
    "snr_stop",
    "snr_step",
    "max_iters",
    "min_errors",
    "max_trials",
    "seed",
    "scope",
    "bc_snr_db",
];

/// Reads a file and resolves a relative `alist` path against its directory.
pub fn load_experiment(path: &Path) -> Result<ExperimentFile, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Syntax(format!("{}: {e}", path.display())))?;
    let mut exp = parse_experiment(&text)?;
    let base = path.parent().unwrap_or(Path::new("."));
    for block in &mut exp.blocks {
        if let CodeSpec::Alist(p) = &mut block.config.code {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
    if let Some(dir) = &mut exp.output_dir {
        if dir.is_relative() {
            *dir = base.join(&*dir);
        }
    }
    Ok(exp)
}

pub fn parse_experiment(text: &str) -> Result<ExperimentFile, ConfigError> {
    let table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::Syntax(e.message().to_string()))?;

    let mut output_dir = None;
    let mut defaults = Table::new();
    let mut sections = Vec::new();
    for (key, value) in table {
        match (key.as_str(), value) {
            ("output_dir", Value::String(s)) => output_dir = Some(PathBuf::from(s)),
            ("output_dir", _) => {
                return Err(invalid("output_dir", "expected a string"));
            }
            ("defaults", Value::Table(t)) => defaults = t,
            (_, Value::Table(t)) => sections.push((key, t)),
            _ => return Err(ConfigError::UnknownKey(key)),
        }
    }
    for key in defaults.keys() {
        if !BLOCK_KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey(format!("defaults.{key}")));
        }
    }
    if sections.is_empty() {
        return Err(ConfigError::NoBlocks);
    }

    let blocks = sections
        .into_iter()
        .map(|(name, section)| {
            let config = Block {
                name: &name,
                section: &section,
                defaults: &defaults,
            }
            .to_config()?;
            Ok(ExperimentBlock { name, config })
        })
        .collect::<Result<Vec<_>, ConfigError>>()?;
    Ok(ExperimentFile { output_dir, blocks })
}

fn invalid(key: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        message: message.into(),
    }
}

/// A section merged over the defaults, remembering where each key came from.
struct Block<'a> {
    name: &'a str,
    section: &'a Table,
    defaults: &'a Table,
}

impl Block<'_> {
    fn lookup(&self, key: &str) -> Option<(String, &Value)> {
        if let Some(v) = self.section.get(key) {
            Some((format!("{}.{key}", self.name), v))
        } else {
            self.defaults
                .get(key)
                .map(|v| (format!("defaults.{key}"), v))
        }
    }

    fn has(&self, key: &str) -> bool {
        self.lookup(key).is_some()
    }

    fn path(&self, key: &str) -> String {
        format!("{}.{key}", self.name)
    }

    fn required<T>(
        &self,
        key: &str,
        f: impl Fn(&str, &Value) -> Result<T, ConfigError>,
    ) -> Result<T, ConfigError> {
        match self.lookup(key) {
            Some((path, v)) => f(&path, v),
            None => Err(ConfigError::MissingKey(self.path(key))),
        }
    }

    fn optional<T>(
        &self,
        key: &str,
        f: impl Fn(&str, &Value) -> Result<T, ConfigError>,
    ) -> Result<Option<T>, ConfigError> {
        self.lookup(key).map(|(path, v)| f(&path, v)).transpose()
    }

    fn to_config(&self) -> Result<SimConfig, ConfigError> {
        for key in self.section.keys() {
            if !BLOCK_KEYS.contains(&key.as_str()) {
                return Err(ConfigError::UnknownKey(self.path(key)));
            }
        }
        let d = SimConfig::default();

        let code = match self.required("code", string)?.as_str() {
            "regular" => {
                let (n_bits, col_degree, row_degree, code_seed) = match &d.code {
                    CodeSpec::Regular {
                        n_bits,
                        col_degree,
                        row_degree,
                        seed,
                    } => (*n_bits, *col_degree, *row_degree, *seed),
                    CodeSpec::Alist(_) => unreachable!("default code is regular"),
                };
                if self.has("alist") {
                    return Err(invalid(
                        self.path("alist"),
                        "only valid with code = \"alist\"",
                    ));
                }
                CodeSpec::Regular {
                    n_bits: self.optional("n_bits", count(2))?.unwrap_or(n_bits),
                    col_degree: self.optional("col_degree", count(2))?.unwrap_or(col_degree),
                    row_degree: self.optional("row_degree", count(2))?.unwrap_or(row_degree),
                    seed: self.optional("code_seed", seed)?.unwrap_or(code_seed),
                }
            }
            "alist" => {
                for key in ["n_bits", "col_degree", "row_degree", "code_seed"] {
                    if self.has(key) {
                        return Err(invalid(
                            self.path(key),
                            "only valid with code = \"regular\"",
                        ));
                    }
                }
                CodeSpec::Alist(PathBuf::from(self.required("alist", string)?))
            }
            other => {
                let (path, _) = self.lookup("code").expect("present");
                return Err(invalid(
                    path,
                    format!("expected \"regular\" or \"alist\", got \"{other}\""),
                ));
            }
        };

        let channel = self.required("channel", |path, v| match string(path, v)?.as_str() {
            "awgn_mac" => Ok(ChannelKind::AwgnMac),
            "complex_mac" => Ok(ChannelKind::ComplexMac),
            other => Err(invalid(
                path,
                format!("expected \"awgn_mac\" or \"complex_mac\", got \"{other}\""),
            )),
        })?;
        let frontend = self.required("frontend", |path, v| match string(path, v)?.as_str() {
            "jncld" => Ok(Frontend::Jncld),
            "mmse" => Ok(Frontend::Mmse),
            "brute_force" => Ok(Frontend::BruteForce),
            other => Err(invalid(
                path,
                format!("expected \"jncld\", \"mmse\" or \"brute_force\", got \"{other}\""),
            )),
        })?;

        let power_ratio = self
            .optional("power_ratio", ratio)?
            .unwrap_or(d.power_ratio);
        let total_power = self
            .optional("total_power", positive)?
            .unwrap_or(d.total_power);
        let gain_a = self.optional("gain_a", positive)?.unwrap_or(d.gain_a);
        let gain_b = self.optional("gain_b", positive)?.unwrap_or(d.gain_b);

        let theta_a = self.optional("theta_a", number)?;
        let theta_b = self.optional("theta_b", number)?;
        let phases = match self.optional("phase", string)?.as_deref() {
            None | Some("block") | Some("symbol") if theta_a.is_some() || theta_b.is_some() => {
                let key = if theta_a.is_some() {
                    "theta_a"
                } else {
                    "theta_b"
                };
                return Err(invalid(self.path(key), "only valid with phase = \"fixed\""));
            }
            None | Some("block") => PhaseModel::Block,
            Some("symbol") => PhaseModel::Symbol,
            Some("fixed") => PhaseModel::Fixed {
                theta_a: theta_a.ok_or_else(|| ConfigError::MissingKey(self.path("theta_a")))?,
                theta_b: theta_b.ok_or_else(|| ConfigError::MissingKey(self.path("theta_b")))?,
            },
            Some(other) => {
                return Err(invalid(
                    self.path("phase"),
                    format!("expected \"block\", \"symbol\" or \"fixed\", got \"{other}\""),
                ))
            }
        };

        let snr_db = self.snr_grid()?;
        let max_iters = self.optional("max_iters", count(1))?.unwrap_or(d.max_iters);
        let stop = StoppingRule {
            min_errors: self
                .optional("min_errors", count(1))?
                .map_or(d.stop.min_errors, |v| v as u64),
            max_trials: self
                .optional("max_trials", count(1))?
                .map_or(d.stop.max_trials, |v| v as u64),
        };
        let seed_value = self.required("seed", seed)?;
        let scope = match self.optional("scope", string)?.as_deref() {
            None | Some("relay_only") => Scope::RelayOnly,
            Some("end_to_end") => Scope::EndToEnd,
            Some(other) => {
                return Err(invalid(
                    self.path("scope"),
                    format!("expected \"relay_only\" or \"end_to_end\", got \"{other}\""),
                ))
            }
        };
        let bc_snr_db = self.optional("bc_snr_db", number)?;
        if bc_snr_db.is_some() && scope != Scope::EndToEnd {
            return Err(invalid(
                self.path("bc_snr_db"),
                "only valid with scope = \"end_to_end\"",
            ));
        }

        let cfg = SimConfig {
            code,
            channel,
            frontend,
            power_ratio,
            total_power,
            gain_a,
            gain_b,
            phases,
            snr_db,
            max_iters,
            stop,
            seed: seed_value,
            scope,
            bc_snr_db,
        };
        cfg.validate()
            .map_err(|e| invalid(self.name, e.to_string()))?;
        Ok(cfg)
    }

    fn snr_grid(&self) -> Result<Vec<f64>, ConfigError> {
        let range_keys = ["snr_start", "snr_stop", "snr_step"];
        if let Some((path, v)) = self.lookup("snr_db") {
            if let Some(k) = range_keys.iter().find(|k| self.has(k)) {
                return Err(invalid(
                    self.path(k),
                    "give either snr_db or a start/stop/step range",
                ));
            }
            let Value::Array(items) = v else {
                return Err(invalid(path, "expected an array of numbers"));
            };
            let grid = items
                .iter()
                .map(|x| number(&path, x))
                .collect::<Result<Vec<_>, _>>()?;
            if grid.is_empty() {
                return Err(invalid(path, "SNR grid is empty"));
            }
            if grid.windows(2).any(|w| w[1] <= w[0]) {
                return Err(invalid(path, "SNR grid must be strictly increasing"));
            }
            return Ok(grid);
        }
        if !range_keys.iter().any(|k| self.has(k)) {
            return Err(ConfigError::MissingKey(self.path("snr_db")));
        }
        let start = self.required("snr_start", number)?;
        let stop = self.required("snr_stop", number)?;
        let step = self.required("snr_step", positive)?;
        if stop < start {
            return Err(invalid(
                self.path("snr_stop"),
                "must not be below snr_start",
            ));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        if count > 100_000 {
            return Err(invalid(self.path("snr_step"), "grid has too many points"));
        }
        // rounded to 1e-9 dB so 0.1 steps print cleanly
        Ok((0..=count)
            .map(|k| ((start + k as f64 * step) * 1e9).round() / 1e9)
            .collect())
    }
}

fn string(path: &str, v: &Value) -> Result<String, ConfigError> {
    v.as_str()
        .map(str::to_string)
        .ok_or_else(|| invalid(path, "expected a string"))
}

fn number(path: &str, v: &Value) -> Result<f64, ConfigError> {
    let x = match v {
        Value::Float(f) => *f,
        Value::Integer(i) => *i as f64,
        _ => return Err(invalid(path, "expected a number")),
    };
    if !x.is_finite() {
        return Err(invalid(path, "must be finite"));
    }
    Ok(x)
}

fn positive(path: &str, v: &Value) -> Result<f64, ConfigError> {
    let x = number(path, v)?;
    if x <= 0.0 {
        return Err(invalid(path, format!("must be positive, got {x}")));
    }
    Ok(x)
}

fn count(min: usize) -> impl Fn(&str, &Value) -> Result<usize, ConfigError> {
    move |path, v| match v {
        Value::Integer(i) if *i >= min as i64 => Ok(*i as usize),
        Value::Integer(i) => Err(invalid(path, format!("must be at least {min}, got {i}"))),
        _ => Err(invalid(path, "expected an integer")),
    }
}

fn seed(path: &str, v: &Value) -> Result<u64, ConfigError> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        Value::Integer(_) => Err(invalid(path, "must be non-negative")),
        _ => Err(invalid(path, "expected an integer")),
    }
}

/// A positive ratio given as a number or a `"p/q"` string.
fn ratio(path: &str, v: &Value) -> Result<f64, ConfigError> {
    let x = match v {
        Value::String(s) => parse_ratio(s)
            .ok_or_else(|| invalid(path, format!("cannot read \"{s}\" as a ratio")))?,
        other => number(path, other)?,
    };
    if !(x.is_finite() && x > 0.0) {
        return Err(invalid(path, format!("must be positive, got {x}")));
    }
    Ok(x)
}

fn parse_ratio(s: &str) -> Option<f64> {
    match s.split_once('/') {
        Some((p, q)) => {
            let (p, q): (f64, f64) = (p.trim().parse().ok()?, q.trim().parse().ok()?);
            (q != 0.0).then(|| p / q)
        }
        None => s.trim().parse().ok(),
    }
}
