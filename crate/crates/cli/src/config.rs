//! INI-style scenario configuration.
//!
//! A config file declares the demand family, market and tax parameters, and
//! optionally the agent's reservation payoff and solver controls:
//!
//! ```ini
//! [demand]
//! kind = normal        # or uniform / exponential
//! mu = 220             # normal: mu, sigma; uniform: lo, hi; exponential: rate
//! sigma = 30
//!
//! [market]
//! m = 100
//! gamma0 = 20
//! eta = 1
//! k = 56
//!
//! [tax]
//! tau = 0.35
//! tau0 = 0.30
//!
//! [policy]
//! alpha = 0.1
//! beta = 0.3
//!
//! [agent]              # optional; reservation defaults to 0
//! reservation = 5100
//!
//! [solver]             # optional; defaults are the library settings
//! tol = 1e-9
//! ```
//!
//! Blank lines and full lines starting with `#` or `;` are ignored. Unknown
//! sections or keys are hard errors carrying the offending line number, as
//! are duplicate keys. `SECTION.KEY=VALUE` override pairs from the command
//! line are applied after the file is read and replace its values.

use std::collections::BTreeMap;
use std::fmt;

use tesc_core::{Demand, Scenario, SolverSettings};

/// Configuration failure; `line` locates it in the file when it came from
/// one (command-line overrides carry no line).
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: Option<usize>, message: impl Into<String>) -> Self {
        ConfigError {
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "line {n}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Parsed configuration: the scenario plus solver controls.
#[derive(Debug, Clone, Copy)]
pub struct Config {
    pub scenario: Scenario,
    pub settings: SolverSettings,
}

const SECTIONS: &[&str] = &["demand", "market", "tax", "policy", "agent", "solver"];

type Entries = BTreeMap<(String, String), (String, Option<usize>)>;

/// Parses a config file's text and applies `SECTION.KEY=VALUE` overrides.
///
/// The returned scenario is *not* validated against the model invariants;
/// callers decide how a syntactically sound but infeasible scenario is
/// reported. Solver controls are validated here because they are part of
/// the configuration itself.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<Config, ConfigError> {
    let mut entries: Entries = BTreeMap::new();
    let mut section: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let here = Some(idx + 1);
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return Err(ConfigError::at(
                    here,
                    format!("malformed section header `{line}`"),
                ));
            };
            let name = name.trim().to_ascii_lowercase();
            if !SECTIONS.contains(&name.as_str()) {
                return Err(ConfigError::at(here, format!("unknown section [{name}]")));
            }
            section = Some(name);
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::at(
                here,
                format!("expected `key = value`, got `{line}`"),
            ));
        };
        let Some(section) = section.clone() else {
            return Err(ConfigError::at(
                here,
                format!("key `{}` before any [section]", key.trim()),
            ));
        };
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim().to_string();
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::at(here, "empty key or value"));
        }
        if entries
            .insert((section.clone(), key.clone()), (value, here))
            .is_some()
        {
            return Err(ConfigError::at(
                here,
                format!("duplicate key {section}.{key}"),
            ));
        }
    }

    for pair in overrides {
        let Some((target, value)) = pair.split_once('=') else {
            return Err(ConfigError::at(
                None,
                format!("override `{pair}` is not SECTION.KEY=VALUE"),
            ));
        };
        let Some((section, key)) = target.split_once('.') else {
            return Err(ConfigError::at(
                None,
                format!("override `{pair}` is not SECTION.KEY=VALUE"),
            ));
        };
        let section = section.trim().to_ascii_lowercase();
        let key = key.trim().to_ascii_lowercase();
        if !SECTIONS.contains(&section.as_str()) {
            return Err(ConfigError::at(
                None,
                format!("override names unknown section [{section}]"),
            ));
        }
        entries.insert((section, key), (value.trim().to_string(), None));
    }

    build(entries)
}

fn build(mut entries: Entries) -> Result<Config, ConfigError> {
    let demand = {
        let (kind, line) = take(&mut entries, "demand", "kind")?;
        match kind.to_ascii_lowercase().as_str() {
            "normal" => Demand::Normal {
                mu: take_f64(&mut entries, "demand", "mu")?,
                sigma: take_f64(&mut entries, "demand", "sigma")?,
            },
            "uniform" => Demand::Uniform {
                lo: take_f64(&mut entries, "demand", "lo")?,
                hi: take_f64(&mut entries, "demand", "hi")?,
            },
            "exponential" => Demand::Exponential {
                rate: take_f64(&mut entries, "demand", "rate")?,
            },
            other => {
                return Err(ConfigError::at(
                    line,
                    format!("unknown demand kind `{other}` (normal, uniform, exponential)"),
                ))
            }
        }
    };

    let scenario = Scenario {
        demand,
        m: take_f64(&mut entries, "market", "m")?,
        gamma0: take_f64(&mut entries, "market", "gamma0")?,
        eta: take_f64(&mut entries, "market", "eta")?,
        k: take_f64(&mut entries, "market", "k")?,
        tau: take_f64(&mut entries, "tax", "tau")?,
        tau0: take_f64(&mut entries, "tax", "tau0")?,
        alpha: take_f64(&mut entries, "policy", "alpha")?,
        beta: take_f64(&mut entries, "policy", "beta")?,
        reservation: take_f64_or(&mut entries, "agent", "reservation", 0.0)?,
    };

    let defaults = SolverSettings::default();
    let settings = SolverSettings {
        tol: take_f64_or(&mut entries, "solver", "tol", defaults.tol)?,
        max_iter: take_usize_or(&mut entries, "solver", "max_iter", defaults.max_iter)?,
        grid_points: take_usize_or(&mut entries, "solver", "grid_points", defaults.grid_points)?,
        damping: take_f64_or(&mut entries, "solver", "damping", defaults.damping)?,
    };
    settings
        .validate()
        .map_err(|e| ConfigError::at(None, e.to_string()))?;

    if let Some(((section, key), (_, line))) = entries.pop_first() {
        return Err(ConfigError::at(
            line,
            format!("unknown key {section}.{key}"),
        ));
    }
    Ok(Config { scenario, settings })
}

fn take(
    entries: &mut Entries,
    section: &str,
    key: &str,
) -> Result<(String, Option<usize>), ConfigError> {
    entries
        .remove(&(section.to_string(), key.to_string()))
        .ok_or_else(|| ConfigError::at(None, format!("missing required key {section}.{key}")))
}

fn parse_f64(value: &str, line: Option<usize>, name: &str) -> Result<f64, ConfigError> {
    let v: f64 = value
        .parse()
        .map_err(|_| ConfigError::at(line, format!("invalid number `{value}` for {name}")))?;
    if !v.is_finite() {
        return Err(ConfigError::at(
            line,
            format!("non-finite value for {name}"),
        ));
    }
    Ok(v)
}

fn take_f64(entries: &mut Entries, section: &str, key: &str) -> Result<f64, ConfigError> {
    let (value, line) = take(entries, section, key)?;
    parse_f64(&value, line, &format!("{section}.{key}"))
}

fn take_f64_or(
    entries: &mut Entries,
    section: &str,
    key: &str,
    default: f64,
) -> Result<f64, ConfigError> {
    match entries.remove(&(section.to_string(), key.to_string())) {
        Some((value, line)) => parse_f64(&value, line, &format!("{section}.{key}")),
        None => Ok(default),
    }
}

fn take_usize_or(
    entries: &mut Entries,
    section: &str,
    key: &str,
    default: usize,
) -> Result<usize, ConfigError> {
    match entries.remove(&(section.to_string(), key.to_string())) {
        Some((value, line)) => value.parse().map_err(|_| {
            ConfigError::at(line, format!("invalid count `{value}` for {section}.{key}"))
        }),
        None => Ok(default),
    }
}

/// Sets a scenario parameter by its bare config-key name (sweep axis).
/// Demand parameters are accepted only for the matching demand family.
pub fn set_param(s: &mut Scenario, name: &str, value: f64) -> Result<(), ConfigError> {
    if matches!(name, "mu" | "sigma" | "lo" | "hi" | "rate") {
        let mismatch = |family: &str| {
            ConfigError::at(None, format!("parameter `{name}` needs {family} demand"))
        };
        match (&mut s.demand, name) {
            (Demand::Normal { mu, .. }, "mu") => *mu = value,
            (Demand::Normal { sigma, .. }, "sigma") => *sigma = value,
            (Demand::Uniform { lo, .. }, "lo") => *lo = value,
            (Demand::Uniform { hi, .. }, "hi") => *hi = value,
            (Demand::Exponential { rate }, "rate") => *rate = value,
            (_, "mu" | "sigma") => return Err(mismatch("normal")),
            (_, "lo" | "hi") => return Err(mismatch("uniform")),
            _ => return Err(mismatch("exponential")),
        }
        return Ok(());
    }
    match name {
        "m" => s.m = value,
        "gamma0" => s.gamma0 = value,
        "eta" => s.eta = value,
        "k" => s.k = value,
        "tau" => s.tau = value,
        "tau0" => s.tau0 = value,
        "alpha" => s.alpha = value,
        "beta" => s.beta = value,
        "reservation" => s.reservation = value,
        _ => {
            return Err(ConfigError::at(
                None,
                format!("unknown sweep parameter `{name}`"),
            ));
        }
    }
    Ok(())
}
