//! TOML run configuration. Keys mirror the command-line flags; a config is
//! turned into an argument vector and parsed by the same parser, so a
//! config can express exactly what the flags can.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

/// A configuration or argument problem (exit status 2).
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub const COMMANDS: [&str; 6] = ["sample", "measure", "verify-lemma", "optimize", "pipeline", "calibrate"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Remaining command flags, keyed by flag name without dashes.
    #[serde(default)]
    pub parameters: BTreeMap<String, toml::Value>,
}

fn scalar(v: &toml::Value) -> Result<String, ConfigError> {
    Ok(match v {
        toml::Value::String(s) => s.clone(),
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::Float(f) => format!("{f:?}"),
        toml::Value::Array(a) => a.iter().map(scalar).collect::<Result<Vec<_>, _>>()?.join(","),
        other => return Err(ConfigError(format!("unsupported parameter value {other}"))),
    })
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let c: Self = toml::from_str(text).map_err(|e| ConfigError(format!("invalid config: {e}")))?;
        if !COMMANDS.contains(&c.command.as_str()) {
            return Err(ConfigError(format!("unknown command {:?}; expected one of {}", c.command, COMMANDS.join(", "))));
        }
        Ok(c)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Argument vector (without the program name).
    pub fn to_args(&self) -> Result<Vec<String>, ConfigError> {
        let mut args = Vec::new();
        if let Some(t) = self.threads {
            args.extend(["--threads".into(), t.to_string()]);
        }
        args.push(self.command.clone());
        let flag = |k: &str| format!("--{}", k.replace('_', "-"));
        for (k, v) in [("seed", self.seed), ("samples", self.samples), ("trials", self.trials)] {
            if let Some(v) = v {
                args.extend([flag(k), v.to_string()]);
            }
        }
        if let Some(o) = &self.output {
            args.extend(["--output".into(), o.display().to_string()]);
        }
        for (k, v) in &self.parameters {
            match v {
                toml::Value::Boolean(true) => args.push(flag(k)),
                toml::Value::Boolean(false) => {}
                other => args.extend([flag(k), scalar(other)?]),
            }
        }
        Ok(args)
    }
}
