//! Flat `key = value` experiment files mirroring the command-line flags.

use std::fmt::Write as _;

use crate::CliError;

/// A command plus its flags in invocation order. Keys are flag names
/// without the leading dashes; repeated flags repeat the key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub command: String,
    pub entries: Vec<(String, String)>,
}

/// Flags that steer the driver itself and never enter a config.
const DRIVER_FLAGS: [&str; 2] = ["config", "save-config"];

impl ExperimentConfig {
    /// From the arguments after the program name, e.g.
    /// `["formula", "--i1", "0,1", "--f=halpha:2"]`.
    pub fn from_argv(args: &[String]) -> Result<Self, CliError> {
        let mut command = None;
        let mut entries = Vec::new();
        let mut it = args.iter();
        while let Some(tok) = it.next() {
            if let Some(flag) = tok.strip_prefix("--") {
                let (key, value) = match flag.split_once('=') {
                    Some((k, v)) => (k.to_string(), v.to_string()),
                    None => {
                        let v = it.next().ok_or_else(|| CliError::Config(format!("flag --{flag} needs a value")))?;
                        (flag.to_string(), v.clone())
                    }
                };
                if !DRIVER_FLAGS.contains(&key.as_str()) {
                    entries.push((key, value));
                }
            } else if command.is_none() {
                command = Some(tok.clone());
            } else {
                return Err(CliError::Config(format!("unexpected argument '{tok}'")));
            }
        }
        let command = command.ok_or_else(|| CliError::Config("no command given".into()))?;
        Ok(ExperimentConfig { command, entries })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut command = None;
        let mut entries = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected 'key = value'", no + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if k == "command" {
                if command.replace(v.to_string()).is_some() {
                    return Err(CliError::Config(format!("line {}: command given twice", no + 1)));
                }
            } else if DRIVER_FLAGS.contains(&k) {
                return Err(CliError::Config(format!("line {}: '{k}' is not allowed in a config", no + 1)));
            } else {
                entries.push((k.to_string(), v.to_string()));
            }
        }
        let command = command.ok_or_else(|| CliError::Config("config has no 'command' line".into()))?;
        Ok(ExperimentConfig { command, entries })
    }

    pub fn render(&self) -> String {
        let mut out = format!("command = {}\n", self.command);
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn to_argv(&self) -> Vec<String> {
        let mut out = vec![self.command.clone()];
        for (k, v) in &self.entries {
            out.push(format!("--{k}={v}"));
        }
        out
    }
}
