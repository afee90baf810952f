//! Run manifests and the key-value configuration files they double as.
//!
//! A manifest lists the resolved configuration of one command as
//! `key=value` lines, keyed by long flag name, preceded by `#` comment lines
//! carrying the tool version, a timestamp and input digests. Passing it back
//! with `--config` repeats the run.

use std::ffi::OsString;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::{CliError, Result};
use crate::io;

/// Flags that take no value; `true` enables them and `false` omits them.
const SWITCHES: &[&str] = &["positive-beta", "verbose"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunManifest {
    command: String,
    entries: Vec<(String, String)>,
    digests: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self { command: command.into(), entries: Vec::new(), digests: Vec::new() }
    }

    pub fn set(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    pub fn set_opt(&mut self, key: &str, value: Option<impl Display>) -> &mut Self {
        if let Some(v) = value {
            self.set(key, v);
        }
        self
    }

    pub fn set_path(&mut self, key: &str, path: &Path) -> &mut Self {
        self.set(key, path.display())
    }

    pub fn digest(&mut self, path: &Path, sha256: &str) -> &mut Self {
        self.digests.push((path.display().to_string(), sha256.into()));
        self
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn render(&self, created_unix: u64) -> String {
        let created = chrono::DateTime::from_timestamp(created_unix as i64, 0)
            .map(|t| t.format("%Y-%m-%dT%H:%M:%SZ").to_string())
            .unwrap_or_default();
        let mut s = format!("# csie {}\n# created {created}\n", env!("CARGO_PKG_VERSION"));
        for (path, sha) in &self.digests {
            s += &format!("# sha256 {sha} {path}\n");
        }
        s += &format!("command={}\n", self.command);
        for (k, v) in &self.entries {
            s += &format!("{k}={v}\n");
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let now = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        io::write_text(path, &self.render(now))
    }
}

/// Manifest location for a file output.
pub fn beside(output: &Path) -> PathBuf {
    output.with_extension("manifest")
}

/// Manifest location for a directory output.
pub fn inside(dir: &Path) -> PathBuf {
    dir.join("run.manifest")
}

/// Parses `key=value` lines; `#` starts a comment line.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", i + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", i + 1)));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

fn flag_key(arg: &str) -> Option<&str> {
    if arg.starts_with("-o") {
        return Some("output");
    }
    let name = arg.strip_prefix("--")?;
    Some(name.split_once('=').map_or(name, |(k, _)| k))
}

/// Splices the entries of a `--config` file into the argument list, right
/// after the subcommand. Keys also given on the command line are dropped
/// from the file so the command line wins.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let strs: Vec<Option<&str>> = args.iter().map(|a| a.to_str()).collect();
    let mut config_path = None;
    for (i, a) in strs.iter().enumerate() {
        match a {
            Some("--config") => {
                let p = strs.get(i + 1).copied().flatten().ok_or_else(|| {
                    CliError::Usage("--config needs a file path".into())
                })?;
                config_path = Some(p.to_string());
            }
            Some(a) if a.starts_with("--config=") => config_path = Some(a["--config=".len()..].into()),
            _ => {}
        }
    }
    let Some(config_path) = config_path else { return Ok(args) };
    let subcommand = args.get(1).and_then(|a| a.to_str()).unwrap_or_default().to_string();
    let text = std::fs::read_to_string(&config_path)
        .map_err(|e| CliError::Usage(format!("{config_path}: {e}")))?;
    let given: Vec<&str> = strs.iter().skip(2).filter_map(|a| a.and_then(flag_key)).collect();

    let mut injected: Vec<OsString> = Vec::new();
    for (key, value) in parse_config(&text)? {
        if key == "command" {
            if value != subcommand {
                return Err(CliError::Usage(format!(
                    "{config_path} is configured for `{value}`, not `{subcommand}`"
                )));
            }
            continue;
        }
        if key == "config" || given.contains(&key.as_str()) {
            continue;
        }
        if SWITCHES.contains(&key.as_str()) {
            match value.as_str() {
                "true" => injected.push(format!("--{key}").into()),
                "false" => {}
                _ => {
                    return Err(CliError::Usage(format!("{key} must be true or false, got {value}")))
                }
            }
        } else {
            injected.push(format!("--{key}={value}").into());
        }
    }
    let mut out: Vec<OsString> = args[..2.min(args.len())].to_vec();
    out.extend(injected);
    out.extend(args.into_iter().skip(2));
    Ok(out)
}
