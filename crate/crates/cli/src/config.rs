//! Layered settings: built-in defaults, then the config file section, then flags.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Parsed config file. Sections are named after subcommands, plus `[global]`.
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    root: Map<String, Value>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::new("io", format!("reading config {}: {e}", path.display())))?;
        let table: toml::Table = toml::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {}", path.display(), e.message())))?;
        let root = match serde_json::to_value(table)? {
            Value::Object(m) => m,
            _ => unreachable!("a TOML document is a table"),
        };
        for (k, v) in &root {
            if !v.is_object() {
                return Err(CliError::config(format!(
                    "top-level key `{k}` must be a [section]"
                )));
            }
        }
        Ok(ConfigFile { root })
    }

    pub fn section(&self, name: &str) -> Map<String, Value> {
        self.root
            .get(name)
            .and_then(Value::as_object)
            .cloned()
            .unwrap_or_default()
    }
}

fn overlay(base: &mut Map<String, Value>, top: Map<String, Value>) {
    for (k, v) in top {
        if !v.is_null() {
            base.insert(k, v);
        }
    }
}

/// Merges `T::default()`, the file section and the set flags into a `T`.
///
/// `flags` must serialize unset options as null or omit them.
pub fn resolve<T, F>(file: &ConfigFile, section: &str, flags: &F) -> CliResult<T>
where
    T: Serialize + DeserializeOwned + Default,
    F: Serialize,
{
    let mut merged = match serde_json::to_value(T::default())? {
        Value::Object(m) => m,
        _ => unreachable!("settings are structs"),
    };
    overlay(&mut merged, file.section(section));
    if let Value::Object(m) = serde_json::to_value(flags)? {
        overlay(&mut merged, m);
    }
    serde_json::from_value(Value::Object(merged))
        .map_err(|e| CliError::config(format!("[{section}]: {e}")))
}

/// Global settings shared by every subcommand.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Global {
    pub seed: u64,
    pub jobs: usize,
}

impl Default for Global {
    fn default() -> Self {
        Global { seed: 0, jobs: 1 }
    }
}

/// Hex SHA-256 of the canonical JSON of `command`, `seed` and `settings`.
pub fn config_hash<T: Serialize>(command: &str, seed: u64, settings: &T) -> CliResult<String> {
    let canon = serde_json::json!({
        "command": command,
        "seed": seed,
        "settings": serde_json::to_value(settings)?,
    });
    let digest = Sha256::digest(canon.to_string().as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

pub fn require<'a>(path: &'a Option<PathBuf>, name: &str) -> CliResult<&'a Path> {
    path.as_deref()
        .ok_or_else(|| CliError::config(format!("missing required path `{name}`")))
}

/// Fails unless `path` is an existing file.
pub fn existing(path: &Path) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::new(
            "io",
            format!("input file not found: {}", path.display()),
        ))
    }
}

/// Fails unless the directory that will hold `path` exists.
pub fn writable(path: &Path) -> CliResult<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(CliError::new(
            "io",
            format!("output directory does not exist: {}", dir.display()),
        )),
        _ => Ok(()),
    }
}
