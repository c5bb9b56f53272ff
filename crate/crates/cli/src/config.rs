//! Optional TOML configuration. Keys mirror the long flag names with `-`
//! or `_`; command-line values always take precedence.

use std::path::{Path, PathBuf};

use quatcm::{Error, Result};

#[derive(Debug, Default, Clone)]
pub struct Config {
    table: toml::Table,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("cannot read config {}: {e}", path.display())))?;
        let table: toml::Table =
            text.parse().map_err(|e| Error::Input(format!("config {} is not valid TOML: {e}", path.display())))?;
        Ok(Config { table })
    }

    fn raw(&self, key: &str) -> Option<&toml::Value> {
        self.table.get(key).or_else(|| self.table.get(&key.replace('_', "-")))
    }

    pub fn int(&self, key: &str) -> Result<Option<i64>> {
        match self.raw(key) {
            None => Ok(None),
            Some(toml::Value::Integer(v)) => Ok(Some(*v)),
            Some(v) => Err(Error::Input(format!("config key `{key}` must be an integer, found {v}"))),
        }
    }

    pub fn uint(&self, key: &str) -> Result<Option<u64>> {
        match self.int(key)? {
            None => Ok(None),
            Some(v) if v >= 0 => Ok(Some(v as u64)),
            Some(v) => Err(Error::Input(format!("config key `{key}` must be nonnegative, found {v}"))),
        }
    }

    pub fn string(&self, key: &str) -> Result<Option<String>> {
        match self.raw(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s.clone())),
            Some(v) => Err(Error::Input(format!("config key `{key}` must be a string, found {v}"))),
        }
    }

    pub fn path(&self, key: &str) -> Result<Option<PathBuf>> {
        Ok(self.string(key)?.map(PathBuf::from))
    }
}

/// Flag value, else config value, else default.
pub fn pick_u64(flag: Option<u64>, cfg: &Config, key: &str, default: Option<u64>) -> Result<u64> {
    if let Some(v) = flag {
        return Ok(v);
    }
    if let Some(v) = cfg.uint(key)? {
        return Ok(v);
    }
    default.ok_or_else(|| Error::Input(format!("missing required parameter --{}", key.replace('_', "-"))))
}

pub fn pick_i64(flag: Option<i64>, cfg: &Config, key: &str) -> Result<i64> {
    if let Some(v) = flag {
        return Ok(v);
    }
    cfg.int(key)?.ok_or_else(|| Error::Input(format!("missing required parameter --{}", key.replace('_', "-"))))
}

pub fn pick_opt_u64(flag: Option<u64>, cfg: &Config, key: &str) -> Result<Option<u64>> {
    Ok(match flag {
        Some(v) => Some(v),
        None => cfg.uint(key)?,
    })
}
