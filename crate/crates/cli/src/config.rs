//! Plain-text key-value configuration files and flag/file/default
//! precedence resolution.
//!
//! Files hold one `key = value` pair per line; `#` starts a comment. Keys
//! mirror the long flag names with underscores (`quad_points` for
//! `--quad-points`). Flags override file values, file values override
//! built-in defaults, and the fully resolved configuration is echoed in
//! every output for reproducibility.

use std::collections::HashMap;
use std::path::Path;

use crate::CliError;

#[derive(Debug, Default)]
pub struct FileConfig {
    map: HashMap<String, String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("cannot read config {}: {e}", path.display())))?;
        let mut map = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::invalid(format!(
                    "config {}:{}: expected `key = value`, got `{raw}`",
                    path.display(),
                    lineno + 1
                )));
            };
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(FileConfig { map })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    pub fn f64_or(&self, flag: Option<f64>, key: &str, default: f64) -> Result<f64, CliError> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.raw(key) {
            Some(s) => s
                .parse()
                .map_err(|_| CliError::invalid(format!("config key {key}: bad number `{s}`"))),
            None => Ok(default),
        }
    }

    pub fn usize_or(&self, flag: Option<usize>, key: &str, default: usize) -> Result<usize, CliError> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.raw(key) {
            Some(s) => s
                .parse()
                .map_err(|_| CliError::invalid(format!("config key {key}: bad integer `{s}`"))),
            None => Ok(default),
        }
    }

    pub fn u64_or(&self, flag: Option<u64>, key: &str, default: u64) -> Result<u64, CliError> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.raw(key) {
            Some(s) => s
                .parse()
                .map_err(|_| CliError::invalid(format!("config key {key}: bad integer `{s}`"))),
            None => Ok(default),
        }
    }

    /// Comma-separated float list, e.g. `h = 0.7,0.7`.
    pub fn list_or(
        &self,
        flag: Option<&str>,
        key: &str,
        default: Option<&[f64]>,
    ) -> Result<Vec<f64>, CliError> {
        let text = match (flag, self.raw(key)) {
            (Some(t), _) => t.to_string(),
            (None, Some(t)) => t.to_string(),
            (None, None) => {
                return match default {
                    Some(d) => Ok(d.to_vec()),
                    None => Err(CliError::invalid(format!("missing required value `{key}`"))),
                }
            }
        };
        parse_list(&text).map_err(|e| CliError::invalid(format!("{key}: {e}")))
    }
}

pub fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| format!("bad number `{s}`")))
        .collect()
}
