//! Layering of configuration sources: TOML file, then `--set key=value`
//! assignments, then dedicated flags.

use geotrack_core::config::PipelineConfig;
use geotrack_core::io::read_text;
use geotrack_core::{Error, Result};
use std::path::Path;

/// Accumulates dotted-key assignments on top of an optional config file.
#[derive(Debug, Default)]
pub struct Layered {
    table: toml::Table,
}

impl Layered {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let table = match path {
            Some(p) => read_text(p)?.parse::<toml::Table>().map_err(|e| parse_error(p, e))?,
            None => toml::Table::new(),
        };
        Ok(Self { table })
    }

    /// Applies `section.key=value`; the value is read as a TOML literal and
    /// falls back to a bare string.
    pub fn assign(&mut self, assignment: &str) -> Result<()> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| Error::InvalidConfig(format!("--set expects key=value, got '{assignment}'")))?;
        let value = literal(raw.trim());
        self.set(key.trim(), value)
    }

    pub fn set(&mut self, dotted: &str, value: toml::Value) -> Result<()> {
        let parts: Vec<&str> = dotted.split('.').collect();
        if parts.iter().any(|p| p.is_empty()) {
            return Err(Error::InvalidConfig(format!("malformed key '{dotted}'")));
        }
        let (last, sections) = parts.split_last().expect("split yields one part");
        let mut table = &mut self.table;
        for s in sections {
            let entry = table.entry(s.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
            table = entry
                .as_table_mut()
                .ok_or_else(|| Error::InvalidConfig(format!("'{s}' in '{dotted}' is not a table")))?;
        }
        table.insert(last.to_string(), value);
        Ok(())
    }

    pub fn set_opt<T: Into<toml::Value>>(&mut self, dotted: &str, value: Option<T>) -> Result<()> {
        match value {
            Some(v) => self.set(dotted, v.into()),
            None => Ok(()),
        }
    }

    pub fn into_config(self) -> Result<PipelineConfig> {
        let cfg = PipelineConfig::from_toml(&self.table.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn literal(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn parse_error(path: &Path, e: impl ToString) -> Error {
    Error::Parse { what: path.display().to_string(), message: e.to_string() }
}
