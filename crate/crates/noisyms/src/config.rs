//! TOML configuration files.
//!
//! A config file holds one table per subcommand, named as on the command
//! line:
//!
//! ```toml
//! [de-trace]
//! mu = 1
//! chi = 0.06
//! adder = "full-depth"
//! p_a = 1e-15
//!
//! [simulate]
//! variant = "scms"
//! chi = [0.03, 0.04, 0.05]
//! graph = { n = 1008, girth = 8, graph_seed = 7 }
//! ```
//!
//! Resolution order is: built-in defaults, then the command's table, then
//! command-line flags.

use std::path::Path;

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Parsed config file.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    table: toml::Table,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(Self { table: text.parse::<toml::Table>()? })
    }

    /// Parameters of `command`: defaults overlaid with the command's table.
    pub fn params<T: DeserializeOwned + Serialize + Default>(&self, command: &str) -> Result<T> {
        match self.table.get(command) {
            None => Ok(T::default()),
            Some(toml::Value::Table(t)) => {
                // Flattened parameter groups cannot reject unknown keys on
                // their own, so check the top level against the defaults.
                if let serde_json::Value::Object(known) = serde_json::to_value(T::default())? {
                    if let Some(k) = t.keys().find(|k| !known.contains_key(k.as_str())) {
                        anyhow::bail!("unknown key `{k}` in table [{command}]");
                    }
                }
                T::deserialize(toml::Value::Table(t.clone())).with_context(|| format!("in table [{command}]"))
            }
            Some(_) => anyhow::bail!("config entry `{command}` must be a table"),
        }
    }
}
