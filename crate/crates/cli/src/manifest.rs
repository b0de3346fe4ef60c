//! Run manifests written next to command outputs.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Everything needed to repeat a run. Contains no timestamps or host
/// details, so equal invocations produce equal manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<String>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub parameters: BTreeMap<String, String>,
    /// Full effective configuration, when the command takes one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub settings: Option<toml::Table>,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        RunManifest {
            subcommand: subcommand.to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            seed: None,
            config: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            parameters: BTreeMap::new(),
            settings: None,
        }
    }

    pub fn input(mut self, path: &Path) -> Self {
        self.inputs.push(path.display().to_string());
        self
    }

    pub fn output(mut self, path: &Path) -> Self {
        self.outputs.push(path.display().to_string());
        self
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_owned(), value.to_string());
        self
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest fields are always representable")
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        crate::io::write_all(path, self.to_toml().as_bytes())
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(CliError::usage)
    }
}
