//! Serializable experiment records.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

/// Version of the report layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Version of this library.
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One experiment: its configuration, what was computed, what it was
/// compared against and any range warnings. Maps are ordered so that the
/// JSON text is a function of the contents alone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub artifact_version: String,
    pub command: String,
    pub config: Value,
    pub params: BTreeMap<String, Value>,
    pub statistics: BTreeMap<String, Value>,
    pub references: BTreeMap<String, Value>,
    pub ratios: BTreeMap<String, Value>,
    pub warnings: Vec<String>,
}

impl ExperimentReport {
    pub fn new(command: impl Into<String>, config: Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            artifact_version: ARTIFACT_VERSION.to_string(),
            command: command.into(),
            config,
            params: BTreeMap::new(),
            statistics: BTreeMap::new(),
            references: BTreeMap::new(),
            ratios: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, v: impl Serialize) -> &mut Self {
        self.params.insert(key.to_string(), to_value(v));
        self
    }

    pub fn stat(&mut self, key: &str, v: impl Serialize) -> &mut Self {
        self.statistics.insert(key.to_string(), to_value(v));
        self
    }

    pub fn reference(&mut self, key: &str, v: impl Serialize) -> &mut Self {
        self.references.insert(key.to_string(), to_value(v));
        self
    }

    pub fn ratio(&mut self, key: &str, v: impl Serialize) -> &mut Self {
        self.ratios.insert(key.to_string(), to_value(v));
        self
    }

    pub fn to_json(&self) -> crate::Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Non-finite floats have no JSON form and become `null`.
fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}
