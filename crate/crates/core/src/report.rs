//! JSON run reports.
//!
//! Every command emits one [`RunReport`]. Field order is fixed by the struct
//! definitions, so identical inputs give identical bytes. Floats are written in
//! the shortest form that parses back to the same `f64`.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cli::RunConfig;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// The published schema, also shipped at `crates/core/schema/report.schema.json`.
pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub command: String,
    pub status: Status,
    pub config: RunConfig,
    pub results: serde_json::Value,
    pub flags: Vec<String>,
    pub failed_stage: Option<String>,
    pub error: Option<String>,
}

impl RunReport {
    pub fn new(config: RunConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: TOOL_VERSION.to_string(),
            command: config.command_name().to_string(),
            status: Status::Ok,
            config,
            results: serde_json::Value::Object(Default::default()),
            flags: Vec::new(),
            failed_stage: None,
            error: None,
        }
    }

    pub fn add_flag(&mut self, flag: impl Into<String>) {
        let flag = flag.into();
        if let Err(pos) = self.flags.binary_search(&flag) {
            self.flags.insert(pos, flag);
        }
    }

    pub fn set_result(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        let value = serde_json::to_value(value)
            .map_err(|e| Error::domain(format!("cannot serialise {key} result: {e}")))?;
        if let serde_json::Value::Object(map) = &mut self.results {
            map.insert(key.to_string(), value);
        }
        Ok(())
    }

    pub fn fail(&mut self, stage: Option<&str>, err: &Error) {
        self.status = Status::Failed;
        self.failed_stage = stage.map(str::to_string);
        self.error = Some(err.to_string());
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::domain(format!("cannot serialise report: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    /// Writes to `path`, or to `stdout` when no path is given.
    pub fn emit(&self, path: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
        let json = self.to_json()?;
        match path {
            Some(p) => std::fs::write(p, json).map_err(|e| Error::io(p, e)),
            None => stdout
                .write_all(json.as_bytes())
                .map_err(|e| Error::io("<stdout>", e)),
        }
    }
}
