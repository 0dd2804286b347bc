//! Append-only run records.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::output::{Table, VERSION};

pub const RECORDS_FILE: &str = "records.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub config_hash: String,
    pub command: String,
    pub seed: u64,
    pub started: String,
    pub finished: String,
    pub version: String,
    pub passed: bool,
    pub tables: BTreeMap<String, Table>,
    pub summary: BTreeMap<String, serde_json::Value>,
}

impl ExperimentRecord {
    pub fn start(command: &str, config_hash: &str, seed: u64) -> Self {
        ExperimentRecord {
            config_hash: config_hash.to_string(),
            command: command.to_string(),
            seed,
            started: now(),
            finished: String::new(),
            version: VERSION.to_string(),
            passed: true,
            tables: BTreeMap::new(),
            summary: BTreeMap::new(),
        }
    }

    pub fn table(&mut self, name: &str, table: Table) {
        self.tables.insert(name.to_string(), table);
    }

    pub fn note(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.summary.insert(key.to_string(), v);
    }

    /// Stamp the end time and append one JSON line to `dir/records.jsonl`.
    pub fn finish(&mut self, dir: &Path) -> Result<()> {
        self.finished = now();
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(dir.join(RECORDS_FILE))?;
        writeln!(file, "{}", serde_json::to_string(self)?)?;
        Ok(())
    }
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

pub fn read_records(dir: &Path) -> Result<Vec<ExperimentRecord>> {
    let text = std::fs::read_to_string(dir.join(RECORDS_FILE))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Ok(serde_json::from_str(l)?))
        .collect()
}
