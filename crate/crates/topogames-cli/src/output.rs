//! JSON and CSV artifacts. Every record and row carries the library version,
//! the config hash and the seed.

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use std::path::Path;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Serialize)]
struct Record<'a> {
    version: &'a str,
    command: &'a str,
    config_hash: &'a str,
    seed: u64,
    config: Value,
    result: Value,
}

/// A table with fixed columns per subcommand.
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Table {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Writes `<dir>/<stem>.json` and `<dir>/<stem>.csv`; returns the JSON text.
pub fn emit(
    dir: &Path,
    command: &str,
    config_hash: &str,
    seed: u64,
    config: Value,
    result: Value,
    table: &Table,
) -> Result<String> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    let stem = command.replace(' ', "-");
    let record = Record { version: VERSION, command, config_hash, seed, config, result };
    let mut text = serde_json::to_string_pretty(&record)?;
    text.push('\n');
    let json = dir.join(format!("{stem}.json"));
    std::fs::write(&json, &text).with_context(|| format!("writing {}", json.display()))?;

    let csv = dir.join(format!("{stem}.csv"));
    let mut w = csv::Writer::from_path(&csv).with_context(|| format!("writing {}", csv.display()))?;
    let mut header = vec!["version", "config_hash", "seed"];
    header.extend(&table.columns);
    w.write_record(&header)?;
    let seed = seed.to_string();
    for row in &table.rows {
        let mut full = vec![VERSION, config_hash, seed.as_str()];
        full.extend(row.iter().map(String::as_str));
        w.write_record(&full)?;
    }
    w.flush()?;
    Ok(text)
}

/// Float in CSV form: shortest round-trip representation, '.' decimal.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
