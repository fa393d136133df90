//! Versioned CSV / JSON / JSONL writers with round-trip number formatting.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;

pub const FORMAT_VERSION: u32 = 1;

/// Shortest decimal string that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// CSV table with a `# format_version` preamble.
pub struct CsvTable {
    text: String,
}

impl CsvTable {
    pub fn new(columns: &[&str]) -> Self {
        let mut text = format!("# format_version: {FORMAT_VERSION}\n");
        text.push_str(&columns.join(","));
        text.push('\n');
        CsvTable { text }
    }

    pub fn row(&mut self, cells: &[String]) {
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    pub fn write(&self, path: &Path) -> Result<PathBuf> {
        fs::write(path, &self.text)?;
        Ok(path.to_path_buf())
    }
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| crate::Error::Io(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(path.to_path_buf())
}

/// Header record followed by one compact record per line.
pub fn write_jsonl(path: &Path, header: &serde_json::Value, records: &[serde_json::Value]) -> Result<PathBuf> {
    let mut text = String::new();
    for v in std::iter::once(header).chain(records) {
        text.push_str(&v.to_string());
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(path.to_path_buf())
}
