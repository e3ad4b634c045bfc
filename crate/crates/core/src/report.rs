//! CSV tables with a versioned header comment and JSON report envelopes.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

/// Bumped whenever any table's column contract changes.
pub const CSV_SCHEMA_VERSION: u32 = 1;

/// A named table; cells are preformatted strings.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        CsvTable { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn push_nums(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&x| num(x)).collect());
    }

    /// `# dirac-ee <name> schema v<N>` followed by the header and rows.
    pub fn render(&self) -> String {
        let mut out = format!("# dirac-ee {} schema v{CSV_SCHEMA_VERSION}\n{}\n", self.name, self.columns.join(","));
        for r in &self.rows {
            let _ = writeln!(out, "{}", r.join(","));
        }
        out
    }
}

/// Shortest round-trip decimal form, so tables are reproducible bit for bit.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Uniform JSON envelope for every command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub schema: u32,
    pub result: Value,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn new<T: Serialize>(command: &str, result: &T) -> Result<Self> {
        let result = serde_json::to_value(result).map_err(|e| Error::argument(format!("unserializable report: {e}")))?;
        Ok(Report { command: command.to_string(), schema: CSV_SCHEMA_VERSION, result, warnings: Vec::new() })
    }

    pub fn with_warnings(mut self, warnings: Vec<String>) -> Self {
        self.warnings = warnings;
        self
    }

    pub fn render(&self) -> String {
        serde_json::to_string_pretty(self).expect("report values are plain JSON") + "\n"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn csv_header_and_rows() {
        let mut t = CsvTable::new("spectrum", &["index", "eigenvalue"]);
        t.push_nums(&[0.0, 0.5]);
        t.push(vec!["1".into(), num(1e-20)]);
        assert_eq!(t.render(), "# dirac-ee spectrum schema v1\nindex,eigenvalue\n0.0,0.5\n1,1e-20\n");
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn report_is_deterministic() {
        let r = Report::new("formula", &json!({"value": 0.1, "id": "two_interval"})).unwrap();
        assert_eq!(r.render(), r.clone().render());
        assert!(r.render().contains("\"command\": \"formula\""));
    }
}
