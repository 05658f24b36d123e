//! Tables, summaries and plots produced by a command, and the code that
//! writes them with a checksummed manifest.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::config::Format;
use crate::error::{CliError, Result};

/// A CSV table; numbers are written with 17 significant digits and missing
/// values as empty fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        self.push_optional(row.into_iter().map(Some).collect());
    }

    pub fn push_optional(&mut self, row: Vec<Option<f64>>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                match cell {
                    Some(v) if v.is_finite() => {
                        let _ = write!(s, "{v:.16e}");
                    }
                    Some(v) => return Err(CliError::Numerical(format!("non-finite value {v} in column {}", self.header[i]))),
                    None => {}
                }
            }
            s.push('\n');
        }
        Ok(s)
    }
}

/// JSON summary with keys kept sorted.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary(pub Map<String, Value>);

impl Summary {
    pub fn new(command: &str) -> Self {
        let mut m = Map::new();
        m.insert("command".into(), command.into());
        Self(m)
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.0.insert(key.into(), value.into());
    }

    /// A finite number, or `null` plus `<key>_reason`.
    pub fn measured(&mut self, key: &str, value: Option<f64>, reason: &str) {
        self.0.insert(key.into(), optional(value));
        if optional(value).is_null() {
            self.0.insert(format!("{key}_reason"), reason.into());
        }
    }

    pub fn to_json(&self) -> Result<String> {
        check_finite(&Value::Object(self.0.clone()))?;
        let mut s = serde_json::to_string_pretty(&self.0).map_err(|e| CliError::Numerical(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }
}

/// `null` for missing or non-finite values.
pub fn optional(value: Option<f64>) -> Value {
    match value {
        Some(v) if v.is_finite() => v.into(),
        _ => Value::Null,
    }
}

/// Builds an object value from `(key, number)` pairs.
pub fn record(pairs: &[(&str, Value)]) -> Value {
    Value::Object(pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect())
}

fn check_finite(v: &Value) -> Result<()> {
    match v {
        Value::Number(n) if n.as_f64().is_some_and(|x| !x.is_finite()) => {
            Err(CliError::Numerical("non-finite number in summary".into()))
        }
        Value::Array(a) => a.iter().try_for_each(check_finite),
        Value::Object(o) => o.values().try_for_each(check_finite),
        _ => Ok(()),
    }
}

/// Everything a command produced, before it touches the disk.
#[derive(Debug, Default)]
pub struct Report {
    pub tables: Vec<(String, Table)>,
    pub summary: Summary,
    pub plots: Vec<(String, String)>,
    /// Files written whatever the format selection (binary waveforms).
    pub extra: Vec<(String, Vec<u8>)>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self { summary: Summary::new(command), ..Default::default() }
    }

    pub fn table(&mut self, stem: &str, table: Table) {
        self.tables.push((format!("{stem}.csv"), table));
    }

    pub fn plot(&mut self, stem: &str, svg: String) {
        self.plots.push((format!("{stem}.svg"), svg));
    }

    /// Rendered files for the selected formats, in a fixed order.
    pub fn render(&self, command: &str, formats: &[Format]) -> Result<Vec<(String, Vec<u8>)>> {
        let mut files = Vec::new();
        if formats.contains(&Format::Csv) {
            for (name, t) in &self.tables {
                files.push((name.clone(), t.to_csv()?.into_bytes()));
            }
        }
        if formats.contains(&Format::Json) {
            files.push((format!("{command}.json"), self.summary.to_json()?.into_bytes()));
        }
        if formats.contains(&Format::Svg) {
            for (name, svg) in &self.plots {
                files.push((name.clone(), svg.clone().into_bytes()));
            }
        }
        files.extend(self.extra.iter().cloned());
        Ok(files)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Writes `files` into `dir` and a `manifest.json` listing their SHA-256
/// sums, the resolved configuration and the wall-clock duration.
pub fn write_outputs(
    dir: &Path,
    command: &str,
    config_echo: &str,
    files: &[(String, Vec<u8>)],
    wall_clock: f64,
) -> Result<()> {
    let io = |what: &str, p: &Path, e: std::io::Error| CliError::Io(format!("{what} {}: {e}", p.display()));
    std::fs::create_dir_all(dir).map_err(|e| io("cannot create", dir, e))?;
    let mut listed = Vec::new();
    for (name, bytes) in files {
        let path = dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| io("cannot write", &path, e))?;
        listed.push(record(&[
            ("name", name.as_str().into()),
            ("bytes", (bytes.len() as u64).into()),
            ("sha256", sha256_hex(bytes).into()),
        ]));
    }
    let manifest = record(&[
        ("tool", "qswitch".into()),
        ("version", env!("CARGO_PKG_VERSION").into()),
        ("command", command.into()),
        ("config", config_echo.into()),
        ("files", Value::Array(listed)),
        ("wall_clock_seconds", optional(Some(wall_clock))),
    ]);
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Numerical(e.to_string()))?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| io("cannot write", &path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_seventeen_digits_and_blank_missing() {
        let mut t = Table::new(vec!["a", "b"]);
        t.push(vec![0.1, 1.0 / 3.0]);
        t.push_optional(vec![Some(2.0), None]);
        let csv = t.to_csv().unwrap();
        assert_eq!(csv, "a,b\n1.0000000000000001e-1,3.3333333333333331e-1\n2.0000000000000000e0,\n");
        t.push(vec![f64::NAN, 0.0]);
        assert!(t.to_csv().is_err());
    }

    #[test]
    fn summaries_sort_keys_and_explain_nulls() {
        let mut s = Summary::new("x");
        s.set("zeta", 1.0);
        s.measured("alpha", None, "not resolvable");
        let j = s.to_json().unwrap();
        let (a, c, z) = (j.find("alpha").unwrap(), j.find("command").unwrap(), j.find("zeta").unwrap());
        assert!(a < c && c < z);
        assert!(j.contains("\"alpha\": null"));
        assert!(j.contains("\"alpha_reason\": \"not resolvable\""));
    }

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}
