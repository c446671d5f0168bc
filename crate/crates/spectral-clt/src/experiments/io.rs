//! CSV assembly and artifact writing.
//!
//! Every CSV starts with one comment line carrying the configuration hash,
//! the master seed, and the artifact format version, then a header row.
//! Fields are quoted RFC-4180 style only when they need it, rows end in a
//! bare LF, and floats use the shortest round-trip decimal form so bytes
//! are stable across runs.

use crate::error::{Error, Result};
use std::fs;
use std::path::{Path, PathBuf};

pub const ARTIFACT_VERSION: u32 = 1;

/// An in-memory CSV with a fixed column count.
pub struct Csv {
    buf: String,
    columns: usize,
}

impl Csv {
    pub fn new(config_hash: u64, seed: u64, columns: &[&str]) -> Csv {
        let mut buf =
            format!("# config_hash={config_hash:016x} seed={seed} version={ARTIFACT_VERSION}\n");
        buf.push_str(&join_row(columns.iter().map(|c| c.to_string())));
        Csv {
            buf,
            columns: columns.len(),
        }
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) {
        assert_eq!(fields.len(), self.columns, "row width against header");
        self.buf
            .push_str(&join_row(fields.iter().map(|f| f.as_ref().to_string())));
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

fn join_row(fields: impl Iterator<Item = String>) -> String {
    let escaped: Vec<String> = fields.map(|f| escape(&f)).collect();
    let mut line = escaped.join(",");
    line.push('\n');
    line
}

/// Quotes a field only when it holds a comma, quote, or line break.
fn escape(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Shortest round-trip decimal form.
pub fn fnum(x: f64) -> String {
    x.to_string()
}

/// Creates the directory if needed and writes the artifact, reporting the
/// path on failure.
pub fn write_artifact(dir: &Path, name: &str, content: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| pathed(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, content).map_err(|e| pathed(&path, e))?;
    Ok(path)
}

pub fn pathed(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(
        e.kind(),
        format!("{}: {e}", path.display()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_rows_round_trip() {
        let mut csv = Csv::new(0xabc, 42, &["n", "value"]);
        csv.row(&["100", "1.5"]);
        csv.row(&["200", "-0.25"]);
        let text = csv.finish();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# config_hash=0000000000000abc seed=42 version=1");
        assert_eq!(lines[1], "n,value");
        assert_eq!(lines[2], "100,1.5");
        assert!(text.ends_with('\n'));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn quoting_kicks_in_only_when_needed() {
        assert_eq!(escape("plain"), "plain");
        assert_eq!(escape("a,b"), "\"a,b\"");
        assert_eq!(escape("say \"hi\""), "\"say \"\"hi\"\"\"");
    }

    #[test]
    fn float_formatting_is_minimal() {
        assert_eq!(fnum(0.75), "0.75");
        assert_eq!(fnum(2.0), "2");
        assert_eq!(fnum(1.0 / 3.0), "0.3333333333333333");
    }
}
