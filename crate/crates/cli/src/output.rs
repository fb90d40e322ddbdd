//! CSV tables with a provenance comment line.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&'static str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Body without the provenance line.
    pub fn body(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    pub fn render(&self, kind: &str, hash: &str, seed: u64) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# rsft {kind} config_sha256={hash} seed={seed}");
        s + &self.body()
    }
}

/// Shortest round-trip form; identical runs give identical text.
pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn write_tables(dir: &Path, tables: &[Table], kind: &str, hash: &str, seed: u64) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    for t in tables {
        fs::write(dir.join(format!("{}.csv", t.name)), t.render(kind, hash, seed))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_header_and_rows() {
        let mut t = Table::new("x", &["a", "b"]);
        t.push(vec![num(1.0), num(0.25)]);
        let s = t.render("roc", "abc", 3);
        assert_eq!(s, "# rsft roc config_sha256=abc seed=3\na,b\n1,0.25\n");
    }
}
