//! CSV tables with a `#` comment header.

use std::io::Write;
use std::path::Path;

use crate::error::CliError;

/// Rows of numbers with named columns and free-form header notes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub notes: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { notes: Vec::new(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write_to<W: Write>(&self, header: &[String], w: W) -> Result<(), CliError> {
        let mut w = std::io::BufWriter::new(w);
        for h in header.iter().chain(&self.notes) {
            writeln!(w, "# {h}")?;
        }
        {
            let mut c = csv::Writer::from_writer(&mut w);
            c.write_record(&self.columns)?;
            for r in &self.rows {
                c.write_record(r.iter().map(|x| x.to_string()))?;
            }
            c.flush()?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_file(&self, header: &[String], path: &Path) -> Result<(), CliError> {
        let f = std::fs::File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.write_to(header, f)
    }

    /// Parse a table written by [`Table::write_to`].
    pub fn read(text: &str) -> Result<Self, CliError> {
        let mut notes = Vec::new();
        let mut body = String::new();
        for line in text.lines() {
            match line.strip_prefix('#') {
                Some(n) => notes.push(n.trim().to_string()),
                None => {
                    body.push_str(line);
                    body.push('\n');
                }
            }
        }
        let mut r = csv::Reader::from_reader(body.as_bytes());
        let columns = r.headers()?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let row: Result<Vec<f64>, _> = rec.iter().map(|v| v.parse::<f64>()).collect();
            rows.push(row.map_err(|e| CliError::Io(format!("bad number in table: {e}")))?);
        }
        Ok(Self { notes, columns, rows })
    }
}
