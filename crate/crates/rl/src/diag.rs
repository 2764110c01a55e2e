//! Per-update diagnostics appended to a CSV file (one header row, then one
//! row per update).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::RlError;

pub struct DiagWriter {
    path: PathBuf,
    header: Vec<String>,
    wrote_header: bool,
}

impl DiagWriter {
    pub fn new(path: impl Into<PathBuf>, columns: &[&str]) -> Self {
        DiagWriter {
            path: path.into(),
            header: columns.iter().map(|s| s.to_string()).collect(),
            wrote_header: false,
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&mut self, values: &[f64]) -> Result<(), RlError> {
        if values.len() != self.header.len() {
            return Err(RlError::structure(format!(
                "diagnostic row has {} values for {} columns",
                values.len(),
                self.header.len()
            )));
        }
        if let Some(dir) = self.path.parent() {
            fs::create_dir_all(dir)?;
        }
        let mut f = fs::OpenOptions::new().create(true).append(true).open(&self.path)?;
        if !self.wrote_header && f.metadata()?.len() == 0 {
            writeln!(f, "{}", self.header.join(","))?;
        }
        self.wrote_header = true;
        let row: Vec<String> = values.iter().map(|v| format!("{v}")).collect();
        writeln!(f, "{}", row.join(","))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_header_once_and_rows() {
        let dir = std::env::temp_dir().join("leoris_diag_test");
        std::fs::remove_dir_all(&dir).ok();
        let path = dir.join("diag.csv");
        let mut w = DiagWriter::new(&path, &["update", "loss"]);
        w.append(&[1.0, 0.5]).unwrap();
        w.append(&[2.0, 0.25]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "update,loss");
        assert_eq!(lines.len(), 3);
        assert!(w.append(&[1.0]).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }
}
