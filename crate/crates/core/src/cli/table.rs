//! CSV tables carrying a `# config_hash=… seed=…` provenance line.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stamp {
    pub config_hash: String,
    pub seed: u64,
}

impl Stamp {
    pub fn line(&self) -> String {
        format!("# config_hash={} seed={}", self.config_hash, self.seed)
    }

    pub fn parse_line(line: &str) -> Result<Self> {
        let bad = || Error::ArtifactMismatch(format!("malformed stamp line: {line:?}"));
        let rest = line.strip_prefix("# ").ok_or_else(bad)?;
        let mut hash = None;
        let mut seed = None;
        for field in rest.split_whitespace() {
            match field.split_once('=') {
                Some(("config_hash", v)) if hash.is_none() && !v.is_empty() => hash = Some(v.to_string()),
                Some(("seed", v)) if seed.is_none() => seed = Some(v.parse::<u64>().map_err(|_| bad())?),
                _ => return Err(bad()),
            }
        }
        Ok(Self { config_hash: hash.ok_or_else(bad)?, seed: seed.ok_or_else(bad)? })
    }
}

/// An in-memory table. Cells are plain tokens: no quoting is supported, so
/// cells must not contain commas or newlines.
#[derive(Debug, Clone, PartialEq)]
pub struct StampedCsv {
    pub stamp: Stamp,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl StampedCsv {
    pub fn new(stamp: Stamp, header: &[&str]) -> Self {
        Self { stamp, header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push<I, T>(&mut self, cells: I)
    where
        I: IntoIterator<Item = T>,
        T: ToString,
    {
        let row: Vec<String> = cells.into_iter().map(|c| c.to_string()).collect();
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.stamp.line());
        let _ = writeln!(out, "{}", self.header.join(","));
        for r in &self.rows {
            let _ = writeln!(out, "{}", r.join(","));
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        // `lines` strips CRLF endings; any other carriage return is corrupt.
        if text.lines().any(|l| l.contains('\r')) {
            return Err(Error::ArtifactMismatch("stray carriage return".into()));
        }
        let mut lines = text.lines();
        let stamp = Stamp::parse_line(lines.next().ok_or_else(|| Error::ArtifactMismatch("empty table".into()))?)?;
        let header_line = lines.next().ok_or_else(|| Error::ArtifactMismatch("table has no header".into()))?;
        let header: Vec<String> = header_line.split(',').map(str::to_string).collect();
        if header.iter().any(String::is_empty) {
            return Err(Error::ArtifactMismatch("empty column name".into()));
        }
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate() {
            let row: Vec<String> = line.split(',').map(str::to_string).collect();
            if row.len() != header.len() {
                return Err(Error::ArtifactMismatch(format!(
                    "row {} has {} cells, header has {}",
                    n + 1,
                    row.len(),
                    header.len()
                )));
            }
            rows.push(row);
        }
        Ok(Self { stamp, header, rows })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ArtifactMismatch(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::ArtifactMismatch(format!("missing column {name}")))
    }

    pub fn numbers(&self, name: &str) -> Result<Vec<f64>> {
        let c = self.column(name)?;
        self.rows
            .iter()
            .map(|r| {
                r[c].parse::<f64>().map_err(|_| Error::ArtifactMismatch(format!("non-numeric {name} cell {:?}", r[c])))
            })
            .collect()
    }
}
