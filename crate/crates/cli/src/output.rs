//! Output plumbing: schema-stamped CSV tables, atomic file writes, and
//! SHA-256 helpers for the ensemble manifest.
//!
//! Every CSV starts with a comment line `# hexglass-csv <name> v<N>
//! schema=<16 hex>` where the hash digests the schema name, version, and
//! column list — consumers can cheaply verify they are reading the layout
//! they were written against. Rows never contain timestamps or wall times,
//! so identical configurations reproduce every table byte-for-byte.

use std::fmt::Display;
use std::path::Path;

use anyhow::Context;
use sha2::{Digest, Sha256};

/// Hex SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let out = h.finalize();
    let mut s = String::with_capacity(64);
    for b in out {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

/// Write `bytes` to `path` atomically: write a sibling temp file, then
/// rename over the target. Readers never observe a half-written file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    let file_name = path
        .file_name()
        .and_then(|n| n.to_str())
        .context("output path has no file name")?;
    let tmp = dir.join(format!(".{file_name}.tmp-{}", std::process::id()));
    std::fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path)
        .with_context(|| format!("renaming into place: {}", path.display()))?;
    Ok(())
}

/// An in-memory CSV with a versioned, hash-stamped schema header.
pub struct CsvTable {
    name: &'static str,
    version: u32,
    columns: &'static [&'static str],
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(name: &'static str, version: u32, columns: &'static [&'static str]) -> Self {
        Self {
            name,
            version,
            columns,
            rows: Vec::new(),
        }
    }

    /// Stable identifier of (name, version, column list).
    pub fn schema_hash(&self) -> String {
        let descriptor = format!("{} v{}\n{}", self.name, self.version, self.columns.join(","));
        sha256_hex(descriptor.as_bytes())[..16].to_string()
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width does not match schema {}",
            self.name
        );
        self.rows.push(row);
    }

    /// Render the full file: the schema comment, the header, the rows.
    pub fn to_bytes(&self) -> anyhow::Result<Vec<u8>> {
        let mut buf = Vec::new();
        buf.extend_from_slice(
            format!(
                "# hexglass-csv {} v{} schema={}\n",
                self.name,
                self.version,
                self.schema_hash()
            )
            .as_bytes(),
        );
        let mut writer = csv::Writer::from_writer(buf);
        writer.write_record(self.columns)?;
        for row in &self.rows {
            writer.write_record(row)?;
        }
        Ok(writer.into_inner()?)
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        atomic_write(path, &self.to_bytes()?)
    }
}

/// Shortest-round-trip decimal rendering (Rust's float Display), used for
/// every floating-point cell so reruns match byte-for-byte.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Semicolon-joined list cell (CSV-safe without quoting).
pub fn fmt_list<T: Display>(values: &[T]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

/// Serialize a JSON value with a stable 2-space layout and write it
/// atomically.
pub fn write_json(path: &Path, value: &serde_json::Value) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    atomic_write(path, format!("{text}\n").as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_hash_tracks_layout() {
        let a = CsvTable::new("demo", 1, &["x", "y"]);
        let b = CsvTable::new("demo", 1, &["x", "z"]);
        let c = CsvTable::new("demo", 2, &["x", "y"]);
        assert_ne!(a.schema_hash(), b.schema_hash());
        assert_ne!(a.schema_hash(), c.schema_hash());
        assert_eq!(a.schema_hash(), CsvTable::new("demo", 1, &["x", "y"]).schema_hash());
        assert_eq!(a.schema_hash().len(), 16);
    }

    #[test]
    fn rendered_table_contains_header_and_rows() {
        let mut t = CsvTable::new("demo", 1, &["x", "y"]);
        t.push_row(vec!["1".into(), fmt_f64(0.5)]);
        let text = String::from_utf8(t.to_bytes().unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# hexglass-csv demo v1 schema="));
        assert_eq!(lines[1], "x,y");
        assert_eq!(lines[2], "1,0.5");
    }

    #[test]
    fn atomic_write_replaces_existing_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("file.txt");
        atomic_write(&path, b"one").unwrap();
        atomic_write(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        // No temp litter left behind.
        let names: Vec<_> = std::fs::read_dir(path.parent().unwrap())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(names.len(), 1);
    }

    #[test]
    fn float_cells_round_trip() {
        for v in [0.1, -3.25, 1e-12, std::f64::consts::PI] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }
}
