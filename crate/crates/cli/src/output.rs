use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Version stamped into every CSV header line; bump when columns change.
pub const CSV_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Collects every file a run writes, with its content hash.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<FileRecord>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl OutputDir {
    pub fn create(root: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(root)?;
        // fail early on read-only targets instead of after a long solve
        let probe = root.join(".write-test");
        fs::write(&probe, b"")?;
        fs::remove_file(&probe)?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn files(&self) -> &[FileRecord] {
        &self.files
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> std::io::Result<()> {
        let mut f = fs::File::create(self.root.join(name))?;
        f.write_all(bytes)?;
        self.files.push(FileRecord {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
        Ok(())
    }

    /// CSV with a `# culling-csv schema=<schema> version=<n>` first line.
    pub fn csv<T: Serialize>(&mut self, name: &str, schema: &str, rows: &[T]) -> std::io::Result<()> {
        let mut buf = format!("# culling-csv schema={schema} version={CSV_SCHEMA_VERSION}\n").into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            for row in rows {
                w.serialize(row).map_err(std::io::Error::other)?;
            }
            w.flush()?;
        }
        self.write(name, &buf)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Writes `manifest.json`, which lists every other file but not itself.
    pub fn finish<T: Serialize>(self, manifest: &T) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(manifest).map_err(std::io::Error::other)?;
        text.push('\n');
        fs::write(self.root.join("manifest.json"), text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        a: f64,
        b: Option<usize>,
    }

    #[test]
    fn csv_has_versioned_header_and_hash() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path()).unwrap();
        out.csv("t.csv", "test", &[Row { a: 1.5, b: None }, Row { a: 2.0, b: Some(3) }])
            .unwrap();
        let text = fs::read_to_string(dir.path().join("t.csv")).unwrap();
        assert_eq!(text, "# culling-csv schema=test version=1\na,b\n1.5,\n2.0,3\n");
        assert_eq!(out.files()[0].sha256, sha256_hex(text.as_bytes()));
    }
}
