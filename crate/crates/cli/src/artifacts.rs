//! Atomic CSV/JSON artifacts and the per-run manifest.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::Failure;

/// Version of the CSV column layouts, recorded in every manifest.
pub const CSV_SCHEMA_VERSION: u32 = 1;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// 17 significant digits, enough to round-trip an `f64`.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// `temp + rename` in the target directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let io = |e: std::io::Error| Failure::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Pretty JSON with keys in sorted order.
pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, Failure> {
    // serde_json's default map is ordered by key
    let v = serde_json::to_value(value).map_err(|e| Failure::Io(e.to_string()))?;
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| Failure::Io(e.to_string()))?;
    s.push('\n');
    Ok(s.into_bytes())
}

#[derive(Clone, Debug, Serialize)]
pub struct ArtifactRecord {
    pub file: String,
    pub sha256: String,
    /// CSV header or the top-level JSON keys.
    pub columns: Vec<String>,
}

/// Output directory of one run and everything written into it.
pub struct Run {
    pub dir: PathBuf,
    pub artifacts: Vec<ArtifactRecord>,
    pub notes: Vec<String>,
    pub flags: Vec<String>,
}

impl Run {
    pub fn create(dir: &Path) -> Result<Self, Failure> {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
        Ok(Run { dir: dir.to_path_buf(), artifacts: Vec::new(), notes: Vec::new(), flags: Vec::new() })
    }

    fn record(&mut self, file: &str, bytes: &[u8], columns: Vec<String>) -> Result<(), Failure> {
        write_atomic(&self.dir.join(file), bytes)?;
        self.artifacts.push(ArtifactRecord { file: file.into(), sha256: sha256_hex(bytes), columns });
        Ok(())
    }

    pub fn csv(&mut self, file: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<(), Failure> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let err = |e: csv::Error| Failure::Io(format!("{file}: {e}"));
        w.write_record(header).map_err(err)?;
        for row in rows {
            w.write_record(row.iter().map(|&v| num(v))).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| Failure::Io(format!("{file}: {e}")))?;
        self.record(file, &bytes, header.iter().map(|s| s.to_string()).collect())
    }

    pub fn json<T: Serialize>(&mut self, file: &str, value: &T) -> Result<(), Failure> {
        let bytes = json_bytes(value)?;
        let v: Value = serde_json::to_value(value).map_err(|e| Failure::Io(e.to_string()))?;
        let columns = v.as_object().map(|m| m.keys().cloned().collect()).unwrap_or_default();
        self.record(file, &bytes, columns)
    }

    /// `manifest.json`, written last and in every outcome.
    pub fn finish<C: Serialize>(&self, command: &str, config: &C, status: &str, error: Option<&str>) -> Result<(), Failure> {
        let config = serde_json::to_value(config).map_err(|e| Failure::Io(e.to_string()))?;
        let manifest = json!({
            "tool": "rankwave",
            "library_version": rankwave::VERSION,
            "csv_schema_version": CSV_SCHEMA_VERSION,
            "command": command,
            "config": config,
            "config_sha256": sha256_hex(&json_bytes(&config)?),
            "status": status,
            "error": error,
            "artifacts": self.artifacts,
            "notes": self.notes,
            "flags": self.flags,
        });
        write_atomic(&self.dir.join("manifest.json"), &json_bytes(&manifest)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip_with_17_digits() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = num(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let mantissa = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mantissa.len(), 17);
        }
        assert_eq!(num(f64::NAN), "NaN");
    }

    #[test]
    fn json_keys_are_sorted() {
        let v = json!({"b": 1, "a": {"z": 0, "c": 2}});
        let s = String::from_utf8(json_bytes(&v).unwrap()).unwrap();
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        assert!(s.find("\"c\"").unwrap() < s.find("\"z\"").unwrap());
    }

    #[test]
    fn sha256_matches_known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
