//! Dataset manifest: the index of generated asset files.

use crate::error::{Error, Result};
use crate::math::round_sig;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    /// Path relative to the manifest's directory.
    pub path: String,
    pub part_count: usize,
    pub volume_fractions: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub version: u32,
    pub seed: u64,
    pub generator: String,
    pub assets: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn new(seed: u64, generator: impl Into<String>) -> DatasetManifest {
        DatasetManifest {
            version: MANIFEST_VERSION,
            seed,
            generator: generator.into(),
            assets: Vec::new(),
        }
    }

    pub fn push(&mut self, id: String, path: String, part_count: usize, fractions: &[f64]) {
        self.assets.push(ManifestEntry {
            id,
            path,
            part_count,
            volume_fractions: fractions.iter().map(|&f| round_sig(f, 9)).collect(),
        });
    }

    /// Check fraction sums and that every referenced file exists under `root`.
    pub fn validate(&self, root: &Path) -> Result<()> {
        for entry in &self.assets {
            let sum: f64 = entry.volume_fractions.iter().sum();
            if sum > 1.0 + 1e-6 {
                return Err(Error::InvalidInput(format!(
                    "asset {}: volume fractions sum to {sum} > 1",
                    entry.id
                )));
            }
            if entry.volume_fractions.len() != entry.part_count {
                return Err(Error::InvalidInput(format!(
                    "asset {}: fraction count does not match part count",
                    entry.id
                )));
            }
            let path = root.join(&entry.path);
            if !path.exists() {
                return Err(Error::MissingInput { path });
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<DatasetManifest> {
        let text = std::fs::read_to_string(path).map_err(|_| Error::MissingInput {
            path: path.to_path_buf(),
        })?;
        let m: DatasetManifest = serde_json::from_str(&text)?;
        if m.version != MANIFEST_VERSION {
            return Err(Error::BadFormat(format!(
                "unsupported manifest version {}",
                m.version
            )));
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_file_detected() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = DatasetManifest::new(0, "test");
        m.push("a".into(), "a.json".into(), 2, &[0.5, 0.5]);
        assert!(matches!(
            m.validate(dir.path()),
            Err(Error::MissingInput { .. })
        ));
        std::fs::write(dir.path().join("a.json"), "{}").unwrap();
        m.validate(dir.path()).unwrap();
    }

    #[test]
    fn fraction_sum_checked() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.json"), "{}").unwrap();
        let mut m = DatasetManifest::new(0, "test");
        m.push("a".into(), "a.json".into(), 2, &[0.7, 0.7]);
        assert!(m.validate(dir.path()).is_err());
    }
}
