//! Labelled-manifest files: a JSON list of `{"path": ..., "label": "present"|"absent"}`.
//!
//! Paths are resolved relative to the manifest's directory. Generated
//! corpora add provenance fields (split, kind, seed, generator, rng, sha256)
//! that readers may ignore.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::map::ResponseMap;
use crate::synth::{Label, SyntheticKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub label: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<SyntheticKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sha256: Option<String>,
}

impl ManifestEntry {
    pub fn new(path: impl Into<String>, label: Label) -> Self {
        Self {
            path: path.into(),
            label,
            split: None,
            kind: None,
            seed: None,
            generator: None,
            rng: None,
            sha256: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub base_dir: PathBuf,
    pub entries: Vec<ManifestEntry>,
}

/// A map loaded from a manifest, identified by its manifest path string.
#[derive(Debug, Clone)]
pub struct LoadedSample {
    pub id: String,
    pub map: ResponseMap,
    pub label: Label,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Manifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let entries: Vec<ManifestEntry> =
            serde_json::from_str(&text).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                message: format!("malformed manifest: {e}"),
            })?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self { base_dir, entries })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.entries).expect("manifest entries serialize")
    }

    /// Writes the manifest and returns the SHA-256 of the written bytes.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<String> {
        let path = path.as_ref();
        let mut text = self.to_json_string();
        text.push('\n');
        fs::write(path, &text).map_err(|e| Error::io(path, e))?;
        Ok(sha256_hex(text.as_bytes()))
    }

    pub fn resolve(&self, entry: &ManifestEntry) -> PathBuf {
        self.base_dir.join(&entry.path)
    }

    /// Keeps only entries of the named split.
    pub fn with_split(&self, split: &str) -> Self {
        Self {
            base_dir: self.base_dir.clone(),
            entries: self
                .entries
                .iter()
                .filter(|e| e.split.as_deref() == Some(split))
                .cloned()
                .collect(),
        }
    }

    pub fn count(&self, label: Label) -> usize {
        self.entries.iter().filter(|e| e.label == label).count()
    }

    /// Loads every referenced map in parallel, preserving manifest order.
    pub fn load_samples(&self) -> Result<Vec<LoadedSample>> {
        self.entries
            .par_iter()
            .map(|e| {
                Ok(LoadedSample {
                    id: e.path.clone(),
                    map: ResponseMap::load(self.resolve(e))?,
                    label: e.label,
                })
            })
            .collect()
    }
}
