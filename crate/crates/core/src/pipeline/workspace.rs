use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::PipelineError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    /// Unix seconds.
    pub completed_at: u64,
    pub artifacts: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub seed: u64,
    pub config_hash: String,
    pub stages: BTreeMap<String, StageRecord>,
}

/// Directory holding every stage artifact plus `manifest.json`.
#[derive(Debug, Clone)]
pub struct Workspace {
    root: PathBuf,
}

pub const MANIFEST: &str = "manifest.json";

fn io_error(stage: &str, path: &Path, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::new(stage, format!("{}: {e}", path.display()))
}

/// Writes through a temporary sibling and a rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

impl Workspace {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, PipelineError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| io_error("workspace", &root, e))?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn exists(&self, name: &str) -> bool {
        self.path(name).is_file()
    }

    pub fn read_text(&self, stage: &str, name: &str) -> Result<String, PipelineError> {
        let path = self.path(name);
        fs::read_to_string(&path).map_err(|e| {
            io_error(stage, &path, format!("{e} (run the stage that produces {name} first)"))
        })
    }

    pub fn read_json<T: DeserializeOwned>(&self, stage: &str, name: &str) -> Result<T, PipelineError> {
        let text = self.read_text(stage, name)?;
        serde_json::from_str(&text).map_err(|e| io_error(stage, &self.path(name), e))
    }

    pub fn write_text(&self, stage: &str, name: &str, text: &str) -> Result<(), PipelineError> {
        let path = self.path(name);
        write_atomic(&path, text.as_bytes()).map_err(|e| io_error(stage, &path, e))
    }

    pub fn write_json<T: Serialize>(&self, stage: &str, name: &str, value: &T) -> Result<(), PipelineError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| PipelineError::new(stage, e.to_string()))?;
        text.push('\n');
        self.write_text(stage, name, &text)
    }

    pub fn manifest(&self) -> Result<Manifest, PipelineError> {
        if !self.exists(MANIFEST) {
            return Ok(Manifest::default());
        }
        self.read_json("workspace", MANIFEST)
    }

    /// Records a finished stage in the manifest.
    pub fn record_stage(
        &self,
        stage: &str,
        artifacts: &[&str],
        seed: u64,
        config_hash: &str,
    ) -> Result<(), PipelineError> {
        let mut manifest = self.manifest()?;
        manifest.tool_version = env!("CARGO_PKG_VERSION").to_string();
        manifest.seed = seed;
        manifest.config_hash = config_hash.to_string();
        let completed_at = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        manifest.stages.insert(
            stage.to_string(),
            StageRecord {
                completed_at,
                artifacts: artifacts.iter().map(|a| a.to_string()).collect(),
            },
        );
        self.write_json("workspace", MANIFEST, &manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_accumulates_stages() {
        let dir = tempfile::tempdir().unwrap();
        let ws = Workspace::open(dir.path().join("ws")).unwrap();
        ws.record_stage("ingest", &["commits.jsonl"], 3, "abc").unwrap();
        ws.record_stage("features", &["series.json"], 3, "abc").unwrap();
        let m = ws.manifest().unwrap();
        assert_eq!(m.seed, 3);
        assert_eq!(m.stages.len(), 2);
        assert_eq!(m.stages["ingest"].artifacts, vec!["commits.jsonl"]);
        assert!(!ws.exists("manifest.tmp"));
    }

    #[test]
    fn missing_artifact_names_the_stage() {
        let dir = tempfile::tempdir().unwrap();
        let ws = Workspace::open(dir.path()).unwrap();
        let err = ws.read_text("features", "commits.jsonl").unwrap_err();
        assert!(err.to_string().contains("features"));
    }
}
