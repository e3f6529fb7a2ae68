use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::PipelineError;
use crate::analytics::DtwParams;
use crate::ingest::LanguageConfig;
use crate::report::AgreementMode;
use crate::topics::TopicParams;

/// Language settings given inline or as a path to their own document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LanguageSource {
    Path(PathBuf),
    Inline(LanguageConfig),
}

impl Default for LanguageSource {
    fn default() -> Self {
        LanguageSource::Inline(LanguageConfig::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DbscanConfig {
    /// Fixed radius; the k-distance knee is used when absent.
    pub eps: Option<f64>,
    pub min_pts: usize,
}

impl Default for DbscanConfig {
    fn default() -> Self {
        Self { eps: None, min_pts: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KMeansSpace {
    #[default]
    Embedding,
    Original,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KMeansConfig {
    pub k_max: usize,
    pub space: KMeansSpace,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            k_max: 10,
            space: KMeansSpace::Embedding,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReportConfig {
    pub team_map: Option<PathBuf>,
    pub trials: usize,
    pub mode: AgreementMode,
    /// Keep identities made only of stub signatures.
    pub include_stubs: bool,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            team_map: None,
            trials: 1000,
            mode: AgreementMode::PerTopic,
            include_stubs: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub repos: Vec<PathBuf>,
    pub fixtures: Vec<PathBuf>,
    pub language: LanguageSource,
    pub seed: u64,
    pub saturation_percentile: f64,
    pub dtw: DtwParams,
    pub dbscan: DbscanConfig,
    pub kmeans: KMeansConfig,
    /// The fit seed is derived from `seed` and ignored here.
    pub topics: TopicParams,
    pub top_terms: usize,
    pub report: ReportConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            repos: Vec::new(),
            fixtures: Vec::new(),
            language: LanguageSource::default(),
            seed: 0,
            saturation_percentile: 95.0,
            dtw: DtwParams::default(),
            dbscan: DbscanConfig::default(),
            kmeans: KMeansConfig::default(),
            topics: TopicParams::default(),
            top_terms: 10,
            report: ReportConfig::default(),
        }
    }
}

fn config_error(message: String) -> PipelineError {
    PipelineError::new("config", message)
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl Config {
    /// Parses a YAML (or JSON) document; relative paths are taken from
    /// `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, PipelineError> {
        let mut config: Config = if text.trim().is_empty() {
            Config::default()
        } else {
            serde_yaml::from_str(text).map_err(|e| config_error(e.to_string()))?
        };
        for p in config.repos.iter_mut().chain(config.fixtures.iter_mut()) {
            resolve(base, p);
        }
        if let LanguageSource::Path(p) = &mut config.language {
            resolve(base, p);
        }
        if let Some(p) = &mut config.report.team_map {
            resolve(base, p);
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn language_config(&self) -> Result<LanguageConfig, PipelineError> {
        match &self.language {
            LanguageSource::Inline(c) => Ok(c.clone().normalized()),
            LanguageSource::Path(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| config_error(format!("cannot read {}: {e}", p.display())))?;
                let c: LanguageConfig = serde_yaml::from_str(&text)
                    .map_err(|e| config_error(format!("{}: {e}", p.display())))?;
                Ok(c.normalized())
            }
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if !(self.saturation_percentile > 0.0 && self.saturation_percentile <= 100.0) {
            return Err(config_error("saturation_percentile must be in (0, 100]".into()));
        }
        if let Some(eps) = self.dbscan.eps {
            if !(eps > 0.0) {
                return Err(config_error(format!("dbscan eps must be positive, got {eps}")));
            }
        }
        if self.dbscan.min_pts == 0 {
            return Err(config_error("dbscan min_pts must be at least 1".into()));
        }
        if self.kmeans.k_max == 0 {
            return Err(config_error("kmeans k_max must be at least 1".into()));
        }
        if self.topics.n_topics == 0 {
            return Err(config_error("topics n_topics must be at least 1".into()));
        }
        Ok(())
    }

    /// Hash of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("serializable");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_relative_paths() {
        let c = Config::parse("repos: [a]\nfixtures: [/abs/f.jsonl]\nreport: {team_map: t.yml}\n", Path::new("/base")).unwrap();
        assert_eq!(c.repos, vec![PathBuf::from("/base/a")]);
        assert_eq!(c.fixtures, vec![PathBuf::from("/abs/f.jsonl")]);
        assert_eq!(c.report.team_map, Some(PathBuf::from("/base/t.yml")));
        assert_eq!(c.dbscan.min_pts, 3);
        assert_eq!(c.kmeans.k_max, 10);
        assert_eq!(c.topics.n_topics, 10);
        assert_eq!(c.dtw.radius, 1);
    }

    #[test]
    fn inline_language_and_json() {
        let c = Config::parse(r#"{"language": {"markup": ["Go"]}, "seed": 4}"#, Path::new(".")).unwrap();
        assert_eq!(c.seed, 4);
        assert!(c.language_config().unwrap().is_markup("Go"));
        let c = Config::parse("language: langs.yml\n", Path::new("/x")).unwrap();
        assert_eq!(c.language, LanguageSource::Path(PathBuf::from("/x/langs.yml")));
    }

    #[test]
    fn rejects_bad_values() {
        assert!(Config::parse("seed: [1]", Path::new(".")).is_err());
        let c = Config::parse("dbscan: {eps: -1}", Path::new(".")).unwrap();
        assert!(c.validate().is_err());
        assert!(Config::parse("", Path::new(".")).unwrap().validate().is_ok());
    }

    #[test]
    fn hash_tracks_content() {
        let a = Config::default();
        let b = Config { seed: 1, ..Config::default() };
        assert_eq!(a.hash(), Config::default().hash());
        assert_ne!(a.hash(), b.hash());
    }
}
