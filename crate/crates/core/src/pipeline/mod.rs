//! Stage orchestration over a shared workspace directory.

mod config;
mod stages;
mod workspace;

use std::fmt;

pub use config::{Config, DbscanConfig, KMeansConfig, KMeansSpace, LanguageSource, ReportConfig};
pub use stages::{AgreementFile, ClusterRow, SeriesRecord, SignatureIndex, Stage, TeamRecovery};
pub use workspace::{Manifest, StageRecord, Workspace, MANIFEST};

/// A failure tagged with the stage that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineError {
    pub stage: String,
    pub message: String,
}

impl PipelineError {
    pub fn new(stage: &str, message: impl Into<String>) -> Self {
        Self {
            stage: stage.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} stage failed: {}", self.stage, self.message)
    }
}

impl std::error::Error for PipelineError {}

/// Runs one stage and records it in the manifest.
pub fn run_stage(stage: Stage, config: &Config, ws: &Workspace) -> Result<(), PipelineError> {
    config.validate()?;
    log::info!("running {}", stage.name());
    let artifacts = stage.run(config, ws)?;
    ws.record_stage(stage.name(), &artifacts, config.seed, &config.hash())
}

/// Runs every stage in order, stopping at the first failure.
pub fn run_pipeline(config: &Config, ws: &Workspace) -> Result<(), PipelineError> {
    for stage in Stage::ALL {
        run_stage(stage, config, ws)?;
    }
    Ok(())
}
