//! Commit history ingestion: Git replay, fixture loading, and the per-file
//! facts (languages, line ownership, identifier bags) derived from it.

mod diff;
mod facts;
mod git;
mod history;
mod identifiers;
mod language;
mod ownership;
mod types;

use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

pub use diff::{classify_hunks, diff_lines, ChangeCounts, EditScript, Hunk};
pub use facts::{load_commit_facts, parse_commit_facts, write_commit_facts};
pub use git::{is_binary, scan_repository, split_lines};
pub use history::{linearize_history, CommitGraph};
pub use identifiers::{extract_identifiers, split_identifier};
pub use language::{detect_language, Language, LanguageConfig};
pub use ownership::update_ownership;
pub use types::{
    signature_key, CommitRecord, FileChange, IdentifierBags, OwnershipMap, RepoFacts, TokenCounts,
};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path} is not a git repository: {message}")]
    NotARepository { path: String, message: String },
    #[error("repository {0} has no commits")]
    EmptyRepository(String),
    #[error("cannot read object {object}: {message}")]
    UnreadableObject { object: String, message: String },
    #[error("commit {0} is missing from the history")]
    MissingObject(String),
    #[error("history cycle through commit {0}")]
    HistoryCycle(String),
    #[error("ownership of {path} tracks {tracked} lines, expected {expected}")]
    OwnershipMismatch {
        path: String,
        tracked: usize,
        expected: usize,
    },
    #[error("line {line}: field `{field}`: {message}")]
    Schema {
        line: usize,
        field: String,
        message: String,
    },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Invalid(String),
}

/// Scans several repositories in parallel, keeping input order. The error of
/// the first failing repository is reported together with its path.
pub fn scan_repositories<P: AsRef<Path> + Sync>(
    paths: &[P],
    config: &LanguageConfig,
) -> Result<Vec<RepoFacts>, (String, IngestError)> {
    paths
        .par_iter()
        .map(|p| scan_repository(p.as_ref(), config).map_err(|e| (p.as_ref().display().to_string(), e)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}
