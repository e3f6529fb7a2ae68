//! Per-identity feature spaces: daily commit series, per-language change
//! counts, and ownership-weighted identifier documents.

mod langmatrix;
mod series;
mod tfidf;

use std::collections::BTreeMap;

use thiserror::Error;

pub use langmatrix::{
    build_language_matrix, percentile, saturate, ChangeKind, LangColumn, LangMatrix,
};
pub use series::{build_daily_series, normalize_series, utc_day, DailySeries};
pub use tfidf::{build_developer_docs, build_file_tfidf, TermWeights};

use crate::ingest::{RepoFacts, TokenCounts};

/// Files are pooled across repositories as `(repo, path)`.
pub type FileKey = (String, String);

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("signature {0:?} does not resolve to an identity")]
    UnresolvedSignature(String),
    #[error("no file has any identifiers")]
    EmptyCorpus,
    #[error("malformed feature artifact: {0}")]
    Format(String),
}

impl From<csv::Error> for FeatureError {
    fn from(e: csv::Error) -> Self {
        FeatureError::Format(e.to_string())
    }
}

pub fn pooled_bags(repos: &[RepoFacts]) -> BTreeMap<FileKey, TokenCounts> {
    repos
        .iter()
        .flat_map(|r| {
            r.identifiers
                .iter()
                .map(move |(path, bag)| ((r.repo_name.clone(), path.clone()), bag.clone()))
        })
        .collect()
}

pub fn pooled_ownership(repos: &[RepoFacts]) -> BTreeMap<FileKey, BTreeMap<String, u64>> {
    repos
        .iter()
        .flat_map(|r| {
            r.ownership
                .paths()
                .map(move |path| ((r.repo_name.clone(), path.to_string()), r.ownership.line_counts(path)))
        })
        .collect()
}
