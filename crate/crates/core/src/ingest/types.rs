use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// One commit on the linearized history of a repository.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitRecord {
    pub repo_name: String,
    pub hash: String,
    pub author_name: String,
    pub author_email: String,
    /// Seconds since the Unix epoch, UTC.
    pub authored_at: i64,
    pub parent_hashes: Vec<String>,
    pub changes: Vec<FileChange>,
}

impl CommitRecord {
    /// Key of the author signature, see [`signature_key`].
    pub fn author_key(&self) -> String {
        signature_key(&self.author_name, &self.author_email)
    }
}

/// Canonical string form of a `(name, email)` author signature.
///
/// Emails are lowercased; names are kept verbatim.
pub fn signature_key(name: &str, email: &str) -> String {
    format!("{} <{}>", name.trim(), email.trim().to_lowercase())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileChange {
    pub path: String,
    pub language: Option<String>,
    pub lines_added: u64,
    pub lines_deleted: u64,
    pub lines_modified: u64,
}

/// Last editor of every current line, per file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OwnershipMap {
    files: BTreeMap<String, Vec<String>>,
}

impl OwnershipMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, path: &str) -> Option<&[String]> {
        self.files.get(path).map(Vec::as_slice)
    }

    pub fn insert(&mut self, path: impl Into<String>, owners: Vec<String>) {
        self.files.insert(path.into(), owners);
    }

    pub fn remove(&mut self, path: &str) -> Option<Vec<String>> {
        self.files.remove(path)
    }

    pub fn paths(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.files.iter().map(|(p, o)| (p.as_str(), o.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    /// Number of lines each owner holds in `path`.
    pub fn line_counts(&self, path: &str) -> BTreeMap<String, u64> {
        let mut counts = BTreeMap::new();
        if let Some(owners) = self.files.get(path) {
            for owner in owners {
                *counts.entry(owner.clone()).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Rebuilds a line sequence from per-owner counts. Line order is not
    /// recoverable from counts, so owners are laid out in key order.
    pub fn insert_counts(&mut self, path: impl Into<String>, counts: &BTreeMap<String, u64>) {
        let mut owners = Vec::new();
        for (owner, &n) in counts {
            owners.extend(std::iter::repeat_n(owner.clone(), n as usize));
        }
        self.files.insert(path.into(), owners);
    }
}

/// Normalized identifier token counts.
pub type TokenCounts = BTreeMap<String, u64>;

/// Identifier bags for every file of a snapshot.
pub type IdentifierBags = BTreeMap<String, TokenCounts>;

/// Everything gathered from one repository: the linearized commits plus the
/// state of the files at the head of the default branch.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RepoFacts {
    pub repo_name: String,
    pub commits: Vec<CommitRecord>,
    pub ownership: OwnershipMap,
    pub identifiers: IdentifierBags,
    /// Detected language of every file present at head.
    pub languages: BTreeMap<String, Option<String>>,
}
