//! Line-delimited commit-facts files.
//!
//! Each non-blank line is one JSON object: either a commit
//!
//! ```text
//! {"repo":..,"hash":..,"author_name":..,"author_email":..,"authored_at":..,
//!  "parents":[..],"changes":[{"path":..,"language":..,"added":..,"deleted":..,"modified":..}]}
//! ```
//!
//! or a snapshot of the head state,
//! `{"snapshot":{"files":[{"repo":..,"path":..,"language":..,"identifiers":{..},"owners":{..}}]}}`.
//! `repo` may be omitted on snapshot files when the file holds a single repository.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use super::types::{CommitRecord, FileChange, RepoFacts, TokenCounts};
use super::IngestError;

pub fn load_commit_facts(path: &Path) -> Result<Vec<RepoFacts>, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|e| IngestError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_commit_facts(&text)
}

struct Line<'a> {
    number: usize,
    obj: &'a Map<String, Value>,
}

impl<'a> Line<'a> {
    fn err(&self, field: &str, message: impl Into<String>) -> IngestError {
        IngestError::Schema {
            line: self.number,
            field: field.to_string(),
            message: message.into(),
        }
    }

    fn field(&self, name: &str) -> Result<&'a Value, IngestError> {
        self.obj.get(name).ok_or_else(|| self.err(name, "missing"))
    }

    fn string(&self, name: &str) -> Result<String, IngestError> {
        self.field(name)?
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| self.err(name, "expected a string"))
    }

    fn count(&self, value: &Value, name: &str) -> Result<u64, IngestError> {
        value
            .as_u64()
            .ok_or_else(|| self.err(name, "expected a non-negative integer"))
    }

    fn optional_string(&self, value: Option<&Value>, name: &str) -> Result<Option<String>, IngestError> {
        match value {
            None | Some(Value::Null) => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(self.err(name, "expected a string or null")),
        }
    }

    fn counts_map(&self, value: &Value, name: &str, min: u64) -> Result<BTreeMap<String, u64>, IngestError> {
        let obj = value
            .as_object()
            .ok_or_else(|| self.err(name, "expected an object"))?;
        let mut out = BTreeMap::new();
        for (key, v) in obj {
            let n = self.count(v, name)?;
            if n < min {
                return Err(self.err(name, format!("count for {key:?} must be >= {min}")));
            }
            out.insert(key.clone(), n);
        }
        Ok(out)
    }
}

fn is_hex_hash(s: &str) -> bool {
    s.len() == 40 && s.bytes().all(|b| b.is_ascii_hexdigit())
}

fn parse_commit(line: &Line) -> Result<CommitRecord, IngestError> {
    let hash = line.string("hash")?;
    if !is_hex_hash(&hash) {
        return Err(line.err("hash", "expected 40 hex characters"));
    }
    let authored_at = line
        .field("authored_at")?
        .as_i64()
        .filter(|&t| t >= 0)
        .ok_or_else(|| line.err("authored_at", "expected a non-negative integer"))?;
    let parents = line
        .field("parents")?
        .as_array()
        .ok_or_else(|| line.err("parents", "expected an array"))?
        .iter()
        .map(|p| {
            p.as_str()
                .filter(|s| is_hex_hash(s))
                .map(str::to_string)
                .ok_or_else(|| line.err("parents", "expected 40-hex strings"))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut changes = Vec::new();
    let mut paths = HashSet::new();
    let raw_changes = line
        .field("changes")?
        .as_array()
        .ok_or_else(|| line.err("changes", "expected an array"))?;
    for raw in raw_changes {
        let obj = raw
            .as_object()
            .ok_or_else(|| line.err("changes", "expected objects"))?;
        let change = Line {
            number: line.number,
            obj,
        };
        let path = change.string("path")?;
        if !paths.insert(path.clone()) {
            return Err(line.err("path", format!("duplicate change path {path:?}")));
        }
        changes.push(FileChange {
            language: change.optional_string(obj.get("language"), "language")?,
            lines_added: change.count(change.field("added")?, "added")?,
            lines_deleted: change.count(change.field("deleted")?, "deleted")?,
            lines_modified: change.count(change.field("modified")?, "modified")?,
            path,
        });
    }

    Ok(CommitRecord {
        repo_name: line.string("repo")?,
        hash,
        author_name: line.string("author_name")?,
        author_email: line.string("author_email")?,
        authored_at,
        parent_hashes: parents,
        changes,
    })
}

struct SnapshotFile {
    repo: Option<String>,
    path: String,
    language: Option<String>,
    identifiers: TokenCounts,
    owners: BTreeMap<String, u64>,
}

fn parse_snapshot(line: &Line, snapshot: &Value) -> Result<Vec<SnapshotFile>, IngestError> {
    let files = snapshot
        .get("files")
        .and_then(Value::as_array)
        .ok_or_else(|| line.err("snapshot.files", "expected an array"))?;
    let mut out = Vec::new();
    for raw in files {
        let obj = raw
            .as_object()
            .ok_or_else(|| line.err("snapshot.files", "expected objects"))?;
        let file = Line {
            number: line.number,
            obj,
        };
        let empty = Value::Object(Map::new());
        out.push(SnapshotFile {
            repo: file.optional_string(obj.get("repo"), "repo")?,
            path: file.string("path")?,
            language: file.optional_string(obj.get("language"), "language")?,
            identifiers: file.counts_map(obj.get("identifiers").unwrap_or(&empty), "identifiers", 1)?,
            owners: file.counts_map(obj.get("owners").unwrap_or(&empty), "owners", 0)?,
        });
    }
    Ok(out)
}

/// Parses commit-facts text, grouping records by repository in order of
/// first appearance.
pub fn parse_commit_facts(text: &str) -> Result<Vec<RepoFacts>, IngestError> {
    let mut repos: Vec<RepoFacts> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut hashes: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut snapshot_files = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let number = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(raw).map_err(|e| IngestError::Schema {
            line: number,
            field: "(record)".to_string(),
            message: e.to_string(),
        })?;
        let obj = value.as_object().ok_or_else(|| IngestError::Schema {
            line: number,
            field: "(record)".to_string(),
            message: "expected a JSON object".to_string(),
        })?;
        let line = Line { number, obj };
        if let Some(snapshot) = obj.get("snapshot") {
            for file in parse_snapshot(&line, snapshot)? {
                snapshot_files.push((number, file));
            }
            continue;
        }
        let commit = parse_commit(&line)?;
        if !hashes
            .entry(commit.repo_name.clone())
            .or_default()
            .insert(commit.hash.clone())
        {
            return Err(line.err("hash", format!("duplicate hash {}", commit.hash)));
        }
        let slot = *index.entry(commit.repo_name.clone()).or_insert_with(|| {
            repos.push(RepoFacts {
                repo_name: commit.repo_name.clone(),
                ..RepoFacts::default()
            });
            repos.len() - 1
        });
        repos[slot].commits.push(commit);
    }

    for (number, file) in snapshot_files {
        let slot = match &file.repo {
            Some(name) => index.get(name).copied(),
            None if repos.len() == 1 => Some(0),
            None => None,
        }
        .ok_or_else(|| IngestError::Schema {
            line: number,
            field: "repo".to_string(),
            message: format!("snapshot file {:?} does not name a known repository", file.path),
        })?;
        let facts = &mut repos[slot];
        facts.languages.insert(file.path.clone(), file.language);
        if !file.identifiers.is_empty() {
            facts.identifiers.insert(file.path.clone(), file.identifiers);
        }
        facts.ownership.insert_counts(file.path, &file.owners);
    }
    Ok(repos)
}

#[derive(Serialize)]
struct ChangeOut<'a> {
    path: &'a str,
    language: &'a Option<String>,
    added: u64,
    deleted: u64,
    modified: u64,
}

#[derive(Serialize)]
struct CommitOut<'a> {
    repo: &'a str,
    hash: &'a str,
    author_name: &'a str,
    author_email: &'a str,
    authored_at: i64,
    parents: &'a [String],
    changes: Vec<ChangeOut<'a>>,
}

#[derive(Serialize)]
struct FileOut<'a> {
    repo: &'a str,
    path: &'a str,
    language: Option<&'a String>,
    identifiers: TokenCounts,
    owners: BTreeMap<String, u64>,
}

/// Serializes repositories back into the commit-facts format. Ownership is
/// written as per-owner line counts.
pub fn write_commit_facts(repos: &[RepoFacts]) -> String {
    let mut out = String::new();
    for facts in repos {
        for c in &facts.commits {
            let record = CommitOut {
                repo: &c.repo_name,
                hash: &c.hash,
                author_name: &c.author_name,
                author_email: &c.author_email,
                authored_at: c.authored_at,
                parents: &c.parent_hashes,
                changes: c
                    .changes
                    .iter()
                    .map(|ch| ChangeOut {
                        path: &ch.path,
                        language: &ch.language,
                        added: ch.lines_added,
                        deleted: ch.lines_deleted,
                        modified: ch.lines_modified,
                    })
                    .collect(),
            };
            out.push_str(&serde_json::to_string(&record).expect("serializable"));
            out.push('\n');
        }
    }

    let mut files = Vec::new();
    for facts in repos {
        let paths: BTreeSet<&str> = facts
            .languages
            .keys()
            .map(String::as_str)
            .chain(facts.ownership.paths())
            .chain(facts.identifiers.keys().map(String::as_str))
            .collect();
        for path in paths {
            files.push(FileOut {
                repo: &facts.repo_name,
                path,
                language: facts.languages.get(path).and_then(Option::as_ref),
                identifiers: facts.identifiers.get(path).cloned().unwrap_or_default(),
                owners: facts.ownership.line_counts(path),
            });
        }
    }
    if !files.is_empty() {
        let snapshot = serde_json::json!({ "snapshot": { "files": files } });
        out.push_str(&serde_json::to_string(&snapshot).expect("serializable"));
        out.push('\n');
    }
    out
}
