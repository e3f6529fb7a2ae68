//! Replays the first-parent history of a Git repository.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use git2::{Delta, DiffOptions, ErrorCode, FileMode, ObjectType, Oid, Repository, Tree, TreeWalkMode, TreeWalkResult};

use super::diff::{classify_hunks, diff_lines};
use super::history::{linearize_history, CommitGraph};
use super::identifiers::extract_identifiers;
use super::language::{detect_language, LanguageConfig};
use super::ownership::update_ownership;
use super::types::{signature_key, CommitRecord, FileChange, OwnershipMap, RepoFacts};
use super::IngestError;

/// Bytes inspected for a NUL when deciding whether a blob is binary.
const BINARY_PROBE_LEN: usize = 8000;
/// Blobs above this size are not tokenized.
const MAX_IDENTIFIER_BLOB: usize = 1 << 20;

pub fn is_binary(content: &[u8]) -> bool {
    content[..content.len().min(BINARY_PROBE_LEN)].contains(&0)
}

/// Splits on `\n`; a trailing newline does not start an extra line.
pub fn split_lines(content: &[u8]) -> Vec<&[u8]> {
    if content.is_empty() {
        return Vec::new();
    }
    let body = content.strip_suffix(b"\n").unwrap_or(content);
    body.split(|&b| b == b'\n').collect()
}

fn repo_name_of(path: &Path) -> String {
    let canonical = path.canonicalize().unwrap_or_else(|_| path.to_path_buf());
    let name = canonical
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    name.strip_suffix(".git").map(str::to_string).unwrap_or(name)
}

struct Scanner<'r> {
    repo: &'r Repository,
    config: &'r LanguageConfig,
}

impl<'r> Scanner<'r> {
    fn blob(&self, oid: Oid) -> Result<git2::Blob<'r>, IngestError> {
        self.repo
            .find_blob(oid)
            .map_err(|e| IngestError::UnreadableObject {
                object: oid.to_string(),
                message: e.message().to_string(),
            })
    }

    fn commit(&self, hash: &str) -> Result<git2::Commit<'r>, IngestError> {
        let unreadable = |e: git2::Error| IngestError::UnreadableObject {
            object: hash.to_string(),
            message: e.message().to_string(),
        };
        let oid = Oid::from_str(hash).map_err(unreadable)?;
        self.repo.find_commit(oid).map_err(unreadable)
    }

    fn graph(&self, head: Oid) -> Result<CommitGraph, IngestError> {
        let mut graph = CommitGraph {
            head: head.to_string(),
            parents: BTreeMap::new(),
        };
        let mut next = Some(head);
        while let Some(oid) = next {
            let hash = oid.to_string();
            if graph.parents.contains_key(&hash) {
                break;
            }
            let commit = self.commit(&hash)?;
            let parents: Vec<Oid> = commit.parent_ids().collect();
            next = parents.first().copied();
            graph
                .parents
                .insert(hash, parents.iter().map(Oid::to_string).collect());
        }
        Ok(graph)
    }

    fn tree_of(&self, commit: &git2::Commit<'r>) -> Result<Tree<'r>, IngestError> {
        commit.tree().map_err(|e| IngestError::UnreadableObject {
            object: commit.tree_id().to_string(),
            message: e.message().to_string(),
        })
    }

    fn replay(
        &self,
        repo_name: &str,
        hash: &str,
        ownership: &mut OwnershipMap,
    ) -> Result<CommitRecord, IngestError> {
        let commit = self.commit(hash)?;
        let tree = self.tree_of(&commit)?;
        let parent_tree = match commit.parent_ids().next() {
            Some(p) => Some(self.tree_of(&self.commit(&p.to_string())?)?),
            None => None,
        };
        let mut opts = DiffOptions::new();
        opts.ignore_submodules(true);
        let diff = self
            .repo
            .diff_tree_to_tree(parent_tree.as_ref(), Some(&tree), Some(&mut opts))
            .map_err(|e| IngestError::UnreadableObject {
                object: hash.to_string(),
                message: e.message().to_string(),
            })?;

        let author = commit.author();
        let name = String::from_utf8_lossy(author.name_bytes()).into_owned();
        let email = String::from_utf8_lossy(author.email_bytes()).into_owned();
        let key = signature_key(&name, &email);
        let authored_at = author.when().seconds();
        if authored_at < 0 {
            return Err(IngestError::Invalid(format!(
                "commit {hash} has a pre-epoch author date"
            )));
        }

        let mut changes = Vec::new();
        for delta in diff.deltas() {
            let (old, new) = (delta.old_file(), delta.new_file());
            if matches!(old.mode(), FileMode::Commit) || matches!(new.mode(), FileMode::Commit) {
                continue;
            }
            let path_of = |f: &git2::DiffFile| {
                f.path()
                    .map(|p| p.to_string_lossy().replace('\\', "/"))
                    .unwrap_or_default()
            };
            let path = if delta.status() == Delta::Deleted {
                path_of(&old)
            } else {
                path_of(&new)
            };
            let old_blob = if old.id().is_zero() {
                None
            } else {
                Some(self.blob(old.id())?)
            };
            let new_blob = if new.id().is_zero() {
                None
            } else {
                Some(self.blob(new.id())?)
            };
            let old_content = old_blob.as_ref().map(|b| b.content()).unwrap_or(&[]);
            let new_content = new_blob.as_ref().map(|b| b.content()).unwrap_or(&[]);
            if is_binary(old_content) || is_binary(new_content) {
                ownership.remove(&path);
                continue;
            }
            let old_lines = split_lines(old_content);
            let new_lines = split_lines(new_content);
            let script = diff_lines(&old_lines, &new_lines);
            if new_blob.is_some() {
                update_ownership(ownership, &path, &script, &key)?;
            } else {
                ownership.remove(&path);
            }
            let counts = classify_hunks(&script);
            changes.push(FileChange {
                language: detect_language(&path, self.config).map(|l| l.name),
                path,
                lines_added: counts.added,
                lines_deleted: counts.deleted,
                lines_modified: counts.modified,
            });
        }

        Ok(CommitRecord {
            repo_name: repo_name.to_string(),
            hash: hash.to_string(),
            author_name: name,
            author_email: email,
            authored_at,
            parent_hashes: commit.parent_ids().map(|p| p.to_string()).collect(),
            changes,
        })
    }

    fn snapshot(&self, head: &Tree<'r>, facts: &mut RepoFacts) -> Result<(), IngestError> {
        let mut blobs = Vec::new();
        head.walk(TreeWalkMode::PreOrder, |dir, entry| {
            if entry.kind() == Some(ObjectType::Blob) {
                let name = entry.name().unwrap_or_default();
                blobs.push((format!("{dir}{name}"), entry.id()));
            }
            TreeWalkResult::Ok
        })
        .map_err(|e| IngestError::UnreadableObject {
            object: head.id().to_string(),
            message: e.message().to_string(),
        })?;

        let live: HashSet<&str> = blobs.iter().map(|(p, _)| p.as_str()).collect();
        let stale: Vec<String> = facts
            .ownership
            .paths()
            .filter(|p| !live.contains(p))
            .map(str::to_string)
            .collect();
        for path in stale {
            facts.ownership.remove(&path);
        }

        for (path, oid) in &blobs {
            let blob = self.blob(*oid)?;
            let content = blob.content();
            if is_binary(content) {
                continue;
            }
            facts
                .languages
                .insert(path.clone(), detect_language(path, self.config).map(|l| l.name));
            let tracked = facts.ownership.get(path).map(<[String]>::len);
            let lines = split_lines(content).len();
            if tracked != Some(lines) {
                return Err(IngestError::OwnershipMismatch {
                    path: path.clone(),
                    tracked: tracked.unwrap_or(0),
                    expected: lines,
                });
            }
            if content.len() <= MAX_IDENTIFIER_BLOB {
                let text = String::from_utf8_lossy(content);
                let bag = extract_identifiers(&text, self.config);
                if !bag.is_empty() {
                    facts.identifiers.insert(path.clone(), bag);
                }
            }
        }
        Ok(())
    }
}

/// Walks the first-parent chain of the default branch of the repository at
/// `repo_path`, replaying every diff to track line ownership.
pub fn scan_repository(repo_path: &Path, config: &LanguageConfig) -> Result<RepoFacts, IngestError> {
    let repo = Repository::open(repo_path).map_err(|e| IngestError::NotARepository {
        path: repo_path.display().to_string(),
        message: e.message().to_string(),
    })?;
    let repo_name = repo_name_of(repo.workdir().unwrap_or(repo_path));
    let head = match repo.head() {
        Ok(head) => head,
        Err(e) if matches!(e.code(), ErrorCode::UnbornBranch | ErrorCode::NotFound) => {
            return Err(IngestError::EmptyRepository(repo_path.display().to_string()));
        }
        Err(e) => {
            return Err(IngestError::UnreadableObject {
                object: "HEAD".to_string(),
                message: e.message().to_string(),
            })
        }
    };
    let head_commit = head.peel_to_commit().map_err(|e| IngestError::UnreadableObject {
        object: "HEAD".to_string(),
        message: e.message().to_string(),
    })?;

    let scanner = Scanner {
        repo: &repo,
        config,
    };
    let chain = linearize_history(&scanner.graph(head_commit.id())?)?;
    let mut facts = RepoFacts {
        repo_name: repo_name.clone(),
        ..RepoFacts::default()
    };
    for hash in &chain {
        let record = scanner.replay(&repo_name, hash, &mut facts.ownership)?;
        facts.commits.push(record);
    }
    let head_tree = scanner.tree_of(&head_commit)?;
    scanner.snapshot(&head_tree, &mut facts)?;
    Ok(facts)
}
