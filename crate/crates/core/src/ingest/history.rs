use std::collections::{BTreeMap, HashSet};

use super::IngestError;

/// Parent links of a commit graph plus the head of the default branch.
#[derive(Debug, Clone, Default)]
pub struct CommitGraph {
    pub head: String,
    /// Commit hash to its ordered parents (first parent first).
    pub parents: BTreeMap<String, Vec<String>>,
}

/// Follows first parents from head to root, returning the chain oldest first.
///
/// Side branches of merges are never visited; their work is seen only through
/// the merge commit's diff against its first parent.
pub fn linearize_history(graph: &CommitGraph) -> Result<Vec<String>, IngestError> {
    let mut chain = Vec::new();
    let mut seen = HashSet::new();
    let mut current = Some(graph.head.clone());
    while let Some(hash) = current {
        if !seen.insert(hash.clone()) {
            return Err(IngestError::HistoryCycle(hash));
        }
        let parents = graph
            .parents
            .get(&hash)
            .ok_or_else(|| IngestError::MissingObject(hash.clone()))?;
        current = parents.first().cloned();
        chain.push(hash);
    }
    chain.reverse();
    Ok(chain)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(head: &str, edges: &[(&str, &[&str])]) -> CommitGraph {
        CommitGraph {
            head: head.to_string(),
            parents: edges
                .iter()
                .map(|(c, ps)| (c.to_string(), ps.iter().map(|p| p.to_string()).collect()))
                .collect(),
        }
    }

    #[test]
    fn linear_chain() {
        let g = graph("c3", &[("c1", &[]), ("c2", &["c1"]), ("c3", &["c2"])]);
        assert_eq!(linearize_history(&g).unwrap(), ["c1", "c2", "c3"]);
    }

    #[test]
    fn merge_follows_first_parent() {
        let g = graph(
            "m",
            &[("c1", &[]), ("c2", &["c1"]), ("c2b", &["c1"]), ("m", &["c2", "c2b"])],
        );
        assert_eq!(linearize_history(&g).unwrap(), ["c1", "c2", "m"]);
    }

    #[test]
    fn octopus_merge() {
        let g = graph(
            "m",
            &[
                ("c1", &[]),
                ("a", &["c1"]),
                ("b", &["c1"]),
                ("c", &["c1"]),
                ("m", &["a", "b", "c"]),
            ],
        );
        assert_eq!(linearize_history(&g).unwrap(), ["c1", "a", "m"]);
    }

    #[test]
    fn cycle_is_an_error() {
        let g = graph("a", &[("a", &["b"]), ("b", &["a"])]);
        assert!(matches!(
            linearize_history(&g),
            Err(IngestError::HistoryCycle(_))
        ));
    }
}
