use std::collections::BTreeMap;

use super::{FeatureError, FileKey};
use crate::identity::IdentityResolution;
use crate::ingest::TokenCounts;

pub type TermWeights = BTreeMap<String, f64>;

/// TF-IDF bag of every file with a non-empty identifier bag, with raw term
/// counts as tf and `ln(N / df)` as idf.
pub fn build_file_tfidf(
    bags: &BTreeMap<FileKey, TokenCounts>,
) -> Result<BTreeMap<FileKey, TermWeights>, FeatureError> {
    let files: Vec<(&FileKey, &TokenCounts)> = bags.iter().filter(|(_, b)| !b.is_empty()).collect();
    if files.is_empty() {
        return Err(FeatureError::EmptyCorpus);
    }
    let n = files.len() as f64;
    let mut df: BTreeMap<&str, u64> = BTreeMap::new();
    for (_, bag) in &files {
        for term in bag.keys() {
            *df.entry(term).or_insert(0) += 1;
        }
    }
    Ok(files
        .into_iter()
        .map(|(key, bag)| {
            let weights = bag
                .iter()
                .map(|(term, &tf)| (term.clone(), tf as f64 * (n / df[term.as_str()] as f64).ln()))
                .collect();
            (key.clone(), weights)
        })
        .collect())
}

/// Sums file TF-IDF bags per identity, weighting each file by the share of
/// its lines the identity owns.
pub fn build_developer_docs(
    file_tfidf: &BTreeMap<FileKey, TermWeights>,
    ownership: &BTreeMap<FileKey, BTreeMap<String, u64>>,
    identities: &IdentityResolution,
) -> Result<BTreeMap<u32, TermWeights>, FeatureError> {
    let mut docs: BTreeMap<u32, TermWeights> = BTreeMap::new();
    for (file, weights) in file_tfidf {
        let Some(owners) = ownership.get(file) else {
            continue;
        };
        let total: u64 = owners.values().sum();
        if total == 0 {
            continue;
        }
        let mut shares: BTreeMap<u32, u64> = BTreeMap::new();
        for (key, &lines) in owners {
            let id = identities
                .resolve(key)
                .ok_or_else(|| FeatureError::UnresolvedSignature(key.clone()))?;
            *shares.entry(id).or_insert(0) += lines;
        }
        for (id, lines) in shares {
            if lines == 0 {
                continue;
            }
            let share = lines as f64 / total as f64;
            let doc = docs.entry(id).or_default();
            for (term, w) in weights {
                *doc.entry(term.clone()).or_insert(0.0) += share * w;
            }
        }
    }
    for doc in docs.values_mut() {
        doc.retain(|_, w| *w > 0.0);
    }
    docs.retain(|_, doc| !doc.is_empty());
    Ok(docs)
}
