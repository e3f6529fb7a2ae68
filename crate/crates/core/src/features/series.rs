use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::FeatureError;
use crate::identity::IdentityResolution;
use crate::ingest::CommitRecord;

const SECONDS_PER_DAY: i64 = 86_400;

/// Commits per UTC day over one contributor's active span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailySeries {
    pub identity: u32,
    /// Days since the Unix epoch of `values[0]`.
    pub start_day: i64,
    pub values: Vec<f64>,
}

impl DailySeries {
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

pub fn utc_day(timestamp: i64) -> i64 {
    timestamp.div_euclid(SECONDS_PER_DAY)
}

/// Buckets commits by author identity and UTC day. Each series runs from the
/// identity's first to last active day, with zeros for idle days.
pub fn build_daily_series<'a, I>(
    commits: I,
    identities: &IdentityResolution,
) -> Result<BTreeMap<u32, DailySeries>, FeatureError>
where
    I: IntoIterator<Item = &'a CommitRecord>,
{
    let mut days: BTreeMap<u32, BTreeMap<i64, u64>> = BTreeMap::new();
    for c in commits {
        let key = c.author_key();
        let id = identities
            .resolve(&key)
            .ok_or(FeatureError::UnresolvedSignature(key))?;
        *days.entry(id).or_default().entry(utc_day(c.authored_at)).or_insert(0) += 1;
    }
    Ok(days
        .into_iter()
        .map(|(id, per_day)| {
            let first = *per_day.keys().next().expect("non-empty");
            let last = *per_day.keys().next_back().expect("non-empty");
            let mut values = vec![0.0; (last - first + 1) as usize];
            for (day, n) in per_day {
                values[(day - first) as usize] = n as f64;
            }
            (
                id,
                DailySeries {
                    identity: id,
                    start_day: first,
                    values,
                },
            )
        })
        .collect())
}

/// Divides every value by the series mean.
pub fn normalize_series(series: &DailySeries) -> DailySeries {
    let mean = series.mean();
    DailySeries {
        values: series.values.iter().map(|v| v / mean).collect(),
        ..series.clone()
    }
}
