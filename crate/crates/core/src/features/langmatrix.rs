use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use super::FeatureError;
use crate::identity::IdentityResolution;
use crate::ingest::{CommitRecord, LanguageConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChangeKind {
    Added,
    Modified,
    Deleted,
}

impl ChangeKind {
    pub const ALL: [ChangeKind; 3] = [ChangeKind::Added, ChangeKind::Modified, ChangeKind::Deleted];

    pub fn as_str(self) -> &'static str {
        match self {
            ChangeKind::Added => "added",
            ChangeKind::Modified => "modified",
            ChangeKind::Deleted => "deleted",
        }
    }
}

impl FromStr for ChangeKind {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ChangeKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| FeatureError::Format(format!("unknown change kind {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LangColumn {
    pub language: String,
    pub kind: ChangeKind,
}

impl fmt::Display for LangColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.language, self.kind.as_str())
    }
}

/// Line counts per contributor (rows) and (language, change kind) (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct LangMatrix {
    pub rows: Vec<u32>,
    pub columns: Vec<LangColumn>,
    pub values: Vec<Vec<f64>>,
}

impl LangMatrix {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().map(move |row| row[j])
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), FeatureError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["identity".to_string()];
        header.extend(self.columns.iter().map(ToString::to_string));
        w.write_record(&header)?;
        for (id, row) in self.rows.iter().zip(&self.values) {
            let mut record = vec![id.to_string()];
            record.extend(row.iter().map(ToString::to_string));
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| FeatureError::Format(e.to_string()))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, FeatureError> {
        let mut r = csv::Reader::from_reader(input);
        let columns = r
            .headers()?
            .iter()
            .skip(1)
            .map(|h| {
                let (language, kind) = h
                    .rsplit_once(':')
                    .ok_or_else(|| FeatureError::Format(format!("bad column {h:?}")))?;
                Ok(LangColumn {
                    language: language.to_string(),
                    kind: kind.parse()?,
                })
            })
            .collect::<Result<Vec<_>, FeatureError>>()?;
        let mut rows = Vec::new();
        let mut values = Vec::new();
        for record in r.records() {
            let record = record?;
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| FeatureError::Format(format!("bad number {s:?}")))
            };
            rows.push(
                record[0]
                    .parse()
                    .map_err(|_| FeatureError::Format(format!("bad identity {:?}", &record[0])))?,
            );
            values.push(record.iter().skip(1).map(parse).collect::<Result<Vec<_>, _>>()?);
        }
        Ok(Self {
            rows,
            columns,
            values,
        })
    }
}

/// Sums added/modified/deleted lines per identity and language. Markup and
/// unrecognized files are ignored; identities left with no lines get no row.
pub fn build_language_matrix<'a, I>(
    commits: I,
    identities: &IdentityResolution,
    config: &LanguageConfig,
) -> Result<LangMatrix, FeatureError>
where
    I: IntoIterator<Item = &'a CommitRecord>,
{
    let mut sums: BTreeMap<u32, BTreeMap<LangColumn, u64>> = BTreeMap::new();
    for c in commits {
        let key = c.author_key();
        let id = identities
            .resolve(&key)
            .ok_or(FeatureError::UnresolvedSignature(key))?;
        for change in &c.changes {
            let Some(language) = &change.language else {
                continue;
            };
            if config.is_markup(language) {
                continue;
            }
            let row = sums.entry(id).or_default();
            for (kind, n) in [
                (ChangeKind::Added, change.lines_added),
                (ChangeKind::Modified, change.lines_modified),
                (ChangeKind::Deleted, change.lines_deleted),
            ] {
                if n > 0 {
                    *row.entry(LangColumn {
                        language: language.clone(),
                        kind,
                    })
                    .or_insert(0) += n;
                }
            }
        }
    }
    sums.retain(|_, row| !row.is_empty());

    let mut columns: Vec<LangColumn> = sums.values().flat_map(|r| r.keys().cloned()).collect();
    columns.sort();
    columns.dedup();
    let index: BTreeMap<&LangColumn, usize> = columns.iter().enumerate().map(|(i, c)| (c, i)).collect();

    let mut rows = Vec::with_capacity(sums.len());
    let mut values = Vec::with_capacity(sums.len());
    for (id, row) in &sums {
        let mut dense = vec![0.0; columns.len()];
        for (col, &n) in row {
            dense[index[col]] = n as f64;
        }
        rows.push(*id);
        values.push(dense);
    }
    Ok(LangMatrix {
        rows,
        columns,
        values,
    })
}

/// Percentile of `values` by linear interpolation at rank `(n - 1) * p / 100`.
pub fn percentile(values: &[f64], p: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = (sorted.len() - 1) as f64 * p / 100.0;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (rank - lo as f64)
}

/// Clips every column at its `p`-th percentile.
pub fn saturate(matrix: &LangMatrix, p: f64) -> LangMatrix {
    let mut out = matrix.clone();
    if matrix.is_empty() {
        return out;
    }
    for j in 0..matrix.columns.len() {
        let column: Vec<f64> = matrix.column(j).collect();
        let cap = percentile(&column, p);
        for row in &mut out.values {
            row[j] = row[j].min(cap);
        }
    }
    out
}
