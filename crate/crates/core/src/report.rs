//! Joins clusterings and topics with the declared team structure.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::identity::Identity;
use crate::seed::derive_seed;

pub const EXTERNAL: &str = "(external)";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot read team map {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed team map: {0}")]
    Parse(String),
    #[error("team map lists key {0:?} more than once")]
    DuplicateKey(String),
    #[error("team map entry {0:?} has an empty team name")]
    EmptyTeam(String),
    #[error("no identity has both a main topic and a cluster label")]
    EmptyIntersection,
}

#[derive(Debug, Deserialize)]
struct TeamEntry {
    key: String,
    team: String,
}

/// Contributor key (email or exact name) to team name.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TeamMap {
    entries: BTreeMap<String, String>,
}

fn is_email(key: &str) -> bool {
    key.contains('@')
}

impl TeamMap {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        let key = key.trim();
        if is_email(key) {
            self.entries.get(&key.to_lowercase())
        } else {
            self.entries.get(key)
        }
        .map(String::as_str)
    }

    /// Team of an identity: any of its emails first, then any exact name.
    pub fn team_of(&self, identity: &Identity) -> Option<&str> {
        identity
            .emails
            .iter()
            .find_map(|e| self.entries.get(e))
            .or_else(|| identity.names.iter().find_map(|n| self.entries.get(n)))
            .map(String::as_str)
    }

    pub fn teams(&self) -> BTreeSet<&str> {
        self.entries.values().map(String::as_str).collect()
    }
}

/// Parses a list of `{key, team}` records (YAML or JSON).
pub fn parse_team_map(text: &str) -> Result<TeamMap, ReportError> {
    let list: Option<Vec<TeamEntry>> = serde_yaml::from_str(text).map_err(|e| ReportError::Parse(e.to_string()))?;
    let mut entries = BTreeMap::new();
    for TeamEntry { key, team } in list.unwrap_or_default() {
        let key = key.trim();
        let key = if is_email(key) { key.to_lowercase() } else { key.to_string() };
        let team = team.trim().to_string();
        if team.is_empty() {
            return Err(ReportError::EmptyTeam(key));
        }
        if entries.insert(key.clone(), team).is_some() {
            return Err(ReportError::DuplicateKey(key));
        }
    }
    Ok(TeamMap { entries })
}

pub fn load_team_map(path: &Path) -> Result<TeamMap, ReportError> {
    let text = std::fs::read_to_string(path).map_err(|e| ReportError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_team_map(&text)
}

/// Team name of every identity, [`EXTERNAL`] when unmapped.
pub fn team_labels<'a>(identities: impl IntoIterator<Item = &'a Identity>, map: &TeamMap) -> BTreeMap<u32, String> {
    identities
        .into_iter()
        .map(|i| (i.id, map.team_of(i).unwrap_or(EXTERNAL).to_string()))
        .collect()
}

/// For every topic, the teams of the identities whose main topic it is,
/// with counts, most frequent first and then by name.
pub fn topic_team_table(
    main_topics: &BTreeMap<u32, usize>,
    n_topics: usize,
    teams: &BTreeMap<u32, String>,
) -> Vec<Vec<(String, usize)>> {
    let mut counts: Vec<BTreeMap<&str, usize>> = vec![BTreeMap::new(); n_topics];
    for (id, &t) in main_topics {
        let team = teams.get(id).map_or(EXTERNAL, String::as_str);
        *counts[t].entry(team).or_insert(0) += 1;
    }
    counts
        .into_iter()
        .map(|row| {
            let mut row: Vec<(String, usize)> = row.into_iter().map(|(t, n)| (t.to_string(), n)).collect();
            row.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            row
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgreementMode {
    /// Mean over topics of the number of clusters their developers span.
    #[default]
    PerTopic,
    /// Same count, averaged over developers instead of topics.
    PerDeveloper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub mode: AgreementMode,
    pub identities: usize,
    /// Distinct clusters among the developers of each topic.
    pub clusters_per_topic: BTreeMap<usize, usize>,
    pub mean_clusters_per_topic: f64,
    pub random_mean: f64,
    pub random_std: f64,
    pub trials: usize,
}

/// Pairs up main topics and cluster labels on the identities that have both.
fn joined(main_topics: &BTreeMap<u32, usize>, labels: &BTreeMap<u32, i32>) -> Result<(Vec<usize>, Vec<i32>), ReportError> {
    let (topics, clusters): (Vec<usize>, Vec<i32>) = main_topics
        .iter()
        .filter_map(|(id, &t)| labels.get(id).map(|&c| (t, c)))
        .unzip();
    if topics.is_empty() {
        return Err(ReportError::EmptyIntersection);
    }
    Ok((topics, clusters))
}

fn spans(topics: &[usize], clusters: &[i32]) -> BTreeMap<usize, usize> {
    let mut sets: BTreeMap<usize, BTreeSet<i32>> = BTreeMap::new();
    for (&t, &c) in topics.iter().zip(clusters) {
        sets.entry(t).or_default().insert(c);
    }
    sets.into_iter().map(|(t, s)| (t, s.len())).collect()
}

fn mean_span(topics: &[usize], clusters: &[i32], mode: AgreementMode) -> f64 {
    let per_topic = spans(topics, clusters);
    match mode {
        AgreementMode::PerTopic => per_topic.values().sum::<usize>() as f64 / per_topic.len() as f64,
        AgreementMode::PerDeveloper => {
            topics.iter().map(|t| per_topic[t]).sum::<usize>() as f64 / topics.len() as f64
        }
    }
}

/// Observed agreement; the noise label counts as one more cluster.
pub fn cluster_agreement(
    main_topics: &BTreeMap<u32, usize>,
    labels: &BTreeMap<u32, i32>,
    mode: AgreementMode,
) -> Result<AgreementReport, ReportError> {
    let (topics, clusters) = joined(main_topics, labels)?;
    Ok(AgreementReport {
        mode,
        identities: topics.len(),
        clusters_per_topic: spans(&topics, &clusters),
        mean_clusters_per_topic: mean_span(&topics, &clusters, mode),
        random_mean: f64::NAN,
        random_std: f64::NAN,
        trials: 0,
    })
}

/// Mean and sample standard deviation of the agreement under random
/// permutations of the cluster labels over identities.
pub fn random_baseline(
    main_topics: &BTreeMap<u32, usize>,
    labels: &BTreeMap<u32, i32>,
    trials: usize,
    seed: u64,
    mode: AgreementMode,
) -> Result<(f64, f64), ReportError> {
    let (topics, clusters) = joined(main_topics, labels)?;
    if trials == 0 {
        return Ok((f64::NAN, f64::NAN));
    }
    let samples: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("baseline/{i}")));
            let mut shuffled = clusters.clone();
            shuffled.shuffle(&mut rng);
            mean_span(&topics, &shuffled, mode)
        })
        .collect();
    let mean = samples.iter().sum::<f64>() / trials as f64;
    let std = if trials > 1 {
        (samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (trials - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok((mean, std))
}

/// Observed agreement together with its permutation baseline.
pub fn agreement_report(
    main_topics: &BTreeMap<u32, usize>,
    labels: &BTreeMap<u32, i32>,
    trials: usize,
    seed: u64,
    mode: AgreementMode,
) -> Result<AgreementReport, ReportError> {
    let mut report = cluster_agreement(main_topics, labels, mode)?;
    let (mean, std) = random_baseline(main_topics, labels, trials, seed, mode)?;
    report.random_mean = mean;
    report.random_std = std;
    report.trials = trials;
    Ok(report)
}

fn pairs(n: u64) -> f64 {
    (n * n.saturating_sub(1)) as f64 / 2.0
}

/// Adjusted Rand index between two labelings of the same items.
pub fn adjusted_rand_index<A: Ord, B: Ord>(a: &[A], b: &[B]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings differ in length");
    let mut table: BTreeMap<(&A, &B), u64> = BTreeMap::new();
    let mut rows: BTreeMap<&A, u64> = BTreeMap::new();
    let mut cols: BTreeMap<&B, u64> = BTreeMap::new();
    for (x, y) in a.iter().zip(b) {
        *table.entry((x, y)).or_insert(0) += 1;
        *rows.entry(x).or_insert(0) += 1;
        *cols.entry(y).or_insert(0) += 1;
    }
    let index: f64 = table.values().map(|&n| pairs(n)).sum();
    let sum_a: f64 = rows.values().map(|&n| pairs(n)).sum();
    let sum_b: f64 = cols.values().map(|&n| pairs(n)).sum();
    let total = pairs(a.len() as u64);
    if total == 0.0 {
        return 1.0;
    }
    let expected = sum_a * sum_b / total;
    let max = (sum_a + sum_b) / 2.0;
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

/// Share of items that belong to the majority class of their group.
pub fn purity<G: Ord, C: Ord>(groups: &[G], classes: &[C]) -> f64 {
    assert_eq!(groups.len(), classes.len(), "labelings differ in length");
    if groups.is_empty() {
        return 1.0;
    }
    let mut table: BTreeMap<&G, BTreeMap<&C, usize>> = BTreeMap::new();
    for (g, c) in groups.iter().zip(classes) {
        *table.entry(g).or_default().entry(c).or_insert(0) += 1;
    }
    let hits: usize = table.values().map(|row| row.values().copied().max().unwrap_or(0)).sum();
    hits as f64 / groups.len() as f64
}

const PALETTE: [&str; 12] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#393b79",
    "#ad494a", "#637939",
];
const GRAY: &str = "#b0b0b0";
const NOISE_COLOR: &str = "#303030";

const PANEL: f64 = 360.0;
const MARGIN: f64 = 20.0;
const LEGEND: f64 = 140.0;

/// One scatter point.
pub struct ScatterPoint<'a> {
    pub identity: u32,
    pub xy: [f64; 2],
    pub cluster: i32,
    pub team: Option<&'a str>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Two side-by-side panels of the same embedding: coloured by cluster and
/// coloured by team. Unmapped identities are gray.
pub fn render_scatter(title: &str, points: &[ScatterPoint]) -> String {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in points {
        for a in 0..2 {
            lo[a] = lo[a].min(p.xy[a]);
            hi[a] = hi[a].max(p.xy[a]);
        }
    }
    let project = |xy: [f64; 2], a: usize| {
        let span = hi[a] - lo[a];
        if span > 0.0 {
            (xy[a] - lo[a]) / span
        } else {
            0.5
        }
    };

    let cluster_color = |c: i32| {
        if c < 0 {
            NOISE_COLOR.to_string()
        } else {
            PALETTE[c as usize % PALETTE.len()].to_string()
        }
    };
    let team_names: BTreeSet<&str> = points.iter().filter_map(|p| p.team).collect();
    let team_index: BTreeMap<&str, usize> = team_names.iter().enumerate().map(|(i, t)| (*t, i)).collect();
    let team_color = |t: Option<&str>| t.map_or(GRAY.to_string(), |t| PALETTE[team_index[t] % PALETTE.len()].to_string());

    let width = 2.0 * (PANEL + LEGEND) + 3.0 * MARGIN;
    let height = PANEL + 3.0 * MARGIN;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{MARGIN}" y="14" font-size="13">{}</text>"#, escape(title));

    let mut clusters: Vec<i32> = points.iter().map(|p| p.cluster).collect();
    clusters.sort_unstable();
    clusters.dedup();
    let cluster_legend: Vec<(String, String)> = clusters
        .iter()
        .map(|&c| {
            let name = if c < 0 { "noise".to_string() } else { format!("cluster {c}") };
            (name, cluster_color(c))
        })
        .collect();
    let mut team_legend: Vec<(String, String)> = team_names.iter().map(|t| (t.to_string(), team_color(Some(t)))).collect();
    if points.iter().any(|p| p.team.is_none()) {
        team_legend.push((EXTERNAL.to_string(), GRAY.to_string()));
    }

    for (panel, (label, legend)) in [("by cluster", cluster_legend), ("by team", team_legend)]
        .into_iter()
        .enumerate()
    {
        let x0 = MARGIN + panel as f64 * (PANEL + LEGEND + MARGIN);
        let y0 = 2.0 * MARGIN;
        let _ = writeln!(svg, r#"<g class="panel">"#);
        let _ = writeln!(
            svg,
            r##"<rect x="{x0:.1}" y="{y0:.1}" width="{PANEL:.1}" height="{PANEL:.1}" fill="none" stroke="#999999"/>"##
        );
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}">{label}</text>"#, x0, y0 - 4.0);
        for p in points {
            let cx = x0 + 10.0 + project(p.xy, 0) * (PANEL - 20.0);
            let cy = y0 + PANEL - 10.0 - project(p.xy, 1) * (PANEL - 20.0);
            let fill = if panel == 0 { cluster_color(p.cluster) } else { team_color(p.team) };
            let _ = writeln!(
                svg,
                r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="4" fill="{fill}"><title>{}</title></circle>"#,
                p.identity
            );
        }
        let lx = x0 + PANEL + 10.0;
        for (i, (name, color)) in legend.iter().enumerate() {
            let ly = y0 + 10.0 + i as f64 * 16.0;
            let _ = writeln!(svg, r#"<circle cx="{:.1}" cy="{:.1}" r="4" fill="{color}"/>"#, lx + 4.0, ly);
            let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, lx + 12.0, ly + 4.0, escape(name));
        }
        let _ = writeln!(svg, "</g>");
    }
    svg.push_str("</svg>\n");
    svg
}
