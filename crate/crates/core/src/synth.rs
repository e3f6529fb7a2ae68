//! Synthetic organizations with planted teams, written in the commit-facts
//! format plus a team-map sidecar.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ingest::{signature_key, write_commit_facts, CommitRecord, FileChange, OwnershipMap, RepoFacts, TokenCounts};
use crate::seed::derive_seed;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic organization: {0}")]
    Invalid(String),
}

/// Activity, language and vocabulary profile shared by one team.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamProfile {
    pub name: String,
    /// The team is busy on every `period`-th day.
    pub period: u32,
    pub phase: u32,
    /// `(language, file extension, weight)`.
    pub languages: Vec<(String, String, f64)>,
    pub vocabulary: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticOrgSpec {
    pub n_teams: usize,
    pub devs_per_team: usize,
    pub days: usize,
    pub seed: u64,
    /// Explicit team profiles; built-in ones are used when empty.
    pub teams: Vec<TeamProfile>,
    /// Identifier terms every team uses.
    pub shared_vocabulary: Vec<String>,
    /// Unix day of the first simulated day.
    pub start_day: i64,
}

impl Default for SyntheticOrgSpec {
    fn default() -> Self {
        Self {
            n_teams: 3,
            devs_per_team: 5,
            days: 120,
            seed: 0,
            teams: Vec::new(),
            shared_vocabulary: words(&["config", "error", "test", "util", "handler", "request"]),
            start_day: 18_262,
        }
    }
}

fn words(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

const TEAM_NAMES: &[&str] = &["Gitaly", "Verify", "Plan", "Geo", "Secure", "Release", "Monitor", "Create"];
const PERIODS: &[u32] = &[1, 3, 7, 2, 5, 4, 6, 8];
const LANGUAGES: &[[(&str, &str); 2]] = &[
    [("Go", "go"), ("Ruby", "rb")],
    [("Python", "py"), ("Shell", "sh")],
    [("JavaScript", "js"), ("CSS", "css")],
    [("Java", "java"), ("Kotlin", "kt")],
    [("C", "c"), ("C++", "cpp")],
    [("TypeScript", "ts"), ("SCSS", "scss")],
    [("Rust", "rs"), ("SQL", "sql")],
    [("Scala", "scala"), ("Haskell", "hs")],
];
const VOCABULARIES: &[&[&str]] = &[
    &["repositori", "storag", "replica", "gitali", "object", "pack", "refer", "shard", "mirror", "fetch", "blob", "clone"],
    &["pipelin", "runner", "job", "artifact", "stage", "build", "cach", "trace", "schedul", "variabl", "coverag", "retri"],
    &["issu", "board", "epic", "milestone", "label", "todo", "comment", "note", "widget", "sidebar", "mention", "assigne"],
    &["node", "secondari", "primari", "sync", "verif", "checksum", "replic", "registri", "backfil", "tracker", "event", "cursor"],
    &["scan", "vulner", "finding", "scanner", "secret", "licens", "depend", "audit", "polici", "advisori", "signatur", "report"],
    &["releas", "tag", "deploy", "environ", "rollout", "canari", "version", "changelog", "asset", "freez", "promot", "bundl"],
    &["metric", "alert", "dashboard", "incid", "prometheus", "panel", "threshold", "notif", "uptim", "graph", "sampl", "span"],
    &["merg", "diff", "snippet", "wiki", "editor", "branch", "review", "suggest", "approv", "blame", "commit", "patch"],
];
const FIRST_NAMES: &[&str] = &[
    "Ada", "Bruno", "Chidi", "Dana", "Emil", "Farah", "Goran", "Hana", "Ivo", "Jun", "Kira", "Lars", "Mei", "Nils",
    "Omar", "Priya", "Quinn", "Rosa", "Sven", "Tara",
];
const LAST_NAMES: &[&str] = &[
    "Abe", "Berg", "Costa", "Dietz", "Eze", "Fischer", "Gallo", "Haas", "Ito", "Jensen", "Kowal", "Lind", "Moreau",
    "Novak", "Okafor", "Petrov", "Quist", "Rossi", "Sato", "Tamm",
];

fn default_profile(t: usize) -> TeamProfile {
    let round = t / TEAM_NAMES.len();
    let suffix = if round == 0 { String::new() } else { format!("-{round}") };
    let langs = LANGUAGES[t % LANGUAGES.len()];
    TeamProfile {
        name: format!("{}{suffix}", TEAM_NAMES[t % TEAM_NAMES.len()]),
        period: PERIODS[t % PERIODS.len()],
        phase: (round as u32) % PERIODS[t % PERIODS.len()],
        languages: vec![
            (langs[0].0.into(), langs[0].1.into(), 0.7),
            (langs[1].0.into(), langs[1].1.into(), 0.3),
        ],
        vocabulary: VOCABULARIES[t % VOCABULARIES.len()]
            .iter()
            .map(|w| if round == 0 { w.to_string() } else { format!("{w}{round}") })
            .collect(),
    }
}

impl SyntheticOrgSpec {
    /// Explicit profiles, padded with built-in ones.
    pub fn profiles(&self) -> Vec<TeamProfile> {
        (0..self.n_teams)
            .map(|t| self.teams.get(t).cloned().unwrap_or_else(|| default_profile(t)))
            .collect()
    }

    fn validate(&self) -> Result<(), SynthError> {
        if self.n_teams == 0 || self.devs_per_team == 0 || self.days == 0 {
            return Err(SynthError::Invalid("n_teams, devs_per_team and days must be at least 1".into()));
        }
        if self.n_teams * self.devs_per_team > FIRST_NAMES.len() * LAST_NAMES.len() {
            return Err(SynthError::Invalid("too many developers".into()));
        }
        for p in self.profiles() {
            if p.period == 0 {
                return Err(SynthError::Invalid(format!("team {} has period 0", p.name)));
            }
            if p.languages.is_empty() || p.languages.iter().any(|l| !(l.2 >= 0.0)) {
                return Err(SynthError::Invalid(format!("team {} needs non-negative language weights", p.name)));
            }
            if p.vocabulary.is_empty() {
                return Err(SynthError::Invalid(format!("team {} has no vocabulary", p.name)));
            }
            if p.name.trim().is_empty() {
                return Err(SynthError::Invalid("team names must be non-empty".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamMember {
    pub key: String,
    pub team: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticOrg {
    pub repos: Vec<RepoFacts>,
    /// Ground truth: primary email of every developer and its team.
    pub members: Vec<TeamMember>,
}

impl SyntheticOrg {
    pub fn facts_text(&self) -> String {
        write_commit_facts(&self.repos)
    }

    /// Team-map sidecar as a list of `{key, team}`.
    pub fn team_map_text(&self) -> String {
        serde_yaml::to_string(&self.members).expect("serializable")
    }

    pub fn team_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self.members.iter().map(|m| m.team.as_str()).collect();
        names.dedup();
        names
    }
}

struct Developer {
    name: String,
    email: String,
    alias_email: String,
    team: usize,
    rng: ChaCha8Rng,
}

fn commit_hash(seed: u64, repo: &str, index: usize) -> String {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(repo.as_bytes());
    h.update((index as u64).to_le_bytes());
    h.finalize().iter().take(20).map(|b| format!("{b:02x}")).collect()
}

fn pick_weighted<'a, R: Rng>(rng: &mut R, items: &'a [(String, String, f64)], weights: &[f64]) -> &'a (String, String, f64) {
    let total: f64 = weights.iter().sum();
    let mut x = rng.gen_range(0.0..total.max(f64::MIN_POSITIVE));
    for (item, w) in items.iter().zip(weights) {
        if x < *w {
            return item;
        }
        x -= w;
    }
    items.last().expect("non-empty")
}

/// Builds one repository per team. Team members share busy days (every
/// `period`-th day, with per-developer noise), languages and vocabulary.
pub fn generate_synthetic_org(spec: &SyntheticOrgSpec) -> Result<SyntheticOrg, SynthError> {
    spec.validate()?;
    let profiles = spec.profiles();
    let mut devs: Vec<Developer> = Vec::new();
    for (t, _) in profiles.iter().enumerate() {
        for i in 0..spec.devs_per_team {
            let k = t * spec.devs_per_team + i;
            let first = FIRST_NAMES[k % FIRST_NAMES.len()];
            let last = LAST_NAMES[k / FIRST_NAMES.len()];
            let handle = format!("{}.{}", first, last).to_lowercase();
            devs.push(Developer {
                name: format!("{first} {last}"),
                email: format!("{handle}@example.com"),
                alias_email: format!("{handle}@users.noreply.example.org"),
                team: t,
                rng: ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &format!("synth/dev/{k}"))),
            });
        }
    }

    let mut repos = Vec::new();
    for (t, profile) in profiles.iter().enumerate() {
        let repo_name = format!("{}-service", profile.name.to_lowercase());
        let members: Vec<usize> = (0..devs.len()).filter(|&d| devs[d].team == t).collect();
        let files = team_files(profile, members.len());

        let mut events: Vec<(i64, usize, Vec<FileChange>, bool)> = Vec::new();
        for &d in &members {
            let dev = &mut devs[d];
            let weights: Vec<f64> = profile
                .languages
                .iter()
                .map(|l| (l.2 * dev.rng.gen_range(0.85..1.15)).max(0.0))
                .collect();
            for day in 0..spec.days {
                let busy = (day as u32 + profile.phase).is_multiple_of(profile.period);
                let n = if busy {
                    if dev.rng.gen_bool(0.95) {
                        profile.period as usize + dev.rng.gen_range(0..=1)
                    } else {
                        0
                    }
                } else {
                    usize::from(dev.rng.gen_bool(0.01))
                };
                for _ in 0..n {
                    let (lang, ext, _) = pick_weighted(&mut dev.rng, &profile.languages, &weights);
                    let candidates: Vec<&String> = files.iter().filter(|(_, e)| e == ext).map(|(p, _)| p).collect();
                    let path = (*candidates.choose(&mut dev.rng).expect("one file per language")).clone();
                    let mut changes = vec![FileChange {
                        path,
                        language: Some(lang.clone()),
                        lines_added: dev.rng.gen_range(5..25),
                        lines_deleted: dev.rng.gen_range(0..10),
                        lines_modified: dev.rng.gen_range(0..8),
                    }];
                    if dev.rng.gen_bool(0.1) {
                        changes.push(FileChange {
                            path: "README.md".into(),
                            language: Some("Markdown".into()),
                            lines_added: dev.rng.gen_range(1..10),
                            lines_deleted: dev.rng.gen_range(0..3),
                            lines_modified: 0,
                        });
                    }
                    let second = dev.rng.gen_range(9 * 3600..18 * 3600);
                    let at = (spec.start_day + day as i64) * 86_400 + second;
                    let alias = dev.rng.gen_bool(0.15);
                    events.push((at, d, changes, alias));
                }
            }
        }
        events.sort_by_key(|a| (a.0, a.1));

        let mut commits = Vec::with_capacity(events.len());
        let mut parent: Option<String> = None;
        for (index, (at, d, changes, alias)) in events.into_iter().enumerate() {
            let hash = commit_hash(spec.seed, &repo_name, index);
            let dev = &devs[d];
            commits.push(CommitRecord {
                repo_name: repo_name.clone(),
                hash: hash.clone(),
                author_name: dev.name.clone(),
                author_email: if alias { dev.alias_email.clone() } else { dev.email.clone() },
                authored_at: at,
                parent_hashes: parent.iter().cloned().collect(),
                changes,
            });
            parent = Some(hash);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &format!("synth/snapshot/{t}")));
        let mut ownership = OwnershipMap::new();
        let mut identifiers = BTreeMap::new();
        let mut languages = BTreeMap::new();
        for (f, (path, ext)) in files.iter().enumerate() {
            let main = members[f % members.len()];
            let mut owners: BTreeMap<String, u64> = BTreeMap::new();
            owners.insert(signature_key(&devs[main].name, &devs[main].email), rng.gen_range(60..120));
            for &other in &members {
                if other != main && rng.gen_bool(0.3) {
                    *owners.entry(signature_key(&devs[other].name, &devs[other].email)).or_insert(0) +=
                        rng.gen_range(1..15);
                }
            }
            ownership.insert_counts(path.clone(), &owners);
            let lang = profile.languages.iter().find(|l| &l.1 == ext).map(|l| l.0.clone());
            languages.insert(path.clone(), lang);

            let mut bag = TokenCounts::new();
            let mut vocab: Vec<&String> = profile.vocabulary.iter().collect();
            vocab.shuffle(&mut rng);
            let take = rng.gen_range(4..=vocab.len().min(8)).min(vocab.len());
            for term in vocab.into_iter().take(take) {
                bag.insert(term.clone(), rng.gen_range(1..12));
            }
            for term in &spec.shared_vocabulary {
                if rng.gen_bool(0.8) {
                    bag.insert(term.clone(), rng.gen_range(1..6));
                }
            }
            identifiers.insert(path.clone(), bag);
        }
        let readme_owner = members[0];
        let readme_owners = BTreeMap::from([(signature_key(&devs[readme_owner].name, &devs[readme_owner].email), 20)]);
        ownership.insert_counts("README.md", &readme_owners);
        languages.insert("README.md".to_string(), Some("Markdown".to_string()));

        repos.push(RepoFacts {
            repo_name,
            commits,
            ownership,
            identifiers,
            languages,
        });
    }

    let members = devs
        .iter()
        .map(|d| TeamMember {
            key: d.email.clone(),
            team: profiles[d.team].name.clone(),
        })
        .collect();
    Ok(SyntheticOrg { repos, members })
}

/// Three source files per developer, spread over the team's languages.
fn team_files(profile: &TeamProfile, members: usize) -> Vec<(String, String)> {
    (0..3 * members)
        .map(|i| {
            let (_, ext, _) = &profile.languages[i % profile.languages.len()];
            let stem = &profile.vocabulary[i % profile.vocabulary.len()];
            (format!("src/{stem}_{i}.{ext}"), ext.clone())
        })
        .collect()
}
