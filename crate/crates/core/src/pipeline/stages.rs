use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::config::{Config, KMeansSpace};
use super::workspace::Workspace;
use super::PipelineError;
use crate::analytics::{
    dbscan, embed_2d, kmeans, knee_eps, pairwise_dtw, pairwise_l2, select_k_elbow, DbscanParams, Embedding2D,
    NOISE,
};
use crate::features::{
    build_daily_series, build_developer_docs, build_file_tfidf, build_language_matrix, normalize_series,
    pooled_bags, pooled_ownership, saturate, FeatureError, LangMatrix, TermWeights,
};
use crate::identity::{merge_identities, Identity, IdentityResolution, Signature};
use crate::ingest::{load_commit_facts, parse_commit_facts, scan_repositories, write_commit_facts, RepoFacts};
use crate::report::{
    adjusted_rand_index, agreement_report, load_team_map, purity, render_scatter, team_labels, topic_team_table,
    AgreementReport, ScatterPoint, TeamMap, EXTERNAL,
};
use crate::seed::derive_seed;
use crate::topics::{fit_topics, main_topics, top_terms, TopicModel, TopicParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Ingest,
    Identities,
    Features,
    ClusterActivity,
    ClusterExperience,
    Topics,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Ingest,
        Stage::Identities,
        Stage::Features,
        Stage::ClusterActivity,
        Stage::ClusterExperience,
        Stage::Topics,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Identities => "identities",
            Stage::Features => "features",
            Stage::ClusterActivity => "cluster-activity",
            Stage::ClusterExperience => "cluster-experience",
            Stage::Topics => "topics",
            Stage::Report => "report",
        }
    }

    /// Files the stage writes.
    pub fn artifacts(self) -> &'static [&'static str] {
        match self {
            Stage::Ingest => &[COMMITS],
            Stage::Identities => &[IDENTITIES, SIGNATURES],
            Stage::Features => &[SERIES, LANGMATRIX, DEVDOCS],
            Stage::ClusterActivity => &["activity_clusters.csv", "activity_clusters.svg", "activity_meta.json"],
            Stage::ClusterExperience => {
                &["experience_clusters.csv", "experience_clusters.svg", "experience_meta.json"]
            }
            Stage::Topics => &[TOPICS, TOPIC_TERMS],
            Stage::Report => &[AGREEMENT, TOPIC_TEAMS, "activity.svg", "experience.svg"],
        }
    }

    pub(super) fn run(self, config: &Config, ws: &Workspace) -> Result<Vec<&'static str>, PipelineError> {
        match self {
            Stage::Ingest => ingest(config, ws)?,
            Stage::Identities => identities(config, ws)?,
            Stage::Features => features(config, ws)?,
            Stage::ClusterActivity => cluster_activity(config, ws)?,
            Stage::ClusterExperience => cluster_experience(config, ws)?,
            Stage::Topics => topics(config, ws)?,
            Stage::Report => report(config, ws)?,
        }
        Ok(self.artifacts().to_vec())
    }
}

const COMMITS: &str = "commits.jsonl";
const IDENTITIES: &str = "identities.json";
const SIGNATURES: &str = "signatures.json";
const SERIES: &str = "series.json";
const LANGMATRIX: &str = "langmatrix.csv";
const DEVDOCS: &str = "devdocs.json";
const TOPICS: &str = "topics.json";
const TOPIC_TERMS: &str = "topic_terms.csv";
const AGREEMENT: &str = "agreement.json";
const TOPIC_TEAMS: &str = "topic_teams.csv";

fn fail(stage: &str) -> impl Fn(String) -> PipelineError + '_ {
    move |message| PipelineError::new(stage, message)
}

fn load_repos(ws: &Workspace, stage: &str) -> Result<Vec<RepoFacts>, PipelineError> {
    parse_commit_facts(&ws.read_text(stage, COMMITS)?).map_err(|e| PipelineError::new(stage, format!("{COMMITS}: {e}")))
}

fn ingest(config: &Config, ws: &Workspace) -> Result<(), PipelineError> {
    let stage = "ingest";
    if config.repos.is_empty() && config.fixtures.is_empty() {
        return Err(PipelineError::new(stage, "no repositories or fixtures configured"));
    }
    let language = config.language_config()?;
    let mut repos = scan_repositories(&config.repos, &language)
        .map_err(|(path, e)| PipelineError::new(stage, format!("repository {path}: {e}")))?;
    for fixture in &config.fixtures {
        let loaded = load_commit_facts(fixture)
            .map_err(|e| PipelineError::new(stage, format!("fixture {}: {e}", fixture.display())))?;
        repos.extend(loaded);
    }
    let mut names = BTreeSet::new();
    for r in &repos {
        if !names.insert(r.repo_name.as_str()) {
            return Err(PipelineError::new(stage, format!("repository name {} appears twice", r.repo_name)));
        }
    }
    log::info!(
        "ingested {} repositories, {} commits",
        repos.len(),
        repos.iter().map(|r| r.commits.len()).sum::<usize>()
    );
    ws.write_text(stage, COMMITS, &write_commit_facts(&repos))
}

/// Signature key to identity id, plus the stub identities.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SignatureIndex {
    pub signatures: BTreeMap<String, u32>,
    pub stubs: BTreeSet<u32>,
}

fn identities(config: &Config, ws: &Workspace) -> Result<(), PipelineError> {
    let stage = "identities";
    let repos = load_repos(ws, stage)?;
    let mut sigs: Vec<Signature> = repos
        .iter()
        .flat_map(|r| &r.commits)
        .map(|c| Signature::new(&c.author_name, &c.author_email))
        .collect();
    for r in &repos {
        for (path, owners) in r.ownership.iter() {
            for key in owners.iter().collect::<BTreeSet<_>>() {
                let sig = Signature::from_key(key).ok_or_else(|| {
                    PipelineError::new(stage, format!("{}:{path}: malformed owner {key:?}", r.repo_name))
                })?;
                sigs.push(sig);
            }
        }
    }
    let resolution = merge_identities(&sigs, &config.language_config()?);
    log::info!("{} signatures merged into {} identities", resolution.by_signature.len(), resolution.identities.len());
    ws.write_json(stage, IDENTITIES, &resolution.identities)?;
    ws.write_json(
        stage,
        SIGNATURES,
        &SignatureIndex {
            signatures: resolution.by_signature.clone(),
            stubs: resolution.stub_ids(),
        },
    )
}

fn load_identities(ws: &Workspace, stage: &str) -> Result<IdentityResolution, PipelineError> {
    let mut identities: Vec<Identity> = ws.read_json(stage, IDENTITIES)?;
    let index: SignatureIndex = ws.read_json(stage, SIGNATURES)?;
    for (i, identity) in identities.iter_mut().enumerate() {
        if identity.id as usize != i {
            return Err(PipelineError::new(stage, format!("{IDENTITIES}: ids are not dense at {i}")));
        }
        identity.stub = index.stubs.contains(&identity.id);
    }
    Ok(IdentityResolution {
        identities,
        by_signature: index.signatures,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub identity: u32,
    pub start_day: i64,
    pub counts: Vec<u64>,
    /// Counts divided by their mean.
    pub values: Vec<f64>,
}

fn features(config: &Config, ws: &Workspace) -> Result<(), PipelineError> {
    let stage = "features";
    let err = |e: FeatureError| PipelineError::new(stage, e.to_string());
    let repos = load_repos(ws, stage)?;
    let ids = load_identities(ws, stage)?;
    let commits = || repos.iter().flat_map(|r| &r.commits);

    let series: Vec<SeriesRecord> = build_daily_series(commits(), &ids)
        .map_err(err)?
        .into_values()
        .map(|s| SeriesRecord {
            identity: s.identity,
            start_day: s.start_day,
            counts: s.values.iter().map(|&v| v as u64).collect(),
            values: normalize_series(&s).values,
        })
        .collect();
    ws.write_json(stage, SERIES, &series)?;

    let matrix = build_language_matrix(commits(), &ids, &config.language_config()?).map_err(err)?;
    let mut csv = Vec::new();
    saturate(&matrix, config.saturation_percentile).write_csv(&mut csv).map_err(err)?;
    ws.write_text(stage, LANGMATRIX, &String::from_utf8(csv).expect("utf-8 csv"))?;

    let docs = match build_file_tfidf(&pooled_bags(&repos)) {
        Ok(tfidf) => build_developer_docs(&tfidf, &pooled_ownership(&repos), &ids).map_err(err)?,
        Err(FeatureError::EmptyCorpus) => {
            log::warn!("no identifiers in any file; developer documents are empty");
            BTreeMap::new()
        }
        Err(e) => return Err(err(e)),
    };
    ws.write_json(stage, DEVDOCS, &docs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRow {
    pub identity: u32,
    pub cluster: i32,
    pub x: f64,
    pub y: f64,
}

fn write_clusters(ws: &Workspace, stage: &str, name: &str, rows: &[ClusterRow]) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| PipelineError::new(stage, e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| PipelineError::new(stage, e.to_string()))?;
    ws.write_text(stage, name, &String::from_utf8(bytes).expect("utf-8 csv"))
}

fn read_clusters(ws: &Workspace, stage: &str, name: &str) -> Result<Vec<ClusterRow>, PipelineError> {
    let text = ws.read_text(stage, name)?;
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<Result<Vec<ClusterRow>, _>>()
        .map_err(|e| PipelineError::new(stage, format!("{name}: {e}")))
}

fn optional_team_map(config: &Config, stage: &str) -> Result<TeamMap, PipelineError> {
    match &config.report.team_map {
        Some(path) if !path.exists() => {
            log::warn!("team map {} not found, every identity is {EXTERNAL}", path.display());
            Ok(TeamMap::default())
        }
        Some(path) => load_team_map(path).map_err(|e| PipelineError::new(stage, e.to_string())),
        None => Ok(TeamMap::default()),
    }
}

fn scatter_svg(title: &str, rows: &[ClusterRow], ids: &IdentityResolution, teams: &TeamMap) -> String {
    let points: Vec<ScatterPoint> = rows
        .iter()
        .map(|r| ScatterPoint {
            identity: r.identity,
            xy: [r.x, r.y],
            cluster: r.cluster,
            team: ids.get(r.identity).and_then(|i| teams.team_of(i)),
        })
        .collect();
    render_scatter(title, &points)
}

fn rows_from(ids: &[u32], labels: &[i32], embedding: &Embedding2D) -> Vec<ClusterRow> {
    ids.iter()
        .zip(labels)
        .zip(&embedding.points)
        .map(|((&identity, &cluster), p)| ClusterRow {
            identity,
            cluster,
            x: p[0],
            y: p[1],
        })
        .collect()
}

fn trivial_embedding(n: usize) -> Embedding2D {
    Embedding2D {
        points: vec![[0.0, 0.0]; n],
        eigenvalues: [0.0, 0.0],
        clamped: false,
    }
}

#[derive(Debug, Serialize)]
struct ClusterMeta {
    embedding: &'static str,
    identities: usize,
    clusters: usize,
    noise: usize,
    eigenvalues: [f64; 2],
    negative_eigenvalues_clamped: bool,
    #[serde(flatten)]
    params: serde_json::Value,
}

fn count_clusters(labels: &[i32]) -> (usize, usize) {
    let clusters: BTreeSet<i32> = labels.iter().copied().filter(|&l| l != NOISE).collect();
    (clusters.len(), labels.iter().filter(|&&l| l == NOISE).count())
}

fn finish_clustering(
    ws: &Workspace,
    config: &Config,
    stage: &str,
    prefix: &str,
    rows: &[ClusterRow],
    embedding: &Embedding2D,
    params: serde_json::Value,
) -> Result<(), PipelineError> {
    let labels: Vec<i32> = rows.iter().map(|r| r.cluster).collect();
    let (clusters, noise) = count_clusters(&labels);
    log::info!("{stage}: {} identities in {clusters} clusters, {noise} noise", rows.len());
    write_clusters(ws, stage, &format!("{prefix}_clusters.csv"), rows)?;
    let ids = load_identities(ws, stage)?;
    let teams = optional_team_map(config, stage)?;
    ws.write_text(stage, &format!("{prefix}_clusters.svg"), &scatter_svg(prefix, rows, &ids, &teams))?;
    ws.write_json(
        stage,
        &format!("{prefix}_meta.json"),
        &ClusterMeta {
            embedding: "classical-mds",
            identities: rows.len(),
            clusters,
            noise,
            eigenvalues: embedding.eigenvalues,
            negative_eigenvalues_clamped: embedding.clamped,
            params,
        },
    )
}

fn cluster_activity(config: &Config, ws: &Workspace) -> Result<(), PipelineError> {
    let stage = "cluster-activity";
    let f = fail(stage);
    let series: Vec<SeriesRecord> = ws.read_json(stage, SERIES)?;
    let ids: Vec<u32> = series.iter().map(|s| s.identity).collect();
    let min_pts = config.dbscan.min_pts;
    let (labels, embedding, eps) = if series.len() < 2 {
        (vec![0; series.len()], trivial_embedding(series.len()), None)
    } else {
        let values: Vec<&[f64]> = series.iter().map(|s| s.values.as_slice()).collect();
        let d = pairwise_dtw(&values, config.dtw).map_err(|e| f(e.to_string()))?;
        let eps = match config.dbscan.eps {
            Some(eps) => eps,
            None => knee_eps(&d, min_pts).map_err(|e| f(e.to_string()))?,
        };
        let labels = dbscan(&d, DbscanParams { eps, min_pts }).map_err(|e| f(e.to_string()))?;
        (labels, embed_2d(&d).map_err(|e| f(e.to_string()))?, Some(eps))
    };
    let rows = rows_from(&ids, &labels, &embedding);
    let params = serde_json::json!({
        "method": "dbscan",
        "distance": "fast-dtw",
        "radius": config.dtw.radius,
        "eps": eps,
        "eps_source": if config.dbscan.eps.is_some() { "config" } else { "knee" },
        "min_pts": min_pts,
    });
    finish_clustering(ws, config, stage, "activity", &rows, &embedding, params)
}

fn cluster_experience(config: &Config, ws: &Workspace) -> Result<(), PipelineError> {
    let stage = "cluster-experience";
    let f = fail(stage);
    let matrix = LangMatrix::read_csv(ws.read_text(stage, LANGMATRIX)?.as_bytes())
        .map_err(|e| f(format!("{LANGMATRIX}: {e}")))?;
    let n = matrix.rows.len();
    let seed = derive_seed(config.seed, "kmeans");
    let (labels, embedding, k, wcss) = if n < 2 {
        (vec![0; n], trivial_embedding(n), n.min(1), Vec::new())
    } else {
        let d = pairwise_l2(&matrix.values).map_err(|e| f(e.to_string()))?;
        let embedding = embed_2d(&d).map_err(|e| f(e.to_string()))?;
        let points = match config.kmeans.space {
            KMeansSpace::Embedding => embedding.rows(),
            KMeansSpace::Original => matrix.values.clone(),
        };
        let k_max = config.kmeans.k_max.min(n);
        let (fit, wcss) = if k_max < 2 {
            let fit = kmeans(&points, 1, seed).map_err(|e| f(e.to_string()))?;
            let wcss = vec![fit.wcss];
            (fit, wcss)
        } else {
            let elbow = select_k_elbow(&points, k_max, seed).map_err(|e| f(e.to_string()))?;
            (elbow.best, elbow.wcss)
        };
        let labels = fit.labels.iter().map(|&l| l as i32).collect();
        (labels, embedding, fit.centers.len(), wcss)
    };
    let rows = rows_from(&matrix.rows, &labels, &embedding);
    let params = serde_json::json!({
        "method": "kmeans",
        "distance": "l2",
        "space": config.kmeans.space,
        "k": k,
        "k_max": config.kmeans.k_max,
        "wcss_by_k": wcss,
        "saturation_percentile": config.saturation_percentile,
    });
    finish_clustering(ws, config, stage, "experience", &rows, &embedding, params)
}

fn topics(config: &Config, ws: &Workspace) -> Result<(), PipelineError> {
    let stage = "topics";
    let f = fail(stage);
    let docs: BTreeMap<u32, TermWeights> = ws.read_json(stage, DEVDOCS)?;
    if docs.is_empty() {
        return Err(f("no developer has an identifier document; topics need a multi-file corpus".into()));
    }
    let params = TopicParams {
        seed: derive_seed(config.seed, "topics"),
        ..config.topics.clone()
    };
    let model = fit_topics(&docs, &params).map_err(|e| f(e.to_string()))?;
    log::info!(
        "fitted {} topics over {} documents in {} iterations",
        model.n_topics(),
        model.documents.len(),
        model.iterations
    );
    ws.write_json(stage, TOPICS, &model)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["topic", "rank", "term", "score"]).map_err(|e| f(e.to_string()))?;
    for t in 0..model.n_topics() {
        for (rank, (term, score)) in top_terms(&model, t, config.top_terms).map_err(|e| f(e.to_string()))?.into_iter().enumerate() {
            w.write_record([t.to_string(), (rank + 1).to_string(), term, score.to_string()])
                .map_err(|e| f(e.to_string()))?;
        }
    }
    let bytes = w.into_inner().map_err(|e| f(e.to_string()))?;
    ws.write_text(stage, TOPIC_TERMS, &String::from_utf8(bytes).expect("utf-8 csv"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamRecovery {
    pub identities: usize,
    pub activity_ari: f64,
    pub experience_ari: f64,
    pub topic_purity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementFile {
    pub activity: AgreementReport,
    pub experience: AgreementReport,
    pub embedding: String,
    pub stubs_excluded: usize,
    /// Present when a team map labels at least one identity.
    pub team_recovery: Option<TeamRecovery>,
}

fn report(config: &Config, ws: &Workspace) -> Result<(), PipelineError> {
    let stage = "report";
    let f = fail(stage);
    let ids = load_identities(ws, stage)?;
    let model: TopicModel = ws.read_json(stage, TOPICS)?;
    let activity = read_clusters(ws, stage, "activity_clusters.csv")?;
    let experience = read_clusters(ws, stage, "experience_clusters.csv")?;
    let team_map = optional_team_map(config, stage)?;

    let excluded: BTreeSet<u32> = if config.report.include_stubs { BTreeSet::new() } else { ids.stub_ids() };
    let keep = |id: &u32| !excluded.contains(id);
    let mut main = main_topics(&model);
    main.retain(|id, _| keep(id));
    let labels = |rows: &[ClusterRow]| -> BTreeMap<u32, i32> {
        rows.iter().filter(|r| keep(&r.identity)).map(|r| (r.identity, r.cluster)).collect()
    };
    let (activity_labels, experience_labels) = (labels(&activity), labels(&experience));
    let teams = team_labels(&ids.identities, &team_map);

    let mode = config.report.mode;
    let trials = config.report.trials;
    let agreement = |labels: &BTreeMap<u32, i32>, name: &str| {
        agreement_report(&main, labels, trials, derive_seed(config.seed, &format!("baseline/{name}")), mode)
            .map_err(|e| f(format!("{name}: {e}")))
    };

    let mapped: Vec<u32> = teams
        .iter()
        .filter(|(id, team)| team.as_str() != EXTERNAL && keep(id))
        .filter(|(id, _)| activity_labels.contains_key(id) && experience_labels.contains_key(id) && main.contains_key(id))
        .map(|(id, _)| *id)
        .collect();
    let team_recovery = (!mapped.is_empty()).then(|| {
        let truth: Vec<&str> = mapped.iter().map(|id| teams[id].as_str()).collect();
        let pick = |m: &BTreeMap<u32, i32>| mapped.iter().map(|id| m[id]).collect::<Vec<_>>();
        let topics: Vec<usize> = mapped.iter().map(|id| main[id]).collect();
        TeamRecovery {
            identities: mapped.len(),
            activity_ari: adjusted_rand_index(&pick(&activity_labels), &truth),
            experience_ari: adjusted_rand_index(&pick(&experience_labels), &truth),
            topic_purity: purity(&topics, &truth),
        }
    });

    let file = AgreementFile {
        activity: agreement(&activity_labels, "activity")?,
        experience: agreement(&experience_labels, "experience")?,
        embedding: "classical-mds".into(),
        stubs_excluded: excluded.len(),
        team_recovery,
    };
    ws.write_json(stage, AGREEMENT, &file)?;

    let table = topic_team_table(&main, model.n_topics(), &teams);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["topic", "team", "count"]).map_err(|e| f(e.to_string()))?;
    for (t, row) in table.iter().enumerate() {
        if row.is_empty() {
            w.write_record([t.to_string(), String::new(), "0".into()]).map_err(|e| f(e.to_string()))?;
        }
        for (team, n) in row {
            w.write_record([t.to_string(), team.clone(), n.to_string()]).map_err(|e| f(e.to_string()))?;
        }
    }
    let bytes = w.into_inner().map_err(|e| f(e.to_string()))?;
    ws.write_text(stage, TOPIC_TEAMS, &String::from_utf8(bytes).expect("utf-8 csv"))?;

    let visible = |rows: &[ClusterRow]| rows.iter().filter(|r| keep(&r.identity)).cloned().collect::<Vec<_>>();
    ws.write_text(stage, "activity.svg", &scatter_svg("commit activity", &visible(&activity), &ids, &team_map))?;
    ws.write_text(
        stage,
        "experience.svg",
        &scatter_svg("language experience", &visible(&experience), &ids, &team_map),
    )
}
