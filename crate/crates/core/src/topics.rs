//! Additively regularized PLSA over developer identifier documents, with
//! inter-topic decorrelation and sparsity offsets.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::features::TermWeights;

#[derive(Debug, Error)]
pub enum TopicError {
    #[error("corpus has no documents")]
    EmptyCorpus,
    #[error("all documents are empty")]
    AllDocumentsEmpty,
    #[error("need at least one topic")]
    NoTopics,
    #[error("invalid topic parameter: {0}")]
    InvalidParams(String),
    #[error("identity {0} has no document")]
    UnknownIdentity(u32),
    #[error("topic {topic} out of range for {n_topics} topics")]
    UnknownTopic { topic: usize, n_topics: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TopicParams {
    pub n_topics: usize,
    /// Decorrelation strength; `None` means `0.1 * corpus mass / |V|`.
    pub tau_decor: Option<f64>,
    pub beta_phi: f64,
    pub alpha_theta: f64,
    pub max_iters: usize,
    /// Relative log-likelihood change that stops the iterations.
    pub tol: f64,
    pub seed: u64,
    /// Scale every document to unit total weight before fitting.
    pub normalize_docs: bool,
}

impl Default for TopicParams {
    fn default() -> Self {
        Self {
            n_topics: 10,
            tau_decor: None,
            beta_phi: -0.01,
            alpha_theta: -0.01,
            max_iters: 200,
            tol: 1e-6,
            seed: 0,
            normalize_docs: false,
        }
    }
}

impl TopicParams {
    /// All regularizers off: plain PLSA.
    pub fn unregularized(n_topics: usize, seed: u64) -> Self {
        Self {
            n_topics,
            tau_decor: Some(0.0),
            beta_phi: 0.0,
            alpha_theta: 0.0,
            seed,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), TopicError> {
        if self.n_topics == 0 {
            return Err(TopicError::NoTopics);
        }
        if let Some(tau) = self.tau_decor {
            if !(tau >= 0.0) {
                return Err(TopicError::InvalidParams(format!("tau_decor must be >= 0, got {tau}")));
            }
        }
        if !(self.beta_phi <= 0.0) || !(self.alpha_theta <= 0.0) {
            return Err(TopicError::InvalidParams("beta_phi and alpha_theta must be <= 0".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(TopicError::InvalidParams(format!("tol must be >= 0, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub vocabulary: Vec<String>,
    /// Identity id of every theta column.
    pub documents: Vec<u32>,
    /// `phi[w][t]`: probability of term `w` in topic `t`.
    pub phi: Vec<Vec<f64>>,
    /// `theta[t][d]`: weight of topic `t` in document `d`.
    pub theta: Vec<Vec<f64>>,
    pub params: TopicParams,
    /// Decorrelation strength actually used.
    pub tau_decor: f64,
    pub log_likelihood: f64,
    /// Log-likelihood of the initial model and after every M-step.
    pub likelihood_trace: Vec<f64>,
    pub iterations: usize,
    /// Topics whose term column collapsed again after being rescued.
    pub empty_topics: Vec<usize>,
}

impl TopicModel {
    pub fn n_topics(&self) -> usize {
        self.params.n_topics
    }

    pub fn phi_column(&self, t: usize) -> Vec<f64> {
        self.phi.iter().map(|row| row[t]).collect()
    }
}

/// State handed to an observer after every M-step.
pub struct IterationView<'a> {
    pub iteration: usize,
    pub phi: &'a [Vec<f64>],
    pub theta: &'a [Vec<f64>],
    pub log_likelihood: f64,
}

struct Corpus {
    vocabulary: Vec<String>,
    documents: Vec<u32>,
    /// Sparse `(term index, weight)` per document.
    counts: Vec<Vec<(usize, f64)>>,
    /// Document visiting order for accumulation, by content hash.
    order: Vec<usize>,
}

fn content_hash(doc: &[(usize, f64)], vocabulary: &[String]) -> [u8; 32] {
    let mut h = Sha256::new();
    for &(w, n) in doc {
        h.update(vocabulary[w].as_bytes());
        h.update([0]);
        h.update(n.to_bits().to_le_bytes());
    }
    h.finalize().into()
}

fn build_corpus(docs: &BTreeMap<u32, TermWeights>, normalize: bool) -> Result<Corpus, TopicError> {
    if docs.is_empty() {
        return Err(TopicError::EmptyCorpus);
    }
    let mut vocabulary: Vec<String> = docs
        .values()
        .flat_map(|d| d.iter().filter(|(_, &w)| w > 0.0).map(|(t, _)| t.clone()))
        .collect();
    vocabulary.sort();
    vocabulary.dedup();
    if vocabulary.is_empty() {
        return Err(TopicError::AllDocumentsEmpty);
    }
    let index: BTreeMap<&str, usize> = vocabulary.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
    let mut documents = Vec::new();
    let mut counts = Vec::new();
    for (&id, doc) in docs {
        let total: f64 = doc.values().filter(|w| **w > 0.0).sum();
        let scale = if normalize && total > 0.0 { 1.0 / total } else { 1.0 };
        documents.push(id);
        counts.push(
            doc.iter()
                .filter(|(_, &w)| w > 0.0)
                .map(|(t, &w)| (index[t.as_str()], w * scale))
                .collect::<Vec<_>>(),
        );
    }
    let hashes: Vec<[u8; 32]> = counts.iter().map(|c| content_hash(c, &vocabulary)).collect();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| hashes[a].cmp(&hashes[b]).then(a.cmp(&b)));
    Ok(Corpus {
        vocabulary,
        documents,
        counts,
        order,
    })
}

fn mixture(phi: &[Vec<f64>], theta: &[Vec<f64>], w: usize, d: usize) -> f64 {
    phi[w].iter().enumerate().map(|(t, p)| p * theta[t][d]).sum()
}

fn log_likelihood(corpus: &Corpus, phi: &[Vec<f64>], theta: &[Vec<f64>]) -> f64 {
    corpus
        .order
        .iter()
        .map(|&d| {
            corpus.counts[d]
                .iter()
                .map(|&(w, n)| n * mixture(phi, theta, w, d).max(f64::MIN_POSITIVE).ln())
                .sum::<f64>()
        })
        .sum()
}

/// Expected topic counts `(n_wt, n_td)` under the current model.
fn e_step(corpus: &Corpus, phi: &[Vec<f64>], theta: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n_topics = theta.len();
    let mut n_wt = vec![vec![0.0; n_topics]; phi.len()];
    let mut n_td = vec![vec![0.0; corpus.counts.len()]; n_topics];
    let mut resp = vec![0.0; n_topics];
    for &d in &corpus.order {
        for &(w, n) in &corpus.counts[d] {
            let mut z = 0.0;
            for t in 0..n_topics {
                resp[t] = phi[w][t] * theta[t][d];
                z += resp[t];
            }
            if z <= 0.0 {
                continue;
            }
            for t in 0..n_topics {
                let share = n * resp[t] / z;
                n_wt[w][t] += share;
                n_td[t][d] += share;
            }
        }
    }
    (n_wt, n_td)
}

fn normalize(values: &mut [f64]) -> bool {
    let total: f64 = values.iter().sum();
    if total > 0.0 && total.is_finite() {
        for v in values.iter_mut() {
            *v /= total;
        }
        true
    } else {
        false
    }
}

/// Fits the model; see [`fit_topics_observed`].
pub fn fit_topics(docs: &BTreeMap<u32, TermWeights>, params: &TopicParams) -> Result<TopicModel, TopicError> {
    fit_topics_observed(docs, params, |_| {})
}

/// EM for PLSA with the M-step
/// `phi[w][t] ∝ max(0, n_wt + beta_phi - tau * phi[w][t] * Σ_{s≠t} phi[w][s])`
/// and `theta[t][d] ∝ max(0, n_td + alpha_theta)`. Documents are visited in
/// content-hash order, so permuting them permutes theta and leaves phi
/// unchanged. `observe` sees the model after every M-step.
pub fn fit_topics_observed<F>(
    docs: &BTreeMap<u32, TermWeights>,
    params: &TopicParams,
    mut observe: F,
) -> Result<TopicModel, TopicError>
where
    F: FnMut(&IterationView),
{
    params.validate()?;
    let corpus = build_corpus(docs, params.normalize_docs)?;
    let n_topics = params.n_topics;
    let n_terms = corpus.vocabulary.len();
    let n_docs = corpus.counts.len();
    if n_terms < n_topics {
        log::warn!("vocabulary of {n_terms} terms is smaller than {n_topics} topics");
    }
    let mass: f64 = corpus.counts.iter().flatten().map(|(_, n)| n).sum();
    let tau = params.tau_decor.unwrap_or(0.1 * mass / n_terms as f64);

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut phi = vec![vec![0.0; n_topics]; n_terms];
    for t in 0..n_topics {
        let mut column: Vec<f64> = (0..n_terms).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        if !normalize(&mut column) {
            column = vec![1.0 / n_terms as f64; n_terms];
        }
        for (w, v) in column.into_iter().enumerate() {
            phi[w][t] = v;
        }
    }
    let mut theta = vec![vec![1.0 / n_topics as f64; n_docs]; n_topics];

    let mut rescued = vec![false; n_topics];
    let mut empty = vec![false; n_topics];
    let mut trace = vec![log_likelihood(&corpus, &phi, &theta)];
    let mut iterations = 0;
    while iterations < params.max_iters {
        iterations += 1;
        let (n_wt, n_td) = e_step(&corpus, &phi, &theta);

        let mut next_phi = vec![vec![0.0; n_topics]; n_terms];
        for t in 0..n_topics {
            if empty[t] {
                for row in next_phi.iter_mut() {
                    row[t] = 1.0 / n_terms as f64;
                }
                continue;
            }
            let mut column: Vec<f64> = (0..n_terms)
                .map(|w| {
                    let others: f64 = (0..n_topics).filter(|&s| s != t).map(|s| phi[w][s]).sum();
                    (n_wt[w][t] + params.beta_phi - tau * phi[w][t] * others).max(0.0)
                })
                .collect();
            if !normalize(&mut column) {
                if rescued[t] {
                    log::warn!("topic {t} collapsed twice and is left empty");
                    empty[t] = true;
                    column = vec![1.0 / n_terms as f64; n_terms];
                } else {
                    rescued[t] = true;
                    column = residual_distribution(&corpus, &phi, &theta);
                }
            }
            for (w, v) in column.into_iter().enumerate() {
                next_phi[w][t] = v;
            }
        }

        let mut next_theta = vec![vec![0.0; n_docs]; n_topics];
        let live: Vec<usize> = (0..n_topics).filter(|&t| !empty[t]).collect();
        for d in 0..n_docs {
            let mut column: Vec<f64> = live.iter().map(|&t| (n_td[t][d] + params.alpha_theta).max(0.0)).collect();
            if !normalize(&mut column) {
                column = live.iter().map(|&t| n_td[t][d]).collect();
                if !normalize(&mut column) {
                    column = vec![1.0 / live.len().max(1) as f64; live.len()];
                }
            }
            for (&t, v) in live.iter().zip(column) {
                next_theta[t][d] = v;
            }
        }
        phi = next_phi;
        theta = next_theta;

        let ll = log_likelihood(&corpus, &phi, &theta);
        let prev = *trace.last().expect("initial likelihood");
        trace.push(ll);
        observe(&IterationView {
            iteration: iterations,
            phi: &phi,
            theta: &theta,
            log_likelihood: ll,
        });
        if (ll - prev).abs() <= params.tol * prev.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }

    Ok(TopicModel {
        vocabulary: corpus.vocabulary,
        documents: corpus.documents,
        phi,
        theta,
        params: params.clone(),
        tau_decor: tau,
        log_likelihood: *trace.last().expect("initial likelihood"),
        likelihood_trace: trace,
        iterations,
        empty_topics: (0..n_topics).filter(|&t| empty[t]).collect(),
    })
}

/// Term mass the current model explains worst: `Σ_d n_dw (1 - p(w|d))`.
fn residual_distribution(corpus: &Corpus, phi: &[Vec<f64>], theta: &[Vec<f64>]) -> Vec<f64> {
    let mut r = vec![0.0; phi.len()];
    for &d in &corpus.order {
        for &(w, n) in &corpus.counts[d] {
            r[w] += n * (1.0 - mixture(phi, theta, w, d)).max(0.0);
        }
    }
    if !normalize(&mut r) {
        r = vec![1.0 / phi.len() as f64; phi.len()];
    }
    r
}

/// Terms of topic `t` ranked by `phi * ln(phi / mean over topics)`, best
/// first; ties broken alphabetically, zero-probability terms dropped.
pub fn top_terms(model: &TopicModel, topic: usize, n: usize) -> Result<Vec<(String, f64)>, TopicError> {
    let n_topics = model.n_topics();
    if topic >= n_topics {
        return Err(TopicError::UnknownTopic { topic, n_topics });
    }
    let mut scored: Vec<(String, f64)> = model
        .phi
        .iter()
        .zip(&model.vocabulary)
        .filter(|(row, _)| row[topic] > 0.0)
        .map(|(row, term)| {
            let mean = row.iter().sum::<f64>() / n_topics as f64;
            let p = row[topic];
            (term.clone(), p * (p / mean).ln())
        })
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored.truncate(n);
    Ok(scored)
}

/// Highest-weight topic of an identity's document; ties go to the lower index.
pub fn main_topic(model: &TopicModel, identity: u32) -> Result<usize, TopicError> {
    let d = model
        .documents
        .iter()
        .position(|&id| id == identity)
        .ok_or(TopicError::UnknownIdentity(identity))?;
    Ok(argmax_first((0..model.n_topics()).map(|t| model.theta[t][d])))
}

fn argmax_first(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// Main topic of every document.
pub fn main_topics(model: &TopicModel) -> BTreeMap<u32, usize> {
    model
        .documents
        .iter()
        .enumerate()
        .map(|(d, &id)| (id, argmax_first((0..model.n_topics()).map(|t| model.theta[t][d]))))
        .collect()
}

/// Mean pairwise cosine similarity between phi columns.
pub fn mean_topic_cosine(model: &TopicModel) -> f64 {
    let cols: Vec<Vec<f64>> = (0..model.n_topics()).map(|t| model.phi_column(t)).collect();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut total = 0.0;
    let mut pairs = 0;
    for a in 0..cols.len() {
        for b in a + 1..cols.len() {
            let dot: f64 = cols[a].iter().zip(&cols[b]).map(|(x, y)| x * y).sum();
            total += dot / (norm(&cols[a]) * norm(&cols[b]));
            pairs += 1;
        }
    }
    if pairs == 0 {
        0.0
    } else {
        total / pairs as f64
    }
}

/// Fraction of phi entries that are exactly zero.
pub fn phi_zero_fraction(model: &TopicModel) -> f64 {
    let cells = model.phi.len() * model.n_topics();
    let zeros = model.phi.iter().flatten().filter(|&&p| p == 0.0).count();
    zeros as f64 / cells as f64
}
