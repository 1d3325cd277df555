//! Latent Dirichlet allocation trained by online variational Bayes.
//!
//! The corpus is swept `passes` times. Each sweep is cut into chunks of
//! `chunksize` documents; every chunk runs a per-document variational E-step
//! (at most `iterations` rounds, stopping early once the mean absolute change
//! of gamma drops below `gamma_threshold`) and then blends the chunk's
//! sufficient statistics into the topic-word weights with step size
//! `rho_t = (tau0 + t)^-kappa`, where `t` counts the updates done so far.
//!
//! All random draws derive from `LdaParams::seed`, so training is
//! deterministic. Per-document E-steps of a chunk run in parallel and are merged
//! in document order, which keeps the result identical to a sequential run.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{BowDocument, Dictionary};
use crate::error::{Error, Result};
use crate::math::{derive_seed, dirichlet_expectation};

const PHI_FLOOR: f64 = 1e-100;
const INFER_STREAM: u64 = 0x1f3d_5b79;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LdaParams {
    pub num_topics: usize,
    /// Cap on E-step rounds per document.
    pub iterations: usize,
    /// Documents per update.
    pub chunksize: usize,
    /// Full sweeps over the corpus.
    pub passes: usize,
    /// Per-topic Dirichlet prior on document mixtures.
    pub alpha: Vec<f64>,
    /// Symmetric Dirichlet prior on topic-word distributions.
    pub eta: f64,
    pub kappa: f64,
    pub tau0: f64,
    pub gamma_threshold: f64,
    pub seed: u64,
}

impl LdaParams {
    /// Defaults: symmetric `alpha = eta = 1/K`, `kappa = 0.5`, `tau0 = 1`,
    /// `gamma_threshold = 1e-3`, 50 iterations, one pass, chunks of 2000.
    pub fn new(num_topics: usize) -> Self {
        let k = num_topics.max(1) as f64;
        LdaParams {
            num_topics,
            iterations: 50,
            chunksize: 2000,
            passes: 1,
            alpha: vec![1.0 / k; num_topics],
            eta: 1.0 / k,
            kappa: 0.5,
            tau0: 1.0,
            gamma_threshold: 1e-3,
            seed: 0,
        }
    }

    pub fn iterations(mut self, iterations: usize) -> Self {
        self.iterations = iterations;
        self
    }

    pub fn chunksize(mut self, chunksize: usize) -> Self {
        self.chunksize = chunksize;
        self
    }

    pub fn passes(mut self, passes: usize) -> Self {
        self.passes = passes;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn symmetric_alpha(mut self, alpha: f64) -> Self {
        self.alpha = vec![alpha; self.num_topics];
        self
    }

    pub fn eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    /// Same parameters with a different topic count; alpha and eta keep their
    /// `1/K` convention if they followed it before.
    pub fn with_num_topics(&self, num_topics: usize) -> Self {
        let old_k = self.num_topics.max(1) as f64;
        let new_k = num_topics.max(1) as f64;
        let default_alpha = self.alpha.iter().all(|&a| a == 1.0 / old_k);
        let mut p = self.clone();
        p.num_topics = num_topics;
        p.alpha = if default_alpha || self.alpha.is_empty() {
            vec![1.0 / new_k; num_topics]
        } else {
            vec![self.alpha[0]; num_topics]
        };
        if self.eta == 1.0 / old_k {
            p.eta = 1.0 / new_k;
        }
        p
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.num_topics == 0 {
            return bad("num_topics must be >= 1".into());
        }
        if self.iterations == 0 || self.chunksize == 0 || self.passes == 0 {
            return bad("iterations, chunksize and passes must be >= 1".into());
        }
        if self.alpha.len() != self.num_topics {
            return bad(format!(
                "alpha has {} entries, expected {}",
                self.alpha.len(),
                self.num_topics
            ));
        }
        if self.alpha.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return bad("alpha entries must be positive".into());
        }
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return bad("eta must be positive".into());
        }
        if !(self.kappa >= 0.5 && self.kappa <= 1.0) {
            return bad(format!("kappa {} not in [0.5, 1]", self.kappa));
        }
        if !(self.tau0.is_finite() && self.tau0 >= 0.0) {
            return bad("tau0 must be >= 0".into());
        }
        if !(self.gamma_threshold.is_finite() && self.gamma_threshold > 0.0) {
            return bad("gamma_threshold must be positive".into());
        }
        Ok(())
    }
}

/// Probability vector over topics for one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TopicDistribution {
    probs: Vec<f64>,
}

impl TopicDistribution {
    /// Normalizes non-negative weights with a positive sum.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidArgument(
                "weights must be finite and non-negative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidArgument("weights sum to zero".into()));
        }
        Ok(TopicDistribution {
            probs: weights.into_iter().map(|w| w / total).collect(),
        })
    }

    pub fn uniform(k: usize) -> Self {
        TopicDistribution {
            probs: vec![1.0 / k as f64; k],
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn num_topics(&self) -> usize {
        self.probs.len()
    }
}

/// Index of the most probable topic; the lowest index wins ties.
pub fn dominant_topic(dist: &TopicDistribution) -> usize {
    let mut best = 0;
    for (k, &p) in dist.probs().iter().enumerate() {
        if p > dist.probs()[best] {
            best = k;
        }
    }
    best
}

/// Trained topic model.
#[derive(Debug, Clone)]
pub struct LdaModel {
    params: LdaParams,
    dictionary: Dictionary,
    num_terms: usize,
    /// K x V topic-word weights, row-major.
    lambda: Vec<f64>,
    /// exp(E[log beta]), same layout as `lambda`.
    exp_elog_beta: Vec<f64>,
    updates_done: u64,
}

struct EStep {
    gamma: Vec<f64>,
    /// K x n_entries contribution `exp(E[log theta_k]) * count / phinorm`.
    sstats: Vec<f64>,
}

fn gamma_init(k: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Gamma::new(100.0, 0.01).expect("valid gamma parameters");
    (0..k).map(|_| dist.sample(&mut rng)).collect()
}

impl LdaModel {
    pub fn params(&self) -> &LdaParams {
        &self.params
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dictionary
    }

    pub fn num_topics(&self) -> usize {
        self.params.num_topics
    }

    pub fn num_terms(&self) -> usize {
        self.num_terms
    }

    pub fn updates_done(&self) -> u64 {
        self.updates_done
    }

    /// Raw (unnormalized) variational topic-word weights.
    pub fn lambda_row(&self, k: usize) -> &[f64] {
        &self.lambda[k * self.num_terms..(k + 1) * self.num_terms]
    }

    /// Row `k` of the topic-word matrix normalized to a probability vector.
    pub fn topic_word_probs(&self, k: usize) -> Vec<f64> {
        let row = self.lambda_row(k);
        let total: f64 = row.iter().sum();
        row.iter().map(|w| w / total).collect()
    }

    fn exp_elog_beta_row(&self, k: usize) -> &[f64] {
        &self.exp_elog_beta[k * self.num_terms..(k + 1) * self.num_terms]
    }

    fn refresh_expectations(&mut self) {
        let v = self.num_terms;
        let mut out = vec![0.0; self.lambda.len()];
        for (row, out_row) in self.lambda.chunks(v).zip(out.chunks_mut(v)) {
            dirichlet_expectation(row, out_row);
            for x in out_row.iter_mut() {
                *x = x.exp();
            }
        }
        self.exp_elog_beta = out;
    }

    /// Variational E-step for one document against the current topics.
    fn e_step(&self, bow: &BowDocument, init_seed: u64) -> EStep {
        let k = self.num_topics();
        let entries = bow.entries();
        let n = entries.len();
        let alpha = &self.params.alpha;

        let mut gamma = gamma_init(k, init_seed);
        let mut exp_elog_theta = vec![0.0; k];
        dirichlet_expectation(&gamma, &mut exp_elog_theta);
        exp_elog_theta.iter_mut().for_each(|x| *x = x.exp());

        // beta_d[k * n + j] = exp(E[log beta_{k, id_j}])
        let mut beta_d = vec![0.0; k * n];
        for t in 0..k {
            let row = self.exp_elog_beta_row(t);
            for (j, &(id, _)) in entries.iter().enumerate() {
                beta_d[t * n + j] = row[id];
            }
        }
        let counts: Vec<f64> = entries.iter().map(|&(_, c)| c as f64).collect();
        let phinorm = |theta: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|j| (0..k).map(|t| theta[t] * beta_d[t * n + j]).sum::<f64>() + PHI_FLOOR)
                .collect()
        };

        let mut norm = phinorm(&exp_elog_theta);
        let mut last = vec![0.0; k];
        for _ in 0..self.params.iterations {
            last.copy_from_slice(&gamma);
            for t in 0..k {
                let dot: f64 = (0..n)
                    .map(|j| counts[j] / norm[j] * beta_d[t * n + j])
                    .sum();
                gamma[t] = alpha[t] + exp_elog_theta[t] * dot;
            }
            dirichlet_expectation(&gamma, &mut exp_elog_theta);
            exp_elog_theta.iter_mut().for_each(|x| *x = x.exp());
            norm = phinorm(&exp_elog_theta);
            let change: f64 = gamma
                .iter()
                .zip(&last)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>()
                / k as f64;
            if change < self.params.gamma_threshold {
                break;
            }
        }

        let mut sstats = vec![0.0; k * n];
        for t in 0..k {
            for j in 0..n {
                sstats[t * n + j] = exp_elog_theta[t] * counts[j] / norm[j];
            }
        }
        EStep { gamma, sstats }
    }

    fn check_terms(&self, bow: &BowDocument) -> Result<()> {
        match bow.max_term_id() {
            Some(id) if id >= self.num_terms => Err(Error::InvalidArgument(format!(
                "term id {id} out of range for vocabulary of {}",
                self.num_terms
            ))),
            _ => Ok(()),
        }
    }

    fn update_chunk(&mut self, chunk: &[BowDocument], corpus_len: usize) -> Result<()> {
        let k = self.num_topics();
        let v = self.num_terms;
        let update = self.updates_done;
        let seed = self.params.seed;
        let results: Vec<EStep> = chunk
            .par_iter()
            .enumerate()
            .map(|(pos, bow)| self.e_step(bow, derive_seed(seed, &[update, pos as u64])))
            .collect();

        let mut sstats = vec![0.0; k * v];
        for (bow, res) in chunk.iter().zip(&results) {
            let n = bow.entries().len();
            for t in 0..k {
                for (j, &(id, _)) in bow.entries().iter().enumerate() {
                    sstats[t * v + id] += res.sstats[t * n + j];
                }
            }
        }

        let rho = (self.params.tau0 + update as f64).powf(-self.params.kappa);
        let scale = corpus_len as f64 / chunk.len() as f64;
        let eta = self.params.eta;
        for ((lam, &ss), &eb) in self.lambda.iter_mut().zip(&sstats).zip(&self.exp_elog_beta) {
            *lam = (1.0 - rho) * *lam + rho * (eta + scale * ss * eb);
        }
        if self.lambda.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::NumericalFailure { update });
        }
        self.refresh_expectations();
        if self.exp_elog_beta.iter().any(|x| !x.is_finite()) {
            return Err(Error::NumericalFailure { update });
        }
        self.updates_done += 1;
        Ok(())
    }

    /// Posterior topic mixture of `bow` under the frozen topics: normalized
    /// gamma from the E-step.
    pub fn infer(&self, bow: &BowDocument) -> Result<TopicDistribution> {
        self.check_terms(bow)?;
        let res = self.e_step(bow, derive_seed(self.params.seed, &[INFER_STREAM]));
        TopicDistribution::from_weights(res.gamma)
    }

    /// The `topn` most probable terms of topic `k`, ties broken by term id.
    pub fn topic_terms(&self, k: usize, topn: usize) -> Result<Vec<(String, f64)>> {
        if k >= self.num_topics() {
            return Err(Error::InvalidArgument(format!(
                "topic {k} out of range for {} topics",
                self.num_topics()
            )));
        }
        if topn == 0 || topn > self.num_terms {
            return Err(Error::InvalidArgument(format!(
                "topn {topn} not in 1..={}",
                self.num_terms
            )));
        }
        let probs = self.topic_word_probs(k);
        let mut order: Vec<usize> = (0..self.num_terms).collect();
        order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]).then(a.cmp(&b)));
        Ok(order
            .into_iter()
            .take(topn)
            .map(|id| {
                (
                    self.dictionary.token(id).unwrap_or_default().to_owned(),
                    probs[id],
                )
            })
            .collect())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json =
            serde_json::to_string(&ModelFile::from(self)).map_err(|e| Error::format("model", e))?;
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(&ModelFile::from(self)).map_err(|e| Error::format("model", e))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::format("model", e))?;
        file.into_model()
    }
}

/// On-disk model layout.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format: String,
    params: LdaParams,
    dictionary_hash: String,
    dictionary: Dictionary,
    updates_done: u64,
    num_topics: usize,
    num_terms: usize,
    /// Row-major K x V.
    lambda: Vec<f64>,
}

const MODEL_FORMAT: &str = "topicscope-lda/1";

impl From<&LdaModel> for ModelFile {
    fn from(m: &LdaModel) -> Self {
        ModelFile {
            format: MODEL_FORMAT.into(),
            params: m.params.clone(),
            dictionary_hash: m.dictionary.version_hash(),
            dictionary: m.dictionary.clone(),
            updates_done: m.updates_done,
            num_topics: m.num_topics(),
            num_terms: m.num_terms,
            lambda: m.lambda.clone(),
        }
    }
}

impl ModelFile {
    fn into_model(self) -> Result<LdaModel> {
        let fail = |d: &str| Err(Error::format("model", d));
        if self.format != MODEL_FORMAT {
            return fail("unsupported format tag");
        }
        self.params.validate()?;
        if self.dictionary.version_hash() != self.dictionary_hash {
            return fail("dictionary hash mismatch");
        }
        if self.num_topics != self.params.num_topics
            || self.num_terms != self.dictionary.len()
            || self.lambda.len() != self.num_topics * self.num_terms
        {
            return fail("inconsistent dimensions");
        }
        if self.lambda.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return fail("lambda entries must be positive");
        }
        let mut model = LdaModel {
            params: self.params,
            dictionary: self.dictionary,
            num_terms: self.num_terms,
            lambda: self.lambda,
            exp_elog_beta: Vec::new(),
            updates_done: self.updates_done,
        };
        model.refresh_expectations();
        Ok(model)
    }
}

/// Trains a model over `corpus`, encoded with `dictionary`.
pub fn train(
    corpus: &[BowDocument],
    dictionary: &Dictionary,
    params: &LdaParams,
) -> Result<LdaModel> {
    train_with_observer(corpus, dictionary, params, |_| {})
}

/// [`train`], calling `observer` after every global update.
pub fn train_with_observer(
    corpus: &[BowDocument],
    dictionary: &Dictionary,
    params: &LdaParams,
    mut observer: impl FnMut(&LdaModel),
) -> Result<LdaModel> {
    params.validate()?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let v = dictionary.len();
    if v == 0 {
        return Err(Error::EmptyVocabulary);
    }
    let k = params.num_topics;
    if v < k {
        log::warn!("vocabulary size {v} is smaller than the topic count {k}");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let init = Gamma::new(100.0, 0.01).expect("valid gamma parameters");
    let lambda: Vec<f64> = (0..k * v).map(|_| init.sample(&mut rng)).collect();
    let mut model = LdaModel {
        params: params.clone(),
        dictionary: dictionary.clone(),
        num_terms: v,
        lambda,
        exp_elog_beta: Vec::new(),
        updates_done: 0,
    };
    model.refresh_expectations();
    for bow in corpus {
        model.check_terms(bow)?;
    }

    for pass in 0..params.passes {
        for chunk in corpus.chunks(params.chunksize) {
            model.update_chunk(chunk, corpus.len())?;
            observer(&model);
        }
        log::debug!("pass {} done, {} updates", pass + 1, model.updates_done);
    }
    Ok(model)
}
