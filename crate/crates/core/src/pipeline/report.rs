use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::analysis::{
    dominant_topic_shares, keyword_topics, representative_documents, topic_overview,
};
use crate::coherence::CoherenceResult;
use crate::error::{Error, Result};
use crate::inconsistency::{
    group_threads, inconsistent_topic_profile, similarity_histogram, thread_similarity,
    InconsistencyRecord,
};
use crate::lda::{train, LdaModel, LdaParams, TopicDistribution};
use crate::pipeline::config::Config;
use crate::pipeline::prepare::PreparedCorpus;
use crate::pipeline::stage_seed;
use crate::pipeline::sweep::{
    model_coherence, run_sweep, select_num_topics, SweepData, SweepParameter, SweepSpec,
};

pub const MODEL_FILE: &str = "model.json";
pub const TOPIC_TERMS_FILE: &str = "topic_terms.csv";
pub const KEYWORD_TOPICS_FILE: &str = "keyword_topics.csv";
pub const TOPIC_SHARES_FILE: &str = "topic_shares.json";
pub const TOPIC_OVERVIEW_FILE: &str = "topic_overview.json";
pub const SIMILARITY_FILE: &str = "similarity.csv";
pub const INCONSISTENCY_FILE: &str = "inconsistency.json";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub root: u64,
    pub split: u64,
    pub lda: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub articles: usize,
    pub comments: usize,
    pub skipped_article_lines: usize,
    pub skipped_comment_lines: usize,
    pub empty_after_filtering: usize,
    pub vocabulary: usize,
    pub train: usize,
    pub test: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub sweep_index: usize,
    pub tolerance: f64,
    pub num_topics: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub train_cv: CoherenceResult,
    pub test_cv: Option<CoherenceResult>,
    pub threads_scored: usize,
    pub threads_excluded: usize,
}

/// Everything needed to reproduce a report bundle, plus a hash of every file
/// in it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub config: Config,
    /// Directory relative input paths were resolved against.
    pub base_dir: PathBuf,
    pub seeds: Seeds,
    pub corpus: CorpusSummary,
    pub selection: Option<Selection>,
    pub final_params: LdaParams,
    pub metrics: Metrics,
    pub artifacts: Vec<Artifact>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format("manifest", e))
    }
}

/// Writes files into the output directory and removes them again unless the
/// run completes.
struct BundleWriter {
    dir: PathBuf,
    written: Vec<PathBuf>,
    artifacts: Vec<Artifact>,
    committed: bool,
}

impl BundleWriter {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(BundleWriter {
            dir: dir.to_path_buf(),
            written: Vec::new(),
            artifacts: Vec::new(),
            committed: false,
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e).in_stage("report"))?;
        self.written.push(path);
        self.artifacts.push(Artifact {
            file: name.to_owned(),
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    fn commit(mut self, manifest: &Manifest) -> Result<()> {
        let mut bytes =
            serde_json::to_vec_pretty(manifest).map_err(|e| Error::format("manifest", e))?;
        bytes.push(b'\n');
        let path = self.dir.join(MANIFEST_FILE);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.committed = true;
        Ok(())
    }
}

impl Drop for BundleWriter {
    fn drop(&mut self) {
        if !self.committed {
            for p in &self.written {
                let _ = fs::remove_file(p);
            }
        }
    }
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::format("csv", e);
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(&r).map_err(err)?;
    }
    w.into_inner()
        .map_err(|e| Error::format("csv", e.to_string()))
}

/// Topic-term table: one row per (topic, rank).
pub fn topic_terms_csv(model: &LdaModel, topn: usize) -> Result<Vec<u8>> {
    let topn = topn.min(model.num_terms());
    let mut rows = Vec::new();
    for k in 0..model.num_topics() {
        for (rank, (token, p)) in model.topic_terms(k, topn)?.into_iter().enumerate() {
            rows.push(vec![
                k.to_string(),
                (rank + 1).to_string(),
                token,
                p.to_string(),
            ]);
        }
    }
    csv_bytes(&["topic", "rank", "token", "probability"], rows)
}

/// Keyword table: each keyword with its topics, most probable first.
/// Keywords missing from the dictionary are skipped.
pub fn keyword_topics_csv(model: &LdaModel, keywords: &[String], floor: f64) -> Result<Vec<u8>> {
    let mut rows = Vec::new();
    for word in keywords {
        match keyword_topics(model, word, floor) {
            Ok(topics) => rows.push(vec![
                word.clone(),
                topics
                    .iter()
                    .map(|t| t.to_string())
                    .collect::<Vec<_>>()
                    .join(" "),
            ]),
            Err(Error::UnknownToken(_)) => {
                log::warn!("keyword {word:?} not in the dictionary, skipped")
            }
            Err(e) => return Err(e),
        }
    }
    csv_bytes(&["keyword", "topics"], rows)
}

pub fn similarity_csv(records: &[InconsistencyRecord]) -> Result<Vec<u8>> {
    let rows = records
        .iter()
        .map(|r| {
            vec![
                r.news_id.clone(),
                r.similarity.to_string(),
                r.article_dominant.to_string(),
                r.comments_dominant.to_string(),
                r.n_comments.to_string(),
            ]
        })
        .collect();
    csv_bytes(
        &[
            "news_id",
            "similarity",
            "article_dominant",
            "comments_dominant",
            "n_comments",
        ],
        rows,
    )
}

/// Topic distribution of every document with a nonempty bag of words, in
/// corpus order; `None` for the rest.
pub fn infer_all(
    model: &LdaModel,
    prepared: &PreparedCorpus,
) -> Result<Vec<Option<TopicDistribution>>> {
    use rayon::prelude::*;
    prepared
        .documents
        .par_iter()
        .map(|d| {
            if d.bow.is_empty() {
                Ok(None)
            } else {
                model.infer(&d.bow).map(Some)
            }
        })
        .collect()
}

/// Files produced by the analysis stage: (name, bytes).
pub fn analysis_outputs(
    cfg: &Config,
    prepared: &PreparedCorpus,
    model: &LdaModel,
    dists: &[Option<TopicDistribution>],
) -> Result<Vec<(&'static str, Vec<u8>)>> {
    let present: Vec<(String, TopicDistribution)> = prepared
        .documents
        .iter()
        .zip(dists)
        .filter_map(|(d, t)| t.clone().map(|t| (d.doc_id.clone(), t)))
        .collect();
    let all: Vec<TopicDistribution> = present.iter().map(|(_, t)| t.clone()).collect();

    let keywords = if cfg.analysis.keywords.is_empty() {
        prepared.frequent_tokens(cfg.analysis.keyword_count)
    } else {
        cfg.analysis.keywords.clone()
    };
    let shares = dominant_topic_shares(&all)?;
    let reps = representative_documents(&present)?;
    let reps_json: Vec<_> = reps
        .iter()
        .enumerate()
        .map(|(k, r)| json!({"topic": k, "representative": r}))
        .collect();
    let pretty = |v: serde_json::Value| -> Result<Vec<u8>> {
        let mut b = serde_json::to_vec_pretty(&v).map_err(|e| Error::format("json", e))?;
        b.push(b'\n');
        Ok(b)
    };

    let mut out = vec![
        (
            TOPIC_TERMS_FILE,
            topic_terms_csv(model, cfg.analysis.top_terms)?,
        ),
        (
            KEYWORD_TOPICS_FILE,
            keyword_topics_csv(model, &keywords, cfg.analysis.keyword_floor)?,
        ),
        (
            TOPIC_SHARES_FILE,
            pretty(json!({
                "documents": all.len(),
                "counts": shares.counts,
                "proportions": shares.proportions,
                "representatives": reps_json,
            }))?,
        ),
    ];
    if model.num_topics() >= 2 {
        let overview = topic_overview(model, &all)?;
        out.push((
            TOPIC_OVERVIEW_FILE,
            pretty(serde_json::to_value(&overview).expect("serializable"))?,
        ));
    } else {
        log::warn!("single-topic model: topic overview has nothing to embed");
        out.push((
            TOPIC_OVERVIEW_FILE,
            pretty(json!({"distance": [[0.0]], "coords": [[0.0, 0.0]], "shares": [1.0], "stress": 0.0}))?,
        ));
    }
    Ok(out)
}

pub struct InconsistencyOutputs {
    pub files: Vec<(&'static str, Vec<u8>)>,
    pub scored: usize,
    pub excluded: usize,
}

pub fn inconsistency_outputs(
    cfg: &Config,
    prepared: &PreparedCorpus,
    dists: &[Option<TopicDistribution>],
) -> Result<InconsistencyOutputs> {
    let items: Vec<_> = prepared
        .documents
        .iter()
        .zip(dists)
        .map(|(d, t)| (d.news_id.clone(), d.kind, t.clone()))
        .collect();
    let (groups, excluded) = group_threads(&items);
    if groups.is_empty() {
        return Err(Error::InvalidArgument(
            "no thread has both a usable article and a usable comment".into(),
        ));
    }
    let records = groups
        .iter()
        .map(|g| thread_similarity(g, cfg.inconsistency.aggregation))
        .collect::<Result<Vec<_>>>()?;
    let histogram = similarity_histogram(&records, &cfg.inconsistency.bin_edges)?;
    let all: Vec<TopicDistribution> = dists.iter().flatten().cloned().collect();
    let (profile, profile_error) =
        match inconsistent_topic_profile(&records, &all, cfg.inconsistency.threshold) {
            Ok(p) => (Some(p), None),
            Err(e @ (Error::EmptySelection(_) | Error::ZeroVariance)) => {
                log::warn!("topic profile unavailable: {e}");
                (None, Some(e.to_string()))
            }
            Err(e) => return Err(e),
        };
    let mut report = serde_json::to_vec_pretty(&json!({
        "aggregation": cfg.inconsistency.aggregation,
        "threshold": cfg.inconsistency.threshold,
        "threads": records.len(),
        "below_threshold": records.iter().filter(|r| r.similarity < cfg.inconsistency.threshold).count(),
        "histogram": histogram,
        "profile": profile,
        "profile_error": profile_error,
        "excluded_threads": excluded,
    }))
    .map_err(|e| Error::format("json", e))?;
    report.push(b'\n');
    Ok(InconsistencyOutputs {
        files: vec![
            (SIMILARITY_FILE, similarity_csv(&records)?),
            (INCONSISTENCY_FILE, report),
        ],
        scored: records.len(),
        excluded: excluded.len(),
    })
}

fn coherence_or_none<S: AsRef<str> + Sync>(
    model: &LdaModel,
    reference: &[Vec<S>],
    cfg: &Config,
) -> Result<Option<CoherenceResult>> {
    if reference.is_empty() {
        return Ok(None);
    }
    model_coherence(model, reference, &cfg.coherence).map(Some)
}

/// Runs every stage and writes the bundle into `out_dir`. On failure the
/// error names the stage and files written so far are removed.
pub fn run_pipeline(cfg: &Config, base_dir: &Path, out_dir: &Path) -> Result<Manifest> {
    cfg.validate().map_err(|e| e.in_stage("config"))?;
    let prepared =
        PreparedCorpus::from_config(cfg, base_dir).map_err(|e| e.in_stage("preprocess"))?;
    let mut bundle = BundleWriter::new(out_dir).map_err(|e| e.in_stage("report"))?;
    let data = SweepData::new(&prepared);
    let lda_seed = stage_seed(cfg.seed, "lda");
    let mut params = cfg.lda.to_params(lda_seed);

    let mut selection = None;
    for (i, sc) in cfg.sweep.iter().enumerate() {
        let spec = SweepSpec {
            parameter: sc.parameter,
            values: sc.values.clone(),
            base: cfg.lda.to_params(lda_seed),
            coherence: cfg.coherence,
            evaluate_test: sc.evaluate_test && !prepared.test.is_empty(),
            record_wall_time: sc.record_wall_time,
        };
        let result = run_sweep(&data, &spec).map_err(|e| e.in_stage("sweep"))?;
        let mut csv = Vec::new();
        result
            .write_csv(&mut csv)
            .map_err(|e| e.in_stage("sweep"))?;
        bundle.write(&format!("sweep_{i}_{}.csv", sc.parameter.name()), &csv)?;
        if cfg.selection.enabled && selection.is_none() && sc.parameter == SweepParameter::NumTopics
        {
            let k = select_num_topics(&result, cfg.selection.tolerance)
                .map_err(|e| e.in_stage("sweep"))?;
            params = params.with_num_topics(k);
            selection = Some(Selection {
                sweep_index: i,
                tolerance: cfg.selection.tolerance,
                num_topics: k,
            });
        }
    }

    let model =
        train(&data.train, &prepared.dictionary, &params).map_err(|e| e.in_stage("train"))?;
    let train_cv = model_coherence(&model, &data.train_tokens, &cfg.coherence)
        .map_err(|e| e.in_stage("train"))?;
    let test_cv =
        coherence_or_none(&model, &data.test_tokens, cfg).map_err(|e| e.in_stage("train"))?;
    bundle.write(MODEL_FILE, model.to_json()?.as_bytes())?;

    let dists = infer_all(&model, &prepared).map_err(|e| e.in_stage("analyze"))?;
    for (name, bytes) in
        analysis_outputs(cfg, &prepared, &model, &dists).map_err(|e| e.in_stage("analyze"))?
    {
        bundle.write(name, &bytes)?;
    }
    let inc =
        inconsistency_outputs(cfg, &prepared, &dists).map_err(|e| e.in_stage("inconsistency"))?;
    for (name, bytes) in &inc.files {
        bundle.write(name, bytes)?;
    }

    let r = &prepared.report;
    let manifest = Manifest {
        tool: format!("topicscope {}", env!("CARGO_PKG_VERSION")),
        config: cfg.clone(),
        base_dir: base_dir.to_path_buf(),
        seeds: Seeds {
            root: cfg.seed,
            split: prepared.split_seed,
            lda: lda_seed,
        },
        corpus: CorpusSummary {
            articles: r.articles,
            comments: r.comments,
            skipped_article_lines: r.article_skips.count(),
            skipped_comment_lines: r.comment_skips.count(),
            empty_after_filtering: r.empty_after_filtering,
            vocabulary: prepared.dictionary.len(),
            train: prepared.train.len(),
            test: prepared.test.len(),
        },
        selection,
        final_params: params,
        metrics: Metrics {
            train_cv,
            test_cv,
            threads_scored: inc.scored,
            threads_excluded: inc.excluded,
        },
        artifacts: bundle.artifacts.clone(),
    };
    bundle.commit(&manifest).map_err(|e| e.in_stage("report"))?;
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReplayCheck {
    pub file: String,
    pub matches: bool,
}

/// Re-runs the configuration recorded in a manifest into `out_dir` and checks
/// every artifact hash against the recorded one.
pub fn replay_manifest(manifest_path: &Path, out_dir: &Path) -> Result<Vec<ReplayCheck>> {
    let recorded = Manifest::load(manifest_path)?;
    let fresh = run_pipeline(&recorded.config, &recorded.base_dir, out_dir)?;
    let mut checks: Vec<ReplayCheck> = recorded
        .artifacts
        .iter()
        .map(|a| ReplayCheck {
            file: a.file.clone(),
            matches: fresh.artifacts.iter().any(|b| b == a),
        })
        .collect();
    for b in &fresh.artifacts {
        if !recorded.artifacts.iter().any(|a| a.file == b.file) {
            checks.push(ReplayCheck {
                file: b.file.clone(),
                matches: false,
            });
        }
    }
    checks.push(ReplayCheck {
        file: MANIFEST_FILE.to_owned(),
        matches: fresh == recorded,
    });
    Ok(checks)
}

/// Writes `bytes` to `path`, creating parent directories.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}
