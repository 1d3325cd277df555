//! Article/comment topic inconsistency per news thread.
//!
//! Every thread (one article plus its comments, keyed by news id) is scored by
//! the cosine similarity between the article's topic distribution and the
//! comments' aggregate distribution. Low-similarity threads are then profiled
//! by dominant topic and compared against the whole corpus.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::analysis::dominant_topic_shares;
use crate::corpus::DocumentKind;
use crate::error::{Error, Result};
use crate::lda::{dominant_topic, TopicDistribution};
use crate::stats::{cosine_similarity, pearson};

pub const DEFAULT_THRESHOLD: f64 = 0.6;
pub const DEFAULT_BIN_EDGES: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommentAggregation {
    /// Cosine against the mean comment distribution.
    #[default]
    MeanDistribution,
    /// Mean of the per-comment cosines.
    MeanSimilarity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThreadGroup {
    pub news_id: String,
    pub article_dist: TopicDistribution,
    pub comment_dists: Vec<TopicDistribution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InconsistencyRecord {
    pub news_id: String,
    pub similarity: f64,
    pub article_dominant: usize,
    pub comments_dominant: usize,
    pub n_comments: usize,
}

/// Element-wise mean of the comment distributions, renormalized.
pub fn mean_distribution(dists: &[TopicDistribution]) -> Result<TopicDistribution> {
    let first = dists.first().ok_or(Error::EmptyCorpus)?;
    let k = first.num_topics();
    let mut acc = vec![0.0; k];
    for d in dists {
        if d.num_topics() != k {
            return Err(Error::InvalidArgument(
                "topic distributions differ in length".into(),
            ));
        }
        for (a, p) in acc.iter_mut().zip(d.probs()) {
            *a += p;
        }
    }
    let n = dists.len() as f64;
    TopicDistribution::from_weights(acc.into_iter().map(|a| a / n).collect())
}

pub fn thread_similarity(
    group: &ThreadGroup,
    mode: CommentAggregation,
) -> Result<InconsistencyRecord> {
    if group.comment_dists.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "thread {} has no comments",
            group.news_id
        )));
    }
    let k = group.article_dist.num_topics();
    let mean = mean_distribution(&group.comment_dists)?;
    if mean.num_topics() != k {
        return Err(Error::InvalidArgument(
            "article and comments differ in topic count".into(),
        ));
    }
    let similarity = match mode {
        CommentAggregation::MeanDistribution => {
            cosine_similarity(group.article_dist.probs(), mean.probs())?
        }
        CommentAggregation::MeanSimilarity => {
            let mut total = 0.0;
            for c in &group.comment_dists {
                total += cosine_similarity(group.article_dist.probs(), c.probs())?;
            }
            total / group.comment_dists.len() as f64
        }
    };
    Ok(InconsistencyRecord {
        news_id: group.news_id.clone(),
        similarity: similarity.clamp(0.0, 1.0),
        article_dominant: dominant_topic(&group.article_dist),
        comments_dominant: dominant_topic(&mean),
        n_comments: group.comment_dists.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedThread {
    pub news_id: String,
    pub reason: String,
}

/// Groups documents into threads by news id, in order of first appearance.
///
/// A `None` distribution marks a document whose bag of words came out empty.
/// Threads without a usable article or without any usable comment are
/// excluded and reported.
pub fn group_threads(
    items: &[(String, DocumentKind, Option<TopicDistribution>)],
) -> (Vec<ThreadGroup>, Vec<ExcludedThread>) {
    struct Acc {
        article: Option<TopicDistribution>,
        had_article: bool,
        comments: Vec<TopicDistribution>,
        had_comments: bool,
    }
    let mut order: Vec<&str> = Vec::new();
    let mut acc: HashMap<&str, Acc> = HashMap::new();
    for (news_id, kind, dist) in items {
        let entry = acc.entry(news_id.as_str()).or_insert_with(|| {
            order.push(news_id.as_str());
            Acc {
                article: None,
                had_article: false,
                comments: Vec::new(),
                had_comments: false,
            }
        });
        match kind {
            DocumentKind::Article => {
                entry.had_article = true;
                if entry.article.is_none() {
                    entry.article = dist.clone();
                }
            }
            DocumentKind::Comment => {
                entry.had_comments = true;
                entry.comments.extend(dist.clone());
            }
        }
    }

    let mut groups = Vec::new();
    let mut excluded = Vec::new();
    for news_id in order {
        let a = acc.remove(news_id).expect("grouped id");
        let reason = match (&a.article, a.comments.is_empty()) {
            (Some(_), false) => None,
            (None, _) if a.had_article => Some("article is empty after preprocessing"),
            (None, _) => Some("no article"),
            (Some(_), true) if a.had_comments => Some("all comments are empty after preprocessing"),
            (Some(_), true) => Some("no comments"),
        };
        match reason {
            None => groups.push(ThreadGroup {
                news_id: news_id.to_owned(),
                article_dist: a.article.expect("checked"),
                comment_dists: a.comments,
            }),
            Some(r) => excluded.push(ExcludedThread {
                news_id: news_id.to_owned(),
                reason: r.to_owned(),
            }),
        }
    }
    (groups, excluded)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub proportions: Vec<f64>,
}

/// Bins similarities into `[e_i, e_{i+1})`, the last bin closed.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn similarity_histogram(
    records: &[InconsistencyRecord],
    bin_edges: &[f64],
) -> Result<Histogram> {
    if records.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if bin_edges.len() < 2 || bin_edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument(
            "bin edges must be strictly ascending, at least two".into(),
        ));
    }
    let (lo, hi) = (bin_edges[0], bin_edges[bin_edges.len() - 1]);
    if lo > 0.0 || hi < 1.0 {
        return Err(Error::InvalidArgument("bin edges must cover [0, 1]".into()));
    }
    let n_bins = bin_edges.len() - 1;
    let mut counts = vec![0u64; n_bins];
    for r in records {
        let s = r.similarity;
        if !(lo..=hi).contains(&s) {
            return Err(Error::InvalidArgument(format!(
                "similarity {s} outside bin range"
            )));
        }
        let bin = bin_edges[1..].partition_point(|&e| e <= s).min(n_bins - 1);
        counts[bin] += 1;
    }
    let n = records.len() as f64;
    let proportions = counts.iter().map(|&c| c as f64 / n).collect();
    Ok(Histogram {
        edges: bin_edges.to_vec(),
        counts,
        proportions,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicProfile {
    pub threshold: f64,
    pub n_low: usize,
    /// Dominant-topic shares of the articles of low-similarity threads.
    pub low_shares: Vec<f64>,
    /// Dominant-topic shares over all documents.
    pub overall_shares: Vec<f64>,
    pub pearson: f64,
}

/// Compares the dominant-topic make-up of threads below `threshold` with that
/// of the whole corpus.
pub fn inconsistent_topic_profile(
    records: &[InconsistencyRecord],
    all_dists: &[TopicDistribution],
    threshold: f64,
) -> Result<TopicProfile> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold {threshold} not in (0, 1)"
        )));
    }
    let overall = dominant_topic_shares(all_dists)?;
    let k = overall.num_topics();
    let mut low_counts = vec![0u64; k];
    let mut n_low = 0;
    for r in records.iter().filter(|r| r.similarity < threshold) {
        if r.article_dominant >= k {
            return Err(Error::InvalidArgument(format!(
                "record {} names topic {} of {k}",
                r.news_id, r.article_dominant
            )));
        }
        low_counts[r.article_dominant] += 1;
        n_low += 1;
    }
    if n_low == 0 {
        return Err(Error::EmptySelection(threshold));
    }
    let low_shares: Vec<f64> = low_counts
        .iter()
        .map(|&c| c as f64 / n_low as f64)
        .collect();
    let r = pearson(&low_shares, &overall.proportions)?;
    Ok(TopicProfile {
        threshold,
        n_low,
        low_shares,
        overall_shares: overall.proportions,
        pearson: r,
    })
}
