//! Corpus-level topic analytics over a trained model and inferred document
//! distributions.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lda::{dominant_topic, LdaModel, TopicDistribution};

pub const DEFAULT_KEYWORD_FLOOR: f64 = 0.001;

/// How many documents each topic dominates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicShare {
    pub counts: Vec<u64>,
    pub proportions: Vec<f64>,
}

impl TopicShare {
    pub fn num_topics(&self) -> usize {
        self.counts.len()
    }
}

fn common_k<'a>(mut dists: impl Iterator<Item = &'a TopicDistribution>) -> Result<usize> {
    let k = dists.next().ok_or(Error::EmptyCorpus)?.num_topics();
    if dists.any(|d| d.num_topics() != k) {
        return Err(Error::InvalidArgument(
            "topic distributions differ in length".into(),
        ));
    }
    Ok(k)
}

pub fn dominant_topic_shares(dists: &[TopicDistribution]) -> Result<TopicShare> {
    let k = common_k(dists.iter())?;
    let mut counts = vec![0u64; k];
    for d in dists {
        counts[dominant_topic(d)] += 1;
    }
    let n = dists.len() as f64;
    let proportions = counts.iter().map(|&c| c as f64 / n).collect();
    Ok(TopicShare {
        counts,
        proportions,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Representative {
    pub doc_id: String,
    pub probability: f64,
}

/// For each topic, the document it dominates with the highest probability.
/// Topics that dominate no document map to `None`; on equal probability the
/// earlier document wins.
pub fn representative_documents(
    docs: &[(String, TopicDistribution)],
) -> Result<Vec<Option<Representative>>> {
    let k = common_k(docs.iter().map(|(_, d)| d))?;
    let mut best: Vec<Option<Representative>> = vec![None; k];
    for (doc_id, dist) in docs {
        let t = dominant_topic(dist);
        let p = dist.probs()[t];
        if best[t].as_ref().is_none_or(|r| p > r.probability) {
            best[t] = Some(Representative {
                doc_id: doc_id.clone(),
                probability: p,
            });
        }
    }
    Ok(best)
}

/// Topics in which `word` has probability at least `floor`, most probable
/// first (ties by topic index).
pub fn keyword_topics(model: &LdaModel, word: &str, floor: f64) -> Result<Vec<usize>> {
    let id = model
        .dictionary()
        .id(word)
        .ok_or_else(|| Error::UnknownToken(word.to_owned()))?;
    let mut scored: Vec<(usize, f64)> = (0..model.num_topics())
        .map(|k| {
            let row = model.lambda_row(k);
            (k, row[id] / row.iter().sum::<f64>())
        })
        .filter(|&(_, p)| p >= floor)
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(scored.into_iter().map(|(k, _)| k).collect())
}

/// Jensen-Shannon divergence with natural logarithms; bounded by ln 2.
pub fn js_divergence(p: &[f64], q: &[f64]) -> f64 {
    let kl_half = |a: f64, m: f64| if a > 0.0 { a * (a / m).ln() } else { 0.0 };
    let total: f64 = p
        .iter()
        .zip(q)
        .map(|(&a, &b)| {
            let m = 0.5 * (a + b);
            kl_half(a, m) + kl_half(b, m)
        })
        .sum();
    (0.5 * total).max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub coords: Vec<[f64; 2]>,
    /// Kruskal stress-1 between input distances and embedded distances.
    pub stress: f64,
}

fn euclid(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Classical (Torgerson) MDS into two dimensions.
///
/// Eigenvectors are sign-normalized so their largest-magnitude component is
/// positive, which makes the output deterministic.
pub fn classical_mds(distance: &[Vec<f64>]) -> Result<Embedding> {
    let n = distance.len();
    if n < 2 {
        return Err(Error::NothingToEmbed);
    }
    if distance.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidArgument(
            "distance matrix is not square".into(),
        ));
    }
    let d2 = DMatrix::from_fn(n, n, |i, j| distance[i][j].powi(2));
    let row_means: Vec<f64> = (0..n).map(|i| d2.row(i).sum() / n as f64).collect();
    let col_means: Vec<f64> = (0..n).map(|j| d2.column(j).sum() / n as f64).collect();
    let grand = d2.sum() / (n * n) as f64;
    let b = DMatrix::from_fn(n, n, |i, j| {
        -0.5 * (d2[(i, j)] - row_means[i] - col_means[j] + grand)
    });
    let b = (&b + b.transpose()) * 0.5;

    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &c| {
        eig.eigenvalues[c]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&c))
    });

    let mut coords = vec![[0.0; 2]; n];
    for (dim, &col) in order.iter().take(2).enumerate() {
        let scale = eig.eigenvalues[col].max(0.0).sqrt();
        let v = eig.eigenvectors.column(col);
        let mut pivot = 0;
        for i in 0..n {
            if v[i].abs() > v[pivot].abs() + 1e-12 {
                pivot = i;
            }
        }
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            coords[i][dim] = sign * v[i] * scale;
        }
    }

    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let diff = distance[i][j] - euclid(&coords[i], &coords[j]);
            num += diff * diff;
            den += distance[i][j] * distance[i][j];
        }
    }
    let stress = if den > 0.0 { (num / den).sqrt() } else { 0.0 };
    Ok(Embedding { coords, stress })
}

/// Inter-topic map: distances, 2-D coordinates and circle sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicOverview {
    pub distance: Vec<Vec<f64>>,
    pub coords: Vec<[f64; 2]>,
    pub shares: Vec<f64>,
    pub stress: f64,
}

/// Pairwise Jensen-Shannon divergences of the model's topic-word rows.
pub fn topic_distances(model: &LdaModel) -> Vec<Vec<f64>> {
    let rows: Vec<Vec<f64>> = (0..model.num_topics())
        .map(|k| model.topic_word_probs(k))
        .collect();
    let k = rows.len();
    let mut d = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in (i + 1)..k {
            let v = js_divergence(&rows[i], &rows[j]);
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    d
}

pub fn topic_overview(model: &LdaModel, dists: &[TopicDistribution]) -> Result<TopicOverview> {
    if model.num_topics() < 2 {
        return Err(Error::NothingToEmbed);
    }
    let share = dominant_topic_shares(dists)?;
    if share.num_topics() != model.num_topics() {
        return Err(Error::InvalidArgument(
            "distributions do not match the model's topic count".into(),
        ));
    }
    let distance = topic_distances(model);
    let emb = classical_mds(&distance)?;
    Ok(TopicOverview {
        distance,
        coords: emb.coords,
        shares: share.proportions,
        stress: emb.stress,
    })
}
