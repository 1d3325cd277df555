//! C_v topic coherence.
//!
//! Boolean sliding-window co-occurrence counts feed NPMI context vectors; each
//! top word of a topic is confirmed against the whole top-word set by the
//! cosine of their context vectors, and the confirmations are averaged per
//! topic and then across topics.
//!
//! Windows slide with stride one. A document shorter than the window forms a
//! single window; an empty document forms none. Counting does not enumerate
//! windows: each occurrence at position `p` covers the window starts
//! `p - w + 1 ..= p`, so per document every tracked term is a union of
//! intervals over window starts, and co-occurrence is the size of an interval
//! intersection.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_WINDOW_SIZE: usize = 110;
pub const DEFAULT_TOPN: usize = 20;
pub const DEFAULT_EPS: f64 = 1e-12;

type Intervals = Vec<(usize, usize)>;

/// Window counts for a set of tracked words plus optional word sets.
#[derive(Debug, Clone)]
pub struct WindowStats {
    window_size: usize,
    n_windows: u64,
    words: Vec<String>,
    word_index: HashMap<String, usize>,
    /// Word sets counted as one term ("any member present"); their term ids
    /// follow the single words.
    sets: Vec<Vec<usize>>,
    occur: Vec<u64>,
    co_occur: HashMap<(usize, usize), u64>,
}

impl WindowStats {
    pub fn window_size(&self) -> usize {
        self.window_size
    }

    pub fn n_windows(&self) -> u64 {
        self.n_windows
    }

    pub fn tracked_words(&self) -> &[String] {
        &self.words
    }

    pub fn word_sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn occurrences(&self, word: &str) -> Option<u64> {
        self.word_index.get(word).map(|&i| self.occur[i])
    }

    /// Windows containing both words. `None` if a word is untracked or the
    /// pair was not counted.
    pub fn co_occurrences(&self, a: &str, b: &str) -> Option<u64> {
        let (a, b) = (*self.word_index.get(a)?, *self.word_index.get(b)?);
        self.co_term(a, b)
    }

    fn co_term(&self, a: usize, b: usize) -> Option<u64> {
        if a == b {
            return Some(self.occur[a]);
        }
        self.co_occur.get(&(a.min(b), a.max(b))).copied()
    }

    fn npmi_terms(&self, a: usize, b: usize, eps: f64) -> f64 {
        let n = self.n_windows as f64;
        let co = self.co_term(a, b).expect("pair counted");
        npmi_from_counts(self.occur[a], self.occur[b], co, n, eps)
    }
}

/// NPMI from raw window counts. A term absent from every window yields 0.
pub fn npmi_from_counts(occ_a: u64, occ_b: u64, co: u64, n_windows: f64, eps: f64) -> f64 {
    if occ_a == 0 || occ_b == 0 || n_windows == 0.0 {
        return 0.0;
    }
    let pa = occ_a as f64 / n_windows;
    let pb = occ_b as f64 / n_windows;
    let joint = co as f64 / n_windows + eps;
    if joint <= 0.0 {
        return -1.0;
    }
    // A pair present in every window has joint >= 1; the pair always
    // co-occurs, so it scores 1 rather than the -1 the raw ratio would give.
    let denom = -joint.ln();
    if denom <= 0.0 {
        return 1.0;
    }
    ((joint / (pa * pb)).ln() / denom).clamp(-1.0, 1.0)
}

fn merge_into(intervals: &mut Intervals, lo: usize, hi: usize) {
    match intervals.last_mut() {
        Some(last) if lo <= last.1 + 1 => last.1 = last.1.max(hi),
        _ => intervals.push((lo, hi)),
    }
}

fn union(sets: &[&Intervals]) -> Intervals {
    let mut all: Vec<(usize, usize)> = sets.iter().flat_map(|s| s.iter().copied()).collect();
    all.sort_unstable();
    let mut out = Intervals::new();
    for (lo, hi) in all {
        merge_into(&mut out, lo, hi);
    }
    out
}

fn covered(intervals: &Intervals) -> u64 {
    intervals.iter().map(|&(lo, hi)| (hi - lo + 1) as u64).sum()
}

fn intersection_len(a: &Intervals, b: &Intervals) -> u64 {
    let (mut i, mut j, mut total) = (0, 0, 0u64);
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if lo <= hi {
            total += (hi - lo + 1) as u64;
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    total
}

struct Partial {
    n_windows: u64,
    occur: Vec<u64>,
    co: HashMap<(usize, usize), u64>,
}

impl Partial {
    fn new(n_terms: usize) -> Self {
        Partial {
            n_windows: 0,
            occur: vec![0; n_terms],
            co: HashMap::new(),
        }
    }

    fn merge(mut self, other: Partial) -> Partial {
        self.n_windows += other.n_windows;
        for (a, b) in self.occur.iter_mut().zip(other.occur) {
            *a += b;
        }
        for (k, v) in other.co {
            *self.co.entry(k).or_default() += v;
        }
        self
    }
}

/// Counts windows for `words`, every set in `sets` and every term pair listed
/// in `pairs` (term ids as in [`WindowStats`]).
fn count_terms<S: AsRef<str> + Sync>(
    token_docs: &[Vec<S>],
    words: Vec<String>,
    sets: Vec<Vec<usize>>,
    pairs: &[(usize, usize)],
    window_size: usize,
) -> Result<WindowStats> {
    if window_size == 0 {
        return Err(Error::InvalidArgument("window_size must be >= 1".into()));
    }
    if token_docs.is_empty() {
        return Err(Error::NoReferenceCorpus);
    }
    let word_index: HashMap<String, usize> = words
        .iter()
        .enumerate()
        .map(|(i, w)| (w.clone(), i))
        .collect();
    let n_words = words.len();
    let mut terms: Vec<Vec<usize>> = (0..n_words).map(|i| vec![i]).collect();
    terms.extend(sets);
    let n_terms = terms.len();

    let mut partners: Vec<Vec<usize>> = vec![Vec::new(); n_terms];
    for &(a, b) in pairs {
        if a != b {
            let (lo, hi) = (a.min(b), a.max(b));
            partners[lo].push(hi);
        }
    }
    partners.iter_mut().for_each(|p| {
        p.sort_unstable();
        p.dedup();
    });

    let per_doc = |doc: &Vec<S>| -> Partial {
        let mut part = Partial::new(n_terms);
        let len = doc.len();
        if len == 0 {
            return part;
        }
        let n_win = if len >= window_size {
            len - window_size + 1
        } else {
            1
        };
        part.n_windows = n_win as u64;

        let mut spans: Vec<Option<Intervals>> = vec![None; n_terms];
        for (pos, token) in doc.iter().enumerate() {
            if let Some(&w) = word_index.get(token.as_ref()) {
                let lo = (pos + 1).saturating_sub(window_size).min(n_win - 1);
                let hi = pos.min(n_win - 1);
                merge_into(spans[w].get_or_insert_with(Vec::new), lo, hi);
            }
        }
        for t in n_words..n_terms {
            let members: Vec<&Intervals> =
                terms[t].iter().filter_map(|&w| spans[w].as_ref()).collect();
            if !members.is_empty() {
                spans[t] = Some(union(&members));
            }
        }
        for t in 0..n_terms {
            let Some(span_a) = &spans[t] else { continue };
            part.occur[t] = covered(span_a);
            for &u in &partners[t] {
                if let Some(span_b) = &spans[u] {
                    let c = intersection_len(span_a, span_b);
                    if c > 0 {
                        *part.co.entry((t, u)).or_default() += c;
                    }
                }
            }
        }
        part
    };

    let total = token_docs
        .par_iter()
        .map(per_doc)
        .reduce(|| Partial::new(n_terms), Partial::merge);

    let mut co_occur = total.co;
    for &(a, b) in pairs {
        if a != b {
            co_occur.entry((a.min(b), a.max(b))).or_insert(0);
        }
    }
    Ok(WindowStats {
        window_size,
        n_windows: total.n_windows,
        words,
        word_index,
        sets: terms.split_off(n_words),
        occur: total.occur,
        co_occur,
    })
}

/// Boolean sliding-window counts for `words` and all their pairs.
pub fn window_counts<S: AsRef<str> + Sync>(
    token_docs: &[Vec<S>],
    words: &HashSet<String>,
    window_size: usize,
) -> Result<WindowStats> {
    if words.is_empty() {
        return Err(Error::InvalidArgument("no words to track".into()));
    }
    let mut words: Vec<String> = words.iter().cloned().collect();
    words.sort();
    let n = words.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| ((a + 1)..n).map(move |b| (a, b)))
        .collect();
    count_terms(token_docs, words, Vec::new(), &pairs, window_size)
}

/// Normalized PMI of two tracked words.
pub fn npmi(stats: &WindowStats, a: &str, b: &str, eps: f64) -> Result<f64> {
    let ia = *stats
        .word_index
        .get(a)
        .ok_or_else(|| Error::UnknownToken(a.to_owned()))?;
    let ib = *stats
        .word_index
        .get(b)
        .ok_or_else(|| Error::UnknownToken(b.to_owned()))?;
    if stats.co_term(ia, ib).is_none() {
        return Err(Error::InvalidArgument(format!(
            "pair ({a}, {b}) was not counted"
        )));
    }
    if stats.occur[ia] == 0 || stats.occur[ib] == 0 {
        log::warn!("NPMI({a}, {b}): word absent from the reference corpus");
    }
    Ok(stats.npmi_terms(ia, ib, eps))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceResult {
    pub aggregate: f64,
    pub per_topic: Vec<f64>,
    pub topn: usize,
    pub window_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoherenceSettings {
    pub topn: usize,
    pub window_size: usize,
    pub eps: f64,
}

impl Default for CoherenceSettings {
    fn default() -> Self {
        CoherenceSettings {
            topn: DEFAULT_TOPN,
            window_size: DEFAULT_WINDOW_SIZE,
            eps: DEFAULT_EPS,
        }
    }
}

fn cosine_or_zero(x: &[f64], y: &[f64]) -> f64 {
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let nx = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let ny = y.iter().map(|b| b * b).sum::<f64>().sqrt();
    if nx == 0.0 || ny == 0.0 {
        0.0
    } else {
        (dot / (nx * ny)).clamp(-1.0, 1.0)
    }
}

/// C_v coherence of each topic's first `topn` words against `token_docs`.
pub fn cv_coherence<S: AsRef<str> + Sync>(
    topics: &[Vec<String>],
    token_docs: &[Vec<S>],
    topn: usize,
    window_size: usize,
    eps: f64,
) -> Result<CoherenceResult> {
    if topics.is_empty() {
        return Err(Error::InvalidArgument("no topics".into()));
    }
    let topics: Vec<&[String]> = topics.iter().map(|t| &t[..t.len().min(topn)]).collect();
    if let Some(i) = topics.iter().position(|t| t.len() < 2) {
        return Err(Error::InvalidArgument(format!(
            "topic {i} has fewer than 2 words"
        )));
    }

    let mut words: Vec<String> = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    let topic_ids: Vec<Vec<usize>> = topics
        .iter()
        .map(|t| {
            t.iter()
                .map(|w| {
                    *index.entry(w.as_str()).or_insert_with(|| {
                        words.push(w.clone());
                        words.len() - 1
                    })
                })
                .collect()
        })
        .collect();
    let n_words = words.len();

    let mut pairs = Vec::new();
    for (t, ids) in topic_ids.iter().enumerate() {
        let set_term = n_words + t;
        for (i, &a) in ids.iter().enumerate() {
            pairs.push((a, set_term));
            for &b in &ids[i + 1..] {
                pairs.push((a, b));
            }
        }
    }
    let stats = count_terms(token_docs, words, topic_ids.clone(), &pairs, window_size)?;

    for (w, &occ) in stats.words.iter().zip(&stats.occur) {
        if occ == 0 {
            log::warn!("coherence: top word {w:?} absent from the reference corpus");
        }
    }

    let per_topic: Vec<f64> = topic_ids
        .iter()
        .enumerate()
        .map(|(t, ids)| {
            let set_term = n_words + t;
            let set_vec: Vec<f64> = ids
                .iter()
                .map(|&w| stats.npmi_terms(set_term, w, eps))
                .collect();
            let total: f64 = ids
                .iter()
                .map(|&a| {
                    let v: Vec<f64> = ids.iter().map(|&w| stats.npmi_terms(a, w, eps)).collect();
                    cosine_or_zero(&v, &set_vec)
                })
                .sum();
            total / ids.len() as f64
        })
        .collect();
    let aggregate = per_topic.iter().sum::<f64>() / per_topic.len() as f64;
    Ok(CoherenceResult {
        aggregate,
        per_topic,
        topn,
        window_size,
    })
}
