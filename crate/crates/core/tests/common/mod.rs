#![allow(dead_code)]

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use topicscope::corpus::{build_dictionary, doc_to_bow, BowDocument, Dictionary};
use topicscope::lda::{train, LdaModel, LdaParams};
use topicscope::synthetic::{SyntheticCorpus, SyntheticSpec};

/// Brute-force C_v: materializes every window as a token set and counts by
/// direct membership. Returns (aggregate, per-topic).
pub fn oracle_cv(
    topics: &[Vec<String>],
    docs: &[Vec<String>],
    window: usize,
    eps: f64,
) -> (f64, Vec<f64>) {
    let mut windows: Vec<HashSet<&str>> = Vec::new();
    for d in docs {
        if d.is_empty() {
            continue;
        }
        if d.len() <= window {
            windows.push(d.iter().map(String::as_str).collect());
        } else {
            for s in 0..=d.len() - window {
                windows.push(d[s..s + window].iter().map(String::as_str).collect());
            }
        }
    }
    let n = windows.len() as f64;
    // A term is a set of words; it is present when any member is.
    let count = |terms: &[&[String]]| -> f64 {
        windows
            .iter()
            .filter(|w| {
                terms
                    .iter()
                    .all(|t| t.iter().any(|x| w.contains(x.as_str())))
            })
            .count() as f64
    };
    let npmi = |a: &[String], b: &[String]| -> f64 {
        let ca = count(&[a]);
        let cb = count(&[b]);
        if ca == 0.0 || cb == 0.0 || n == 0.0 {
            return 0.0;
        }
        let joint = count(&[a, b]) / n + eps;
        let denom = -joint.ln();
        if denom <= 0.0 {
            return 1.0;
        }
        ((joint / ((ca / n) * (cb / n))).ln() / denom).clamp(-1.0, 1.0)
    };
    let cos = |u: &[f64], v: &[f64]| -> f64 {
        let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
        let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
        let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if nu == 0.0 || nv == 0.0 {
            0.0
        } else {
            dot / (nu * nv)
        }
    };
    let per_topic: Vec<f64> = topics
        .iter()
        .map(|t| {
            let single = |w: &String| vec![w.clone()];
            let set_vec: Vec<f64> = t.iter().map(|w| npmi(t, &single(w))).collect();
            t.iter()
                .map(|a| {
                    let v: Vec<f64> = t.iter().map(|w| npmi(&single(a), &single(w))).collect();
                    cos(&v, &set_vec)
                })
                .sum::<f64>()
                / t.len() as f64
        })
        .collect();
    (
        per_topic.iter().sum::<f64>() / per_topic.len() as f64,
        per_topic,
    )
}

/// Random corpus of at most `max_tokens` tokens over a small vocabulary, plus
/// random topics (2 to 4 of 3 to 5 distinct words, some possibly unseen).
pub fn random_case(seed: u64, max_tokens: usize) -> (Vec<Vec<String>>, Vec<Vec<String>>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab: Vec<String> = (0..rng.random_range(6..20))
        .map(|i| format!("w{i}"))
        .collect();
    let mut docs = Vec::new();
    let mut budget = rng.random_range(1..=max_tokens);
    while budget > 0 {
        let len = rng.random_range(0..=budget.min(80));
        budget -= len;
        // Skewed word choice so some pairs co-occur often and others rarely.
        docs.push(
            (0..len)
                .map(|_| vocab[(rng.random::<f64>().powi(2) * vocab.len() as f64) as usize].clone())
                .collect(),
        );
        if len == 0 && rng.random_bool(0.5) {
            budget -= 1;
        }
    }
    let pool: Vec<String> = vocab
        .iter()
        .cloned()
        .chain(["unseen1".into(), "unseen2".into()])
        .collect();
    let topics = (0..rng.random_range(2..=4))
        .map(|_| {
            let size = rng.random_range(3..=5);
            let mut t: Vec<String> = Vec::new();
            while t.len() < size {
                let w = pool[rng.random_range(0..pool.len())].clone();
                if !t.contains(&w) {
                    t.push(w);
                }
            }
            t
        })
        .collect();
    let window = [1usize, 2, 3, 5, 10, 30, 110][rng.random_range(0..7)];
    (docs, topics, window)
}

pub struct Fitted {
    pub corpus: SyntheticCorpus,
    pub dictionary: Dictionary,
    pub bows: Vec<BowDocument>,
    pub model: LdaModel,
}

pub fn synthetic_spec(seed: u64) -> SyntheticSpec {
    SyntheticSpec {
        num_topics: 5,
        words_per_topic: 100,
        num_docs: 2000,
        doc_len: 50,
        doc_topic_alpha: 0.1,
        seed,
    }
}

pub fn fit(corpus: SyntheticCorpus, params: &LdaParams) -> Fitted {
    let dictionary = build_dictionary(&corpus.documents, 1).unwrap();
    let bows: Vec<BowDocument> = corpus
        .documents
        .iter()
        .enumerate()
        .map(|(i, d)| doc_to_bow(&dictionary, format!("d{i}"), d))
        .collect();
    let model = train(&bows, &dictionary, params).unwrap();
    Fitted {
        corpus,
        dictionary,
        bows,
        model,
    }
}

/// Greedy one-to-one matching of learned to true topics by top-`n` word
/// overlap; returns the mean overlap fraction over matched pairs.
pub fn matched_overlap(f: &Fitted, n: usize) -> f64 {
    let k = f.model.num_topics();
    let truth: Vec<HashSet<String>> = (0..f.corpus.spec.num_topics)
        .map(|t| f.corpus.topic_words(t).into_iter().take(n).collect())
        .collect();
    let learned: Vec<HashSet<String>> = (0..k)
        .map(|t| {
            f.model
                .topic_terms(t, n)
                .unwrap()
                .into_iter()
                .map(|(w, _)| w)
                .collect()
        })
        .collect();
    let mut pairs: Vec<(usize, usize, usize)> = Vec::new();
    for (i, l) in learned.iter().enumerate() {
        for (j, t) in truth.iter().enumerate() {
            pairs.push((l.intersection(t).count(), i, j));
        }
    }
    pairs.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let (mut used_l, mut used_t) = (HashSet::new(), HashSet::new());
    let mut total = 0usize;
    let mut matched = 0usize;
    for (o, i, j) in pairs {
        if used_l.contains(&i) || used_t.contains(&j) {
            continue;
        }
        used_l.insert(i);
        used_t.insert(j);
        total += o;
        matched += 1;
    }
    total as f64 / (matched * n) as f64
}

/// Writes a small news corpus built from a synthetic topic model: each thread
/// has an article and several comments, and some threads' comments drift to
/// another topic. Returns the config path.
pub fn write_thread_corpus(dir: &Path, seed: u64, extra_config: &str) -> PathBuf {
    fs::create_dir_all(dir).unwrap();
    let spec = SyntheticSpec {
        num_topics: 4,
        words_per_topic: 30,
        num_docs: 1,
        doc_len: 1,
        doc_topic_alpha: 1.0,
        seed,
    };
    let gen = SyntheticCorpus::generate(&spec);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let text = |rng: &mut ChaCha8Rng, topic: usize, len: usize| -> String {
        let words = gen.topic_words(topic);
        (0..len)
            .map(|_| {
                if rng.random_bool(0.2) {
                    "the".to_string()
                } else {
                    words[(rng.random::<f64>().powi(2) * words.len() as f64) as usize].clone()
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut articles = String::new();
    let mut comments = String::new();
    for id in 0..40u32 {
        let t = rng.random_range(0..4);
        let body = text(&mut rng, t, 60);
        articles.push_str(
            &json!({"news_id": id, "text": body, "release_time": "2020-02-01"}).to_string(),
        );
        articles.push('\n');
        let drift = id % 5 == 0;
        for _ in 0..rng.random_range(1..5) {
            let ct = if drift { (t + 1) % 4 } else { t };
            let body = text(&mut rng, ct, 15);
            comments.push_str(
                &json!({"news_id": id.to_string(), "clean_comment": body, "date": "2020-02-02"})
                    .to_string(),
            );
            comments.push('\n');
        }
    }
    fs::write(dir.join("articles.jsonl"), articles).unwrap();
    fs::write(dir.join("comments.jsonl"), comments).unwrap();
    let cfg = format!(
        "seed = {seed}\n[input]\narticles = \"articles.jsonl\"\ncomments = \"comments.jsonl\"\n\
         [lda]\nnum_topics = 4\niterations = 20\nchunksize = 50\npasses = 3\n\
         [coherence]\ntopn = 10\nwindow_size = 20\n{extra_config}"
    );
    let path = dir.join("run.toml");
    fs::write(&path, cfg).unwrap();
    path
}
