//! Corpus ingestion and bag-of-words encoding.
//!
//! Articles and comments arrive as JSONL files, get tokenized on every run of
//! whitespace or punctuation, filtered against a stop list and encoded against
//! a [`Dictionary`] built over the whole collection.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocumentKind {
    Article,
    Comment,
}

/// One article or comment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    /// Thread key shared by an article and its comments.
    pub news_id: String,
    pub kind: DocumentKind,
    pub text: String,
    pub timestamp: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub is_reply: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub username: Option<String>,
}

impl Document {
    /// Text fed to the tokenizer. Article titles are prepended only on request.
    pub fn analysis_text(&self, include_title: bool) -> String {
        match (&self.title, include_title) {
            (Some(title), true) if !title.trim().is_empty() => format!("{title}\n{}", self.text),
            _ => self.text.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Schema {
    ArticlesJsonl,
    CommentsJsonl,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedLine {
    /// 1-based line number.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipReport {
    pub skipped: Vec<SkippedLine>,
}

impl SkipReport {
    pub fn count(&self) -> usize {
        self.skipped.len()
    }

    fn push(&mut self, line: usize, reason: impl Into<String>) {
        self.skipped.push(SkippedLine {
            line,
            reason: reason.into(),
        });
    }
}

#[derive(Debug, Clone)]
pub struct LoadedCorpus {
    pub documents: Vec<Document>,
    pub report: SkipReport,
}

fn string_field(obj: &serde_json::Map<String, Value>, key: &str) -> Option<String> {
    match obj.get(key)? {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn nonempty_field(obj: &serde_json::Map<String, Value>, key: &str) -> Option<String> {
    string_field(obj, key).filter(|s| !s.trim().is_empty())
}

fn parse_line(
    obj: &serde_json::Map<String, Value>,
    schema: Schema,
    line_no: usize,
) -> std::result::Result<Document, String> {
    let news_id = nonempty_field(obj, "news_id").ok_or("missing news_id")?;
    match schema {
        Schema::ArticlesJsonl => {
            let text = nonempty_field(obj, "text").ok_or("empty text")?;
            let timestamp = nonempty_field(obj, "release_time").ok_or("missing release_time")?;
            Ok(Document {
                doc_id: format!("a:{news_id}"),
                news_id,
                kind: DocumentKind::Article,
                text,
                timestamp,
                is_reply: None,
                title: string_field(obj, "title"),
                url: string_field(obj, "url"),
                username: None,
            })
        }
        Schema::CommentsJsonl => {
            let text = nonempty_field(obj, "clean_comment")
                .or_else(|| nonempty_field(obj, "raw_comment"))
                .ok_or("empty text")?;
            let timestamp = nonempty_field(obj, "date").ok_or("missing date")?;
            let is_reply = match obj.get("is_reply") {
                Some(Value::Bool(b)) => Some(*b),
                Some(Value::Number(n)) => Some(n.as_i64().unwrap_or(0) != 0),
                Some(Value::String(s)) => {
                    Some(matches!(s.to_ascii_lowercase().as_str(), "true" | "1"))
                }
                _ => None,
            };
            Ok(Document {
                doc_id: format!("c:{news_id}:{line_no}"),
                news_id,
                kind: DocumentKind::Comment,
                text,
                timestamp,
                is_reply,
                title: None,
                url: None,
                username: string_field(obj, "username"),
            })
        }
    }
}

/// Reads a JSONL file of articles or comments.
///
/// Malformed lines, lines missing a required field, lines with empty text and
/// repeated article news ids are skipped and listed in the report.
pub fn load_corpus(path: impl AsRef<Path>, schema: Schema) -> Result<LoadedCorpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut documents = Vec::new();
    let mut report = SkipReport::default();
    let mut seen_articles = HashSet::new();

    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let obj = match serde_json::from_str::<Value>(&line) {
            Ok(Value::Object(obj)) => obj,
            Ok(_) => {
                report.push(line_no, "not a JSON object");
                continue;
            }
            Err(e) => {
                report.push(line_no, format!("malformed JSON: {e}"));
                continue;
            }
        };
        match parse_line(&obj, schema, line_no) {
            Ok(doc) => {
                if doc.kind == DocumentKind::Article && !seen_articles.insert(doc.news_id.clone()) {
                    report.push(
                        line_no,
                        format!("duplicate article for news_id {}", doc.news_id),
                    );
                    continue;
                }
                documents.push(doc);
            }
            Err(reason) => report.push(line_no, reason),
        }
    }
    if report.count() > 0 {
        log::warn!("{}: skipped {} line(s)", path.display(), report.count());
    }
    Ok(LoadedCorpus { documents, report })
}

/// Lowercases `text` and splits it at every maximal run of characters that are
/// neither letters nor digits.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

/// English function words.
pub const ENGLISH_STOPWORDS: &[&str] = &[
    "i",
    "me",
    "my",
    "myself",
    "we",
    "our",
    "ours",
    "ourselves",
    "you",
    "you're",
    "you've",
    "you'll",
    "you'd",
    "your",
    "yours",
    "yourself",
    "yourselves",
    "he",
    "him",
    "his",
    "himself",
    "she",
    "she's",
    "her",
    "hers",
    "herself",
    "it",
    "it's",
    "its",
    "itself",
    "they",
    "them",
    "their",
    "theirs",
    "themselves",
    "what",
    "which",
    "who",
    "whom",
    "this",
    "that",
    "that'll",
    "these",
    "those",
    "am",
    "is",
    "are",
    "was",
    "were",
    "be",
    "been",
    "being",
    "have",
    "has",
    "had",
    "having",
    "do",
    "does",
    "did",
    "doing",
    "a",
    "an",
    "the",
    "and",
    "but",
    "if",
    "or",
    "because",
    "as",
    "until",
    "while",
    "of",
    "at",
    "by",
    "for",
    "with",
    "about",
    "against",
    "between",
    "into",
    "through",
    "during",
    "before",
    "after",
    "above",
    "below",
    "to",
    "from",
    "up",
    "down",
    "in",
    "out",
    "on",
    "off",
    "over",
    "under",
    "again",
    "further",
    "then",
    "once",
    "here",
    "there",
    "when",
    "where",
    "why",
    "how",
    "all",
    "any",
    "both",
    "each",
    "few",
    "more",
    "most",
    "other",
    "some",
    "such",
    "no",
    "nor",
    "not",
    "only",
    "own",
    "same",
    "so",
    "than",
    "too",
    "very",
    "s",
    "t",
    "can",
    "will",
    "just",
    "don",
    "don't",
    "should",
    "should've",
    "now",
    "d",
    "ll",
    "m",
    "o",
    "re",
    "ve",
    "y",
    "ain",
    "aren",
    "aren't",
    "couldn",
    "couldn't",
    "didn",
    "didn't",
    "doesn",
    "doesn't",
    "hadn",
    "hadn't",
    "hasn",
    "hasn't",
    "haven",
    "haven't",
    "isn",
    "isn't",
    "ma",
    "mightn",
    "mightn't",
    "mustn",
    "mustn't",
    "needn",
    "needn't",
    "shan",
    "shan't",
    "shouldn",
    "shouldn't",
    "wasn",
    "wasn't",
    "weren",
    "weren't",
    "won",
    "won't",
    "wouldn",
    "wouldn't",
];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopList {
    entries: HashSet<String>,
}

impl StopList {
    pub fn new<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        StopList {
            entries: entries.into_iter().map(Into::into).collect(),
        }
    }

    /// English stop words, the integers 1 through 999, and `extra`.
    pub fn standard<I, S>(extra: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut list = StopList::new(ENGLISH_STOPWORDS.iter().copied());
        list.entries.extend((1..=999).map(|n: u32| n.to_string()));
        list.entries.extend(extra.into_iter().map(Into::into));
        list
    }

    /// Parses a newline-delimited stopword file; blank lines and lines starting
    /// with `#` are ignored.
    pub fn parse_entries(content: &str) -> Vec<String> {
        content
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect()
    }

    /// [`StopList::standard`] extended with the entries of a stopword file.
    pub fn standard_with_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(StopList::standard(Self::parse_entries(&content)))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.entries.contains(token)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn filter_stopwords(tokens: Vec<String>, stoplist: &StopList) -> Vec<String> {
    tokens
        .into_iter()
        .filter(|t| !stoplist.contains(t))
        .collect()
}

/// Token <-> id bijection with document frequencies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "DictionaryRepr", try_from = "DictionaryRepr")]
pub struct Dictionary {
    token_to_id: HashMap<String, usize>,
    id_to_token: Vec<String>,
    doc_freq: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct DictionaryRepr {
    tokens: Vec<String>,
    doc_freq: Vec<u64>,
}

impl From<Dictionary> for DictionaryRepr {
    fn from(d: Dictionary) -> Self {
        DictionaryRepr {
            tokens: d.id_to_token,
            doc_freq: d.doc_freq,
        }
    }
}

impl TryFrom<DictionaryRepr> for Dictionary {
    type Error = String;

    fn try_from(r: DictionaryRepr) -> std::result::Result<Self, String> {
        if r.tokens.len() != r.doc_freq.len() {
            return Err("tokens and doc_freq differ in length".into());
        }
        let mut token_to_id = HashMap::with_capacity(r.tokens.len());
        for (id, token) in r.tokens.iter().enumerate() {
            if token_to_id.insert(token.clone(), id).is_some() {
                return Err(format!("duplicate token {token:?}"));
            }
        }
        Ok(Dictionary {
            token_to_id,
            id_to_token: r.tokens,
            doc_freq: r.doc_freq,
        })
    }
}

impl Dictionary {
    pub fn len(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_token.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.token_to_id.get(token).copied()
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.id_to_token.get(id).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.id_to_token
    }

    pub fn doc_freq(&self, id: usize) -> Option<u64> {
        self.doc_freq.get(id).copied()
    }

    /// Hex SHA-256 over the ordered token list; identifies the id assignment.
    pub fn version_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        for token in &self.id_to_token {
            hasher.update(token.as_bytes());
            hasher.update([0u8]);
        }
        hex::encode(hasher.finalize())
    }
}

/// Assigns ids in first-occurrence order, then drops tokens seen in fewer than
/// `min_doc_freq` documents and recompacts the ids.
pub fn build_dictionary<S: AsRef<str>>(
    token_docs: &[Vec<S>],
    min_doc_freq: u64,
) -> Result<Dictionary> {
    if min_doc_freq == 0 {
        return Err(Error::InvalidArgument("min_doc_freq must be >= 1".into()));
    }
    let mut order: Vec<String> = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut df: Vec<u64> = Vec::new();
    for doc in token_docs {
        let mut seen = HashSet::new();
        for token in doc {
            let token = token.as_ref();
            let id = *index.entry(token).or_insert_with(|| {
                order.push(token.to_owned());
                df.push(0);
                order.len() - 1
            });
            if seen.insert(id) {
                df[id] += 1;
            }
        }
    }

    let mut id_to_token = Vec::new();
    let mut doc_freq = Vec::new();
    for (token, freq) in order.into_iter().zip(df) {
        if freq >= min_doc_freq {
            id_to_token.push(token);
            doc_freq.push(freq);
        }
    }
    if id_to_token.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    let token_to_id = id_to_token
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();
    Ok(Dictionary {
        token_to_id,
        id_to_token,
        doc_freq,
    })
}

/// Sparse term-count vector, entries sorted by strictly increasing term id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BowDocument {
    pub doc_id: String,
    entries: Vec<(usize, u32)>,
}

impl BowDocument {
    /// Builds a document from `(term_id, count)` pairs in any order. Repeated
    /// ids are summed and zero counts dropped.
    pub fn from_pairs(
        doc_id: impl Into<String>,
        pairs: impl IntoIterator<Item = (usize, u32)>,
    ) -> Self {
        let mut entries: Vec<(usize, u32)> = pairs.into_iter().filter(|&(_, c)| c > 0).collect();
        entries.sort_unstable_by_key(|&(id, _)| id);
        entries.dedup_by(|next, prev| {
            if next.0 == prev.0 {
                prev.1 += next.1;
                true
            } else {
                false
            }
        });
        BowDocument {
            doc_id: doc_id.into(),
            entries,
        }
    }

    pub fn entries(&self) -> &[(usize, u32)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_count(&self) -> u64 {
        self.entries.iter().map(|&(_, c)| c as u64).sum()
    }

    pub fn max_term_id(&self) -> Option<usize> {
        self.entries.last().map(|&(id, _)| id)
    }
}

/// Counts in-vocabulary tokens; unknown tokens are dropped.
pub fn doc_to_bow<S: AsRef<str>>(
    dict: &Dictionary,
    doc_id: impl Into<String>,
    tokens: &[S],
) -> BowDocument {
    let mut counts: HashMap<usize, u32> = HashMap::new();
    for token in tokens {
        if let Some(id) = dict.id(token.as_ref()) {
            *counts.entry(id).or_default() += 1;
        }
    }
    BowDocument::from_pairs(doc_id, counts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitCorpus {
    pub train: Vec<BowDocument>,
    pub test: Vec<BowDocument>,
    pub seed: u64,
    pub ratio: f64,
}

/// Seeded shuffle of `0..n` split into a prefix of `round(ratio * n)` training
/// indices and the remaining test indices.
pub fn split_indices(n: usize, ratio: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "split ratio {ratio} not in (0, 1)"
        )));
    }
    if n == 0 {
        return Err(Error::EmptyCorpus);
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let n_train = (ratio * n as f64).round() as usize;
    let test = order.split_off(n_train);
    Ok((order, test))
}

pub fn split_train_test(corpus: &[BowDocument], ratio: f64, seed: u64) -> Result<SplitCorpus> {
    let (train, test) = split_indices(corpus.len(), ratio, seed)?;
    Ok(SplitCorpus {
        train: train.into_iter().map(|i| corpus[i].clone()).collect(),
        test: test.into_iter().map(|i| corpus[i].clone()).collect(),
        seed,
        ratio,
    })
}
