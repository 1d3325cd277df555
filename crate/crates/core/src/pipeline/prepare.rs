use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{
    build_dictionary, doc_to_bow, filter_stopwords, load_corpus, split_indices, tokenize,
    BowDocument, Dictionary, DocumentKind, Schema, SkipReport, SplitCorpus, StopList,
};
use crate::error::{Error, Result};
use crate::pipeline::config::Config;
use crate::pipeline::stage_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparedDocument {
    pub doc_id: String,
    pub news_id: String,
    pub kind: DocumentKind,
    pub tokens: Vec<String>,
    pub bow: BowDocument,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PreprocessReport {
    pub articles: usize,
    pub comments: usize,
    pub article_skips: SkipReport,
    pub comment_skips: SkipReport,
    /// Documents whose bag of words is empty after filtering; kept for
    /// bookkeeping, left out of training and inference.
    pub empty_after_filtering: usize,
}

/// Tokenized, encoded and split corpus; the output of the `preprocess` step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparedCorpus {
    pub documents: Vec<PreparedDocument>,
    pub dictionary: Dictionary,
    /// Indices into `documents`; only documents with a nonempty bag of words.
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub split_seed: u64,
    pub split_ratio: f64,
    pub report: PreprocessReport,
}

impl PreparedCorpus {
    pub fn from_config(cfg: &Config, base: &Path) -> Result<Self> {
        let articles = load_corpus(
            cfg.resolve(base, &cfg.input.articles),
            Schema::ArticlesJsonl,
        )?;
        let comments = load_corpus(
            cfg.resolve(base, &cfg.input.comments),
            Schema::CommentsJsonl,
        )?;
        let stoplist = match &cfg.input.stopwords {
            Some(p) => StopList::standard_with_file(cfg.resolve(base, p))?,
            None => StopList::standard(Vec::<String>::new()),
        };

        let docs: Vec<_> = articles
            .documents
            .iter()
            .chain(&comments.documents)
            .collect();
        let token_docs: Vec<Vec<String>> = docs
            .iter()
            .map(|d| {
                filter_stopwords(
                    tokenize(&d.analysis_text(cfg.input.include_titles)),
                    &stoplist,
                )
            })
            .collect();
        let dictionary = build_dictionary(&token_docs, cfg.preprocess.min_doc_freq)?;

        let documents: Vec<PreparedDocument> = docs
            .iter()
            .zip(token_docs)
            .map(|(d, tokens)| PreparedDocument {
                bow: doc_to_bow(&dictionary, d.doc_id.clone(), &tokens),
                doc_id: d.doc_id.clone(),
                news_id: d.news_id.clone(),
                kind: d.kind,
                tokens,
            })
            .collect();

        let usable: Vec<usize> = (0..documents.len())
            .filter(|&i| !documents[i].bow.is_empty())
            .collect();
        let split_seed = stage_seed(cfg.seed, "split");
        let (train, test) = split_indices(usable.len(), cfg.preprocess.split_ratio, split_seed)?;
        let report = PreprocessReport {
            articles: articles.documents.len(),
            comments: comments.documents.len(),
            article_skips: articles.report,
            comment_skips: comments.report,
            empty_after_filtering: documents.len() - usable.len(),
        };
        Ok(PreparedCorpus {
            train: train.into_iter().map(|i| usable[i]).collect(),
            test: test.into_iter().map(|i| usable[i]).collect(),
            documents,
            dictionary,
            split_seed,
            split_ratio: cfg.preprocess.split_ratio,
            report,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string(self).map_err(|e| Error::format("prepared corpus", e))?;
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format("prepared corpus", e))
    }

    pub fn split(&self) -> SplitCorpus {
        SplitCorpus {
            train: self.train_bows(),
            test: self.test_bows(),
            seed: self.split_seed,
            ratio: self.split_ratio,
        }
    }

    pub fn train_bows(&self) -> Vec<BowDocument> {
        self.train
            .iter()
            .map(|&i| self.documents[i].bow.clone())
            .collect()
    }

    pub fn test_bows(&self) -> Vec<BowDocument> {
        self.test
            .iter()
            .map(|&i| self.documents[i].bow.clone())
            .collect()
    }

    pub fn train_tokens(&self) -> Vec<&[String]> {
        self.train
            .iter()
            .map(|&i| self.documents[i].tokens.as_slice())
            .collect()
    }

    pub fn test_tokens(&self) -> Vec<&[String]> {
        self.test
            .iter()
            .map(|&i| self.documents[i].tokens.as_slice())
            .collect()
    }

    /// The `n` dictionary tokens with the highest document frequency, ties by id.
    pub fn frequent_tokens(&self, n: usize) -> Vec<String> {
        let d = &self.dictionary;
        let mut ids: Vec<usize> = (0..d.len()).collect();
        ids.sort_by(|&a, &b| d.doc_freq(b).cmp(&d.doc_freq(a)).then(a.cmp(&b)));
        ids.into_iter()
            .take(n)
            .map(|i| d.tokens()[i].clone())
            .collect()
    }
}
