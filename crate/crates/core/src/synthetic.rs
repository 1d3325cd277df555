//! Generator for corpora with known topic structure.
//!
//! Each topic owns a disjoint block of vocabulary with Zipf-shaped word
//! probabilities (`p(word j) ~ 1/(j+1)`), so its true top words are well
//! defined. Documents draw a topic mixture from a symmetric Dirichlet and then
//! draw every token independently. The generator is the ground truth that
//! recovery tests compare trained models against.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{weighted::WeightedIndex, Distribution, Gamma};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub num_topics: usize,
    pub words_per_topic: usize,
    pub num_docs: usize,
    pub doc_len: usize,
    pub doc_topic_alpha: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub spec: SyntheticSpec,
    pub documents: Vec<Vec<String>>,
    /// True topic mixture of every document.
    pub mixtures: Vec<Vec<f64>>,
    word_topic: HashMap<String, usize>,
}

pub fn word_name(topic: usize, rank: usize) -> String {
    format!("topic{topic}word{rank:03}")
}

/// Samples a Dirichlet vector via normalized gamma draws.
pub fn sample_dirichlet<R: Rng + ?Sized>(rng: &mut R, alpha: f64, k: usize) -> Vec<f64> {
    let g = Gamma::new(alpha, 1.0).expect("positive alpha");
    loop {
        let draws: Vec<f64> = (0..k).map(|_| g.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        if total > 0.0 {
            return draws.into_iter().map(|d| d / total).collect();
        }
    }
}

impl SyntheticCorpus {
    pub fn generate(spec: &SyntheticSpec) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let weights: Vec<f64> = (0..spec.words_per_topic)
            .map(|j| 1.0 / (j + 1) as f64)
            .collect();
        let word_dist = WeightedIndex::new(&weights).expect("positive weights");

        let mut documents = Vec::with_capacity(spec.num_docs);
        let mut mixtures = Vec::with_capacity(spec.num_docs);
        for _ in 0..spec.num_docs {
            let theta = sample_dirichlet(&mut rng, spec.doc_topic_alpha, spec.num_topics);
            let topic_dist = WeightedIndex::new(&theta).expect("valid mixture");
            let doc = (0..spec.doc_len)
                .map(|_| {
                    let k = topic_dist.sample(&mut rng);
                    word_name(k, word_dist.sample(&mut rng))
                })
                .collect();
            documents.push(doc);
            mixtures.push(theta);
        }

        let word_topic = (0..spec.num_topics)
            .flat_map(|k| (0..spec.words_per_topic).map(move |j| (word_name(k, j), k)))
            .collect();
        SyntheticCorpus {
            spec: spec.clone(),
            documents,
            mixtures,
            word_topic,
        }
    }

    pub fn topic_of(&self, word: &str) -> Option<usize> {
        self.word_topic.get(word).copied()
    }

    /// Vocabulary of topic `k`, most probable first.
    pub fn topic_words(&self, k: usize) -> Vec<String> {
        (0..self.spec.words_per_topic)
            .map(|j| word_name(k, j))
            .collect()
    }
}
