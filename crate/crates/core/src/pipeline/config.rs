//! Run configuration, read from a TOML file. Unknown keys are rejected and
//! every key has a documented default.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coherence::CoherenceSettings;
use crate::error::{Error, Result};
use crate::inconsistency::{CommentAggregation, DEFAULT_BIN_EDGES, DEFAULT_THRESHOLD};
use crate::lda::LdaParams;
use crate::pipeline::sweep::SweepParameter;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Root seed; per-stage seeds are derived from it.
    #[serde(default)]
    pub seed: u64,
    pub input: InputConfig,
    #[serde(default)]
    pub preprocess: PreprocessConfig,
    #[serde(default)]
    pub lda: LdaConfig,
    #[serde(default)]
    pub coherence: CoherenceSettings,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub inconsistency: InconsistencyConfig,
    #[serde(default)]
    pub selection: SelectionConfig,
    #[serde(default)]
    pub sweep: Vec<SweepConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub articles: PathBuf,
    pub comments: PathBuf,
    /// Extra stop words, one per line, on top of the built-in list.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stopwords: Option<PathBuf>,
    /// Prepend article titles to the article text.
    #[serde(default)]
    pub include_titles: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PreprocessConfig {
    pub min_doc_freq: u64,
    pub split_ratio: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            min_doc_freq: 1,
            split_ratio: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LdaConfig {
    pub num_topics: usize,
    pub iterations: usize,
    pub chunksize: usize,
    pub passes: usize,
    /// Symmetric document-topic prior; `1 / num_topics` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Topic-word prior; `1 / num_topics` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    pub kappa: f64,
    pub tau0: f64,
    pub gamma_threshold: f64,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            num_topics: 7,
            iterations: 10,
            chunksize: 100,
            passes: 5,
            alpha: None,
            eta: None,
            kappa: 0.5,
            tau0: 1.0,
            gamma_threshold: 1e-3,
        }
    }
}

impl LdaConfig {
    pub fn to_params(&self, seed: u64) -> LdaParams {
        let mut p = LdaParams::new(self.num_topics)
            .iterations(self.iterations)
            .chunksize(self.chunksize)
            .passes(self.passes)
            .seed(seed);
        if let Some(a) = self.alpha {
            p = p.symmetric_alpha(a);
        }
        if let Some(e) = self.eta {
            p = p.eta(e);
        }
        p.kappa = self.kappa;
        p.tau0 = self.tau0;
        p.gamma_threshold = self.gamma_threshold;
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    /// Words per topic in the topic-term table.
    pub top_terms: usize,
    pub keyword_floor: f64,
    /// Words for the keyword-topic table; when empty, the `keyword_count`
    /// tokens with the highest document frequency are used.
    pub keywords: Vec<String>,
    pub keyword_count: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            top_terms: 7,
            keyword_floor: crate::analysis::DEFAULT_KEYWORD_FLOOR,
            keywords: Vec::new(),
            keyword_count: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InconsistencyConfig {
    pub threshold: f64,
    pub bin_edges: Vec<f64>,
    pub aggregation: CommentAggregation,
}

impl Default for InconsistencyConfig {
    fn default() -> Self {
        InconsistencyConfig {
            threshold: DEFAULT_THRESHOLD,
            bin_edges: DEFAULT_BIN_EDGES.to_vec(),
            aggregation: CommentAggregation::MeanDistribution,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelectionConfig {
    /// Pick the final topic count from the first `num_topics` sweep.
    pub enabled: bool,
    /// Smallest topic count whose training C_v is within this of the best.
    pub tolerance: f64,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            enabled: false,
            tolerance: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    pub values: Vec<usize>,
    /// Also score each model on the test split.
    #[serde(default)]
    pub evaluate_test: bool,
    /// Adds a wall-time column; reports stop being byte-reproducible.
    #[serde(default)]
    pub record_wall_time: bool,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::format("config", e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a config file; relative input paths resolve against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<(Self, PathBuf)> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg = Self::from_toml(&text)?;
        let base = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        Ok((cfg, base))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    // Negated comparisons so NaN fails every check.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.preprocess.min_doc_freq == 0 {
            return bad("preprocess.min_doc_freq must be >= 1".into());
        }
        let r = self.preprocess.split_ratio;
        if !(r > 0.0 && r < 1.0) {
            return bad(format!("preprocess.split_ratio {r} not in (0, 1)"));
        }
        self.lda.to_params(0).validate()?;
        if self.coherence.topn < 2
            || self.coherence.window_size == 0
            || !(self.coherence.eps >= 0.0)
        {
            return bad("coherence needs topn >= 2, window_size >= 1, eps >= 0".into());
        }
        if self.analysis.top_terms == 0 || !(self.analysis.keyword_floor >= 0.0) {
            return bad("analysis needs top_terms >= 1 and keyword_floor >= 0".into());
        }
        let t = self.inconsistency.threshold;
        if !(t > 0.0 && t < 1.0) {
            return bad(format!("inconsistency.threshold {t} not in (0, 1)"));
        }
        let e = &self.inconsistency.bin_edges;
        if e.len() < 2 || e.windows(2).any(|w| !(w[0] < w[1])) || e[0] > 0.0 || e[e.len() - 1] < 1.0
        {
            return bad("inconsistency.bin_edges must ascend strictly and cover [0, 1]".into());
        }
        if !(self.selection.tolerance >= 0.0) {
            return bad("selection.tolerance must be >= 0".into());
        }
        for (i, s) in self.sweep.iter().enumerate() {
            if s.values.is_empty() {
                return bad(format!("sweep {i} has no values"));
            }
            for &v in &s.values {
                s.parameter.apply(&self.lda.to_params(0), v).validate()?;
            }
        }
        if self.selection.enabled
            && !self
                .sweep
                .iter()
                .any(|s| s.parameter == SweepParameter::NumTopics)
        {
            return bad("selection.enabled needs a num_topics sweep".into());
        }
        Ok(())
    }

    pub fn resolve(&self, base: &Path, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            base.join(path)
        }
    }
}
