//! One-parameter hyperparameter sweeps scored by C_v coherence.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::coherence::{cv_coherence, CoherenceResult, CoherenceSettings};
use crate::corpus::{BowDocument, Dictionary};
use crate::error::{Error, Result};
use crate::lda::{train, LdaModel, LdaParams};
use crate::pipeline::prepare::PreparedCorpus;
use crate::stats::pearson;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    NumTopics,
    Iterations,
    Chunksize,
    Passes,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::NumTopics => "num_topics",
            SweepParameter::Iterations => "iterations",
            SweepParameter::Chunksize => "chunksize",
            SweepParameter::Passes => "passes",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "num_topics" => Ok(SweepParameter::NumTopics),
            "iterations" => Ok(SweepParameter::Iterations),
            "chunksize" => Ok(SweepParameter::Chunksize),
            "passes" => Ok(SweepParameter::Passes),
            other => Err(Error::InvalidArgument(format!(
                "unknown sweep parameter {other:?}"
            ))),
        }
    }

    pub fn apply(self, base: &LdaParams, value: usize) -> LdaParams {
        match self {
            SweepParameter::NumTopics => base.with_num_topics(value),
            SweepParameter::Iterations => base.clone().iterations(value),
            SweepParameter::Chunksize => base.clone().chunksize(value),
            SweepParameter::Passes => base.clone().passes(value),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<usize>,
    /// Values for the three parameters not being swept, plus priors and seed.
    pub base: LdaParams,
    pub coherence: CoherenceSettings,
    pub evaluate_test: bool,
    pub record_wall_time: bool,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidArgument("sweep has no values".into()));
        }
        for &v in &self.values {
            self.parameter.apply(&self.base, v).validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: usize,
    pub train_cv: Option<f64>,
    pub test_cv: Option<f64>,
    pub wall_time_secs: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub parameter: SweepParameter,
    pub num_topics: usize,
    pub iterations: usize,
    pub chunksize: usize,
    pub passes: usize,
    pub topn: usize,
    pub window_size: usize,
    pub rows: Vec<SweepRow>,
}

/// C_v of a trained model's topics against a reference corpus.
pub fn model_coherence<S: AsRef<str> + Sync>(
    model: &LdaModel,
    reference: &[Vec<S>],
    settings: &CoherenceSettings,
) -> Result<CoherenceResult> {
    let topn = settings.topn.min(model.num_terms());
    let topics = (0..model.num_topics())
        .map(|k| {
            Ok(model
                .topic_terms(k, topn)?
                .into_iter()
                .map(|(w, _)| w)
                .collect())
        })
        .collect::<Result<Vec<Vec<String>>>>()?;
    cv_coherence(
        &topics,
        reference,
        settings.topn,
        settings.window_size,
        settings.eps,
    )
}

/// Train/test views over a prepared corpus.
pub struct SweepData<'a> {
    pub dictionary: &'a Dictionary,
    pub train: Vec<BowDocument>,
    pub train_tokens: Vec<Vec<&'a str>>,
    pub test_tokens: Vec<Vec<&'a str>>,
}

impl<'a> SweepData<'a> {
    pub fn new(prepared: &'a PreparedCorpus) -> Self {
        let view = |docs: Vec<&'a [String]>| -> Vec<Vec<&'a str>> {
            docs.into_iter()
                .map(|d| d.iter().map(String::as_str).collect())
                .collect()
        };
        SweepData {
            dictionary: &prepared.dictionary,
            train: prepared.train_bows(),
            train_tokens: view(prepared.train_tokens()),
            test_tokens: view(prepared.test_tokens()),
        }
    }
}

fn run_row(data: &SweepData<'_>, spec: &SweepSpec, value: usize) -> Result<(f64, Option<f64>)> {
    let params = spec.parameter.apply(&spec.base, value);
    let model = train(&data.train, data.dictionary, &params)?;
    let train_cv = model_coherence(&model, &data.train_tokens, &spec.coherence)?.aggregate;
    let test_cv = if spec.evaluate_test {
        Some(model_coherence(&model, &data.test_tokens, &spec.coherence)?.aggregate)
    } else {
        None
    };
    Ok((train_cv, test_cv))
}

/// Trains and scores one model per value. A failing value yields a row with
/// `error` set; the sweep carries on.
pub fn run_sweep(data: &SweepData<'_>, spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let rows = spec
        .values
        .iter()
        .map(|&value| {
            let start = Instant::now();
            let outcome = run_row(data, spec, value);
            let wall = spec.record_wall_time.then(|| start.elapsed().as_secs_f64());
            match outcome {
                Ok((train_cv, test_cv)) => SweepRow {
                    value,
                    train_cv: Some(train_cv),
                    test_cv,
                    wall_time_secs: wall,
                    error: None,
                },
                Err(e) => {
                    log::warn!("sweep {}={value} failed: {e}", spec.parameter.name());
                    SweepRow {
                        value,
                        train_cv: None,
                        test_cv: None,
                        wall_time_secs: wall,
                        error: Some(e.to_string()),
                    }
                }
            }
        })
        .collect();
    Ok(SweepResult {
        parameter: spec.parameter,
        num_topics: spec.base.num_topics,
        iterations: spec.base.iterations,
        chunksize: spec.base.chunksize,
        passes: spec.base.passes,
        topn: spec.coherence.topn,
        window_size: spec.coherence.window_size,
        rows,
    })
}

impl SweepResult {
    fn train_curve(&self) -> Result<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| {
                r.train_cv.ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "sweep row {} failed: {}",
                        r.value,
                        r.error.as_deref().unwrap_or("")
                    ))
                })
            })
            .collect()
    }

    /// CSV with one row per value; the fixed parameters repeat on every row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let timed = self.rows.iter().any(|r| r.wall_time_secs.is_some());
        let mut header = vec![
            "parameter",
            "value",
            "train_cv",
            "test_cv",
            "num_topics",
            "iterations",
            "chunksize",
            "passes",
            "topn",
            "window_size",
            "error",
        ];
        if timed {
            header.push("wall_time_secs");
        }
        let csv_err = |e: csv::Error| Error::format("sweep csv", e);
        w.write_record(&header).map_err(csv_err)?;
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        for r in &self.rows {
            let fixed = |p: SweepParameter, v: usize| if p == self.parameter { r.value } else { v };
            let mut rec = vec![
                self.parameter.name().to_string(),
                r.value.to_string(),
                opt(r.train_cv),
                opt(r.test_cv),
                fixed(SweepParameter::NumTopics, self.num_topics).to_string(),
                fixed(SweepParameter::Iterations, self.iterations).to_string(),
                fixed(SweepParameter::Chunksize, self.chunksize).to_string(),
                fixed(SweepParameter::Passes, self.passes).to_string(),
                self.topn.to_string(),
                self.window_size.to_string(),
                r.error.clone().unwrap_or_default(),
            ];
            if timed {
                rec.push(opt(r.wall_time_secs));
            }
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::format("sweep csv", e))?;
        Ok(())
    }
}

/// Runs the same sweep at the base topic count and at `alt_num_topics` and
/// correlates the two training-coherence curves.
pub fn decoupling_check(
    data: &SweepData<'_>,
    spec: &SweepSpec,
    alt_num_topics: usize,
) -> Result<f64> {
    if spec.parameter == SweepParameter::NumTopics {
        return Err(Error::InvalidArgument(
            "decoupling check needs a sweep over another parameter".into(),
        ));
    }
    let base = run_sweep(data, spec)?.train_curve()?;
    let alt_spec = SweepSpec {
        base: spec.base.with_num_topics(alt_num_topics),
        ..spec.clone()
    };
    let alt = run_sweep(data, &alt_spec)?.train_curve()?;
    pearson(&base, &alt)
}

/// Smallest swept topic count whose training C_v is within `tolerance` of the
/// best one.
pub fn select_num_topics(result: &SweepResult, tolerance: f64) -> Result<usize> {
    if result.parameter != SweepParameter::NumTopics {
        return Err(Error::InvalidArgument(
            "selection needs a num_topics sweep".into(),
        ));
    }
    let scored: Vec<(usize, f64)> = result
        .rows
        .iter()
        .filter_map(|r| r.train_cv.map(|cv| (r.value, cv)))
        .collect();
    let best = scored
        .iter()
        .map(|&(_, cv)| cv)
        .fold(f64::NEG_INFINITY, f64::max);
    scored
        .iter()
        .filter(|&&(_, cv)| cv >= best - tolerance)
        .map(|&(v, _)| v)
        .min()
        .ok_or_else(|| Error::InvalidArgument("every sweep row failed".into()))
}
