use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use topicscope::lda::{train, LdaModel};
use topicscope::pipeline::config::Config;
use topicscope::pipeline::report::{
    analysis_outputs, inconsistency_outputs, infer_all, write_file,
};
use topicscope::pipeline::sweep::model_coherence;
use topicscope::pipeline::{
    decoupling_check, replay_manifest, run_pipeline, run_sweep, stage_seed, PreparedCorpus,
    SweepData, SweepParameter, SweepSpec,
};
use topicscope::{Error, Result};

#[derive(Parser)]
#[command(
    name = "topicscope",
    version,
    about = "Topic modeling and article/comment inconsistency analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    num_topics: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    chunksize: Option<usize>,
    #[arg(long)]
    passes: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Load, tokenize, filter and split the corpus.
    Preprocess {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one model per parameter value and score it with C_v.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Output of `preprocess`; rebuilt from the config when absent.
        #[arg(long)]
        prepared: Option<PathBuf>,
        #[arg(long, value_parser = SweepParameter::parse)]
        parameter: SweepParameter,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<usize>,
        /// Also score every model against the test split.
        #[arg(long)]
        test: bool,
        #[arg(long)]
        wall_time: bool,
        /// Repeat the sweep with this topic count and print the Pearson
        /// correlation of the two coherence curves.
        #[arg(long)]
        alt_num_topics: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the final model on the training split.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        prepared: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Topic terms, keyword topics, dominant-topic shares and the topic map.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        prepared: Option<PathBuf>,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Article/comment similarity per thread, histogram and topic profile.
    Inconsistency {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        prepared: Option<PathBuf>,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Re-run a recorded manifest and verify every artifact hash.
    Report {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// All stages end to end, with a manifest.
    Pipeline {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn load_config(c: &Common) -> Result<(Config, PathBuf)> {
    let (mut cfg, base) = Config::load(&c.config)?;
    if let Some(v) = c.seed {
        cfg.seed = v;
    }
    if let Some(v) = c.num_topics {
        cfg.lda.num_topics = v;
    }
    if let Some(v) = c.iterations {
        cfg.lda.iterations = v;
    }
    if let Some(v) = c.chunksize {
        cfg.lda.chunksize = v;
    }
    if let Some(v) = c.passes {
        cfg.lda.passes = v;
    }
    cfg.validate()?;
    Ok((cfg, base))
}

fn prepared(cfg: &Config, base: &Path, path: Option<&Path>) -> Result<PreparedCorpus> {
    match path {
        Some(p) => PreparedCorpus::load(p),
        None => PreparedCorpus::from_config(cfg, base),
    }
    .map_err(|e| e.in_stage("preprocess"))
}

fn load_model(path: &Path, prepared: &PreparedCorpus) -> Result<LdaModel> {
    let model = LdaModel::load(path)?;
    if model.dictionary().version_hash() != prepared.dictionary.version_hash() {
        return Err(Error::InvalidArgument(format!(
            "{} was trained on a different dictionary than the prepared corpus",
            path.display()
        )));
    }
    Ok(model)
}

fn write_outputs(dir: &Path, files: &[(&str, Vec<u8>)]) -> Result<()> {
    for (name, bytes) in files {
        write_file(&dir.join(name), bytes)?;
        println!("wrote {}", dir.join(name).display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Preprocess { common, out } => {
            let (cfg, base) = load_config(&common)?;
            let p = prepared(&cfg, &base, None)?;
            p.save(&out)?;
            let r = &p.report;
            println!(
                "{} articles, {} comments, {} skipped lines, {} empty after filtering, vocabulary {}, train {}, test {}",
                r.articles,
                r.comments,
                r.article_skips.count() + r.comment_skips.count(),
                r.empty_after_filtering,
                p.dictionary.len(),
                p.train.len(),
                p.test.len()
            );
        }
        Command::Sweep {
            common,
            prepared: pp,
            parameter,
            values,
            test,
            wall_time,
            alt_num_topics,
            out,
        } => {
            let (cfg, base) = load_config(&common)?;
            let p = prepared(&cfg, &base, pp.as_deref())?;
            let data = SweepData::new(&p);
            let spec = SweepSpec {
                parameter,
                values,
                base: cfg.lda.to_params(stage_seed(cfg.seed, "lda")),
                coherence: cfg.coherence,
                evaluate_test: test,
                record_wall_time: wall_time,
            };
            let result = run_sweep(&data, &spec).map_err(|e| e.in_stage("sweep"))?;
            let mut csv = Vec::new();
            result.write_csv(&mut csv)?;
            write_file(&out, &csv)?;
            println!("wrote {}", out.display());
            if let Some(k) = alt_num_topics {
                let r = decoupling_check(&data, &spec, k).map_err(|e| e.in_stage("sweep"))?;
                println!(
                    "pearson(train_cv at K={}, train_cv at K={k}) = {r:.6}",
                    spec.base.num_topics
                );
            }
        }
        Command::Train {
            common,
            prepared: pp,
            out,
        } => {
            let (cfg, base) = load_config(&common)?;
            let p = prepared(&cfg, &base, pp.as_deref())?;
            let data = SweepData::new(&p);
            let params = cfg.lda.to_params(stage_seed(cfg.seed, "lda"));
            let model =
                train(&data.train, &p.dictionary, &params).map_err(|e| e.in_stage("train"))?;
            model.save(&out)?;
            let cv = model_coherence(&model, &data.train_tokens, &cfg.coherence)?;
            println!("wrote {} (train C_v {:.6})", out.display(), cv.aggregate);
        }
        Command::Analyze {
            common,
            prepared: pp,
            model,
            out_dir,
        } => {
            let (cfg, base) = load_config(&common)?;
            let p = prepared(&cfg, &base, pp.as_deref())?;
            let files = (|| {
                let model = load_model(&model, &p)?;
                let dists = infer_all(&model, &p)?;
                analysis_outputs(&cfg, &p, &model, &dists)
            })()
            .map_err(|e| e.in_stage("analyze"))?;
            write_outputs(&out_dir, &files)?;
        }
        Command::Inconsistency {
            common,
            prepared: pp,
            model,
            out_dir,
        } => {
            let (cfg, base) = load_config(&common)?;
            let p = prepared(&cfg, &base, pp.as_deref())?;
            let inc = (|| {
                let model = load_model(&model, &p)?;
                let dists = infer_all(&model, &p)?;
                inconsistency_outputs(&cfg, &p, &dists)
            })()
            .map_err(|e| e.in_stage("inconsistency"))?;
            write_outputs(&out_dir, &inc.files)?;
            println!("{} threads scored, {} excluded", inc.scored, inc.excluded);
        }
        Command::Report { manifest, out_dir } => {
            let checks = replay_manifest(&manifest, &out_dir)?;
            let mut ok = true;
            for c in &checks {
                println!(
                    "{} {}",
                    if c.matches { "match   " } else { "MISMATCH" },
                    c.file
                );
                ok &= c.matches;
            }
            if !ok {
                return Err(Error::InvalidArgument(
                    "replayed bundle differs from the manifest".into(),
                ));
            }
        }
        Command::Pipeline { common, out_dir } => {
            let (cfg, base) = load_config(&common)?;
            let m = run_pipeline(&cfg, &base, &out_dir)?;
            println!(
                "K={} train C_v {:.6}{}; {} threads scored; {} artifacts in {}",
                m.final_params.num_topics,
                m.metrics.train_cv.aggregate,
                m.metrics
                    .test_cv
                    .as_ref()
                    .map(|c| format!(", test C_v {:.6}", c.aggregate))
                    .unwrap_or_default(),
                m.metrics.threads_scored,
                m.artifacts.len(),
                out_dir.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
