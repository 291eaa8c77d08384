//! Command-line front end.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use metaqa_core::MergeMode;
use serde::Serialize;

use crate::assets::Assets;
use crate::config::{ConfigError, RunConfig};
use crate::pipeline::{self, AppError, DistractSettings};
use crate::service::{self, ServiceConfig, ServiceState};

#[derive(Debug, Parser)]
#[command(name = "metaqa", version, about = "Question generation from tagged sentences")]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Learn pattern pairs from declarative/question pairs.
    Learn,
    /// Generate question/answer pairs and teach requests for a corpus.
    Generate,
    /// Select answer candidates and screen external questions.
    Filter,
    /// Generate distractors for the generated pairs.
    Distract,
    /// Build multiple-choice items from complete distractor sets.
    Assemble,
    /// Serve the teaching API.
    Serve,
}

#[derive(Debug, Default, Args)]
pub struct Overrides {
    #[arg(long, global = true)]
    pub msdip: Option<PathBuf>,
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
    #[arg(long, global = true)]
    pub pairs: Option<PathBuf>,
    #[arg(long, global = true)]
    pub embeddings: Option<PathBuf>,
    #[arg(long, global = true)]
    pub lexicon: Option<PathBuf>,
    #[arg(long, global = true)]
    pub unigrams: Option<PathBuf>,
    #[arg(long, global = true)]
    pub kb: Option<PathBuf>,
    #[arg(long, global = true)]
    pub questions: Option<PathBuf>,
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// `ideal` or `phrasal_aware`.
    #[arg(long, global = true, value_parser = parse_mode)]
    pub mode: Option<MergeMode>,
    /// Similarity interval as `lo,hi`.
    #[arg(long, global = true, value_parser = parse_interval)]
    pub interval: Option<(f64, f64)>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub distractors: Option<usize>,
    #[arg(long, global = true)]
    pub port: Option<u16>,
    #[arg(long, global = true)]
    pub tagger: Option<String>,
}

fn parse_mode(s: &str) -> Result<MergeMode, String> {
    serde_json::from_value(serde_json::Value::String(s.replace('-', "_")))
        .map_err(|_| format!("unknown mode {s:?} (ideal, phrasal_aware)"))
}

fn parse_interval(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected lo,hi")?;
    let p = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    Ok((p(lo)?, p(hi)?))
}

impl Overrides {
    fn apply(self, cfg: &mut RunConfig) {
        let set = |slot: &mut Option<PathBuf>, v: Option<PathBuf>| {
            if v.is_some() {
                *slot = v;
            }
        };
        set(&mut cfg.corpus, self.corpus);
        set(&mut cfg.pairs, self.pairs);
        set(&mut cfg.embeddings, self.embeddings);
        set(&mut cfg.lexicon, self.lexicon);
        set(&mut cfg.unigrams, self.unigrams);
        set(&mut cfg.kb, self.kb);
        set(&mut cfg.questions, self.questions);
        if let Some(v) = self.msdip {
            cfg.msdip = v;
        }
        if let Some(v) = self.out_dir {
            cfg.out_dir = v;
        }
        if let Some(v) = self.mode {
            cfg.mode = v;
        }
        if let Some(v) = self.interval {
            cfg.interval = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.distractors {
            cfg.distractors = v;
        }
        if let Some(v) = self.port {
            cfg.port = v;
        }
        if self.tagger.is_some() {
            cfg.tagger = self.tagger;
        }
    }
}

pub fn resolve_config(config: Option<&std::path::Path>, overrides: Overrides) -> Result<RunConfig, ConfigError> {
    let mut cfg = match config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    overrides.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

fn print_stats<T: Serialize>(command: &str, stats: &T) {
    println!("{command}: {}", serde_json::to_string(stats).expect("stats serialize"));
}

fn serve(cfg: &RunConfig) -> Result<(), AppError> {
    let store = crate::io::load_store_or_empty(&cfg.msdip)?;
    let assets = match (&cfg.embeddings, &cfg.lexicon, &cfg.kb) {
        (Some(e), Some(l), Some(k)) => Some(Assets::load(e, l, k)?),
        _ => None,
    };
    let state = ServiceState::new(
        ServiceConfig {
            mode: cfg.mode,
            msdip: Some(cfg.msdip.clone()),
            tagger: cfg.tagger.clone(),
            distract: DistractSettings::from_config(cfg),
        },
        store,
        assets,
    );
    let rt = tokio::runtime::Runtime::new().map_err(|e| AppError::Data(format!("runtime: {e}")))?;
    eprintln!("listening on port {}", cfg.port);
    rt.block_on(service::serve(state, cfg.port))
        .map_err(|e| AppError::Data(format!("serve: {e}")))
}

pub fn run(cli: Cli) -> Result<(), AppError> {
    let cfg = resolve_config(cli.config.as_deref(), cli.overrides)?;
    match cli.command {
        Cmd::Learn => print_stats("learn", &pipeline::cmd_learn(&cfg)?),
        Cmd::Generate => print_stats("generate", &pipeline::cmd_generate(&cfg)?),
        Cmd::Filter => print_stats("filter", &pipeline::cmd_filter(&cfg)?),
        Cmd::Distract => print_stats("distract", &pipeline::cmd_distract(&cfg)?),
        Cmd::Assemble => print_stats("assemble", &pipeline::cmd_assemble(&cfg)?),
        Cmd::Serve => serve(&cfg)?,
    }
    Ok(())
}

pub fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
