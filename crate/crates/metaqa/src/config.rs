//! Run configuration: a TOML file, overridden by command-line flags.

use std::path::{Path, PathBuf};

use metaqa_core::resources::DEFAULT_INTERVAL;
use metaqa_core::MergeMode;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {}: {source}", path.display())]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config {}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("{key} is not set")]
    Missing { key: &'static str },
    #[error("{key} = {}: file not found", path.display())]
    NotFound { key: &'static str, path: PathBuf },
    #[error("interval [{0}, {1}] must satisfy -1 <= lo <= hi <= 1")]
    Interval(f64, f64),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Pattern store document; created by `learn` if absent.
    pub msdip: PathBuf,
    /// Tagged sentences to generate from.
    pub corpus: Option<PathBuf>,
    /// Training pairs for `learn`.
    pub pairs: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub unigrams: Option<PathBuf>,
    pub kb: Option<PathBuf>,
    /// External questions for `filter`.
    pub questions: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub mode: MergeMode,
    pub interval: (f64, f64),
    pub seed: u64,
    pub distractors: usize,
    pub port: u16,
    /// Shell command turning raw text on stdin into tagged JSON lines.
    pub tagger: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            msdip: PathBuf::from("msdip.json"),
            corpus: None,
            pairs: None,
            embeddings: None,
            lexicon: None,
            unigrams: None,
            kb: None,
            questions: None,
            out_dir: PathBuf::from("out"),
            mode: MergeMode::Ideal,
            interval: DEFAULT_INTERVAL,
            seed: 0,
            distractors: 3,
            port: 8080,
            tagger: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text, path)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let (lo, hi) = self.interval;
        if !(-1.0..=1.0).contains(&lo) || !(-1.0..=1.0).contains(&hi) || lo > hi {
            return Err(ConfigError::Interval(lo, hi));
        }
        if self.distractors == 0 {
            return Err(ConfigError::Invalid("distractors must be at least 1".into()));
        }
        let named = [
            ("corpus", &self.corpus),
            ("pairs", &self.pairs),
            ("embeddings", &self.embeddings),
            ("lexicon", &self.lexicon),
            ("unigrams", &self.unigrams),
            ("kb", &self.kb),
            ("questions", &self.questions),
        ];
        for (key, path) in named {
            if let Some(p) = path {
                if !p.exists() {
                    return Err(ConfigError::NotFound { key, path: p.clone() });
                }
            }
        }
        Ok(())
    }
}

/// A path that the current command cannot run without.
pub fn required<'a>(key: &'static str, value: &'a Option<PathBuf>) -> Result<&'a Path, ConfigError> {
    value.as_deref().ok_or(ConfigError::Missing { key })
}
