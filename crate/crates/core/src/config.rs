//! Run configuration shared by every CLI stage, stored as TOML like the
//! lexicon. Relative paths resolve against the config file's directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::chunker::ChunkPolicy;
use crate::dataset::{Pairing, SplitRatios};
use crate::error::{Error, Result};
use crate::eval::{BootstrapConfig, ReportFormat};
use crate::lexicon::Lexicon;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Seed for every randomized stage; such stages refuse to run without one.
    pub seed: Option<u64>,
    pub log_level: String,
    pub paths: PathConfig,
    pub corpus: CorpusConfig,
    pub dataset: DatasetConfig,
    pub split: SplitRatios,
    pub chunk: ChunkConfig,
    pub eval: EvalConfig,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct PathConfig {
    /// Lexicon file; the bundled lexicon when unset.
    pub lexicon: Option<PathBuf>,
    /// Note manifest (CSV/TSV) or cleaned corpus (JSON).
    pub input: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    pub drop_outliers: bool,
    /// Keyword-free notes contribute unanswerable samples.
    pub include_no_answer: bool,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            drop_outliers: true,
            include_no_answer: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    /// `all` or `k:<k>[:<seed>]`.
    pub pairing: String,
}

impl DatasetConfig {
    pub fn pairing(&self) -> Result<Pairing> {
        if self.pairing.is_empty() {
            Ok(Pairing::AllVariants)
        } else {
            self.pairing.parse()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChunkConfig {
    pub tokenizer: String,
    pub max_sequence_tokens: usize,
    pub document_stride_tokens: usize,
    pub max_question_tokens: usize,
    pub max_answer_tokens: usize,
    pub reserved_tokens: usize,
}

impl Default for ChunkConfig {
    fn default() -> Self {
        ChunkConfig::new("whitespace", ChunkPolicy::default())
    }
}

impl ChunkConfig {
    pub fn new(tokenizer: &str, p: ChunkPolicy) -> Self {
        ChunkConfig {
            tokenizer: tokenizer.to_string(),
            max_sequence_tokens: p.max_sequence_tokens,
            document_stride_tokens: p.document_stride_tokens,
            max_question_tokens: p.max_question_tokens,
            max_answer_tokens: p.max_answer_tokens,
            reserved_tokens: p.reserved_tokens,
        }
    }

    pub fn policy(&self) -> ChunkPolicy {
        ChunkPolicy {
            max_sequence_tokens: self.max_sequence_tokens,
            document_stride_tokens: self.document_stride_tokens,
            max_question_tokens: self.max_question_tokens,
            max_answer_tokens: self.max_answer_tokens,
            reserved_tokens: self.reserved_tokens,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub answerer: String,
    /// Which split part is scored by `pipeline all`.
    pub split: String,
    pub ci_level: f64,
    pub replicates: usize,
    pub formats: Vec<ReportFormat>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            answerer: "rule_based".into(),
            split: "test".into(),
            ci_level: 0.95,
            replicates: 10_000,
            formats: vec![
                ReportFormat::Markdown,
                ReportFormat::Csv,
                ReportFormat::Json,
            ],
        }
    }
}

impl EvalConfig {
    pub fn bootstrap(&self, seed: u64) -> BootstrapConfig {
        BootstrapConfig {
            level: self.ci_level,
            replicates: self.replicates,
            seed,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: None,
            log_level: "info".into(),
            paths: PathConfig::default(),
            corpus: CorpusConfig::default(),
            dataset: DatasetConfig::default(),
            split: SplitRatios::default(),
            chunk: ChunkConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::parse("config", e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a config file, resolving relative paths against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = RunConfig::from_toml_str(&text).map_err(|e| match e {
            Error::Parse { message, .. } => Error::parse(path.display().to_string(), message),
            e => e,
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        for p in [
            &mut cfg.paths.lexicon,
            &mut cfg.paths.input,
            &mut cfg.paths.output_dir,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.split.validate()?;
        self.chunk.policy().validate()?;
        self.dataset.pairing()?;
        if !["train", "dev", "test"].contains(&self.eval.split.as_str()) {
            return Err(Error::InvalidInput(format!(
                "eval split `{}` must be train, dev or test",
                self.eval.split
            )));
        }
        Ok(())
    }

    pub fn require_seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| {
            Error::InvalidInput(
                "this stage is randomized; set `seed` in the config or pass --seed".into(),
            )
        })
    }

    pub fn lexicon(&self) -> Result<Lexicon> {
        match &self.paths.lexicon {
            Some(p) => Lexicon::load(p),
            None => Ok(Lexicon::builtin()),
        }
    }
}
