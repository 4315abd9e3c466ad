//! Run configuration: built-in defaults, then an optional JSON file, then flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use collapse_lab::decoherence::BathMode;
use collapse_lab::eraser::{SetupKind, DEFAULT_WINDOW_NS};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    #[serde(default)]
    pub eraser: EraserFile,
    #[serde(default)]
    pub chain: ChainFile,
    #[serde(default)]
    pub decohere: DecohereFile,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EraserFile {
    pub setup: Option<SetupKind>,
    pub events: Option<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub bins: Option<usize>,
    pub window_ns: Option<f64>,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainFile {
    pub epsilon: Option<f64>,
    pub collapse_point: Option<usize>,
    pub trajectories: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecohereFile {
    pub theta: Option<f64>,
    pub n: Option<usize>,
    pub target: Option<f64>,
    pub mode: Option<BathMode>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Settings shared by every command after merging.
#[derive(Debug, Clone)]
pub struct Common {
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub format: Format,
}

impl Common {
    pub fn require_seed(&self, what: &str) -> Result<u64> {
        match self.seed {
            Some(s) => Ok(s),
            None => bail!("{what} is stochastic: pass --seed, set COLLAPSE_LAB_SEED, or put \"seed\" in the config file"),
        }
    }
}

pub const DEFAULT_OUT: &str = "out";

pub fn merge_common(
    seed: Option<u64>,
    out: Option<PathBuf>,
    format: Option<Format>,
    file: &FileConfig,
) -> Common {
    Common {
        seed: seed.or(file.seed),
        out: out
            .or_else(|| file.out.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
        format: format.or(file.format).unwrap_or(Format::Csv),
    }
}

pub struct EraserSettings {
    pub setup: SetupKind,
    pub events: usize,
    pub alpha: f64,
    pub beta: f64,
    pub bins: usize,
    pub window_ns: f64,
    pub x_range: (f64, f64),
}

pub const DEFAULT_EVENTS: usize = 1_000_000;

impl EraserSettings {
    pub fn defaults() -> Self {
        let p = collapse_lab::eraser::EraserParams::default();
        Self {
            setup: SetupKind::Eraser,
            events: DEFAULT_EVENTS,
            alpha: p.alpha(),
            beta: p.beta(),
            bins: p.n_bins(),
            window_ns: DEFAULT_WINDOW_NS,
            x_range: p.x_range(),
        }
    }
}

pub struct ChainSettings {
    pub epsilon: f64,
    pub collapse_point: usize,
    pub trajectories: usize,
}

pub struct DecohereSettings {
    pub theta: f64,
    pub n: Option<usize>,
    pub target: f64,
    pub mode: BathMode,
}
