use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::clustering::DEFAULT_K_VALUES;
use crate::community::{DEFAULT_LOUVAIN_RESTARTS, DEFAULT_MIN_COMMUNITY_SIZE};
use crate::embedding::DivisorMode;
use crate::synth::SynthSpec;
use crate::temporal::DEFAULT_GAP_THRESHOLD_SLOTS;

use super::PipelineError;

/// Every knob of the pipeline. Loaded from a flat TOML file; unset keys take
/// the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// SNAP-style tweet file, optionally gzipped.
    pub tweets: Option<PathBuf>,
    /// `user<TAB>follower` edge file, optionally gzipped.
    pub edges: Option<PathBuf>,
    /// Word vectors, one `word v1 .. vd` per line.
    pub lexicon: Option<PathBuf>,
    pub output_dir: PathBuf,
    /// Tweets before this instant are dropped. Also the slot epoch when set.
    pub window_start: Option<DateTime<Utc>>,
    /// Tweets at or after this instant are dropped.
    pub window_end: Option<DateTime<Utc>>,
    pub slot_width_hours: u32,
    pub min_count: u64,
    pub max_count: u64,
    pub k_values: Vec<usize>,
    pub gap_threshold_slots: u32,
    pub kmeans_seed: u64,
    pub kmeans_max_iterations: usize,
    pub kmeans_restarts: usize,
    pub community_seed: u64,
    pub community_restarts: usize,
    pub min_community_size: usize,
    pub lexicon_dimension: usize,
    pub divisor: DivisorMode,
    pub morph_across_gaps: bool,
    pub emit_svg: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            tweets: None,
            edges: None,
            lexicon: None,
            output_dir: PathBuf::from("output"),
            window_start: None,
            window_end: None,
            slot_width_hours: 24,
            min_count: 40,
            max_count: 1000,
            k_values: DEFAULT_K_VALUES.to_vec(),
            gap_threshold_slots: DEFAULT_GAP_THRESHOLD_SLOTS,
            kmeans_seed: 0,
            kmeans_max_iterations: 100,
            kmeans_restarts: 1,
            community_seed: 0,
            community_restarts: DEFAULT_LOUVAIN_RESTARTS,
            min_community_size: DEFAULT_MIN_COMMUNITY_SIZE,
            lexicon_dimension: 200,
            divisor: DivisorMode::Covered,
            morph_across_gaps: false,
            emit_svg: false,
        }
    }
}

/// Which raw inputs a run needs.
#[derive(Debug, Clone, Copy, Default)]
pub struct Needs {
    pub tweets: bool,
    pub edges: bool,
    pub lexicon: bool,
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Config(vec![e.message().to_string()]))
    }

    /// Parses a config file. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn from_toml_file(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(PipelineError::io(path))?;
        let mut config = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        config.rebase(base);
        Ok(config)
    }

    fn rebase(&mut self, base: &Path) {
        for p in [&mut self.tweets, &mut self.edges, &mut self.lexicon].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if self.output_dir.is_relative() {
            self.output_dir = base.join(&self.output_dir);
        }
    }

    /// Config for a corpus written by [`SynthCorpus::write_to`], with paths
    /// relative to that directory.
    ///
    /// [`SynthCorpus::write_to`]: crate::synth::SynthCorpus::write_to
    pub fn for_synthetic(spec: &SynthSpec) -> Self {
        PipelineConfig {
            tweets: Some(PathBuf::from("tweets.txt")),
            edges: Some(PathBuf::from("edges.txt")),
            lexicon: Some(PathBuf::from("lexicon.txt")),
            output_dir: PathBuf::from("output"),
            k_values: vec![spec.topics.len().max(1)],
            lexicon_dimension: spec.lexicon_dimension,
            ..PipelineConfig::default()
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// All violations at once.
    pub fn validate(&self, needs: Needs) -> Result<(), PipelineError> {
        let mut errs = Vec::new();
        if self.min_count > self.max_count {
            errs.push(format!("min_count {} exceeds max_count {}", self.min_count, self.max_count));
        }
        if self.slot_width_hours == 0 {
            errs.push("slot_width_hours must be positive".to_string());
        }
        if self.k_values.is_empty() {
            errs.push("k_values must not be empty".to_string());
        }
        if self.k_values.contains(&0) {
            errs.push("k_values must be positive".to_string());
        }
        if self.kmeans_max_iterations == 0 {
            errs.push("kmeans_max_iterations must be positive".to_string());
        }
        if self.kmeans_restarts == 0 {
            errs.push("kmeans_restarts must be positive".to_string());
        }
        if self.community_restarts == 0 {
            errs.push("community_restarts must be positive".to_string());
        }
        if self.lexicon_dimension == 0 {
            errs.push("lexicon_dimension must be positive".to_string());
        }
        if let (Some(a), Some(b)) = (self.window_start, self.window_end) {
            if a >= b {
                errs.push(format!("window_start {a} is not before window_end {b}"));
            }
        }
        for (needed, path, name) in [
            (needs.tweets, &self.tweets, "tweets"),
            (needs.edges, &self.edges, "edges"),
            (needs.lexicon, &self.lexicon, "lexicon"),
        ] {
            if needed && path.is_none() {
                errs.push(format!("{name} path is required"));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(PipelineError::Config(errs))
        }
    }
}
