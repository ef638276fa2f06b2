//! From-scratch ensemble learning: SMOTE oversampling, random-forest
//! induction over the one-hot letter features, stratified out-of-fold
//! scoring, and classification metrics.
//!
//! Everything here is deterministic given `(data, seed)`. Per-tree,
//! per-fold and SMOTE randomness all come from independent streams
//! derived from the master seed, so parallel execution produces results
//! identical to sequential execution.

mod cv;
mod forest;
mod metrics;
mod smote;

pub use cv::{cross_val_scores, stratified_folds};
pub(crate) use cv::train_balanced_submodel;
pub use forest::{train_random_forest, ForestModel, TreeNode};
pub use metrics::{classify, cohens_kappa, confusion_metrics, Confusion, Metrics};
pub use smote::{smote_oversample, smote_oversample_detailed, Synthetic};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Word;

/// Default score cutpoint separating simple (below) from complex.
pub const DEFAULT_CUTPOINT: f64 = 0.5;

// Stream ids for seed derivation (see `crate::seed`).
pub(crate) const STREAM_FOLD_ASSIGN: u64 = 0xF01D;
pub(crate) const STREAM_TREE_BASE: u64 = 0x7EE0_0000;
pub(crate) const STREAM_FOLD_FOREST_BASE: u64 = 0x0F00_0000;
pub(crate) const STREAM_FOLD_SMOTE_BASE: u64 = 0x5304_0000;

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("training data contains a single class")]
    SingleClass,
    #[error("{0} rows is too few to train on")]
    TooFewRows(usize),
    #[error("minority class has {0} rows; SMOTE needs at least 2")]
    MinorityTooSmall(usize),
    #[error("expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("need at least 2 folds, got {0}")]
    FoldsTooFew(usize),
    #[error("class {label} has {count} rows, fewer than {folds} folds")]
    ClassSmallerThanFolds { label: u8, count: usize, folds: usize },
    #[error("word '{word}' has {len} letters, model maximum is {lmax}")]
    WordTooLong { word: String, len: usize, lmax: usize },
    #[error("prediction/truth length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    EmptyInput,
    #[error("agreement is degenerate: both raters constant on one class")]
    DegenerateAgreement,
    #[error("invalid model document: {0}")]
    InvalidModel(String),
    #[error("lexicon entries are missing class labels")]
    MissingLabels,
}

/// How many candidate variables each split examines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSubset {
    /// `floor(sqrt(d))` candidates, the usual forest default.
    Sqrt,
    /// Every variable at every split.
    All,
    /// A fixed candidate count (clamped to `1..=d`).
    Fixed(usize),
}

impl FeatureSubset {
    pub fn resolve(&self, d: usize) -> usize {
        match self {
            FeatureSubset::Sqrt => ((d as f64).sqrt().floor() as usize).clamp(1, d),
            FeatureSubset::All => d,
            FeatureSubset::Fixed(k) => (*k).clamp(1, d),
        }
    }
}

/// Forest hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub features_per_split: FeatureSubset,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> ForestParams {
        ForestParams {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 5,
            features_per_split: FeatureSubset::Sqrt,
            seed: 0,
        }
    }
}

impl ForestParams {
    pub fn with_seed(mut self, seed: u64) -> ForestParams {
        self.seed = seed;
        self
    }
}

/// One scored word.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredWord {
    pub word: Word,
    pub score: f64,
    pub label: Option<u8>,
    pub predicted: u8,
}

/// Words with model scores in `[0,1]` and cutpoint-derived predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredLexicon {
    pub entries: Vec<ScoredWord>,
    pub cutpoint: f64,
}

impl ScoredLexicon {
    /// Builds a lexicon, deriving every `predicted` field from the
    /// cutpoint.
    pub fn new(
        items: impl IntoIterator<Item = (Word, f64, Option<u8>)>,
        cutpoint: f64,
    ) -> ScoredLexicon {
        let entries = items
            .into_iter()
            .map(|(word, score, label)| ScoredWord {
                word,
                score,
                label,
                predicted: classify(score, cutpoint),
            })
            .collect();
        ScoredLexicon { entries, cutpoint }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Re-thresholds every prediction at a new cutpoint.
    pub fn set_cutpoint(&mut self, cutpoint: f64) {
        self.cutpoint = cutpoint;
        for e in &mut self.entries {
            e.predicted = classify(e.score, cutpoint);
        }
    }

    pub fn scores(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.score).collect()
    }

    /// Classification metrics against the stored labels. Errors if any
    /// entry lacks a label.
    pub fn metrics(&self) -> Result<Metrics, LearnError> {
        let truth: Vec<u8> = self
            .entries
            .iter()
            .map(|e| e.label.ok_or(LearnError::MissingLabels))
            .collect::<Result<_, _>>()?;
        let predicted: Vec<u8> = self.entries.iter().map(|e| e.predicted).collect();
        Metrics::from_predictions(&truth, &predicted)
    }
}
