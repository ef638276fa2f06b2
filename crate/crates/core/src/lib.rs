//! Letter-positional word complexity analysis.
//!
//! Words carry a structural signal: which letters sit in which
//! positions. This crate measures that signal end to end:
//!
//! - [`corpus`] ingests raw word lists and builds disjoint simple/complex
//!   classes with a full filtering audit trail;
//! - [`features`] one-hot encodes each word into 26-per-position binary
//!   variables and computes letter positional probabilities;
//! - [`stats`] tests every variable for a class difference
//!   (Bonferroni-corrected t-tests) and intersects significant sets
//!   across datasets;
//! - [`learn`] trains SMOTE-balanced random forests from scratch and
//!   scores words out-of-fold, with accuracy/sensitivity/specificity and
//!   Cohen's kappa;
//! - [`pipeline`] wires the recipes together: experiment runs,
//!   extreme-score corpus bootstrapping, dictionary scoring, per-length
//!   extremes, distribution statistics and leveled-lexicon reports.
//!
//! Every randomized stage is seeded; identical inputs and seeds give
//! byte-identical outputs regardless of thread scheduling.

pub mod corpus;
pub mod features;
pub mod learn;
pub mod pipeline;
mod seed;
pub mod special;
pub mod stats;

pub use corpus::{LabeledCorpus, Word, WordList};
pub use features::{FeatureMatrix, VariableId};
pub use learn::{ForestModel, ForestParams, Metrics, ScoredLexicon};
pub use pipeline::{ExperimentOptions, ExperimentResult};
