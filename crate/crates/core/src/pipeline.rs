//! End-to-end recipes: clean, featurize, test, cross-validate, and
//! score; plus the downstream reports (extreme-score corpus
//! construction, per-length extremes, score-distribution statistics,
//! leveled-lexicon evaluation).

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{
    build_labeled_corpus, clean_word_list, CorpusError, FilterReport, LabeledCorpus, Word,
    WordList,
};
use crate::features::{
    drop_null_variables, featurize_corpus, max_word_length, FeatureError, VariableId,
};
use crate::learn::{
    cross_val_scores, ForestModel, ForestParams, LearnError, Metrics, ScoredLexicon, ScoredWord,
    DEFAULT_CUTPOINT,
};
use crate::seed::mix;
use crate::stats::{
    select_significant, variable_significance_table, SignificanceTable, StatsError, TestKind,
};

const STREAM_FULL_SMOTE: u64 = 0x5305_0000;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("corpus stage: {0}")]
    Corpus(#[from] CorpusError),
    #[error("feature stage: {0}")]
    Features(#[from] FeatureError),
    #[error("significance stage: {0}")]
    Stats(#[from] StatsError),
    #[error("learning stage: {0}")]
    Learn(#[from] LearnError),
    #[error("score cuts must satisfy low < high, got {low} and {high}")]
    BadCuts { low: f64, high: f64 },
    #[error("no scored words supplied")]
    EmptyLexicon,
    #[error("dictionary is empty after cleaning")]
    EmptyDictionary,
    #[error("need at least {need} values, got {got}")]
    TooFewValues { need: usize, got: usize },
    #[error("zero variance: higher moments are undefined")]
    ZeroVariance,
    #[error("scores csv line {line}: {message}")]
    ScoresCsv { line: usize, message: String },
}

/// Knobs for a full experiment run.
#[derive(Debug, Clone)]
pub struct ExperimentOptions {
    /// Drop Roman-numeral tokens during cleaning.
    pub remove_roman: bool,
    /// Significance threshold on the Bonferroni-corrected p.
    pub alpha: f64,
    /// Only positions `1..=max_position` count as significant.
    pub max_position: usize,
    pub forest: ForestParams,
    pub folds: usize,
    pub smote_k: usize,
    /// Restrict the classifier to these variables (the significance
    /// table still covers the full grid).
    pub variable_subset: Option<Vec<VariableId>>,
    pub cutpoint: f64,
    pub test_kind: TestKind,
}

impl Default for ExperimentOptions {
    fn default() -> ExperimentOptions {
        ExperimentOptions {
            remove_roman: false,
            alpha: 0.001,
            max_position: 6,
            forest: ForestParams::default(),
            folds: 10,
            smote_k: 5,
            variable_subset: None,
            cutpoint: DEFAULT_CUTPOINT,
            test_kind: TestKind::Welch,
        }
    }
}

/// Everything a recipe produces.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub filter_report: FilterReport,
    pub significance: SignificanceTable,
    pub scored: ScoredLexicon,
    pub metrics: Metrics,
    /// The variable subset in use, or the significant set at
    /// (`alpha`, `max_position`) when no subset was forced.
    pub selected_variables: Vec<VariableId>,
    pub lmax: usize,
    /// Classifier input width after null removal / subsetting.
    pub n_features: usize,
}

/// Runs the standard recipe: clean both classes, build the disjoint
/// corpus, featurize, drop null variables (or project onto an explicit
/// subset), build the significance table, and score every word
/// out-of-fold.
pub fn run_experiment(
    simple_tokens: &[String],
    complex_tokens: &[String],
    options: &ExperimentOptions,
) -> Result<ExperimentResult, PipelineError> {
    let (simple, simple_counts) = clean_word_list("simple", simple_tokens, options.remove_roman)?;
    let (complex, complex_counts) =
        clean_word_list("complex", complex_tokens, options.remove_roman)?;
    let (corpus, filter_report) =
        build_labeled_corpus(simple, complex, simple_counts, complex_counts)?;

    let lmax = max_word_length(&corpus);
    let (full_matrix, labels) = featurize_corpus(&corpus, lmax)?;
    // An explicit subset projects from the full grid: a variable that
    // happens to be null in *this* dataset is still a legal (all-zero)
    // input when the subset came from another dataset.
    let matrix = match &options.variable_subset {
        Some(vars) => full_matrix.select_columns(vars)?,
        None => drop_null_variables(&full_matrix).0,
    };
    drop(full_matrix);

    let significance = variable_significance_table(&corpus, options.test_kind)?;
    let selected_variables = match &options.variable_subset {
        Some(vars) => vars.clone(),
        None => select_significant(&significance, options.alpha, options.max_position),
    };

    let mut scored =
        cross_val_scores(&matrix, &labels, &options.forest, options.folds, options.smote_k)?;
    if scored.cutpoint != options.cutpoint {
        scored.set_cutpoint(options.cutpoint);
    }
    let metrics = scored.metrics()?;

    Ok(ExperimentResult {
        filter_report,
        significance,
        scored,
        metrics,
        selected_variables,
        lmax,
        n_features: matrix.n_cols(),
    })
}

/// Builds a fresh two-class corpus from the extreme scores of earlier
/// runs: below `low_cut` (strictly) in any lexicon goes to the simple
/// class, above `high_cut` to the complex class, then the usual
/// dedup/disjoint filtering applies.
pub fn extremes_union(
    lexicons: &[&ScoredLexicon],
    low_cut: f64,
    high_cut: f64,
) -> Result<(LabeledCorpus, FilterReport), PipelineError> {
    if low_cut >= high_cut {
        return Err(PipelineError::BadCuts { low: low_cut, high: high_cut });
    }
    let mut simple: Vec<&str> = Vec::new();
    let mut complex: Vec<&str> = Vec::new();
    for lexicon in lexicons {
        for e in &lexicon.entries {
            if e.score < low_cut {
                simple.push(e.word.as_str());
            } else if e.score > high_cut {
                complex.push(e.word.as_str());
            }
        }
    }
    let (simple, simple_counts) = clean_word_list("simple", &simple, false)?;
    let (complex, complex_counts) = clean_word_list("complex", &complex, false)?;
    Ok(build_labeled_corpus(simple, complex, simple_counts, complex_counts)?)
}

/// Trains a forest on the whole corpus (SMOTE-balanced) and reports the
/// training-set self-classification alongside the model. With no
/// explicit subset the input is the null-dropped variable set.
pub fn train_full(
    corpus: &LabeledCorpus,
    params: &ForestParams,
    smote_k: usize,
    cutpoint: f64,
    variable_subset: Option<&[VariableId]>,
) -> Result<(ForestModel, ScoredLexicon), PipelineError> {
    let lmax = max_word_length(corpus);
    let (matrix, labels) = featurize_corpus(corpus, lmax)?;
    let matrix = match variable_subset {
        Some(vars) => matrix.select_columns(vars)?,
        None => drop_null_variables(&matrix).0,
    };
    let rows: Vec<usize> = (0..matrix.n_rows()).collect();
    let model = crate::learn::train_balanced_submodel(
        &matrix,
        &labels,
        &rows,
        params,
        smote_k,
        mix(params.seed, STREAM_FULL_SMOTE),
    )?;
    let scored = ScoredLexicon::new(
        matrix
            .words
            .iter()
            .zip(matrix.rows())
            .zip(&labels)
            .map(|((w, row), &l)| (w.clone(), model.score_row(row), Some(l))),
        cutpoint,
    );
    Ok((model, scored))
}

/// Scores every word the model can represent; words longer than the
/// model's layout are returned separately rather than truncated.
pub fn score_words(model: &ForestModel, words: &WordList) -> (ScoredLexicon, Vec<Word>) {
    let mut skipped = Vec::new();
    let mut items = Vec::with_capacity(words.len());
    for word in words.iter() {
        match model.predict_word(word) {
            Ok(score) => items.push((word.clone(), score, None)),
            Err(LearnError::WordTooLong { .. }) => skipped.push(word.clone()),
            Err(_) => unreachable!("predict_word only fails on length"),
        }
    }
    (ScoredLexicon::new(items, DEFAULT_CUTPOINT), skipped)
}

/// The application run: final model, its training self-classification,
/// and the scored dictionary.
#[derive(Debug, Clone)]
pub struct ApplicationRun {
    pub model: ForestModel,
    pub training: ScoredLexicon,
    pub training_metrics: Metrics,
    pub scored: ScoredLexicon,
    pub skipped: Vec<Word>,
}

/// Trains on the full corpus and scores a cleaned dictionary with it.
pub fn train_final_and_score(
    corpus: &LabeledCorpus,
    dictionary: &WordList,
    params: &ForestParams,
    smote_k: usize,
) -> Result<ApplicationRun, PipelineError> {
    if dictionary.is_empty() {
        return Err(PipelineError::EmptyDictionary);
    }
    let (model, training) = train_full(corpus, params, smote_k, DEFAULT_CUTPOINT, None)?;
    let training_metrics = training.metrics()?;
    let (scored, skipped) = score_words(&model, dictionary);
    Ok(ApplicationRun { model, training, training_metrics, scored, skipped })
}

/// One end of a per-length extreme.
#[derive(Debug, Clone)]
pub struct ExtremeEntry {
    pub word: Word,
    pub score: f64,
    pub label: Option<u8>,
    pub syllables: usize,
}

/// Lowest- and highest-scoring words of one length.
#[derive(Debug, Clone)]
pub struct LengthExtreme {
    pub length: usize,
    pub low: ExtremeEntry,
    pub high: ExtremeEntry,
}

/// Per-length extremes, ties broken alphabetically. Lengths appear in
/// increasing order, each at most once.
pub fn extremes_by_length(scored: &ScoredLexicon) -> Vec<LengthExtreme> {
    let mut by_length: HashMap<usize, (&ScoredWord, &ScoredWord)> = HashMap::new();
    for e in &scored.entries {
        by_length
            .entry(e.word.len())
            .and_modify(|(low, high)| {
                if (e.score, &e.word) < (low.score, &low.word) {
                    *low = e;
                }
                if e.score > high.score || (e.score == high.score && e.word < high.word) {
                    *high = e;
                }
            })
            .or_insert((e, e));
    }
    let entry = |w: &ScoredWord| ExtremeEntry {
        word: w.word.clone(),
        score: w.score,
        label: w.label,
        syllables: estimate_syllables(&w.word),
    };
    let mut lengths: Vec<usize> = by_length.keys().copied().collect();
    lengths.sort_unstable();
    lengths
        .into_iter()
        .map(|length| {
            let (low, high) = by_length[&length];
            LengthExtreme { length, low: entry(low), high: entry(high) }
        })
        .collect()
}

/// CSV for the per-length extremes: two rows per length.
pub fn lengths_to_csv(extremes: &[LengthExtreme]) -> String {
    let mut out = String::from("length,extreme,word,label,score,syllables\n");
    for ex in extremes {
        for (tag, e) in [("low", &ex.low), ("high", &ex.high)] {
            let label = e.label.map(|l| l.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                ex.length, tag, e.word, label, e.score, e.syllables
            ));
        }
    }
    out
}

/// Descriptive statistics of a score list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistStats {
    pub mean: f64,
    pub stdev: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    /// Adjusted Fisher-Pearson sample skewness.
    pub skew: f64,
    /// Bias-corrected sample excess kurtosis.
    pub kurtosis: f64,
}

impl DistStats {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stats serialization cannot fail")
    }
}

/// Computes the seven statistics. Requires at least 4 values and a
/// nonzero variance (the higher moments are undefined otherwise).
pub fn distribution_stats(values: &[f64]) -> Result<DistStats, PipelineError> {
    let n = values.len();
    if n < 4 {
        return Err(PipelineError::TooFewValues { need: 4, got: n });
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let variance = ss / (nf - 1.0);
    if variance == 0.0 {
        return Err(PipelineError::ZeroVariance);
    }
    let stdev = variance.sqrt();

    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };

    let z3: f64 = values.iter().map(|v| ((v - mean) / stdev).powi(3)).sum();
    let z4: f64 = values.iter().map(|v| ((v - mean) / stdev).powi(4)).sum();
    let skew = nf / ((nf - 1.0) * (nf - 2.0)) * z3;
    let kurtosis = nf * (nf + 1.0) / ((nf - 1.0) * (nf - 2.0) * (nf - 3.0)) * z4
        - 3.0 * (nf - 1.0) * (nf - 1.0) / ((nf - 2.0) * (nf - 3.0));

    Ok(DistStats { mean, stdev, median, min: sorted[0], max: sorted[n - 1], skew, kurtosis })
}

/// One graded level's score summary.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelRow {
    pub name: String,
    pub word_count: usize,
    pub mean: f64,
    /// Sample standard deviation; 0 when only one word was scored.
    pub stdev: f64,
    /// Words scoring exactly 0 / exactly 1.
    pub zeros: usize,
    pub ones: usize,
    /// Level words absent from the scored lexicon.
    pub missing: usize,
}

/// Level summaries plus the levels that matched nothing.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LevelReport {
    pub rows: Vec<LevelRow>,
    pub empty_levels: Vec<String>,
}

impl LevelReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,word_count,mean,stdev,zeros,ones,missing\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.name, r.word_count, r.mean, r.stdev, r.zeros, r.ones, r.missing
            ));
        }
        out
    }
}

/// Scores graded word lists against a scored lexicon.
///
/// Tokens are normalized, deduplicated within each level, and words
/// appearing in more than one level are dropped entirely (their level
/// is ambiguous). Words missing from the lexicon are counted, not
/// scored.
pub fn evaluate_levels(
    scored: &ScoredLexicon,
    levels: &[(String, Vec<String>)],
) -> Result<LevelReport, PipelineError> {
    if scored.is_empty() {
        return Err(PipelineError::EmptyLexicon);
    }
    let score_of: HashMap<&Word, f64> =
        scored.entries.iter().map(|e| (&e.word, e.score)).collect();

    let normalized: Vec<(String, Vec<Word>)> = levels
        .iter()
        .map(|(name, tokens)| {
            let mut seen = std::collections::HashSet::new();
            let words: Vec<Word> = tokens
                .iter()
                .filter_map(|t| crate::corpus::normalize_token(t))
                .filter(|w| seen.insert(w.clone()))
                .collect();
            (name.clone(), words)
        })
        .collect();

    let mut occurrences: HashMap<&Word, usize> = HashMap::new();
    for (_, words) in &normalized {
        for w in words {
            *occurrences.entry(w).or_insert(0) += 1;
        }
    }

    let mut report = LevelReport::default();
    for (name, words) in &normalized {
        let mut scores = Vec::new();
        let mut missing = 0usize;
        for w in words {
            if occurrences[w] > 1 {
                continue;
            }
            match score_of.get(w) {
                Some(&s) => scores.push(s),
                None => missing += 1,
            }
        }
        if scores.is_empty() {
            report.empty_levels.push(name.clone());
            continue;
        }
        let n = scores.len() as f64;
        let mean = scores.iter().sum::<f64>() / n;
        let stdev = if scores.len() > 1 {
            (scores.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        report.rows.push(LevelRow {
            name: name.clone(),
            word_count: scores.len(),
            mean,
            stdev,
            zeros: scores.iter().filter(|&&s| s == 0.0).count(),
            ones: scores.iter().filter(|&&s| s == 1.0).count(),
            missing,
        });
    }
    Ok(report)
}

/// Heuristic syllable count: maximal vowel groups (`y` counts as a vowel
/// except word-initially), minus a terminal silent `e` after a
/// consonant, except in consonant+`le` endings where the `e` carries the
/// syllable. Display-only; never a model input.
pub fn estimate_syllables(word: &Word) -> usize {
    let b = word.bytes();
    let is_vowel =
        |i: usize| matches!(b[i], b'a' | b'e' | b'i' | b'o' | b'u') || (b[i] == b'y' && i > 0);
    let mut groups = 0usize;
    let mut in_group = false;
    for i in 0..b.len() {
        if is_vowel(i) {
            if !in_group {
                groups += 1;
            }
            in_group = true;
        } else {
            in_group = false;
        }
    }
    let n = b.len();
    if groups > 1 && b[n - 1] == b'e' && !is_vowel(n - 2) {
        let consonant_le = b[n - 2] == b'l' && n >= 3 && !is_vowel(n - 3);
        if !consonant_le {
            groups -= 1;
        }
    }
    groups.max(1)
}

/// CSV rendering of a scored lexicon: `word,score,label,predicted`, with
/// scores at full round-trip precision and an empty label field when the
/// word has no class.
pub fn scores_to_csv(scored: &ScoredLexicon) -> String {
    let mut out = String::from("word,score,label,predicted\n");
    for e in &scored.entries {
        let label = e.label.map(|l| l.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{},{}\n", e.word, e.score, label, e.predicted));
    }
    out
}

/// Parses [`scores_to_csv`] output. Predictions are re-derived at the
/// default cutpoint.
pub fn parse_scores_csv(text: &str) -> Result<ScoredLexicon, PipelineError> {
    let mut items = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if idx == 0 || line.is_empty() {
            continue; // header
        }
        let err = |message: &str| PipelineError::ScoresCsv {
            line: idx + 1,
            message: message.to_string(),
        };
        let mut fields = line.split(',');
        let word = fields.next().ok_or_else(|| err("missing word"))?;
        let word = Word::new(word).ok_or_else(|| err("invalid word"))?;
        let score: f64 = fields
            .next()
            .ok_or_else(|| err("missing score"))?
            .parse()
            .map_err(|_| err("bad score"))?;
        let label = match fields.next() {
            None | Some("") => None,
            Some(l) => Some(l.parse::<u8>().map_err(|_| err("bad label"))?),
        };
        items.push((word, score, label));
    }
    if items.is_empty() {
        return Err(PipelineError::EmptyLexicon);
    }
    Ok(ScoredLexicon::new(items, DEFAULT_CUTPOINT))
}
