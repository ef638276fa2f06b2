//! `lexatom` - letter-positional word complexity analysis from the
//! command line.
//!
//! Subcommands mirror the pipeline stages: `clean` and `select` prepare
//! word lists, `stats` emits the per-variable significance table,
//! `train` runs the cross-validated classifier recipe, `score` applies a
//! saved model to a dictionary, and `extremes`/`lengths`/`dist`/`levels`
//! produce the downstream reports.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use lexatom::corpus::{
    build_labeled_corpus, clean_word_list, parse_rated_list, parse_word_list, select_by_rating,
    LabeledCorpus, RatingEnd, StageCounts, WordList,
};
use lexatom::features::VariableId;
use lexatom::learn::{ForestModel, ForestParams, ScoredLexicon};
use lexatom::pipeline::{
    distribution_stats, evaluate_levels, extremes_by_length, extremes_union, lengths_to_csv,
    parse_scores_csv, run_experiment, score_words, scores_to_csv, train_full, ExperimentOptions,
};
use lexatom::stats::TestKind;

/// Environment variable that overrides every `--seed` flag.
const SEED_ENV: &str = "LEXATOM_SEED";

#[derive(Parser)]
#[command(name = "lexatom", version, about = "Letter-positional word complexity analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EndArg {
    Lowest,
    Highest,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize, filter and deduplicate a word list (stdin to stdout by default)
    Clean {
        /// Input word list; stdin when omitted
        input: Option<PathBuf>,
        /// Output path; stdout when omitted
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also remove Roman-numeral tokens
        #[arg(long)]
        roman: bool,
        /// Write per-stage counts as CSV
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Take the n lowest- or highest-rated tokens from a TSV rated list
    Select {
        /// TSV file: token<TAB>rating, optional header
        #[arg(long)]
        ratings: PathBuf,
        /// Number of entries to select
        #[arg(long)]
        n: usize,
        /// Which end of the rating scale to take
        #[arg(long, value_enum)]
        end: EndArg,
        /// Seed for boundary tie-group sampling
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path; stdout when omitted
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Per-variable significance table for a two-class corpus
    Stats {
        /// Simple-class word list file(s)
        #[arg(long, required = true)]
        simple: Vec<PathBuf>,
        /// Complex-class word list file(s)
        #[arg(long, required = true)]
        complex: Vec<PathBuf>,
        /// Significance threshold on the corrected p
        #[arg(long, default_value_t = 0.001)]
        alpha: f64,
        /// Highest letter position counted as significant
        #[arg(long, default_value_t = 6)]
        max_position: usize,
        /// Remove Roman numerals during cleaning
        #[arg(long)]
        roman: bool,
        /// Pooled-variance t-test instead of Welch
        #[arg(long)]
        pooled: bool,
        /// Write the significant variable names, one per line
        #[arg(long)]
        selected: Option<PathBuf>,
        /// Write the filtering report CSV
        #[arg(long)]
        report: Option<PathBuf>,
        /// Output CSV path
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Cross-validated classifier recipe: out-of-fold scores, metrics, final model
    Train {
        #[arg(long, required = true)]
        simple: Vec<PathBuf>,
        #[arg(long, required = true)]
        complex: Vec<PathBuf>,
        #[arg(long, default_value_t = 100)]
        trees: usize,
        /// Maximum tree depth (unlimited when omitted)
        #[arg(long)]
        max_depth: Option<usize>,
        #[arg(long, default_value_t = 5)]
        min_split: usize,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long, default_value_t = 5)]
        smote_k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Restrict the classifier to these variables (one name per line)
        #[arg(long)]
        vars: Option<PathBuf>,
        /// Remove Roman numerals during cleaning
        #[arg(long)]
        roman: bool,
        /// Score cutpoint for classification
        #[arg(long, default_value_t = 0.5)]
        cutpoint: f64,
        /// Final model (trained on the full corpus), as JSON
        #[arg(short, long)]
        output: PathBuf,
        /// Out-of-fold word scores CSV
        #[arg(long)]
        scores: PathBuf,
        /// Cross-validation metrics JSON
        #[arg(long)]
        metrics: PathBuf,
        /// Filtering report CSV
        #[arg(long)]
        report: Option<PathBuf>,
        /// Significance table CSV
        #[arg(long)]
        sig: Option<PathBuf>,
    },
    /// Score a word list with a saved model
    Score {
        #[arg(long)]
        model: PathBuf,
        /// Dictionary file, one token per line (cleaned before scoring)
        #[arg(long)]
        words: PathBuf,
        /// Remove Roman numerals during cleaning
        #[arg(long)]
        roman: bool,
        /// Where to list words longer than the model layout
        #[arg(long)]
        skipped: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Build a fresh corpus from extreme scores of earlier runs
    Extremes {
        /// Scored CSVs (output of train/score)
        #[arg(long, required = true, num_args = 1..)]
        scores: Vec<PathBuf>,
        #[arg(long, default_value_t = 0.3)]
        low: f64,
        #[arg(long, default_value_t = 0.7)]
        high: f64,
        /// Output directory for simple.txt, complex.txt, report.csv
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Lowest and highest scoring word per word length
    Lengths {
        #[arg(long)]
        scores: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Distribution statistics of the scores
    Dist {
        #[arg(long)]
        scores: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Mean score per graded level list
    Levels {
        #[arg(long)]
        scores: PathBuf,
        /// Level as NAME=wordlist.txt (repeatable)
        #[arg(long = "level", required = true)]
        levels: Vec<String>,
        #[arg(short, long)]
        output: PathBuf,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Clean { input, output, roman, report } => cmd_clean(input, output, roman, report),
        Command::Select { ratings, n, end, seed, output } => {
            cmd_select(ratings, n, end, effective_seed(seed)?, output)
        }
        Command::Stats {
            simple,
            complex,
            alpha,
            max_position,
            roman,
            pooled,
            selected,
            report,
            output,
        } => cmd_stats(simple, complex, alpha, max_position, roman, pooled, selected, report, output),
        Command::Train {
            simple,
            complex,
            trees,
            max_depth,
            min_split,
            folds,
            smote_k,
            seed,
            vars,
            roman,
            cutpoint,
            output,
            scores,
            metrics,
            report,
            sig,
        } => cmd_train(TrainArgs {
            simple,
            complex,
            trees,
            max_depth,
            min_split,
            folds,
            smote_k,
            seed: effective_seed(seed)?,
            vars,
            roman,
            cutpoint,
            output,
            scores,
            metrics,
            report,
            sig,
        }),
        Command::Score { model, words, roman, skipped, output } => {
            cmd_score(model, words, roman, skipped, output)
        }
        Command::Extremes { scores, low, high, output } => cmd_extremes(scores, low, high, output),
        Command::Lengths { scores, output } => cmd_lengths(scores, output),
        Command::Dist { scores, output } => cmd_dist(scores, output),
        Command::Levels { scores, levels, output } => cmd_levels(scores, levels, output),
    }
}

/// `LEXATOM_SEED` beats the flag when set.
fn effective_seed(flag: u64) -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse::<u64>()
            .with_context(|| format!("{SEED_ENV} must be an unsigned integer, got '{v}'")),
        Err(_) => Ok(flag),
    }
}

fn read_input(path: Option<&Path>) -> Result<String> {
    match path {
        Some(p) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display())),
        None => {
            let mut buf = String::new();
            std::io::stdin().read_to_string(&mut buf).context("reading stdin")?;
            Ok(buf)
        }
    }
}

fn write_output(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => write_file(p, contents),
        None => {
            std::io::stdout().write_all(contents.as_bytes()).context("writing stdout")
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

/// Concatenates the tokens of several word-list files.
fn read_tokens(paths: &[PathBuf]) -> Result<Vec<String>> {
    let mut tokens = Vec::new();
    for p in paths {
        let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        tokens.extend(parse_word_list(&text));
    }
    Ok(tokens)
}

fn read_variables(path: &Path) -> Result<Vec<VariableId>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_word_list(&text)
        .iter()
        .map(|line| {
            line.parse::<VariableId>()
                .with_context(|| format!("{}: bad variable name '{line}'", path.display()))
        })
        .collect()
}

fn build_corpus(
    simple: &[PathBuf],
    complex: &[PathBuf],
    roman: bool,
) -> Result<(LabeledCorpus, lexatom::corpus::FilterReport)> {
    let simple_tokens = read_tokens(simple)?;
    let complex_tokens = read_tokens(complex)?;
    let (s, sc) = clean_word_list("simple", &simple_tokens, roman)?;
    let (c, cc) = clean_word_list("complex", &complex_tokens, roman)?;
    Ok(build_labeled_corpus(s, c, sc, cc)?)
}

fn cmd_clean(
    input: Option<PathBuf>,
    output: Option<PathBuf>,
    roman: bool,
    report: Option<PathBuf>,
) -> Result<()> {
    let text = read_input(input.as_deref())?;
    let tokens = parse_word_list(&text);
    let (list, counts) = clean_word_list("words", &tokens, roman)?;
    let mut out = String::new();
    for w in list.iter() {
        out.push_str(w.as_str());
        out.push('\n');
    }
    write_output(output.as_deref(), &out)?;
    if let Some(path) = report {
        write_file(&path, &single_class_report(&counts))?;
    }
    Ok(())
}

fn single_class_report(counts: &StageCounts) -> String {
    format!(
        "stage,count\ntotal,{}\ncleaned,{}\ndeduped,{}\n",
        counts.total, counts.cleaned, counts.deduped
    )
}

fn cmd_select(
    ratings: PathBuf,
    n: usize,
    end: EndArg,
    seed: u64,
    output: Option<PathBuf>,
) -> Result<()> {
    let text = fs::read_to_string(&ratings)
        .with_context(|| format!("reading {}", ratings.display()))?;
    let name = ratings.file_stem().map(|s| s.to_string_lossy().into_owned());
    let rated = parse_rated_list(name.as_deref().unwrap_or("ratings"), &text)?;
    let end = match end {
        EndArg::Lowest => RatingEnd::Lowest,
        EndArg::Highest => RatingEnd::Highest,
    };
    let list = select_by_rating(&rated, n, end, seed)?;
    let mut out = String::new();
    for w in list.iter() {
        out.push_str(w.as_str());
        out.push('\n');
    }
    write_output(output.as_deref(), &out)
}

#[allow(clippy::too_many_arguments)]
fn cmd_stats(
    simple: Vec<PathBuf>,
    complex: Vec<PathBuf>,
    alpha: f64,
    max_position: usize,
    roman: bool,
    pooled: bool,
    selected: Option<PathBuf>,
    report: Option<PathBuf>,
    output: PathBuf,
) -> Result<()> {
    let (corpus, filter_report) = build_corpus(&simple, &complex, roman)?;
    let kind = if pooled { TestKind::Pooled } else { TestKind::Welch };
    let table = lexatom::stats::variable_significance_table(&corpus, kind)?;
    write_file(&output, &table.to_csv())?;
    let significant = lexatom::stats::select_significant(&table, alpha, max_position);
    eprintln!(
        "{} variables tested ({} simple / {} complex words); {} significant at bp<{} in positions 1..={}",
        table.m, table.n_simple, table.n_complex, significant.len(), alpha, max_position
    );
    if let Some(path) = selected {
        let mut out = String::new();
        for v in &significant {
            out.push_str(&v.to_string());
            out.push('\n');
        }
        write_file(&path, &out)?;
    }
    if let Some(path) = report {
        write_file(&path, &filter_report.to_csv())?;
    }
    Ok(())
}

struct TrainArgs {
    simple: Vec<PathBuf>,
    complex: Vec<PathBuf>,
    trees: usize,
    max_depth: Option<usize>,
    min_split: usize,
    folds: usize,
    smote_k: usize,
    seed: u64,
    vars: Option<PathBuf>,
    roman: bool,
    cutpoint: f64,
    output: PathBuf,
    scores: PathBuf,
    metrics: PathBuf,
    report: Option<PathBuf>,
    sig: Option<PathBuf>,
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let simple_tokens = read_tokens(&args.simple)?;
    let complex_tokens = read_tokens(&args.complex)?;
    let variable_subset = args.vars.as_deref().map(read_variables).transpose()?;
    let forest = ForestParams {
        n_trees: args.trees,
        max_depth: args.max_depth,
        min_samples_split: args.min_split,
        ..Default::default()
    }
    .with_seed(args.seed);
    let options = ExperimentOptions {
        remove_roman: args.roman,
        forest,
        folds: args.folds,
        smote_k: args.smote_k,
        variable_subset: variable_subset.clone(),
        cutpoint: args.cutpoint,
        ..Default::default()
    };

    let result = run_experiment(&simple_tokens, &complex_tokens, &options)?;
    write_file(&args.scores, &scores_to_csv(&result.scored))?;
    write_file(&args.metrics, &result.metrics.to_json())?;
    if let Some(path) = &args.report {
        write_file(path, &result.filter_report.to_csv())?;
    }
    if let Some(path) = &args.sig {
        write_file(path, &result.significance.to_csv())?;
    }

    // The saved model is trained on the full corpus with the same
    // parameters; the CSV metrics stay out-of-fold.
    let (s, sc) = clean_word_list("simple", &simple_tokens, args.roman)?;
    let (c, cc) = clean_word_list("complex", &complex_tokens, args.roman)?;
    let (corpus, _) = build_labeled_corpus(s, c, sc, cc)?;
    let (model, _) =
        train_full(&corpus, &forest, args.smote_k, args.cutpoint, variable_subset.as_deref())?;
    write_file(&args.output, &model.to_json())?;

    let m = &result.metrics;
    eprintln!(
        "out-of-fold: accuracy {:.3}, sensitivity {:.3}, specificity {:.3}, baseline {:.3}, kappa {:.4} (z = {:.1})",
        m.accuracy, m.sensitivity, m.specificity, m.baseline, m.kappa, m.z
    );
    Ok(())
}

fn cmd_score(
    model: PathBuf,
    words: PathBuf,
    roman: bool,
    skipped_out: Option<PathBuf>,
    output: PathBuf,
) -> Result<()> {
    let model_text =
        fs::read_to_string(&model).with_context(|| format!("reading {}", model.display()))?;
    let model = ForestModel::from_json(&model_text)?;
    let text =
        fs::read_to_string(&words).with_context(|| format!("reading {}", words.display()))?;
    let tokens = parse_word_list(&text);
    let (list, _) = clean_word_list("dictionary", &tokens, roman)?;
    let (scored, skipped) = score_words(&model, &list);
    write_file(&output, &scores_to_csv(&scored))?;
    if !skipped.is_empty() {
        eprintln!(
            "{} word(s) longer than the model layout ({} letters) were skipped",
            skipped.len(),
            model.lmax
        );
    }
    if let Some(path) = skipped_out {
        let mut out = String::new();
        for w in &skipped {
            out.push_str(w.as_str());
            out.push('\n');
        }
        write_file(&path, &out)?;
    }
    Ok(())
}

fn cmd_extremes(scores: Vec<PathBuf>, low: f64, high: f64, output: PathBuf) -> Result<()> {
    let mut lexicons: Vec<ScoredLexicon> = Vec::new();
    for p in &scores {
        let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        lexicons.push(parse_scores_csv(&text)?);
    }
    let refs: Vec<&ScoredLexicon> = lexicons.iter().collect();
    let (corpus, report) = extremes_union(&refs, low, high)?;
    let dump = |list: &WordList| {
        let mut out = String::new();
        for w in list.iter() {
            out.push_str(w.as_str());
            out.push('\n');
        }
        out
    };
    write_file(&output.join("simple.txt"), &dump(&corpus.simple))?;
    write_file(&output.join("complex.txt"), &dump(&corpus.complex))?;
    write_file(&output.join("report.csv"), &report.to_csv())?;
    eprintln!("{} simple / {} complex words", corpus.simple.len(), corpus.complex.len());
    Ok(())
}

fn cmd_lengths(scores: PathBuf, output: PathBuf) -> Result<()> {
    let text =
        fs::read_to_string(&scores).with_context(|| format!("reading {}", scores.display()))?;
    let lexicon = parse_scores_csv(&text)?;
    write_file(&output, &lengths_to_csv(&extremes_by_length(&lexicon)))
}

fn cmd_dist(scores: PathBuf, output: PathBuf) -> Result<()> {
    let text =
        fs::read_to_string(&scores).with_context(|| format!("reading {}", scores.display()))?;
    let lexicon = parse_scores_csv(&text)?;
    let stats = distribution_stats(&lexicon.scores())?;
    write_file(&output, &stats.to_json())
}

fn cmd_levels(scores: PathBuf, levels: Vec<String>, output: PathBuf) -> Result<()> {
    let text =
        fs::read_to_string(&scores).with_context(|| format!("reading {}", scores.display()))?;
    let lexicon = parse_scores_csv(&text)?;
    let mut level_lists = Vec::new();
    for spec in &levels {
        let Some((name, path)) = spec.split_once('=') else {
            bail!("--level must be NAME=path, got '{spec}'");
        };
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        level_lists.push((name.to_string(), parse_word_list(&text)));
    }
    let report = evaluate_levels(&lexicon, &level_lists)?;
    for name in &report.empty_levels {
        eprintln!("level '{name}' matched no scored words");
    }
    write_file(&output, &report.to_csv())
}
