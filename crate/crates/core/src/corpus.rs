//! Word-list ingestion and cleaning.
//!
//! Raw token lists go through a fixed filtering sequence before any
//! analysis: normalization (lowercase, letters only, length >= 2),
//! optional Roman-numeral removal, within-class deduplication, and
//! removal of words common to both classes. Every stage is counted so a
//! run can be audited against its sources.

use std::collections::HashSet;
use std::fmt;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed::stream_rng;

/// Errors from corpus construction.
#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("no usable tokens in word list '{0}'")]
    EmptyList(String),
    #[error("class '{0}' is empty after filtering")]
    EmptyClass(String),
    #[error("rated list '{name}' has {have} entries, need {need}")]
    InsufficientEntries { name: String, have: usize, need: usize },
    #[error("line {line}: cannot parse rating '{value}'")]
    BadRating { line: usize, value: String },
}

/// A normalized word: lowercase ASCII letters only, at least two of them.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(String);

impl Word {
    /// Builds a `Word` from an already-normalized string. Returns `None`
    /// if the invariant does not hold.
    pub fn new(text: &str) -> Option<Word> {
        normalize_token(text)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        false // invariant: length >= 2
    }

    /// Letter bytes, all in `b'a'..=b'z'`.
    pub fn bytes(&self) -> &[u8] {
        self.0.as_bytes()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Lowercases and validates a raw token.
///
/// Returns the normalized word only when the lowercased token consists
/// solely of `a`-`z` and is at least two letters long; anything else
/// (digits, hyphens, apostrophes, diacritics, single letters) is
/// rejected with `None`.
pub fn normalize_token(raw: &str) -> Option<Word> {
    let lowered = raw.trim().to_lowercase();
    if lowered.len() < 2 {
        return None;
    }
    if !lowered.bytes().all(|b| b.is_ascii_lowercase()) {
        return None;
    }
    Some(Word(lowered))
}

/// True when the word matches the canonical Roman-numeral grammar
/// `m{0,3}(cm|cd|d?c{0,3})(xc|xl|l?x{0,3})(ix|iv|v?i{0,3})`.
///
/// Real words that happen to parse ("mix", "mi", "dim") count as
/// numerals under this rule.
pub fn is_roman_numeral(word: &Word) -> bool {
    fn repeat<'a>(mut s: &'a str, unit: char, max: usize) -> &'a str {
        for _ in 0..max {
            match s.strip_prefix(unit) {
                Some(rest) => s = rest,
                None => break,
            }
        }
        s
    }
    fn group<'a>(s: &'a str, nine: &str, four: &str, five: char, unit: char) -> &'a str {
        if let Some(rest) = s.strip_prefix(nine) {
            return rest;
        }
        if let Some(rest) = s.strip_prefix(four) {
            return rest;
        }
        let s = s.strip_prefix(five).unwrap_or(s);
        repeat(s, unit, 3)
    }

    let s = word.as_str();
    let s = repeat(s, 'm', 3);
    let s = group(s, "cm", "cd", 'd', 'c');
    let s = group(s, "xc", "xl", 'l', 'x');
    let s = group(s, "ix", "iv", 'v', 'i');
    s.is_empty()
}

/// An ordered list of words under a label.
///
/// Lists produced by [`clean_word_list`] or [`build_labeled_corpus`]
/// contain no duplicates; lists straight out of [`select_by_rating`] may
/// still carry duplicates (the same token can be rated more than once in
/// a source) and are deduplicated by the cleaning stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordList {
    pub name: String,
    pub words: Vec<Word>,
}

impl WordList {
    pub fn new(name: impl Into<String>, words: Vec<Word>) -> WordList {
        WordList { name: name.into(), words }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Word> {
        self.words.iter()
    }

    /// Longest word length, 0 for an empty list.
    pub fn max_len(&self) -> usize {
        self.words.iter().map(Word::len).max().unwrap_or(0)
    }
}

/// A token with its numeric rating, as read from a rated-list file.
#[derive(Debug, Clone)]
pub struct RatedWordList {
    pub name: String,
    pub entries: Vec<(String, f64)>,
}

/// Per-class token counts at each filtering stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StageCounts {
    /// Raw tokens read.
    pub total: usize,
    /// Tokens surviving normalization (and Roman-numeral removal when on),
    /// duplicates still included.
    pub cleaned: usize,
    /// After within-class deduplication.
    pub deduped: usize,
    /// After removing words common to both classes.
    pub disjoint: usize,
}

/// The audit trail for a two-class corpus build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub simple: StageCounts,
    pub complex: StageCounts,
}

impl FilterReport {
    /// CSV rendering: `stage,simple_count,complex_count`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("stage,simple_count,complex_count\n");
        for (stage, s, c) in [
            ("total", self.simple.total, self.complex.total),
            ("cleaned", self.simple.cleaned, self.complex.cleaned),
            ("deduped", self.simple.deduped, self.complex.deduped),
            ("disjoint", self.simple.disjoint, self.complex.disjoint),
        ] {
            out.push_str(&format!("{stage},{s},{c}\n"));
        }
        out
    }
}

/// Two disjoint word classes.
#[derive(Debug, Clone)]
pub struct LabeledCorpus {
    pub simple: WordList,
    pub complex: WordList,
}

impl LabeledCorpus {
    pub fn total_words(&self) -> usize {
        self.simple.len() + self.complex.len()
    }
}

/// Normalizes, optionally drops Roman numerals, and deduplicates a raw
/// token sequence, keeping the first occurrence of each surviving word.
///
/// The returned counts cover the stages up to deduplication; `disjoint`
/// is filled in later by [`build_labeled_corpus`].
pub fn clean_word_list<S: AsRef<str>>(
    name: &str,
    tokens: &[S],
    remove_roman: bool,
) -> Result<(WordList, StageCounts), CorpusError> {
    let total = tokens.len();
    let cleaned: Vec<Word> = tokens
        .iter()
        .filter_map(|t| normalize_token(t.as_ref()))
        .filter(|w| !(remove_roman && is_roman_numeral(w)))
        .collect();
    let cleaned_count = cleaned.len();

    let mut seen = HashSet::with_capacity(cleaned.len());
    let deduped: Vec<Word> = cleaned.into_iter().filter(|w| seen.insert(w.clone())).collect();
    let deduped_count = deduped.len();

    if deduped.is_empty() {
        return Err(CorpusError::EmptyList(name.to_string()));
    }
    Ok((
        WordList::new(name, deduped),
        StageCounts {
            total,
            cleaned: cleaned_count,
            deduped: deduped_count,
            disjoint: deduped_count,
        },
    ))
}

/// Removes the exact intersection of the two cleaned classes from both
/// sides; a word present in both has no usable class label.
pub fn build_labeled_corpus(
    simple: WordList,
    complex: WordList,
    simple_counts: StageCounts,
    complex_counts: StageCounts,
) -> Result<(LabeledCorpus, FilterReport), CorpusError> {
    let simple_set: HashSet<&Word> = simple.words.iter().collect();
    let common: HashSet<Word> =
        complex.words.iter().filter(|w| simple_set.contains(w)).cloned().collect();

    let keep = |list: WordList| -> WordList {
        let words = list.words.into_iter().filter(|w| !common.contains(w)).collect();
        WordList { name: list.name, words }
    };
    let simple = keep(simple);
    let complex = keep(complex);

    if simple.is_empty() {
        return Err(CorpusError::EmptyClass(simple.name));
    }
    if complex.is_empty() {
        return Err(CorpusError::EmptyClass(complex.name));
    }

    let report = FilterReport {
        simple: StageCounts { disjoint: simple.len(), ..simple_counts },
        complex: StageCounts { disjoint: complex.len(), ..complex_counts },
    };
    Ok((LabeledCorpus { simple, complex }, report))
}

/// Which end of the rating scale to select from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatingEnd {
    Lowest,
    Highest,
}

/// Takes the `n` entries at one end of a rated list.
///
/// Entries strictly inside the cut are always taken. When the rating at
/// the selection boundary is shared by more entries than there are slots
/// left, the boundary tie group is sampled uniformly without replacement
/// (seeded) to fill exactly `n`. Tokens are normalized after selection;
/// un-normalizable ones are dropped, so the result can be shorter than
/// `n` and can still contain duplicates.
pub fn select_by_rating(
    rated: &RatedWordList,
    n: usize,
    end: RatingEnd,
    seed: u64,
) -> Result<WordList, CorpusError> {
    if rated.entries.len() < n {
        return Err(CorpusError::InsufficientEntries {
            name: rated.name.clone(),
            have: rated.entries.len(),
            need: n,
        });
    }
    let mut order: Vec<usize> = (0..rated.entries.len()).collect();
    // Stable by original index inside equal ratings.
    match end {
        RatingEnd::Lowest => order.sort_by(|&a, &b| {
            rated.entries[a].1.partial_cmp(&rated.entries[b].1).unwrap().then(a.cmp(&b))
        }),
        RatingEnd::Highest => order.sort_by(|&a, &b| {
            rated.entries[b].1.partial_cmp(&rated.entries[a].1).unwrap().then(a.cmp(&b))
        }),
    }

    let boundary = rated.entries[order[n - 1]].1;
    let inside: Vec<usize> =
        order.iter().copied().take_while(|&i| rated.entries[i].1 != boundary).collect();
    let tie_group: Vec<usize> = order
        .iter()
        .copied()
        .skip(inside.len())
        .take_while(|&i| rated.entries[i].1 == boundary)
        .collect();

    let mut chosen = inside;
    let slots = n - chosen.len();
    if tie_group.len() <= slots {
        chosen.extend_from_slice(&tie_group[..slots]);
    } else {
        let mut rng = stream_rng(seed, 0x5E1E_C7);
        let mut pool = tie_group;
        pool.shuffle(&mut rng);
        pool.truncate(slots);
        pool.sort_unstable(); // restore source order within the sample
        chosen.extend_from_slice(&pool);
    }

    let words: Vec<Word> =
        chosen.iter().filter_map(|&i| normalize_token(&rated.entries[i].0)).collect();
    Ok(WordList::new(rated.name.clone(), words))
}

/// Parses word-list text: one token per line, `#` comment lines and
/// blank lines ignored.
pub fn parse_word_list(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

/// Parses rated-list text: `token<TAB>rating` per line, with an optional
/// header row detected by a non-numeric second field.
pub fn parse_rated_list(name: &str, text: &str) -> Result<RatedWordList, CorpusError> {
    let mut entries = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (token, rating) = match line.split_once('\t') {
            Some(pair) => pair,
            None => continue,
        };
        match rating.trim().parse::<f64>() {
            Ok(r) if r.is_finite() => entries.push((token.trim().to_string(), r)),
            Ok(_) => {
                return Err(CorpusError::BadRating { line: idx + 1, value: rating.to_string() })
            }
            Err(_) if idx == 0 => continue, // header row
            Err(_) => {
                return Err(CorpusError::BadRating { line: idx + 1, value: rating.to_string() })
            }
        }
    }
    Ok(RatedWordList { name: name.to_string(), entries })
}
