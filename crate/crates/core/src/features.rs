//! One-hot letter-position features.
//!
//! A word of length L sets exactly one of 26 indicator variables for each
//! of its first L positions; all variables for positions past L are zero.
//! Columns are laid out position-major (all 26 letters of position 1,
//! then position 2, ...) with letters in alphabetical order, so exports
//! and model files are byte-stable.
//!
//! Entries are stored as `f32` rather than packed bits because synthetic
//! oversampling introduces fractional values.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::corpus::{LabeledCorpus, Word, WordList};

pub const ALPHABET: usize = 26;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("word '{word}' has {len} letters, exceeding the layout maximum {lmax}")]
    WordTooLong { word: String, len: usize, lmax: usize },
    #[error("cannot parse variable name '{0}'")]
    BadVariableName(String),
    #[error("feature vector has {got} entries, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// One letter-position indicator variable, e.g. `w1` = "w in position 1".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VariableId {
    letter: u8,
    position: usize,
}

impl VariableId {
    /// `letter` must be in `a..=z`, `position` is 1-based.
    pub fn new(letter: char, position: usize) -> Option<VariableId> {
        if !letter.is_ascii_lowercase() || position == 0 {
            return None;
        }
        Some(VariableId { letter: letter as u8, position })
    }

    pub fn letter(&self) -> char {
        self.letter as char
    }

    /// 1-based letter position.
    pub fn position(&self) -> usize {
        self.position
    }

    /// Column index in a position-major layout.
    pub fn column(&self) -> usize {
        (self.position - 1) * ALPHABET + (self.letter - b'a') as usize
    }

    /// Inverse of [`VariableId::column`].
    pub fn from_column(column: usize) -> VariableId {
        VariableId {
            letter: b'a' + (column % ALPHABET) as u8,
            position: column / ALPHABET + 1,
        }
    }

    /// Position-major ordering key: position first, then letter.
    pub fn sort_key(&self) -> (usize, u8) {
        (self.position, self.letter)
    }
}

impl fmt::Display for VariableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.letter as char, self.position)
    }
}

impl FromStr for VariableId {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<VariableId, FeatureError> {
        let bad = || FeatureError::BadVariableName(s.to_string());
        let mut chars = s.chars();
        let letter = chars.next().ok_or_else(bad)?;
        let position: usize = chars.as_str().parse().map_err(|_| bad())?;
        VariableId::new(letter, position).ok_or_else(bad)
    }
}

/// The full position-major variable grid for words up to `lmax` letters.
pub fn variable_grid(lmax: usize) -> Vec<VariableId> {
    (0..lmax * ALPHABET).map(VariableId::from_column).collect()
}

/// Dense per-word feature rows with their column layout.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    pub variables: Vec<VariableId>,
    pub lmax: usize,
    pub words: Vec<Word>,
    data: Vec<f32>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.words.len()
    }

    pub fn n_cols(&self) -> usize {
        self.variables.len()
    }

    pub fn row(&self, i: usize) -> &[f32] {
        let c = self.n_cols();
        &self.data[i * c..(i + 1) * c]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f32]> {
        self.data.chunks_exact(self.n_cols())
    }

    /// Row-major backing storage.
    pub(crate) fn raw_data(&self) -> &[f32] {
        &self.data
    }

    /// Keeps only the given columns, in the given order.
    pub fn select_columns(&self, keep: &[VariableId]) -> Result<FeatureMatrix, FeatureError> {
        let cols: Vec<usize> = keep
            .iter()
            .map(|v| {
                self.variables
                    .iter()
                    .position(|u| u == v)
                    .ok_or_else(|| FeatureError::BadVariableName(v.to_string()))
            })
            .collect::<Result<_, _>>()?;
        let mut data = Vec::with_capacity(self.n_rows() * cols.len());
        for row in self.rows() {
            data.extend(cols.iter().map(|&c| row[c]));
        }
        Ok(FeatureMatrix {
            variables: keep.to_vec(),
            lmax: self.lmax,
            words: self.words.clone(),
            data,
        })
    }

    /// Debug export: header row of variable names, then one row per word.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("word");
        for v in &self.variables {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
        for (word, row) in self.words.iter().zip(self.rows()) {
            out.push_str(word.as_str());
            for x in row {
                out.push(',');
                out.push_str(&format!("{x}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Longest word length across both classes.
pub fn max_word_length(corpus: &LabeledCorpus) -> usize {
    corpus.simple.max_len().max(corpus.complex.max_len())
}

/// One-hot encodes a word into the full `26 * lmax` layout.
pub fn featurize_word(word: &Word, lmax: usize) -> Result<Vec<f32>, FeatureError> {
    if word.len() > lmax {
        return Err(FeatureError::WordTooLong {
            word: word.to_string(),
            len: word.len(),
            lmax,
        });
    }
    let mut values = vec![0.0f32; lmax * ALPHABET];
    for (i, &b) in word.bytes().iter().enumerate() {
        values[i * ALPHABET + (b - b'a') as usize] = 1.0;
    }
    Ok(values)
}

/// Recovers the word from a one-hot row (argmax per occupied position).
/// Returns `None` if the row is not a valid one-hot encoding.
pub fn decode_row(row: &[f32], lmax: usize) -> Option<Word> {
    let mut text = String::new();
    let mut ended = false;
    for p in 0..lmax {
        let slot = &row[p * ALPHABET..(p + 1) * ALPHABET];
        let ones: Vec<usize> = (0..ALPHABET).filter(|&i| slot[i] == 1.0).collect();
        if slot.iter().any(|&x| x != 0.0 && x != 1.0) {
            return None;
        }
        match ones.len() {
            0 => ended = true,
            1 if !ended => text.push((b'a' + ones[0] as u8) as char),
            _ => return None,
        }
    }
    Word::new(&text)
}

/// Featurizes the whole corpus: simple-class rows first (label 0), then
/// complex-class rows (label 1).
pub fn featurize_corpus(
    corpus: &LabeledCorpus,
    lmax: usize,
) -> Result<(FeatureMatrix, Vec<u8>), FeatureError> {
    let n = corpus.total_words();
    let mut data = Vec::with_capacity(n * lmax * ALPHABET);
    let mut words = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for (list, label) in [(&corpus.simple, 0u8), (&corpus.complex, 1u8)] {
        for word in list.iter() {
            data.extend_from_slice(&featurize_word(word, lmax)?);
            words.push(word.clone());
            labels.push(label);
        }
    }
    Ok((FeatureMatrix { variables: variable_grid(lmax), lmax, words, data }, labels))
}

/// Fraction of words in `list` with `v.letter` at `v.position`. Words
/// shorter than the position never match.
pub fn letter_positional_probability(list: &WordList, v: VariableId) -> f64 {
    if list.is_empty() {
        return 0.0;
    }
    count_at(list, v) as f64 / list.len() as f64
}

/// Number of words in `list` with `v.letter` at `v.position`.
pub fn count_at(list: &WordList, v: VariableId) -> usize {
    let target = v.letter() as u8;
    list.iter().filter(|w| w.bytes().get(v.position() - 1) == Some(&target)).count()
}

/// Removes every column that is zero in all rows. Returns the reduced
/// matrix and the surviving variables in their original order.
pub fn drop_null_variables(matrix: &FeatureMatrix) -> (FeatureMatrix, Vec<VariableId>) {
    let cols = matrix.n_cols();
    let mut nonzero = vec![false; cols];
    for row in matrix.rows() {
        for (flag, &x) in nonzero.iter_mut().zip(row) {
            *flag |= x != 0.0;
        }
    }
    let kept: Vec<VariableId> = matrix
        .variables
        .iter()
        .zip(&nonzero)
        .filter_map(|(v, &keep)| keep.then_some(*v))
        .collect();
    let reduced = matrix.select_columns(&kept).expect("kept columns exist");
    (reduced, kept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::clean_word_list;

    fn corpus(simple: &[&str], complex: &[&str]) -> LabeledCorpus {
        let (s, sc) = clean_word_list("s", simple, false).unwrap();
        let (c, cc) = clean_word_list("c", complex, false).unwrap();
        crate::corpus::build_labeled_corpus(s, c, sc, cc).unwrap().0
    }

    #[test]
    fn variable_layout_is_position_major() {
        let grid = variable_grid(2);
        assert_eq!(grid.len(), 52);
        assert_eq!(grid[0].to_string(), "a1");
        assert_eq!(grid[25].to_string(), "z1");
        assert_eq!(grid[26].to_string(), "a2");
        for (i, v) in grid.iter().enumerate() {
            assert_eq!(v.column(), i);
            assert_eq!(VariableId::from_column(i), *v);
        }
    }

    #[test]
    fn variable_name_round_trip() {
        let v: VariableId = "w4".parse().unwrap();
        assert_eq!(v.letter(), 'w');
        assert_eq!(v.position(), 4);
        assert_eq!(v.to_string(), "w4");
        assert!("4w".parse::<VariableId>().is_err());
        assert!("A1".parse::<VariableId>().is_err());
        assert!("a0".parse::<VariableId>().is_err());
        assert!("".parse::<VariableId>().is_err());
    }

    #[test]
    fn featurize_cat() {
        let w = Word::new("cat").unwrap();
        let row = featurize_word(&w, 4).unwrap();
        assert_eq!(row.len(), 104);
        assert_eq!(row.iter().filter(|&&x| x == 1.0).count(), 3);
        let ones: Vec<String> = (0..row.len())
            .filter(|&i| row[i] == 1.0)
            .map(|i| VariableId::from_column(i).to_string())
            .collect();
        assert_eq!(ones, vec!["c1", "a2", "t3"]);
    }

    #[test]
    fn featurize_repeated_letter() {
        let w = Word::new("aa").unwrap();
        let row = featurize_word(&w, 2).unwrap();
        assert_eq!(row[0], 1.0); // a1
        assert_eq!(row[26], 1.0); // a2
        assert_eq!(row.iter().sum::<f32>(), 2.0);
    }

    #[test]
    fn featurize_full_length_word() {
        let w = Word::new("industrialisations").unwrap();
        let row = featurize_word(&w, 18).unwrap();
        assert_eq!(row.iter().filter(|&&x| x == 1.0).count(), 18);
        assert_eq!(decode_row(&row, 18).unwrap(), w);
    }

    #[test]
    fn featurize_rejects_long_word() {
        let w = Word::new("elephant").unwrap();
        assert!(matches!(
            featurize_word(&w, 4),
            Err(FeatureError::WordTooLong { len: 8, lmax: 4, .. })
        ));
    }

    #[test]
    fn corpus_matrix_shape_and_labels() {
        let c = corpus(&["so"], &["ex"]);
        let (m, labels) = featurize_corpus(&c, 2).unwrap();
        assert_eq!((m.n_rows(), m.n_cols()), (2, 52));
        assert_eq!(labels, vec![0, 1]);
        assert_eq!(m.words[0].as_str(), "so");
    }

    #[test]
    fn max_length_across_classes() {
        let c = corpus(&["cat"], &["ubiquitous"]);
        assert_eq!(max_word_length(&c), 10);
    }

    #[test]
    fn lpp_counts_matches() {
        let (list, _) = clean_word_list("x", &["cat", "cup", "dog"], false).unwrap();
        let v = VariableId::new('c', 1).unwrap();
        assert!((letter_positional_probability(&list, v) - 2.0 / 3.0).abs() < 1e-15);
        let v9 = VariableId::new('z', 9).unwrap();
        assert_eq!(letter_positional_probability(&list, v9), 0.0);
    }

    #[test]
    fn lpp_position_sums_bounded() {
        let (list, _) =
            clean_word_list("x", &["cat", "cup", "dog", "at", "elephant"], false).unwrap();
        for p in 1..=8 {
            let sum: f64 = ('a'..='z')
                .map(|l| letter_positional_probability(&list, VariableId::new(l, p).unwrap()))
                .sum();
            let with_len = list.iter().filter(|w| w.len() >= p).count() as f64;
            assert!((sum - with_len / list.len() as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn null_columns_dropped() {
        let c = corpus(&["cat"], &["dog"]);
        let (m, _) = featurize_corpus(&c, 3).unwrap();
        let (reduced, kept) = drop_null_variables(&m);
        let names: Vec<String> = kept.iter().map(|v| v.to_string()).collect();
        assert_eq!(names, vec!["c1", "d1", "a2", "o2", "g3", "t3"]);
        assert_eq!(reduced.n_cols(), 6);
        // No surviving column is all-zero and none containing a 1 was lost.
        for col in 0..reduced.n_cols() {
            assert!((0..reduced.n_rows()).any(|r| reduced.row(r)[col] == 1.0));
        }
    }

    #[test]
    fn select_columns_projects_rows() {
        let c = corpus(&["cat"], &["dog"]);
        let (m, _) = featurize_corpus(&c, 3).unwrap();
        let keep = vec!["c1".parse().unwrap(), "g3".parse().unwrap()];
        let sub = m.select_columns(&keep).unwrap();
        assert_eq!(sub.row(0), &[1.0, 0.0]);
        assert_eq!(sub.row(1), &[0.0, 1.0]);
    }

    #[test]
    fn csv_export_has_nomenclature_header() {
        let c = corpus(&["so"], &["ex"]);
        let (m, _) = featurize_corpus(&c, 2).unwrap();
        let csv = m.to_csv();
        let header = csv.lines().next().unwrap();
        assert!(header.starts_with("word,a1,b1,"));
        assert!(header.ends_with("y2,z2"));
        assert_eq!(csv.lines().count(), 3);
    }
}
