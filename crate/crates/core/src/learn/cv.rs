//! Stratified k-fold out-of-fold scoring.
//!
//! Every word is scored exactly once, by the forest trained on the folds
//! that do not contain it. Only the training portion of each fold is
//! SMOTE-balanced; held-out rows are never oversampled.

use rand::seq::SliceRandom;

use crate::features::FeatureMatrix;
use crate::seed::{mix, stream_rng};

use super::forest::{fit_trees, ForestModel, TrainSet};
use super::{
    smote_oversample, ForestParams, LearnError, ScoredLexicon, DEFAULT_CUTPOINT,
    STREAM_FOLD_ASSIGN, STREAM_FOLD_FOREST_BASE, STREAM_FOLD_SMOTE_BASE,
};

/// Assigns each row to a fold, keeping per-fold class proportions within
/// one member of the global proportions.
pub fn stratified_folds(labels: &[u8], folds: usize, seed: u64) -> Result<Vec<usize>, LearnError> {
    if folds < 2 {
        return Err(LearnError::FoldsTooFew(folds));
    }
    let mut rng = stream_rng(seed, STREAM_FOLD_ASSIGN);
    let mut assignment = vec![0usize; labels.len()];
    for class in [0u8, 1u8] {
        let mut members: Vec<usize> = (0..labels.len())
            .filter(|&i| (labels[i] != 0) as u8 == class)
            .collect();
        if members.len() < folds {
            return Err(LearnError::ClassSmallerThanFolds {
                label: class,
                count: members.len(),
                folds,
            });
        }
        members.shuffle(&mut rng);
        for (j, &i) in members.iter().enumerate() {
            assignment[i] = j % folds;
        }
    }
    Ok(assignment)
}

/// Out-of-fold scores for every row of `matrix`.
///
/// For each fold: the training rows are SMOTE-balanced (`smote_k`
/// neighbors), a forest is trained with a fold-derived seed, and the
/// held-out rows are scored. Predictions use the default 0.5 cutpoint;
/// re-threshold with [`ScoredLexicon::set_cutpoint`] if needed.
pub fn cross_val_scores(
    matrix: &FeatureMatrix,
    labels: &[u8],
    params: &ForestParams,
    folds: usize,
    smote_k: usize,
) -> Result<ScoredLexicon, LearnError> {
    let n = matrix.n_rows();
    if n != labels.len() {
        return Err(LearnError::LengthMismatch(n, labels.len()));
    }
    let assignment = stratified_folds(labels, folds, params.seed)?;

    let mut scores = vec![f64::NAN; n];
    for fold in 0..folds {
        let test_idx: Vec<usize> = (0..n).filter(|&i| assignment[i] == fold).collect();
        let train_idx: Vec<usize> = (0..n).filter(|&i| assignment[i] != fold).collect();

        let model = train_balanced_submodel(
            matrix,
            labels,
            &train_idx,
            &ForestParams { seed: mix(params.seed, STREAM_FOLD_FOREST_BASE + fold as u64), ..*params },
            smote_k,
            mix(params.seed, STREAM_FOLD_SMOTE_BASE + fold as u64),
        )?;
        for &i in &test_idx {
            scores[i] = model.score_row(matrix.row(i));
        }
    }

    Ok(ScoredLexicon::new(
        matrix
            .words
            .iter()
            .zip(&scores)
            .zip(labels)
            .map(|((w, &s), &l)| (w.clone(), s, Some(l))),
        DEFAULT_CUTPOINT,
    ))
}

/// Trains one forest on the given rows after SMOTE-balancing them.
/// Returns a model carrying the matrix layout so it can score any row.
pub(crate) fn train_balanced_submodel(
    matrix: &FeatureMatrix,
    labels: &[u8],
    row_idx: &[usize],
    params: &ForestParams,
    smote_k: usize,
    smote_seed: u64,
) -> Result<ForestModel, LearnError> {
    let cols = matrix.n_cols();
    let n1 = row_idx.iter().filter(|&&i| labels[i] != 0).count();
    let n0 = row_idx.len() - n1;
    if n0 == 0 || n1 == 0 {
        return Err(LearnError::SingleClass);
    }

    let mut data: Vec<f32> = Vec::with_capacity(row_idx.len() * cols);
    let mut train_labels: Vec<u8> = Vec::with_capacity(row_idx.len());
    for &i in row_idx {
        data.extend_from_slice(matrix.row(i));
        train_labels.push(labels[i]);
    }

    if n0 != n1 {
        let minority_label = u8::from(n1 < n0);
        let majority = n0.max(n1);
        let minority_rows: Vec<&[f32]> = row_idx
            .iter()
            .filter(|&&i| labels[i] == minority_label)
            .map(|&i| matrix.row(i))
            .collect();
        for row in smote_oversample(&minority_rows, majority, smote_k, smote_seed)? {
            data.extend_from_slice(&row);
            train_labels.push(minority_label);
        }
    }

    let set = TrainSet { cols, data: &data, labels: &train_labels };
    let trees = fit_trees(&set, params)?;
    Ok(ForestModel {
        trees,
        variables: matrix.variables.clone(),
        lmax: matrix.lmax,
        params: *params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{clean_word_list, LabeledCorpus, WordList};
    use crate::features::featurize_corpus;

    fn fold_sizes(assignment: &[usize], labels: &[u8], folds: usize) -> Vec<(usize, usize)> {
        (0..folds)
            .map(|f| {
                let c0 = assignment
                    .iter()
                    .zip(labels)
                    .filter(|(&a, &l)| a == f && l == 0)
                    .count();
                let c1 = assignment
                    .iter()
                    .zip(labels)
                    .filter(|(&a, &l)| a == f && l == 1)
                    .count();
                (c0, c1)
            })
            .collect()
    }

    #[test]
    fn folds_partition_and_stratify() {
        let labels: Vec<u8> = (0..103).map(|i| (i % 3 == 0) as u8).collect();
        let folds = 10;
        let assignment = stratified_folds(&labels, folds, 5).unwrap();
        assert_eq!(assignment.len(), labels.len());
        let sizes = fold_sizes(&assignment, &labels, folds);
        let total: usize = sizes.iter().map(|(a, b)| a + b).sum();
        assert_eq!(total, labels.len());
        for class in 0..2 {
            let counts: Vec<usize> =
                sizes.iter().map(|s| if class == 0 { s.0 } else { s.1 }).collect();
            let min = counts.iter().min().unwrap();
            let max = counts.iter().max().unwrap();
            assert!(max - min <= 1, "class {class} fold sizes {counts:?}");
        }
    }

    #[test]
    fn folds_deterministic_per_seed() {
        let labels: Vec<u8> = (0..40).map(|i| (i % 2) as u8).collect();
        assert_eq!(
            stratified_folds(&labels, 5, 1).unwrap(),
            stratified_folds(&labels, 5, 1).unwrap()
        );
        assert_ne!(
            stratified_folds(&labels, 5, 1).unwrap(),
            stratified_folds(&labels, 5, 2).unwrap()
        );
    }

    #[test]
    fn fold_count_validation() {
        let labels = vec![0, 1, 0, 1];
        assert!(matches!(stratified_folds(&labels, 1, 0), Err(LearnError::FoldsTooFew(1))));
        assert!(matches!(
            stratified_folds(&labels, 3, 0),
            Err(LearnError::ClassSmallerThanFolds { count: 2, folds: 3, .. })
        ));
    }

    fn separable_fixture() -> (FeatureMatrix, Vec<u8>) {
        // a1 equals the label exactly; 40 simple + 26 complex rows force
        // SMOTE to fire in every training split.
        let simple: Vec<String> = (0..40)
            .map(|i| format!("b{}{}", (b'a' + (i % 8) as u8) as char, (b'a' + (i / 8) as u8) as char))
            .collect();
        let complex: Vec<String> = (0..26)
            .map(|i| format!("a{}{}", (b'a' + (i % 8) as u8) as char, (b'a' + (i / 8) as u8) as char))
            .collect();
        let s: Vec<&str> = simple.iter().map(String::as_str).collect();
        let c: Vec<&str> = complex.iter().map(String::as_str).collect();
        let (s, _) = clean_word_list("s", &s, false).unwrap();
        let (c, _) = clean_word_list("c", &c, false).unwrap();
        featurize_corpus(&LabeledCorpus { simple: s, complex: c }, 3).unwrap()
    }

    #[test]
    fn out_of_fold_scores_every_word_once() {
        let (matrix, labels) = separable_fixture();
        let params = ForestParams { n_trees: 30, ..Default::default() }.with_seed(17);
        let scored = cross_val_scores(&matrix, &labels, &params, 10, 5).unwrap();
        assert_eq!(scored.len(), matrix.n_rows());
        assert!(scored.entries.iter().all(|e| e.score.is_finite()));
        // Perfectly separable fixture: out-of-fold accuracy 100%.
        let metrics = scored.metrics().unwrap();
        assert_eq!(metrics.accuracy, 1.0);
    }

    #[test]
    fn cross_val_is_deterministic() {
        let (matrix, labels) = separable_fixture();
        let params = ForestParams { n_trees: 10, ..Default::default() }.with_seed(4);
        let a = cross_val_scores(&matrix, &labels, &params, 5, 5).unwrap();
        let b = cross_val_scores(&matrix, &labels, &params, 5, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn submodel_errors_on_single_class_rows() {
        let (matrix, labels) = separable_fixture();
        let idx: Vec<usize> =
            (0..matrix.n_rows()).filter(|&i| labels[i] == 0).collect();
        let params = ForestParams::default();
        assert!(matches!(
            train_balanced_submodel(&matrix, &labels, &idx, &params, 5, 0),
            Err(LearnError::SingleClass)
        ));
    }

    #[test]
    fn smote_balances_training_classes() {
        // Indirect check: scoring still works when one class is much
        // smaller than the other and folds are small.
        let (matrix, labels) = separable_fixture();
        let params = ForestParams { n_trees: 30, ..Default::default() }.with_seed(2);
        let scored = cross_val_scores(&matrix, &labels, &params, 2, 3).unwrap();
        let m = scored.metrics().unwrap();
        assert!(m.accuracy > 0.85, "accuracy {}", m.accuracy);
    }

    #[test]
    fn rethresholding_updates_predictions() {
        let (matrix, labels) = separable_fixture();
        let params = ForestParams { n_trees: 8, ..Default::default() }.with_seed(2);
        let mut scored = cross_val_scores(&matrix, &labels, &params, 2, 3).unwrap();
        scored.set_cutpoint(0.0);
        assert!(scored.entries.iter().all(|e| e.predicted == 1));
        scored.set_cutpoint(1.1);
        assert!(scored.entries.iter().all(|e| e.predicted == 0));
    }
}
