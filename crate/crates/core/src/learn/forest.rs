//! Random-forest induction with Gini splits.
//!
//! Each tree is grown on a bootstrap sample of the same size as the
//! input, drawn with replacement from a per-tree RNG stream. Splits pick
//! the impurity-minimizing threshold among a random subset of candidate
//! variables; binary columns split at 0.5, fractional columns (from
//! SMOTE) at midpoints between observed values. Ties go to the lowest
//! variable index.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Word;
use crate::features::{FeatureMatrix, VariableId};
use crate::seed::stream_rng;

use super::{ForestParams, LearnError, STREAM_TREE_BASE};

/// A decision-tree node. Rows with `value <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeNode {
    Leaf {
        /// Class frequencies `[p_simple, p_complex]`; they sum to 1.
        leaf: [f64; 2],
    },
    Split {
        var: usize,
        threshold: f32,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    fn class1_prob(&self, row: &[f32]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { leaf } => return leaf[1],
                TreeNode::Split { var, threshold, left, right } => {
                    node = if row[*var] <= *threshold { left } else { right };
                }
            }
        }
    }

    fn max_depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.max_depth().max(right.max_depth()),
        }
    }
}

/// A trained ensemble plus the input layout it expects.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub trees: Vec<TreeNode>,
    pub variables: Vec<VariableId>,
    pub lmax: usize,
    pub params: ForestParams,
}

const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    version: u32,
    lmax: usize,
    variables: Vec<String>,
    params: ForestParams,
    trees: Vec<TreeNode>,
}

impl ForestModel {
    /// Mean over trees of the leaf probability of the complex class.
    pub fn predict_score(&self, vector: &[f32]) -> Result<f64, LearnError> {
        if vector.len() != self.variables.len() {
            return Err(LearnError::DimensionMismatch {
                expected: self.variables.len(),
                got: vector.len(),
            });
        }
        Ok(self.score_row(vector))
    }

    pub(crate) fn score_row(&self, row: &[f32]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.class1_prob(row)).sum();
        sum / self.trees.len() as f64
    }

    /// Scores a word by projecting it onto the model's variable layout.
    pub fn predict_word(&self, word: &Word) -> Result<f64, LearnError> {
        if word.len() > self.lmax {
            return Err(LearnError::WordTooLong {
                word: word.to_string(),
                len: word.len(),
                lmax: self.lmax,
            });
        }
        let bytes = word.bytes();
        let row: Vec<f32> = self
            .variables
            .iter()
            .map(|v| (bytes.get(v.position() - 1) == Some(&(v.letter() as u8))) as u8 as f32)
            .collect();
        Ok(self.score_row(&row))
    }

    /// Deepest path over all trees (diagnostics).
    pub fn max_depth(&self) -> usize {
        self.trees.iter().map(TreeNode::max_depth).max().unwrap_or(0)
    }

    /// Versioned JSON document; `from_json` of the output reproduces the
    /// model exactly.
    pub fn to_json(&self) -> String {
        let doc = ModelDoc {
            version: MODEL_VERSION,
            lmax: self.lmax,
            variables: self.variables.iter().map(|v| v.to_string()).collect(),
            params: self.params,
            trees: self.trees.clone(),
        };
        serde_json::to_string(&doc).expect("model serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<ForestModel, LearnError> {
        // Trees nest one JSON object per level; lift the parser's
        // recursion cap so deep models stay loadable.
        let mut de = serde_json::Deserializer::from_str(text);
        de.disable_recursion_limit();
        let doc = ModelDoc::deserialize(&mut de)
            .map_err(|e| LearnError::InvalidModel(e.to_string()))?;
        de.end().map_err(|e| LearnError::InvalidModel(e.to_string()))?;
        if doc.version != MODEL_VERSION {
            return Err(LearnError::InvalidModel(format!(
                "unsupported version {}",
                doc.version
            )));
        }
        let variables = doc
            .variables
            .iter()
            .map(|s| s.parse::<VariableId>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| LearnError::InvalidModel(e.to_string()))?;
        let n_vars = variables.len();
        let trees = doc.trees;
        for t in &trees {
            check_tree(t, n_vars)?;
        }
        Ok(ForestModel { trees, variables, lmax: doc.lmax, params: doc.params })
    }
}

fn check_tree(node: &TreeNode, n_vars: usize) -> Result<(), LearnError> {
    match node {
        TreeNode::Leaf { leaf } => {
            if (leaf[0] + leaf[1] - 1.0).abs() > 1e-9 {
                return Err(LearnError::InvalidModel("leaf probabilities must sum to 1".into()));
            }
            Ok(())
        }
        TreeNode::Split { var, left, right, .. } => {
            if *var >= n_vars {
                return Err(LearnError::InvalidModel(format!(
                    "split variable {var} out of range ({n_vars} variables)"
                )));
            }
            check_tree(left, n_vars)?;
            check_tree(right, n_vars)
        }
    }
}

/// Row-major training view shared by full training and cross-validation.
pub(crate) struct TrainSet<'a> {
    pub cols: usize,
    pub data: &'a [f32],
    pub labels: &'a [u8],
}

impl TrainSet<'_> {
    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    fn value(&self, row: usize, col: usize) -> f32 {
        self.data[row * self.cols + col]
    }
}

/// Trains a forest on a feature matrix with 0/1 labels.
pub fn train_random_forest(
    matrix: &FeatureMatrix,
    labels: &[u8],
    params: &ForestParams,
) -> Result<ForestModel, LearnError> {
    if matrix.n_rows() != labels.len() {
        return Err(LearnError::LengthMismatch(matrix.n_rows(), labels.len()));
    }
    let data = TrainSet {
        cols: matrix.n_cols(),
        data: matrix.raw_data(),
        labels,
    };
    let trees = fit_trees(&data, params)?;
    Ok(ForestModel {
        trees,
        variables: matrix.variables.clone(),
        lmax: matrix.lmax,
        params: *params,
    })
}

/// Grows `params.n_trees` trees. Tree `t` draws all of its randomness
/// from stream `t` of `params.seed`, so the result is independent of
/// scheduling.
pub(crate) fn fit_trees(
    data: &TrainSet<'_>,
    params: &ForestParams,
) -> Result<Vec<TreeNode>, LearnError> {
    let n = data.n_rows();
    if n < 2 {
        return Err(LearnError::TooFewRows(n));
    }
    if data.labels.iter().all(|&l| l == 0) || data.labels.iter().all(|&l| l != 0) {
        return Err(LearnError::SingleClass);
    }

    let grow_one = |t: usize| -> TreeNode {
        let mut rng = stream_rng(params.seed, STREAM_TREE_BASE + t as u64);
        let bootstrap: Vec<u32> = (0..n).map(|_| rng.random_range(0..n) as u32).collect();
        let mut scratch = Vec::new();
        grow(data, params, bootstrap, &mut rng, 0, &mut scratch)
    };

    #[cfg(feature = "parallel")]
    let trees = {
        use rayon::prelude::*;
        (0..params.n_trees).into_par_iter().map(grow_one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let trees = (0..params.n_trees).map(grow_one).collect();

    Ok(trees)
}

fn leaf_from_counts(c0: usize, c1: usize) -> TreeNode {
    let n = (c0 + c1) as f64;
    TreeNode::Leaf { leaf: [c0 as f64 / n, c1 as f64 / n] }
}

fn gini(c0: f64, c1: f64) -> f64 {
    let n = c0 + c1;
    1.0 - (c0 * c0 + c1 * c1) / (n * n)
}

struct BestSplit {
    var: usize,
    threshold: f32,
    weighted_gini: f64,
}

fn grow(
    data: &TrainSet<'_>,
    params: &ForestParams,
    indices: Vec<u32>,
    rng: &mut ChaCha8Rng,
    depth: usize,
    scratch: &mut Vec<(f32, u8)>,
) -> TreeNode {
    let n = indices.len();
    let c1 = indices.iter().filter(|&&i| data.labels[i as usize] != 0).count();
    let c0 = n - c1;
    let pure = c0 == 0 || c1 == 0;
    let depth_capped = params.max_depth.is_some_and(|d| depth >= d);
    if pure || n < params.min_samples_split || depth_capped {
        return leaf_from_counts(c0, c1);
    }

    let d = data.cols;
    let k = params.features_per_split.resolve(d);
    let mut candidates: Vec<usize> = rand::seq::index::sample(rng, d, k).into_vec();
    // Ascending order makes the tie-break "lowest variable index wins".
    candidates.sort_unstable();

    let parent_gini = gini(c0 as f64, c1 as f64);
    let mut best: Option<BestSplit> = None;
    for var in candidates {
        if let Some((threshold, weighted)) = best_threshold(data, &indices, var, scratch) {
            if best.as_ref().is_none_or(|b| weighted < b.weighted_gini) {
                best = Some(BestSplit { var, threshold, weighted_gini: weighted });
            }
        }
    }
    let Some(best) = best else {
        return leaf_from_counts(c0, c1);
    };
    if parent_gini - best.weighted_gini <= 0.0 {
        return leaf_from_counts(c0, c1);
    }

    let mut left: Vec<u32> = Vec::new();
    let mut right: Vec<u32> = Vec::new();
    for &i in &indices {
        if data.value(i as usize, best.var) <= best.threshold {
            left.push(i);
        } else {
            right.push(i);
        }
    }
    drop(indices);

    let left = grow(data, params, left, rng, depth + 1, scratch);
    let right = grow(data, params, right, rng, depth + 1, scratch);
    TreeNode::Split {
        var: best.var,
        threshold: best.threshold,
        left: Box::new(left),
        right: Box::new(right),
    }
}

/// Impurity-minimizing threshold for one variable over the node rows, or
/// `None` when the column is constant there.
fn best_threshold(
    data: &TrainSet<'_>,
    indices: &[u32],
    var: usize,
    scratch: &mut Vec<(f32, u8)>,
) -> Option<(f32, f64)> {
    let n = indices.len() as f64;

    // Binary fast path: the only meaningful threshold is 0.5.
    let mut binary = true;
    let mut zero = [0f64; 2];
    let mut one = [0f64; 2];
    for &i in indices {
        let v = data.value(i as usize, var);
        let l = (data.labels[i as usize] != 0) as usize;
        if v == 0.0 {
            zero[l] += 1.0;
        } else if v == 1.0 {
            one[l] += 1.0;
        } else {
            binary = false;
            break;
        }
    }
    if binary {
        let nl = zero[0] + zero[1];
        let nr = one[0] + one[1];
        if nl == 0.0 || nr == 0.0 {
            return None;
        }
        let weighted = (nl * gini(zero[0], zero[1]) + nr * gini(one[0], one[1])) / n;
        return Some((0.5, weighted));
    }

    // Fractional path: midpoints between consecutive distinct values.
    scratch.clear();
    scratch.extend(indices.iter().map(|&i| {
        (data.value(i as usize, var), (data.labels[i as usize] != 0) as u8)
    }));
    scratch.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    if scratch.first().map(|p| p.0) == scratch.last().map(|p| p.0) {
        return None;
    }

    let total1: f64 = scratch.iter().map(|p| p.1 as f64).sum();
    let total0 = n - total1;
    let mut l0 = 0.0;
    let mut l1 = 0.0;
    let mut best: Option<(f32, f64)> = None;
    for w in 0..scratch.len() - 1 {
        let (v, label) = scratch[w];
        if label == 0 {
            l0 += 1.0;
        } else {
            l1 += 1.0;
        }
        let next = scratch[w + 1].0;
        if next == v {
            continue;
        }
        let nl = l0 + l1;
        let nr = n - nl;
        let weighted = (nl * gini(l0, l1) + nr * gini(total0 - l0, total1 - l1)) / n;
        if best.is_none_or(|(_, g)| weighted < g) {
            best = Some((v + (next - v) / 2.0, weighted));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::clean_word_list;
    use crate::corpus::LabeledCorpus;
    use crate::features::featurize_corpus;

    fn suffix(i: usize) -> String {
        format!("{}{}", (b'a' + (i % 5) as u8) as char, (b'a' + (i / 5) as u8) as char)
    }

    fn separable_corpus() -> (FeatureMatrix, Vec<u8>) {
        // First letter 'a' <=> complex; perfectly separable on a1.
        let simple: Vec<String> = (0..30).map(|i| format!("b{}", suffix(i))).collect();
        let complex: Vec<String> = (0..30).map(|i| format!("a{}", suffix(i))).collect();
        let s: Vec<&str> = simple.iter().map(String::as_str).collect();
        let c: Vec<&str> = complex.iter().map(String::as_str).collect();
        let (s, _) = clean_word_list("s", &s, false).unwrap();
        let (c, _) = clean_word_list("c", &c, false).unwrap();
        let corpus = LabeledCorpus { simple: s, complex: c };
        featurize_corpus(&corpus, 4).unwrap()
    }

    fn letters_corpus() -> (FeatureMatrix, Vec<u8>) {
        let words = ["ab", "ba", "bb", "aa", "ca", "ac", "cb", "bc", "cc"];
        let (list, _) = clean_word_list("w", &words, false).unwrap();
        let half = list.len() / 2;
        let simple = crate::corpus::WordList::new("s", list.words[..half].to_vec());
        let complex = crate::corpus::WordList::new("c", list.words[half..].to_vec());
        featurize_corpus(&LabeledCorpus { simple, complex }, 2).unwrap()
    }

    #[test]
    fn separable_data_classifies_perfectly() {
        let (matrix, labels) = separable_corpus();
        let params = ForestParams { n_trees: 25, ..Default::default() }.with_seed(3);
        let model = train_random_forest(&matrix, &labels, &params).unwrap();
        let mut correct = 0;
        for (row, &label) in matrix.rows().zip(&labels) {
            let score = model.predict_score(row).unwrap();
            assert!((0.0..=1.0).contains(&score));
            if classify_score(score) == label {
                correct += 1;
            }
        }
        assert_eq!(correct, labels.len());
    }

    fn classify_score(score: f64) -> u8 {
        (score >= 0.5) as u8
    }

    #[test]
    fn same_seed_gives_identical_model_bytes() {
        let (matrix, labels) = separable_corpus();
        let params = ForestParams { n_trees: 10, ..Default::default() }.with_seed(11);
        let a = train_random_forest(&matrix, &labels, &params).unwrap();
        let b = train_random_forest(&matrix, &labels, &params).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let c = train_random_forest(&matrix, &labels, &params.with_seed(12)).unwrap();
        assert_ne!(a.to_json(), c.to_json());
    }

    #[test]
    fn single_class_is_rejected() {
        let (matrix, _) = separable_corpus();
        let labels = vec![1u8; matrix.n_rows()];
        let params = ForestParams::default();
        assert!(matches!(
            train_random_forest(&matrix, &labels, &params),
            Err(LearnError::SingleClass)
        ));
    }

    #[test]
    fn prediction_checks_dimensions() {
        let (matrix, labels) = separable_corpus();
        let params = ForestParams { n_trees: 5, ..Default::default() };
        let model = train_random_forest(&matrix, &labels, &params).unwrap();
        assert!(matches!(
            model.predict_score(&[0.0; 3]),
            Err(LearnError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn predict_word_projects_layout() {
        let (matrix, labels) = separable_corpus();
        let params = ForestParams { n_trees: 25, ..Default::default() }.with_seed(5);
        let model = train_random_forest(&matrix, &labels, &params).unwrap();
        let complexish = Word::new("afa").unwrap();
        let simpleish = Word::new("bfa").unwrap();
        assert!(model.predict_word(&complexish).unwrap() > 0.5);
        assert!(model.predict_word(&simpleish).unwrap() < 0.5);
        let long = Word::new("abcdefg").unwrap();
        assert!(matches!(model.predict_word(&long), Err(LearnError::WordTooLong { .. })));
    }

    #[test]
    fn model_json_round_trips_byte_identically() {
        let (matrix, labels) = letters_corpus();
        let params = ForestParams { n_trees: 7, ..Default::default() }.with_seed(2);
        let model = train_random_forest(&matrix, &labels, &params).unwrap();
        let json = model.to_json();
        let back = ForestModel::from_json(&json).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.to_json(), json);
    }

    #[test]
    fn model_json_rejects_bad_documents() {
        assert!(ForestModel::from_json("{}").is_err());
        let (matrix, labels) = letters_corpus();
        let params = ForestParams { n_trees: 2, ..Default::default() };
        let model = train_random_forest(&matrix, &labels, &params).unwrap();
        let json = model.to_json().replace("\"version\":1", "\"version\":9");
        assert!(matches!(ForestModel::from_json(&json), Err(LearnError::InvalidModel(_))));
    }

    #[test]
    fn leaf_probabilities_sum_to_one() {
        let (matrix, labels) = letters_corpus();
        let params = ForestParams { n_trees: 12, ..Default::default() }.with_seed(9);
        let model = train_random_forest(&matrix, &labels, &params).unwrap();
        fn walk(node: &TreeNode) {
            match node {
                TreeNode::Leaf { leaf } => {
                    assert!((leaf[0] + leaf[1] - 1.0).abs() < 1e-12);
                }
                TreeNode::Split { left, right, .. } => {
                    walk(left);
                    walk(right);
                }
            }
        }
        for t in &model.trees {
            walk(t);
        }
    }

    #[test]
    fn fractional_columns_split_at_midpoints() {
        // One fractional column whose value separates the classes.
        let labels = [0u8, 0, 1, 1];
        let data = [0.1f32, 0.2, 0.8, 0.9];
        let set = TrainSet { cols: 1, data: &data, labels: &labels };
        let (thr, g) = best_threshold(&set, &[0, 1, 2, 3], 0, &mut Vec::new()).unwrap();
        assert!((thr - 0.5).abs() < 1e-6);
        assert_eq!(g, 0.0);
    }
}
