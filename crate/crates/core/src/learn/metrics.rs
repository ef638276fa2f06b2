//! Classification metrics. The complex class (label 1) is the positive
//! class throughout: sensitivity is complex recall, specificity is
//! simple recall.

use serde::{Deserialize, Serialize};

use crate::special::normal_sf;

use super::LearnError;

/// 1 iff `score >= cutpoint`.
pub fn classify(score: f64, cutpoint: f64) -> u8 {
    u8::from(score >= cutpoint)
}

/// Confusion counts with complex (1) as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn n(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }
}

/// Tallies the confusion counts. Any nonzero label counts as class 1.
pub fn confusion_counts(truth: &[u8], predicted: &[u8]) -> Result<Confusion, LearnError> {
    if truth.len() != predicted.len() {
        return Err(LearnError::LengthMismatch(truth.len(), predicted.len()));
    }
    if truth.is_empty() {
        return Err(LearnError::EmptyInput);
    }
    let mut c = Confusion { tp: 0, tn: 0, fp: 0, fn_: 0 };
    for (&t, &p) in truth.iter().zip(predicted) {
        match (t != 0, p != 0) {
            (true, true) => c.tp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fp += 1,
            (true, false) => c.fn_ += 1,
        }
    }
    Ok(c)
}

/// Accuracy, class recalls and the majority-class baseline.
///
/// A recall with an empty denominator (a class absent from `truth`)
/// comes back as NaN rather than an error.
pub fn confusion_metrics(
    truth: &[u8],
    predicted: &[u8],
) -> Result<(f64, f64, f64, f64, Confusion), LearnError> {
    let c = confusion_counts(truth, predicted)?;
    let n = c.n() as f64;
    let accuracy = (c.tp + c.tn) as f64 / n;
    let sensitivity = c.tp as f64 / (c.tp + c.fn_) as f64;
    let specificity = c.tn as f64 / (c.tn + c.fp) as f64;
    let positives = (c.tp + c.fn_) as f64;
    let baseline = (positives / n).max(1.0 - positives / n);
    Ok((accuracy, sensitivity, specificity, baseline, c))
}

/// Cohen's kappa with its large-sample null z-test.
///
/// `z = kappa / SE0` where `SE0` is the null standard error from the
/// marginal distributions, and `p` is the two-tailed normal tail
/// probability. Errors when both marginals are concentrated on a single
/// class (chance agreement is 1 and kappa is undefined).
pub fn cohens_kappa(truth: &[u8], predicted: &[u8]) -> Result<(f64, f64, f64), LearnError> {
    let c = confusion_counts(truth, predicted)?;
    let n = c.n() as f64;
    let po = (c.tp + c.tn) as f64 / n;
    // Marginal proportions: t_i for truth, q_i for predictions.
    let t1 = (c.tp + c.fn_) as f64 / n;
    let t0 = 1.0 - t1;
    let q1 = (c.tp + c.fp) as f64 / n;
    let q0 = 1.0 - q1;
    let pe = t1 * q1 + t0 * q0;
    if pe >= 1.0 {
        return Err(LearnError::DegenerateAgreement);
    }
    let kappa = (po - pe) / (1.0 - pe);
    let cross = t1 * q1 * (t1 + q1) + t0 * q0 * (t0 + q0);
    let se0 = (pe + pe * pe - cross).max(0.0).sqrt() / ((1.0 - pe) * n.sqrt());
    if se0 == 0.0 {
        // One rater constant: the null distribution is degenerate and
        // kappa itself is forced to 0.
        return Ok((kappa, 0.0, 1.0));
    }
    let z = kappa / se0;
    let p = 2.0 * normal_sf(z.abs());
    Ok((kappa, z, p))
}

/// The full metric block reported for a classification run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub baseline: f64,
    pub kappa: f64,
    pub z: f64,
    pub p: f64,
    pub confusion: Confusion,
}

impl Metrics {
    pub fn from_predictions(truth: &[u8], predicted: &[u8]) -> Result<Metrics, LearnError> {
        let (accuracy, sensitivity, specificity, baseline, confusion) =
            confusion_metrics(truth, predicted)?;
        let (kappa, z, p) = cohens_kappa(truth, predicted)?;
        Ok(Metrics { accuracy, sensitivity, specificity, baseline, kappa, z, p, confusion })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classify_thresholds_inclusively() {
        assert_eq!(classify(0.49, 0.5), 0);
        assert_eq!(classify(0.5, 0.5), 1);
        assert_eq!(classify(1.0, 0.5), 1);
    }

    #[test]
    fn perfect_predictions() {
        let truth = [1, 0, 1, 0];
        let (acc, sens, spec, baseline, _) = confusion_metrics(&truth, &truth).unwrap();
        assert_eq!((acc, sens, spec), (1.0, 1.0, 1.0));
        assert_eq!(baseline, 0.5);
        let (kappa, _, _) = cohens_kappa(&truth, &truth).unwrap();
        assert_eq!(kappa, 1.0);
    }

    #[test]
    fn hand_counted_case() {
        let truth = [1, 1, 0, 0];
        let pred = [1, 0, 0, 0];
        let (acc, sens, spec, _, c) = confusion_metrics(&truth, &pred).unwrap();
        assert_eq!(acc, 0.75);
        assert_eq!(sens, 0.5);
        assert_eq!(spec, 1.0);
        assert_eq!(c, Confusion { tp: 1, tn: 2, fp: 0, fn_: 1 });
    }

    #[test]
    fn kappa_fixture_tp40_tn40_fp10_fn10() {
        // p_o = 0.8, p_e = 0.5 -> kappa = 0.6; SE0 = 0.1 -> z = 6.
        let mut truth = Vec::new();
        let mut pred = Vec::new();
        for (t, p, count) in [(1, 1, 40), (0, 0, 40), (0, 1, 10), (1, 0, 10)] {
            truth.extend(std::iter::repeat_n(t, count));
            pred.extend(std::iter::repeat_n(p, count));
        }
        let (kappa, z, p) = cohens_kappa(&truth, &pred).unwrap();
        assert!((kappa - 0.6).abs() < 1e-12);
        assert!((z - 6.0).abs() < 1e-12);
        assert!((p - 1.973_175_290_075_389e-9).abs() < 1e-18);
    }

    #[test]
    fn constant_predictions_on_balanced_truth_are_chance_level() {
        let truth = [1, 0, 1, 0, 1, 0];
        let pred = [1, 1, 1, 1, 1, 1];
        let (kappa, z, _) = cohens_kappa(&truth, &pred).unwrap();
        assert_eq!(kappa, 0.0);
        assert_eq!(z, 0.0);
    }

    #[test]
    fn degenerate_marginals_error() {
        let truth = [1, 1, 1];
        let pred = [1, 1, 1];
        assert!(matches!(cohens_kappa(&truth, &pred), Err(LearnError::DegenerateAgreement)));
    }

    #[test]
    fn length_mismatch_and_empty() {
        assert!(matches!(
            confusion_counts(&[1, 0], &[1]),
            Err(LearnError::LengthMismatch(2, 1))
        ));
        assert!(matches!(confusion_counts(&[], &[]), Err(LearnError::EmptyInput)));
    }

    #[test]
    fn kappa_one_iff_no_off_diagonal() {
        let truth = [1, 1, 0, 0, 1];
        let pred = [1, 1, 0, 0, 0];
        let (kappa, _, _) = cohens_kappa(&truth, &pred).unwrap();
        assert!(kappa < 1.0);
        let (kappa, _, _) = cohens_kappa(&truth, &truth).unwrap();
        assert_eq!(kappa, 1.0);
    }

    #[test]
    fn metrics_json_shape() {
        let truth = [1, 0, 1, 0];
        let pred = [1, 0, 0, 0];
        let m = Metrics::from_predictions(&truth, &pred).unwrap();
        let json = m.to_json();
        assert!(json.contains("\"accuracy\""));
        assert!(json.contains("\"fn\""));
        let back: Metrics = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
    }
}
