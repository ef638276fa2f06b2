//! Per-variable two-sample significance testing.
//!
//! Each letter-position variable is a pair of 0/1 indicator columns (one
//! per class). We test the difference in indicator means with a
//! two-sample t-test and apply a Bonferroni correction for the full
//! `26 * Lmax` family of tests.

use std::collections::HashSet;

use thiserror::Error;

use crate::corpus::LabeledCorpus;
use crate::features::{count_at, variable_grid, VariableId, ALPHABET};
use crate::special::t_two_tailed_p;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("sample of {0} values is too small for a t-test (need >= 2)")]
    SampleTooSmall(usize),
}

/// Which variance estimate the t-test uses. Welch is the default; the
/// pooled form is kept for sensitivity checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TestKind {
    #[default]
    Welch,
    Pooled,
}

/// A t statistic with its degrees of freedom and two-tailed p-value.
///
/// When both samples have zero variance the test degenerates: equal
/// means give `t = 0, p = 1`; unequal means give `p = 0` with `t` and
/// `df` reported as infinite sentinels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub t: f64,
    pub df: f64,
    pub p: f64,
}

/// Welch (or pooled) two-sample t-test on raw samples.
pub fn two_sample_t_test(x: &[f64], y: &[f64], kind: TestKind) -> Result<TestResult, StatsError> {
    if x.len() < 2 {
        return Err(StatsError::SampleTooSmall(x.len()));
    }
    if y.len() < 2 {
        return Err(StatsError::SampleTooSmall(y.len()));
    }
    let (mx, vx) = sample_moments(x);
    let (my, vy) = sample_moments(y);
    Ok(t_test_from_moments(mx, vx, x.len(), my, vy, y.len(), kind))
}

/// Sample mean and n-1 variance.
fn sample_moments(sample: &[f64]) -> (f64, f64) {
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    let ss = sample.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>();
    (mean, ss / (n - 1.0))
}

/// Mean and n-1 variance of a 0/1 indicator column with `count` ones out
/// of `n`. Algebraically `n*p*(1-p)/(n-1)`.
fn indicator_moments(count: usize, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let p = count as f64 / nf;
    (p, nf * p * (1.0 - p) / (nf - 1.0))
}

fn t_test_from_moments(
    mx: f64,
    vx: f64,
    nx: usize,
    my: f64,
    vy: f64,
    ny: usize,
    kind: TestKind,
) -> TestResult {
    let nxf = nx as f64;
    let nyf = ny as f64;
    let (se2, df) = match kind {
        TestKind::Welch => {
            let ax = vx / nxf;
            let ay = vy / nyf;
            let se2 = ax + ay;
            let denom = ax * ax / (nxf - 1.0) + ay * ay / (nyf - 1.0);
            let df = if denom > 0.0 { se2 * se2 / denom } else { f64::INFINITY };
            (se2, df)
        }
        TestKind::Pooled => {
            let pooled = ((nxf - 1.0) * vx + (nyf - 1.0) * vy) / (nxf + nyf - 2.0);
            (pooled * (1.0 / nxf + 1.0 / nyf), nxf + nyf - 2.0)
        }
    };
    let diff = mx - my;
    if se2 <= 0.0 {
        // Both variances zero: identical constants or separated constants.
        return if diff == 0.0 {
            TestResult { t: 0.0, df: f64::INFINITY, p: 1.0 }
        } else {
            TestResult { t: diff.signum() * f64::INFINITY, df: f64::INFINITY, p: 0.0 }
        };
    }
    let t = diff / se2.sqrt();
    TestResult { t, df, p: t_two_tailed_p(t, df) }
}

/// Bonferroni correction: `min(1, m * p)`.
pub fn bonferroni(p: f64, m: usize) -> f64 {
    (p * m as f64).min(1.0)
}

/// One row of the significance table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariableStat {
    pub variable: VariableId,
    pub lpp_simple: f64,
    pub lpp_complex: f64,
    pub p: f64,
    pub bp: f64,
}

/// Per-variable test results for a corpus, rows in position-major order.
#[derive(Debug, Clone)]
pub struct SignificanceTable {
    pub rows: Vec<VariableStat>,
    /// Number of tests in the family: `26 * lmax`.
    pub m: usize,
    pub lmax: usize,
    pub n_simple: usize,
    pub n_complex: usize,
}

impl SignificanceTable {
    /// CSV rendering with both display-precision (5 decimal places) and
    /// exact p columns.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("variable,letter,position,lpp_simple,lpp_complex,p,bp,p_exact,bp_exact\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{:.5},{:.5},{},{}\n",
                r.variable,
                r.variable.letter(),
                r.variable.position(),
                r.lpp_simple,
                r.lpp_complex,
                r.p,
                r.bp,
                r.p,
                r.bp,
            ));
        }
        out
    }
}

/// Builds the full `26 * Lmax` significance table for a corpus.
pub fn variable_significance_table(
    corpus: &LabeledCorpus,
    kind: TestKind,
) -> Result<SignificanceTable, StatsError> {
    let n_simple = corpus.simple.len();
    let n_complex = corpus.complex.len();
    if n_simple < 2 {
        return Err(StatsError::SampleTooSmall(n_simple));
    }
    if n_complex < 2 {
        return Err(StatsError::SampleTooSmall(n_complex));
    }
    let lmax = crate::features::max_word_length(corpus);
    let m = ALPHABET * lmax;
    let rows = variable_grid(lmax)
        .into_iter()
        .map(|variable| {
            let cs = count_at(&corpus.simple, variable);
            let cc = count_at(&corpus.complex, variable);
            let (ms, vs) = indicator_moments(cs, n_simple);
            let (mc, vc) = indicator_moments(cc, n_complex);
            let test = t_test_from_moments(ms, vs, n_simple, mc, vc, n_complex, kind);
            VariableStat {
                variable,
                lpp_simple: ms,
                lpp_complex: mc,
                p: test.p,
                bp: bonferroni(test.p, m),
            }
        })
        .collect();
    Ok(SignificanceTable { rows, m, lmax, n_simple, n_complex })
}

/// Variables with `bp < alpha` in the first `max_position` positions,
/// sorted position-major.
pub fn select_significant(
    table: &SignificanceTable,
    alpha: f64,
    max_position: usize,
) -> Vec<VariableId> {
    let mut out: Vec<VariableId> = table
        .rows
        .iter()
        .filter(|r| r.bp < alpha && r.variable.position() <= max_position)
        .map(|r| r.variable)
        .collect();
    out.sort_by_key(VariableId::sort_key);
    out
}

/// Exact set intersection, sorted by (position, letter).
pub fn intersect_significant(a: &[VariableId], b: &[VariableId]) -> Vec<VariableId> {
    let set: HashSet<VariableId> = b.iter().copied().collect();
    let mut out: Vec<VariableId> = a.iter().copied().filter(|v| set.contains(v)).collect();
    out.sort_by_key(VariableId::sort_key);
    out.dedup();
    out
}
