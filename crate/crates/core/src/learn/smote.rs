//! Synthetic minority oversampling.
//!
//! Each synthetic row is `x + u * (nn - x)` for a seeded random minority
//! row `x`, one of its `k` nearest minority neighbors `nn` (Euclidean
//! distance, ties broken by row index), and `u` uniform in `[0,1]`.
//! Values are clamped to the parent interval so every synthetic entry
//! lies componentwise inside its parents' convex hull.

use rand::Rng;

use crate::seed::stream_rng;

use super::LearnError;

/// A synthetic row plus the minority-row indices it interpolates.
#[derive(Debug, Clone, PartialEq)]
pub struct Synthetic {
    pub values: Vec<f32>,
    /// `(base, neighbor)` indices into the minority rows.
    pub parents: (usize, usize),
}

/// Generates `target_count - minority.len()` synthetic rows (none when
/// the minority already meets the target).
pub fn smote_oversample(
    minority: &[&[f32]],
    target_count: usize,
    k: usize,
    seed: u64,
) -> Result<Vec<Vec<f32>>, LearnError> {
    Ok(smote_oversample_detailed(minority, target_count, k, seed)?
        .into_iter()
        .map(|s| s.values)
        .collect())
}

/// As [`smote_oversample`], keeping parent indices for auditing.
pub fn smote_oversample_detailed(
    minority: &[&[f32]],
    target_count: usize,
    k: usize,
    seed: u64,
) -> Result<Vec<Synthetic>, LearnError> {
    let n = minority.len();
    if n < 2 {
        return Err(LearnError::MinorityTooSmall(n));
    }
    let need = target_count.saturating_sub(n);
    if need == 0 {
        return Ok(Vec::new());
    }
    let k = k.max(1).min(n - 1);

    let neighbors = nearest_neighbors(minority, k);

    let mut rng = stream_rng(seed, 0x0960);
    let mut out = Vec::with_capacity(need);
    for _ in 0..need {
        let base = rng.random_range(0..n);
        let nn = neighbors[base][rng.random_range(0..k)];
        let u = rng.random::<f64>() as f32;
        let x = minority[base];
        let y = minority[nn];
        let values = x
            .iter()
            .zip(y)
            .map(|(&a, &b)| (a + u * (b - a)).clamp(a.min(b), a.max(b)))
            .collect();
        out.push(Synthetic { values, parents: (base, nn) });
    }
    Ok(out)
}

/// The `k` nearest neighbors of every row, by squared Euclidean distance
/// then row index. Binary rows get a Hamming-distance bitset path; the
/// ordering is identical because squared distance equals the Hamming
/// count there.
fn nearest_neighbors(rows: &[&[f32]], k: usize) -> Vec<Vec<usize>> {
    let binary = rows
        .iter()
        .all(|r| r.iter().all(|&v| v == 0.0 || v == 1.0));
    if binary {
        let width = rows[0].len().div_ceil(64);
        let packed: Vec<Vec<u64>> = rows
            .iter()
            .map(|r| {
                let mut bits = vec![0u64; width];
                for (i, &v) in r.iter().enumerate() {
                    if v == 1.0 {
                        bits[i / 64] |= 1 << (i % 64);
                    }
                }
                bits
            })
            .collect();
        knn_by(rows.len(), k, |a, b| {
            packed[a]
                .iter()
                .zip(&packed[b])
                .map(|(x, y)| (x ^ y).count_ones() as u64)
                .sum::<u64>() as f64
        })
    } else {
        knn_by(rows.len(), k, |a, b| {
            rows[a]
                .iter()
                .zip(rows[b])
                .map(|(&x, &y)| {
                    let d = (x - y) as f64;
                    d * d
                })
                .sum()
        })
    }
}

fn knn_by(n: usize, k: usize, dist: impl Fn(usize, usize) -> f64 + Sync) -> Vec<Vec<usize>> {
    let one = |i: usize| -> Vec<usize> {
        let mut order: Vec<(f64, usize)> =
            (0..n).filter(|&j| j != i).map(|j| (dist(i, j), j)).collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| {
            a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
        };
        if k < order.len() {
            order.select_nth_unstable_by(k - 1, cmp);
            order.truncate(k);
        }
        order.sort_unstable_by(cmp);
        order.into_iter().map(|(_, j)| j).collect()
    };

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(one).collect()
    }
}
