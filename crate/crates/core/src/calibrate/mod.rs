//! Isotonic regression and the inductive Venn-Abers predictor.

mod isotonic;

pub use isotonic::{isotonic_eval, pava_fit, IsotonicFit, PavaPoint};

use isotonic::{pool_adjacent_violators, pool_equal_scores, Block};

use crate::error::{CalexError, Result};

/// A Venn-Abers probability interval for class 1 with its regularized
/// point estimate: `p0 <= p <= p1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityInterval {
    pub p0: f64,
    pub p1: f64,
    pub p: f64,
}

/// Collapses an interval to the single regularized estimate
/// `p1 / (1 - p0 + p1)`. The denominator is at least 1, and the result is
/// clamped into `[p0, p1]` (where it always lies mathematically) to keep
/// the containment invariant exact under rounding.
pub fn regularize(p0: f64, p1: f64) -> Result<f64> {
    if !(p0.is_finite() && p1.is_finite()) || p0 < 0.0 || p1 > 1.0 {
        return Err(CalexError::data(format!(
            "interval endpoints must lie in [0,1], got [{p0}, {p1}]"
        )));
    }
    if p0 > p1 {
        return Err(CalexError::data(format!(
            "interval endpoints out of order: p0={p0} > p1={p1}"
        )));
    }
    Ok((p1 / ((1.0 - p0) + p1)).clamp(p0, p1))
}

/// The diagnostic "cheating" endpoint: the interval end matching the true
/// label (lower end for class 0, upper end for class 1).
pub fn cheat_endpoint(interval: &ProbabilityInterval, true_label: u8) -> f64 {
    if true_label == 0 {
        interval.p0
    } else {
        interval.p1
    }
}

/// An inductive Venn-Abers calibrator over (score, label) pairs.
///
/// For a test score `s`, two isotonic calibrators are fitted over the
/// calibration pairs plus the test point labeled 0 and labeled 1; the
/// fitted values at `s` give the interval `[p0, p1]`.
///
/// [`VennAbers::interval`] is the production path: it pre-pools the sorted
/// calibration pairs once at fit time and then runs a single linear
/// pooling pass per query, instead of re-sorting the full set.
/// [`VennAbers::interval_naive`] rebuilds both fits from scratch exactly as
/// described above; it is kept permanently as the reference the fast path
/// is tested against.
#[derive(Debug, Clone)]
pub struct VennAbers {
    /// Calibration pairs sorted by score, then label, then original index.
    pairs: Vec<(f64, u8)>,
    /// Distinct sorted scores with per-score label sums and counts.
    pooled_scores: Vec<f64>,
    pooled_sum_y: Vec<f64>,
    pooled_count: Vec<f64>,
}

impl VennAbers {
    /// Fits the calibrator. Requires at least two pairs, both labels
    /// present, and scores within [0,1].
    pub fn fit(scores: &[f64], labels: &[u8]) -> Result<Self> {
        if scores.len() != labels.len() {
            return Err(CalexError::data(format!(
                "{} scores but {} labels",
                scores.len(),
                labels.len()
            )));
        }
        if scores.len() < 2 {
            return Err(CalexError::data(
                "Venn-Abers needs at least two calibration pairs".to_string(),
            ));
        }
        if !labels.contains(&0) || !labels.contains(&1) {
            return Err(CalexError::data(
                "Venn-Abers needs both labels in the calibration set".to_string(),
            ));
        }
        for (&s, &l) in scores.iter().zip(labels) {
            if !s.is_finite() || !(0.0..=1.0).contains(&s) {
                return Err(CalexError::data(format!(
                    "calibration scores must lie in [0,1], got {s}"
                )));
            }
            if l > 1 {
                return Err(CalexError::data(format!("label {l} not in {{0,1}}")));
            }
        }
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| {
            scores[a]
                .partial_cmp(&scores[b])
                .expect("finite scores")
                .then(labels[a].cmp(&labels[b]))
                .then(a.cmp(&b))
        });
        let pairs: Vec<(f64, u8)> = order.iter().map(|&i| (scores[i], labels[i])).collect();

        let mut pooled_scores = Vec::new();
        let mut pooled_sum_y = Vec::new();
        let mut pooled_count = Vec::new();
        for &(s, l) in &pairs {
            if pooled_scores.last() == Some(&s) {
                *pooled_sum_y.last_mut().expect("sum for last score") += l as f64;
                *pooled_count.last_mut().expect("count for last score") += 1.0;
            } else {
                pooled_scores.push(s);
                pooled_sum_y.push(l as f64);
                pooled_count.push(1.0);
            }
        }
        Ok(VennAbers { pairs, pooled_scores, pooled_sum_y, pooled_count })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The probability interval for a test score, via the pre-pooled fast
    /// path. Results match [`VennAbers::interval_naive`] bit-for-bit: both
    /// paths pool equal scores by summation and run the same
    /// pool-adjacent-violators merge.
    pub fn interval(&self, test_score: f64) -> ProbabilityInterval {
        let p0 = self.fitted_value_with(test_score, 0.0);
        let p1 = self.fitted_value_with(test_score, 1.0);
        let p = regularize(p0, p1).expect("fitted values are ordered probabilities");
        debug_assert!(0.0 <= p0 && p0 <= p1 && p1 <= 1.0);
        ProbabilityInterval { p0, p1, p }
    }

    /// Reference implementation: full per-query isotonic refits over the
    /// calibration pairs plus the labeled test point.
    pub fn interval_naive(&self, test_score: f64) -> ProbabilityInterval {
        let mut points: Vec<PavaPoint> = self
            .pairs
            .iter()
            .map(|&(s, l)| PavaPoint::new(s, l as f64, 1.0))
            .collect();
        points.push(PavaPoint::new(test_score, 0.0, 1.0));
        let g0 = pava_fit(&points).expect("non-empty, validated inputs");
        let p0 = isotonic_eval(&g0, test_score);
        points.last_mut().expect("appended test point").target = 1.0;
        let g1 = pava_fit(&points).expect("non-empty, validated inputs");
        let p1 = isotonic_eval(&g1, test_score);
        let p = regularize(p0, p1).expect("fitted values are ordered probabilities");
        ProbabilityInterval { p0, p1, p }
    }

    /// Runs PAVA over the pooled calibration blocks plus the test point
    /// with the given target, returning the fitted value at the test score.
    fn fitted_value_with(&self, test_score: f64, target: f64) -> f64 {
        let m = self.pooled_scores.len();
        // Position of the test score among the distinct calibration scores,
        // and whether it collides with one of them.
        let insert_at = self.pooled_scores.partition_point(|&s| s < test_score);
        let collides = insert_at < m && self.pooled_scores[insert_at] == test_score;

        let mut blocks: Vec<Block> = Vec::with_capacity(m + 1);
        let mut query_entry = 0usize;
        for i in 0..m {
            if i == insert_at {
                query_entry = blocks.len();
                if collides {
                    blocks.push(Block {
                        sum_wt: self.pooled_sum_y[i] + target,
                        sum_w: self.pooled_count[i] + 1.0,
                        span: 1,
                    });
                    continue;
                }
                blocks.push(Block { sum_wt: target, sum_w: 1.0, span: 1 });
            }
            blocks.push(Block {
                sum_wt: self.pooled_sum_y[i],
                sum_w: self.pooled_count[i],
                span: 1,
            });
        }
        if insert_at == m {
            query_entry = blocks.len();
            blocks.push(Block { sum_wt: target, sum_w: 1.0, span: 1 });
        }

        pool_adjacent_violators(&mut blocks);
        let mut covered = 0;
        for b in &blocks {
            covered += b.span;
            if covered > query_entry {
                return b.mean();
            }
        }
        unreachable!("query entry is always covered by a block")
    }
}
