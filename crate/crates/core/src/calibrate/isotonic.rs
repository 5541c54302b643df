use crate::error::{CalexError, Result};

/// One weighted observation for isotonic regression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PavaPoint {
    pub score: f64,
    pub target: f64,
    pub weight: f64,
}

impl PavaPoint {
    pub fn new(score: f64, target: f64, weight: f64) -> Self {
        PavaPoint { score, target, weight }
    }
}

/// A monotone nondecreasing step function over sorted distinct breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotonicFit {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

/// A contiguous run of pooled observations during PAVA.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Block {
    /// Weighted target sum over the pooled observations.
    pub sum_wt: f64,
    /// Total weight.
    pub sum_w: f64,
    /// Number of distinct-score entries this block spans.
    pub span: usize,
}

impl Block {
    pub fn mean(&self) -> f64 {
        self.sum_wt / self.sum_w
    }
}

/// Merges adjacent blocks until block means are nondecreasing, in place.
///
/// Mean comparisons use cross-multiplied sums (weights are positive), which
/// keeps merge decisions exact whenever sums are exact — in particular for
/// unit weights and binary targets.
pub(crate) fn pool_adjacent_violators(blocks: &mut Vec<Block>) {
    let mut stack: Vec<Block> = Vec::with_capacity(blocks.len());
    for &block in blocks.iter() {
        let mut cur = block;
        while let Some(top) = stack.last() {
            if violates(top, &cur) {
                let top = stack.pop().expect("checked non-empty");
                cur.sum_wt += top.sum_wt;
                cur.sum_w += top.sum_w;
                cur.span += top.span;
            } else {
                break;
            }
        }
        stack.push(cur);
    }
    *blocks = stack;
}

fn violates(prev: &Block, next: &Block) -> bool {
    // next.mean < prev.mean  <=>  next.sum_wt * prev.sum_w < prev.sum_wt * next.sum_w
    next.sum_wt * prev.sum_w < prev.sum_wt * next.sum_w
}

/// Pools observations with equal scores into single blocks (weighted mean),
/// assuming `points` is sorted by score. Returns the distinct scores and
/// their blocks.
pub(crate) fn pool_equal_scores(points: &[PavaPoint]) -> (Vec<f64>, Vec<Block>) {
    let mut scores = Vec::with_capacity(points.len());
    let mut blocks: Vec<Block> = Vec::with_capacity(points.len());
    for p in points {
        match scores.last() {
            Some(&last) if last == p.score => {
                let b = blocks.last_mut().expect("block for last score");
                b.sum_wt += p.weight * p.target;
                b.sum_w += p.weight;
            }
            _ => {
                scores.push(p.score);
                blocks.push(Block { sum_wt: p.weight * p.target, sum_w: p.weight, span: 1 });
            }
        }
    }
    (scores, blocks)
}

/// Fits a monotone nondecreasing step function minimizing the weighted
/// squared error, by pool-adjacent-violators. Equal scores are pre-pooled
/// by weighted mean, so equal inputs always receive equal fitted values.
pub fn pava_fit(points: &[PavaPoint]) -> Result<IsotonicFit> {
    if points.is_empty() {
        return Err(CalexError::data("isotonic regression needs at least one point".to_string()));
    }
    for p in points {
        if !(p.score.is_finite() && p.target.is_finite()) {
            return Err(CalexError::data("isotonic regression inputs must be finite".to_string()));
        }
        if !(p.weight > 0.0 && p.weight.is_finite()) {
            return Err(CalexError::data(format!(
                "isotonic regression weights must be positive, got {}",
                p.weight
            )));
        }
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.score.partial_cmp(&b.score).expect("finite scores"));
    let (breakpoints, mut blocks) = pool_equal_scores(&sorted);
    pool_adjacent_violators(&mut blocks);

    let mut values = Vec::with_capacity(breakpoints.len());
    for b in &blocks {
        let mean = b.mean();
        values.extend(std::iter::repeat(mean).take(b.span));
    }
    Ok(IsotonicFit { breakpoints, values })
}

/// Evaluates the step function: exact breakpoint hits return that value;
/// queries between breakpoints take the nearest lower breakpoint's value
/// (right-continuous step); queries beyond either end clamp to the first or
/// last value.
pub fn isotonic_eval(fit: &IsotonicFit, score: f64) -> f64 {
    debug_assert!(!fit.breakpoints.is_empty());
    // Number of breakpoints <= score; the value at index k-1 covers
    // [breakpoints[k-1], breakpoints[k]).
    let k = fit.breakpoints.partition_point(|&b| b <= score);
    if k == 0 {
        fit.values[0]
    } else {
        fit.values[k - 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fit(scores: &[f64], targets: &[f64]) -> IsotonicFit {
        let pts: Vec<PavaPoint> = scores
            .iter()
            .zip(targets)
            .map(|(&s, &t)| PavaPoint::new(s, t, 1.0))
            .collect();
        pava_fit(&pts).unwrap()
    }

    #[test]
    fn pools_single_violation() {
        let f = fit(&[1.0, 2.0, 3.0], &[0.0, 1.0, 0.0]);
        assert_eq!(f.breakpoints, vec![1.0, 2.0, 3.0]);
        assert_eq!(f.values, vec![0.0, 0.5, 0.5]);
    }

    #[test]
    fn monotone_input_is_unchanged() {
        let f = fit(&[0.1, 0.2, 0.3, 0.4], &[0.0, 0.0, 1.0, 1.0]);
        assert_eq!(f.values, vec![0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn constant_targets_fit_constant() {
        let f = fit(&[3.0, 1.0, 2.0], &[0.25, 0.25, 0.25]);
        assert_eq!(f.values, vec![0.25, 0.25, 0.25]);
    }

    #[test]
    fn equal_scores_pool_to_weighted_mean() {
        let pts = vec![
            PavaPoint::new(0.5, 0.0, 1.0),
            PavaPoint::new(0.5, 1.0, 3.0),
            PavaPoint::new(0.9, 1.0, 1.0),
        ];
        let f = pava_fit(&pts).unwrap();
        assert_eq!(f.breakpoints, vec![0.5, 0.9]);
        assert_eq!(f.values, vec![0.75, 1.0]);
    }

    #[test]
    fn unsorted_input_sorts_first() {
        let f = fit(&[3.0, 1.0, 2.0], &[0.0, 0.0, 1.0]);
        assert_eq!(f.breakpoints, vec![1.0, 2.0, 3.0]);
        assert_eq!(f.values, vec![0.0, 0.5, 0.5]);
    }

    #[test]
    fn eval_follows_step_rules() {
        let f = IsotonicFit { breakpoints: vec![0.2, 0.8], values: vec![0.1, 0.9] };
        assert_eq!(isotonic_eval(&f, 0.2), 0.1);
        assert_eq!(isotonic_eval(&f, 0.0), 0.1);
        assert_eq!(isotonic_eval(&f, 0.5), 0.1);
        assert_eq!(isotonic_eval(&f, 0.8), 0.9);
        assert_eq!(isotonic_eval(&f, 1.0), 0.9);
    }

    #[test]
    fn rejects_empty_and_bad_weights() {
        assert!(pava_fit(&[]).is_err());
        assert!(pava_fit(&[PavaPoint::new(0.0, 1.0, 0.0)]).is_err());
        assert!(pava_fit(&[PavaPoint::new(0.0, 1.0, -1.0)]).is_err());
        assert!(pava_fit(&[PavaPoint::new(f64::NAN, 1.0, 1.0)]).is_err());
    }
}
