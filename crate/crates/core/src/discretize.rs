//! Threshold generators for numeric features.
//!
//! A discretizer turns each numeric feature into a sorted list of
//! thresholds; the open-closed intervals between them are the perturbation
//! groups used by the explainer. All fits run on the calibration set and
//! are deterministic, permutation-invariant functions of their inputs.

use std::fmt;
use std::str::FromStr;

use crate::data::{Dataset, FeatureKind};
use crate::error::{CalexError, Result};

/// The five supported threshold rules. Binary kinds produce at most one
/// threshold per feature; quantile and entropy kinds produce several.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscretizerKind {
    BinaryMedian,
    BinaryEntropy,
    Quartile,
    Decile,
    Entropy,
}

impl DiscretizerKind {
    pub fn is_binary(self) -> bool {
        matches!(self, DiscretizerKind::BinaryMedian | DiscretizerKind::BinaryEntropy)
    }
}

impl fmt::Display for DiscretizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            DiscretizerKind::BinaryMedian => "binary-median",
            DiscretizerKind::BinaryEntropy => "binary-entropy",
            DiscretizerKind::Quartile => "quartile",
            DiscretizerKind::Decile => "decile",
            DiscretizerKind::Entropy => "entropy",
        };
        f.write_str(name)
    }
}

impl FromStr for DiscretizerKind {
    type Err = CalexError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary-median" => Ok(DiscretizerKind::BinaryMedian),
            "binary-entropy" => Ok(DiscretizerKind::BinaryEntropy),
            "quartile" => Ok(DiscretizerKind::Quartile),
            "decile" => Ok(DiscretizerKind::Decile),
            "entropy" => Ok(DiscretizerKind::Entropy),
            other => Err(CalexError::config(format!(
                "unknown discretizer '{other}' (expected binary-median, binary-entropy, \
                 quartile, decile, or entropy)"
            ))),
        }
    }
}

/// Fitted per-feature thresholds. Categorical and constant features carry
/// an empty list; `fallback[f]` marks features where the preferred rule had
/// no valid split and a substitute rule was used instead.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretizer {
    pub kind: DiscretizerKind,
    pub thresholds: Vec<Vec<f64>>,
    pub fallback: Vec<bool>,
    /// Tree depth for the entropy kind (ignored by the others).
    pub entropy_depth: usize,
}

impl Discretizer {
    /// Fits thresholds for every numeric feature of `calibration`.
    /// `entropy_depth` only affects [`DiscretizerKind::Entropy`].
    pub fn fit(kind: DiscretizerKind, calibration: &Dataset, entropy_depth: usize) -> Result<Self> {
        if calibration.n() == 0 {
            return Err(CalexError::data("cannot fit a discretizer on no rows".to_string()));
        }
        if entropy_depth == 0 {
            return Err(CalexError::config("entropy depth must be at least 1".to_string()));
        }
        let mut thresholds = Vec::with_capacity(calibration.n_features());
        let mut fallback = vec![false; calibration.n_features()];
        for (f, feat) in calibration.schema.features.iter().enumerate() {
            if let FeatureKind::Categorical { .. } = feat.kind {
                thresholds.push(Vec::new());
                continue;
            }
            let values = calibration.column(f);
            let fitted = match kind {
                DiscretizerKind::BinaryMedian => {
                    fit_binary_median(&values).into_iter().collect()
                }
                DiscretizerKind::BinaryEntropy => {
                    let (t, fell_back) = fit_binary_entropy(&values, &calibration.y);
                    fallback[f] = fell_back;
                    t.into_iter().collect()
                }
                DiscretizerKind::Quartile => fit_quantile(&values, 4),
                DiscretizerKind::Decile => fit_quantile(&values, 10),
                DiscretizerKind::Entropy => {
                    let (t, fell_back) = fit_entropy(&values, &calibration.y, entropy_depth);
                    fallback[f] = fell_back;
                    t
                }
            };
            thresholds.push(fitted);
        }
        Ok(Discretizer { kind, thresholds, fallback, entropy_depth })
    }
}

/// The median of the values: mean of the two middle order statistics for
/// even counts. Constant columns yield no threshold.
pub fn fit_binary_median(values: &[f64]) -> Option<f64> {
    if values.is_empty() || is_constant(values) {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let m = sorted.len();
    let median = if m % 2 == 1 {
        sorted[m / 2]
    } else {
        (sorted[m / 2 - 1] + sorted[m / 2]) / 2.0
    };
    Some(median)
}

/// The depth-1 entropy-tree split: the midpoint between consecutive
/// distinct sorted values maximizing information gain (ties to the
/// smallest threshold). Falls back to the median — flagged — when no split
/// has positive gain.
pub fn fit_binary_entropy(values: &[f64], labels: &[u8]) -> (Option<f64>, bool) {
    debug_assert_eq!(values.len(), labels.len());
    match best_entropy_split(values, labels) {
        Some((threshold, _gain)) => (Some(threshold), false),
        None => (fit_binary_median(values), true),
    }
}

/// Thresholds at the 25/50/75 (q=4) or 10..90 (q=10) percentiles,
/// computed by linear interpolation between closest ranks, deduplicated.
/// Constant columns yield no thresholds.
pub fn fit_quantile(values: &[f64], q: usize) -> Vec<f64> {
    debug_assert!(q >= 2);
    if values.is_empty() || is_constant(values) {
        return Vec::new();
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let mut out: Vec<f64> = Vec::with_capacity(q - 1);
    for step in 1..q {
        let t = percentile_sorted(&sorted, 100.0 * step as f64 / q as f64);
        if out.last() != Some(&t) {
            out.push(t);
        }
    }
    out
}

/// The split points of a single-feature entropy tree of the given depth
/// (at most `2^depth - 1` thresholds), sorted. Falls back to quartile
/// thresholds — flagged — when the root has no positive-gain split.
pub fn fit_entropy(values: &[f64], labels: &[u8], depth: usize) -> (Vec<f64>, bool) {
    debug_assert_eq!(values.len(), labels.len());
    debug_assert!(depth >= 1);
    let mut pairs: Vec<(f64, u8)> =
        values.iter().zip(labels).map(|(&v, &l)| (v, l)).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite values"));
    let mut thresholds = Vec::new();
    split_recursive(&pairs, depth, &mut thresholds);
    if thresholds.is_empty() {
        return (fit_quantile(values, 4), true);
    }
    thresholds.sort_by(|a, b| a.partial_cmp(b).expect("finite thresholds"));
    thresholds.dedup();
    (thresholds, false)
}

fn split_recursive(sorted_pairs: &[(f64, u8)], depth: usize, out: &mut Vec<f64>) {
    if depth == 0 {
        return;
    }
    let values: Vec<f64> = sorted_pairs.iter().map(|p| p.0).collect();
    let labels: Vec<u8> = sorted_pairs.iter().map(|p| p.1).collect();
    let Some((threshold, _gain)) = best_entropy_split_sorted(&values, &labels) else {
        return;
    };
    out.push(threshold);
    let boundary = sorted_pairs.partition_point(|&(v, _)| v <= threshold);
    split_recursive(&sorted_pairs[..boundary], depth - 1, out);
    split_recursive(&sorted_pairs[boundary..], depth - 1, out);
}

/// Maps a value to its group index: the number of thresholds strictly
/// below it. Values equal to a threshold join the `<=` side, so the groups
/// partition the reals into `len + 1` intervals
/// `(-inf, t0], (t0, t1], ..., (t_last, inf)`.
pub fn assign_group(thresholds: &[f64], value: f64) -> usize {
    thresholds.partition_point(|&t| t < value)
}

fn is_constant(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[0] == w[1])
}

/// Percentile by linear interpolation between closest ranks on a sorted
/// slice: rank = p/100 * (m-1).
pub(crate) fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let rank = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = rank - lo as f64;
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}

/// Gains below this are treated as zero: a split must beat float noise in
/// the entropy sums to count as informative.
const MIN_GAIN: f64 = 1e-12;

fn best_entropy_split(values: &[f64], labels: &[u8]) -> Option<(f64, f64)> {
    let mut pairs: Vec<(f64, u8)> =
        values.iter().zip(labels).map(|(&v, &l)| (v, l)).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite values"));
    let v: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let l: Vec<u8> = pairs.iter().map(|p| p.1).collect();
    best_entropy_split_sorted(&v, &l)
}

/// The best midpoint split over sorted values; `None` when no candidate
/// has positive gain. Ties keep the smallest threshold.
fn best_entropy_split_sorted(values: &[f64], labels: &[u8]) -> Option<(f64, f64)> {
    let n = values.len();
    if n < 2 {
        return None;
    }
    let total_pos: f64 = labels.iter().map(|&l| l as f64).sum();
    let nf = n as f64;
    let parent = binary_entropy(total_pos, nf);
    let mut best: Option<(f64, f64)> = None;
    let mut left_pos = 0.0;
    for i in 0..n - 1 {
        left_pos += labels[i] as f64;
        if values[i] == values[i + 1] {
            continue;
        }
        let left_n = (i + 1) as f64;
        let gain = parent
            - (left_n / nf) * binary_entropy(left_pos, left_n)
            - ((nf - left_n) / nf) * binary_entropy(total_pos - left_pos, nf - left_n);
        if gain > MIN_GAIN && best.map_or(true, |(_, g)| gain > g) {
            let threshold = values[i] + (values[i + 1] - values[i]) / 2.0;
            best = Some((threshold, gain));
        }
    }
    best
}

/// Binary entropy in bits of a (positives, total) composition.
fn binary_entropy(positives: f64, total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    let p = positives / total;
    let mut h = 0.0;
    if p > 0.0 {
        h -= p * p.log2();
    }
    if p < 1.0 {
        h -= (1.0 - p) * (1.0 - p).log2();
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_odd_and_even() {
        assert_eq!(fit_binary_median(&[5.0, 1.0, 3.0, 2.0, 4.0]), Some(3.0));
        assert_eq!(fit_binary_median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(fit_binary_median(&[7.0, 7.0, 7.0]), None);
        assert_eq!(fit_binary_median(&[]), None);
    }

    #[test]
    fn binary_entropy_finds_clean_boundary() {
        let (t, fb) = fit_binary_entropy(&[1.0, 2.0, 3.0, 4.0], &[0, 0, 1, 1]);
        assert_eq!(t, Some(2.5));
        assert!(!fb);
        let (t, fb) = fit_binary_entropy(&[1.0, 2.0], &[0, 1]);
        assert_eq!(t, Some(1.5));
        assert!(!fb);
    }

    #[test]
    fn binary_entropy_falls_back_to_median_without_gain() {
        let (t, fb) = fit_binary_entropy(&[1.0, 2.0, 3.0, 4.0], &[0, 0, 0, 0]);
        assert_eq!(t, Some(2.5));
        assert!(fb, "all-one-class labels must flag the median fallback");
    }

    #[test]
    fn binary_entropy_breaks_ties_low() {
        // Labels 1,0,1: splitting after the first or second value gives the
        // same gain; the smaller threshold must win.
        let (t, _) = fit_binary_entropy(&[1.0, 2.0, 3.0], &[1, 0, 1]);
        assert_eq!(t, Some(1.5));
    }

    #[test]
    fn quartiles_interpolate_linearly() {
        assert_eq!(
            fit_quantile(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0], 4),
            vec![2.75, 4.5, 6.25]
        );
        assert_eq!(fit_quantile(&[3.0, 3.0, 3.0], 4), Vec::<f64>::new());
    }

    #[test]
    fn deciles_dedupe_on_tiny_columns() {
        let t = fit_quantile(&[1.0, 1.0, 1.0, 2.0], 10);
        assert!(t.len() < 9, "repeated values must collapse thresholds: {t:?}");
        let mut sorted = t.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sorted.dedup();
        assert_eq!(t, sorted, "thresholds must be sorted and distinct");
    }

    #[test]
    fn entropy_depth_one_matches_binary() {
        let values = [0.3, 1.2, 2.2, 3.1, 4.5, 5.0, 6.6];
        let labels = [0, 0, 1, 1, 0, 1, 1];
        let (binary, fb) = fit_binary_entropy(&values, &labels);
        assert!(!fb);
        let (deep, _) = fit_entropy(&values, &labels, 1);
        assert_eq!(deep, vec![binary.unwrap()]);
    }

    #[test]
    fn entropy_on_separable_data_stops_at_one_threshold() {
        let values = [1.0, 2.0, 3.0, 10.0, 11.0, 12.0];
        let labels = [0, 0, 0, 1, 1, 1];
        let (t, fb) = fit_entropy(&values, &labels, 3);
        assert_eq!(t, vec![6.5], "children are pure; deeper splits have no gain");
        assert!(!fb);
    }

    #[test]
    fn entropy_finds_band_boundaries() {
        // Class 1 inside [10, 20]: two boundaries recoverable at depth 2.
        let values: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let labels: Vec<u8> = (0..30).map(|i| u8::from((10..=20).contains(&i))).collect();
        let (t, _) = fit_entropy(&values, &labels, 3);
        assert!(t.contains(&9.5) && t.contains(&20.5), "got {t:?}");
    }

    #[test]
    fn entropy_falls_back_to_quartile() {
        let values = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
        let labels = [0, 0, 0, 0, 0, 0, 0, 0];
        let (t, fb) = fit_entropy(&values, &labels, 3);
        assert!(fb);
        assert_eq!(t, vec![2.75, 4.5, 6.25]);
    }

    #[test]
    fn group_assignment_boundaries() {
        assert_eq!(assign_group(&[2.5], 2.5), 0);
        assert_eq!(assign_group(&[2.5], 3.0), 1);
        assert_eq!(assign_group(&[1.0, 5.0], 3.0), 1);
        assert_eq!(assign_group(&[1.0, 5.0], 1.0), 0);
        assert_eq!(assign_group(&[1.0, 5.0], 5.0), 1);
        assert_eq!(assign_group(&[1.0, 5.0], 7.0), 2);
        assert_eq!(assign_group(&[], 7.0), 0);
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in [
            DiscretizerKind::BinaryMedian,
            DiscretizerKind::BinaryEntropy,
            DiscretizerKind::Quartile,
            DiscretizerKind::Decile,
            DiscretizerKind::Entropy,
        ] {
            assert_eq!(kind.to_string().parse::<DiscretizerKind>().unwrap(), kind);
        }
        assert!("median".parse::<DiscretizerKind>().is_err());
    }

    #[test]
    fn fit_covers_numeric_features_only() {
        let data = crate::data::synth_two_class(50, 2.0, 7).unwrap();
        let d = Discretizer::fit(DiscretizerKind::BinaryEntropy, &data, 3).unwrap();
        assert_eq!(d.thresholds.len(), 6);
        for f in 0..4 {
            assert!(d.thresholds[f].len() <= 1, "binary kind: at most one threshold");
        }
        assert!(d.thresholds[4].is_empty(), "categorical features carry no thresholds");
        assert!(d.thresholds[5].is_empty());
    }
}
