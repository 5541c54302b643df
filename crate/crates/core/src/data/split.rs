use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::dataset::Dataset;
use crate::error::{CalexError, Result};

/// A proper-training / calibration partition of a dataset.
#[derive(Debug, Clone)]
pub struct SplitPair {
    pub proper_training: Dataset,
    pub calibration: Dataset,
    pub seed: u64,
}

/// One cross-validation fold.
#[derive(Debug, Clone)]
pub struct Fold {
    pub train: Dataset,
    pub test: Dataset,
    pub repeat: usize,
    pub fold: usize,
}

/// Splits row indices into (training, calibration) index lists, stratified
/// by class. The calibration part has `round(cal_fraction * n)` rows,
/// allocated across classes by largest remainder so per-class proportions
/// are respected. Both lists are returned in ascending row order.
pub fn train_cal_split_indices(
    y: &[u8],
    cal_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = y.len();
    if n < 4 {
        return Err(CalexError::data(format!("need at least 4 rows to split, got {n}")));
    }
    if !(cal_fraction > 0.0 && cal_fraction < 1.0) {
        return Err(CalexError::config(format!(
            "cal_fraction must be in (0,1), got {cal_fraction}"
        )));
    }
    let total_cal = (cal_fraction * n as f64).round() as usize;
    let per_class = class_indices(y);
    if per_class.iter().any(|c| c.is_empty()) {
        return Err(CalexError::data("both classes must be present to split".to_string()));
    }
    let quotas = largest_remainder_quotas(
        &per_class.iter().map(|c| c.len()).collect::<Vec<_>>(),
        total_cal,
        n,
    );
    for (class, (&quota, members)) in quotas.iter().zip(&per_class).enumerate() {
        if quota == 0 || quota == members.len() {
            return Err(CalexError::data(format!(
                "class {class} ({} rows) cannot appear in both parts at fraction \
                 {cal_fraction}",
                members.len()
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cal = Vec::with_capacity(total_cal);
    let mut train = Vec::with_capacity(n - total_cal);
    for (members, &quota) in per_class.iter().zip(&quotas) {
        let mut shuffled = members.clone();
        shuffled.shuffle(&mut rng);
        cal.extend_from_slice(&shuffled[..quota]);
        train.extend_from_slice(&shuffled[quota..]);
    }
    cal.sort_unstable();
    train.sort_unstable();
    Ok((train, cal))
}

/// Splits a dataset into proper-training and calibration parts. See
/// [`train_cal_split_indices`] for the allocation rules.
pub fn train_cal_split(data: &Dataset, cal_fraction: f64, seed: u64) -> Result<SplitPair> {
    let (train, cal) = train_cal_split_indices(&data.y, cal_fraction, seed)?;
    Ok(SplitPair {
        proper_training: data.subset(&train),
        calibration: data.subset(&cal),
        seed,
    })
}

/// Produces `k * repeats` (train, test) index pairs. Within each repeat the
/// test folds partition the data; each class is dealt round-robin across
/// folds so per-fold class counts stay within one of the global proportion.
pub fn stratified_kfold_indices(
    y: &[u8],
    k: usize,
    repeats: usize,
    seed: u64,
) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if k < 2 {
        return Err(CalexError::config(format!("k must be at least 2, got {k}")));
    }
    if repeats == 0 {
        return Err(CalexError::config("repeats must be at least 1".to_string()));
    }
    let per_class = class_indices(y);
    for (class, members) in per_class.iter().enumerate() {
        if members.len() < k {
            return Err(CalexError::data(format!(
                "class {class} has {} rows, fewer than k={k}",
                members.len()
            )));
        }
    }
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(k * repeats);
    for _ in 0..repeats {
        let repeat_seed: u64 = master.random();
        let mut rng = ChaCha8Rng::seed_from_u64(repeat_seed);
        let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
        for members in &per_class {
            let mut shuffled = members.clone();
            shuffled.shuffle(&mut rng);
            for (pos, idx) in shuffled.into_iter().enumerate() {
                folds[pos % k].push(idx);
            }
        }
        for test in &mut folds {
            test.sort_unstable();
        }
        for j in 0..k {
            let test = folds[j].clone();
            let mut train: Vec<usize> =
                folds.iter().enumerate().filter(|&(i, _)| i != j).flat_map(|(_, f)| f.iter().copied()).collect();
            train.sort_unstable();
            pairs.push((train, test));
        }
    }
    Ok(pairs)
}

/// Dataset-level wrapper around [`stratified_kfold_indices`].
pub fn stratified_kfold(data: &Dataset, k: usize, repeats: usize, seed: u64) -> Result<Vec<Fold>> {
    let pairs = stratified_kfold_indices(&data.y, k, repeats, seed)?;
    Ok(pairs
        .into_iter()
        .enumerate()
        .map(|(i, (train, test))| Fold {
            train: data.subset(&train),
            test: data.subset(&test),
            repeat: i / k,
            fold: i % k,
        })
        .collect())
}

fn class_indices(y: &[u8]) -> [Vec<usize>; 2] {
    let mut classes = [Vec::new(), Vec::new()];
    for (i, &label) in y.iter().enumerate() {
        classes[label as usize].push(i);
    }
    classes
}

/// Allocates `total` slots to classes proportionally to their sizes:
/// floor quotas first, then one extra slot per class in order of descending
/// fractional remainder (ties to the lower class index).
fn largest_remainder_quotas(class_sizes: &[usize], total: usize, n: usize) -> Vec<usize> {
    let raw: Vec<f64> = class_sizes.iter().map(|&c| total as f64 * c as f64 / n as f64).collect();
    let mut quotas: Vec<usize> = raw.iter().map(|&r| r.floor() as usize).collect();
    let mut leftover = total - quotas.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = raw[a] - raw[a].floor();
        let fb = raw[b] - raw[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    // The floor quotas undershoot by less than one slot per class.
    for &class in &order {
        if leftover == 0 {
            break;
        }
        quotas[class] += 1;
        leftover -= 1;
    }
    quotas
}
