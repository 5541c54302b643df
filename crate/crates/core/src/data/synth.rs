use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::dataset::Dataset;
use crate::data::schema::{Feature, FeatureSchema};
use crate::error::{CalexError, Result};

/// Generates a mixed categorical + numeric two-class dataset.
///
/// Labels are balanced and shuffled; feature distributions are
/// class-conditional with the gap controlled by `separation` (0 gives
/// label-independent features). Identical `(n, separation, seed)` always
/// produce the identical dataset.
///
/// Features: four numerics of decreasing informativeness, one binary
/// categorical, and one three-value categorical.
pub fn synth_two_class(n: usize, separation: f64, seed: u64) -> Result<Dataset> {
    if n < 20 {
        return Err(CalexError::config(format!("synth_two_class needs n >= 20, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y = balanced_labels(n, &mut rng);

    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut x = Vec::with_capacity(n);
    // Class-conditional mean shifts per numeric feature.
    let shifts = [0.5, 0.25, 0.0, 0.4];
    // Probability that the binary categorical takes its second value.
    let p_b = [bounded(0.5 - 0.2 * separation), bounded(0.5 + 0.2 * separation)];
    // Per-class probabilities of the first two values of the three-value
    // categorical; the third takes the remainder.
    let p_three = [
        [bounded(1.0 / 3.0 + 0.15 * separation), 1.0 / 3.0],
        [bounded(1.0 / 3.0 - 0.15 * separation), 1.0 / 3.0],
    ];
    for &label in &y {
        let sign = if label == 1 { 1.0 } else { -1.0 };
        let mut row = Vec::with_capacity(6);
        for &shift in &shifts {
            row.push(unit.sample(&mut rng) + sign * shift * separation);
        }
        let u: f64 = rng.random();
        row.push(if u < p_b[label as usize] { 1.0 } else { 0.0 });
        let u: f64 = rng.random();
        let probs = &p_three[label as usize];
        let c = if u < probs[0] {
            0.0
        } else if u < probs[0] + probs[1] {
            1.0
        } else {
            2.0
        };
        row.push(c);
        x.push(row);
    }

    let schema = FeatureSchema::new(
        vec![
            Feature::numeric("x0"),
            Feature::numeric("x1"),
            Feature::numeric("x2"),
            Feature::numeric("x3"),
            Feature::categorical("c0", vec!["a".into(), "b".into()]),
            Feature::categorical("c1", vec!["u".into(), "v".into(), "w".into()]),
        ],
        "label",
        ["0".into(), "1".into()],
    )?;
    Dataset::new(schema, x, y)
}

/// Generates an all-numeric two-class dataset with `n_features` columns of
/// decreasing informativeness. Labels are balanced and shuffled.
pub fn synth_numeric(n: usize, n_features: usize, separation: f64, seed: u64) -> Result<Dataset> {
    if n < 4 || n_features == 0 {
        return Err(CalexError::config(format!(
            "synth_numeric needs n >= 4 and at least one feature, got n={n}, \
             n_features={n_features}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y = balanced_labels(n, &mut rng);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut x = Vec::with_capacity(n);
    for &label in &y {
        let sign = if label == 1 { 1.0 } else { -1.0 };
        let row = (0..n_features)
            .map(|f| {
                let shift = separation / (1.0 + f as f64);
                unit.sample(&mut rng) + sign * shift / 2.0
            })
            .collect();
        x.push(row);
    }
    let schema = FeatureSchema::new(
        (0..n_features).map(|f| Feature::numeric(format!("x{f}"))).collect(),
        "label",
        ["0".into(), "1".into()],
    )?;
    Dataset::new(schema, x, y)
}

fn balanced_labels(n: usize, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let mut y: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
    y.shuffle(rng);
    y
}

fn bounded(p: f64) -> f64 {
    p.clamp(0.05, 0.95)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::schema::FeatureKind;

    #[test]
    fn deterministic_per_seed() {
        let a = synth_two_class(50, 1.5, 9).unwrap();
        let b = synth_two_class(50, 1.5, 9).unwrap();
        assert_eq!(a, b);
        let c = synth_two_class(50, 1.5, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn smallest_allowed_has_both_classes() {
        let d = synth_two_class(20, 0.0, 3).unwrap();
        assert_eq!(d.n(), 20);
        let [zeros, ones] = d.class_counts();
        assert_eq!(zeros, 10);
        assert_eq!(ones, 10);
        assert!(synth_two_class(19, 0.0, 3).is_err());
    }

    #[test]
    fn schema_mixes_kinds() {
        let d = synth_two_class(30, 1.0, 1).unwrap();
        let numeric = d.schema.features.iter().filter(|f| f.kind.is_numeric()).count();
        assert_eq!(numeric, 4);
        assert_eq!(d.schema.features.len(), 6);
        assert!(matches!(
            &d.schema.features[5].kind,
            FeatureKind::Categorical { values } if values.len() == 3
        ));
    }

    #[test]
    fn numeric_generator_shapes() {
        let d = synth_numeric(768, 8, 2.0, 4).unwrap();
        assert_eq!(d.n(), 768);
        assert_eq!(d.n_features(), 8);
        assert!(d.schema.features.iter().all(|f| f.kind.is_numeric()));
        assert_eq!(d, synth_numeric(768, 8, 2.0, 4).unwrap());
    }
}
