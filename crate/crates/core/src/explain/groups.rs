use crate::calibrate::ProbabilityInterval;
use crate::data::{Dataset, FeatureKind};
use crate::discretize::{assign_group, percentile_sorted, Discretizer};

/// What part of a feature's value space a perturbation group covers.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupCoverage {
    /// One categorical value, by index into the schema's value list.
    Category { value: usize },
    /// The numeric interval (lower, upper]; `None` means unbounded.
    Range { lower: Option<f64>, upper: Option<f64> },
}

impl GroupCoverage {
    pub fn contains(&self, value: f64) -> bool {
        match self {
            GroupCoverage::Category { value: v } => value == *v as f64,
            GroupCoverage::Range { lower, upper } => {
                lower.map_or(true, |l| value > l) && upper.map_or(true, |u| value <= u)
            }
        }
    }
}

/// One group of replacement values for a feature.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationGroup {
    pub feature: usize,
    pub coverage: GroupCoverage,
    /// Values substituted into the instance when evaluating this group:
    /// the category value itself, or the group's [25th, 50th, 75th]
    /// percentiles over the calibration values it covers (the values
    /// themselves, deduplicated, when it covers fewer than three).
    /// Left empty for the numeric instance group, which is never evaluated.
    pub representatives: Vec<f64>,
    pub is_instance_group: bool,
}

/// Builds the perturbation groups for one feature of one instance.
///
/// Categorical features get one group per schema value. Numeric features
/// get the two or three groups bounded by the fitted thresholds
/// immediately surrounding the instance value; alternative groups covering
/// no calibration values are dropped. Features without thresholds
/// (categorical value lists of size one don't occur; constant numeric
/// features do) yield an empty list, marking the feature unexplainable.
pub(crate) fn build_groups(
    feature: usize,
    instance_value: f64,
    discretizer: &Discretizer,
    calibration: &Dataset,
) -> Vec<PerturbationGroup> {
    match &calibration.schema.features[feature].kind {
        FeatureKind::Categorical { values } => (0..values.len())
            .map(|v| PerturbationGroup {
                feature,
                coverage: GroupCoverage::Category { value: v },
                representatives: vec![v as f64],
                is_instance_group: v as f64 == instance_value,
            })
            .collect(),
        FeatureKind::Numeric => {
            let thresholds = &discretizer.thresholds[feature];
            if thresholds.is_empty() {
                return Vec::new();
            }
            let g = assign_group(thresholds, instance_value);
            let lower = (g > 0).then(|| thresholds[g - 1]);
            let upper = (g < thresholds.len()).then(|| thresholds[g]);

            let mut groups = Vec::with_capacity(3);
            if let Some(bound) = lower {
                groups.extend(alternative_range(
                    feature,
                    GroupCoverage::Range { lower: None, upper: Some(bound) },
                    calibration,
                ));
            }
            groups.push(PerturbationGroup {
                feature,
                coverage: GroupCoverage::Range { lower, upper },
                representatives: Vec::new(),
                is_instance_group: true,
            });
            if let Some(bound) = upper {
                groups.extend(alternative_range(
                    feature,
                    GroupCoverage::Range { lower: Some(bound), upper: None },
                    calibration,
                ));
            }
            groups
        }
    }
}

/// An alternative numeric group with percentile representatives, or `None`
/// when no calibration value falls inside it.
fn alternative_range(
    feature: usize,
    coverage: GroupCoverage,
    calibration: &Dataset,
) -> Option<PerturbationGroup> {
    let mut members: Vec<f64> = calibration
        .x
        .iter()
        .map(|row| row[feature])
        .filter(|&v| coverage.contains(v))
        .collect();
    if members.is_empty() {
        log::debug!("dropping empty perturbation group for feature {feature}: {coverage:?}");
        return None;
    }
    members.sort_by(|a, b| a.partial_cmp(b).expect("finite feature values"));
    let representatives = if members.len() < 3 {
        members.dedup();
        members
    } else {
        [25.0, 50.0, 75.0].iter().map(|&p| percentile_sorted(&members, p)).collect()
    };
    Some(PerturbationGroup { feature, coverage, representatives, is_instance_group: false })
}

/// The componentwise arithmetic mean of interval triples. A list whose
/// entries are all bitwise identical returns that entry unchanged — the
/// exact mean — so identity perturbations cancel exactly; otherwise the
/// three series are summed in order and divided, which preserves the
/// `p0 <= p <= p1` ordering.
pub(crate) fn average_interval(list: &[ProbabilityInterval]) -> ProbabilityInterval {
    debug_assert!(!list.is_empty());
    if list.windows(2).all(|w| w[0] == w[1]) {
        return list[0];
    }
    let k = list.len() as f64;
    ProbabilityInterval {
        p0: list.iter().map(|iv| iv.p0).sum::<f64>() / k,
        p1: list.iter().map(|iv| iv.p1).sum::<f64>() / k,
        p: list.iter().map(|iv| iv.p).sum::<f64>() / k,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Feature, FeatureSchema};
    use crate::discretize::{Discretizer, DiscretizerKind};

    fn numeric_cal(values: &[f64]) -> Dataset {
        let schema = FeatureSchema::new(
            vec![Feature::numeric("x")],
            "y",
            ["0".into(), "1".into()],
        )
        .unwrap();
        let y = (0..values.len()).map(|i| (i % 2) as u8).collect();
        Dataset::new(schema, values.iter().map(|&v| vec![v]).collect(), y).unwrap()
    }

    fn with_thresholds(thresholds: Vec<f64>) -> Discretizer {
        Discretizer {
            kind: DiscretizerKind::Entropy,
            thresholds: vec![thresholds],
            fallback: vec![false],
            entropy_depth: 3,
        }
    }

    #[test]
    fn categorical_groups_enumerate_schema_values() {
        let schema = FeatureSchema::new(
            vec![Feature::categorical("c", vec!["a".into(), "b".into()])],
            "y",
            ["0".into(), "1".into()],
        )
        .unwrap();
        let cal = Dataset::new(schema, vec![vec![0.0], vec![1.0]], vec![0, 1]).unwrap();
        let disc = Discretizer {
            kind: DiscretizerKind::BinaryEntropy,
            thresholds: vec![vec![]],
            fallback: vec![false],
            entropy_depth: 3,
        };
        let groups = build_groups(0, 1.0, &disc, &cal);
        assert_eq!(groups.len(), 2);
        assert!(!groups[0].is_instance_group);
        assert!(groups[1].is_instance_group);
        assert_eq!(groups[0].representatives, vec![0.0]);
    }

    #[test]
    fn binary_threshold_gives_two_groups() {
        let cal = numeric_cal(&[1.0, 2.0, 3.0, 4.0]);
        let groups = build_groups(0, 1.0, &with_thresholds(vec![2.5]), &cal);
        assert_eq!(groups.len(), 2);
        assert_eq!(
            groups[0].coverage,
            GroupCoverage::Range { lower: None, upper: Some(2.5) }
        );
        assert!(groups[0].is_instance_group);
        assert_eq!(
            groups[1].coverage,
            GroupCoverage::Range { lower: Some(2.5), upper: None }
        );
        // Two calibration values above 2.5: the values themselves.
        assert_eq!(groups[1].representatives, vec![3.0, 4.0]);
    }

    #[test]
    fn middle_instance_gets_three_groups() {
        let cal = numeric_cal(&[0.0, 0.5, 2.0, 3.0, 4.0, 6.0, 7.0, 9.0]);
        let groups = build_groups(0, 3.0, &with_thresholds(vec![1.0, 5.0]), &cal);
        assert_eq!(groups.len(), 3);
        assert_eq!(
            groups[0].coverage,
            GroupCoverage::Range { lower: None, upper: Some(1.0) }
        );
        assert!(groups[1].is_instance_group);
        assert!(groups[1].representatives.is_empty(), "instance group is never evaluated");
        assert_eq!(
            groups[2].coverage,
            GroupCoverage::Range { lower: Some(5.0), upper: None }
        );
    }

    #[test]
    fn outer_thresholds_do_not_bound_groups() {
        // Thresholds beyond the immediately surrounding pair are ignored:
        // the upper group spans everything above 5.0.
        let cal = numeric_cal(&[0.5, 3.0, 6.0, 8.0, 9.0, 10.0]);
        let groups = build_groups(0, 3.0, &with_thresholds(vec![1.0, 5.0, 7.0]), &cal);
        assert_eq!(groups.len(), 3);
        assert_eq!(
            groups[2].coverage,
            GroupCoverage::Range { lower: Some(5.0), upper: None }
        );
        assert_eq!(groups[2].representatives.len(), 3);
        assert!(groups[2].representatives.iter().all(|&r| r > 5.0));
    }

    #[test]
    fn empty_alternative_groups_are_dropped() {
        let cal = numeric_cal(&[1.0, 2.0, 2.2, 2.4]);
        // Nothing above 2.5: only the instance group and the lower group remain.
        let groups = build_groups(0, 2.6, &with_thresholds(vec![2.5]), &cal);
        assert_eq!(groups.len(), 2);
        assert!(groups[1].is_instance_group);
        assert!(!groups[0].is_instance_group);
    }

    #[test]
    fn no_thresholds_means_unexplainable() {
        let cal = numeric_cal(&[1.0, 1.0, 1.0, 1.0]);
        assert!(build_groups(0, 1.0, &with_thresholds(vec![]), &cal).is_empty());
    }

    #[test]
    fn percentile_representatives_within_coverage() {
        let cal = numeric_cal(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0]);
        let groups = build_groups(0, 0.5, &with_thresholds(vec![0.9]), &cal);
        let alt = &groups[1];
        assert_eq!(alt.representatives.len(), 3);
        for &r in &alt.representatives {
            assert!(alt.coverage.contains(r), "representative {r} outside coverage");
        }
    }

    #[test]
    fn averaging_means_componentwise() {
        let a = ProbabilityInterval { p0: 0.2, p1: 0.4, p: 0.3 };
        let b = ProbabilityInterval { p0: 0.4, p1: 0.6, p: 0.5 };
        let avg = average_interval(&[a, b]);
        assert!((avg.p0 - 0.3).abs() < 1e-15);
        assert!((avg.p1 - 0.5).abs() < 1e-15);
        assert!((avg.p - 0.4).abs() < 1e-15);
    }

    #[test]
    fn averaging_identical_intervals_is_exact() {
        let iv = ProbabilityInterval { p0: 1.0 / 3.0, p1: 2.0 / 3.0, p: 0.47 };
        let avg = average_interval(&[iv, iv, iv]);
        assert_eq!(avg, iv);
    }
}
