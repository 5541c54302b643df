use crate::data::schema::{FeatureKind, FeatureSchema};
use crate::error::{CalexError, Result};

/// A tabular dataset with binary labels.
///
/// Rows are stored row-major; categorical cells hold the index of the value
/// in the schema's value list (as a real), numeric cells the value itself.
/// Datasets are immutable after construction and safe to share across
/// threads for concurrent reads.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub schema: FeatureSchema,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<u8>,
}

impl Dataset {
    /// Builds a dataset, checking row lengths, label values, and
    /// categorical index ranges.
    pub fn new(schema: FeatureSchema, x: Vec<Vec<f64>>, y: Vec<u8>) -> Result<Self> {
        schema.validate()?;
        if x.len() != y.len() {
            return Err(CalexError::data(format!(
                "{} rows but {} labels",
                x.len(),
                y.len()
            )));
        }
        let f = schema.n_features();
        for (i, row) in x.iter().enumerate() {
            if row.len() != f {
                return Err(CalexError::data(format!(
                    "row {} has {} cells, expected {}",
                    i,
                    row.len(),
                    f
                )));
            }
            for (j, (&cell, feat)) in row.iter().zip(&schema.features).enumerate() {
                if !cell.is_finite() {
                    return Err(CalexError::data(format!(
                        "row {i} column '{}' is not finite",
                        feat.name
                    )));
                }
                if let FeatureKind::Categorical { values } = &feat.kind {
                    let idx = cell as usize;
                    if cell.fract() != 0.0 || cell < 0.0 || idx >= values.len() {
                        return Err(CalexError::data(format!(
                            "row {i} column '{}' has invalid category index {cell} \
                             (feature has {} values); feature column {j}",
                            feat.name,
                            values.len()
                        )));
                    }
                }
            }
        }
        for (i, &label) in y.iter().enumerate() {
            if label > 1 {
                return Err(CalexError::data(format!("row {i} label {label} not in {{0,1}}")));
            }
        }
        Ok(Dataset { schema, x, y })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn n_features(&self) -> usize {
        self.schema.n_features()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i]
    }

    /// Copies one feature column.
    pub fn column(&self, feature: usize) -> Vec<f64> {
        self.x.iter().map(|row| row[feature]).collect()
    }

    /// Counts of classes 0 and 1.
    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.y.iter().filter(|&&l| l == 1).count();
        [self.y.len() - ones, ones]
    }

    /// A new dataset containing the given rows, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            x: indices.iter().map(|&i| self.x[i].clone()).collect(),
            y: indices.iter().map(|&i| self.y[i]).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::schema::Feature;

    fn schema() -> FeatureSchema {
        FeatureSchema::new(
            vec![Feature::numeric("x"), Feature::categorical("c", vec!["a".into(), "b".into()])],
            "y",
            ["0".into(), "1".into()],
        )
        .unwrap()
    }

    #[test]
    fn rejects_ragged_rows() {
        let err = Dataset::new(schema(), vec![vec![1.0]], vec![0]).unwrap_err();
        assert!(err.to_string().contains("row 0"));
    }

    #[test]
    fn rejects_out_of_range_category() {
        let err = Dataset::new(schema(), vec![vec![1.0, 2.0]], vec![0]).unwrap_err();
        assert!(err.to_string().contains("invalid category index"));
    }

    #[test]
    fn rejects_fractional_category() {
        assert!(Dataset::new(schema(), vec![vec![1.0, 0.5]], vec![0]).is_err());
    }

    #[test]
    fn rejects_bad_label() {
        assert!(Dataset::new(schema(), vec![vec![1.0, 0.0]], vec![2]).is_err());
    }

    #[test]
    fn subset_preserves_order() {
        let d = Dataset::new(
            schema(),
            vec![vec![1.0, 0.0], vec![2.0, 1.0], vec![3.0, 0.0]],
            vec![0, 1, 0],
        )
        .unwrap();
        let s = d.subset(&[2, 0]);
        assert_eq!(s.x, vec![vec![3.0, 0.0], vec![1.0, 0.0]]);
        assert_eq!(s.y, vec![0, 0]);
        assert_eq!(d.class_counts(), [2, 1]);
        assert_eq!(d.column(0), vec![1.0, 2.0, 3.0]);
    }
}
