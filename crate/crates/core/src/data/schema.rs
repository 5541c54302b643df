use crate::error::{CalexError, Result};

/// The kind of a feature column.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureKind {
    /// Real-valued feature.
    Numeric,
    /// Categorical feature with a fixed, ordered list of value codes.
    /// Cells store the index into this list.
    Categorical { values: Vec<String> },
}

impl FeatureKind {
    pub fn is_numeric(&self) -> bool {
        matches!(self, FeatureKind::Numeric)
    }

    pub fn is_categorical(&self) -> bool {
        !self.is_numeric()
    }
}

/// One feature column: a unique name plus its kind.
#[derive(Debug, Clone, PartialEq)]
pub struct Feature {
    pub name: String,
    pub kind: FeatureKind,
}

impl Feature {
    pub fn numeric(name: impl Into<String>) -> Self {
        Feature { name: name.into(), kind: FeatureKind::Numeric }
    }

    pub fn categorical(name: impl Into<String>, values: Vec<String>) -> Self {
        Feature { name: name.into(), kind: FeatureKind::Categorical { values } }
    }
}

/// Schema for a dataset: the feature columns plus label metadata.
///
/// `label_values` maps the two raw label strings to classes 0 and 1; by
/// default the lexicographically smaller raw value becomes class 0.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSchema {
    pub features: Vec<Feature>,
    pub label_name: String,
    pub label_values: [String; 2],
}

impl FeatureSchema {
    pub fn new(
        features: Vec<Feature>,
        label_name: impl Into<String>,
        label_values: [String; 2],
    ) -> Result<Self> {
        let schema =
            FeatureSchema { features, label_name: label_name.into(), label_values };
        schema.validate()?;
        Ok(schema)
    }

    /// Checks name uniqueness and categorical value-list sanity.
    pub fn validate(&self) -> Result<()> {
        let mut names: Vec<&str> = self.features.iter().map(|f| f.name.as_str()).collect();
        names.push(self.label_name.as_str());
        let mut sorted = names.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(CalexError::data("duplicate column names in schema"));
        }
        if self.label_values[0] == self.label_values[1] {
            return Err(CalexError::data("label values must be distinct"));
        }
        for f in &self.features {
            if let FeatureKind::Categorical { values } = &f.kind {
                if values.is_empty() {
                    return Err(CalexError::data(format!(
                        "categorical feature '{}' has no values",
                        f.name
                    )));
                }
                let mut v = values.clone();
                v.sort_unstable();
                if v.windows(2).any(|w| w[0] == w[1]) {
                    return Err(CalexError::data(format!(
                        "categorical feature '{}' has duplicate values",
                        f.name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    /// Index of the feature with the given name, if any.
    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    /// The display label for a categorical cell value, or `None` for
    /// numeric features or out-of-range indices.
    pub fn category_label(&self, feature: usize, value_index: usize) -> Option<&str> {
        match &self.features.get(feature)?.kind {
            FeatureKind::Categorical { values } => values.get(value_index).map(|s| s.as_str()),
            FeatureKind::Numeric => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicate_names() {
        let schema = FeatureSchema {
            features: vec![Feature::numeric("a"), Feature::numeric("a")],
            label_name: "y".into(),
            label_values: ["0".into(), "1".into()],
        };
        assert!(schema.validate().is_err());
    }

    #[test]
    fn rejects_label_clash_with_feature() {
        let schema = FeatureSchema {
            features: vec![Feature::numeric("y")],
            label_name: "y".into(),
            label_values: ["0".into(), "1".into()],
        };
        assert!(schema.validate().is_err());
    }

    #[test]
    fn rejects_empty_categorical() {
        let schema = FeatureSchema {
            features: vec![Feature::categorical("c", vec![])],
            label_name: "y".into(),
            label_values: ["0".into(), "1".into()],
        };
        assert!(schema.validate().is_err());
    }

    #[test]
    fn category_label_lookup() {
        let schema = FeatureSchema::new(
            vec![Feature::categorical("c", vec!["a".into(), "b".into()]), Feature::numeric("x")],
            "y",
            ["no".into(), "yes".into()],
        )
        .unwrap();
        assert_eq!(schema.category_label(0, 1), Some("b"));
        assert_eq!(schema.category_label(0, 2), None);
        assert_eq!(schema.category_label(1, 0), None);
        assert_eq!(schema.feature_index("x"), Some(1));
    }
}
