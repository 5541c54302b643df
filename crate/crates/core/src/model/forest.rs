use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::error::{CalexError, Result};
use crate::model::tree::{train_tree_on_rows, TreeModel};
use crate::model::ScoringModel;

/// Hyperparameters for the bagged forest.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Sample rows with replacement per tree (bagging).
    pub bootstrap: bool,
    /// Fraction of features considered at each split, in (0,1].
    pub feature_subsample: f64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: 12,
            min_leaf: 1,
            bootstrap: true,
            feature_subsample: 1.0,
        }
    }
}

/// A bag of entropy trees; the score is the arithmetic mean of the trees'
/// leaf frequencies, hence strictly inside (0,1).
#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    trees: Vec<TreeModel>,
    trained_on: usize,
}

/// Trains a bagged forest. Per-tree seeds are drawn from a master stream
/// seeded with `seed`, so results are reproducible bit-for-bit.
pub fn train_forest(data: &Dataset, params: &ForestParams, seed: u64) -> Result<ForestModel> {
    if params.n_trees == 0 {
        return Err(CalexError::config("forest needs at least one tree".to_string()));
    }
    if data.n() == 0 {
        return Err(CalexError::data("cannot train a forest on an empty dataset".to_string()));
    }
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let n = data.n();
    let mut trees = Vec::with_capacity(params.n_trees);
    for _ in 0..params.n_trees {
        let tree_seed: u64 = master.random();
        let mut rng = ChaCha8Rng::seed_from_u64(tree_seed);
        let rows: Vec<usize> = if params.bootstrap {
            (0..n).map(|_| rng.random_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        trees.push(train_tree_on_rows(
            data,
            &rows,
            params.max_depth,
            params.min_leaf,
            params.feature_subsample,
            &mut rng,
        )?);
    }
    Ok(ForestModel { trees, trained_on: n })
}

impl ForestModel {
    pub fn trees(&self) -> &[TreeModel] {
        &self.trees
    }
}

impl ScoringModel for ForestModel {
    fn score(&self, instance: &[f64]) -> Result<f64> {
        let mut sum = 0.0;
        for tree in &self.trees {
            sum += tree.score(instance)?;
        }
        Ok(sum / self.trees.len() as f64)
    }

    fn kind(&self) -> String {
        "forest".to_string()
    }

    fn trained_on(&self) -> usize {
        self.trained_on
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synth_two_class;
    use crate::model::tree::train_tree;

    #[test]
    fn single_tree_without_bootstrap_matches_tree() {
        let data = synth_two_class(80, 1.0, 3).unwrap();
        let params = ForestParams {
            n_trees: 1,
            max_depth: 5,
            min_leaf: 1,
            bootstrap: false,
            feature_subsample: 1.0,
        };
        let forest = train_forest(&data, &params, 17).unwrap();
        let tree = train_tree(&data, 5, 1, 17).unwrap();
        for i in 0..data.n() {
            let f = forest.score(data.row(i)).unwrap();
            let t = tree.score(data.row(i)).unwrap();
            assert_eq!(f.to_bits(), t.to_bits(), "row {i}");
        }
    }

    #[test]
    fn same_seed_reproduces_scores() {
        let data = synth_two_class(60, 1.0, 9).unwrap();
        let params = ForestParams { n_trees: 12, max_depth: 6, ..Default::default() };
        let a = train_forest(&data, &params, 4).unwrap();
        let b = train_forest(&data, &params, 4).unwrap();
        for i in 0..data.n() {
            assert_eq!(
                a.score(data.row(i)).unwrap().to_bits(),
                b.score(data.row(i)).unwrap().to_bits()
            );
        }
        let c = train_forest(&data, &params, 5).unwrap();
        let diff = (0..data.n())
            .any(|i| a.score(data.row(i)).unwrap() != c.score(data.row(i)).unwrap());
        assert!(diff, "different seeds should train different forests");
    }

    #[test]
    fn score_is_mean_of_trees() {
        let data = synth_two_class(60, 1.5, 2).unwrap();
        let params = ForestParams { n_trees: 7, max_depth: 4, ..Default::default() };
        let forest = train_forest(&data, &params, 1).unwrap();
        for i in 0..10 {
            let mean: f64 = forest
                .trees()
                .iter()
                .map(|t| t.score(data.row(i)).unwrap())
                .sum::<f64>()
                / 7.0;
            let got = forest.score(data.row(i)).unwrap();
            assert!((got - mean).abs() <= 1e-12);
            assert!(got > 0.0 && got < 1.0, "Laplace smoothing keeps scores off {{0,1}}");
        }
    }

    #[test]
    fn separated_classes_get_separated_scores() {
        let data = synth_two_class(200, 3.0, 11).unwrap();
        let forest = train_forest(&data, &ForestParams::default(), 8).unwrap();
        let mut mean = [0.0f64; 2];
        let mut count = [0.0f64; 2];
        for i in 0..data.n() {
            let label = data.y[i] as usize;
            mean[label] += forest.score(data.row(i)).unwrap();
            count[label] += 1.0;
        }
        let m0 = mean[0] / count[0];
        let m1 = mean[1] / count[1];
        assert!(m1 - m0 > 0.4, "class means too close: {m0} vs {m1}");
    }
}
