use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{Dataset, FeatureKind};
use crate::error::{CalexError, Result};
use crate::model::ScoringModel;

/// How a split node routes instances to its left child.
#[derive(Debug, Clone, PartialEq)]
pub enum SplitKind {
    /// Left iff value <= threshold.
    Numeric { threshold: f64 },
    /// Left iff the category index is in the (sorted) value set.
    Categorical { values: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// Laplace-smoothed class-1 frequency: (positives + 1) / (count + 2).
    Leaf { p1: f64 },
    Split { feature: usize, kind: SplitKind, left: usize, right: usize },
}

/// A greedy entropy-gain decision tree.
///
/// Nodes whose labels are mixed are split whenever any valid candidate
/// exists, even at zero gain — two zero-gain splits can still separate
/// XOR-like patterns. Ties are broken toward the smallest feature index,
/// then the smallest threshold or category value, so training is a
/// deterministic function of its inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeModel {
    nodes: Vec<Node>,
    n_features: usize,
    trained_on: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
}

/// Trains a tree on the full dataset. `seed` only matters when feature
/// subsampling is enabled (the forest trainer's case); plain trees are
/// fully deterministic in the data.
pub fn train_tree(data: &Dataset, max_depth: usize, min_leaf: usize, seed: u64) -> Result<TreeModel> {
    let rows: Vec<usize> = (0..data.n()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    train_tree_on_rows(data, &rows, max_depth, min_leaf, 1.0, &mut rng)
}

/// Trains a tree on a row subset with optional per-split feature
/// subsampling (used by the forest trainer).
pub(crate) fn train_tree_on_rows(
    data: &Dataset,
    rows: &[usize],
    max_depth: usize,
    min_leaf: usize,
    feature_subsample: f64,
    rng: &mut ChaCha8Rng,
) -> Result<TreeModel> {
    if rows.is_empty() {
        return Err(CalexError::data("cannot train a tree on an empty dataset".to_string()));
    }
    if min_leaf == 0 {
        return Err(CalexError::config("min_leaf must be at least 1".to_string()));
    }
    if !(feature_subsample > 0.0 && feature_subsample <= 1.0) {
        return Err(CalexError::config(format!(
            "feature_subsample must be in (0,1], got {feature_subsample}"
        )));
    }
    let mut builder = Builder { data, max_depth, min_leaf, feature_subsample, rng, nodes: Vec::new() };
    builder.build(rows.to_vec(), 0);
    Ok(TreeModel {
        nodes: builder.nodes,
        n_features: data.n_features(),
        trained_on: rows.len(),
        max_depth,
        min_leaf,
    })
}

struct Builder<'a> {
    data: &'a Dataset,
    max_depth: usize,
    min_leaf: usize,
    feature_subsample: f64,
    rng: &'a mut ChaCha8Rng,
    nodes: Vec<Node>,
}

struct Candidate {
    gain: f64,
    feature: usize,
    kind: SplitKind,
}

impl<'a> Builder<'a> {
    /// Builds the subtree over `rows`, returning its node index.
    fn build(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let positives = rows.iter().filter(|&&i| self.data.y[i] == 1).count();
        let make_leaf = |nodes: &mut Vec<Node>| {
            let p1 = (positives as f64 + 1.0) / (rows.len() as f64 + 2.0);
            nodes.push(Node::Leaf { p1 });
            nodes.len() - 1
        };
        if depth >= self.max_depth || positives == 0 || positives == rows.len() {
            return make_leaf(&mut self.nodes);
        }
        let candidate = match self.best_split(&rows) {
            Some(c) => c,
            None => return make_leaf(&mut self.nodes),
        };
        let (left_rows, right_rows) = partition(self.data, &rows, candidate.feature, &candidate.kind);
        debug_assert!(!left_rows.is_empty() && !right_rows.is_empty());

        let index = self.nodes.len();
        self.nodes.push(Node::Leaf { p1: 0.0 }); // placeholder, patched below
        let left = self.build(left_rows, depth + 1);
        let right = self.build(right_rows, depth + 1);
        self.nodes[index] =
            Node::Split { feature: candidate.feature, kind: candidate.kind, left, right };
        index
    }

    /// The highest-gain valid split over the (possibly subsampled)
    /// features. Ties keep the first candidate in (feature, threshold)
    /// order. Returns `None` when no split satisfies `min_leaf` on both
    /// sides.
    fn best_split(&mut self, rows: &[usize]) -> Option<Candidate> {
        let features = self.candidate_features();
        let n = rows.len() as f64;
        let positives = rows.iter().filter(|&&i| self.data.y[i] == 1).count() as f64;
        let parent = entropy(positives, n);
        let mut best: Option<Candidate> = None;

        for feature in features {
            match &self.data.schema.features[feature].kind {
                FeatureKind::Numeric => {
                    let mut pairs: Vec<(f64, u8)> =
                        rows.iter().map(|&i| (self.data.x[i][feature], self.data.y[i])).collect();
                    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite features"));
                    let mut left_n = 0.0;
                    let mut left_pos = 0.0;
                    for w in 0..pairs.len() - 1 {
                        left_n += 1.0;
                        left_pos += pairs[w].1 as f64;
                        if pairs[w].0 == pairs[w + 1].0 {
                            continue;
                        }
                        if (left_n as usize) < self.min_leaf
                            || ((n - left_n) as usize) < self.min_leaf
                        {
                            continue;
                        }
                        let threshold = pairs[w].0 + (pairs[w + 1].0 - pairs[w].0) / 2.0;
                        let gain = parent
                            - (left_n / n) * entropy(left_pos, left_n)
                            - ((n - left_n) / n) * entropy(positives - left_pos, n - left_n);
                        consider(&mut best, Candidate {
                            gain,
                            feature,
                            kind: SplitKind::Numeric { threshold },
                        });
                    }
                }
                FeatureKind::Categorical { values } => {
                    let mut count = vec![0.0f64; values.len()];
                    let mut pos = vec![0.0f64; values.len()];
                    for &i in rows {
                        let v = self.data.x[i][feature] as usize;
                        count[v] += 1.0;
                        pos[v] += self.data.y[i] as f64;
                    }
                    for v in 0..values.len() {
                        let left_n = count[v];
                        if left_n == 0.0 || left_n == n {
                            continue;
                        }
                        if (left_n as usize) < self.min_leaf || ((n - left_n) as usize) < self.min_leaf {
                            continue;
                        }
                        let gain = parent
                            - (left_n / n) * entropy(pos[v], left_n)
                            - ((n - left_n) / n) * entropy(positives - pos[v], n - left_n);
                        consider(&mut best, Candidate {
                            gain,
                            feature,
                            kind: SplitKind::Categorical { values: vec![v] },
                        });
                    }
                }
            }
        }
        best
    }

    /// All features, or a deterministic random subset when subsampling.
    fn candidate_features(&mut self) -> Vec<usize> {
        let f = self.data.n_features();
        if self.feature_subsample >= 1.0 {
            return (0..f).collect();
        }
        let amount = ((self.feature_subsample * f as f64).round() as usize).clamp(1, f);
        let mut picked = rand::seq::index::sample(self.rng, f, amount).into_vec();
        picked.sort_unstable();
        picked
    }
}

fn consider(best: &mut Option<Candidate>, candidate: Candidate) {
    let better = match best {
        None => true,
        Some(b) => candidate.gain > b.gain,
    };
    if better {
        *best = Some(candidate);
    }
}

fn partition(
    data: &Dataset,
    rows: &[usize],
    feature: usize,
    kind: &SplitKind,
) -> (Vec<usize>, Vec<usize>) {
    let mut left = Vec::new();
    let mut right = Vec::new();
    for &i in rows {
        if goes_left(data.x[i][feature], kind) {
            left.push(i);
        } else {
            right.push(i);
        }
    }
    (left, right)
}

fn goes_left(value: f64, kind: &SplitKind) -> bool {
    match kind {
        SplitKind::Numeric { threshold } => value <= *threshold,
        SplitKind::Categorical { values } => values.binary_search(&(value as usize)).is_ok(),
    }
}

/// Binary entropy in bits of a (positives, total) composition.
fn entropy(positives: f64, total: f64) -> f64 {
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

impl TreeModel {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    fn leaf_value(&self, instance: &[f64]) -> Result<f64> {
        if instance.len() != self.n_features {
            return Err(CalexError::data(format!(
                "schema mismatch: model expects {} features, instance has {}",
                self.n_features,
                instance.len()
            )));
        }
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { p1 } => return Ok(*p1),
                Node::Split { feature, kind, left, right } => {
                    at = if goes_left(instance[*feature], kind) { *left } else { *right };
                }
            }
        }
    }
}

impl ScoringModel for TreeModel {
    fn score(&self, instance: &[f64]) -> Result<f64> {
        self.leaf_value(instance)
    }

    fn kind(&self) -> String {
        "tree".to_string()
    }

    fn trained_on(&self) -> usize {
        self.trained_on
    }
}
