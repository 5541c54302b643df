//! The scoring-classifier contract plus two built-in trainers and a wire
//! protocol bridge to external scorers.

mod external;
mod forest;
mod tree;

pub use external::{ExternalScorer, ScorerSpec};
pub use forest::{train_forest, ForestModel, ForestParams};
pub use tree::{train_tree, TreeModel};

use crate::error::Result;

/// A trained binary scoring classifier: maps an instance to a score in
/// [0,1] read as belief in class 1. Scoring is deterministic and
/// reentrant; trained models are immutable.
pub trait ScoringModel: Send + Sync {
    /// The prediction score for one instance, in [0,1].
    fn score(&self, instance: &[f64]) -> Result<f64>;

    /// Scores many instances. The default loops over [`ScoringModel::score`];
    /// implementations with per-call overhead (e.g. a wire protocol)
    /// override this with a pipelined path.
    fn score_batch(&self, instances: &[Vec<f64>]) -> Result<Vec<f64>> {
        instances.iter().map(|x| self.score(x)).collect()
    }

    /// A short identifier such as `"tree"`, `"forest"`, or `"external:…"`.
    fn kind(&self) -> String;

    /// Number of training instances, or 0 when unknown (external models).
    fn trained_on(&self) -> usize;

    /// Score threshold for the hard prediction rule.
    fn decision_threshold(&self) -> f64 {
        0.5
    }

    /// Hard class prediction: 1 iff score strictly exceeds the threshold.
    fn predict(&self, instance: &[f64]) -> Result<u8> {
        Ok(u8::from(self.score(instance)? > self.decision_threshold()))
    }
}
