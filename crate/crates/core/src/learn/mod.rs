//! Native decision-tree and random-forest classifiers plus the evaluation
//! mechanics: stratified k-fold cross validation, rotation under-sampling and
//! confusion-count metrics.

mod folds;
mod forest;
mod metrics;
mod tree;

pub use folds::{stratified_kfold, undersample_rounds, FoldPlan};
pub use forest::{train_forest, ForestModel};
pub use metrics::{compute_metrics, Metrics};
pub use tree::{train_tree, DecisionTree, TreeNode};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::context::Label;
use crate::features::{FeatureVector, SchemaId};

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("empty dataset")]
    EmptyDataset,
    #[error("feature vector schema {vector} does not match model schema {model}")]
    SchemaMismatch { vector: SchemaId, model: SchemaId },
    #[error("inconsistent vector arity: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("too few samples: {reason}")]
    TooFewSamples { reason: String },
    #[error("predictions ({predictions}) and labels ({labels}) differ in length")]
    LengthMismatch { predictions: usize, labels: usize },
}

/// Impurity criterion for split selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SplitCriterion {
    #[default]
    Gini,
}

/// How many features each split considers.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum FeatureSubsample {
    /// ceil(sqrt(d)) features per split; the usual forest default.
    #[default]
    Sqrt,
    /// max(1, ceil(fraction * d)) features per split. 1.0 uses every feature.
    Fraction(f64),
}

impl FeatureSubsample {
    pub fn count(self, n_features: usize) -> usize {
        match self {
            FeatureSubsample::Sqrt => (n_features as f64).sqrt().ceil() as usize,
            FeatureSubsample::Fraction(f) => {
                ((n_features as f64 * f).ceil() as usize).clamp(1, n_features)
            }
        }
        .clamp(1, n_features)
    }
}

/// Tree-induction parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
    pub split_criterion: SplitCriterion,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: 10,
            min_leaf: 2,
            split_criterion: SplitCriterion::Gini,
        }
    }
}

/// Forest parameters; a forest of one tree without bagging and with full
/// feature sampling degenerates to a single decision tree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub feature_subsample: FeatureSubsample,
    pub bootstrap: bool,
    pub seed: u64,
    pub tree: TreeParams,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 25,
            feature_subsample: FeatureSubsample::Sqrt,
            bootstrap: true,
            seed: 0,
            tree: TreeParams::default(),
        }
    }
}

/// Which classifier an experiment trains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassifierKind {
    #[serde(rename = "tree")]
    Tree,
    #[serde(rename = "forest")]
    Forest,
}

impl std::fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ClassifierKind::Tree => f.write_str("tree"),
            ClassifierKind::Forest => f.write_str("forest"),
        }
    }
}

/// A trained model of either kind, tagged with its schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainedClassifier {
    Tree(DecisionTree),
    Forest(ForestModel),
}

impl TrainedClassifier {
    pub fn schema_id(&self) -> SchemaId {
        match self {
            TrainedClassifier::Tree(t) => t.schema_id,
            TrainedClassifier::Forest(f) => f.schema_id,
        }
    }

    /// Classify a vector: `(label, score)` with score in [0, 1] and a score
    /// of exactly 0.5 classifying co-present. Fusion layers own the
    /// fail-secure tie policy; the raw classifier keeps the documented
    /// threshold rule.
    pub fn predict(&self, fv: &FeatureVector) -> Result<(Label, f64), LearnError> {
        if fv.schema_id != self.schema_id() {
            return Err(LearnError::SchemaMismatch {
                vector: fv.schema_id,
                model: self.schema_id(),
            });
        }
        let score = match self {
            TrainedClassifier::Tree(t) => t.score(&fv.values)?,
            TrainedClassifier::Forest(f) => f.score(&fv.values)?,
        };
        let label = if score >= 0.5 {
            Label::CoPresent
        } else {
            Label::NonCoPresent
        };
        Ok((label, score))
    }
}

/// Shorthand used across the learn module: one training example.
pub type Example = (FeatureVector, Label);
