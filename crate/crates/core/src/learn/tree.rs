//! Greedy top-down decision-tree induction minimizing Gini impurity.
//!
//! Induction is deterministic for a fixed data order and parameter set:
//! candidate thresholds are midpoints between consecutive distinct feature
//! values, and ties between equally good splits resolve to the lowest
//! feature index, then the lowest threshold.

use serde::{Deserialize, Serialize};

use crate::features::SchemaId;

use super::{Example, LearnError, TreeParams};

/// A tree node: internal nodes split on `values[feature] <= threshold`
/// (left) vs `>` (right); leaves carry the co-present posterior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        p_copresent: f64,
        n_samples: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn score(&self, values: &[f64]) -> f64 {
        match self {
            TreeNode::Leaf { p_copresent, .. } => *p_copresent,
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if values[*feature] <= *threshold {
                    left.score(values)
                } else {
                    right.score(values)
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => 1 + left.node_count() + right.node_count(),
        }
    }
}

/// A trained tree plus the schema it expects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub root: TreeNode,
    pub schema_id: SchemaId,
    pub params: TreeParams,
}

impl DecisionTree {
    pub fn score(&self, values: &[f64]) -> Result<f64, LearnError> {
        Ok(self.root.score(values))
    }
}

fn gini(co: usize, non: usize) -> f64 {
    let n = co + non;
    if n == 0 {
        return 0.0;
    }
    let p = co as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

pub(crate) struct BestSplit {
    pub feature: usize,
    pub threshold: f64,
    pub weighted_impurity: f64,
}

/// Scan `features` (indices into the vectors) for the impurity-minimizing
/// split of `rows`. Returns `None` when no candidate satisfies `min_leaf`.
pub(crate) fn best_split(
    data: &[Example],
    rows: &[usize],
    features: &[usize],
    min_leaf: usize,
) -> Option<BestSplit> {
    let n = rows.len();
    let mut best: Option<BestSplit> = None;
    let mut column: Vec<(f64, bool)> = Vec::with_capacity(n);
    for &feature in features {
        column.clear();
        column.extend(
            rows.iter()
                .map(|&r| (data[r].0.values[feature], data[r].1.is_co_present())),
        );
        column.sort_by(|a, b| a.0.total_cmp(&b.0));

        let total_co = column.iter().filter(|(_, c)| *c).count();
        let mut left_co = 0usize;
        let mut left_n = 0usize;
        for i in 0..n - 1 {
            left_n += 1;
            if column[i].1 {
                left_co += 1;
            }
            if column[i].0 == column[i + 1].0 {
                continue;
            }
            let right_n = n - left_n;
            if left_n < min_leaf || right_n < min_leaf {
                continue;
            }
            let right_co = total_co - left_co;
            let weighted = (left_n as f64 * gini(left_co, left_n - left_co)
                + right_n as f64 * gini(right_co, right_n - right_co))
                / n as f64;
            let threshold = (column[i].0 + column[i + 1].0) / 2.0;
            let better = match &best {
                None => true,
                Some(b) => {
                    weighted < b.weighted_impurity
                        || (weighted == b.weighted_impurity
                            && (feature < b.feature
                                || (feature == b.feature && threshold < b.threshold)))
                }
            };
            if better {
                best = Some(BestSplit {
                    feature,
                    threshold,
                    weighted_impurity: weighted,
                });
            }
        }
    }
    best
}

/// Grow a subtree over `rows`. `pick_features` supplies the candidate
/// feature indices for each split (all features for a plain tree, a random
/// subset per node for forest trees).
pub(crate) fn grow<F>(
    data: &[Example],
    rows: &[usize],
    depth: usize,
    params: &TreeParams,
    pick_features: &mut F,
) -> TreeNode
where
    F: FnMut() -> Vec<usize>,
{
    let n = rows.len();
    let co = rows.iter().filter(|&&r| data[r].1.is_co_present()).count();
    let leaf = |co: usize, n: usize| TreeNode::Leaf {
        p_copresent: co as f64 / n as f64,
        n_samples: n,
    };
    if co == 0 || co == n || depth >= params.max_depth || n < 2 * params.min_leaf {
        return leaf(co, n);
    }
    let features = pick_features();
    let Some(split) = best_split(data, rows, &features, params.min_leaf) else {
        return leaf(co, n);
    };
    // Induction stops unless the split strictly decreases weighted impurity.
    if split.weighted_impurity >= gini(co, n - co) {
        return leaf(co, n);
    }
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .iter()
        .partition(|&&r| data[r].0.values[split.feature] <= split.threshold);
    let left = grow(data, &left_rows, depth + 1, params, pick_features);
    let right = grow(data, &right_rows, depth + 1, params, pick_features);
    TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(left),
        right: Box::new(right),
    }
}

/// Train a single decision tree on `(vector, label)` examples.
pub fn train_tree(data: &[Example], params: &TreeParams) -> Result<DecisionTree, LearnError> {
    if data.is_empty() {
        return Err(LearnError::EmptyDataset);
    }
    let schema_id = data[0].0.schema_id;
    let arity = data[0].0.values.len();
    for (fv, _) in data {
        if fv.schema_id != schema_id {
            return Err(LearnError::SchemaMismatch {
                vector: fv.schema_id,
                model: schema_id,
            });
        }
        if fv.values.len() != arity {
            return Err(LearnError::ArityMismatch {
                expected: arity,
                got: fv.values.len(),
            });
        }
    }
    let rows: Vec<usize> = (0..data.len()).collect();
    let all_features: Vec<usize> = (0..arity).collect();
    let mut pick = || all_features.clone();
    let root = grow(data, &rows, 0, params, &mut pick);
    Ok(DecisionTree {
        root,
        schema_id,
        params: *params,
    })
}
