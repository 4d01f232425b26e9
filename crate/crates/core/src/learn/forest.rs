//! Random forest: bagged trees with per-split feature subsampling.
//!
//! Each tree's randomness derives from `(seed, tree_index)`, so a model is
//! reproducible from `(dataset, params, seed)` no matter how training work
//! is scheduled, and prediction is invariant under tree order.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::features::SchemaId;
use crate::seed::{rng_for, stream};

use super::tree::{grow, TreeNode};
use super::{Example, ForestParams, LearnError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeNode>,
    pub params: ForestParams,
    pub schema_id: SchemaId,
}

impl ForestModel {
    /// Mean of per-tree leaf posteriors.
    pub fn score(&self, values: &[f64]) -> Result<f64, LearnError> {
        let sum: f64 = self.trees.iter().map(|t| t.score(values)).sum();
        Ok(sum / self.trees.len() as f64)
    }
}

/// Sample `m` distinct feature indices out of `d`, returned sorted so split
/// scanning keeps its deterministic tie-break order.
fn sample_features<R: Rng>(rng: &mut R, d: usize, m: usize) -> Vec<usize> {
    if m >= d {
        return (0..d).collect();
    }
    let mut pool: Vec<usize> = (0..d).collect();
    for i in 0..m {
        let j = rng.gen_range(i..d);
        pool.swap(i, j);
    }
    let mut picked = pool[..m].to_vec();
    picked.sort_unstable();
    picked
}

pub fn train_forest(data: &[Example], params: &ForestParams) -> Result<ForestModel, LearnError> {
    if data.is_empty() {
        return Err(LearnError::EmptyDataset);
    }
    if params.n_trees == 0 {
        return Err(LearnError::TooFewSamples {
            reason: "forest needs at least one tree".into(),
        });
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
    let n = data.len();
    let m = params.feature_subsample.count(arity);
    let trees = (0..params.n_trees)
        .map(|tree_index| {
            let mut rng = rng_for(params.seed, stream::FOREST_TREE, tree_index as u64);
            let rows: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let mut pick = || sample_features(&mut rng, arity, m);
            grow(data, &rows, 0, &params.tree, &mut pick)
        })
        .collect();
    Ok(ForestModel {
        trees,
        params: *params,
        schema_id,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::Label;
    use crate::features::FeatureVector;
    use crate::learn::{train_tree, FeatureSubsample, TreeParams};
    use rand::Rng;

    fn ex(values: &[f64], co: bool) -> Example {
        (
            FeatureVector {
                values: values.to_vec(),
                schema_id: SchemaId(1),
            },
            if co {
                Label::CoPresent
            } else {
                Label::NonCoPresent
            },
        )
    }

    fn separable(n: usize) -> Vec<Example> {
        let mut rng = rng_for(11, stream::FOREST_TREE, 999);
        (0..n)
            .map(|_| {
                let co: bool = rng.gen_bool(0.5);
                let base = if co { 0.2 } else { 0.8 };
                ex(
                    &[base + rng.gen_range(-0.15..0.15), rng.gen_range(0.0..1.0)],
                    co,
                )
            })
            .collect()
    }

    #[test]
    fn degenerate_forest_equals_single_tree() {
        let data = separable(60);
        let params = ForestParams {
            n_trees: 1,
            bootstrap: false,
            feature_subsample: FeatureSubsample::Fraction(1.0),
            seed: 3,
            tree: TreeParams::default(),
        };
        let forest = train_forest(&data, &params).unwrap();
        let tree = train_tree(&data, &TreeParams::default()).unwrap();
        assert_eq!(forest.trees[0], tree.root);
    }

    #[test]
    fn same_seed_same_model() {
        let data = separable(80);
        let params = ForestParams {
            seed: 42,
            ..ForestParams::default()
        };
        let f1 = train_forest(&data, &params).unwrap();
        let f2 = train_forest(&data, &params).unwrap();
        assert_eq!(f1, f2);
    }

    #[test]
    fn separable_data_trains_to_zero_error() {
        let data = separable(100);
        let params = ForestParams {
            n_trees: 25,
            seed: 7,
            ..ForestParams::default()
        };
        let forest = train_forest(&data, &params).unwrap();
        for (fv, label) in &data {
            let co = forest.score(&fv.values).unwrap() >= 0.5;
            assert_eq!(co, label.is_co_present());
        }
    }

    #[test]
    fn prediction_invariant_under_tree_order() {
        let data = separable(60);
        let params = ForestParams {
            n_trees: 9,
            seed: 5,
            ..ForestParams::default()
        };
        let forest = train_forest(&data, &params).unwrap();
        let mut reversed = forest.clone();
        reversed.trees.reverse();
        for (fv, _) in &data {
            assert_eq!(
                forest.score(&fv.values).unwrap(),
                reversed.score(&fv.values).unwrap()
            );
        }
    }

    #[test]
    fn sampled_features_are_sorted_and_distinct() {
        let mut rng = rng_for(1, stream::FOREST_TREE, 0);
        for _ in 0..100 {
            let picked = sample_features(&mut rng, 18, 5);
            assert_eq!(picked.len(), 5);
            assert!(picked.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
