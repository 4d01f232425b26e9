//! Cross-validation fold planning and rotation under-sampling.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::context::{ContextPair, Label};
use crate::seed::{rng_for, stream};

use super::LearnError;

/// A k-fold partition of pair ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub folds: Vec<Vec<String>>,
    pub stratified: bool,
    pub seed: u64,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.folds.len()
    }
}

/// Stratified k-fold split: each class is shuffled with a seeded RNG and
/// dealt round-robin, so per-fold class ratios differ by at most one sample.
pub fn stratified_kfold(
    pairs: &[ContextPair],
    k: usize,
    seed: u64,
) -> Result<FoldPlan, LearnError> {
    if k == 0 {
        return Err(LearnError::TooFewSamples {
            reason: "k must be positive".into(),
        });
    }
    let mut co: Vec<&str> = Vec::new();
    let mut non: Vec<&str> = Vec::new();
    for p in pairs {
        match p.label {
            Label::CoPresent => co.push(&p.pair_id),
            Label::NonCoPresent => non.push(&p.pair_id),
        }
    }
    for (class, ids) in [("co-present", &co), ("non-co-present", &non)] {
        if ids.len() < k {
            return Err(LearnError::TooFewSamples {
                reason: format!("{} {class} pairs for {k} folds", ids.len()),
            });
        }
    }
    let mut rng = rng_for(seed, stream::FOLD_SHUFFLE, 0);
    co.shuffle(&mut rng);
    non.shuffle(&mut rng);

    let mut folds: Vec<Vec<String>> = vec![Vec::new(); k];
    for (i, id) in co.iter().chain(non.iter()).enumerate() {
        folds[i % k].push((*id).to_string());
    }
    Ok(FoldPlan {
        folds,
        stratified: true,
        seed,
    })
}

/// Split the non-co-present pairs into `n_subsets` near-equal subsets and
/// build one round per rotation offset: round `r` takes subsets
/// `{r, ..., r + per_round - 1}` (mod `n_subsets`) plus every co-present
/// pair. Each non-co pair therefore lands in exactly `per_round` of the
/// `n_subsets` rounds, and aggregating confusion counts over all rounds
/// weighs every pair equally.
pub fn undersample_rounds<'a>(
    non_co: &'a [ContextPair],
    co: &'a [ContextPair],
    n_subsets: usize,
    per_round: usize,
) -> Result<Vec<Vec<&'a ContextPair>>, LearnError> {
    if n_subsets == 0 || per_round == 0 || per_round > n_subsets {
        return Err(LearnError::TooFewSamples {
            reason: format!("invalid rotation: {per_round} of {n_subsets} subsets"),
        });
    }
    if non_co.len() < n_subsets {
        return Err(LearnError::TooFewSamples {
            reason: format!(
                "{} non-co-present pairs for {n_subsets} subsets",
                non_co.len()
            ),
        });
    }
    // Near-equal chunks: the first len % n_subsets subsets get one extra.
    let base = non_co.len() / n_subsets;
    let extra = non_co.len() % n_subsets;
    let mut subsets: Vec<&[ContextPair]> = Vec::with_capacity(n_subsets);
    let mut start = 0;
    for s in 0..n_subsets {
        let size = base + usize::from(s < extra);
        subsets.push(&non_co[start..start + size]);
        start += size;
    }

    let rounds = (0..n_subsets)
        .map(|r| {
            let mut round: Vec<&ContextPair> = Vec::new();
            for offset in 0..per_round {
                round.extend(subsets[(r + offset) % n_subsets].iter());
            }
            round.extend(co.iter());
            round
        })
        .collect();
    Ok(rounds)
}
