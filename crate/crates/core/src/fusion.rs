//! Combining modalities into one co-presence decision.
//!
//! Three strategies:
//!
//! - features-fusion: every modality's features are concatenated and fed to
//!   a single classifier;
//! - decisions-fusion over single modalities: one classifier per modality,
//!   combined by majority vote;
//! - decisions-fusion over subsets: one features-fused classifier per
//!   modality subset (default acoustic {Au}, radio {B, W}, physical
//!   {Al, G, H, T}), combined by majority vote.
//!
//! Vote ties resolve to non-co-present (fail-secure): this is the one place
//! a security-relevant tie is decided.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::context::{ContextPair, Label, Modality};
use crate::features::{assemble, FeatureError, FeatureSchema, FeatureVector};
use crate::learn::{
    train_forest, train_tree, ClassifierKind, ForestParams, LearnError, TrainedClassifier,
    TreeParams,
};
use crate::seed::derive_seed;

#[derive(Debug, Error)]
pub enum FusionError {
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error("no modalities requested")]
    NoModalities,
    #[error("invalid subsets: {0}")]
    InvalidSubsets(String),
    #[error("model io: {0}")]
    Io(String),
}

/// Tie handling for majority votes. Only fail-secure is defined: a tie is
/// treated as non-co-present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TiePolicy {
    #[default]
    #[serde(rename = "fail-secure")]
    FailSecure,
}

/// Which fusion scheme a model uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FusionStrategy {
    FeaturesFusion,
    DecisionsFusionSingle {
        #[serde(default)]
        tie_policy: TiePolicy,
    },
    DecisionsFusionSubsets {
        subsets: Vec<BTreeSet<Modality>>,
        #[serde(default)]
        tie_policy: TiePolicy,
    },
}

impl FusionStrategy {
    pub fn features_fusion() -> Self {
        FusionStrategy::FeaturesFusion
    }

    pub fn decisions_single() -> Self {
        FusionStrategy::DecisionsFusionSingle {
            tie_policy: TiePolicy::FailSecure,
        }
    }

    /// Decisions fusion over the default acoustic/radio/physical partition.
    pub fn decisions_subsets_default() -> Self {
        FusionStrategy::DecisionsFusionSubsets {
            subsets: default_subsets(),
            tie_policy: TiePolicy::FailSecure,
        }
    }

    pub fn short_name(&self) -> &'static str {
        match self {
            FusionStrategy::FeaturesFusion => "features",
            FusionStrategy::DecisionsFusionSingle { .. } => "decisions-single",
            FusionStrategy::DecisionsFusionSubsets { .. } => "decisions-subsets",
        }
    }
}

impl fmt::Display for FusionStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

/// Default subset partition: acoustic, radio, physical.
pub fn default_subsets() -> Vec<BTreeSet<Modality>> {
    vec![
        [Modality::Au].into_iter().collect(),
        [Modality::B, Modality::W].into_iter().collect(),
        [Modality::T, Modality::H, Modality::G, Modality::Al]
            .into_iter()
            .collect(),
    ]
}

/// Classifier choice plus its parameters; `seed` feeds forest bagging (one
/// derived stream per unit so unit training order is irrelevant).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusedTrainParams {
    pub classifier: ClassifierKind,
    pub tree: TreeParams,
    pub forest: ForestParams,
    pub seed: u64,
}

impl FusedTrainParams {
    pub fn tree_default(seed: u64) -> Self {
        Self {
            classifier: ClassifierKind::Tree,
            tree: TreeParams::default(),
            forest: ForestParams::default(),
            seed,
        }
    }

    pub fn forest_default(seed: u64) -> Self {
        Self {
            classifier: ClassifierKind::Forest,
            tree: TreeParams::default(),
            forest: ForestParams::default(),
            seed,
        }
    }
}

/// One voting unit: the modality set it sees, its schema and its model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusedUnit {
    pub modalities: BTreeSet<Modality>,
    pub schema: FeatureSchema,
    pub model: TrainedClassifier,
}

/// A trained fusion model: one unit for features-fusion, one per modality
/// for decisions-single, one per subset for decisions-subsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusedModel {
    pub strategy: FusionStrategy,
    pub units: Vec<FusedUnit>,
}

fn unit_modality_sets(
    modalities: &BTreeSet<Modality>,
    strategy: &FusionStrategy,
) -> Result<Vec<BTreeSet<Modality>>, FusionError> {
    if modalities.is_empty() {
        return Err(FusionError::NoModalities);
    }
    match strategy {
        FusionStrategy::FeaturesFusion => Ok(vec![modalities.clone()]),
        FusionStrategy::DecisionsFusionSingle { .. } => Ok(modalities
            .iter()
            .map(|m| [*m].into_iter().collect())
            .collect()),
        FusionStrategy::DecisionsFusionSubsets { subsets, .. } => {
            let mut seen: BTreeSet<Modality> = BTreeSet::new();
            for subset in subsets {
                for m in subset {
                    if !seen.insert(*m) {
                        return Err(FusionError::InvalidSubsets(format!(
                            "modality {m} appears in two subsets"
                        )));
                    }
                }
            }
            if !modalities.iter().all(|m| seen.contains(m)) {
                return Err(FusionError::InvalidSubsets(
                    "subsets do not cover the system's modalities".into(),
                ));
            }
            // Restrict each subset to the system's modalities; subsets that
            // vanish contribute no voting unit.
            let units: Vec<BTreeSet<Modality>> = subsets
                .iter()
                .map(|s| s.intersection(modalities).copied().collect::<BTreeSet<_>>())
                .filter(|s: &BTreeSet<Modality>| !s.is_empty())
                .collect();
            Ok(units)
        }
    }
}

fn train_unit(
    pairs: &[ContextPair],
    modalities: &BTreeSet<Modality>,
    params: &FusedTrainParams,
    unit_index: u64,
) -> Result<FusedUnit, FusionError> {
    let schema = FeatureSchema::for_modalities(modalities);
    let data: Result<Vec<(FeatureVector, Label)>, FeatureError> = pairs
        .iter()
        .map(|p| assemble(p, modalities, &schema).map(|fv| (fv, p.label)))
        .collect();
    let data = data?;
    let model = match params.classifier {
        ClassifierKind::Tree => TrainedClassifier::Tree(train_tree(&data, &params.tree)?),
        ClassifierKind::Forest => {
            let forest_params = ForestParams {
                seed: derive_seed(params.seed, 0x46_55, unit_index),
                tree: params.tree,
                ..params.forest
            };
            TrainedClassifier::Forest(train_forest(&data, &forest_params)?)
        }
    };
    Ok(FusedUnit {
        modalities: modalities.clone(),
        schema,
        model,
    })
}

/// Train a fused model over `modalities` with the given strategy.
pub fn train_fused(
    pairs: &[ContextPair],
    modalities: &BTreeSet<Modality>,
    strategy: &FusionStrategy,
    params: &FusedTrainParams,
) -> Result<FusedModel, FusionError> {
    let unit_sets = unit_modality_sets(modalities, strategy)?;
    let units = unit_sets
        .iter()
        .enumerate()
        .map(|(i, set)| train_unit(pairs, set, params, i as u64))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FusedModel {
        strategy: strategy.clone(),
        units,
    })
}

/// Strict-majority vote; anything else (including ties) is non-co-present.
pub fn majority_vote(votes: &[Label], _tie_policy: TiePolicy) -> Label {
    let co = votes.iter().filter(|v| v.is_co_present()).count();
    let non = votes.len() - co;
    if co > non {
        Label::CoPresent
    } else {
        Label::NonCoPresent
    }
}

/// Classify a pair: returns the fused label and the per-unit votes.
pub fn fused_predict(
    model: &FusedModel,
    pair: &ContextPair,
) -> Result<(Label, Vec<Label>), FusionError> {
    let mut votes = Vec::with_capacity(model.units.len());
    for unit in &model.units {
        let fv = assemble(pair, &unit.modalities, &unit.schema)?;
        let (label, _) = unit.model.predict(&fv)?;
        votes.push(label);
    }
    Ok((combine_votes(model, &votes), votes))
}

/// Combine unit votes per the model's strategy. Exposed so batch evaluation
/// can score precomputed per-unit vectors without re-extracting features.
pub fn combine_votes(model: &FusedModel, votes: &[Label]) -> Label {
    match &model.strategy {
        FusionStrategy::FeaturesFusion => votes[0],
        FusionStrategy::DecisionsFusionSingle { tie_policy }
        | FusionStrategy::DecisionsFusionSubsets { tie_policy, .. } => {
            majority_vote(votes, *tie_policy)
        }
    }
}

// --- batch helpers over precomputed full-schema vectors ---------------------
//
// Experiment runners extract one full-schema vector per (pair, attack) and
// slice per-unit views out of it; unit feature values are identical to what
// per-unit extraction would produce, so models trained either way agree
// bit for bit.

fn project(fv: &FeatureVector, indices: &[usize], unit_schema: &FeatureSchema) -> FeatureVector {
    FeatureVector {
        values: indices.iter().map(|&i| fv.values[i]).collect(),
        schema_id: unit_schema.id(),
    }
}

/// Per-unit projection indices into a full schema.
pub fn unit_projections(
    model: &FusedModel,
    full_schema: &FeatureSchema,
) -> Result<Vec<Vec<usize>>, FusionError> {
    model
        .units
        .iter()
        .map(|u| {
            u.schema.projection_from(full_schema).ok_or_else(|| {
                FusionError::InvalidSubsets(format!(
                    "unit over {:?} not contained in the full schema",
                    u.modalities
                ))
            })
        })
        .collect()
}

/// Train a fused model from precomputed full-schema vectors.
pub fn train_fused_from_features(
    data: &[(FeatureVector, Label)],
    full_schema: &FeatureSchema,
    modalities: &BTreeSet<Modality>,
    strategy: &FusionStrategy,
    params: &FusedTrainParams,
) -> Result<FusedModel, FusionError> {
    let unit_sets = unit_modality_sets(modalities, strategy)?;
    let mut units = Vec::with_capacity(unit_sets.len());
    for (unit_index, set) in unit_sets.iter().enumerate() {
        let schema = FeatureSchema::for_modalities(set);
        let indices = schema.projection_from(full_schema).ok_or_else(|| {
            FusionError::InvalidSubsets(format!("unit over {set:?} not in the full schema"))
        })?;
        let unit_data: Vec<(FeatureVector, Label)> = data
            .iter()
            .map(|(fv, label)| (project(fv, &indices, &schema), *label))
            .collect();
        let model = match params.classifier {
            ClassifierKind::Tree => TrainedClassifier::Tree(train_tree(&unit_data, &params.tree)?),
            ClassifierKind::Forest => {
                let forest_params = ForestParams {
                    seed: derive_seed(params.seed, 0x46_55, unit_index as u64),
                    tree: params.tree,
                    ..params.forest
                };
                TrainedClassifier::Forest(train_forest(&unit_data, &forest_params)?)
            }
        };
        units.push(FusedUnit {
            modalities: set.clone(),
            schema,
            model,
        });
    }
    Ok(FusedModel {
        strategy: strategy.clone(),
        units,
    })
}

/// Classify one precomputed full-schema vector using projections from
/// [`unit_projections`].
pub fn fused_predict_projected(
    model: &FusedModel,
    projections: &[Vec<usize>],
    full_fv: &FeatureVector,
) -> Result<(Label, Vec<Label>), FusionError> {
    let mut votes = Vec::with_capacity(model.units.len());
    for (unit, indices) in model.units.iter().zip(projections) {
        let fv = project(full_fv, indices, &unit.schema);
        let (label, _) = unit.model.predict(&fv)?;
        votes.push(label);
    }
    Ok((combine_votes(model, &votes), votes))
}

// --- model directory layout -------------------------------------------------
//
// manifest.json  { strategy, units: [{modalities, model_file, schema_file}] }
// unit-N.model.json / unit-N.schema.json

#[derive(Serialize, Deserialize)]
struct ManifestUnit {
    modalities: BTreeSet<Modality>,
    model_file: String,
    schema_file: String,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    version: u32,
    strategy: FusionStrategy,
    units: Vec<ManifestUnit>,
}

/// Persist a fused model as a manifest plus per-unit model/schema files.
pub fn save_fused(model: &FusedModel, dir: &Path) -> Result<(), FusionError> {
    let io = |e: std::io::Error| FusionError::Io(e.to_string());
    let js = |e: serde_json::Error| FusionError::Io(e.to_string());
    fs::create_dir_all(dir).map_err(io)?;
    let mut manifest = Manifest {
        version: 1,
        strategy: model.strategy.clone(),
        units: Vec::new(),
    };
    for (i, unit) in model.units.iter().enumerate() {
        let model_file = format!("unit-{i}.model.json");
        let schema_file = format!("unit-{i}.schema.json");
        fs::write(
            dir.join(&model_file),
            serde_json::to_vec_pretty(&unit.model).map_err(js)?,
        )
        .map_err(io)?;
        fs::write(
            dir.join(&schema_file),
            serde_json::to_vec_pretty(&unit.schema).map_err(js)?,
        )
        .map_err(io)?;
        manifest.units.push(ManifestUnit {
            modalities: unit.modalities.clone(),
            model_file,
            schema_file,
        });
    }
    fs::write(
        dir.join("manifest.json"),
        serde_json::to_vec_pretty(&manifest).map_err(js)?,
    )
    .map_err(io)
}

/// Load a fused model saved by [`save_fused`].
pub fn load_fused(dir: &Path) -> Result<FusedModel, FusionError> {
    let io = |e: std::io::Error| FusionError::Io(e.to_string());
    let js = |e: serde_json::Error| FusionError::Io(e.to_string());
    let manifest: Manifest =
        serde_json::from_slice(&fs::read(dir.join("manifest.json")).map_err(io)?).map_err(js)?;
    let mut units = Vec::new();
    for mu in manifest.units {
        let model: TrainedClassifier =
            serde_json::from_slice(&fs::read(dir.join(&mu.model_file)).map_err(io)?).map_err(js)?;
        let schema: FeatureSchema =
            serde_json::from_slice(&fs::read(dir.join(&mu.schema_file)).map_err(io)?)
                .map_err(js)?;
        units.push(FusedUnit {
            modalities: mu.modalities,
            schema,
            model,
        });
    }
    Ok(FusedModel {
        strategy: manifest.strategy,
        units,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::{
        AudioTrace, BeaconSet, ContextSample, PhysicalReadings, RadioKind, SENSING_WINDOW_DEFAULT_S,
    };
    use rand::Rng;

    fn modset(ms: &[Modality]) -> BTreeSet<Modality> {
        ms.iter().copied().collect()
    }

    /// Tiny synthetic pairs: co-present pairs share beacons/readings,
    /// non-co-present pairs differ everywhere.
    fn toy_pairs(n_each: usize, seed: u64) -> Vec<ContextPair> {
        let mut rng = crate::seed::rng_for(seed, 0x99, 0);
        let mut pairs = Vec::new();
        for i in 0..n_each * 2 {
            let co = i % 2 == 0;
            let jitter: f64 = rng.gen_range(-0.05..0.05);
            let sample = |t: f64, ap: &str, tone: f64| ContextSample {
                audio: AudioTrace::new(
                    (0..256)
                        .map(|k| 0.3 * (std::f64::consts::TAU * tone * k as f64 / 8_000.0).sin())
                        .collect(),
                    8_000.0,
                )
                .unwrap(),
                wifi: BeaconSet::from_pairs(RadioKind::W, [(ap, -40)]).unwrap(),
                bluetooth: BeaconSet::new(RadioKind::B),
                physical: PhysicalReadings {
                    temperature: t,
                    humidity: 50.0,
                    gas_co: 1.0,
                    altitude: 100.0,
                },
                sensed_at: 0.0,
                sensing_window: SENSING_WINDOW_DEFAULT_S,
            };
            let (p, v) = if co {
                (
                    sample(22.0 + jitter, "ap-1", 400.0),
                    sample(22.05 + jitter, "ap-1", 400.0),
                )
            } else {
                (
                    sample(22.0, "ap-1", 400.0),
                    sample(29.0 + jitter, "ap-2", 900.0),
                )
            };
            pairs.push(ContextPair {
                prover: p,
                verifier: v,
                label: if co {
                    Label::CoPresent
                } else {
                    Label::NonCoPresent
                },
                pair_id: format!("p{i}"),
            });
        }
        pairs
    }

    #[test]
    fn majority_vote_cases() {
        use Label::{CoPresent as Co, NonCoPresent as Non};
        let t = TiePolicy::FailSecure;
        assert_eq!(majority_vote(&[Co], t), Co);
        assert_eq!(majority_vote(&[Non, Non, Co], t), Non);
        assert_eq!(majority_vote(&[Co, Non, Co, Non], t), Non);
        assert_eq!(majority_vote(&[Co, Co, Non], t), Co);
        // Four co votes of seven carry the majority.
        assert_eq!(majority_vote(&[Co, Co, Co, Co, Non, Non, Non], t), Co);
        // Permutation invariance.
        assert_eq!(majority_vote(&[Non, Co, Co], t), Co);
    }

    #[test]
    fn unit_counts_per_strategy() {
        let pairs = toy_pairs(12, 1);
        let all = modset(&[Modality::Au, Modality::B, Modality::W, Modality::T]);
        let params = FusedTrainParams::tree_default(0);

        let f = train_fused(&pairs, &all, &FusionStrategy::features_fusion(), &params).unwrap();
        assert_eq!(f.units.len(), 1);

        let s = train_fused(&pairs, &all, &FusionStrategy::decisions_single(), &params).unwrap();
        assert_eq!(s.units.len(), 4);

        let m = train_fused(
            &pairs,
            &all,
            &FusionStrategy::decisions_subsets_default(),
            &params,
        )
        .unwrap();
        // Acoustic {Au}, radio {B,W}, physical reduced to {T}.
        assert_eq!(m.units.len(), 3);
    }

    #[test]
    fn default_subsets_over_seven_modalities_gives_three_units() {
        let pairs = toy_pairs(12, 2);
        let all = modset(&Modality::ALL);
        let params = FusedTrainParams::tree_default(0);
        let m = train_fused(
            &pairs,
            &all,
            &FusionStrategy::decisions_subsets_default(),
            &params,
        )
        .unwrap();
        assert_eq!(m.units.len(), 3);
        assert_eq!(m.units[0].modalities, modset(&[Modality::Au]));
        assert_eq!(m.units[1].modalities, modset(&[Modality::B, Modality::W]));
        assert_eq!(
            m.units[2].modalities,
            modset(&[Modality::T, Modality::H, Modality::G, Modality::Al])
        );
    }

    #[test]
    fn overlapping_subsets_are_rejected() {
        let pairs = toy_pairs(6, 3);
        let strategy = FusionStrategy::DecisionsFusionSubsets {
            subsets: vec![modset(&[Modality::Au, Modality::W]), modset(&[Modality::W])],
            tie_policy: TiePolicy::FailSecure,
        };
        let err = train_fused(
            &pairs,
            &modset(&[Modality::Au, Modality::W]),
            &strategy,
            &FusedTrainParams::tree_default(0),
        );
        assert!(matches!(err, Err(FusionError::InvalidSubsets(_))));
    }

    #[test]
    fn fused_predict_separates_toy_data() {
        let pairs = toy_pairs(20, 4);
        let mods = modset(&[Modality::W, Modality::T, Modality::Au]);
        let params = FusedTrainParams::tree_default(0);
        for strategy in [
            FusionStrategy::features_fusion(),
            FusionStrategy::decisions_single(),
            FusionStrategy::decisions_subsets_default(),
        ] {
            let model = train_fused(&pairs, &mods, &strategy, &params).unwrap();
            for pair in &pairs {
                let (label, votes) = fused_predict(&model, pair).unwrap();
                assert_eq!(label, pair.label, "{strategy}");
                assert_eq!(votes.len(), model.units.len());
            }
        }
    }

    #[test]
    fn one_flipped_vote_controls_the_outcome_only_at_the_margin() {
        use Label::{CoPresent as Co, NonCoPresent as Non};
        let mut rng = crate::seed::rng_for(5, 0x77, 0);
        for _ in 0..500 {
            let n = rng.gen_range(1..9usize);
            let votes: Vec<Label> = (0..n)
                .map(|_| if rng.gen_bool(0.5) { Co } else { Non })
                .collect();
            let before = majority_vote(&votes, TiePolicy::FailSecure);
            let co = votes.iter().filter(|v| v.is_co_present()).count() as i64;
            let non = votes.len() as i64 - co;
            let margin = (co - non).abs();
            for flip in 0..n {
                let mut flipped = votes.clone();
                let toward_co = flipped[flip] == Non;
                flipped[flip] = if toward_co { Co } else { Non };
                let after = majority_vote(&flipped, TiePolicy::FailSecure);
                if toward_co && margin > 1 {
                    // A single unit pushing toward accept never controls the
                    // outcome past a one-vote margin.
                    assert_eq!(before, after, "margin {margin} votes {votes:?}");
                }
                if margin > 2 {
                    // In the secure direction the fail-secure tie lets a flip
                    // matter at margin 2 (even vote counts), never beyond.
                    assert_eq!(before, after, "margin {margin} votes {votes:?}");
                }
            }
        }
    }

    #[test]
    fn compromising_one_subset_cannot_force_acceptance() {
        use Label::{CoPresent as Co, NonCoPresent as Non};
        // Three subset units, two voting non-co-present: whatever the
        // attacker-controlled unit votes, the outcome stays non-co-present.
        for controlled in [Co, Non] {
            assert_eq!(
                majority_vote(&[controlled, Non, Non], TiePolicy::FailSecure),
                Non
            );
        }
    }

    #[test]
    fn model_directory_roundtrip() {
        let pairs = toy_pairs(10, 6);
        let mods = modset(&[Modality::W, Modality::T]);
        let model = train_fused(
            &pairs,
            &mods,
            &FusionStrategy::decisions_single(),
            &FusedTrainParams::forest_default(9),
        )
        .unwrap();
        let dir = std::env::temp_dir().join(format!("copresence-model-{}", std::process::id()));
        save_fused(&model, &dir).unwrap();
        let back = load_fused(&dir).unwrap();
        assert_eq!(model, back);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn batch_path_agrees_with_direct_path_bit_for_bit() {
        let pairs = toy_pairs(16, 8);
        let mods = modset(&[Modality::Au, Modality::W, Modality::T]);
        let full_schema = crate::features::FeatureSchema::for_modalities(&mods);
        let data: Vec<(crate::features::FeatureVector, Label)> = pairs
            .iter()
            .map(|p| {
                (
                    crate::features::assemble(p, &mods, &full_schema).unwrap(),
                    p.label,
                )
            })
            .collect();
        for strategy in [
            FusionStrategy::features_fusion(),
            FusionStrategy::decisions_single(),
            FusionStrategy::decisions_subsets_default(),
        ] {
            let params = FusedTrainParams::forest_default(3);
            let direct = train_fused(&pairs, &mods, &strategy, &params).unwrap();
            let batch =
                train_fused_from_features(&data, &full_schema, &mods, &strategy, &params).unwrap();
            assert_eq!(direct, batch, "{strategy}");

            let projections = unit_projections(&batch, &full_schema).unwrap();
            for (pair, (fv, _)) in pairs.iter().zip(&data) {
                let a = fused_predict(&direct, pair).unwrap();
                let b = fused_predict_projected(&batch, &projections, fv).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn schema_mismatch_is_refused() {
        let pairs = toy_pairs(10, 7);
        let model = train_fused(
            &pairs,
            &modset(&[Modality::W]),
            &FusionStrategy::features_fusion(),
            &FusedTrainParams::tree_default(0),
        )
        .unwrap();
        let foreign = crate::features::FeatureVector {
            values: vec![0.0; 5],
            schema_id: crate::features::SchemaId(0xdead),
        };
        assert!(matches!(
            model.units[0].model.predict(&foreign),
            Err(LearnError::SchemaMismatch { .. })
        ));
    }
}
