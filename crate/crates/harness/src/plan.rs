//! Experiment plans: which system, fusion strategies, classifiers and
//! attacks an evaluation run covers.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use copresence::attack::{AttackSpec, FeasibilityCatalog};
use copresence::context::Modality;
use copresence::fusion::FusionStrategy;
use copresence::learn::ClassifierKind;

use crate::HarnessError;

/// The evaluated co-presence system, fixing its modality set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    AudioOnly,
    AudioRadio,
    Physical,
    AudioRadioPhysical,
}

impl SystemKind {
    pub fn modalities(self) -> BTreeSet<Modality> {
        use Modality::*;
        match self {
            SystemKind::AudioOnly => [Au].into_iter().collect(),
            SystemKind::AudioRadio => [Au, B, W].into_iter().collect(),
            SystemKind::Physical => [Al, G, H, T].into_iter().collect(),
            SystemKind::AudioRadioPhysical => Modality::ALL.into_iter().collect(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SystemKind::AudioOnly => "audio-only",
            SystemKind::AudioRadio => "audio-radio",
            SystemKind::Physical => "physical",
            SystemKind::AudioRadioPhysical => "audio-radio-physical",
        }
    }
}

impl FromStr for SystemKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "audio-only" | "audio" => Ok(SystemKind::AudioOnly),
            "audio-radio" => Ok(SystemKind::AudioRadio),
            "physical" => Ok(SystemKind::Physical),
            "audio-radio-physical" | "full" => Ok(SystemKind::AudioRadioPhysical),
            other => Err(HarnessError::InvalidPlan(format!(
                "unknown system {other:?}"
            ))),
        }
    }
}

/// Named fusion strategy choices for plans and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FusionKind {
    Features,
    DecisionsSingle,
    DecisionsSubsets,
}

impl FusionKind {
    pub fn strategy(self) -> FusionStrategy {
        match self {
            FusionKind::Features => FusionStrategy::features_fusion(),
            FusionKind::DecisionsSingle => FusionStrategy::decisions_single(),
            FusionKind::DecisionsSubsets => FusionStrategy::decisions_subsets_default(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FusionKind::Features => "features",
            FusionKind::DecisionsSingle => "decisions-single",
            FusionKind::DecisionsSubsets => "decisions-subsets",
        }
    }
}

impl FromStr for FusionKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "features" | "features-fusion" => Ok(FusionKind::Features),
            "decisions-single" | "single" => Ok(FusionKind::DecisionsSingle),
            "decisions-subsets" | "subsets" => Ok(FusionKind::DecisionsSubsets),
            other => Err(HarnessError::InvalidPlan(format!(
                "unknown fusion {other:?}"
            ))),
        }
    }
}

/// One attack-matrix experiment.
#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub dataset: Option<PathBuf>,
    pub system: SystemKind,
    pub fusions: Vec<FusionKind>,
    pub classifiers: Vec<ClassifierKind>,
    pub folds: usize,
    pub undersample: bool,
    /// Subset count and per-round subset draw for rotation under-sampling.
    pub undersample_subsets: usize,
    pub undersample_per_round: usize,
    pub attacks: Vec<AttackSpec>,
    pub force: bool,
    pub seed: u64,
    pub threads: usize,
}

impl ExperimentPlan {
    pub fn new(system: SystemKind) -> Self {
        Self {
            dataset: None,
            system,
            fusions: vec![
                FusionKind::Features,
                FusionKind::DecisionsSingle,
                FusionKind::DecisionsSubsets,
            ],
            classifiers: vec![ClassifierKind::Tree, ClassifierKind::Forest],
            folds: 10,
            undersample: false,
            undersample_subsets: 19,
            undersample_per_round: 10,
            attacks: Vec::new(),
            force: false,
            seed: 42,
            threads: 0,
        }
    }

    /// Attacks to run: the explicit list, or the default ladder — the
    /// zero-modality baseline, every single modality of the system, then
    /// the feasible multi-modality combinations restricted to the system.
    pub fn resolved_attacks(&self, catalog: &FeasibilityCatalog) -> Vec<AttackSpec> {
        if !self.attacks.is_empty() {
            let mut attacks = self.attacks.clone();
            if !attacks.iter().any(AttackSpec::is_zero_modality) {
                attacks.insert(0, AttackSpec::zero_modality());
            }
            return attacks;
        }
        let system = self.system.modalities();
        let mut attacks = vec![AttackSpec::zero_modality()];
        for &m in &Modality::ALL {
            if system.contains(&m) {
                attacks.push(AttackSpec::new([m]));
            }
        }
        let mut seen: Vec<BTreeSet<Modality>> = Vec::new();
        for set in &catalog.feasible_sets {
            let restricted: BTreeSet<Modality> = set.intersection(&system).copied().collect();
            if restricted.len() >= 2 && !seen.contains(&restricted) {
                seen.push(restricted.clone());
                attacks.push(AttackSpec {
                    manipulated: restricted,
                    ..AttackSpec::zero_modality()
                });
            }
        }
        attacks
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.fusions.is_empty() || self.classifiers.is_empty() {
            return Err(HarnessError::InvalidPlan(
                "at least one fusion and one classifier are required".into(),
            ));
        }
        if self.folds < 2 {
            return Err(HarnessError::InvalidPlan("need at least 2 folds".into()));
        }
        if self.undersample
            && (self.undersample_per_round == 0
                || self.undersample_per_round > self.undersample_subsets)
        {
            return Err(HarnessError::InvalidPlan(
                "invalid under-sampling rotation".into(),
            ));
        }
        let system = self.system.modalities();
        for attack in &self.attacks {
            if !attack.manipulated.is_subset(&system) {
                return Err(HarnessError::InvalidPlan(format!(
                    "attack {} manipulates modalities outside the {} system",
                    attack.label(),
                    self.system.name()
                )));
            }
        }
        Ok(())
    }
}
