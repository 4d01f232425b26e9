//! Formal attacker transformations applied to non-co-present test pairs.
//!
//! Each manipulated modality gets the transformation a real context attacker
//! can realize: relayed audio adds the prover's trace to the verifier's,
//! spoofed radio unions the two beacon sets, and physical tampering pins the
//! verifier's reading to the prover's exactly (zero distance) or at the
//! co-presence mode value of the distance histogram (mode substitution).
//! Co-present pairs, training folds and ground-truth labels are never
//! touched.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::context::{BeaconSet, ContextError, ContextPair, Modality};

#[derive(Debug, Error)]
pub enum AttackError {
    #[error("audio sample rates differ: {prover} Hz vs {verifier} Hz")]
    RateMismatch { prover: f64, verifier: f64 },
    #[error("modality {0} is not a physical modality")]
    UnknownModality(Modality),
    #[error("attack on {{{0}}} is outside the feasibility catalog (use force to run anyway)")]
    InfeasibleAttack(String),
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error("cannot parse attack spec {0:?}")]
    ParseSpec(String),
}

/// Whether radio spoofing equalizes one side or both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadioDirection {
    /// Only the verifier's environment is augmented.
    Unidirectional,
    /// Both environments gain the other side's beacons. Radio waves are
    /// imperceptible, so spoofing near the prover goes unnoticed too; this
    /// is the default.
    #[default]
    Bidirectional,
}

/// How physical readings are pinned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhysicalMode {
    /// Verifier reading := prover reading (distance feature exactly 0).
    #[default]
    ZeroDistance,
    /// Verifier reading := prover reading ± mode value, so that the distance
    /// feature equals the co-presence histogram mode exactly. Defeats models
    /// trained on paired-device data where calibration error makes zero
    /// distance itself suspicious.
    ModeSubstitution,
}

/// Co-presence distance-histogram mode values per physical modality.
pub fn default_mode_table() -> BTreeMap<Modality, f64> {
    BTreeMap::from([
        (Modality::Al, 13.54),
        (Modality::G, 0.3),
        (Modality::H, 6.61),
        (Modality::T, 0.153),
    ])
}

/// Which modalities the adversary manipulates and how.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackSpec {
    pub manipulated: BTreeSet<Modality>,
    #[serde(default)]
    pub radio_direction: RadioDirection,
    #[serde(default)]
    pub physical_mode: PhysicalMode,
    #[serde(default = "default_mode_table")]
    pub mode_table: BTreeMap<Modality, f64>,
}

impl AttackSpec {
    /// The zero-modality attacker: a plain Dolev-Yao relay.
    pub fn zero_modality() -> Self {
        Self::new([])
    }

    pub fn new(modalities: impl IntoIterator<Item = Modality>) -> Self {
        Self {
            manipulated: modalities.into_iter().collect(),
            radio_direction: RadioDirection::default(),
            physical_mode: PhysicalMode::default(),
            mode_table: default_mode_table(),
        }
    }

    pub fn with_direction(mut self, direction: RadioDirection) -> Self {
        self.radio_direction = direction;
        self
    }

    pub fn with_physical_mode(mut self, mode: PhysicalMode) -> Self {
        self.physical_mode = mode;
        self
    }

    pub fn is_zero_modality(&self) -> bool {
        self.manipulated.is_empty()
    }

    /// Canonical label, e.g. `none`, `{W}`, `{Au+B+W}` (CSV-safe separator).
    pub fn label(&self) -> String {
        if self.manipulated.is_empty() {
            return "none".to_string();
        }
        let mods: Vec<String> = Modality::ALL
            .iter()
            .filter(|m| self.manipulated.contains(m))
            .map(|m| m.to_string())
            .collect();
        format!("{{{}}}", mods.join("+"))
    }
}

impl fmt::Display for AttackSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for AttackSpec {
    type Err = AttackError;

    /// Parse the CLI syntax: a comma-separated modality list such as
    /// `"B,W"` or `"Au,B,G,W"`; empty or `"none"` is the zero-modality
    /// attacker.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim().trim_start_matches('{').trim_end_matches('}');
        if trimmed.is_empty() || trimmed.eq_ignore_ascii_case("none") {
            return Ok(AttackSpec::zero_modality());
        }
        let mut manipulated = BTreeSet::new();
        for part in trimmed.split([',', '+']) {
            let m = Modality::from_str(part).map_err(|_| AttackError::ParseSpec(s.to_string()))?;
            manipulated.insert(m);
        }
        Ok(AttackSpec {
            manipulated,
            radio_direction: RadioDirection::default(),
            physical_mode: PhysicalMode::default(),
            mode_table: default_mode_table(),
        })
    }
}

/// The demonstrated multi-modality manipulation combinations. An attack is
/// feasible iff its modality set is a subset of one of these, so the catalog
/// implicitly contains every subset too.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityCatalog {
    pub feasible_sets: Vec<BTreeSet<Modality>>,
}

impl Default for FeasibilityCatalog {
    fn default() -> Self {
        use Modality::*;
        let sets: [&[Modality]; 6] = [
            &[Al, B, W],
            &[Au, B, G, H, W], // H increase only
            &[Au, B, G, T, W], // T decrease only
            &[Au, B, G, W],
            &[B, G, H, W],
            &[B, G, T, W],
        ];
        Self {
            feasible_sets: sets.iter().map(|s| s.iter().copied().collect()).collect(),
        }
    }
}

/// Feasibility check: returns the first covering catalog set, or None.
pub fn check_feasible<'a>(
    spec: &AttackSpec,
    catalog: &'a FeasibilityCatalog,
) -> Option<&'a BTreeSet<Modality>> {
    catalog
        .feasible_sets
        .iter()
        .find(|set| spec.manipulated.is_subset(set))
}

/// Audio relaying: the verifier's trace becomes the clamped sum of its own
/// ambient audio and the prover's, elementwise over the shorter trace.
pub fn manipulate_audio(pair: &mut ContextPair) -> Result<(), AttackError> {
    debug_assert!(!pair.label.is_co_present());
    let (rate_p, rate_v) = (
        pair.prover.audio.sample_rate(),
        pair.verifier.audio.sample_rate(),
    );
    if rate_p != rate_v {
        return Err(AttackError::RateMismatch {
            prover: rate_p,
            verifier: rate_v,
        });
    }
    let n = pair.prover.audio.len().min(pair.verifier.audio.len());
    let mixed: Vec<f64> = pair.verifier.audio.samples()[..n]
        .iter()
        .zip(&pair.prover.audio.samples()[..n])
        .map(|(v, p)| v + p)
        .collect();
    pair.verifier.audio.set_samples_clamped(mixed);
    Ok(())
}

fn union_into(target: &mut BeaconSet, source: &BeaconSet) {
    for (id, rssi) in source.iter() {
        target.insert_if_absent(id, rssi);
    }
}

/// Radio spoofing for one kind: each augmented side gains the other side's
/// beacons whose identifiers it lacks; already-seen identifiers keep the
/// locally sensed signal strength. Idempotent.
pub fn manipulate_radio(pair: &mut ContextPair, kind: Modality, direction: RadioDirection) {
    debug_assert!(!pair.label.is_co_present());
    match kind {
        Modality::W => {
            let prover_orig = pair.prover.wifi.clone();
            union_into(&mut pair.verifier.wifi, &prover_orig);
            if direction == RadioDirection::Bidirectional {
                let verifier_orig = pair.verifier.wifi.clone();
                union_into(&mut pair.prover.wifi, &verifier_orig);
            }
        }
        Modality::B => {
            let prover_orig = pair.prover.bluetooth.clone();
            union_into(&mut pair.verifier.bluetooth, &prover_orig);
            if direction == RadioDirection::Bidirectional {
                let verifier_orig = pair.verifier.bluetooth.clone();
                union_into(&mut pair.prover.bluetooth, &verifier_orig);
            }
        }
        _ => {}
    }
}

/// Physical tampering on the targeted modalities.
///
/// Zero-distance copies the prover reading; mode substitution offsets it by
/// the mode value, preferring `+` and flipping the sign only when the result
/// would leave the reading's valid range (humidity in [0, 100], CO >= 0).
/// Either way the classifier sees |Δ| only, so the sign never changes the
/// distance feature.
pub fn manipulate_physical(
    pair: &mut ContextPair,
    modalities: &BTreeSet<Modality>,
    mode: PhysicalMode,
    mode_table: &BTreeMap<Modality, f64>,
) -> Result<(), AttackError> {
    debug_assert!(!pair.label.is_co_present());
    for &m in modalities {
        if !m.is_physical() {
            return Err(AttackError::UnknownModality(m));
        }
        let prover_value = pair.prover.physical.get(m).expect("physical modality");
        let new_value = match mode {
            PhysicalMode::ZeroDistance => prover_value,
            PhysicalMode::ModeSubstitution => {
                let mode_value = *mode_table.get(&m).unwrap_or(&0.0);
                let plus = prover_value + mode_value;
                let in_range = |v: f64| match m {
                    Modality::H => (0.0..=100.0).contains(&v),
                    Modality::G => v >= 0.0,
                    _ => true,
                };
                if in_range(plus) {
                    plus
                } else {
                    prover_value - mode_value
                }
            }
        };
        pair.verifier.physical.set(m, new_value)?;
    }
    Ok(())
}

/// Transform every non-co-present pair of a test fold per `spec`, leaving
/// co-present pairs and labels untouched. Infeasible specs are rejected
/// unless `force` is set (hypothetical studies).
pub fn apply_attack(
    fold: &[ContextPair],
    spec: &AttackSpec,
    catalog: &FeasibilityCatalog,
    force: bool,
) -> Result<Vec<ContextPair>, AttackError> {
    if !force && check_feasible(spec, catalog).is_none() {
        let mods: Vec<String> = spec.manipulated.iter().map(|m| m.to_string()).collect();
        return Err(AttackError::InfeasibleAttack(mods.join(",")));
    }
    fold.iter()
        .map(|pair| {
            if pair.label.is_co_present() || spec.is_zero_modality() {
                return Ok(pair.clone());
            }
            let mut out = pair.clone();
            if spec.manipulated.contains(&Modality::Au) {
                manipulate_audio(&mut out)?;
            }
            for kind in [Modality::B, Modality::W] {
                if spec.manipulated.contains(&kind) {
                    manipulate_radio(&mut out, kind, spec.radio_direction);
                }
            }
            let physical: BTreeSet<Modality> = spec
                .manipulated
                .iter()
                .copied()
                .filter(|m| m.is_physical())
                .collect();
            if !physical.is_empty() {
                manipulate_physical(&mut out, &physical, spec.physical_mode, &spec.mode_table)?;
            }
            Ok(out)
        })
        .collect()
}
