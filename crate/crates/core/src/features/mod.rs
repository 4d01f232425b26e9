//! Per-modality distance/similarity features: the classifier's input space.
//!
//! Each modality contributes a fixed-order feature group:
//!
//! - audio (4): max normalized cross-correlation, lag at the maximum,
//!   one-third-octave band log-energy L1 distance, dominant-frequency
//!   difference;
//! - each radio kind (5): jaccard distance over identifiers, common-beacon
//!   count, mean |ΔRSSI| over common beacons, strength of one-sided beacons
//!   normalized by total count, |n_a - n_b|;
//! - each physical modality (1): absolute reading distance.
//!
//! A [`FeatureSchema`] pins the name order for a modality set; vectors carry
//! the schema id so models can refuse foreign inputs.

mod audio;

pub use audio::{audio_features, max_normalized_xcorr, AudioFeatures, THIRD_OCTAVE_CENTERS_HZ};

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::context::{BeaconSet, ContextPair, Modality, PhysicalReadings};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("sample rates differ: {left} Hz vs {right} Hz")]
    RateMismatch { left: f64, right: f64 },
    #[error("audio trace is empty")]
    EmptyTrace,
    #[error("beacon sets have different kinds")]
    KindMismatch,
    #[error("schema covers {schema:?} but {requested:?} was requested")]
    SchemaMismatch {
        schema: Vec<Modality>,
        requested: Vec<Modality>,
    },
}

/// Stable identifier for a feature schema; vectors and models carry it so a
/// model never scores a vector laid out for another schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SchemaId(pub u64);

impl fmt::Display for SchemaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

const SCHEMA_VERSION: u32 = 1;

/// Ordered feature names for one modality set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    version: u32,
    names: Vec<String>,
    modalities: Vec<Modality>,
    /// Parallel to `names`: which modality each feature belongs to.
    modality_of: Vec<Modality>,
    schema_id: SchemaId,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn group_names(m: Modality) -> Vec<(&'static str, Modality)> {
    match m {
        Modality::Au => vec![
            ("au.xcorr_max", Modality::Au),
            ("au.lag_s", Modality::Au),
            ("au.band_l1", Modality::Au),
            ("au.freq_diff_hz", Modality::Au),
        ],
        Modality::B => vec![
            ("b.jaccard", Modality::B),
            ("b.common", Modality::B),
            ("b.rssi_diff", Modality::B),
            ("b.unique_strength", Modality::B),
            ("b.count_diff", Modality::B),
        ],
        Modality::W => vec![
            ("w.jaccard", Modality::W),
            ("w.common", Modality::W),
            ("w.rssi_diff", Modality::W),
            ("w.unique_strength", Modality::W),
            ("w.count_diff", Modality::W),
        ],
        Modality::T => vec![("t.dist", Modality::T)],
        Modality::H => vec![("h.dist", Modality::H)],
        Modality::G => vec![("g.dist", Modality::G)],
        Modality::Al => vec![("al.dist", Modality::Al)],
    }
}

impl FeatureSchema {
    /// Schema covering exactly `modalities`, in canonical modality order.
    pub fn for_modalities(modalities: &BTreeSet<Modality>) -> Self {
        let ordered: Vec<Modality> = Modality::ALL
            .iter()
            .copied()
            .filter(|m| modalities.contains(m))
            .collect();
        let mut names = Vec::new();
        let mut modality_of = Vec::new();
        for &m in &ordered {
            for (name, owner) in group_names(m) {
                names.push(name.to_string());
                modality_of.push(owner);
            }
        }
        let mut hash_input = format!("v{SCHEMA_VERSION}");
        for n in &names {
            hash_input.push(';');
            hash_input.push_str(n);
        }
        let schema_id = SchemaId(fnv1a(hash_input.as_bytes()));
        Self {
            version: SCHEMA_VERSION,
            names,
            modalities: ordered,
            modality_of,
            schema_id,
        }
    }

    pub fn id(&self) -> SchemaId {
        self.schema_id
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn modalities(&self) -> &[Modality] {
        &self.modalities
    }

    pub fn modality_of(&self, index: usize) -> Modality {
        self.modality_of[index]
    }

    /// Indices of this schema's features inside `outer`, provided `outer`
    /// covers a superset of modalities. Lets callers extract a full vector
    /// once and slice per-unit views out of it.
    pub fn projection_from(&self, outer: &FeatureSchema) -> Option<Vec<usize>> {
        self.names
            .iter()
            .map(|n| outer.names.iter().position(|o| o == n))
            .collect()
    }
}

/// Feature values laid out per a [`FeatureSchema`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub schema_id: SchemaId,
}

/// Radio feature group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioFeatures {
    /// 1 - |A ∩ B| / |A ∪ B|; two empty scans count as a perfect match (0).
    pub jaccard_dist: f64,
    pub common_count: f64,
    /// Mean |ΔRSSI| in dB over common identifiers, 0 when none are shared.
    pub rssi_abs_diff_mean: f64,
    /// Σ|RSSI| over identifiers seen by only one side, divided by the total
    /// beacon count of both sides.
    pub unique_strength: f64,
    pub count_diff: f64,
}

pub fn radio_features(sa: &BeaconSet, sb: &BeaconSet) -> Result<RadioFeatures, FeatureError> {
    if sa.kind() != sb.kind() {
        return Err(FeatureError::KindMismatch);
    }
    let n_a = sa.len();
    let n_b = sb.len();
    let mut common = 0usize;
    let mut diff_sum = 0.0;
    let mut unique_strength_sum = 0.0;
    for (id, rssi_a) in sa.iter() {
        match sb.get(id) {
            Some(rssi_b) => {
                common += 1;
                diff_sum += (f64::from(rssi_a) - f64::from(rssi_b)).abs();
            }
            None => unique_strength_sum += f64::from(rssi_a).abs(),
        }
    }
    for (id, rssi_b) in sb.iter() {
        if !sa.contains(id) {
            unique_strength_sum += f64::from(rssi_b).abs();
        }
    }
    let union = n_a + n_b - common;
    let jaccard_dist = if union == 0 {
        0.0
    } else {
        1.0 - common as f64 / union as f64
    };
    let rssi_abs_diff_mean = if common == 0 {
        0.0
    } else {
        diff_sum / common as f64
    };
    let total = n_a + n_b;
    let unique_strength = if total == 0 {
        0.0
    } else {
        unique_strength_sum / total as f64
    };
    Ok(RadioFeatures {
        jaccard_dist,
        common_count: common as f64,
        rssi_abs_diff_mean,
        unique_strength,
        count_diff: (n_a as f64 - n_b as f64).abs(),
    })
}

/// Physical feature group: absolute distances (d_T, d_H, d_G, d_Al).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalFeatures {
    pub d_temperature: f64,
    pub d_humidity: f64,
    pub d_gas: f64,
    pub d_altitude: f64,
}

pub fn physical_features(pa: &PhysicalReadings, pb: &PhysicalReadings) -> PhysicalFeatures {
    PhysicalFeatures {
        d_temperature: (pa.temperature - pb.temperature).abs(),
        d_humidity: (pa.humidity - pb.humidity).abs(),
        d_gas: (pa.gas_co - pb.gas_co).abs(),
        d_altitude: (pa.altitude - pb.altitude).abs(),
    }
}

/// Concatenate the per-modality groups of `pair` in schema order.
///
/// `schema` must cover exactly `modalities`; the result is deterministic,
/// so equal inputs produce bit-identical vectors.
pub fn assemble(
    pair: &ContextPair,
    modalities: &BTreeSet<Modality>,
    schema: &FeatureSchema,
) -> Result<FeatureVector, FeatureError> {
    let requested: Vec<Modality> = Modality::ALL
        .iter()
        .copied()
        .filter(|m| modalities.contains(m))
        .collect();
    if schema.modalities() != requested.as_slice() {
        return Err(FeatureError::SchemaMismatch {
            schema: schema.modalities().to_vec(),
            requested,
        });
    }
    let mut values = Vec::with_capacity(schema.len());
    let phys = physical_features(&pair.prover.physical, &pair.verifier.physical);
    for &m in schema.modalities() {
        match m {
            Modality::Au => {
                let f = audio_features(&pair.prover.audio, &pair.verifier.audio)?;
                values.extend_from_slice(&[
                    f.xcorr_max,
                    f.lag_at_max_s,
                    f.band_dist,
                    f.dominant_freq_diff_hz,
                ]);
            }
            Modality::B => {
                let f = radio_features(&pair.prover.bluetooth, &pair.verifier.bluetooth)?;
                values.extend_from_slice(&[
                    f.jaccard_dist,
                    f.common_count,
                    f.rssi_abs_diff_mean,
                    f.unique_strength,
                    f.count_diff,
                ]);
            }
            Modality::W => {
                let f = radio_features(&pair.prover.wifi, &pair.verifier.wifi)?;
                values.extend_from_slice(&[
                    f.jaccard_dist,
                    f.common_count,
                    f.rssi_abs_diff_mean,
                    f.unique_strength,
                    f.count_diff,
                ]);
            }
            Modality::T => values.push(phys.d_temperature),
            Modality::H => values.push(phys.d_humidity),
            Modality::G => values.push(phys.d_gas),
            Modality::Al => values.push(phys.d_altitude),
        }
    }
    Ok(FeatureVector {
        values,
        schema_id: schema.id(),
    })
}

/// Convenience: schema + vector for a modality set in one call.
pub fn assemble_for(
    pair: &ContextPair,
    modalities: &BTreeSet<Modality>,
) -> Result<(FeatureSchema, FeatureVector), FeatureError> {
    let schema = FeatureSchema::for_modalities(modalities);
    let fv = assemble(pair, modalities, &schema)?;
    Ok((schema, fv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::{AudioTrace, ContextSample, Label, RadioKind, SENSING_WINDOW_DEFAULT_S};

    fn modset(ms: &[Modality]) -> BTreeSet<Modality> {
        ms.iter().copied().collect()
    }

    fn sample(wifi: &[(&str, i32)], bt: &[(&str, i32)], t: f64) -> ContextSample {
        ContextSample {
            audio: AudioTrace::new(vec![0.1, -0.2, 0.3, 0.0], 8_000.0).unwrap(),
            wifi: BeaconSet::from_pairs(RadioKind::W, wifi.iter().map(|&(m, s)| (m, s))).unwrap(),
            bluetooth: BeaconSet::from_pairs(RadioKind::B, bt.iter().map(|&(m, s)| (m, s)))
                .unwrap(),
            physical: PhysicalReadings {
                temperature: t,
                humidity: 50.0,
                gas_co: 1.0,
                altitude: 100.0,
            },
            sensed_at: 0.0,
            sensing_window: SENSING_WINDOW_DEFAULT_S,
        }
    }

    fn pair(p: ContextSample, v: ContextSample) -> ContextPair {
        ContextPair {
            prover: p,
            verifier: v,
            label: Label::NonCoPresent,
            pair_id: "t".into(),
        }
    }

    #[test]
    fn identical_nonempty_sets_match_perfectly() {
        let a = BeaconSet::from_pairs(RadioKind::W, [("m1", -40), ("m2", -55)]).unwrap();
        let f = radio_features(&a, &a.clone()).unwrap();
        assert_eq!(f.jaccard_dist, 0.0);
        assert_eq!(f.rssi_abs_diff_mean, 0.0);
        assert_eq!(f.common_count, 2.0);
        assert_eq!(f.unique_strength, 0.0);
        assert_eq!(f.count_diff, 0.0);
    }

    #[test]
    fn hand_enumerated_partial_overlap() {
        let sa = BeaconSet::from_pairs(RadioKind::W, [("m1", -40)]).unwrap();
        let sb = BeaconSet::from_pairs(RadioKind::W, [("m1", -60), ("m2", -50)]).unwrap();
        let f = radio_features(&sa, &sb).unwrap();
        assert_eq!(f.jaccard_dist, 0.5);
        assert_eq!(f.common_count, 1.0);
        assert_eq!(f.rssi_abs_diff_mean, 20.0);
        // m2 is the only one-sided beacon: 50 / 3 beacons total.
        assert!((f.unique_strength - 50.0 / 3.0).abs() < 1e-12);
        assert_eq!(f.count_diff, 1.0);
    }

    #[test]
    fn empty_sets_agree() {
        let a = BeaconSet::new(RadioKind::B);
        let f = radio_features(&a, &a.clone()).unwrap();
        assert_eq!(f.jaccard_dist, 0.0);
        assert_eq!(f.common_count, 0.0);
        assert_eq!(f.rssi_abs_diff_mean, 0.0);
        assert_eq!(f.unique_strength, 0.0);
        assert_eq!(f.count_diff, 0.0);
    }

    #[test]
    fn kind_mismatch_is_rejected() {
        let a = BeaconSet::new(RadioKind::B);
        let b = BeaconSet::new(RadioKind::W);
        assert!(matches!(
            radio_features(&a, &b),
            Err(FeatureError::KindMismatch)
        ));
    }

    #[test]
    fn radio_features_are_symmetric() {
        let sa = BeaconSet::from_pairs(RadioKind::W, [("m1", -40), ("m3", -70)]).unwrap();
        let sb = BeaconSet::from_pairs(RadioKind::W, [("m1", -60), ("m2", -50)]).unwrap();
        let fab = radio_features(&sa, &sb).unwrap();
        let fba = radio_features(&sb, &sa).unwrap();
        assert_eq!(fab, fba);
    }

    #[test]
    fn physical_distances() {
        let pa = PhysicalReadings {
            temperature: 26.0,
            humidity: 50.0,
            gas_co: 2.0,
            altitude: 10.0,
        };
        let pb = PhysicalReadings {
            temperature: 35.0,
            humidity: 50.0,
            gas_co: 2.0,
            altitude: 23.54,
        };
        let f = physical_features(&pa, &pb);
        assert_eq!(f.d_temperature, 9.0);
        assert_eq!(f.d_humidity, 0.0);
        assert_eq!(f.d_gas, 0.0);
        // 13.54 m is the co-presence altitude mode value.
        assert!((f.d_altitude - 13.54).abs() < 1e-12);
        let fba = physical_features(&pb, &pa);
        assert_eq!(f, fba);
    }

    #[test]
    fn assemble_projects_single_modality() {
        let p = pair(
            sample(&[("a", -40)], &[], 20.0),
            sample(&[("a", -42), ("b", -60)], &[], 21.0),
        );
        let (schema, fv) = assemble_for(&p, &modset(&[Modality::W])).unwrap();
        assert_eq!(schema.len(), 5);
        assert_eq!(fv.values.len(), 5);
        assert_eq!(schema.names()[0], "w.jaccard");
    }

    #[test]
    fn assemble_physical_system_has_four_features() {
        let p = pair(sample(&[], &[], 20.0), sample(&[], &[], 22.5));
        let (schema, fv) = assemble_for(
            &p,
            &modset(&[Modality::Al, Modality::G, Modality::H, Modality::T]),
        )
        .unwrap();
        assert_eq!(schema.len(), 4);
        assert_eq!(
            schema.names(),
            &[
                "t.dist".to_string(),
                "h.dist".into(),
                "g.dist".into(),
                "al.dist".into()
            ]
        );
        assert_eq!(fv.values[0], 2.5);
    }

    #[test]
    fn assemble_full_set_arity_and_determinism() {
        let p = pair(
            sample(&[("a", -40)], &[("x", -60)], 20.0),
            sample(&[("a", -45)], &[("x", -62)], 20.5),
        );
        let all = modset(&Modality::ALL);
        let (schema, fv) = assemble_for(&p, &all).unwrap();
        assert_eq!(schema.len(), 4 + 5 + 5 + 4);
        let fv2 = assemble(&p, &all, &schema).unwrap();
        assert_eq!(fv, fv2);
    }

    #[test]
    fn assemble_rejects_wrong_schema() {
        let p = pair(sample(&[], &[], 20.0), sample(&[], &[], 21.0));
        let w_schema = FeatureSchema::for_modalities(&modset(&[Modality::W]));
        let err = assemble(&p, &modset(&[Modality::B]), &w_schema);
        assert!(matches!(err, Err(FeatureError::SchemaMismatch { .. })));
    }

    #[test]
    fn schema_ids_differ_by_modality_set() {
        let s1 = FeatureSchema::for_modalities(&modset(&[Modality::W]));
        let s2 = FeatureSchema::for_modalities(&modset(&[Modality::B]));
        let s3 = FeatureSchema::for_modalities(&modset(&[Modality::W]));
        assert_ne!(s1.id(), s2.id());
        assert_eq!(s1.id(), s3.id());
    }

    #[test]
    fn projection_finds_unit_features_inside_full_schema() {
        let full = FeatureSchema::for_modalities(&modset(&Modality::ALL));
        let unit = FeatureSchema::for_modalities(&modset(&[Modality::W]));
        let idx = unit.projection_from(&full).unwrap();
        assert_eq!(idx, vec![9, 10, 11, 12, 13]);
    }
}
