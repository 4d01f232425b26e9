//! Domain data model for sensed context on each side of the protocol.
//!
//! A [`ContextSample`] is one device's view of its surroundings over one
//! sensing window: an ambient audio trace, WiFi and Bluetooth beacon scans,
//! and four physical readings (temperature, humidity, CO, altitude).
//! A [`ContextPair`] bundles the prover-side and verifier-side samples with
//! a ground-truth co-presence label and is the unit of training/evaluation.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default sensing window `t` in seconds. The protocol fixes one duration for
/// both sides; the concrete value is a configuration constant, not a protocol
/// requirement.
pub const SENSING_WINDOW_DEFAULT_S: f64 = 10.0;

/// One sensed channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Modality {
    /// Ambient audio.
    Au,
    /// Bluetooth beacons.
    B,
    /// WiFi access points.
    W,
    /// Temperature (°C).
    T,
    /// Relative humidity (%RH).
    H,
    /// CO gas concentration (ppm).
    G,
    /// Altitude (m).
    Al,
}

impl Modality {
    /// All seven modalities in canonical order.
    pub const ALL: [Modality; 7] = [
        Modality::Au,
        Modality::B,
        Modality::W,
        Modality::T,
        Modality::H,
        Modality::G,
        Modality::Al,
    ];

    /// The four physical-environment modalities.
    pub const PHYSICAL: [Modality; 4] = [Modality::T, Modality::H, Modality::G, Modality::Al];

    pub fn is_physical(self) -> bool {
        matches!(self, Modality::T | Modality::H | Modality::G | Modality::Al)
    }

    pub fn is_radio(self) -> bool {
        matches!(self, Modality::B | Modality::W)
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Modality::Au => "Au",
            Modality::B => "B",
            Modality::W => "W",
            Modality::T => "T",
            Modality::H => "H",
            Modality::G => "G",
            Modality::Al => "Al",
        };
        f.write_str(s)
    }
}

impl FromStr for Modality {
    type Err = ContextError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "Au" | "au" | "AU" => Ok(Modality::Au),
            "B" | "b" => Ok(Modality::B),
            "W" | "w" => Ok(Modality::W),
            "T" | "t" => Ok(Modality::T),
            "H" | "h" => Ok(Modality::H),
            "G" | "g" => Ok(Modality::G),
            "Al" | "al" | "AL" => Ok(Modality::Al),
            other => Err(ContextError::UnknownModality(other.to_string())),
        }
    }
}

/// Which radio channel a beacon set was scanned from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RadioKind {
    W,
    B,
}

impl RadioKind {
    pub fn modality(self) -> Modality {
        match self {
            RadioKind::W => Modality::W,
            RadioKind::B => Modality::B,
        }
    }
}

/// Ground-truth co-presence label. Never derived from sample contents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "co-present")]
    CoPresent,
    #[serde(rename = "non-co-present")]
    NonCoPresent,
}

impl Label {
    pub fn is_co_present(self) -> bool {
        matches!(self, Label::CoPresent)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::CoPresent => f.write_str("co-present"),
            Label::NonCoPresent => f.write_str("non-co-present"),
        }
    }
}

#[derive(Debug, Error)]
pub enum ContextError {
    #[error("invalid sample: {0}")]
    InvalidSample(String),
    #[error("duplicate beacon identifier {0:?}")]
    DuplicateBeacon(String),
    #[error("RSSI {0} dBm out of range [-100, 0]")]
    RssiOutOfRange(i32),
    #[error("unknown modality {0:?}")]
    UnknownModality(String),
}

/// An ambient audio trace, amplitudes normalized to [-1, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AudioTrace {
    samples: Vec<f64>,
    sample_rate: f64,
}

impl AudioTrace {
    /// Wrap already-normalized samples. Invariants are checked later by
    /// [`validate_sample`]; construction itself only rejects a non-positive
    /// rate so that `duration()` is always well defined.
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self, ContextError> {
        if !sample_rate.is_finite() || sample_rate <= 0.0 {
            return Err(ContextError::InvalidSample(format!(
                "sample rate must be positive, got {sample_rate}"
            )));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    /// Normalize 16-bit PCM to [-1, 1]. Used when ingesting WAV files.
    pub fn from_pcm16(pcm: &[i16], sample_rate: f64) -> Result<Self, ContextError> {
        let samples = pcm.iter().map(|&s| f64::from(s) / 32768.0).collect();
        Self::new(samples, sample_rate)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    /// Trace length in seconds; `samples.len() == round(rate * duration)` by
    /// construction.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Replace the sample buffer, clamping each value into [-1, 1].
    /// Used by attack transformations that mix traces.
    pub fn set_samples_clamped(&mut self, samples: Vec<f64>) {
        self.samples = samples.into_iter().map(|s| s.clamp(-1.0, 1.0)).collect();
    }
}

/// A radio scan: map from beacon identifier to RSSI in dBm.
///
/// Identifiers are unique within a set; inserting a duplicate is rejected at
/// construction. RSSI is stored as integer dBm.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeaconSet {
    beacons: BTreeMap<String, i32>,
    kind: RadioKind,
}

impl BeaconSet {
    pub fn new(kind: RadioKind) -> Self {
        Self {
            beacons: BTreeMap::new(),
            kind,
        }
    }

    /// Build from `(identifier, rssi)` pairs, rejecting duplicates and
    /// out-of-range signal strengths.
    pub fn from_pairs<I, S>(kind: RadioKind, pairs: I) -> Result<Self, ContextError>
    where
        I: IntoIterator<Item = (S, i32)>,
        S: Into<String>,
    {
        let mut set = Self::new(kind);
        for (id, rssi) in pairs {
            set.insert(id.into(), rssi)?;
        }
        Ok(set)
    }

    pub fn insert(&mut self, id: String, rssi: i32) -> Result<(), ContextError> {
        if !(-100..=0).contains(&rssi) {
            return Err(ContextError::RssiOutOfRange(rssi));
        }
        if self.beacons.contains_key(&id) {
            return Err(ContextError::DuplicateBeacon(id));
        }
        self.beacons.insert(id, rssi);
        Ok(())
    }

    /// Insert keeping the existing entry when the identifier is already
    /// present. Used by radio attack transformations, where a side keeps its
    /// locally sensed signal strength for beacons it already sees.
    pub fn insert_if_absent(&mut self, id: &str, rssi: i32) {
        self.beacons.entry(id.to_string()).or_insert(rssi);
    }

    pub fn kind(&self) -> RadioKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.beacons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beacons.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.beacons.contains_key(id)
    }

    pub fn get(&self, id: &str) -> Option<i32> {
        self.beacons.get(id).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, i32)> {
        self.beacons.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn identifiers(&self) -> impl Iterator<Item = &str> {
        self.beacons.keys().map(String::as_str)
    }
}

/// The four physical-environment readings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalReadings {
    /// Temperature in °C.
    pub temperature: f64,
    /// Relative humidity in %RH, within [0, 100].
    pub humidity: f64,
    /// CO concentration in ppm, >= 0.
    pub gas_co: f64,
    /// Altitude in meters.
    pub altitude: f64,
}

impl PhysicalReadings {
    pub fn get(&self, m: Modality) -> Option<f64> {
        match m {
            Modality::T => Some(self.temperature),
            Modality::H => Some(self.humidity),
            Modality::G => Some(self.gas_co),
            Modality::Al => Some(self.altitude),
            _ => None,
        }
    }

    pub fn set(&mut self, m: Modality, value: f64) -> Result<(), ContextError> {
        match m {
            Modality::T => self.temperature = value,
            Modality::H => self.humidity = value,
            Modality::G => self.gas_co = value,
            Modality::Al => self.altitude = value,
            other => return Err(ContextError::UnknownModality(other.to_string())),
        }
        Ok(())
    }
}

/// One side's sensed context at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextSample {
    pub audio: AudioTrace,
    pub wifi: BeaconSet,
    pub bluetooth: BeaconSet,
    pub physical: PhysicalReadings,
    /// Seconds since epoch at the start of sensing.
    pub sensed_at: f64,
    /// Sensing window in seconds; equals the protocol's fixed duration `t`.
    pub sensing_window: f64,
}

/// The unit of training and evaluation: both sides plus ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextPair {
    pub prover: ContextSample,
    pub verifier: ContextSample,
    pub label: Label,
    pub pair_id: String,
}

/// Check every type invariant of a sample and hand it back unchanged.
///
/// Rejects NaN/out-of-range amplitudes, non-positive sample rates, RSSI
/// outside [-100, 0] (beacon sets carry that invariant from construction,
/// but samples deserialized from foreign sources are re-checked here),
/// humidity outside [0, 100], negative CO and non-finite readings.
pub fn validate_sample(sample: ContextSample) -> Result<ContextSample, ContextError> {
    if !sample.audio.sample_rate().is_finite() || sample.audio.sample_rate() <= 0.0 {
        return Err(ContextError::InvalidSample(format!(
            "sample rate {} is not positive and finite",
            sample.audio.sample_rate()
        )));
    }
    for (i, &a) in sample.audio.samples().iter().enumerate() {
        if !a.is_finite() {
            return Err(ContextError::InvalidSample(format!(
                "audio amplitude at index {i} is not finite"
            )));
        }
        if !(-1.0..=1.0).contains(&a) {
            return Err(ContextError::InvalidSample(format!(
                "audio amplitude {a} at index {i} outside [-1, 1]"
            )));
        }
    }
    if sample.wifi.kind() != RadioKind::W {
        return Err(ContextError::InvalidSample(
            "wifi beacon set has kind B".into(),
        ));
    }
    if sample.bluetooth.kind() != RadioKind::B {
        return Err(ContextError::InvalidSample(
            "bluetooth beacon set has kind W".into(),
        ));
    }
    for set in [&sample.wifi, &sample.bluetooth] {
        for (id, rssi) in set.iter() {
            if !(-100..=0).contains(&rssi) {
                return Err(ContextError::InvalidSample(format!(
                    "beacon {id:?} RSSI {rssi} dBm outside [-100, 0]"
                )));
            }
        }
    }
    let p = &sample.physical;
    for (name, v) in [
        ("temperature", p.temperature),
        ("humidity", p.humidity),
        ("gas_co", p.gas_co),
        ("altitude", p.altitude),
    ] {
        if !v.is_finite() {
            return Err(ContextError::InvalidSample(format!("{name} is not finite")));
        }
    }
    if !(0.0..=100.0).contains(&p.humidity) {
        return Err(ContextError::InvalidSample(format!(
            "humidity {} outside [0, 100]",
            p.humidity
        )));
    }
    if p.gas_co < 0.0 {
        return Err(ContextError::InvalidSample(format!(
            "gas_co {} is negative",
            p.gas_co
        )));
    }
    if !sample.sensing_window.is_finite() || sample.sensing_window <= 0.0 {
        return Err(ContextError::InvalidSample(format!(
            "sensing window {} is not positive",
            sample.sensing_window
        )));
    }
    Ok(sample)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sample_with(humidity: f64, rssi: i32) -> ContextSample {
        ContextSample {
            audio: AudioTrace::new(vec![0.0, 0.1, -0.1], 16_000.0).unwrap(),
            wifi: BeaconSet::from_pairs(RadioKind::W, [("ap-1".to_string(), rssi)]).unwrap(),
            bluetooth: BeaconSet::new(RadioKind::B),
            physical: PhysicalReadings {
                temperature: 26.5,
                humidity,
                gas_co: 1.2,
                altitude: 118.0,
            },
            sensed_at: 0.0,
            sensing_window: SENSING_WINDOW_DEFAULT_S,
        }
    }

    #[test]
    fn accepts_typical_sample() {
        // Humidity 55 %RH and RSSI -39 dBm are the quoted normal readings.
        let s = sample_with(55.0, -39);
        assert!(validate_sample(s).is_ok());
    }

    #[test]
    fn accepts_empty_beacon_sets() {
        let mut s = sample_with(40.0, -50);
        s.wifi = BeaconSet::new(RadioKind::W);
        assert!(validate_sample(s).is_ok());
    }

    #[test]
    fn rejects_positive_rssi() {
        let err = BeaconSet::from_pairs(RadioKind::W, [("ap", 10)]).unwrap_err();
        assert!(matches!(err, ContextError::RssiOutOfRange(10)));
    }

    #[test]
    fn rejects_duplicate_beacon_id() {
        let err = BeaconSet::from_pairs(RadioKind::W, [("ap", -40), ("ap", -60)]).unwrap_err();
        assert!(matches!(err, ContextError::DuplicateBeacon(_)));
    }

    #[test]
    fn rejects_nan_amplitude() {
        let mut s = sample_with(55.0, -39);
        s.audio = AudioTrace::new(vec![0.0, f64::NAN], 16_000.0).unwrap();
        assert!(validate_sample(s).is_err());
    }

    #[test]
    fn rejects_humidity_above_100() {
        let s = sample_with(101.0, -39);
        assert!(validate_sample(s).is_err());
    }

    #[test]
    fn rejects_out_of_range_amplitude() {
        let mut s = sample_with(55.0, -39);
        s.audio = AudioTrace::new(vec![1.5], 16_000.0).unwrap();
        assert!(validate_sample(s).is_err());
    }

    #[test]
    fn insert_if_absent_keeps_local_reading() {
        let mut set = BeaconSet::from_pairs(RadioKind::W, [("ap", -40)]).unwrap();
        set.insert_if_absent("ap", -60);
        assert_eq!(set.get("ap"), Some(-40));
        set.insert_if_absent("ap2", -55);
        assert_eq!(set.get("ap2"), Some(-55));
    }

    #[test]
    fn pcm16_normalizes_to_unit_range() {
        let t = AudioTrace::from_pcm16(&[i16::MIN, 0, i16::MAX], 8_000.0).unwrap();
        assert_eq!(t.samples()[0], -1.0);
        assert_eq!(t.samples()[1], 0.0);
        assert!(t.samples()[2] < 1.0 && t.samples()[2] > 0.999);
    }
}
