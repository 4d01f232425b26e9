//! Executable authentication protocol with contextual co-presence.
//!
//! The prover triggers, the verifier answers with a random 128-bit
//! challenge, both sides sense their context for the fixed window, the
//! prover responds with a keyed-hash MAC over the challenge plus its
//! protected context payload, and the comparator accepts only when every
//! MAC verifies and the fused classifier labels the context pair
//! co-present. A relay attacker forwards messages between non-co-present
//! sides, optionally transforming the sensed context per an attack spec,
//! tampering with the response, or dropping messages.

use hmac::{Hmac, Mac};
use serde::{Deserialize, Serialize};
use sha2::Sha256;
use thiserror::Error;

use crate::attack::{apply_attack, AttackError, AttackSpec, FeasibilityCatalog};
use crate::context::{BeaconSet, ContextPair, ContextSample, Label};
use crate::fusion::{fused_predict, FusedModel, FusionError};

type HmacSha256 = Hmac<Sha256>;

pub const CHALLENGE_BYTES: usize = 16;
pub const MAC_BYTES: usize = 32;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("message dropped by the channel: {0}")]
    Timeout(&'static str),
    #[error(transparent)]
    Attack(#[from] AttackError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
}

/// Shared MAC key material.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MacKey(pub [u8; 32]);

impl MacKey {
    pub fn from_rng<R: rand::Rng>(rng: &mut R) -> Self {
        let mut key = [0u8; 32];
        rng.fill(&mut key);
        MacKey(key)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Prover,
    Verifier,
    Comparator,
    RelayAttacker,
}

/// Compute the challenge response: HMAC over the challenge under K.
pub fn compute_response(ch: &[u8], key: &MacKey) -> Vec<u8> {
    let mut mac = HmacSha256::new_from_slice(&key.0).expect("any key length works");
    mac.update(ch);
    mac.finalize().into_bytes().to_vec()
}

/// Constant-time verification of a challenge response.
pub fn verify_response(ch: &[u8], rsp: &[u8], key: &MacKey) -> bool {
    let mut mac = HmacSha256::new_from_slice(&key.0).expect("any key length works");
    mac.update(ch);
    mac.verify_slice(rsp).is_ok()
}

fn payload_tag(ch: &[u8], role_tag: &[u8], context_json: &[u8], key: &MacKey) -> Vec<u8> {
    let mut mac = HmacSha256::new_from_slice(&key.0).expect("any key length works");
    mac.update(ch);
    mac.update(role_tag);
    mac.update(context_json);
    mac.finalize().into_bytes().to_vec()
}

fn verify_payload(
    ch: &[u8],
    role_tag: &[u8],
    context_json: &[u8],
    tag: &[u8],
    key: &MacKey,
) -> bool {
    let mut mac = HmacSha256::new_from_slice(&key.0).expect("any key length works");
    mac.update(ch);
    mac.update(role_tag);
    mac.update(context_json);
    mac.verify_slice(tag).is_ok()
}

/// The prover: holds K and its sensed context.
pub struct Prover {
    pub key: MacKey,
    pub sample: ContextSample,
}

/// The verifier: senses its own context; holds K' only when the comparator
/// is remote.
pub struct Verifier {
    pub key: Option<MacKey>,
    pub sample: ContextSample,
    /// Recent beacon scans, newest last; feeds the sudden-AP anomaly check.
    pub radio_history: Vec<BeaconSet>,
}

/// Where the comparator runs. Integrated with the verifier, K' is not used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComparatorPlacement {
    IntegratedWithVerifier,
    Remote,
}

/// The comparator: holds K (and K' in remote placement) and the trained
/// model.
pub struct Comparator {
    pub prover_key: MacKey,
    pub verifier_key: Option<MacKey>,
    pub placement: ComparatorPlacement,
}

/// Message tampering the relay can attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tamper {
    /// Faithful relay of every message.
    #[default]
    None,
    /// Flip one bit of the prover's response.
    FlipResponseBit,
    /// Replace the response with attacker-chosen bytes (no key knowledge).
    ForgeResponse,
    /// Rewrite the prover's context payload without the key.
    RewriteProverContext,
    /// Drop the response message entirely.
    DropResponse,
}

/// How long the comparator waits for the response before giving up.
pub const RESPONSE_TIMEOUT_MS: u64 = 2_000;

/// A ghost-and-leech relay between non-co-present sides.
#[derive(Debug, Clone, Default)]
pub struct RelayAttacker {
    /// Context manipulation applied to the sensed environment, if any.
    pub attack: Option<AttackSpec>,
    pub tamper: Tamper,
    /// Run an infeasible attack spec anyway (hypothetical studies).
    pub force: bool,
    /// Added forwarding latency; exceeding [`RESPONSE_TIMEOUT_MS`] loses the
    /// session. Relaying itself is otherwise latency-insensitive since the
    /// protocol has no distance-bounding step.
    pub delay_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Accept,
    RejectMacInvalid,
    RejectNonCoPresent,
}

impl Verdict {
    pub fn accepted(self) -> bool {
        matches!(self, Verdict::Accept)
    }
}

/// Audit record for one protocol run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionTranscript {
    pub challenge_hex: String,
    pub response_hex: String,
    pub relayed: bool,
    pub attack: Option<String>,
    pub tamper: Tamper,
    pub mac_valid: bool,
    pub classifier_label: Option<Label>,
    pub verdict: Verdict,
    /// Sudden-AP countermeasure flag, when the verifier kept a history.
    pub radio_anomaly: Option<bool>,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Run one session. Without an attacker the pair is the benign co-located
/// context; with one, the prover context comes from the remote environment
/// (optionally transformed) while the verifier senses locally.
pub fn run_session<R: rand::Rng>(
    prover: &Prover,
    verifier: &Verifier,
    comparator: &Comparator,
    attacker: Option<&RelayAttacker>,
    model: &FusedModel,
    catalog: &FeasibilityCatalog,
    rng: &mut R,
) -> Result<SessionTranscript, SessionError> {
    // Trigger -> challenge.
    let mut challenge = [0u8; CHALLENGE_BYTES];
    rng.fill(&mut challenge);
    if let Some(atk) = attacker {
        if atk.delay_ms > RESPONSE_TIMEOUT_MS {
            return Err(SessionError::Timeout(
                "relay latency exceeded the session timeout",
            ));
        }
    }

    // Context sensing. The attacker's manipulation happens in the physical
    // environment before the devices sign anything, so transformed contexts
    // still carry valid MACs.
    let relayed = attacker.is_some();
    let mut pair = ContextPair {
        prover: prover.sample.clone(),
        verifier: verifier.sample.clone(),
        label: if relayed {
            Label::NonCoPresent
        } else {
            Label::CoPresent
        },
        pair_id: String::new(),
    };
    if let Some(atk) = attacker {
        if let Some(spec) = &atk.attack {
            let transformed = apply_attack(std::slice::from_ref(&pair), spec, catalog, atk.force)?;
            pair = transformed
                .into_iter()
                .next()
                .expect("one pair in, one out");
        }
    }

    // Prover response and protected payload.
    let rsp = compute_response(&challenge, &prover.key);
    let cp_json = serde_json::to_vec(&pair.prover).expect("sample serializes");
    let cp_tag = payload_tag(&challenge, b"CP", &cp_json, &prover.key);

    // The relay forwards (and possibly tampers with) the prover's messages.
    let (rsp, cp_json, cp_tag) = match attacker.map(|a| a.tamper).unwrap_or_default() {
        Tamper::None => (rsp, cp_json, cp_tag),
        Tamper::FlipResponseBit => {
            let mut r = rsp;
            r[0] ^= 0x01;
            (r, cp_json, cp_tag)
        }
        Tamper::ForgeResponse => {
            let mut r = vec![0u8; MAC_BYTES];
            rng.fill(r.as_mut_slice());
            (r, cp_json, cp_tag)
        }
        Tamper::RewriteProverContext => {
            // Attacker substitutes the verifier's own context as CP, hoping
            // to force a match, but cannot recompute the tag under K.
            let forged = serde_json::to_vec(&pair.verifier).expect("sample serializes");
            (rsp, forged, cp_tag)
        }
        Tamper::DropResponse => return Err(SessionError::Timeout("response dropped")),
    };

    // Verifier-side payload, protected by K' only when the comparator is
    // remote.
    let cv_json = serde_json::to_vec(&pair.verifier).expect("sample serializes");
    let cv_tag = match comparator.placement {
        ComparatorPlacement::IntegratedWithVerifier => None,
        ComparatorPlacement::Remote => {
            let key = verifier
                .key
                .as_ref()
                .expect("remote comparator requires the verifier key");
            Some(payload_tag(&challenge, b"CV", &cv_json, key))
        }
    };

    // Comparator checks.
    let mut mac_valid = verify_response(&challenge, &rsp, &comparator.prover_key)
        && verify_payload(&challenge, b"CP", &cp_json, &cp_tag, &comparator.prover_key);
    if let (Some(tag), Some(key)) = (&cv_tag, &comparator.verifier_key) {
        mac_valid = mac_valid && verify_payload(&challenge, b"CV", &cv_json, tag, key);
    }

    let radio_anomaly = if verifier.radio_history.is_empty() {
        None
    } else {
        Some(radio_anomaly_check(
            &verifier.radio_history,
            &pair.verifier.wifi,
            &AnomalyThreshold::default(),
        ))
    };

    let (classifier_label, verdict) = if !mac_valid {
        (None, Verdict::RejectMacInvalid)
    } else {
        // The comparator classifies exactly the payloads it recovered.
        let cp: ContextSample = serde_json::from_slice(&cp_json).expect("tagged payload parses");
        let cv: ContextSample = serde_json::from_slice(&cv_json).expect("tagged payload parses");
        let classify_pair = ContextPair {
            prover: cp,
            verifier: cv,
            label: pair.label,
            pair_id: String::new(),
        };
        let (label, _votes) = fused_predict(model, &classify_pair)?;
        let verdict = if label.is_co_present() {
            Verdict::Accept
        } else {
            Verdict::RejectNonCoPresent
        };
        (Some(label), verdict)
    };

    Ok(SessionTranscript {
        challenge_hex: hex(&challenge),
        response_hex: hex(&rsp),
        relayed,
        attack: attacker.and_then(|a| a.attack.as_ref().map(|s| s.label())),
        tamper: attacker.map(|a| a.tamper).unwrap_or_default(),
        mac_valid,
        classifier_label,
        verdict,
        radio_anomaly,
    })
}

/// Sudden-AP anomaly thresholds: flag when the beacon count at least
/// `count_factor`-times the last scan arrives together with `min_new` or
/// more previously unseen identifiers within one sensing window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnomalyThreshold {
    pub count_factor: f64,
    pub min_new: usize,
}

impl Default for AnomalyThreshold {
    fn default() -> Self {
        Self {
            count_factor: 2.0,
            min_new: 5,
        }
    }
}

/// Radio manipulation heuristic: legitimate movement changes scans
/// gradually, so a sudden jump in beacon count with many new identifiers is
/// flagged. Disappearance is never flagged: an attacker cannot suppress
/// context, so losing beacons is environmental.
pub fn radio_anomaly_check(
    history: &[BeaconSet],
    current: &BeaconSet,
    threshold: &AnomalyThreshold,
) -> bool {
    let Some(last) = history.last() else {
        return false;
    };
    let new_ids = current
        .identifiers()
        .filter(|id| !last.contains(id))
        .count();
    let jumped = (current.len() as f64) >= threshold.count_factor * (last.len() as f64);
    jumped && new_ids >= threshold.min_new
}

/// A verifier-emitted probe tone. Frequency must sit in the high audio
/// class (>= 5 kHz), which relayed prover audio will lack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeTone {
    freq_hz: f64,
    amplitude: f64,
}

impl ProbeTone {
    pub const MIN_FREQ_HZ: f64 = 5_000.0;
    /// Default full-scale amplitude; the probe does not need to be loud.
    pub const DEFAULT_AMPLITUDE: f64 = 0.1;

    pub fn new(freq_hz: f64, amplitude: f64) -> Result<Self, String> {
        if freq_hz < Self::MIN_FREQ_HZ {
            return Err(format!(
                "probe frequency {freq_hz} Hz below the high class ({} Hz)",
                Self::MIN_FREQ_HZ
            ));
        }
        if !(0.0..=1.0).contains(&amplitude) {
            return Err(format!("probe amplitude {amplitude} outside [0, 1]"));
        }
        Ok(Self { freq_hz, amplitude })
    }

    pub fn freq_hz(&self) -> f64 {
        self.freq_hz
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }
}

/// Add the probe tone to a locally sensed trace. Applied to the verifier's
/// sample while sensing; in a benign co-located session both devices hear
/// it, in a relay the forwarded prover audio lacks it.
pub fn emit_probe_tone(sample: &ContextSample, tone: &ProbeTone) -> ContextSample {
    let rate = sample.audio.sample_rate();
    let mixed: Vec<f64> = sample
        .audio
        .samples()
        .iter()
        .enumerate()
        .map(|(t, &s)| {
            s + tone.amplitude * (std::f64::consts::TAU * tone.freq_hz * t as f64 / rate).sin()
        })
        .collect();
    let mut out = sample.clone();
    out.audio.set_samples_clamped(mixed);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::{
        AudioTrace, Modality, PhysicalReadings, RadioKind, SENSING_WINDOW_DEFAULT_S,
    };
    use crate::features::audio_features;
    use crate::fusion::{train_fused, FusedTrainParams, FusionStrategy};
    use crate::seed::rng_for;
    use std::collections::BTreeSet;

    fn keyed_rng() -> impl rand::Rng {
        rng_for(77, crate::seed::stream::KEYS, 0)
    }

    #[test]
    fn response_verifies_and_rejects_bit_flips() {
        let mut rng = keyed_rng();
        let key = MacKey::from_rng(&mut rng);
        let wrong_key = MacKey::from_rng(&mut rng);
        let ch = [7u8; CHALLENGE_BYTES];
        let rsp = compute_response(&ch, &key);
        assert!(verify_response(&ch, &rsp, &key));
        let mut flipped = rsp.clone();
        flipped[3] ^= 0x80;
        assert!(!verify_response(&ch, &flipped, &key));
        assert!(!verify_response(&ch, &rsp, &wrong_key));
    }

    fn sample(t: f64, ap: &str, tone: f64) -> ContextSample {
        ContextSample {
            audio: AudioTrace::new(
                (0..512)
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
        }
    }

    fn toy_model() -> FusedModel {
        let mut pairs = Vec::new();
        for i in 0..24 {
            let co = i % 2 == 0;
            let (p, v) = if co {
                (sample(22.0, "ap-1", 400.0), sample(22.1, "ap-1", 400.0))
            } else {
                (sample(22.0, "ap-1", 400.0), sample(29.0, "ap-2", 900.0))
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
        let mods: BTreeSet<Modality> = [Modality::W, Modality::T].into_iter().collect();
        train_fused(
            &pairs,
            &mods,
            &FusionStrategy::features_fusion(),
            &FusedTrainParams::tree_default(0),
        )
        .unwrap()
    }

    fn principals(co_located: bool, rng: &mut impl rand::Rng) -> (Prover, Verifier, Comparator) {
        let key = MacKey::from_rng(rng);
        let (p, v) = if co_located {
            (sample(22.0, "ap-1", 400.0), sample(22.1, "ap-1", 400.0))
        } else {
            (sample(22.0, "ap-1", 400.0), sample(29.0, "ap-2", 900.0))
        };
        let prover = Prover {
            key: key.clone(),
            sample: p,
        };
        let verifier = Verifier {
            key: None,
            sample: v,
            radio_history: vec![],
        };
        let comparator = Comparator {
            prover_key: key,
            verifier_key: None,
            placement: ComparatorPlacement::IntegratedWithVerifier,
        };
        (prover, verifier, comparator)
    }

    #[test]
    fn benign_session_accepts() {
        let model = toy_model();
        let catalog = FeasibilityCatalog::default();
        let mut rng = keyed_rng();
        let (p, v, c) = principals(true, &mut rng);
        let t = run_session(&p, &v, &c, None, &model, &catalog, &mut rng).unwrap();
        assert!(t.mac_valid);
        assert_eq!(t.verdict, Verdict::Accept);
    }

    #[test]
    fn faithful_relay_is_rejected_by_context() {
        let model = toy_model();
        let catalog = FeasibilityCatalog::default();
        let mut rng = keyed_rng();
        let (p, v, c) = principals(false, &mut rng);
        let relay = RelayAttacker::default();
        let t = run_session(&p, &v, &c, Some(&relay), &model, &catalog, &mut rng).unwrap();
        assert!(t.mac_valid, "relaying preserves MAC validity");
        assert_eq!(t.verdict, Verdict::RejectNonCoPresent);
    }

    #[test]
    fn relay_with_radio_attack_follows_the_classifier() {
        let model = toy_model();
        let catalog = FeasibilityCatalog::default();
        let mut rng = keyed_rng();
        let (p, v, c) = principals(false, &mut rng);
        // {W, T} is feasible (subset of the {B, G, T, W} catalog entry); the
        // union plus zero-distance rebuilds exactly the model's notion of
        // co-presence.
        let relay = RelayAttacker {
            attack: Some(AttackSpec::new([Modality::W, Modality::T])),
            ..RelayAttacker::default()
        };
        let t = run_session(&p, &v, &c, Some(&relay), &model, &catalog, &mut rng).unwrap();
        assert!(t.mac_valid);
        assert_eq!(
            t.verdict,
            Verdict::Accept,
            "fully equalized context is accepted"
        );

        // An out-of-catalog combination is refused unless forced.
        let infeasible = RelayAttacker {
            attack: Some(AttackSpec::new([Modality::Al, Modality::T])),
            ..RelayAttacker::default()
        };
        assert!(run_session(&p, &v, &c, Some(&infeasible), &model, &catalog, &mut rng).is_err());
        let forced = RelayAttacker {
            force: true,
            ..infeasible
        };
        assert!(run_session(&p, &v, &c, Some(&forced), &model, &catalog, &mut rng).is_ok());
    }

    #[test]
    fn tampered_sessions_never_accept() {
        let model = toy_model();
        let catalog = FeasibilityCatalog::default();
        let mut rng = keyed_rng();
        for tamper in [
            Tamper::FlipResponseBit,
            Tamper::ForgeResponse,
            Tamper::RewriteProverContext,
        ] {
            let (p, v, c) = principals(false, &mut rng);
            let relay = RelayAttacker {
                tamper,
                ..RelayAttacker::default()
            };
            let t = run_session(&p, &v, &c, Some(&relay), &model, &catalog, &mut rng).unwrap();
            assert!(!t.mac_valid, "{tamper:?}");
            assert_eq!(t.verdict, Verdict::RejectMacInvalid, "{tamper:?}");
        }
    }

    #[test]
    fn dropped_response_times_out() {
        let model = toy_model();
        let catalog = FeasibilityCatalog::default();
        let mut rng = keyed_rng();
        let (p, v, c) = principals(false, &mut rng);
        let relay = RelayAttacker {
            tamper: Tamper::DropResponse,
            ..RelayAttacker::default()
        };
        assert!(matches!(
            run_session(&p, &v, &c, Some(&relay), &model, &catalog, &mut rng),
            Err(SessionError::Timeout(_))
        ));
    }

    #[test]
    fn excessive_relay_latency_times_out() {
        let model = toy_model();
        let catalog = FeasibilityCatalog::default();
        let mut rng = keyed_rng();
        let (p, v, c) = principals(false, &mut rng);
        let slow = RelayAttacker {
            delay_ms: RESPONSE_TIMEOUT_MS + 1,
            ..RelayAttacker::default()
        };
        assert!(matches!(
            run_session(&p, &v, &c, Some(&slow), &model, &catalog, &mut rng),
            Err(SessionError::Timeout(_))
        ));
        // An ordinary relay delay is harmless: no distance bounding here.
        let fast = RelayAttacker {
            delay_ms: 150,
            ..RelayAttacker::default()
        };
        assert!(run_session(&p, &v, &c, Some(&fast), &model, &catalog, &mut rng).is_ok());
    }

    #[test]
    fn transcript_dumps_as_json() {
        let model = toy_model();
        let catalog = FeasibilityCatalog::default();
        let mut rng = keyed_rng();
        let (p, v, c) = principals(true, &mut rng);
        let t = run_session(&p, &v, &c, None, &model, &catalog, &mut rng).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        let back: SessionTranscript = serde_json::from_str(&json).unwrap();
        assert_eq!(back.verdict, t.verdict);
        assert_eq!(back.challenge_hex, t.challenge_hex);
    }

    #[test]
    fn remote_comparator_uses_verifier_key() {
        let model = toy_model();
        let catalog = FeasibilityCatalog::default();
        let mut rng = keyed_rng();
        let k = MacKey::from_rng(&mut rng);
        let k_prime = MacKey::from_rng(&mut rng);
        let prover = Prover {
            key: k.clone(),
            sample: sample(22.0, "ap-1", 400.0),
        };
        let verifier = Verifier {
            key: Some(k_prime.clone()),
            sample: sample(22.1, "ap-1", 400.0),
            radio_history: vec![],
        };
        let comparator = Comparator {
            prover_key: k,
            verifier_key: Some(k_prime),
            placement: ComparatorPlacement::Remote,
        };
        let t = run_session(
            &prover,
            &verifier,
            &comparator,
            None,
            &model,
            &catalog,
            &mut rng,
        )
        .unwrap();
        assert!(t.mac_valid);
        assert_eq!(t.verdict, Verdict::Accept);
    }

    fn scan(n: usize, tag: &str) -> BeaconSet {
        BeaconSet::from_pairs(RadioKind::W, (0..n).map(|i| (format!("{tag}:{i}"), -50))).unwrap()
    }

    #[test]
    fn sudden_ap_burst_is_flagged() {
        let history = vec![scan(4, "a"), scan(4, "a"), scan(5, "a")];
        let current = scan(14, "spoofed");
        assert!(radio_anomaly_check(
            &history,
            &current,
            &AnomalyThreshold::default()
        ));
    }

    #[test]
    fn gradual_growth_is_not_flagged() {
        let history = vec![scan(4, "a"), scan(4, "a"), scan(5, "a")];
        let current = scan(6, "a");
        assert!(!radio_anomaly_check(
            &history,
            &current,
            &AnomalyThreshold::default()
        ));
    }

    #[test]
    fn disappearance_is_not_flagged() {
        let history = vec![scan(5, "a")];
        let current = BeaconSet::new(RadioKind::W);
        assert!(!radio_anomaly_check(
            &history,
            &current,
            &AnomalyThreshold::default()
        ));
    }

    #[test]
    fn probe_tone_dominates_low_frequency_ambient() {
        // 16 kHz rate so the 6 kHz probe sits below Nyquist.
        let mut low = sample(22.0, "ap-1", 80.0);
        low.audio = AudioTrace::new(
            (0..1024)
                .map(|k| 0.3 * (std::f64::consts::TAU * 80.0 * k as f64 / 16_000.0).sin())
                .collect(),
            16_000.0,
        )
        .unwrap();
        let tone = ProbeTone::new(6_000.0, 0.5).unwrap();
        let probed = emit_probe_tone(&low, &tone);
        let f = audio_features(&probed.audio, &probed.audio).unwrap();
        assert_eq!(f.dominant_freq_diff_hz, 0.0);
        // Dominant frequency moved into the probe band.
        let spectrum_shift = audio_features(&low.audio, &probed.audio).unwrap();
        assert!(spectrum_shift.dominant_freq_diff_hz > 4_000.0);
    }

    #[test]
    fn zero_amplitude_probe_is_identity() {
        let s = sample(22.0, "ap-1", 80.0);
        let tone = ProbeTone::new(6_000.0, 0.0).unwrap();
        let probed = emit_probe_tone(&s, &tone);
        assert_eq!(probed, s);
    }

    #[test]
    fn probe_applied_to_both_sides_restores_the_match() {
        let s = sample(22.0, "ap-1", 80.0);
        let tone = ProbeTone::new(6_000.0, 0.3).unwrap();
        let both_p = emit_probe_tone(&s, &tone);
        let both_v = emit_probe_tone(&s, &tone);
        let f = audio_features(&both_p.audio, &both_v.audio).unwrap();
        assert!(f.xcorr_max > 0.999);
        assert_eq!(f.dominant_freq_diff_hz, 0.0);
    }

    #[test]
    fn probe_below_high_class_is_rejected() {
        assert!(ProbeTone::new(400.0, 0.1).is_err());
        assert!(ProbeTone::new(5_000.0, 0.1).is_ok());
        assert!(ProbeTone::new(6_000.0, 1.5).is_err());
    }
}
