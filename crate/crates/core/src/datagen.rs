//! Synthetic environment and dataset generator.
//!
//! Stands in for unavailable field datasets: every constant here is
//! synthetic, chosen so that the generated benchmark reproduces the
//! qualitative structure of real co-presence data — shared beacon sets and
//! correlated audio for co-located devices, disjoint context across venues,
//! borderline "adjacent room" negatives, and paired-device calibration error
//! that makes co-presence physical distances multimodal.
//!
//! Generation is deterministic: every pair derives its own RNG from
//! `(seed, pair index)`, so datasets are byte-identical across runs and
//! independent of generation order.

use std::f64::consts::TAU;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::context::{
    AudioTrace, BeaconSet, ContextPair, ContextSample, Label, PhysicalReadings, RadioKind,
};
use crate::dataset::{write_dataset, DatasetError};
use crate::seed::{derive_seed, rng_for, stream};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("unknown profile {0:?}")]
    UnknownProfile(String),
    #[error("config invalid: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] DatasetError),
}

/// Ambient audio class by dominant frequency band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AudioClass {
    /// Dominant frequency below 100 Hz.
    Low,
    /// Human-audible range around 500 Hz.
    Medium,
    /// 5000 Hz or more.
    High,
}

impl AudioClass {
    /// Tone frequency band the class draws from.
    pub fn band(self) -> (f64, f64) {
        match self {
            AudioClass::Low => (40.0, 90.0),
            AudioClass::Medium => (300.0, 800.0),
            AudioClass::High => (5_000.0, 6_500.0),
        }
    }
}

impl std::fmt::Display for AudioClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AudioClass::Low => f.write_str("low"),
            AudioClass::Medium => f.write_str("medium"),
            AudioClass::High => f.write_str("high"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AudioProfile {
    pub class: AudioClass,
    /// Dominant tone amplitude (full scale is 1.0).
    pub tone_amplitude: f64,
    /// White-noise floor amplitude shared by both co-located devices.
    pub noise_floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioDensity {
    pub count_min: usize,
    pub count_max: usize,
    pub rssi_low: f64,
    pub rssi_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalBaseline {
    pub temperature: f64,
    pub temperature_jitter: f64,
    pub humidity: f64,
    pub humidity_jitter: f64,
    pub gas_co: f64,
    pub gas_jitter: f64,
    pub altitude: f64,
    pub altitude_jitter: f64,
}

/// Co-located measurement discrepancy: what two devices in the same spot
/// disagree about.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorNoise {
    pub temperature: f64,
    pub humidity: f64,
    pub gas_co: f64,
    pub altitude: f64,
    pub rssi_jitter_db: f64,
    pub wifi_miss_prob: f64,
    pub wifi_scan_fail_prob: f64,
    pub bt_miss_prob: f64,
    pub bt_scan_fail_prob: f64,
    pub mic_sigma: f64,
    /// Probability that the verifier-side microphone is degraded for a pair.
    pub noisy_mic_prob: f64,
    pub noisy_mic_sigma: (f64, f64),
    /// Probability of a near-field sound source at one device (a keyboard
    /// next to one phone, a cup on the table): audible on that side only,
    /// so co-located traces decorrelate without the pair being non-co-present.
    #[serde(default)]
    pub near_field_prob: f64,
    #[serde(default)]
    pub near_field_amp: (f64, f64),
}

/// Venues in the same infrastructure group share a pool of access points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfraGroup {
    pub group: String,
    pub pool_size: usize,
    pub draw_min: usize,
    pub draw_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentProfile {
    pub name: String,
    pub audio: AudioProfile,
    pub wifi: RadioDensity,
    pub bluetooth: RadioDensity,
    pub physical: PhysicalBaseline,
    pub noise: SensorNoise,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub infrastructure: Option<InfraGroup>,
}

/// Paired-device calibration offsets. With hardware variance on, each
/// physical modality's co-presence distance histogram becomes multimodal:
/// one mode near zero and one at the offset mode value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardwareVariance {
    /// Probability that a device pair carries the mode offset per modality.
    pub mode_prob: f64,
    pub temperature_mode: f64,
    pub humidity_mode: f64,
    pub gas_mode: f64,
    pub altitude_mode: f64,
    /// Relative sigma of the offset around its mode.
    pub relative_sigma: f64,
}

impl Default for HardwareVariance {
    fn default() -> Self {
        Self {
            mode_prob: 0.5,
            temperature_mode: 0.153,
            humidity_mode: 6.61,
            gas_mode: 0.3,
            altitude_mode: 13.54,
            relative_sigma: 0.06,
        }
    }
}

/// Trace format and the shared infra-sound hum present in every venue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AudioFormat {
    pub sample_rate_hz: f64,
    pub duration_s: f64,
    pub hum_amplitude: f64,
    pub hum_band: (f64, f64),
}

impl Default for AudioFormat {
    fn default() -> Self {
        Self {
            sample_rate_hz: 16_000.0,
            duration_s: 0.25,
            hum_amplitude: 0.1,
            hum_band: (35.0, 55.0),
        }
    }
}

impl AudioFormat {
    pub fn n_samples(&self) -> usize {
        (self.sample_rate_hz * self.duration_s).round() as usize
    }
}

/// One entry of the non-co-present sampling mix. Adjacent pairs model two
/// rooms in the same building: audio bleed-through, mostly shared WiFi and
/// near-identical physical readings — hard negatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonCoMixEntry {
    pub prover: String,
    pub verifier: String,
    #[serde(default)]
    pub adjacent: bool,
}

fn default_bleed() -> f64 {
    0.12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub version: u32,
    pub seed: u64,
    pub co_count: usize,
    pub non_co_count: usize,
    pub sensing_window_s: f64,
    pub audio: AudioFormat,
    pub hardware_variance: bool,
    pub hardware: HardwareVariance,
    /// Audio bleed-through fraction between adjacent-room pairs.
    #[serde(default = "default_bleed")]
    pub adjacent_bleed: f64,
    pub profiles: Vec<EnvironmentProfile>,
    /// Co-present pairs cycle through these profile names.
    pub co_mix: Vec<String>,
    /// Non-co-present pairs cycle through these entries.
    pub non_co_mix: Vec<NonCoMixEntry>,
}

#[allow(clippy::too_many_arguments)]
fn profile(
    name: &str,
    class: AudioClass,
    amp: f64,
    floor: f64,
    wifi: (usize, usize),
    bt: (usize, usize),
    phys: (f64, f64, f64, f64),
    jitter: (f64, f64, f64, f64),
    infra: Option<InfraGroup>,
) -> EnvironmentProfile {
    EnvironmentProfile {
        name: name.to_string(),
        audio: AudioProfile {
            class,
            tone_amplitude: amp,
            noise_floor: floor,
        },
        wifi: RadioDensity {
            count_min: wifi.0,
            count_max: wifi.1,
            rssi_low: -80.0,
            rssi_high: -35.0,
        },
        bluetooth: RadioDensity {
            count_min: bt.0,
            count_max: bt.1,
            rssi_low: -90.0,
            rssi_high: -45.0,
        },
        physical: PhysicalBaseline {
            temperature: phys.0,
            temperature_jitter: jitter.0,
            humidity: phys.1,
            humidity_jitter: jitter.1,
            gas_co: phys.2,
            gas_jitter: jitter.2,
            altitude: phys.3,
            altitude_jitter: jitter.3,
        },
        noise: SensorNoise {
            temperature: 0.6,
            humidity: 3.5,
            gas_co: 0.5,
            altitude: 2.0,
            rssi_jitter_db: 2.0,
            wifi_miss_prob: 0.05,
            wifi_scan_fail_prob: 0.05,
            bt_miss_prob: 0.15,
            bt_scan_fail_prob: 0.08,
            mic_sigma: 0.01,
            noisy_mic_prob: 0.12,
            noisy_mic_sigma: (0.3, 0.8),
            near_field_prob: 0.25,
            near_field_amp: (0.15, 0.55),
        },
        infrastructure: infra,
    }
}

/// The four shipped venue profiles.
pub fn default_profiles() -> Vec<EnvironmentProfile> {
    let downtown = |draws: (usize, usize)| {
        Some(InfraGroup {
            group: "downtown".to_string(),
            pool_size: 5,
            draw_min: draws.0,
            draw_max: draws.1,
        })
    };
    let mut office = profile(
        "office",
        AudioClass::Medium,
        0.30,
        0.05,
        (10, 14),
        (1, 3),
        (22.5, 42.0, 1.5, 118.0),
        (0.8, 3.0, 0.5, 1.5),
        downtown((2, 3)),
    );
    // Dense, reliable office WiFi: co-located scans agree to jaccard <= 0.2
    // in at least 95% of draws.
    office.noise.wifi_miss_prob = 0.02;
    office.noise.wifi_scan_fail_prob = 0.01;
    vec![
        office,
        profile(
            "cafe",
            AudioClass::High,
            0.34,
            0.05,
            (6, 10),
            (1, 4),
            (24.0, 50.0, 3.0, 121.0),
            (0.8, 3.0, 0.5, 1.5),
            downtown((2, 3)),
        ),
        profile(
            "home",
            AudioClass::Low,
            0.28,
            0.04,
            (3, 6),
            (0, 2),
            (21.0, 46.0, 0.8, 126.0),
            (0.8, 3.0, 0.3, 1.5),
            None,
        ),
        profile(
            "parking-lot",
            AudioClass::Low,
            0.26,
            0.06,
            (1, 4),
            (0, 1),
            (28.0, 60.0, 12.0, 115.0),
            (1.5, 4.0, 2.0, 1.5),
            None,
        ),
    ]
}

impl GenConfig {
    /// The shipped benchmark: seed 42, 335 co-present / 203 non-co-present
    /// pairs over the full profile mix with hardware variance on.
    pub fn benchmark() -> Self {
        let co_mix = ["office", "cafe", "home", "parking-lot"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let entry = |p: &str, v: &str, adjacent: bool| NonCoMixEntry {
            prover: p.to_string(),
            verifier: v.to_string(),
            adjacent,
        };
        let non_co_mix = vec![
            entry("office", "cafe", false),
            entry("office", "home", false),
            entry("office", "parking-lot", false),
            entry("cafe", "home", false),
            entry("cafe", "office", false),
            entry("home", "parking-lot", false),
            entry("office", "office", true),
            entry("home", "cafe", false),
            entry("parking-lot", "office", false),
            entry("cafe", "cafe", true),
            entry("home", "home", false),
            entry("parking-lot", "home", false),
            entry("cafe", "parking-lot", false),
            entry("home", "office", false),
            entry("office", "office", false),
            entry("parking-lot", "cafe", false),
        ];
        Self {
            version: 1,
            seed: 42,
            co_count: 335,
            non_co_count: 203,
            sensing_window_s: crate::context::SENSING_WINDOW_DEFAULT_S,
            audio: AudioFormat::default(),
            hardware_variance: true,
            hardware: HardwareVariance::default(),
            adjacent_bleed: default_bleed(),
            profiles: default_profiles(),
            co_mix,
            non_co_mix,
        }
    }

    /// Physical-system replication preset: the non-co-present class is about
    /// 18 times larger than the co-present class, the imbalance the 19-subset
    /// rotation under-sampling corrects.
    pub fn physical_imbalance() -> Self {
        Self {
            co_count: 30,
            non_co_count: 540,
            ..Self::benchmark()
        }
    }

    pub fn profile(&self, name: &str) -> Result<&EnvironmentProfile, GenError> {
        self.profiles
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| GenError::UnknownProfile(name.to_string()))
    }

    fn validate(&self) -> Result<(), GenError> {
        if self.co_count == 0 || self.non_co_count == 0 {
            return Err(GenError::InvalidConfig(
                "pair counts must be positive".into(),
            ));
        }
        if self.co_mix.is_empty() || self.non_co_mix.is_empty() {
            return Err(GenError::InvalidConfig("mix lists must be nonempty".into()));
        }
        for name in &self.co_mix {
            self.profile(name)?;
        }
        for e in &self.non_co_mix {
            self.profile(&e.prover)?;
            self.profile(&e.verifier)?;
            if e.adjacent && e.prover != e.verifier {
                return Err(GenError::InvalidConfig(format!(
                    "adjacent mix entry must use one profile, got {} / {}",
                    e.prover, e.verifier
                )));
            }
        }
        for p in &self.profiles {
            if p.wifi.count_min > p.wifi.count_max || p.bluetooth.count_min > p.bluetooth.count_max
            {
                return Err(GenError::InvalidConfig(format!(
                    "profile {}: count range",
                    p.name
                )));
            }
        }
        Ok(())
    }
}

// --- environment instances ---------------------------------------------------

/// One concrete venue at one moment: true beacon inventory, true physical
/// values and the ambient audio signal every co-located device hears.
struct Instance {
    wifi: Vec<(String, f64)>,
    bt: Vec<(String, f64)>,
    /// T, H, G, Al environment values.
    phys: [f64; 4],
    /// Tone + floor, before the shared hum is added.
    own_signal: Vec<f64>,
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; two uniforms per draw keeps the stream simple.
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

/// Shared infra-sound hum: every venue hears the same distant rumble, which
/// is what keeps non-co-present audio correlation small but nonzero.
pub fn make_hum(seed: u64, fmt: &AudioFormat) -> Vec<f64> {
    let mut rng = rng_for(seed, stream::DATAGEN_HUM, 0);
    let n = fmt.n_samples();
    let k = 3;
    let comps: Vec<(f64, f64)> = (0..k)
        .map(|_| {
            (
                rng.gen_range(fmt.hum_band.0..fmt.hum_band.1),
                rng.gen_range(0.0..TAU),
            )
        })
        .collect();
    let amp = fmt.hum_amplitude / (k as f64).sqrt();
    (0..n)
        .map(|t| {
            let time = t as f64 / fmt.sample_rate_hz;
            comps
                .iter()
                .map(|(f, p)| amp * (TAU * f * time + p).sin())
                .sum()
        })
        .collect()
}

fn instance(pf: &EnvironmentProfile, fmt: &AudioFormat, rng: &mut ChaCha8Rng) -> Instance {
    let nonce: u32 = rng.gen();
    let mut wifi = Vec::new();
    let n_wifi = rng.gen_range(pf.wifi.count_min..=pf.wifi.count_max);
    let mut pool_draw = 0usize;
    if let Some(infra) = &pf.infrastructure {
        pool_draw = rng.gen_range(infra.draw_min..=infra.draw_max).min(n_wifi);
        let mut pool: Vec<usize> = (0..infra.pool_size).collect();
        for i in 0..pool_draw.min(infra.pool_size) {
            let j = rng.gen_range(i..infra.pool_size);
            pool.swap(i, j);
            wifi.push((
                format!("ap:{}:{}", infra.group, pool[i]),
                rng.gen_range(pf.wifi.rssi_low..pf.wifi.rssi_high),
            ));
        }
    }
    for i in pool_draw..n_wifi {
        wifi.push((
            format!("ap:{nonce:08x}:{i}"),
            rng.gen_range(pf.wifi.rssi_low..pf.wifi.rssi_high),
        ));
    }
    let n_bt = rng.gen_range(pf.bluetooth.count_min..=pf.bluetooth.count_max);
    let bt = (0..n_bt)
        .map(|i| {
            (
                format!("bt:{nonce:08x}:{i}"),
                rng.gen_range(pf.bluetooth.rssi_low..pf.bluetooth.rssi_high),
            )
        })
        .collect();

    let pb = &pf.physical;
    let phys = [
        pb.temperature + pb.temperature_jitter * gauss(rng),
        (pb.humidity + pb.humidity_jitter * gauss(rng)).clamp(0.0, 100.0),
        (pb.gas_co + pb.gas_jitter * gauss(rng)).max(0.0),
        pb.altitude + pb.altitude_jitter * gauss(rng),
    ];

    let own_signal = venue_audio(pf, fmt, rng);
    Instance {
        wifi,
        bt,
        phys,
        own_signal,
    }
}

/// Four dominant tones in the class band plus a white floor. Splitting the
/// tone energy keeps a chance frequency collision between two venues from
/// correlating their whole traces.
fn venue_audio(pf: &EnvironmentProfile, fmt: &AudioFormat, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let (band_lo, band_hi) = pf.audio.class.band();
    let amp = pf.audio.tone_amplitude * rng.gen_range(0.85..1.15) / 2.0;
    let tones: Vec<(f64, f64)> = (0..4)
        .map(|_| (rng.gen_range(band_lo..band_hi), rng.gen_range(0.0..TAU)))
        .collect();
    let n = fmt.n_samples();
    (0..n)
        .map(|t| {
            let time = t as f64 / fmt.sample_rate_hz;
            let tone: f64 = tones
                .iter()
                .map(|(f, p)| amp * (TAU * f * time + p).sin())
                .sum();
            tone + pf.audio.noise_floor * gauss(rng)
        })
        .collect()
}

fn quantize(x: f64) -> f64 {
    (x.clamp(-1.0, 1.0) * 1e6).round() / 1e6
}

struct SideNoise<'a> {
    noise: &'a SensorNoise,
    mic_sigma: f64,
    /// Calibration offsets (T, H, G, Al) for this device, or zeros.
    hw_offset: [f64; 4],
}

fn sense(
    inst: &Instance,
    signal: &[f64],
    side: &SideNoise,
    window_s: f64,
    fmt: &AudioFormat,
    rng: &mut ChaCha8Rng,
) -> ContextSample {
    let near_field = if rng.gen_range(0.0..1.0) < side.noise.near_field_prob {
        let (lo, hi) = side.noise.near_field_amp;
        Some((
            rng.gen_range(120.0..6_800.0),
            rng.gen_range(lo..hi.max(lo + 1e-9)),
            rng.gen_range(0.0..TAU),
        ))
    } else {
        None
    };
    let samples: Vec<f64> = signal
        .iter()
        .enumerate()
        .map(|(t, &s)| {
            let mut v = s + side.mic_sigma * gauss(rng);
            if let Some((freq, amp, phase)) = near_field {
                let time = t as f64 / fmt.sample_rate_hz;
                v += amp * (TAU * freq * time + phase).sin();
            }
            quantize(v)
        })
        .collect();

    let mut wifi = BeaconSet::new(RadioKind::W);
    if rng.gen_range(0.0..1.0) >= side.noise.wifi_scan_fail_prob {
        for (id, true_rssi) in &inst.wifi {
            if rng.gen_range(0.0..1.0) < side.noise.wifi_miss_prob {
                continue;
            }
            let sensed = (true_rssi + side.noise.rssi_jitter_db * gauss(rng)).round();
            wifi.insert(id.clone(), (sensed as i32).clamp(-100, 0)).ok();
        }
    }
    let mut bt = BeaconSet::new(RadioKind::B);
    if rng.gen_range(0.0..1.0) >= side.noise.bt_scan_fail_prob {
        for (id, true_rssi) in &inst.bt {
            if rng.gen_range(0.0..1.0) < side.noise.bt_miss_prob {
                continue;
            }
            let sensed = (true_rssi + side.noise.rssi_jitter_db * gauss(rng)).round();
            bt.insert(id.clone(), (sensed as i32).clamp(-100, 0)).ok();
        }
    }

    let n = &side.noise;
    let physical = PhysicalReadings {
        temperature: inst.phys[0] + n.temperature * gauss(rng) + side.hw_offset[0],
        humidity: (inst.phys[1] + n.humidity * gauss(rng) + side.hw_offset[1]).clamp(0.0, 100.0),
        gas_co: (inst.phys[2] + n.gas_co * gauss(rng) + side.hw_offset[2]).max(0.0),
        altitude: inst.phys[3] + n.altitude * gauss(rng) + side.hw_offset[3],
    };

    ContextSample {
        audio: AudioTrace::new(samples, fmt.sample_rate_hz).expect("positive rate"),
        wifi,
        bluetooth: bt,
        physical,
        sensed_at: 0.0,
        sensing_window: window_s,
    }
}

fn hw_offsets(hw: &HardwareVariance, rng: &mut ChaCha8Rng) -> [f64; 4] {
    let mut out = [0.0; 4];
    let modes = [
        hw.temperature_mode,
        hw.humidity_mode,
        hw.gas_mode,
        hw.altitude_mode,
    ];
    for (slot, mode) in out.iter_mut().zip(modes) {
        if rng.gen_range(0.0..1.0) < hw.mode_prob {
            *slot = mode * (1.0 + hw.relative_sigma * gauss(rng));
        }
    }
    out
}

/// Deterministic generator over one config.
pub struct Generator {
    config: GenConfig,
    hum: Vec<f64>,
}

impl Generator {
    pub fn new(config: GenConfig) -> Result<Self, GenError> {
        config.validate()?;
        let hum = make_hum(config.seed, &config.audio);
        Ok(Self { config, hum })
    }

    pub fn config(&self) -> &GenConfig {
        &self.config
    }

    fn mix_signal(&self, own: &[f64], bleed: Option<&[f64]>) -> Vec<f64> {
        own.iter()
            .enumerate()
            .map(|(t, &s)| {
                let mut v = self.hum[t] + s;
                if let Some(other) = bleed {
                    v += self.config.adjacent_bleed * other[t];
                }
                v
            })
            .collect()
    }

    /// Both sides sense one environment instance; discrepancies come only
    /// from the sensor-noise model and hardware calibration offsets.
    pub fn copresent_pair(
        &self,
        profile: &EnvironmentProfile,
        pair_seed: u64,
        pair_id: String,
    ) -> ContextPair {
        let mut rng = rng_for(pair_seed, stream::DATAGEN_PAIR, 0);
        let inst = instance(profile, &self.config.audio, &mut rng);
        let signal = self.mix_signal(&inst.own_signal, None);
        let noisy_verifier = rng.gen_range(0.0..1.0) < profile.noise.noisy_mic_prob;
        let verifier_mic = if noisy_verifier {
            rng.gen_range(profile.noise.noisy_mic_sigma.0..profile.noise.noisy_mic_sigma.1)
        } else {
            profile.noise.mic_sigma
        };
        let offsets = if self.config.hardware_variance {
            hw_offsets(&self.config.hardware, &mut rng)
        } else {
            [0.0; 4]
        };
        let prover_side = SideNoise {
            noise: &profile.noise,
            mic_sigma: profile.noise.mic_sigma,
            hw_offset: [0.0; 4],
        };
        let verifier_side = SideNoise {
            noise: &profile.noise,
            mic_sigma: verifier_mic,
            hw_offset: offsets,
        };
        let prover = sense(
            &inst,
            &signal,
            &prover_side,
            self.config.sensing_window_s,
            &self.config.audio,
            &mut rng,
        );
        let verifier = sense(
            &inst,
            &signal,
            &verifier_side,
            self.config.sensing_window_s,
            &self.config.audio,
            &mut rng,
        );
        ContextPair {
            prover,
            verifier,
            label: Label::CoPresent,
            pair_id,
        }
    }

    /// Two distinct environment instances. `adjacent` derives the verifier's
    /// venue from the prover's: bleed-through audio, mostly shared WiFi with
    /// wall attenuation, near-identical physical readings.
    pub fn noncopresent_pair(
        &self,
        profile_p: &EnvironmentProfile,
        profile_v: &EnvironmentProfile,
        adjacent: bool,
        pair_seed: u64,
        pair_id: String,
    ) -> ContextPair {
        let mut rng = rng_for(pair_seed, stream::DATAGEN_PAIR, 1);
        let inst_p = instance(profile_p, &self.config.audio, &mut rng);
        let inst_v = if adjacent {
            adjacent_instance(&inst_p, profile_v, &self.config.audio, &mut rng)
        } else {
            instance(profile_v, &self.config.audio, &mut rng)
        };
        let bleed = adjacent;
        let signal_p = self.mix_signal(
            &inst_p.own_signal,
            bleed.then_some(inst_v.own_signal.as_slice()),
        );
        let signal_v = self.mix_signal(
            &inst_v.own_signal,
            bleed.then_some(inst_p.own_signal.as_slice()),
        );
        let noisy_verifier = rng.gen_range(0.0..1.0) < profile_v.noise.noisy_mic_prob;
        let verifier_mic = if noisy_verifier {
            rng.gen_range(profile_v.noise.noisy_mic_sigma.0..profile_v.noise.noisy_mic_sigma.1)
        } else {
            profile_v.noise.mic_sigma
        };
        let offsets = if self.config.hardware_variance {
            hw_offsets(&self.config.hardware, &mut rng)
        } else {
            [0.0; 4]
        };
        let prover_side = SideNoise {
            noise: &profile_p.noise,
            mic_sigma: profile_p.noise.mic_sigma,
            hw_offset: [0.0; 4],
        };
        let verifier_side = SideNoise {
            noise: &profile_v.noise,
            mic_sigma: verifier_mic,
            hw_offset: offsets,
        };
        let prover = sense(
            &inst_p,
            &signal_p,
            &prover_side,
            self.config.sensing_window_s,
            &self.config.audio,
            &mut rng,
        );
        let verifier = sense(
            &inst_v,
            &signal_v,
            &verifier_side,
            self.config.sensing_window_s,
            &self.config.audio,
            &mut rng,
        );
        ContextPair {
            prover,
            verifier,
            label: Label::NonCoPresent,
            pair_id,
        }
    }

    /// Generate the configured dataset: co-present pairs first, then
    /// non-co-present, each cycling its mix list.
    pub fn generate(&self) -> Result<Vec<ContextPair>, GenError> {
        let mut pairs = Vec::with_capacity(self.config.co_count + self.config.non_co_count);
        for i in 0..self.config.co_count {
            let name = &self.config.co_mix[i % self.config.co_mix.len()];
            let pf = self.config.profile(name)?;
            let pair_seed = derive_seed(self.config.seed, stream::DATAGEN_PAIR, i as u64);
            pairs.push(self.copresent_pair(pf, pair_seed, format!("co-{i:04}")));
        }
        for i in 0..self.config.non_co_count {
            let entry = &self.config.non_co_mix[i % self.config.non_co_mix.len()];
            let pf_p = self.config.profile(&entry.prover)?;
            let pf_v = self.config.profile(&entry.verifier)?;
            let pair_seed = derive_seed(
                self.config.seed,
                stream::DATAGEN_PAIR,
                (self.config.co_count + i) as u64,
            );
            pairs.push(self.noncopresent_pair(
                pf_p,
                pf_v,
                entry.adjacent,
                pair_seed,
                format!("non-{i:04}"),
            ));
        }
        Ok(pairs)
    }
}

/// A venue next door: same building infrastructure and climate, different
/// room.
fn adjacent_instance(
    base: &Instance,
    pf: &EnvironmentProfile,
    fmt: &AudioFormat,
    rng: &mut ChaCha8Rng,
) -> Instance {
    let nonce: u32 = rng.gen();
    let mut wifi = Vec::new();
    for (id, rssi) in &base.wifi {
        if rng.gen_range(0.0..1.0) < 0.7 {
            let attenuated = rssi - 8.0 + 3.0 * gauss(rng);
            wifi.push((id.clone(), attenuated.clamp(-95.0, -20.0)));
        }
    }
    let extra = rng.gen_range(1..=3usize);
    for i in 0..extra {
        wifi.push((
            format!("ap:{nonce:08x}:{i}"),
            rng.gen_range(pf.wifi.rssi_low..pf.wifi.rssi_high),
        ));
    }
    let n_bt = rng.gen_range(pf.bluetooth.count_min..=pf.bluetooth.count_max);
    let bt = (0..n_bt)
        .map(|i| {
            (
                format!("bt:{nonce:08x}:{i}"),
                rng.gen_range(pf.bluetooth.rssi_low..pf.bluetooth.rssi_high),
            )
        })
        .collect();
    let phys = [
        base.phys[0] + 0.4 * gauss(rng),
        (base.phys[1] + 2.0 * gauss(rng)).clamp(0.0, 100.0),
        (base.phys[2] + 0.4 * gauss(rng)).max(0.0),
        base.phys[3] + 1.0 * gauss(rng),
    ];
    let own_signal = venue_audio(pf, fmt, rng);
    Instance {
        wifi,
        bt,
        phys,
        own_signal,
    }
}

/// Generate and write a dataset file.
pub fn gen_dataset(config: GenConfig, path: &Path) -> Result<usize, GenError> {
    let generator = Generator::new(config)?;
    let pairs = generator.generate()?;
    write_dataset(path, &pairs)?;
    Ok(pairs.len())
}
