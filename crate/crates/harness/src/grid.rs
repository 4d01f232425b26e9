//! The audio relay grid: streaming-attack success per (prover class ->
//! verifier class) cell under different relay channel presets.
//!
//! An audio-only model is trained on clean pairs spanning all three
//! frequency classes (including same-class non-co-present pairs, which is
//! what anchors the decision boundary between "same room" and "same class
//! of room"). Each grid trial draws a fresh non-co-present pair, streams
//! the prover's ambient audio through the channel into the verifier's
//! environment and asks the model whether the mixed context passes.

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use copresence::context::{ContextPair, Label, Modality};
use copresence::datagen::{
    AudioClass, AudioFormat, EnvironmentProfile, GenConfig, Generator, NonCoMixEntry,
};
use copresence::features::{assemble, FeatureSchema, FeatureVector};
use copresence::fusion::{
    fused_predict_projected, train_fused_from_features, unit_projections, FusedModel,
    FusedTrainParams, FusionStrategy,
};
use copresence::learn::ClassifierKind;
use copresence::proto::{emit_probe_tone, ProbeTone};
use copresence::seed::{derive_seed, rng_for, stream};

use crate::HarnessError;

/// Relay channel model. Playback through a speaker always loses some level
/// (`gain`); the cellular-like preset additionally band-limits to telephony
/// bandwidth and jitters the stream start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelPreset {
    pub name: String,
    pub gain: f64,
    pub band_pass_hz: Option<(f64, f64)>,
    pub jitter_ms: f64,
}

impl ChannelPreset {
    /// WiFi-quality streaming: the attacker reproduces the remote ambient
    /// at matched level.
    pub fn clean() -> Self {
        Self {
            name: "clean".into(),
            gain: 1.0,
            band_pass_hz: None,
            jitter_ms: 0.0,
        }
    }

    /// Cellular-quality streaming: telephony band-pass 300-3400 Hz, lower
    /// effective level, start-time jitter.
    pub fn lossy() -> Self {
        Self {
            name: "lossy".into(),
            gain: 0.45,
            band_pass_hz: Some((300.0, 3_400.0)),
            jitter_ms: 10.0,
        }
    }

    /// Degrade a relayed trace.
    pub fn apply(&self, samples: &[f64], rate: f64, rng: &mut impl rand::Rng) -> Vec<f64> {
        let mut out: Vec<f64> = match self.band_pass_hz {
            Some((lo, hi)) => band_pass(samples, rate, lo, hi),
            None => samples.to_vec(),
        };
        for v in &mut out {
            *v *= self.gain;
        }
        if self.jitter_ms > 0.0 {
            let max_shift = ((self.jitter_ms / 1_000.0) * rate).round() as i64;
            if max_shift > 0 {
                let shift = rng.gen_range(-max_shift..=max_shift);
                out = rotate(&out, shift);
            }
        }
        out
    }
}

fn band_pass(samples: &[f64], rate: f64, lo: f64, hi: f64) -> Vec<f64> {
    let n = samples.len();
    if n == 0 {
        return Vec::new();
    }
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex<f64>> = samples.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft.process(&mut buf);
    let bin_hz = rate / n as f64;
    for (k, c) in buf.iter_mut().enumerate() {
        // Mirror bins share a frequency.
        let f = (k.min(n - k)) as f64 * bin_hz;
        if f < lo || f > hi {
            *c = Complex::new(0.0, 0.0);
        }
    }
    ifft.process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter().map(|c| c.re * scale).collect()
}

fn rotate(samples: &[f64], shift: i64) -> Vec<f64> {
    let n = samples.len() as i64;
    (0..n)
        .map(|i| samples[((i - shift).rem_euclid(n)) as usize])
        .collect()
}

/// Grid experiment parameters.
#[derive(Debug, Clone)]
pub struct GridPlan {
    pub trials_per_cell: usize,
    pub channels: Vec<ChannelPreset>,
    pub probe: Option<ProbeTone>,
    pub seed: u64,
    pub threads: usize,
    /// Training pairs per class (co-present) and per ordered class pair
    /// (non-co-present).
    pub train_co_per_class: usize,
    pub train_non_per_combo: usize,
}

impl GridPlan {
    pub fn new(seed: u64) -> Self {
        Self {
            trials_per_cell: 50,
            channels: vec![ChannelPreset::clean(), ChannelPreset::lossy()],
            probe: None,
            seed,
            threads: 0,
            train_co_per_class: 30,
            train_non_per_combo: 12,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridCell {
    pub channel: String,
    pub prover_class: String,
    pub verifier_class: String,
    pub trials: usize,
    pub accepted: usize,
}

impl GridCell {
    pub fn rate(&self) -> f64 {
        self.accepted as f64 / self.trials as f64
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridReport {
    pub cells: Vec<GridCell>,
    pub seed: u64,
    pub probe: Option<ProbeTone>,
}

impl GridReport {
    pub fn cell(&self, channel: &str, prover: AudioClass, verifier: AudioClass) -> &GridCell {
        self.cells
            .iter()
            .find(|c| {
                c.channel == channel
                    && c.prover_class == prover.to_string()
                    && c.verifier_class == verifier.to_string()
            })
            .expect("grid covers all cells")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("channel,prover_class,verifier_class,trials,accepted,rate\n");
        for c in &self.cells {
            out.push_str(&format!(
                "{},{},{},{},{},{:.4}\n",
                c.channel,
                c.prover_class,
                c.verifier_class,
                c.trials,
                c.accepted,
                c.rate()
            ));
        }
        out
    }
}

pub const GRID_CLASSES: [AudioClass; 3] = [AudioClass::Low, AudioClass::Medium, AudioClass::High];

/// Class-pinned environments for the grid. Louder classes are genuinely
/// louder: the amplitude ladder is what makes high-frequency environments
/// dominate lower ones after mixing.
pub fn grid_profile(class: AudioClass) -> EnvironmentProfile {
    let mut cfg = GenConfig::benchmark();
    let mut profile = cfg.profiles.remove(0);
    profile.name = format!("grid-{class}");
    profile.audio.class = class;
    let (amp, floor) = match class {
        AudioClass::Low => (0.08, 0.03),
        AudioClass::Medium => (0.30, 0.05),
        AudioClass::High => (0.60, 0.06),
    };
    profile.audio.tone_amplitude = amp;
    profile.audio.noise_floor = floor;
    profile.infrastructure = None;
    // The grid isolates the energy-dominance effect: clean microphones, no
    // near-field events.
    profile.noise.mic_sigma = 0.01;
    profile.noise.noisy_mic_prob = 0.0;
    profile.noise.near_field_prob = 0.0;
    // Radio/physical channels are irrelevant to the audio-only system but
    // keep the samples valid.
    profile.wifi.count_min = 1;
    profile.wifi.count_max = 3;
    profile
}

fn grid_gen_config(seed: u64) -> GenConfig {
    let mut cfg = GenConfig::benchmark();
    cfg.seed = seed;
    cfg.audio = AudioFormat {
        // Small shared hum: distant rumble correlates every venue a little.
        hum_amplitude: 0.02,
        ..AudioFormat::default()
    };
    // Thin walls: the adjacent-room anchors sit just below the co-presence
    // correlation cluster, pinning the learned boundary above relayed
    // same-class mixes.
    cfg.adjacent_bleed = 0.30;
    cfg.profiles = GRID_CLASSES.iter().map(|&c| grid_profile(c)).collect();
    cfg.co_mix = GRID_CLASSES.iter().map(|c| format!("grid-{c}")).collect();
    let mut mix: Vec<NonCoMixEntry> = GRID_CLASSES
        .iter()
        .flat_map(|p| {
            GRID_CLASSES.iter().map(move |v| NonCoMixEntry {
                prover: format!("grid-{p}"),
                verifier: format!("grid-{v}"),
                adjacent: false,
            })
        })
        .collect();
    // Adjacent-room negatives anchor the learned correlation boundary well
    // below the co-presence cluster on every seed.
    mix.extend(GRID_CLASSES.iter().map(|c| NonCoMixEntry {
        prover: format!("grid-{c}"),
        verifier: format!("grid-{c}"),
        adjacent: true,
    }));
    cfg.non_co_mix = mix;
    cfg
}

/// Train the audio-only model used by the grid.
pub fn train_grid_model(plan: &GridPlan) -> Result<(FusedModel, FeatureSchema), HarnessError> {
    let mut cfg = grid_gen_config(plan.seed);
    cfg.co_count = plan.train_co_per_class * GRID_CLASSES.len();
    cfg.non_co_count = plan.train_non_per_combo * cfg.non_co_mix.len();
    let generator = Generator::new(cfg)?;
    let pairs = generator.generate()?;
    let modalities = [Modality::Au].into_iter().collect();
    let schema = FeatureSchema::for_modalities(&modalities);
    let data: Vec<(FeatureVector, Label)> = pairs
        .par_iter()
        .map(|p| assemble(p, &modalities, &schema).map(|fv| (fv, p.label)))
        .collect::<Result<_, _>>()?;
    let params = FusedTrainParams {
        classifier: ClassifierKind::Tree,
        seed: derive_seed(plan.seed, 0x67, 0),
        ..FusedTrainParams::tree_default(0)
    };
    let model = train_fused_from_features(
        &data,
        &schema,
        &modalities,
        &FusionStrategy::features_fusion(),
        &params,
    )?;
    Ok((model, schema))
}

/// Stream the prover's audio through the channel into the verifier's
/// environment; the probe tone, when active, plays locally at the verifier
/// during sensing.
fn streamed_pair(
    pair: &ContextPair,
    channel: &ChannelPreset,
    probe: Option<&ProbeTone>,
    rng: &mut impl rand::Rng,
) -> ContextPair {
    let mut out = pair.clone();
    if let Some(tone) = probe {
        out.verifier = emit_probe_tone(&out.verifier, tone);
    }
    let rate = out.prover.audio.sample_rate();
    let relayed = channel.apply(out.prover.audio.samples(), rate, rng);
    let n = relayed.len().min(out.verifier.audio.len());
    let mixed: Vec<f64> = out.verifier.audio.samples()[..n]
        .iter()
        .zip(&relayed[..n])
        .map(|(v, p)| v + p)
        .collect();
    out.verifier.audio.set_samples_clamped(mixed);
    out
}

/// Run the full grid: every (channel, prover class, verifier class) cell.
pub fn run_audio_relay_grid(plan: &GridPlan) -> Result<GridReport, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.threads)
        .build()
        .map_err(|e| HarnessError::InvalidPlan(e.to_string()))?;
    pool.install(|| run_grid_inner(plan))
}

fn run_grid_inner(plan: &GridPlan) -> Result<GridReport, HarnessError> {
    let (model, schema) = train_grid_model(plan)?;
    let projections = unit_projections(&model, &schema)?;
    let modalities = [Modality::Au]
        .into_iter()
        .collect::<std::collections::BTreeSet<_>>();

    // Trial pairs come from a generator seeded independently of training.
    let trial_cfg = grid_gen_config(derive_seed(plan.seed, 0x68, 1));
    let trial_gen = Generator::new(trial_cfg)?;

    let mut cell_specs = Vec::new();
    for channel in &plan.channels {
        for &p_class in &GRID_CLASSES {
            for &v_class in &GRID_CLASSES {
                cell_specs.push((channel.clone(), p_class, v_class));
            }
        }
    }

    let cells: Vec<GridCell> = cell_specs
        .par_iter()
        .map(
            |(channel, p_class, v_class)| -> Result<GridCell, HarnessError> {
                let pf_p = grid_profile(*p_class);
                let pf_v = grid_profile(*v_class);
                let mut accepted = 0usize;
                for trial in 0..plan.trials_per_cell {
                    let cell_tag = ((*p_class as u64) << 8) | (*v_class as u64);
                    let pair_seed = derive_seed(
                        plan.seed,
                        stream::GRID_TRIAL,
                        cell_tag * 1_000_003 + trial as u64,
                    );
                    let pair = trial_gen.noncopresent_pair(
                        &pf_p,
                        &pf_v,
                        false,
                        pair_seed,
                        format!("grid-{p_class}-{v_class}-{trial}"),
                    );
                    let mut rng = rng_for(pair_seed, stream::CHANNEL, 0);
                    let attacked = streamed_pair(&pair, channel, plan.probe.as_ref(), &mut rng);
                    let fv = assemble(&attacked, &modalities, &schema)?;
                    let (label, _) = fused_predict_projected(&model, &projections, &fv)?;
                    if label.is_co_present() {
                        accepted += 1;
                    }
                }
                Ok(GridCell {
                    channel: channel.name.clone(),
                    prover_class: p_class.to_string(),
                    verifier_class: v_class.to_string(),
                    trials: plan.trials_per_cell,
                    accepted,
                })
            },
        )
        .collect::<Result<_, _>>()?;

    Ok(GridReport {
        cells,
        seed: plan.seed,
        probe: plan.probe,
    })
}
