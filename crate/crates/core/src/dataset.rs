//! Dataset file interface: JSON Lines, one [`ContextPair`] per line.
//!
//! Wire schema per line:
//!
//! ```json
//! {"pair_id": "co-0001", "label": "co-present",
//!  "prover":   {"audio": {"rate": 16000.0, "samples": [0.01, ...]},
//!               "wifi": [["ap:3f", -42], ...], "bt": [["dev:a1", -60], ...],
//!               "phys": {"t": 22.5, "h": 42.0, "g": 1.5, "al": 118.0}},
//!  "verifier": {...}}
//! ```
//!
//! Audio is either inline `samples` or a `path` to a 16-bit mono RIFF/WAVE
//! file resolved relative to the dataset file. Optional per-side keys
//! `sensed_at` and `window` round-trip the sampling metadata; absent keys
//! default to 0.0 and the protocol window.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::context::{
    validate_sample, AudioTrace, BeaconSet, ContextError, ContextPair, ContextSample, Label,
    PhysicalReadings, RadioKind, SENSING_WINDOW_DEFAULT_S,
};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: {source}")]
    Invalid {
        line: usize,
        #[source]
        source: ContextError,
    },
    #[error("line {line}: audio must have either samples or path")]
    MissingAudio { line: usize },
    #[error("wav file {path}: {reason}")]
    Wav { path: PathBuf, reason: String },
}

#[derive(Serialize, Deserialize)]
struct AudioWire {
    rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct PhysWire {
    t: f64,
    h: f64,
    g: f64,
    al: f64,
}

#[derive(Serialize, Deserialize)]
struct SampleWire {
    audio: AudioWire,
    wifi: Vec<(String, i32)>,
    bt: Vec<(String, i32)>,
    phys: PhysWire,
    #[serde(default, skip_serializing_if = "is_zero")]
    sensed_at: f64,
    #[serde(default = "default_window")]
    window: f64,
}

#[derive(Serialize, Deserialize)]
struct PairWire {
    pair_id: String,
    label: Label,
    prover: SampleWire,
    verifier: SampleWire,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

fn default_window() -> f64 {
    SENSING_WINDOW_DEFAULT_S
}

fn sample_to_wire(s: &ContextSample) -> SampleWire {
    SampleWire {
        audio: AudioWire {
            rate: s.audio.sample_rate(),
            samples: Some(s.audio.samples().to_vec()),
            path: None,
        },
        wifi: s
            .wifi
            .iter()
            .map(|(id, rssi)| (id.to_string(), rssi))
            .collect(),
        bt: s
            .bluetooth
            .iter()
            .map(|(id, rssi)| (id.to_string(), rssi))
            .collect(),
        phys: PhysWire {
            t: s.physical.temperature,
            h: s.physical.humidity,
            g: s.physical.gas_co,
            al: s.physical.altitude,
        },
        sensed_at: s.sensed_at,
        window: s.sensing_window,
    }
}

fn wire_to_sample(
    wire: SampleWire,
    base_dir: &Path,
    line: usize,
) -> Result<ContextSample, DatasetError> {
    let audio = match (wire.audio.samples, wire.audio.path) {
        (Some(samples), _) => AudioTrace::new(samples, wire.audio.rate)
            .map_err(|source| DatasetError::Invalid { line, source })?,
        (None, Some(path)) => read_wav(&base_dir.join(path))?,
        (None, None) => return Err(DatasetError::MissingAudio { line }),
    };
    let wifi = BeaconSet::from_pairs(RadioKind::W, wire.wifi)
        .map_err(|source| DatasetError::Invalid { line, source })?;
    let bluetooth = BeaconSet::from_pairs(RadioKind::B, wire.bt)
        .map_err(|source| DatasetError::Invalid { line, source })?;
    let sample = ContextSample {
        audio,
        wifi,
        bluetooth,
        physical: PhysicalReadings {
            temperature: wire.phys.t,
            humidity: wire.phys.h,
            gas_co: wire.phys.g,
            altitude: wire.phys.al,
        },
        sensed_at: wire.sensed_at,
        sensing_window: wire.window,
    };
    validate_sample(sample).map_err(|source| DatasetError::Invalid { line, source })
}

/// Read a 16-bit mono PCM WAV file and normalize to [-1, 1].
pub fn read_wav(path: &Path) -> Result<AudioTrace, DatasetError> {
    let reader = hound::WavReader::open(path).map_err(|e| DatasetError::Wav {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let spec = reader.spec();
    if spec.channels != 1
        || spec.bits_per_sample != 16
        || spec.sample_format != hound::SampleFormat::Int
    {
        return Err(DatasetError::Wav {
            path: path.to_path_buf(),
            reason: format!(
                "expected 16-bit mono PCM, got {} ch / {} bit",
                spec.channels, spec.bits_per_sample
            ),
        });
    }
    let pcm: Result<Vec<i16>, _> = reader.into_samples::<i16>().collect();
    let pcm = pcm.map_err(|e| DatasetError::Wav {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    AudioTrace::from_pcm16(&pcm, f64::from(spec.sample_rate)).map_err(|e| DatasetError::Wav {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

/// Serialize one pair as a single JSON line.
pub fn encode_pair(pair: &ContextPair) -> String {
    let wire = PairWire {
        pair_id: pair.pair_id.clone(),
        label: pair.label,
        prover: sample_to_wire(&pair.prover),
        verifier: sample_to_wire(&pair.verifier),
    };
    serde_json::to_string(&wire).expect("pair wire is always serializable")
}

/// Parse one JSON line. `base_dir` resolves relative WAV paths; `line` is
/// used in error messages only.
pub fn decode_pair(json: &str, base_dir: &Path, line: usize) -> Result<ContextPair, DatasetError> {
    let wire: PairWire =
        serde_json::from_str(json).map_err(|source| DatasetError::Parse { line, source })?;
    Ok(ContextPair {
        prover: wire_to_sample(wire.prover, base_dir, line)?,
        verifier: wire_to_sample(wire.verifier, base_dir, line)?,
        label: wire.label,
        pair_id: wire.pair_id,
    })
}

/// Load a JSONL dataset, validating every sample.
pub fn read_dataset(path: &Path) -> Result<Vec<ContextPair>, DatasetError> {
    let file = File::open(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base_dir = path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .to_path_buf();
    let mut pairs = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let text = line.map_err(|source| DatasetError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if text.trim().is_empty() {
            continue;
        }
        pairs.push(decode_pair(&text, &base_dir, line_no)?);
    }
    Ok(pairs)
}

/// Write a JSONL dataset. Output is byte-deterministic for a given input.
pub fn write_dataset(path: &Path, pairs: &[ContextPair]) -> Result<(), DatasetError> {
    let file = File::create(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut w = BufWriter::new(file);
    for pair in pairs {
        writeln!(w, "{}", encode_pair(pair)).map_err(|source| DatasetError::Io {
            path: path.to_path_buf(),
            source,
        })?;
    }
    w.flush().map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })
}
