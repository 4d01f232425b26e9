//! Audio similarity features.
//!
//! The extracted group is deliberately insensitive to time synchronization:
//! the correlation feature is the maximum of the normalized cross-correlation
//! over all lags, and the spectral features compare energy distributions, not
//! sample alignment.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::context::AudioTrace;

use super::FeatureError;

/// Floor added to band energies before taking logs.
const LOG_ENERGY_FLOOR: f64 = 1e-12;

/// One-third-octave nominal center frequencies from 50 Hz to 8 kHz.
pub const THIRD_OCTAVE_CENTERS_HZ: [f64; 23] = [
    50.0, 63.0, 80.0, 100.0, 125.0, 160.0, 200.0, 250.0, 315.0, 400.0, 500.0, 630.0, 800.0, 1000.0,
    1250.0, 1600.0, 2000.0, 2500.0, 3150.0, 4000.0, 5000.0, 6300.0, 8000.0,
];

/// Audio feature group for one pair of traces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AudioFeatures {
    /// Maximum normalized cross-correlation, in [-1, 1].
    pub xcorr_max: f64,
    /// Lag (seconds) at the correlation maximum. Positive means the second
    /// trace is delayed relative to the first.
    pub lag_at_max_s: f64,
    /// L1 distance between log energies over one-third-octave bands.
    pub band_dist: f64,
    /// Absolute difference of dominant frequencies in Hz.
    pub dominant_freq_diff_hz: f64,
}

pub fn audio_features(a: &AudioTrace, b: &AudioTrace) -> Result<AudioFeatures, FeatureError> {
    if a.sample_rate() != b.sample_rate() {
        return Err(FeatureError::RateMismatch {
            left: a.sample_rate(),
            right: b.sample_rate(),
        });
    }
    if a.is_empty() || b.is_empty() {
        return Err(FeatureError::EmptyTrace);
    }
    let n = a.len().min(b.len());
    let xa = &a.samples()[..n];
    let xb = &b.samples()[..n];
    let rate = a.sample_rate();

    let (xcorr_max, lag_samples) = max_normalized_xcorr(xa, xb);
    let spec_a = power_spectrum(xa);
    let spec_b = power_spectrum(xb);
    let bands_a = third_octave_log_energies(&spec_a, rate, n);
    let bands_b = third_octave_log_energies(&spec_b, rate, n);
    let band_dist = bands_a
        .iter()
        .zip(&bands_b)
        .map(|(ea, eb)| (ea - eb).abs())
        .sum();
    let dom_a = dominant_frequency(&spec_a, rate, n);
    let dom_b = dominant_frequency(&spec_b, rate, n);

    Ok(AudioFeatures {
        xcorr_max,
        lag_at_max_s: lag_samples as f64 / rate,
        band_dist,
        dominant_freq_diff_hz: (dom_a - dom_b).abs(),
    })
}

/// Maximum of `sum_t a[t] * b[t + lag] / (|a| |b|)` over all lags. Returns
/// `(value, lag)` with ties resolved toward the smallest |lag|.
///
/// Silence convention: two all-zero traces correlate perfectly (1.0); one
/// silent side yields 0.0.
pub fn max_normalized_xcorr(a: &[f64], b: &[f64]) -> (f64, i64) {
    let norm_a = l2_norm(a);
    let norm_b = l2_norm(b);
    if norm_a == 0.0 && norm_b == 0.0 {
        return (1.0, 0);
    }
    if norm_a == 0.0 || norm_b == 0.0 {
        return (0.0, 0);
    }
    let cc = cross_correlation_fft(a, b);
    let n = a.len() as i64;
    let mut best_val = f64::NEG_INFINITY;
    let mut best_lag = 0i64;
    for (idx, &v) in cc.iter().enumerate() {
        let lag = idx as i64 - (n - 1);
        if v > best_val || (v == best_val && lag.abs() < best_lag.abs()) {
            best_val = v;
            best_lag = lag;
        }
    }
    ((best_val / (norm_a * norm_b)).clamp(-1.0, 1.0), best_lag)
}

fn l2_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Full linear cross-correlation `c[lag + n - 1] = sum_t a[t] * b[t + lag]`
/// for lag in [-(n-1), n-1], computed via FFT in O(n log n).
fn cross_correlation_fft(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    debug_assert_eq!(n, b.len());
    let m = (2 * n - 1).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(m);
    let ifft = planner.plan_fft_inverse(m);

    // c(lag) = sum_t a[t] b[t + lag] is the convolution of reverse(a) with b.
    let mut fa: Vec<Complex<f64>> = vec![Complex::default(); m];
    for (i, &v) in a.iter().rev().enumerate() {
        fa[i] = Complex::new(v, 0.0);
    }
    let mut fb: Vec<Complex<f64>> = vec![Complex::default(); m];
    for (i, &v) in b.iter().enumerate() {
        fb[i] = Complex::new(v, 0.0);
    }
    fft.process(&mut fa);
    fft.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= *y;
    }
    ifft.process(&mut fa);
    let scale = 1.0 / m as f64;
    fa[..2 * n - 1].iter().map(|c| c.re * scale).collect()
}

/// Per-bin power |X_k|^2 for k in [0, n/2].
fn power_spectrum(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft.process(&mut buf);
    buf[..=n / 2].iter().map(|c| c.norm_sqr()).collect()
}

/// Log energy per one-third-octave band. Bands whose center exceeds the
/// Nyquist frequency are dropped; both traces share a rate, so the pair
/// always compares identical band lists.
fn third_octave_log_energies(spectrum: &[f64], rate: f64, n: usize) -> Vec<f64> {
    let nyquist = rate / 2.0;
    let bin_hz = rate / n as f64;
    let half_step = 2f64.powf(1.0 / 6.0);
    THIRD_OCTAVE_CENTERS_HZ
        .iter()
        .filter(|&&fc| fc <= nyquist)
        .map(|&fc| {
            let lo = fc / half_step;
            let hi = fc * half_step;
            let energy: f64 = spectrum
                .iter()
                .enumerate()
                .skip(1)
                .filter(|(k, _)| {
                    let f = *k as f64 * bin_hz;
                    f >= lo && f < hi
                })
                .map(|(_, &p)| p)
                .sum();
            (energy + LOG_ENERGY_FLOOR).ln()
        })
        .collect()
}

/// Frequency of the strongest non-DC bin.
fn dominant_frequency(spectrum: &[f64], rate: f64, n: usize) -> f64 {
    let bin_hz = rate / n as f64;
    let mut best_k = 1usize;
    let mut best_p = f64::NEG_INFINITY;
    for (k, &p) in spectrum.iter().enumerate().skip(1) {
        if p > best_p {
            best_p = p;
            best_k = k;
        }
    }
    best_k as f64 * bin_hz
}
