//! Log-mel filterbank and MFCC extraction.
//!
//! Frames are 25 ms long with a 10 ms hop, Hamming-windowed and zero-padded
//! to the next power of two. Triangular filters are spaced evenly on the
//! mel scale `2595·log10(1 + f/700)` between 0 Hz and Nyquist.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::SignalError;
use crate::Scalar;

pub const LOG_FLOOR: f64 = 1e-10;
pub const FRAME_SECONDS: f64 = 0.025;
pub const HOP_SECONDS: f64 = 0.010;
pub const MFCC_FILTERS: usize = 26;
pub const MFCC_COEFFS: usize = 13;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AudioChunk<S> {
    pub samples: Vec<S>,
    pub sample_rate: u32,
}

impl<S: Scalar> AudioChunk<S> {
    pub fn new(samples: Vec<S>, sample_rate: u32) -> Result<Self, SignalError> {
        if samples.is_empty() {
            return Err(SignalError::InvalidChunk("no samples".into()));
        }
        if sample_rate == 0 {
            return Err(SignalError::InvalidChunk("sample rate is zero".into()));
        }
        if let Some(i) = samples.iter().position(|x| x.is_nan() || x.abs() > S::one()) {
            return Err(SignalError::InvalidChunk(format!("sample {i} outside [-1, 1]")));
        }
        Ok(AudioChunk { samples, sample_rate })
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Frame length, hop and FFT size in samples.
    pub fn framing(&self) -> (usize, usize, usize) {
        framing(self.sample_rate)
    }
}

pub fn framing(sample_rate: u32) -> (usize, usize, usize) {
    let sr = sample_rate as f64;
    let frame = ((FRAME_SECONDS * sr).round() as usize).max(1);
    let hop = ((HOP_SECONDS * sr).round() as usize).max(1);
    (frame, hop, frame.next_power_of_two())
}

/// Row-major `rows × cols` matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> FeatureMatrix<S> {
    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        FeatureMatrix { rows: rows.len(), cols, data: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        self.data[i * self.cols + j]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[S]> {
        // chunks_exact(0) panics
        self.data.chunks_exact(self.cols.max(1)).take(self.rows)
    }

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    /// Column means, a fixed-width summary of a variable-length utterance.
    pub fn mean_row(&self) -> Vec<S> {
        let mut mean = vec![S::zero(); self.cols];
        for row in self.iter_rows() {
            mean.iter_mut().zip(row).for_each(|(m, x)| *m += *x);
        }
        let n = S::of(self.rows.max(1) as f64);
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }
}

pub fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

pub fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

pub fn hamming<S: Scalar>(n: usize) -> Vec<S> {
    if n == 1 {
        return vec![S::one()];
    }
    (0..n)
        .map(|i| S::of(0.54 - 0.46 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos()))
        .collect()
}

/// `n_mels × (n_fft/2 + 1)` triangular weights over the FFT bin frequencies.
pub fn mel_filterbank<S: Scalar>(n_mels: usize, n_fft: usize, sample_rate: u32) -> Vec<Vec<S>> {
    let nyquist = sample_rate as f64 / 2.0;
    let top = hz_to_mel(nyquist);
    let edges: Vec<f64> = (0..n_mels + 2).map(|i| mel_to_hz(top * i as f64 / (n_mels + 1) as f64)).collect();
    let bins = n_fft / 2 + 1;
    (0..n_mels)
        .map(|m| {
            let (lo, mid, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            (0..bins)
                .map(|k| {
                    let f = k as f64 * sample_rate as f64 / n_fft as f64;
                    let w = if f > lo && f <= mid {
                        (f - lo) / (mid - lo)
                    } else if f > mid && f < hi {
                        (hi - f) / (hi - mid)
                    } else {
                        0.0
                    };
                    S::of(w)
                })
                .collect()
        })
        .collect()
}

/// Windowed power spectra `|X_k|²`, `k = 0..=n_fft/2`, one row per frame.
pub fn power_spectra<S: Scalar>(chunk: &AudioChunk<S>) -> Result<Vec<Vec<S>>, SignalError> {
    let (frame, hop, n_fft) = chunk.framing();
    let n = chunk.samples.len();
    if n < frame {
        return Err(SignalError::ChunkTooShort { len: n, needed: frame });
    }
    let frames = 1 + (n - frame) / hop;
    let window = hamming::<S>(frame);
    let fft = FftPlanner::<S>::new().plan_fft_forward(n_fft);
    let mut buf = vec![Complex::new(S::zero(), S::zero()); n_fft];
    let mut out = Vec::with_capacity(frames);
    for f in 0..frames {
        let start = f * hop;
        for (i, c) in buf.iter_mut().enumerate() {
            let re = if i < frame { chunk.samples[start + i] * window[i] } else { S::zero() };
            *c = Complex::new(re, S::zero());
        }
        fft.process(&mut buf);
        out.push(buf[..=n_fft / 2].iter().map(|c| c.norm_sqr()).collect());
    }
    Ok(out)
}

fn log_mel<S: Scalar>(chunk: &AudioChunk<S>, n_mels: usize) -> Result<Vec<Vec<S>>, SignalError> {
    let spectra = power_spectra(chunk)?;
    let (_, _, n_fft) = chunk.framing();
    let bank = mel_filterbank::<S>(n_mels, n_fft, chunk.sample_rate);
    let floor = S::of(LOG_FLOOR);
    Ok(spectra
        .iter()
        .map(|p| {
            bank.iter()
                .map(|w| {
                    let e = w.iter().zip(p).fold(S::zero(), |a, (w, p)| a + *w * *p);
                    e.max(floor).ln()
                })
                .collect()
        })
        .collect())
}

/// Natural-log mel energies, `frames × n_mels`.
pub fn log_mel_filterbank<S: Scalar>(chunk: &AudioChunk<S>, n_mels: usize) -> Result<FeatureMatrix<S>, SignalError> {
    Ok(FeatureMatrix::from_rows(log_mel(chunk, n_mels)?))
}

/// Orthonormal DCT-II of `x`, first `keep` coefficients.
pub fn dct2<S: Scalar>(x: &[S], keep: usize) -> Vec<S> {
    let n = x.len() as f64;
    (0..keep.min(x.len()))
        .map(|k| {
            let scale = if k == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
            let sum = x.iter().enumerate().fold(S::zero(), |a, (i, v)| {
                a + *v * S::of((std::f64::consts::PI * k as f64 * (2 * i + 1) as f64 / (2.0 * n)).cos())
            });
            sum * S::of(scale)
        })
        .collect()
}

/// 13 cepstral coefficients per frame from 26 log-mel energies.
pub fn mfcc13<S: Scalar>(chunk: &AudioChunk<S>) -> Result<FeatureMatrix<S>, SignalError> {
    let rows = log_mel(chunk, MFCC_FILTERS)?.iter().map(|r| dct2(r, MFCC_COEFFS)).collect();
    Ok(FeatureMatrix::from_rows(rows))
}
