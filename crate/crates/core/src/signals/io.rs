//! Loading gaze streams, audio and lexicons from disk.

use std::io::Read;
use std::path::Path;

use super::{AudioChunk, GazeSample, LexiconEmotion, SignalError};
use crate::Scalar;

/// CSV with header `t,gaze_angle_x,gaze_angle_y`.
pub fn read_gaze_csv<R: Read>(reader: R) -> Result<Vec<GazeSample>, SignalError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    rdr.deserialize().map(|r| r.map_err(SignalError::from)).collect()
}

pub fn load_gaze_csv(path: impl AsRef<Path>) -> Result<Vec<GazeSample>, SignalError> {
    read_gaze_csv(std::fs::File::open(path)?)
}

pub fn write_gaze_csv(path: impl AsRef<Path>, samples: &[GazeSample]) -> Result<(), SignalError> {
    let mut w = csv::Writer::from_path(path)?;
    for s in samples {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}

/// 16-bit PCM mono WAV, scaled to [-1, 1).
pub fn load_wav<S: Scalar>(path: impl AsRef<Path>) -> Result<AudioChunk<S>, SignalError> {
    let reader = hound::WavReader::open(path)?;
    let spec = reader.spec();
    if spec.channels != 1 || spec.bits_per_sample != 16 || spec.sample_format != hound::SampleFormat::Int {
        return Err(SignalError::AudioFormat(format!(
            "{} channel(s), {} bit {:?}",
            spec.channels, spec.bits_per_sample, spec.sample_format
        )));
    }
    let samples = reader
        .into_samples::<i16>()
        .map(|s| s.map(|v| S::of(v as f64 / 32768.0)))
        .collect::<Result<Vec<S>, _>>()?;
    AudioChunk::new(samples, spec.sample_rate)
}

pub fn save_wav<S: Scalar>(path: impl AsRef<Path>, chunk: &AudioChunk<S>) -> Result<(), SignalError> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: chunk.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::create(path, spec)?;
    for x in &chunk.samples {
        let v = (x.to_f64_lossy() * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        w.write_sample(v)?;
    }
    w.finalize()?;
    Ok(())
}

pub fn load_lexicon(path: impl AsRef<Path>) -> Result<LexiconEmotion, SignalError> {
    LexiconEmotion::from_json(&std::fs::read_to_string(path)?)
}
