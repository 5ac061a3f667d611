//! Social signal processing: label taxonomies, gaze-based engagement,
//! acoustic features, end-of-utterance detection and the pluggable
//! emotion/backchannel predictors.

pub mod engagement;
pub mod eou;
pub mod features;
pub mod io;
mod labels;
pub mod predictors;

use thiserror::Error;

pub use engagement::{engagement_decide, EngagementConfig, EngagementTracker, GazeSample};
pub use eou::{detect_end_of_utterance, EouDetector};
pub use features::{log_mel_filterbank, mel_filterbank, mfcc13, AudioChunk, FeatureMatrix};
pub use labels::{
    backchannel_response, Arousal, BackchannelCategory, EmotionCategory, EmotionPrediction, Engagement, Valence,
};
pub use predictors::{
    predict_emotion, BackchannelPredictor, ConstantBackchannel, EmotionFeatures, EmotionPredictor, LexiconEmotion,
    ScriptedBackchannel, ScriptedEmotion,
};

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("empty gaze stream")]
    EmptyStream,
    #[error("gaze stream not time-sorted at sample {0}")]
    UnsortedStream(usize),
    #[error("chunk of {len} samples is shorter than one frame of {needed}")]
    ChunkTooShort { len: usize, needed: usize },
    #[error("invalid audio chunk: {0}")]
    InvalidChunk(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no prediction available")]
    PredictorUnavailable,
    #[error("unsupported audio format: {0}")]
    AudioFormat(String),
    #[error(transparent)]
    Label(#[from] crate::acts::ParseLabelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Wav(#[from] hound::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
