//! Injectable emotion and backchannel predictors.
//!
//! Trained acoustic models plug in behind [`EmotionPredictor`] and
//! [`BackchannelPredictor`]; the shipped implementations are scripted
//! queues and a keyword lexicon.

use std::collections::{HashMap, VecDeque};

use super::{
    Arousal, BackchannelCategory, EmotionCategory, EmotionPrediction, FeatureMatrix, SignalError, Valence,
};

/// What a predictor sees of one user turn.
#[derive(Clone, Copy, Debug, Default)]
pub struct EmotionFeatures<'a> {
    pub text: &'a str,
    pub acoustic: Option<&'a FeatureMatrix<f64>>,
}

impl<'a> EmotionFeatures<'a> {
    pub fn text(text: &'a str) -> Self {
        EmotionFeatures { text, acoustic: None }
    }
}

pub trait EmotionPredictor: Send {
    fn predict(&mut self, features: &EmotionFeatures<'_>) -> Result<EmotionPrediction, SignalError>;
}

pub trait BackchannelPredictor: Send {
    fn predict(&mut self, features: &EmotionFeatures<'_>) -> Result<BackchannelCategory, SignalError>;
}

pub fn predict_emotion(
    features: &EmotionFeatures<'_>,
    predictor: &mut dyn EmotionPredictor,
) -> Result<EmotionPrediction, SignalError> {
    predictor.predict(features)
}

/// Replays a fixed sequence, then defers to the fallback if there is one.
#[derive(Default)]
pub struct ScriptedEmotion {
    queue: VecDeque<EmotionPrediction>,
    fallback: Option<Box<dyn EmotionPredictor>>,
}

impl ScriptedEmotion {
    pub fn new(script: impl IntoIterator<Item = EmotionPrediction>) -> Self {
        ScriptedEmotion { queue: script.into_iter().collect(), fallback: None }
    }

    pub fn with_fallback(mut self, fallback: Box<dyn EmotionPredictor>) -> Self {
        self.fallback = Some(fallback);
        self
    }

    pub fn push(&mut self, p: EmotionPrediction) {
        self.queue.push_back(p);
    }

    pub fn remaining(&self) -> usize {
        self.queue.len()
    }
}

impl EmotionPredictor for ScriptedEmotion {
    fn predict(&mut self, features: &EmotionFeatures<'_>) -> Result<EmotionPrediction, SignalError> {
        match (self.queue.pop_front(), &mut self.fallback) {
            (Some(p), _) => Ok(p),
            (None, Some(f)) => f.predict(features),
            (None, None) => Err(SignalError::PredictorUnavailable),
        }
    }
}

/// Valence from word counts against a lexicon; category stays neutral and
/// arousal medium.
#[derive(Clone, Debug, Default)]
pub struct LexiconEmotion {
    words: HashMap<String, Valence>,
}

impl LexiconEmotion {
    pub fn new(words: impl IntoIterator<Item = (String, Valence)>) -> Self {
        LexiconEmotion { words: words.into_iter().map(|(w, v)| (w.to_lowercase(), v)).collect() }
    }

    /// `{"word": "negative" | "neutral" | "positive", ...}`
    pub fn from_json(text: &str) -> Result<Self, SignalError> {
        let raw: HashMap<String, String> = serde_json::from_str(text)?;
        let mut words = Vec::with_capacity(raw.len());
        for (w, v) in raw {
            words.push((w, v.parse::<Valence>()?));
        }
        Ok(Self::new(words))
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn valence(&self, text: &str) -> Valence {
        let (mut pos, mut neg) = (0usize, 0usize);
        for token in text.split(|c: char| !c.is_alphanumeric() && c != '\'') {
            match self.words.get(&token.to_lowercase()) {
                Some(Valence::Positive) => pos += 1,
                Some(Valence::Negative) => neg += 1,
                _ => {}
            }
        }
        match pos.cmp(&neg) {
            std::cmp::Ordering::Greater => Valence::Positive,
            std::cmp::Ordering::Less => Valence::Negative,
            std::cmp::Ordering::Equal => Valence::Neutral,
        }
    }
}

impl EmotionPredictor for LexiconEmotion {
    fn predict(&mut self, features: &EmotionFeatures<'_>) -> Result<EmotionPrediction, SignalError> {
        Ok(EmotionPrediction::new(EmotionCategory::Neutral, self.valence(features.text), Arousal::Medium))
    }
}

/// Always the same category.
#[derive(Clone, Copy, Debug, Default)]
pub struct ConstantBackchannel(pub BackchannelCategory);

impl BackchannelPredictor for ConstantBackchannel {
    fn predict(&mut self, _: &EmotionFeatures<'_>) -> Result<BackchannelCategory, SignalError> {
        Ok(self.0)
    }
}

/// Replays a sequence, `NoBackchannel` once exhausted.
#[derive(Clone, Debug, Default)]
pub struct ScriptedBackchannel {
    queue: VecDeque<BackchannelCategory>,
}

impl ScriptedBackchannel {
    pub fn new(script: impl IntoIterator<Item = BackchannelCategory>) -> Self {
        ScriptedBackchannel { queue: script.into_iter().collect() }
    }
}

impl BackchannelPredictor for ScriptedBackchannel {
    fn predict(&mut self, _: &EmotionFeatures<'_>) -> Result<BackchannelCategory, SignalError> {
        Ok(self.queue.pop_front().unwrap_or_default())
    }
}
