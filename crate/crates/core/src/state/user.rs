use serde::{Deserialize, Serialize};

use crate::signals::{Arousal, EmotionCategory, EmotionPrediction, Engagement, Valence};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserStateSnapshot {
    pub turn: usize,
    pub engagement: Engagement,
    pub valence: Valence,
    pub arousal: Arousal,
    pub emotion: EmotionCategory,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserState {
    #[serde(flatten)]
    pub current: UserStateSnapshot,
    pub history: Vec<UserStateSnapshot>,
}

impl Default for UserState {
    fn default() -> Self {
        let current = UserStateSnapshot::default();
        UserState { current, history: vec![current] }
    }
}

impl std::ops::Deref for UserState {
    type Target = UserStateSnapshot;

    fn deref(&self) -> &UserStateSnapshot {
        &self.current
    }
}

impl UserState {
    pub fn prediction(&self) -> EmotionPrediction {
        EmotionPrediction::new(self.emotion, self.valence, self.arousal)
    }
}

/// Replaces every field with the turn's predictions.
pub fn ust_update(prev: &UserState, emotion: EmotionPrediction, engagement: Engagement) -> UserState {
    let current = UserStateSnapshot {
        turn: prev.turn + 1,
        engagement,
        valence: emotion.valence,
        arousal: emotion.arousal,
        emotion: emotion.category,
    };
    let mut history = prev.history.clone();
    history.push(current);
    UserState { current, history }
}
