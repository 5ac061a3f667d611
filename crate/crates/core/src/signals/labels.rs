use serde::{Deserialize, Serialize};

use crate::acts::labelled_enum;

labelled_enum!(Engagement, "engagement label" {
    Looking => "looking",
    NotLooking => "not_looking",
});

labelled_enum!(Valence, "valence label" {
    Negative => "negative",
    Neutral => "neutral",
    Positive => "positive",
});

labelled_enum!(Arousal, "arousal label" {
    Low => "low",
    Medium => "medium",
    High => "high",
});

labelled_enum!(EmotionCategory, "emotion label" {
    Angry => "angry",
    Happy => "happy",
    Neutral => "neutral",
    Sad => "sad",
});

labelled_enum!(BackchannelCategory, "backchannel category" {
    NoBackchannel => "no_backchannel",
    Continuer => "continuer",
    Assessment => "assessment",
});

#[allow(clippy::derivable_impls)]
impl Default for BackchannelCategory {
    fn default() -> Self {
        BackchannelCategory::NoBackchannel
    }
}

#[allow(clippy::derivable_impls)]
impl Default for Engagement {
    fn default() -> Self {
        Engagement::Looking
    }
}

#[allow(clippy::derivable_impls)]
impl Default for Valence {
    fn default() -> Self {
        Valence::Neutral
    }
}

#[allow(clippy::derivable_impls)]
impl Default for Arousal {
    fn default() -> Self {
        Arousal::Medium
    }
}

#[allow(clippy::derivable_impls)]
impl Default for EmotionCategory {
    fn default() -> Self {
        EmotionCategory::Neutral
    }
}

/// The three per-turn affect predictions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EmotionPrediction {
    pub category: EmotionCategory,
    pub arousal: Arousal,
    pub valence: Valence,
}

impl EmotionPrediction {
    pub fn new(category: EmotionCategory, valence: Valence, arousal: Arousal) -> Self {
        EmotionPrediction { category, arousal, valence }
    }
}

/// Realization added in front of the next system utterance.
pub fn backchannel_response(category: BackchannelCategory) -> Option<&'static str> {
    match category {
        BackchannelCategory::NoBackchannel => None,
        BackchannelCategory::Continuer => Some("Uh-huh"),
        BackchannelCategory::Assessment => Some("Right"),
    }
}
