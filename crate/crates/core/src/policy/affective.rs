use crate::acts::SystemEmotion;
use crate::signals::{Arousal, EmotionCategory, Valence};
use crate::state::UserState;

/// Emotion to express given the user's state. Rules, first match wins:
///
/// | user state                                | system emotion |
/// |-------------------------------------------|----------------|
/// | emotion `sad` or valence `negative`       | Compassionate  |
/// | emotion `happy`                           | Enthusiastic   |
/// | valence `positive` and arousal `high`     | Enthusiastic   |
/// | anything else                             | Neutral        |
///
/// Engagement does not influence the choice.
pub fn affective_policy(us: &UserState) -> SystemEmotion {
    if us.emotion == EmotionCategory::Sad || us.valence == Valence::Negative {
        SystemEmotion::Compassionate
    } else if us.emotion == EmotionCategory::Happy
        || (us.valence == Valence::Positive && us.arousal == Arousal::High)
    {
        SystemEmotion::Enthusiastic
    } else {
        SystemEmotion::Neutral
    }
}
