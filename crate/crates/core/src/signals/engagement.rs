//! Engagement from gaze: the user is looking away once the gaze has stayed
//! further than `angle_threshold` from the center for `duration_threshold`
//! seconds.

use serde::{Deserialize, Serialize};

use super::{Engagement, SignalError};

/// Slack on the duration comparison so that sample times read from text
/// still reach the threshold exactly.
pub const TIME_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GazeSample {
    pub t: f64,
    pub gaze_angle_x: f64,
    pub gaze_angle_y: f64,
}

impl GazeSample {
    pub fn new(t: f64, gaze_angle_x: f64, gaze_angle_y: f64) -> Self {
        GazeSample { t, gaze_angle_x, gaze_angle_y }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngagementConfig {
    pub center: (f64, f64),
    pub angle_threshold: f64,
    pub duration_threshold: f64,
}

impl Default for EngagementConfig {
    fn default() -> Self {
        EngagementConfig { center: (0.0, 0.0), angle_threshold: 0.25, duration_threshold: 3.0 }
    }
}

impl EngagementConfig {
    pub fn validate(&self) -> Result<(), SignalError> {
        if self.angle_threshold > 0.0 && self.duration_threshold > 0.0 {
            Ok(())
        } else {
            Err(SignalError::Config("angle and duration thresholds must be positive".into()))
        }
    }

    pub fn deviation(&self, s: &GazeSample) -> f64 {
        (s.gaze_angle_x - self.center.0).hypot(s.gaze_angle_y - self.center.1)
    }
}

/// Streaming form of [`engagement_decide`].
#[derive(Clone, Debug)]
pub struct EngagementTracker {
    cfg: EngagementConfig,
    away_since: Option<f64>,
    last_t: Option<f64>,
    state: Engagement,
}

impl EngagementTracker {
    pub fn new(cfg: EngagementConfig) -> Result<Self, SignalError> {
        cfg.validate()?;
        Ok(EngagementTracker { cfg, away_since: None, last_t: None, state: Engagement::Looking })
    }

    pub fn state(&self) -> Engagement {
        self.state
    }

    pub fn push(&mut self, s: &GazeSample) -> Engagement {
        self.last_t = Some(s.t);
        if self.cfg.deviation(s) > self.cfg.angle_threshold {
            let since = *self.away_since.get_or_insert(s.t);
            if s.t - since + TIME_EPS >= self.cfg.duration_threshold {
                self.state = Engagement::NotLooking;
            }
        } else {
            self.away_since = None;
            self.state = Engagement::Looking;
        }
        self.state
    }

    pub fn reset(&mut self) {
        self.away_since = None;
        self.last_t = None;
        self.state = Engagement::Looking;
    }
}

/// One decision per sample of a time-sorted stream.
pub fn engagement_decide(stream: &[GazeSample], cfg: &EngagementConfig) -> Result<Vec<Engagement>, SignalError> {
    if stream.is_empty() {
        return Err(SignalError::EmptyStream);
    }
    if let Some(i) = stream.windows(2).position(|w| w[1].t < w[0].t) {
        return Err(SignalError::UnsortedStream(i + 1));
    }
    let mut tracker = EngagementTracker::new(*cfg)?;
    Ok(stream.iter().map(|s| tracker.push(s)).collect())
}
