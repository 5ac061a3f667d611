use super::topics::{BACKCHANNEL, EMOTION, ENGAGEMENT, GAZE, SYS_EMOTION, USER_STATE, USER_TEXT};
use super::{fail, ServiceEntry};
use crate::bus::{Inputs, LifecycleEvent, Outputs, Service, ServiceDescriptor, ServiceError, SubscriptionMode};
use crate::policy::affective_policy;
use crate::signals::{
    BackchannelPredictor, EmotionFeatures, EmotionPrediction, EmotionPredictor, Engagement, EngagementConfig,
    EngagementTracker, GazeSample,
};
use crate::state::{ust_update, UserState};

struct Ust {
    state: UserState,
}

impl Service for Ust {
    fn handle(&mut self, inputs: &Inputs) -> Result<Outputs, ServiceError> {
        let emotion: EmotionPrediction = inputs.latest(EMOTION)?;
        let engagement: Engagement = inputs.latest(ENGAGEMENT)?;
        self.state = ust_update(&self.state, emotion, engagement);
        Outputs::new().with(USER_STATE, &self.state)
    }

    fn on_lifecycle(&mut self, event: LifecycleEvent) -> Result<(), ServiceError> {
        if event == LifecycleEvent::Start {
            self.state = UserState::default();
        }
        Ok(())
    }
}

/// `ust`: one user-state entry per turn from the turn's latest `emotion`
/// and `engagement`.
pub fn ust_service() -> ServiceEntry {
    (
        ServiceDescriptor::new("ust")
            .subscribe(EMOTION, SubscriptionMode::Latest)
            .subscribe(ENGAGEMENT, SubscriptionMode::Latest)
            .publish(USER_STATE),
        Box::new(Ust { state: UserState::default() }),
    )
}

/// `affective_policy`: `user_state` to `sys_emotion`.
pub fn affective_service() -> ServiceEntry {
    let handler = |inputs: &Inputs| -> Result<Outputs, ServiceError> {
        let us: UserState = inputs.latest(USER_STATE)?;
        Outputs::new().with(SYS_EMOTION, affective_policy(&us))
    };
    (
        ServiceDescriptor::new("affective_policy").subscribe(USER_STATE, SubscriptionMode::Latest).publish(SYS_EMOTION),
        Box::new(handler),
    )
}

/// `emotion_tracker`: predicts `emotion` from `user_text`.
pub fn emotion_service(mut predictor: Box<dyn EmotionPredictor>) -> ServiceEntry {
    let handler = move |inputs: &Inputs| -> Result<Outputs, ServiceError> {
        let text: String = inputs.latest(USER_TEXT)?;
        let p = predictor.predict(&EmotionFeatures::text(&text)).map_err(fail)?;
        Outputs::new().with(EMOTION, p)
    };
    (
        ServiceDescriptor::new("emotion_tracker").subscribe(USER_TEXT, SubscriptionMode::Latest).publish(EMOTION),
        Box::new(handler),
    )
}

/// `backchannel`: predicts a `backchannel` category from `user_text`.
pub fn backchannel_service(mut predictor: Box<dyn BackchannelPredictor>) -> ServiceEntry {
    let handler = move |inputs: &Inputs| -> Result<Outputs, ServiceError> {
        let text: String = inputs.latest(USER_TEXT)?;
        let c = predictor.predict(&EmotionFeatures::text(&text)).map_err(fail)?;
        Outputs::new().with(BACKCHANNEL, c)
    };
    (
        ServiceDescriptor::new("backchannel").subscribe(USER_TEXT, SubscriptionMode::Latest).publish(BACKCHANNEL),
        Box::new(handler),
    )
}

struct Gaze {
    tracker: EngagementTracker,
}

impl Service for Gaze {
    fn handle(&mut self, inputs: &Inputs) -> Result<Outputs, ServiceError> {
        let samples: Vec<GazeSample> = inputs.all(GAZE)?;
        let mut decision = self.tracker.state();
        for s in &samples {
            decision = self.tracker.push(s);
        }
        Outputs::new().with(ENGAGEMENT, decision)
    }

    fn on_lifecycle(&mut self, event: LifecycleEvent) -> Result<(), ServiceError> {
        if event == LifecycleEvent::Start {
            self.tracker.reset();
        }
        Ok(())
    }
}

/// `engagement_tracker`: folds pending `gaze` samples into the current
/// `engagement` decision.
pub fn engagement_service(cfg: EngagementConfig) -> Result<ServiceEntry, crate::signals::SignalError> {
    Ok((
        ServiceDescriptor::new("engagement_tracker").subscribe(GAZE, SubscriptionMode::Collect).publish(ENGAGEMENT),
        Box::new(Gaze { tracker: EngagementTracker::new(cfg)? }),
    ))
}
