//! Dialog components wrapped as bus services.
//!
//! Every constructor returns `(descriptor, service)` pairs so the same
//! component can be registered on a local [`DialogBus`](crate::bus::DialogBus)
//! or exported from a [`ServiceHost`](crate::bus::ServiceHost). Components
//! that need more than one trigger are split into several registrations
//! sharing state, named `<component>` and `<component>.<trigger>`.

mod bst;
mod nlg;
mod nlu;
mod policy;
mod social;
mod tracker;

use std::fmt::Display;
use std::sync::{Arc, Mutex, MutexGuard};

use serde::{Deserialize, Serialize};

use crate::bus::{Service, ServiceDescriptor, ServiceError};

pub use bst::{bst_services, BstBackend};
pub use nlg::{nlg_services, NlgOptions};
pub use nlu::nlu_services;
pub use policy::{policy_service, welcome_service};
pub use social::{affective_service, backchannel_service, emotion_service, engagement_service, ust_service};
pub use tracker::{domain_tracker_services, welcome_text, KbAnswering, UNKNOWN_ANSWER};

pub type ServiceEntry = (ServiceDescriptor, Box<dyn Service>);

/// Topic names used by the reference services.
pub mod topics {
    pub const USER_TEXT: &str = "user_text";
    pub const USER_UTTERANCE: &str = "user_utterance";
    pub const USER_ACTS: &str = "user_acts";
    pub const BELIEF_STATE: &str = "belief_state";
    pub const SYS_ACT: &str = "sys_act";
    pub const SYS_UTTERANCE: &str = "sys_utterance";
    pub const DOMAIN: &str = "domain";
    pub const GAZE: &str = "gaze";
    pub const EMOTION: &str = "emotion";
    pub const ENGAGEMENT: &str = "engagement";
    pub const USER_STATE: &str = "user_state";
    pub const SYS_EMOTION: &str = "sys_emotion";
    pub const BACKCHANNEL: &str = "backchannel";
    pub const SIM_OUTCOME: &str = "sim_outcome";

    /// `base/domain`
    pub fn scoped(base: &str, domain: &str) -> String {
        format!("{base}/{domain}")
    }
}

/// Payload of `user_utterance/<domain>`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainUtterance {
    pub text: String,
    /// The tracker just switched to this domain.
    #[serde(default)]
    pub domain_switched: bool,
}

/// Payload of `domain`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActiveDomain {
    pub active: String,
}

pub(crate) fn fail(e: impl Display) -> ServiceError {
    ServiceError::new(e.to_string())
}

pub(crate) type Shared<T> = Arc<Mutex<T>>;

pub(crate) fn shared<T>(value: T) -> Shared<T> {
    Arc::new(Mutex::new(value))
}

pub(crate) fn lock<T>(s: &Shared<T>) -> MutexGuard<'_, T> {
    // a panicking handler already failed the dialog; keep the state usable
    s.lock().unwrap_or_else(|p| p.into_inner())
}
