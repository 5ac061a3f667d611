//! Topic-based message bus.
//!
//! Services declare what they subscribe to and publish in a
//! [`ServiceDescriptor`]. The [`DialogBus`] assigns per-topic sequence numbers,
//! queues envelopes for every matching subscription and invokes a service
//! once each of its subscriptions has at least one pending message.
//!
//! Topic matching is prefix based: a subscription to `user_acts` receives
//! `user_acts` and `user_acts/<domain>`, while `user_acts/mensa` only receives
//! that exact topic.
//!
//! Services may live in another process; see [`remote`] for the framed TCP
//! protocol and [`ServiceHost`] for the serving side.

mod dispatch;
mod envelope;
mod error;
mod graph;
pub mod remote;
mod service;
mod topic;
pub mod wire;

pub use dispatch::{BusConfig, DialogBus, DialogResult, RunOutcome, TerminationReason};
pub use envelope::MessageEnvelope;
pub use error::{BusError, ServiceError, TopicError};
pub use graph::{GraphReport, Orphan};
pub use remote::{HostHandle, RemotePublisher, ServiceHost};
pub use service::{
    Delivery, DialogLifecycle, Inputs, LifecycleEvent, Location, Outputs, Service,
    ServiceDescriptor, ServiceHandle, Subscription, SubscriptionMode,
};
pub use topic::{TopicName, DIALOG_END, DIALOG_EXIT, DIALOG_START};
