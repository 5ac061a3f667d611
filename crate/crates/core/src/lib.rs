//! Publish/subscribe framework for multi-domain, task-oriented dialog systems.
//!
//! A dialog system is a set of services that communicate over a topic bus
//! ([`bus::DialogBus`]). The crate ships a reference stack built from such
//! services: keyword domain tracking and rule-based understanding ([`nlu`]),
//! belief and user state tracking ([`state`]), handcrafted, affective and
//! reinforcement-learning policies ([`policy`]), template generation
//! ([`nlg`]), social signal processing ([`signals`]) and an agenda-based user
//! simulator with an evaluation harness ([`simulation`]).
//!
//! Numeric code (the dueling Q-network, prioritized replay and the acoustic
//! feature extractors) is generic over [`Scalar`]; the aliases below pick the
//! `f64` instantiations used throughout the dialog stack.

pub mod acts;
pub mod bus;
pub mod domain;
pub mod fixtures;
pub mod nlg;
pub mod nlu;
pub mod policy;
pub mod scalar;
pub mod services;
pub mod signals;
pub mod simulation;
pub mod state;
pub mod system;

pub use scalar::Scalar;


pub type QNetwork = policy::qnet::DuelingQNetwork<f64>;
pub type QNetworkF32 = policy::qnet::DuelingQNetwork<f32>;
pub type ReplayBuffer = policy::replay::PrioritizedReplay<f64>;
pub type Experience = policy::replay::Experience<f64>;
pub type RlPolicy = policy::rl::RlPolicy<f64>;
pub type FeatureMatrix = signals::features::FeatureMatrix<f64>;
