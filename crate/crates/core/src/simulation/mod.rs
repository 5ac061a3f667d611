//! Agenda-based user simulation, rewards, evaluation and RL training.
//!
//! A dialog succeeds when every concrete goal constraint was informed with
//! the goal's value, every goal request was answered, and the last offered
//! entity satisfies the goal, all within the turn limit. Turns count user
//! turns.

mod agenda;
mod eval;
mod goal;
mod realize;
mod reward;
mod train;
mod user;

use thiserror::Error;

pub use agenda::Agenda;
pub use eval::{
    dialog_seed, run_episode, run_evaluation, simulator_service, DialogRecord, EvalConfig, EvalMetrics, EvalReport,
    Harness, PolicyKind, Route,
};
pub use goal::{sample_goal, GoalConfig, UserGoal};
pub use realize::realize_user_acts;
pub use reward::{compute_reward, RewardConfig};
pub use train::{train_rl, TrainConfig, TrainReport};
pub use user::{SimConfig, SimOutcome, UserSimulator};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("no satisfiable goal found after {0} attempts")]
    UnsatisfiableOntology(usize),
    #[error("database is empty")]
    EmptyDatabase,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("dialog {index} failed: {cause}")]
    Dialog { index: usize, cause: String },
    #[error(transparent)]
    Domain(#[from] crate::domain::DomainError),
    #[error(transparent)]
    Policy(#[from] crate::policy::PolicyError),
    #[error(transparent)]
    State(#[from] crate::state::StateError),
    #[error(transparent)]
    Bus(#[from] crate::bus::BusError),
    #[error(transparent)]
    Topic(#[from] crate::bus::TopicError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
