//! System action selection.
//!
//! Handcrafted policies cover database domains ([`handcrafted_policy`]) and
//! API domains ([`api_policy`]); [`affective_policy`] picks the emotion the
//! system expresses. The reinforcement-learning policy is a dueling
//! Q-network ([`qnet`]) trained from prioritized replay ([`replay`]) over
//! an ontology-instantiated action set ([`ActionSpace`]).

mod actions;
mod affective;
mod api;
mod dialog;
mod handcrafted;
pub mod qnet;
pub mod replay;
pub mod rl;
mod vector;

use thiserror::Error;

pub use actions::{api_signatures, database_signatures, ActionSpace, RlAction};
pub use affective::affective_policy;
pub use api::api_policy;
pub use dialog::{ApiPolicy, DialogPolicy, HandcraftedPolicy};
pub use handcrafted::{alternatives_act, entity_act, handcrafted_policy};
pub use vector::{decode_filled_mask, vectorize_belief, BeliefVector, SlotFill};

use crate::domain::DomainError;

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("expected input of dimension {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("buffer holds {size} experiences, batch needs {needed}")]
    BufferTooSmall { size: usize, needed: usize },
    #[error("no valid action")]
    NoValidAction,
    #[error("invalid network file: {0}")]
    Format(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Domain(#[from] DomainError),
}
