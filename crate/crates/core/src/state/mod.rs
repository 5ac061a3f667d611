//! Belief-state tracking of task constraints and user-state tracking of
//! social signals. Both keep one immutable snapshot per turn.

mod belief;
mod user;

use thiserror::Error;

pub use belief::{bst_update, bst_update_api, BeliefSnapshot, BeliefState, SlotBelief};
pub use user::{ust_update, UserState, UserStateSnapshot};

use crate::domain::DomainError;

#[derive(Debug, Error)]
pub enum StateError {
    #[error("unknown slot {0:?}")]
    UnknownSlot(String),
    #[error("{value:?} is not a legal value of {slot}")]
    InvalidValue { slot: String, value: String },
    #[error(transparent)]
    Domain(#[from] DomainError),
}
