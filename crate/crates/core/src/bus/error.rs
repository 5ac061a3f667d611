use std::time::Duration;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopicError {
    #[error("topic base must be non-empty")]
    EmptyBase,
    #[error("topic domain must be non-empty when present")]
    EmptyDomain,
    #[error("topic part {0:?} contains '/'")]
    Separator(String),
}

/// Failure reported by a service handler.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{0}")]
pub struct ServiceError(pub String);

impl ServiceError {
    pub fn new(msg: impl Into<String>) -> Self {
        ServiceError(msg.into())
    }
}

impl From<serde_json::Error> for ServiceError {
    fn from(e: serde_json::Error) -> Self {
        ServiceError(format!("payload: {e}"))
    }
}

#[derive(Debug, Error)]
pub enum BusError {
    #[error("a service named {0:?} is already registered")]
    DuplicateName(String),
    #[error("services must be registered before the dialog starts")]
    RegistrationAfterStart,
    #[error("invalid service descriptor {name:?}: {reason}")]
    InvalidDescriptor { name: String, reason: String },
    #[error("cannot publish after the dialog terminated")]
    PublishWhileTerminated,
    #[error("bus is not running (state {0:?})")]
    NotRunning(super::DialogLifecycle),
    #[error("service {service:?} failed: {cause}")]
    HandlerError { service: String, cause: String },
    #[error("service {0:?} did not acknowledge start")]
    StartTimeout(String),
    #[error("service {0:?} did not acknowledge end")]
    EndTimeout(String),
    #[error("no hello from {address} within {timeout:?}")]
    ConnectTimeout { address: String, timeout: Duration },
    #[error("remote speaks protocol version {remote}, expected {expected}")]
    ProtocolVersionMismatch { expected: u32, remote: u32 },
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error(transparent)]
    Topic(#[from] TopicError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
