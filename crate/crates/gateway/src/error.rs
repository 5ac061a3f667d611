use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Machine-readable error codes sent to clients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    UnknownDomain,
    ServiceStartFailure,
    SessionTerminated,
    InvalidLabel,
    UnknownSession,
    BadRequest,
    NoResponse,
    DialogFailure,
}

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("unknown domain: {0}")]
    UnknownDomain(String),
    #[error("dialog system failed to start: {0}")]
    ServiceStartFailure(String),
    #[error("session has ended")]
    SessionTerminated,
    #[error("invalid label: {0}")]
    InvalidLabel(String),
    #[error("no session with id {0}")]
    UnknownSession(String),
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("the system produced no utterance")]
    NoResponse,
    #[error("dialog failed: {0}")]
    Dialog(String),
}

impl GatewayError {
    pub fn code(&self) -> ErrorCode {
        match self {
            GatewayError::UnknownDomain(_) => ErrorCode::UnknownDomain,
            GatewayError::ServiceStartFailure(_) => ErrorCode::ServiceStartFailure,
            GatewayError::SessionTerminated => ErrorCode::SessionTerminated,
            GatewayError::InvalidLabel(_) => ErrorCode::InvalidLabel,
            GatewayError::UnknownSession(_) => ErrorCode::UnknownSession,
            GatewayError::BadRequest(_) => ErrorCode::BadRequest,
            GatewayError::NoResponse => ErrorCode::NoResponse,
            GatewayError::Dialog(_) => ErrorCode::DialogFailure,
        }
    }
}
