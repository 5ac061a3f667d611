//! Session gateway for colloquy dialog systems.
//!
//! Each session owns one running dialog system. Clients create a session
//! over HTTP and then talk to it through a WebSocket carrying the JSON
//! events of [`protocol`].

pub mod error;
pub mod protocol;
pub mod server;
pub mod session;

pub use error::{ErrorCode, GatewayError};
pub use protocol::{ClientEvent, ServerEvent};
pub use server::{router, serve, AppState};
pub use session::{Session, SessionConfig, Speaker, TranscriptEntry};
