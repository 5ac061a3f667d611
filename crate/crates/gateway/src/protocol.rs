//! JSON messages exchanged over `/ws/session/{id}`.
//!
//! Every message is an object whose `type` field names the variant, for
//! example `{"type":"utterance","text":"hi"}`.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{ErrorCode, GatewayError};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientEvent {
    Utterance {
        text: String,
    },
    /// Labels are validated by the session, so that unknown ones are
    /// reported as `invalid_label` rather than as malformed input.
    Social {
        valence: String,
        arousal: String,
        emotion: String,
        engagement: String,
    },
    EndDialog,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerEvent {
    SysUtterance {
        text: String,
        turn: usize,
    },
    State {
        belief: Value,
        user: Value,
    },
    Domain {
        active: Option<String>,
    },
    Error {
        code: ErrorCode,
        detail: String,
    },
    Ended,
}

impl From<&GatewayError> for ServerEvent {
    fn from(e: &GatewayError) -> Self {
        ServerEvent::Error { code: e.code(), detail: e.to_string() }
    }
}

impl ClientEvent {
    pub fn from_json(text: &str) -> Result<Self, GatewayError> {
        serde_json::from_str(text).map_err(|e| GatewayError::BadRequest(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_shapes() {
        let e = ClientEvent::from_json(r#"{"type":"utterance","text":"hi"}"#).unwrap();
        assert_eq!(e, ClientEvent::Utterance { text: "hi".into() });
        assert_eq!(ClientEvent::from_json(r#"{"type":"end_dialog"}"#).unwrap(), ClientEvent::EndDialog);
        assert!(matches!(ClientEvent::from_json(r#"{"type":"shout"}"#), Err(GatewayError::BadRequest(_))));

        let s = serde_json::to_value(ServerEvent::SysUtterance { text: "Hello".into(), turn: 0 }).unwrap();
        assert_eq!(s, serde_json::json!({"type": "sys_utterance", "text": "Hello", "turn": 0}));
        let s = serde_json::to_value(ServerEvent::from(&GatewayError::InvalidLabel("ecstatic".into()))).unwrap();
        assert_eq!(s["type"], "error");
        assert_eq!(s["code"], "invalid_label");
        assert_eq!(serde_json::to_value(ServerEvent::Ended).unwrap(), serde_json::json!({"type": "ended"}));
    }
}
