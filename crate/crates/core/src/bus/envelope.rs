use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::TopicName;

/// A published message. `seq` is assigned by the bus, per topic, starting at 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MessageEnvelope {
    pub topic: TopicName,
    pub seq: u64,
    /// Milliseconds since the Unix epoch.
    pub wall_time: u64,
    pub payload: Value,
}

impl MessageEnvelope {
    pub fn decode<T: serde::de::DeserializeOwned>(&self) -> Result<T, serde_json::Error> {
        T::deserialize(&self.payload)
    }
}
