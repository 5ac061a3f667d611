//! Framing for remote services.
//!
//! Each frame is a 4-byte big-endian length `N` followed by `N` bytes of
//! UTF-8 JSON. The JSON object carries a `"type"` tag:
//!
//! | type        | fields                                   |
//! |-------------|------------------------------------------|
//! | `hello`     | `version`, `services` (descriptors)      |
//! | `publish`   | `topic`, `seq`, `wall_time`, `payload`   |
//! | `invoke`    | `service`, `inputs` (`{topic: envelope or [envelope]}`) |
//! | `result`    | `service`, `outputs` (`{topic: payload}`), optional `error` |
//! | `lifecycle` | `event` (`start` / `end`)                |
//! | `ack`       | `event`                                  |

use std::collections::BTreeMap;
use std::io::{self, Read, Write};
use std::sync::Arc;

use byteorder::{BigEndian, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{
    Delivery, Inputs, LifecycleEvent, MessageEnvelope, Outputs, ServiceDescriptor, TopicName,
};

pub const PROTOCOL_VERSION: u32 = 1;

/// Frames larger than this are rejected before allocation.
pub const MAX_FRAME_LEN: u32 = 64 * 1024 * 1024;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WireDelivery {
    Many(Vec<MessageEnvelope>),
    One(MessageEnvelope),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Frame {
    Hello {
        version: u32,
        services: Vec<ServiceDescriptor>,
    },
    Publish {
        topic: TopicName,
        seq: u64,
        wall_time: u64,
        payload: Value,
    },
    Invoke {
        service: String,
        inputs: BTreeMap<TopicName, WireDelivery>,
    },
    Result {
        service: String,
        outputs: BTreeMap<TopicName, Value>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        error: Option<String>,
    },
    Lifecycle {
        event: LifecycleEvent,
    },
    Ack {
        event: LifecycleEvent,
    },
}

pub fn write_frame<W: Write>(w: &mut W, frame: &Frame) -> io::Result<()> {
    let body = serde_json::to_vec(frame)?;
    let len = u32::try_from(body.len())
        .ok()
        .filter(|n| *n <= MAX_FRAME_LEN)
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "frame too large"))?;
    w.write_u32::<BigEndian>(len)?;
    w.write_all(&body)?;
    w.flush()
}

pub fn read_frame<R: Read>(r: &mut R) -> io::Result<Frame> {
    let len = r.read_u32::<BigEndian>()?;
    if len > MAX_FRAME_LEN {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "frame too large"));
    }
    let mut body = vec![0u8; len as usize];
    r.read_exact(&mut body)?;
    serde_json::from_slice(&body).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
}

pub fn inputs_to_wire(inputs: &Inputs) -> BTreeMap<TopicName, WireDelivery> {
    inputs
        .iter()
        .map(|(topic, delivery)| {
            let wire = match delivery {
                Delivery::Latest(e) => WireDelivery::One(e.as_ref().clone()),
                Delivery::Collect(list) => {
                    WireDelivery::Many(list.iter().map(|e| e.as_ref().clone()).collect())
                }
            };
            (topic.clone(), wire)
        })
        .collect()
}

pub fn inputs_from_wire(wire: BTreeMap<TopicName, WireDelivery>) -> Inputs {
    let mut inputs = Inputs::new();
    for (topic, delivery) in wire {
        let delivery = match delivery {
            WireDelivery::One(e) => Delivery::Latest(Arc::new(e)),
            WireDelivery::Many(list) => Delivery::Collect(list.into_iter().map(Arc::new).collect()),
        };
        inputs.insert(topic, delivery);
    }
    inputs
}

pub fn outputs_to_wire(outputs: Outputs) -> BTreeMap<TopicName, Value> {
    outputs.into_entries().collect()
}

pub fn outputs_from_wire(wire: BTreeMap<TopicName, Value>) -> Outputs {
    let mut out = Outputs::new();
    for (topic, payload) in wire {
        out.insert(topic, payload);
    }
    out
}
