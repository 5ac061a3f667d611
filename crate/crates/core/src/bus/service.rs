use std::collections::BTreeMap;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{BusError, MessageEnvelope, ServiceError, TopicName};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubscriptionMode {
    /// Deliver only the most recent pending message; older ones are dropped.
    Latest,
    /// Deliver every message since the previous call, in publish order.
    Collect,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subscription {
    pub topic: TopicName,
    pub mode: SubscriptionMode,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Location {
    #[default]
    Local,
    Remote(String),
}

impl Location {
    pub fn is_remote(&self) -> bool {
        matches!(self, Location::Remote(_))
    }
}

/// Name, subscriptions, publications and location of one service.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServiceDescriptor {
    pub name: String,
    #[serde(default)]
    pub subscriptions: Vec<Subscription>,
    #[serde(default)]
    pub publications: Vec<TopicName>,
    #[serde(default)]
    pub location: Location,
}

impl ServiceDescriptor {
    pub fn new(name: impl Into<String>) -> Self {
        ServiceDescriptor {
            name: name.into(),
            subscriptions: Vec::new(),
            publications: Vec::new(),
            location: Location::Local,
        }
    }

    /// Adds a subscription. Panics on a malformed topic name, so only use
    /// this with literal names; build a [`Subscription`] for dynamic ones.
    pub fn subscribe(mut self, topic: &str, mode: SubscriptionMode) -> Self {
        let topic = TopicName::parse(topic).expect("valid topic literal");
        self.subscriptions.push(Subscription { topic, mode });
        self
    }

    pub fn subscribe_topic(mut self, topic: TopicName, mode: SubscriptionMode) -> Self {
        self.subscriptions.push(Subscription { topic, mode });
        self
    }

    pub fn publish(mut self, topic: &str) -> Self {
        self.publications.push(TopicName::parse(topic).expect("valid topic literal"));
        self
    }

    pub fn publish_topic(mut self, topic: TopicName) -> Self {
        self.publications.push(topic);
        self
    }

    pub fn at(mut self, location: Location) -> Self {
        self.location = location;
        self
    }

    /// A service with no subscriptions only ever publishes from outside the
    /// dispatch loop and is never invoked by it.
    pub fn is_source(&self) -> bool {
        self.subscriptions.is_empty()
    }

    pub fn may_publish(&self, topic: &TopicName) -> bool {
        self.publications.iter().any(|p| p.matches(topic))
    }

    pub fn validate(&self) -> Result<(), BusError> {
        let invalid = |reason: &str| BusError::InvalidDescriptor {
            name: self.name.clone(),
            reason: reason.to_string(),
        };
        if self.name.is_empty() {
            return Err(invalid("empty name"));
        }
        if self.subscriptions.is_empty() && self.publications.is_empty() {
            return Err(invalid("neither subscriptions nor publications"));
        }
        for (i, s) in self.subscriptions.iter().enumerate() {
            if self.subscriptions[..i].iter().any(|o| o.topic == s.topic) {
                return Err(invalid(&format!("duplicate subscription {}", s.topic)));
            }
        }
        Ok(())
    }
}

/// What a handler receives for one subscription.
#[derive(Clone, Debug, PartialEq)]
pub enum Delivery {
    Latest(Arc<MessageEnvelope>),
    Collect(Vec<Arc<MessageEnvelope>>),
}

impl Delivery {
    pub fn envelopes(&self) -> Vec<&MessageEnvelope> {
        match self {
            Delivery::Latest(e) => vec![e.as_ref()],
            Delivery::Collect(list) => list.iter().map(|e| e.as_ref()).collect(),
        }
    }
}

/// Handler input, keyed by the subscribed topic.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Inputs {
    slots: BTreeMap<TopicName, Delivery>,
}

impl Inputs {
    pub fn new() -> Self {
        Inputs::default()
    }

    pub fn insert(&mut self, topic: TopicName, delivery: Delivery) {
        self.slots.insert(topic, delivery);
    }

    pub fn get(&self, topic: &str) -> Option<&Delivery> {
        let topic = TopicName::parse(topic).ok()?;
        self.slots.get(&topic)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TopicName, &Delivery)> {
        self.slots.iter()
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// The envelope delivered for a subscription; for `Collect` the last one.
    pub fn envelope(&self, topic: &str) -> Result<&MessageEnvelope, ServiceError> {
        match self.get(topic) {
            Some(Delivery::Latest(e)) => Ok(e),
            Some(Delivery::Collect(list)) => list
                .last()
                .map(|e| e.as_ref())
                .ok_or_else(|| ServiceError::new(format!("no message on {topic}"))),
            None => Err(ServiceError::new(format!("not subscribed to {topic}"))),
        }
    }

    /// Decodes the latest payload of a subscription.
    pub fn latest<T: DeserializeOwned>(&self, topic: &str) -> Result<T, ServiceError> {
        Ok(self.envelope(topic)?.decode()?)
    }

    /// Decodes every delivered payload of a subscription, in publish order.
    pub fn all<T: DeserializeOwned>(&self, topic: &str) -> Result<Vec<T>, ServiceError> {
        let delivery =
            self.get(topic).ok_or_else(|| ServiceError::new(format!("not subscribed to {topic}")))?;
        delivery.envelopes().into_iter().map(|e| Ok(e.decode()?)).collect()
    }
}

/// Handler output: payloads to publish, keyed by concrete topic.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outputs {
    entries: BTreeMap<TopicName, Value>,
}

impl Outputs {
    pub fn new() -> Self {
        Outputs::default()
    }

    pub fn none() -> Result<Self, ServiceError> {
        Ok(Outputs::default())
    }

    pub fn insert(&mut self, topic: TopicName, payload: Value) {
        self.entries.insert(topic, payload);
    }

    /// Adds a payload; `topic` is a rendered topic name.
    pub fn with(mut self, topic: &str, payload: impl Serialize) -> Result<Self, ServiceError> {
        let topic = TopicName::parse(topic).map_err(|e| ServiceError::new(e.to_string()))?;
        self.entries.insert(topic, serde_json::to_value(payload)?);
        Ok(self)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TopicName, &Value)> {
        self.entries.iter()
    }

    pub fn into_entries(self) -> impl Iterator<Item = (TopicName, Value)> {
        self.entries.into_iter()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LifecycleEvent {
    Start,
    End,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DialogLifecycle {
    Idle,
    Starting,
    Running,
    Ending,
    Terminated,
}

/// A dialog service. Closures `FnMut(&Inputs) -> Result<Outputs, ServiceError>`
/// implement this trait directly.
pub trait Service: Send {
    fn handle(&mut self, inputs: &Inputs) -> Result<Outputs, ServiceError>;

    /// Called before the first dispatch and after the last one.
    fn on_lifecycle(&mut self, _event: LifecycleEvent) -> Result<(), ServiceError> {
        Ok(())
    }
}

impl<F> Service for F
where
    F: FnMut(&Inputs) -> Result<Outputs, ServiceError> + Send,
{
    fn handle(&mut self, inputs: &Inputs) -> Result<Outputs, ServiceError> {
        self(inputs)
    }
}

/// Returned by registration; identifies a service on its bus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ServiceHandle {
    name: String,
    location: Location,
}

impl ServiceHandle {
    pub(crate) fn new(name: String, location: Location) -> Self {
        ServiceHandle { name, location }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn location(&self) -> &Location {
        &self.location
    }
}
