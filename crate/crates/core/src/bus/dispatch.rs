use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::Arc;
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;

use super::remote::{now_millis, RemoteLink};
use super::{
    BusError, Delivery, DialogLifecycle, GraphReport, Inputs, LifecycleEvent, Location,
    MessageEnvelope, Service, ServiceDescriptor, ServiceError, ServiceHandle, SubscriptionMode,
    TopicName, DIALOG_END, DIALOG_EXIT, DIALOG_START,
};

#[derive(Clone, Debug)]
pub struct BusConfig {
    /// Bound on waiting for start/end acknowledgements from remote hosts.
    pub ack_timeout: Duration,
    /// Bound on a single remote invocation.
    pub invoke_timeout: Duration,
}

impl Default for BusConfig {
    fn default() -> Self {
        BusConfig { ack_timeout: Duration::from_millis(5000), invoke_timeout: Duration::from_secs(30) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TerminationReason {
    /// A message was published on `dialog_end`.
    DialogEnd,
    MaxCycles,
    /// No service had all of its subscriptions satisfied.
    Quiescent,
    HandlerError { service: String, cause: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutcome {
    pub cycles: usize,
    pub reason: TerminationReason,
}

#[derive(Clone, Debug)]
pub struct DialogResult {
    /// Every envelope published during the dialog, in publish order.
    pub envelopes: Vec<MessageEnvelope>,
    pub cycles: usize,
    pub reason: TerminationReason,
}

impl DialogResult {
    pub fn on_topic<'a>(&'a self, topic: &'a TopicName) -> impl Iterator<Item = &'a MessageEnvelope> {
        self.envelopes.iter().filter(move |e| topic.matches(&e.topic))
    }
}

enum Endpoint {
    Local(Box<dyn Service>),
    Remote(Arc<RemoteLink>),
}

struct Registered {
    descriptor: ServiceDescriptor,
    endpoint: Endpoint,
    /// One queue per subscription, in descriptor order.
    queues: Vec<VecDeque<Arc<MessageEnvelope>>>,
}

impl Registered {
    fn is_ready(&self) -> bool {
        !self.descriptor.is_source() && self.queues.iter().all(|q| !q.is_empty())
    }

    fn take_inputs(&mut self) -> Inputs {
        let mut inputs = Inputs::new();
        for (sub, queue) in self.descriptor.subscriptions.iter().zip(self.queues.iter_mut()) {
            let delivery = match sub.mode {
                SubscriptionMode::Latest => {
                    let last = queue.pop_back().expect("ready queue is non-empty");
                    queue.clear();
                    Delivery::Latest(last)
                }
                SubscriptionMode::Collect => Delivery::Collect(queue.drain(..).collect()),
            };
            inputs.insert(sub.topic.clone(), delivery);
        }
        inputs
    }
}

/// The central dialog system: registry, per-topic sequencing and the
/// deterministic dispatch loop.
///
/// Each dispatch cycle snapshots the ready services, invokes them in
/// lexicographic name order, and only then publishes what they returned, so
/// no handler observes another handler's output from the same cycle.
pub struct DialogBus {
    config: BusConfig,
    state: DialogLifecycle,
    services: BTreeMap<String, Registered>,
    links: Vec<Arc<RemoteLink>>,
    seqs: HashMap<TopicName, u64>,
    log: Vec<Arc<MessageEnvelope>>,
    end_requested: bool,
}

impl Default for DialogBus {
    fn default() -> Self {
        Self::new()
    }
}

impl DialogBus {
    pub fn new() -> Self {
        Self::with_config(BusConfig::default())
    }

    pub fn with_config(config: BusConfig) -> Self {
        DialogBus {
            config,
            state: DialogLifecycle::Idle,
            services: BTreeMap::new(),
            links: Vec::new(),
            seqs: HashMap::new(),
            log: Vec::new(),
            end_requested: false,
        }
    }

    pub fn state(&self) -> DialogLifecycle {
        self.state
    }

    pub fn register_service(
        &mut self,
        descriptor: ServiceDescriptor,
        service: impl Service + 'static,
    ) -> Result<ServiceHandle, BusError> {
        self.register_boxed(descriptor, Box::new(service))
    }

    pub fn register_boxed(
        &mut self,
        descriptor: ServiceDescriptor,
        service: Box<dyn Service>,
    ) -> Result<ServiceHandle, BusError> {
        self.insert(descriptor, Endpoint::Local(service))
    }

    fn insert(
        &mut self,
        descriptor: ServiceDescriptor,
        endpoint: Endpoint,
    ) -> Result<ServiceHandle, BusError> {
        if self.state != DialogLifecycle::Idle {
            return Err(BusError::RegistrationAfterStart);
        }
        descriptor.validate()?;
        if self.services.contains_key(&descriptor.name) {
            return Err(BusError::DuplicateName(descriptor.name));
        }
        let handle = ServiceHandle::new(descriptor.name.clone(), descriptor.location.clone());
        let queues = vec![VecDeque::new(); descriptor.subscriptions.len()];
        self.services.insert(descriptor.name.clone(), Registered { descriptor, endpoint, queues });
        Ok(handle)
    }

    /// Connects to a [`ServiceHost`](super::ServiceHost) and registers every
    /// service it exports as `Remote(address)`.
    pub fn connect_remote(
        &mut self,
        address: &str,
        timeout_ms: u64,
    ) -> Result<Vec<ServiceDescriptor>, BusError> {
        if self.state != DialogLifecycle::Idle {
            return Err(BusError::RegistrationAfterStart);
        }
        let (link, descriptors) =
            RemoteLink::connect(address, Duration::from_millis(timeout_ms))?;
        for d in &descriptors {
            if self.services.contains_key(&d.name) {
                return Err(BusError::DuplicateName(d.name.clone()));
            }
        }
        let mut registered = Vec::with_capacity(descriptors.len());
        for d in descriptors {
            let d = d.at(Location::Remote(address.to_string()));
            self.insert(d.clone(), Endpoint::Remote(Arc::clone(&link)))?;
            registered.push(d);
        }
        self.links.push(link);
        Ok(registered)
    }

    pub fn descriptors(&self) -> impl Iterator<Item = &ServiceDescriptor> {
        self.services.values().map(|r| &r.descriptor)
    }

    pub fn draw_graph(&self) -> GraphReport {
        GraphReport::from_descriptors(self.descriptors())
    }

    /// All envelopes published so far, in publish order.
    pub fn log(&self) -> &[Arc<MessageEnvelope>] {
        &self.log
    }

    pub fn end_requested(&self) -> bool {
        self.end_requested
    }

    /// Number of envelopes waiting in `service`'s queue for `subscription`.
    pub fn pending(&self, service: &str, subscription: &str) -> Option<usize> {
        let reg = self.services.get(service)?;
        let topic = TopicName::parse(subscription).ok()?;
        let idx = reg.descriptor.subscriptions.iter().position(|s| s.topic == topic)?;
        Some(reg.queues[idx].len())
    }

    pub fn publish(&mut self, topic: TopicName, payload: impl Serialize) -> Result<u64, BusError> {
        let value = serde_json::to_value(payload)
            .map_err(|e| BusError::Protocol(format!("unserializable payload: {e}")))?;
        self.publish_value(topic, value)
    }

    pub fn publish_value(&mut self, topic: TopicName, payload: Value) -> Result<u64, BusError> {
        match self.state {
            DialogLifecycle::Running => {}
            DialogLifecycle::Starting | DialogLifecycle::Ending if topic.is_lifecycle() => {}
            DialogLifecycle::Terminated => return Err(BusError::PublishWhileTerminated),
            other => return Err(BusError::NotRunning(other)),
        }
        Ok(self.enqueue(topic, payload))
    }

    fn enqueue(&mut self, topic: TopicName, payload: Value) -> u64 {
        let counter = self.seqs.entry(topic.clone()).or_insert(0);
        let seq = *counter;
        *counter += 1;
        if topic.domain().is_none() && topic.base() == DIALOG_END {
            self.end_requested = true;
        }
        let envelope = Arc::new(MessageEnvelope { topic, seq, wall_time: now_millis(), payload });
        for reg in self.services.values_mut() {
            for (sub, queue) in reg.descriptor.subscriptions.iter().zip(reg.queues.iter_mut()) {
                if sub.topic.matches(&envelope.topic) {
                    queue.push_back(Arc::clone(&envelope));
                }
            }
        }
        self.log.push(envelope);
        seq
    }

    fn drain_links(&mut self) {
        let links = self.links.clone();
        for link in links {
            for (topic, payload) in link.drain_inbox() {
                let declared = link.service_names().iter().any(|name| {
                    self.services.get(name).is_some_and(|r| r.descriptor.may_publish(&topic))
                });
                if declared {
                    self.enqueue(topic, payload);
                } else {
                    log::warn!("dropping undeclared publication {topic} from {}", link.address());
                }
            }
        }
    }

    /// Names of services whose every subscription has a pending message.
    pub fn ready_services(&self) -> Vec<String> {
        self.services.iter().filter(|(_, r)| r.is_ready()).map(|(n, _)| n.clone()).collect()
    }

    /// Runs one dispatch cycle and returns the invoked services in order.
    pub fn dispatch_cycle(&mut self) -> Result<Vec<String>, BusError> {
        if self.state != DialogLifecycle::Running {
            return Err(BusError::NotRunning(self.state));
        }
        self.drain_links();
        let ready = self.ready_services();
        let mut produced = Vec::with_capacity(ready.len());
        for name in &ready {
            let reg = self.services.get_mut(name).expect("ready service is registered");
            let inputs = reg.take_inputs();
            let result = match &mut reg.endpoint {
                Endpoint::Local(service) => service.handle(&inputs),
                Endpoint::Remote(link) => link.invoke(name, &inputs, self.config.invoke_timeout),
            };
            let outputs = result.and_then(|out| {
                let undeclared =
                    out.iter().map(|(t, _)| t).find(|t| !reg.descriptor.may_publish(t)).cloned();
                match undeclared {
                    Some(t) => Err(ServiceError::new(format!("undeclared publication {t}"))),
                    None => Ok(out),
                }
            });
            match outputs {
                Ok(out) => produced.push(out),
                Err(cause) => {
                    self.state = DialogLifecycle::Ending;
                    return Err(BusError::HandlerError { service: name.clone(), cause: cause.0 });
                }
            }
        }
        for out in produced {
            for (topic, payload) in out.into_entries() {
                self.enqueue(topic, payload);
            }
        }
        Ok(ready)
    }

    /// Broadcasts start to every service and waits for all acknowledgements,
    /// then publishes `dialog_start` and enters `Running`.
    pub fn start(&mut self) -> Result<(), BusError> {
        if self.state != DialogLifecycle::Idle {
            return Err(BusError::NotRunning(self.state));
        }
        self.state = DialogLifecycle::Starting;
        if let Err(e) = self.broadcast(LifecycleEvent::Start) {
            let _ = self.end();
            return Err(e);
        }
        self.enqueue(TopicName::new(DIALOG_START)?, Value::Null);
        self.state = DialogLifecycle::Running;
        Ok(())
    }

    /// Publishes `dialog_exit`, broadcasts end and waits for every
    /// acknowledgement. The bus is `Terminated` afterwards even on error.
    pub fn end(&mut self) -> Result<(), BusError> {
        match self.state {
            DialogLifecycle::Terminated => return Ok(()),
            DialogLifecycle::Idle => {
                self.state = DialogLifecycle::Terminated;
                return Ok(());
            }
            _ => {}
        }
        self.state = DialogLifecycle::Ending;
        self.enqueue(TopicName::new(DIALOG_EXIT)?, Value::Null);
        let result = self.broadcast(LifecycleEvent::End);
        self.state = DialogLifecycle::Terminated;
        result
    }

    fn broadcast(&mut self, event: LifecycleEvent) -> Result<(), BusError> {
        let mut first_error = None;
        for (name, reg) in self.services.iter_mut() {
            if let Endpoint::Local(service) = &mut reg.endpoint {
                if let Err(e) = service.on_lifecycle(event) {
                    log::warn!("service {name} failed on {event:?}: {e}");
                    if first_error.is_none() {
                        first_error = Some(BusError::HandlerError {
                            service: name.clone(),
                            cause: e.0,
                        });
                    }
                }
            }
        }
        for link in &self.links {
            if !link.lifecycle(event, self.config.ack_timeout) {
                let who = link.service_names().join(",");
                let err = match event {
                    LifecycleEvent::Start => BusError::StartTimeout(who),
                    LifecycleEvent::End => BusError::EndTimeout(who),
                };
                if first_error.is_none() {
                    first_error = Some(err);
                }
            }
        }
        match first_error {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// Dispatches until `dialog_end`, quiescence, a handler error, or
    /// `max_cycles`.
    pub fn run_until_quiescent(&mut self, max_cycles: usize) -> Result<RunOutcome, BusError> {
        let mut cycles = 0;
        loop {
            if self.end_requested {
                return Ok(RunOutcome { cycles, reason: TerminationReason::DialogEnd });
            }
            if cycles >= max_cycles {
                return Ok(RunOutcome { cycles, reason: TerminationReason::MaxCycles });
            }
            self.drain_links();
            if self.ready_services().is_empty() {
                return Ok(RunOutcome { cycles, reason: TerminationReason::Quiescent });
            }
            match self.dispatch_cycle() {
                Ok(_) => cycles += 1,
                Err(BusError::HandlerError { service, cause }) => {
                    return Ok(RunOutcome {
                        cycles,
                        reason: TerminationReason::HandlerError { service, cause },
                    })
                }
                Err(e) => return Err(e),
            }
        }
    }

    /// Starts the dialog, publishes the initial message, dispatches, and
    /// ends the dialog (also after handler errors).
    pub fn run_dialog(
        &mut self,
        initial_topic: TopicName,
        initial_payload: impl Serialize,
        max_cycles: usize,
    ) -> Result<DialogResult, BusError> {
        self.start()?;
        let outcome = self
            .publish(initial_topic, initial_payload)
            .and_then(|_| self.run_until_quiescent(max_cycles));
        let outcome = match outcome {
            Ok(o) => o,
            Err(e) => {
                let _ = self.end();
                return Err(e);
            }
        };
        self.end()?;
        Ok(DialogResult {
            envelopes: self.log.iter().map(|e| e.as_ref().clone()).collect(),
            cycles: outcome.cycles,
            reason: outcome.reason,
        })
    }
}
