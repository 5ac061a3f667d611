//! Remote services over TCP.
//!
//! A [`ServiceHost`] serves a set of services on one connection. The central
//! bus connects with [`DialogBus::connect_remote`](super::DialogBus::connect_remote),
//! receives the host's `hello` with its descriptors, answers with its own
//! `hello`, and from then on forwards `invoke` and `lifecycle` frames. Hosted
//! source services may push `publish` frames at any time; the bus reassigns
//! their `seq`.

use std::collections::BTreeMap;
use std::io;
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use serde_json::Value;

use super::wire::{self, read_frame, write_frame, Frame, PROTOCOL_VERSION};
use super::{
    BusError, Inputs, LifecycleEvent, Outputs, Service, ServiceDescriptor, ServiceError, TopicName,
};

pub(crate) fn now_millis() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

fn is_timeout(e: &io::Error) -> bool {
    matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut)
}

/// Client side of one connection to a [`ServiceHost`].
pub(crate) struct RemoteLink {
    address: String,
    writer: Mutex<TcpStream>,
    responses: Mutex<Receiver<Frame>>,
    inbox: Arc<Mutex<Vec<(TopicName, Value)>>>,
    services: Vec<String>,
}

impl RemoteLink {
    pub(crate) fn connect(
        address: &str,
        timeout: Duration,
    ) -> Result<(Arc<RemoteLink>, Vec<ServiceDescriptor>), BusError> {
        let connect_timeout =
            || BusError::ConnectTimeout { address: address.to_string(), timeout };
        let deadline = Instant::now() + timeout;
        let addr = address
            .to_socket_addrs()?
            .next()
            .ok_or_else(|| BusError::Protocol(format!("cannot resolve {address}")))?;
        let mut stream = TcpStream::connect_timeout(&addr, timeout).map_err(|e| {
            if is_timeout(&e) {
                connect_timeout()
            } else {
                BusError::Io(e)
            }
        })?;
        stream.set_nodelay(true)?;
        let remaining = deadline.saturating_duration_since(Instant::now());
        stream.set_read_timeout(Some(remaining.max(Duration::from_millis(1))))?;
        let hello = match read_frame(&mut stream) {
            Ok(frame) => frame,
            Err(e) if is_timeout(&e) => return Err(connect_timeout()),
            Err(e) => return Err(BusError::Io(e)),
        };
        let Frame::Hello { version, services } = hello else {
            return Err(BusError::Protocol("expected hello".into()));
        };
        if version != PROTOCOL_VERSION {
            let _ = stream.shutdown(Shutdown::Both);
            return Err(BusError::ProtocolVersionMismatch {
                expected: PROTOCOL_VERSION,
                remote: version,
            });
        }
        write_frame(&mut stream, &Frame::Hello { version: PROTOCOL_VERSION, services: vec![] })?;
        stream.set_read_timeout(None)?;

        let (tx, rx) = mpsc::channel();
        let inbox = Arc::new(Mutex::new(Vec::new()));
        let reader = stream.try_clone()?;
        spawn_reader(reader, tx, Arc::clone(&inbox), address.to_string());

        let link = RemoteLink {
            address: address.to_string(),
            writer: Mutex::new(stream),
            responses: Mutex::new(rx),
            inbox,
            services: services.iter().map(|d| d.name.clone()).collect(),
        };
        Ok((Arc::new(link), services))
    }

    pub(crate) fn address(&self) -> &str {
        &self.address
    }

    pub(crate) fn service_names(&self) -> &[String] {
        &self.services
    }

    fn send(&self, frame: &Frame) -> io::Result<()> {
        let mut w = self.writer.lock().expect("remote writer poisoned");
        write_frame(&mut *w, frame)
    }

    /// Waits for the first response frame accepted by `want`, discarding
    /// stale ones (e.g. a late ack from a previous timeout).
    fn await_response<T>(
        &self,
        timeout: Duration,
        mut want: impl FnMut(Frame) -> Option<T>,
    ) -> Option<T> {
        let deadline = Instant::now() + timeout;
        let rx = self.responses.lock().expect("remote responses poisoned");
        loop {
            let remaining = deadline.saturating_duration_since(Instant::now());
            match rx.recv_timeout(remaining) {
                Ok(frame) => {
                    if let Some(v) = want(frame) {
                        return Some(v);
                    }
                }
                Err(RecvTimeoutError::Timeout) | Err(RecvTimeoutError::Disconnected) => {
                    return None
                }
            }
        }
    }

    pub(crate) fn invoke(
        &self,
        service: &str,
        inputs: &Inputs,
        timeout: Duration,
    ) -> Result<Outputs, ServiceError> {
        let frame =
            Frame::Invoke { service: service.to_string(), inputs: wire::inputs_to_wire(inputs) };
        self.send(&frame).map_err(|e| ServiceError::new(format!("send to {}: {e}", self.address)))?;
        let result = self.await_response(timeout, |f| match f {
            Frame::Result { service: s, outputs, error } if s == service => Some((outputs, error)),
            _ => None,
        });
        match result {
            Some((_, Some(err))) => Err(ServiceError::new(err)),
            Some((outputs, None)) => Ok(wire::outputs_from_wire(outputs)),
            None => Err(ServiceError::new(format!(
                "no result from {} within {timeout:?}",
                self.address
            ))),
        }
    }

    /// Sends a lifecycle event and waits for its ack; `false` on timeout.
    pub(crate) fn lifecycle(&self, event: LifecycleEvent, timeout: Duration) -> bool {
        if self.send(&Frame::Lifecycle { event }).is_err() {
            return false;
        }
        self.await_response(timeout, |f| match f {
            Frame::Ack { event: e } if e == event => Some(()),
            _ => None,
        })
        .is_some()
    }

    pub(crate) fn drain_inbox(&self) -> Vec<(TopicName, Value)> {
        std::mem::take(&mut *self.inbox.lock().expect("remote inbox poisoned"))
    }
}

impl Drop for RemoteLink {
    fn drop(&mut self) {
        if let Ok(w) = self.writer.lock() {
            let _ = w.shutdown(Shutdown::Both);
        }
    }
}

fn spawn_reader(
    mut stream: TcpStream,
    responses: Sender<Frame>,
    inbox: Arc<Mutex<Vec<(TopicName, Value)>>>,
    address: String,
) {
    thread::spawn(move || loop {
        match read_frame(&mut stream) {
            Ok(Frame::Publish { topic, payload, .. }) => {
                inbox.lock().expect("remote inbox poisoned").push((topic, payload));
            }
            Ok(frame) => {
                if responses.send(frame).is_err() {
                    return;
                }
            }
            Err(e) => {
                if e.kind() != io::ErrorKind::UnexpectedEof {
                    log::debug!("remote {address} closed: {e}");
                }
                return;
            }
        }
    });
}

/// Handle for hosted source services to publish through the connection.
#[derive(Clone)]
pub struct RemotePublisher {
    tx: Sender<(TopicName, Value)>,
}

impl RemotePublisher {
    pub fn publish(&self, topic: TopicName, payload: Value) -> bool {
        self.tx.send((topic, payload)).is_ok()
    }
}

struct Hosted {
    descriptor: ServiceDescriptor,
    service: Box<dyn Service>,
}

/// Serves a set of services to one central bus over TCP.
pub struct ServiceHost {
    services: BTreeMap<String, Hosted>,
    publish_tx: Sender<(TopicName, Value)>,
    publish_rx: Receiver<(TopicName, Value)>,
}

impl Default for ServiceHost {
    fn default() -> Self {
        Self::new()
    }
}

impl ServiceHost {
    pub fn new() -> Self {
        let (publish_tx, publish_rx) = mpsc::channel();
        ServiceHost { services: BTreeMap::new(), publish_tx, publish_rx }
    }

    pub fn add(
        &mut self,
        descriptor: ServiceDescriptor,
        service: impl Service + 'static,
    ) -> Result<(), BusError> {
        self.add_boxed(descriptor, Box::new(service))
    }

    pub fn add_boxed(
        &mut self,
        descriptor: ServiceDescriptor,
        service: Box<dyn Service>,
    ) -> Result<(), BusError> {
        descriptor.validate()?;
        if self.services.contains_key(&descriptor.name) {
            return Err(BusError::DuplicateName(descriptor.name));
        }
        self.services.insert(descriptor.name.clone(), Hosted { descriptor, service });
        Ok(())
    }

    pub fn publisher(&self) -> RemotePublisher {
        RemotePublisher { tx: self.publish_tx.clone() }
    }

    pub fn descriptors(&self) -> Vec<ServiceDescriptor> {
        self.services.values().map(|h| h.descriptor.clone()).collect()
    }

    /// Serves one connection until the peer closes it.
    pub fn serve(self, stream: TcpStream) -> Result<(), BusError> {
        stream.set_nodelay(true)?;
        let mut reader = stream.try_clone()?;
        let writer = Arc::new(Mutex::new(stream));
        let send = |frame: &Frame| -> io::Result<()> {
            let mut w = writer.lock().expect("host writer poisoned");
            write_frame(&mut *w, frame)
        };
        send(&Frame::Hello { version: PROTOCOL_VERSION, services: self.descriptors() })?;
        match read_frame(&mut reader)? {
            Frame::Hello { version, .. } if version == PROTOCOL_VERSION => {}
            Frame::Hello { version, .. } => {
                let _ = reader.shutdown(Shutdown::Both);
                return Err(BusError::ProtocolVersionMismatch {
                    expected: PROTOCOL_VERSION,
                    remote: version,
                });
            }
            _ => return Err(BusError::Protocol("expected hello".into())),
        }

        let ServiceHost { mut services, publish_tx, publish_rx } = self;
        drop(publish_tx);
        let pub_writer = Arc::clone(&writer);
        thread::spawn(move || {
            for (topic, payload) in publish_rx {
                let frame = Frame::Publish { topic, seq: 0, wall_time: now_millis(), payload };
                let mut w = pub_writer.lock().expect("host writer poisoned");
                if write_frame(&mut *w, &frame).is_err() {
                    return;
                }
            }
        });

        loop {
            let frame = match read_frame(&mut reader) {
                Ok(f) => f,
                Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Ok(()),
                Err(e) if e.kind() == io::ErrorKind::ConnectionReset => return Ok(()),
                Err(e) => return Err(BusError::Io(e)),
            };
            match frame {
                Frame::Invoke { service, inputs } => {
                    let reply = match services.get_mut(&service) {
                        Some(h) => match h.service.handle(&wire::inputs_from_wire(inputs)) {
                            Ok(out) => Frame::Result {
                                service,
                                outputs: wire::outputs_to_wire(out),
                                error: None,
                            },
                            Err(e) => {
                                Frame::Result { service, outputs: BTreeMap::new(), error: Some(e.0) }
                            }
                        },
                        None => Frame::Result {
                            error: Some(format!("unknown service {service:?}")),
                            service,
                            outputs: BTreeMap::new(),
                        },
                    };
                    send(&reply)?;
                }
                Frame::Lifecycle { event } => {
                    for (name, h) in services.iter_mut() {
                        if let Err(e) = h.service.on_lifecycle(event) {
                            log::warn!("hosted service {name} failed on {event:?}: {e}");
                        }
                    }
                    send(&Frame::Ack { event })?;
                }
                other => {
                    return Err(BusError::Protocol(format!("unexpected frame from bus: {other:?}")))
                }
            }
        }
    }

    /// Binds `addr`, accepts a single connection on a background thread and
    /// serves it.
    pub fn spawn(self, addr: &str) -> io::Result<HostHandle> {
        let listener = TcpListener::bind(addr)?;
        let local = listener.local_addr()?;
        let join = thread::spawn(move || {
            let (stream, _) = listener.accept()?;
            self.serve(stream)
        });
        Ok(HostHandle { addr: local, join })
    }
}

pub struct HostHandle {
    addr: SocketAddr,
    join: JoinHandle<Result<(), BusError>>,
}

impl HostHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Waits for the served connection to close.
    pub fn join(self) -> Result<(), BusError> {
        self.join.join().unwrap_or_else(|_| Err(BusError::Protocol("host thread panicked".into())))
    }
}
