//! Assembling services into a running dialog system.
//!
//! [`SystemBuilder`] wires the reference multi-domain stack (domain
//! tracking, per-domain NLU, belief tracking, policy and NLG, plus the
//! optional social-signal services); [`assemble`] places any service list
//! on a bus, hosting selected services behind a loopback [`ServiceHost`];
//! [`Conversation`] drives a text dialog turn by turn.

use std::sync::Arc;

use crate::bus::{
    BusError, DialogBus, HostHandle, Inputs, MessageEnvelope, Outputs, ServiceDescriptor, ServiceError, ServiceHost,
    TopicName,
};
use crate::domain::{ApiFixture, EntityDatabase, Ontology};
use crate::fixtures;
use crate::nlg::TemplateCatalog;
use crate::nlu::NluRuleSet;
use crate::policy::{ApiPolicy, DialogPolicy, HandcraftedPolicy};
use crate::services::topics::{EMOTION, ENGAGEMENT, GAZE, SYS_UTTERANCE, USER_TEXT};
use crate::services::{
    affective_service, backchannel_service, bst_services, domain_tracker_services, emotion_service,
    engagement_service, nlg_services, nlu_services, policy_service, ust_service, BstBackend, KbAnswering,
    NlgOptions, ServiceEntry,
};
use crate::signals::{
    BackchannelPredictor, EmotionPrediction, EmotionPredictor, Engagement, EngagementConfig, SignalError,
};

/// Which services run out of process: exact names or `<prefix>.` families.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Placement {
    remote: Vec<String>,
}

impl Placement {
    pub fn local() -> Self {
        Placement::default()
    }

    /// `"nlu"` selects `nlu`, `nlu.mensa`, `nlu.mensa.context`, ...
    pub fn remote_prefixes(prefixes: Vec<String>) -> Self {
        Placement { remote: prefixes }
    }

    pub fn is_remote(&self, name: &str) -> bool {
        self.remote.iter().any(|p| name == p || name.strip_prefix(p.as_str()).is_some_and(|r| r.starts_with('.')))
    }
}

/// A bus plus the loopback host serving its remote services.
pub struct AssembledSystem {
    pub bus: DialogBus,
    host: Option<HostHandle>,
}

impl AssembledSystem {
    /// Wraps a bus whose remote services, if any, are hosted elsewhere.
    pub fn from_bus(bus: DialogBus) -> Self {
        AssembledSystem { bus, host: None }
    }

    pub fn remote_address(&self) -> Option<std::net::SocketAddr> {
        self.host.as_ref().map(HostHandle::local_addr)
    }

    /// Ends the dialog if still running, closes the remote connection and
    /// waits for the host.
    pub fn shutdown(mut self) {
        let _ = self.bus.end();
        drop(self.bus);
        if let Some(h) = self.host.take() {
            if let Err(e) = h.join() {
                log::warn!("service host: {e}");
            }
        }
    }
}

/// Registers `entries` on a new bus; those selected by `placement` are
/// served from a [`ServiceHost`] on 127.0.0.1 and reached over TCP.
pub fn assemble(entries: Vec<ServiceEntry>, placement: &Placement) -> Result<AssembledSystem, BusError> {
    let mut bus = DialogBus::new();
    let mut host = ServiceHost::new();
    let mut hosted = 0;
    for (descriptor, service) in entries {
        if placement.is_remote(&descriptor.name) {
            host.add_boxed(descriptor, service)?;
            hosted += 1;
        } else {
            bus.register_boxed(descriptor, service)?;
        }
    }
    let host = if hosted > 0 {
        let handle = host.spawn("127.0.0.1:0")?;
        bus.connect_remote(&handle.local_addr().to_string(), 5000)?;
        Some(handle)
    } else {
        None
    };
    Ok(AssembledSystem { bus, host })
}

#[derive(Clone)]
pub enum DomainBackend {
    Database(Arc<EntityDatabase>),
    Api { ontology: Arc<Ontology>, fixture: Arc<ApiFixture> },
}

/// Everything one domain contributes to a system.
#[derive(Clone)]
pub struct DomainBundle {
    pub backend: DomainBackend,
    pub rules: Arc<NluRuleSet>,
    pub templates: Arc<TemplateCatalog>,
    pub policy: Arc<dyn DialogPolicy>,
}

impl DomainBundle {
    pub fn database(db: Arc<EntityDatabase>, rules: NluRuleSet, templates: TemplateCatalog) -> Self {
        let policy = Arc::new(HandcraftedPolicy::new(Arc::clone(&db)));
        DomainBundle {
            backend: DomainBackend::Database(db),
            rules: Arc::new(rules),
            templates: Arc::new(templates),
            policy,
        }
    }

    pub fn api(ontology: Arc<Ontology>, fixture: ApiFixture, rules: NluRuleSet, templates: TemplateCatalog) -> Self {
        let fixture = Arc::new(fixture);
        let spec = ontology.api.clone().unwrap_or_default();
        let policy = Arc::new(ApiPolicy::new(Arc::clone(&fixture), spec));
        DomainBundle {
            backend: DomainBackend::Api { ontology, fixture },
            rules: Arc::new(rules),
            templates: Arc::new(templates),
            policy,
        }
    }

    pub fn mensa() -> Self {
        Self::database(Arc::new(fixtures::mensa_database()), fixtures::mensa_rules(), fixtures::mensa_templates())
    }

    pub fn weather() -> Self {
        Self::api(
            fixtures::weather_ontology(),
            fixtures::weather_fixture(),
            fixtures::weather_rules(),
            fixtures::weather_templates(),
        )
    }

    pub fn with_policy(mut self, policy: Arc<dyn DialogPolicy>) -> Self {
        self.policy = policy;
        self
    }

    pub fn ontology(&self) -> Arc<Ontology> {
        match &self.backend {
            DomainBackend::Database(db) => db.ontology_arc(),
            DomainBackend::Api { ontology, .. } => Arc::clone(ontology),
        }
    }

    pub fn name(&self) -> String {
        self.ontology().name.clone()
    }
}

/// Name of the source service standing for the user-facing front end.
pub const USER_INPUT: &str = "user_input";

/// Builder for the multi-domain text system.
pub struct SystemBuilder {
    domains: Vec<DomainBundle>,
    kb: Option<KbAnswering>,
    affective: bool,
    emotion: Option<Box<dyn EmotionPredictor>>,
    backchannel: Option<Box<dyn BackchannelPredictor>>,
    gaze: Option<EngagementConfig>,
    placement: Placement,
}

impl Default for SystemBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl SystemBuilder {
    pub fn new() -> Self {
        SystemBuilder {
            domains: Vec::new(),
            kb: None,
            affective: false,
            emotion: None,
            backchannel: None,
            gaze: None,
            placement: Placement::local(),
        }
    }

    /// Mensa and weather domains with knowledge-base answering.
    pub fn reference() -> Self {
        Self::new().domain(DomainBundle::mensa()).domain(DomainBundle::weather()).knowledge_base(KbAnswering {
            store: Arc::new(fixtures::triple_store()),
            questions: Arc::new(fixtures::kb_questions()),
        })
    }

    pub fn domain(mut self, bundle: DomainBundle) -> Self {
        self.domains.push(bundle);
        self
    }

    pub fn knowledge_base(mut self, kb: KbAnswering) -> Self {
        self.kb = Some(kb);
        self
    }

    /// Adds the user-state tracker and affective policy; NLG follows the
    /// expressed emotion and prefixes backchannels. `emotion` and
    /// `engagement` are then expected every turn, either from the front end
    /// or from [`Self::emotion_predictor`] and [`Self::gaze_tracking`].
    pub fn affective(mut self, on: bool) -> Self {
        self.affective = on;
        self
    }

    pub fn emotion_predictor(mut self, p: Box<dyn EmotionPredictor>) -> Self {
        self.emotion = Some(p);
        self
    }

    pub fn backchannel_predictor(mut self, p: Box<dyn BackchannelPredictor>) -> Self {
        self.backchannel = Some(p);
        self
    }

    pub fn gaze_tracking(mut self, cfg: EngagementConfig) -> Self {
        self.gaze = Some(cfg);
        self
    }

    pub fn placement(mut self, placement: Placement) -> Self {
        self.placement = placement;
        self
    }

    pub fn domain_names(&self) -> Vec<String> {
        self.domains.iter().map(DomainBundle::name).collect()
    }

    pub fn services(self) -> Result<(Vec<ServiceEntry>, Placement), SignalError> {
        let ontologies: Vec<Arc<Ontology>> = self.domains.iter().map(DomainBundle::ontology).collect();
        let mut entries = domain_tracker_services(&ontologies, self.kb.clone());
        let options = NlgOptions { affective: self.affective, ends_dialog: true };
        for d in &self.domains {
            let name = d.name();
            entries.extend(nlu_services(d.ontology(), Arc::clone(&d.rules)));
            let backend = match &d.backend {
                DomainBackend::Database(db) => BstBackend::Database(Arc::clone(db)),
                DomainBackend::Api { ontology, .. } => BstBackend::Api(Arc::clone(ontology)),
            };
            entries.extend(bst_services(backend));
            entries.push(policy_service(&name, Arc::clone(&d.policy)));
            entries.extend(nlg_services(&name, Arc::clone(&d.templates), options));
        }
        let mut front = ServiceDescriptor::new(USER_INPUT).publish(USER_TEXT);
        if self.affective {
            entries.push(ust_service());
            entries.push(affective_service());
            match self.emotion {
                Some(p) => entries.push(emotion_service(p)),
                None => front = front.publish(EMOTION),
            }
            match self.gaze {
                Some(cfg) => {
                    entries.push(engagement_service(cfg)?);
                    front = front.publish(GAZE);
                }
                None => front = front.publish(ENGAGEMENT),
            }
            let bc = self.backchannel.unwrap_or_else(|| Box::new(crate::signals::ConstantBackchannel::default()));
            entries.push(backchannel_service(bc));
        }
        let source = |_: &Inputs| -> Result<Outputs, ServiceError> { Outputs::none() };
        entries.push((front, Box::new(source)));
        Ok((entries, self.placement))
    }

    pub fn build(self) -> Result<AssembledSystem, BusError> {
        let (entries, placement) = self.services().map_err(|e| BusError::Protocol(e.to_string()))?;
        assemble(entries, &placement)
    }
}

/// What the system said in reply to one user turn.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemTurn {
    pub utterances: Vec<String>,
    pub ended: bool,
    /// Every message published during the turn, in publication order.
    pub messages: Vec<Arc<MessageEnvelope>>,
}

/// Drives a text dialog: publishes user input and collects `sys_utterance`.
pub struct Conversation {
    system: Option<AssembledSystem>,
    cursor: usize,
    max_cycles: usize,
    affective: bool,
    social: (EmotionPrediction, Engagement),
}

impl Conversation {
    pub fn new(system: AssembledSystem, affective: bool) -> Self {
        Conversation {
            system: Some(system),
            cursor: 0,
            max_cycles: 1000,
            affective,
            social: (EmotionPrediction::default(), Engagement::Looking),
        }
    }

    pub fn bus(&self) -> Option<&DialogBus> {
        self.system.as_ref().map(|s| &s.bus)
    }

    fn bus_mut(&mut self) -> Result<&mut DialogBus, BusError> {
        self.system.as_mut().map(|s| &mut s.bus).ok_or(BusError::PublishWhileTerminated)
    }

    /// Starts the dialog and returns the greeting.
    pub fn start(&mut self) -> Result<SystemTurn, BusError> {
        self.bus_mut()?.start()?;
        self.settle()
    }

    /// Social signals sent with the following user turns.
    pub fn set_social(&mut self, emotion: EmotionPrediction, engagement: Engagement) {
        self.social = (emotion, engagement);
    }

    pub fn say(&mut self, text: &str) -> Result<SystemTurn, BusError> {
        let affective = self.affective;
        let social = self.social;
        let bus = self.bus_mut()?;
        bus.publish(TopicName::new(USER_TEXT)?, text)?;
        if affective {
            bus.publish(TopicName::new(EMOTION)?, social.0)?;
            bus.publish(TopicName::new(ENGAGEMENT)?, social.1)?;
        }
        self.settle()
    }

    fn settle(&mut self) -> Result<SystemTurn, BusError> {
        let (max, cursor) = (self.max_cycles, self.cursor);
        let bus = self.bus_mut()?;
        let outcome = bus.run_until_quiescent(max)?;
        let topic = TopicName::new(SYS_UTTERANCE)?;
        let messages = bus.log()[cursor..].to_vec();
        let utterances = messages
            .iter()
            .filter(|e| topic.matches(&e.topic))
            .filter_map(|e| e.payload.as_str().map(str::to_string))
            .collect();
        let logged = bus.log().len();
        let ended = bus.end_requested();
        self.cursor = logged;
        if let crate::bus::TerminationReason::HandlerError { service, cause } = outcome.reason {
            return Err(BusError::HandlerError { service, cause });
        }
        if ended {
            self.finish();
        }
        Ok(SystemTurn { utterances, ended, messages })
    }

    pub fn is_ended(&self) -> bool {
        self.system.is_none()
    }

    /// Ends the dialog and releases the bus.
    pub fn finish(&mut self) {
        if let Some(s) = self.system.take() {
            s.shutdown();
        }
    }
}

impl Drop for Conversation {
    fn drop(&mut self) {
        self.finish();
    }
}
