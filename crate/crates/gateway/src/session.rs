//! One dialog system per connected user.

use std::sync::Arc;

use colloquy_core::bus::MessageEnvelope;
use colloquy_core::services::topics::{BELIEF_STATE, DOMAIN, USER_STATE};
use colloquy_core::services::ActiveDomain;
use colloquy_core::signals::{Arousal, EmotionCategory, EmotionPrediction, Engagement, Valence};
use colloquy_core::system::{Conversation, DomainBundle, Placement, SystemBuilder, SystemTurn};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::GatewayError;
use crate::protocol::{ClientEvent, ServerEvent};

pub const KNOWN_DOMAINS: &[&str] = &["mensa", "weather"];

/// What a new session should run. Every field has a default, so `{}` is a
/// valid configuration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    pub domains: Vec<String>,
    /// Track the user's emotion and engagement and adapt the phrasing.
    pub affective: bool,
    /// Answer factual questions from the bundled triple store.
    pub knowledge_base: bool,
    /// Services to run behind a loopback socket, by name or name prefix.
    pub remote: Vec<String>,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            domains: KNOWN_DOMAINS.iter().map(|d| d.to_string()).collect(),
            affective: true,
            knowledge_base: true,
            remote: Vec::new(),
        }
    }
}

impl SessionConfig {
    /// Resolves the configured domains to bundles, in order, dropping repeats.
    pub fn bundles(&self) -> Result<Vec<DomainBundle>, GatewayError> {
        if self.domains.is_empty() {
            return Err(GatewayError::UnknownDomain("no domain given".into()));
        }
        let mut seen: Vec<&str> = Vec::new();
        let mut bundles = Vec::new();
        for name in &self.domains {
            let key = name.trim();
            if seen.iter().any(|s| s.eq_ignore_ascii_case(key)) {
                continue;
            }
            seen.push(key);
            bundles.push(match key.to_ascii_lowercase().as_str() {
                "mensa" => DomainBundle::mensa(),
                "weather" => DomainBundle::weather(),
                _ => return Err(GatewayError::UnknownDomain(name.clone())),
            });
        }
        Ok(bundles)
    }

    pub fn builder(&self) -> Result<SystemBuilder, GatewayError> {
        let mut builder = SystemBuilder::new();
        for bundle in self.bundles()? {
            builder = builder.domain(bundle);
        }
        if self.knowledge_base {
            builder = builder.knowledge_base(colloquy_core::services::KbAnswering {
                store: Arc::new(colloquy_core::fixtures::triple_store()),
                questions: Arc::new(colloquy_core::fixtures::kb_questions()),
            });
        }
        Ok(builder.affective(self.affective).placement(Placement::remote_prefixes(self.remote.clone())))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    User,
    System,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub speaker: Speaker,
    pub text: String,
    pub turn: usize,
}

pub struct Session {
    id: String,
    conversation: Conversation,
    graph: String,
    active: Option<String>,
    transcript: Vec<TranscriptEntry>,
    history: Vec<ServerEvent>,
    belief: Value,
    user: Value,
    turn: usize,
}

impl Session {
    /// Builds and starts the configured system. The welcome, the initial
    /// state and the active domain are the first events of the session.
    pub fn create(id: impl Into<String>, config: &SessionConfig) -> Result<Self, GatewayError> {
        let system = config.builder()?.build().map_err(|e| GatewayError::ServiceStartFailure(e.to_string()))?;
        let graph = system.bus.draw_graph().to_dot();
        let mut session = Session {
            id: id.into(),
            conversation: Conversation::new(system, config.affective),
            graph,
            active: None,
            transcript: Vec::new(),
            history: Vec::new(),
            belief: Value::Null,
            user: Value::Null,
            turn: 0,
        };
        let welcome = session.conversation.start().map_err(|e| GatewayError::ServiceStartFailure(e.to_string()))?;
        let mut events = vec![ServerEvent::Domain { active: None }];
        session.absorb(welcome, &mut events);
        Ok(session)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// The service graph in DOT syntax.
    pub fn graph(&self) -> &str {
        &self.graph
    }

    pub fn transcript(&self) -> &[TranscriptEntry] {
        &self.transcript
    }

    /// Every event the session has emitted, oldest first.
    pub fn history(&self) -> &[ServerEvent] {
        &self.history
    }

    pub fn active_domain(&self) -> Option<&str> {
        self.active.as_deref()
    }

    pub fn is_ended(&self) -> bool {
        self.conversation.is_ended()
    }

    /// Applies one client event; failures become a single `error` event.
    pub fn handle(&mut self, event: ClientEvent) -> Vec<ServerEvent> {
        let result = match event {
            ClientEvent::Utterance { text } => self.post_utterance(&text),
            ClientEvent::Social { valence, arousal, emotion, engagement } => {
                self.set_social_signals(&valence, &arousal, &emotion, &engagement).map(|()| Vec::new())
            }
            ClientEvent::EndDialog => self.end(),
        };
        result.unwrap_or_else(|e| self.reject(&e))
    }

    /// Records an error event for `e` and returns it.
    pub fn reject(&mut self, e: &GatewayError) -> Vec<ServerEvent> {
        let event = ServerEvent::from(e);
        self.history.push(event.clone());
        vec![event]
    }

    pub fn post_utterance(&mut self, text: &str) -> Result<Vec<ServerEvent>, GatewayError> {
        if self.is_ended() {
            return Err(GatewayError::SessionTerminated);
        }
        self.turn += 1;
        self.transcript.push(TranscriptEntry { speaker: Speaker::User, text: text.to_string(), turn: self.turn });
        let reply = self.conversation.say(text).map_err(|e| GatewayError::Dialog(e.to_string()))?;
        let mut events = Vec::new();
        self.absorb(reply, &mut events);
        Ok(events)
    }

    pub fn set_social_signals(
        &mut self,
        valence: &str,
        arousal: &str,
        emotion: &str,
        engagement: &str,
    ) -> Result<(), GatewayError> {
        if self.is_ended() {
            return Err(GatewayError::SessionTerminated);
        }
        let invalid = |e: colloquy_core::acts::ParseLabelError| GatewayError::InvalidLabel(e.to_string());
        let prediction = EmotionPrediction::new(
            emotion.parse::<EmotionCategory>().map_err(invalid)?,
            valence.parse::<Valence>().map_err(invalid)?,
            arousal.parse::<Arousal>().map_err(invalid)?,
        );
        let engagement = engagement.parse::<Engagement>().map_err(invalid)?;
        self.conversation.set_social(prediction, engagement);
        Ok(())
    }

    pub fn end(&mut self) -> Result<Vec<ServerEvent>, GatewayError> {
        if self.is_ended() {
            return Err(GatewayError::SessionTerminated);
        }
        self.conversation.finish();
        self.history.push(ServerEvent::Ended);
        Ok(vec![ServerEvent::Ended])
    }

    fn absorb(&mut self, reply: SystemTurn, events: &mut Vec<ServerEvent>) {
        self.observe(&reply.messages, events);
        if reply.utterances.is_empty() {
            events.push(ServerEvent::from(&GatewayError::NoResponse));
        }
        for text in reply.utterances {
            self.transcript.push(TranscriptEntry { speaker: Speaker::System, text: text.clone(), turn: self.turn });
            events.push(ServerEvent::SysUtterance { text, turn: self.turn });
            events.push(ServerEvent::State { belief: self.belief.clone(), user: self.user.clone() });
        }
        if reply.ended {
            events.push(ServerEvent::Ended);
        }
        self.history.extend(events.iter().cloned());
    }

    fn observe(&mut self, messages: &[Arc<MessageEnvelope>], events: &mut Vec<ServerEvent>) {
        for m in messages {
            match m.topic.base() {
                BELIEF_STATE => self.belief = m.payload.clone(),
                USER_STATE => self.user = m.payload.clone(),
                DOMAIN => {
                    if let Ok(d) = m.decode::<ActiveDomain>() {
                        if self.active.as_deref() != Some(d.active.as_str()) {
                            self.active = Some(d.active.clone());
                            events.push(ServerEvent::Domain { active: Some(d.active) });
                        }
                    }
                }
                _ => {}
            }
        }
    }
}
