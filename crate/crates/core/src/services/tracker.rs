use std::sync::Arc;

use super::topics::{scoped, DOMAIN, SYS_UTTERANCE, USER_TEXT, USER_UTTERANCE};
use super::{lock, shared, ActiveDomain, DomainUtterance, ServiceEntry, Shared};
use crate::bus::{Inputs, LifecycleEvent, Outputs, Service, ServiceDescriptor, ServiceError, SubscriptionMode, DIALOG_START};
use crate::domain::{Ontology, TripleStore};
use crate::nlu::{KbQuestionRules, KeywordTracker};

pub const UNKNOWN_ANSWER: &str = "Sorry, I do not know the answer to that.";

/// Knowledge-base question answering ahead of domain tracking.
#[derive(Clone, Debug)]
pub struct KbAnswering {
    pub store: Arc<TripleStore>,
    pub questions: Arc<KbQuestionRules>,
}

/// Greeting listing the display names of `domains`.
pub fn welcome_text(domains: &[Arc<Ontology>]) -> String {
    let names: Vec<String> = domains.iter().map(|o| o.display_name()).collect();
    let list = match names.split_last() {
        Some((last, rest)) if !rest.is_empty() => format!("{} and {}", rest.join(", "), last),
        Some((last, _)) => last.clone(),
        None => String::new(),
    };
    format!("Hello, please let me know how I can help you, I can discuss the following domains: {list}.")
}

struct Track {
    tracker: KeywordTracker,
    kb: Option<KbAnswering>,
    welcome: String,
    current: Shared<Option<String>>,
}

impl Service for Track {
    fn handle(&mut self, inputs: &Inputs) -> Result<Outputs, ServiceError> {
        let text: String = inputs.latest(USER_TEXT)?;
        if let Some(kb) = &self.kb {
            if let Some(q) = kb.questions.recognize(&text) {
                let answer = q.answer(&kb.store).unwrap_or_else(|_| UNKNOWN_ANSWER.to_string());
                return Outputs::new().with(SYS_UTTERANCE, answer);
            }
        }
        let mut current = lock(&self.current);
        let (active, switch) = self.tracker.track(&text, current.as_deref());
        *current = active.clone();
        match active {
            Some(d) => {
                let switched = switch.is_some();
                let out = Outputs::new()
                    .with(&scoped(USER_UTTERANCE, &d), DomainUtterance { text, domain_switched: switched })?;
                if switched {
                    out.with(DOMAIN, ActiveDomain { active: d })
                } else {
                    Ok(out)
                }
            }
            None => Outputs::new().with(SYS_UTTERANCE, &self.welcome),
        }
    }

    fn on_lifecycle(&mut self, event: LifecycleEvent) -> Result<(), ServiceError> {
        if event == LifecycleEvent::Start {
            *lock(&self.current) = None;
        }
        Ok(())
    }
}

/// `domain_tracker`: routes `user_text` to `user_utterance/<d>` of the
/// active domain (announcing switches on `domain`), answers knowledge-base
/// questions and greets on `sys_utterance` when no domain is active.
/// `domain_tracker.start` greets at `dialog_start`.
pub fn domain_tracker_services(domains: &[Arc<Ontology>], kb: Option<KbAnswering>) -> Vec<ServiceEntry> {
    let welcome = welcome_text(domains);
    let tracker = KeywordTracker::new(domains.iter().map(|o| o.as_ref()));
    let mut descriptor = ServiceDescriptor::new("domain_tracker")
        .subscribe(USER_TEXT, SubscriptionMode::Latest)
        .publish(DOMAIN)
        .publish(SYS_UTTERANCE);
    for o in domains {
        descriptor = descriptor.publish(&scoped(USER_UTTERANCE, &o.name));
    }
    let greeting = welcome.clone();
    let start = move |_: &Inputs| Outputs::new().with(SYS_UTTERANCE, &greeting);
    vec![
        (descriptor, Box::new(Track { tracker, kb, welcome, current: shared(None) })),
        (
            ServiceDescriptor::new("domain_tracker.start")
                .subscribe(DIALOG_START, SubscriptionMode::Latest)
                .publish(SYS_UTTERANCE),
            Box::new(start),
        ),
    ]
}
