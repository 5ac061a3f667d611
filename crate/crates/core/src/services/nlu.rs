use std::sync::Arc;

use super::topics::{scoped, SYS_ACT, USER_ACTS, USER_UTTERANCE};
use super::{lock, shared, DomainUtterance, ServiceEntry, Shared};
use crate::acts::{SysAct, UserAct, UserActType};
use crate::bus::{Inputs, LifecycleEvent, Outputs, Service, ServiceDescriptor, ServiceError, SubscriptionMode};
use crate::domain::Ontology;
use crate::nlu::{parse_in_context, NluRuleSet};

struct Parse {
    ontology: Arc<Ontology>,
    rules: Arc<NluRuleSet>,
    last_sys: Shared<Option<SysAct>>,
    input: String,
    output: String,
}

impl Service for Parse {
    fn handle(&mut self, inputs: &Inputs) -> Result<Outputs, ServiceError> {
        let u: DomainUtterance = inputs.latest(&self.input)?;
        let context = lock(&self.last_sys).clone();
        let mut acts = parse_in_context(&u.text, &self.ontology, &self.rules, context.as_ref());
        if u.domain_switched {
            acts.retain(|a| a.act_type != UserActType::Bad);
            acts.insert(0, UserAct::select_domain(self.ontology.name.clone()));
        }
        Outputs::new().with(&self.output, acts)
    }

    fn on_lifecycle(&mut self, event: LifecycleEvent) -> Result<(), ServiceError> {
        if event == LifecycleEvent::Start {
            *lock(&self.last_sys) = None;
        }
        Ok(())
    }
}

/// `nlu.<d>`: `user_utterance/<d>` to `user_acts/<d>`, resolving short
/// answers against the last act seen by `nlu.<d>.context` on `sys_act/<d>`.
/// A domain switch adds a leading `SelectDomain` and drops `Bad`.
pub fn nlu_services(ontology: Arc<Ontology>, rules: Arc<NluRuleSet>) -> Vec<ServiceEntry> {
    let d = ontology.name.clone();
    let last_sys = shared(None);
    let input = scoped(USER_UTTERANCE, &d);
    let output = scoped(USER_ACTS, &d);
    let sys = scoped(SYS_ACT, &d);
    let parse = Parse { ontology, rules, last_sys: last_sys.clone(), input: input.clone(), output: output.clone() };
    let context = move |inputs: &Inputs| -> Result<Outputs, ServiceError> {
        *lock(&last_sys) = Some(inputs.latest::<SysAct>(&sys)?);
        Outputs::none()
    };
    vec![
        (
            ServiceDescriptor::new(format!("nlu.{d}")).subscribe(&input, SubscriptionMode::Latest).publish(&output),
            Box::new(parse),
        ),
        (
            ServiceDescriptor::new(format!("nlu.{d}.context")).subscribe(&scoped(SYS_ACT, &d), SubscriptionMode::Latest),
            Box::new(context),
        ),
    ]
}
