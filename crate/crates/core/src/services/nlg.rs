use std::sync::Arc;

use super::topics::{scoped, BACKCHANNEL, SYS_ACT, SYS_EMOTION, SYS_UTTERANCE};
use super::{fail, lock, shared, ServiceEntry, Shared};
use crate::acts::{SysAct, SysActType, SystemEmotion};
use crate::bus::{
    Inputs, LifecycleEvent, Outputs, Service, ServiceDescriptor, ServiceError, SubscriptionMode, DIALOG_END,
};
use crate::nlg::{generate, TemplateCatalog};
use crate::signals::{backchannel_response, BackchannelCategory};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct NlgOptions {
    /// Follow `sys_emotion` and prefix `backchannel` realizations.
    pub affective: bool,
    /// Publish `dialog_end` after realizing `Bye`.
    pub ends_dialog: bool,
}

#[derive(Default)]
struct Affect {
    emotion: SystemEmotion,
    backchannel: BackchannelCategory,
}

struct Realize {
    catalog: Arc<TemplateCatalog>,
    affect: Shared<Affect>,
    options: NlgOptions,
    input: String,
    output: String,
}

impl Service for Realize {
    fn handle(&mut self, inputs: &Inputs) -> Result<Outputs, ServiceError> {
        let act: SysAct = inputs.latest(&self.input)?;
        let (emotion, bc) = {
            let a = lock(&self.affect);
            (a.emotion, backchannel_response(a.backchannel))
        };
        let text = generate(&act, emotion, bc, &self.catalog).map_err(fail)?;
        let out = Outputs::new().with(&self.output, text)?;
        if self.options.ends_dialog && act.act_type == SysActType::Bye {
            out.with(DIALOG_END, ())
        } else {
            Ok(out)
        }
    }

    fn on_lifecycle(&mut self, event: LifecycleEvent) -> Result<(), ServiceError> {
        if event == LifecycleEvent::Start {
            *lock(&self.affect) = Affect::default();
        }
        Ok(())
    }
}

/// `nlg.<d>`: `sys_act/<d>` to `sys_utterance/<d>`. With
/// [`NlgOptions::affective`], `nlg.<d>.emotion` and `nlg.<d>.backchannel`
/// keep the latest expressed emotion and backchannel category.
pub fn nlg_services(domain: &str, catalog: Arc<TemplateCatalog>, options: NlgOptions) -> Vec<ServiceEntry> {
    let affect = shared(Affect::default());
    let input = scoped(SYS_ACT, domain);
    let output = scoped(SYS_UTTERANCE, domain);
    let mut descriptor =
        ServiceDescriptor::new(format!("nlg.{domain}")).subscribe(&input, SubscriptionMode::Latest).publish(&output);
    if options.ends_dialog {
        descriptor = descriptor.publish(DIALOG_END);
    }
    let mut entries: Vec<ServiceEntry> =
        vec![(descriptor, Box::new(Realize { catalog, affect: affect.clone(), options, input, output }))];
    if options.affective {
        let a = affect.clone();
        let emotion = move |inputs: &Inputs| -> Result<Outputs, ServiceError> {
            lock(&a).emotion = inputs.latest(SYS_EMOTION)?;
            Outputs::none()
        };
        let backchannel = move |inputs: &Inputs| -> Result<Outputs, ServiceError> {
            lock(&affect).backchannel = inputs.latest(BACKCHANNEL)?;
            Outputs::none()
        };
        entries.push((
            ServiceDescriptor::new(format!("nlg.{domain}.emotion")).subscribe(SYS_EMOTION, SubscriptionMode::Latest),
            Box::new(emotion),
        ));
        entries.push((
            ServiceDescriptor::new(format!("nlg.{domain}.backchannel")).subscribe(BACKCHANNEL, SubscriptionMode::Latest),
            Box::new(backchannel),
        ));
    }
    entries
}
