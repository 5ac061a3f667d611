use std::sync::Arc;

use super::topics::{scoped, BELIEF_STATE, SYS_ACT};
use super::{fail, ServiceEntry};
use crate::acts::{SysAct, SysActType};
use crate::bus::{Inputs, Outputs, ServiceDescriptor, ServiceError, SubscriptionMode, DIALOG_START};
use crate::policy::DialogPolicy;
use crate::state::BeliefState;

/// `policy.<d>`: `belief_state/<d>` to `sys_act/<d>`.
pub fn policy_service(domain: &str, policy: Arc<dyn DialogPolicy>) -> ServiceEntry {
    let input = scoped(BELIEF_STATE, domain);
    let output = scoped(SYS_ACT, domain);
    let descriptor = ServiceDescriptor::new(format!("policy.{domain}"))
        .subscribe(&input, SubscriptionMode::Latest)
        .publish(&output);
    let handler = move |inputs: &Inputs| -> Result<Outputs, ServiceError> {
        let bs: BeliefState = inputs.latest(&input)?;
        let act = policy.act(&bs).map_err(fail)?;
        Outputs::new().with(&output, act)
    };
    (descriptor, Box::new(handler))
}

/// `policy.<d>.start`: opens a single-domain dialog with `Welcome`.
pub fn welcome_service(domain: &str) -> ServiceEntry {
    let output = scoped(SYS_ACT, domain);
    let descriptor = ServiceDescriptor::new(format!("policy.{domain}.start"))
        .subscribe(DIALOG_START, SubscriptionMode::Latest)
        .publish(&output);
    let handler = move |_: &Inputs| Outputs::new().with(&output, SysAct::new(SysActType::Welcome));
    (descriptor, Box::new(handler))
}
