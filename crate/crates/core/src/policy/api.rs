use std::collections::BTreeMap;

use crate::acts::{SysAct, SysActType, UserActType};
use crate::domain::{same_value, ApiFixture, ApiSpec, DomainError, DONTCARE};
use crate::state::BeliefState;

/// Rule-based policy for API domains: `Bye` on user bye, `Welcome` before
/// the first user turn, `Bad` on unparseable input; otherwise mandatory
/// parameters are filled from the belief (falling back to the API
/// defaults, also for `dontcare`), the first still-missing one is
/// requested, and a complete parameter set is looked up. A lookup without
/// a fixture entry yields `Bad` carrying the parameters.
pub fn api_policy(bs: &BeliefState, fixture: &ApiFixture, spec: &ApiSpec) -> SysAct {
    if bs.has_act(UserActType::Bye) {
        return SysAct::new(SysActType::Bye);
    }
    if bs.turn == 0 && bs.last_act_types.is_empty() {
        return SysAct::new(SysActType::Welcome);
    }
    if bs.is_bad_only() {
        return SysAct::new(SysActType::Bad);
    }
    let mut params = BTreeMap::new();
    for slot in &spec.mandatory {
        let value = bs
            .value(slot)
            .filter(|v| !same_value(v, DONTCARE))
            .or_else(|| spec.defaults.get(slot).map(String::as_str));
        match value {
            Some(v) => {
                params.insert(slot.clone(), v.to_string());
            }
            None => return SysAct::request(slot.clone()),
        }
    }
    match fixture.api_query(&params) {
        Ok(result) => {
            let mut act = SysAct::new(SysActType::InformByName);
            for (slot, value) in &params {
                act = act.with(slot.clone(), value.clone());
            }
            for (slot, value) in &result {
                let text = match value {
                    serde_json::Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                act = act.with(slot.clone(), text);
            }
            act
        }
        Err(DomainError::MissingParameter(missing)) => SysAct::request(missing[0].clone()),
        Err(_) => params.into_iter().fold(SysAct::new(SysActType::Bad), |act, (s, v)| act.with(s, v)),
    }
}
