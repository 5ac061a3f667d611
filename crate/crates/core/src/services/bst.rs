use std::sync::Arc;

use super::topics::{scoped, BELIEF_STATE, SYS_ACT, USER_ACTS};
use super::{fail, lock, shared, ServiceEntry, Shared};
use crate::acts::{SysAct, UserAct};
use crate::bus::{Inputs, LifecycleEvent, Outputs, Service, ServiceDescriptor, ServiceError, SubscriptionMode};
use crate::domain::{EntityDatabase, Ontology};
use crate::state::{bst_update, bst_update_api, BeliefState};

#[derive(Clone, Debug)]
pub enum BstBackend {
    Database(Arc<EntityDatabase>),
    Api(Arc<Ontology>),
}

impl BstBackend {
    pub fn ontology(&self) -> &Ontology {
        match self {
            BstBackend::Database(db) => db.ontology(),
            BstBackend::Api(o) => o,
        }
    }

    pub fn initial(&self) -> BeliefState {
        match self {
            BstBackend::Database(db) => BeliefState::new(db),
            BstBackend::Api(o) => BeliefState::new_api(o),
        }
    }

    pub fn update(&self, prev: &BeliefState, acts: &[UserAct]) -> Result<BeliefState, crate::state::StateError> {
        match self {
            BstBackend::Database(db) => bst_update(prev, acts, db),
            BstBackend::Api(o) => bst_update_api(prev, acts, o),
        }
    }
}

struct Track {
    backend: BstBackend,
    state: Shared<BeliefState>,
    input: String,
    output: String,
}

impl Service for Track {
    fn handle(&mut self, inputs: &Inputs) -> Result<Outputs, ServiceError> {
        let acts: Vec<UserAct> = inputs.latest(&self.input)?;
        let mut state = lock(&self.state);
        *state = self.backend.update(&state, &acts).map_err(fail)?;
        Outputs::new().with(&self.output, &*state)
    }

    fn on_lifecycle(&mut self, event: LifecycleEvent) -> Result<(), ServiceError> {
        if event == LifecycleEvent::Start {
            *lock(&self.state) = self.backend.initial();
        }
        Ok(())
    }
}

/// `bst.<d>`: `user_acts/<d>` to `belief_state/<d>`; `bst.<d>.offers`
/// records entities offered on `sys_act/<d>`.
pub fn bst_services(backend: BstBackend) -> Vec<ServiceEntry> {
    let d = backend.ontology().name.clone();
    let pk = backend.ontology().primary_key.clone();
    let state = shared(backend.initial());
    let input = scoped(USER_ACTS, &d);
    let output = scoped(BELIEF_STATE, &d);
    let sys = scoped(SYS_ACT, &d);
    let offers_state = state.clone();
    let offers = move |inputs: &Inputs| -> Result<Outputs, ServiceError> {
        let act: SysAct = inputs.latest(&sys)?;
        lock(&offers_state).record_system_act(&act, &pk);
        Outputs::none()
    };
    vec![
        (
            ServiceDescriptor::new(format!("bst.{d}")).subscribe(&input, SubscriptionMode::Latest).publish(&output),
            Box::new(Track { backend, state, input, output }),
        ),
        (
            ServiceDescriptor::new(format!("bst.{d}.offers")).subscribe(&scoped(SYS_ACT, &d), SubscriptionMode::Latest),
            Box::new(offers),
        ),
    ]
}
