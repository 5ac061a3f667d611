use std::sync::Arc;

use super::{api_policy, handcrafted_policy, PolicyError};
use crate::acts::SysAct;
use crate::domain::{ApiFixture, ApiSpec, EntityDatabase};
use crate::policy::rl::RlPolicy;
use crate::state::BeliefState;
use crate::Scalar;

/// Anything that maps a belief state to the next system act.
pub trait DialogPolicy: Send + Sync {
    fn act(&self, bs: &BeliefState) -> Result<SysAct, PolicyError>;
}

#[derive(Clone, Debug)]
pub struct HandcraftedPolicy {
    db: Arc<EntityDatabase>,
}

impl HandcraftedPolicy {
    pub fn new(db: Arc<EntityDatabase>) -> Self {
        HandcraftedPolicy { db }
    }
}

impl DialogPolicy for HandcraftedPolicy {
    fn act(&self, bs: &BeliefState) -> Result<SysAct, PolicyError> {
        Ok(handcrafted_policy(bs, &self.db))
    }
}

#[derive(Clone, Debug)]
pub struct ApiPolicy {
    fixture: Arc<ApiFixture>,
    spec: ApiSpec,
}

impl ApiPolicy {
    pub fn new(fixture: Arc<ApiFixture>, spec: ApiSpec) -> Self {
        ApiPolicy { fixture, spec }
    }
}

impl DialogPolicy for ApiPolicy {
    fn act(&self, bs: &BeliefState) -> Result<SysAct, PolicyError> {
        Ok(api_policy(bs, &self.fixture, &self.spec))
    }
}

impl<S: Scalar> DialogPolicy for RlPolicy<S> {
    fn act(&self, bs: &BeliefState) -> Result<SysAct, PolicyError> {
        RlPolicy::act(self, bs)
    }
}
