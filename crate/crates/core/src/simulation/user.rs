use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::goal::{sample_goal, GoalConfig, UserGoal};
use super::{Agenda, RewardConfig, SimError};
use crate::acts::{SysAct, SysActType, UserAct, UserActType};
use crate::domain::{same_value, EntityDatabase, Row, DONTCARE};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub goal: GoalConfig,
    pub max_turns: usize,
    /// Largest number of same-type acts popped from the agenda at once.
    pub max_pop: usize,
    pub reward: RewardConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { goal: GoalConfig::default(), max_turns: 25, max_pop: 2, reward: RewardConfig::default() }
    }
}

/// Result of one simulated dialog.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub success: bool,
    pub turns: usize,
    pub reward: f64,
    pub goal: UserGoal,
}

/// Agenda-based simulated user: answers the system first, then works
/// through its own agenda.
#[derive(Clone, Debug)]
pub struct UserSimulator {
    db: Arc<EntityDatabase>,
    cfg: SimConfig,
    rng: ChaCha8Rng,
    goal: UserGoal,
    agenda: Agenda,
    informed: BTreeMap<String, String>,
    offered: Option<Row>,
    last_acts: Vec<UserAct>,
    turns: usize,
    byes: usize,
    ended: bool,
}

impl UserSimulator {
    pub fn new(db: Arc<EntityDatabase>, cfg: SimConfig, seed: u64) -> Result<Self, SimError> {
        if cfg.max_pop == 0 {
            return Err(SimError::Config("max_pop must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let goal = sample_goal(&db, &cfg.goal, &mut rng)?;
        Ok(Self::with_goal(db, cfg, goal, rng))
    }

    /// A simulator pursuing a given goal; `rng` drives agenda pops.
    pub fn with_goal(db: Arc<EntityDatabase>, cfg: SimConfig, goal: UserGoal, rng: ChaCha8Rng) -> Self {
        let mut agenda = Agenda::new();
        agenda.push(UserAct::new(UserActType::Bye));
        let order: Vec<String> = db.ontology().informable_slots().map(str::to_string).collect();
        for slot in order.iter().rev() {
            if let Some(v) = goal.constraints.get(slot).filter(|v| !same_value(v, DONTCARE)) {
                agenda.push(UserAct::inform(slot.clone(), v.clone()));
            }
        }
        UserSimulator {
            db,
            cfg,
            rng,
            goal,
            agenda,
            informed: BTreeMap::new(),
            offered: None,
            last_acts: Vec::new(),
            turns: 0,
            byes: 0,
            ended: false,
        }
    }

    pub fn db(&self) -> &Arc<EntityDatabase> {
        &self.db
    }

    pub fn goal(&self) -> &UserGoal {
        &self.goal
    }

    pub fn agenda(&self) -> &Agenda {
        &self.agenda
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn turns(&self) -> usize {
        self.turns
    }

    pub fn said_bye(&self) -> bool {
        self.byes > 0
    }

    pub fn byes(&self) -> usize {
        self.byes
    }

    pub fn ended(&self) -> bool {
        self.ended
    }

    pub fn offered(&self) -> Option<&Row> {
        self.offered.as_ref()
    }

    /// Next user turn, or `None` once the dialog is over: after the system's
    /// or the user's `Bye`, or when the turn limit is used up.
    pub fn step(&mut self, sys: &SysAct) -> Option<Vec<UserAct>> {
        if self.ended || self.said_bye() || sys.act_type == SysActType::Bye || self.turns >= self.cfg.max_turns {
            self.ended = true;
            return None;
        }
        Some(self.simulate_turn(sys))
    }

    /// Responds to `sys`, ignoring the end conditions of [`Self::step`].
    pub fn simulate_turn(&mut self, sys: &SysAct) -> Vec<UserAct> {
        self.turns += 1;
        let acts = self.respond(sys);
        for a in &acts {
            match a.act_type {
                UserActType::Inform => {
                    if let (Some(s), Some(v)) = (&a.slot, &a.value) {
                        self.informed.insert(s.clone(), v.clone());
                    }
                }
                UserActType::Bye => self.byes += 1,
                _ => {}
            }
        }
        self.last_acts = acts.clone();
        acts
    }

    fn respond(&mut self, sys: &SysAct) -> Vec<UserAct> {
        match sys.act_type {
            SysActType::Request | SysActType::Select => match sys.slots().next().map(str::to_string) {
                Some(slot) if self.db.ontology().is_informable(&slot) => self.answer_slot(&slot),
                _ => self.pop_next(),
            },
            SysActType::Confirm => self.answer_confirm(sys),
            SysActType::InformByName | SysActType::InformByAlternatives => self.on_offer(sys),
            SysActType::RequestMore => {
                if self.is_done() {
                    self.bye()
                } else {
                    self.pop_next()
                }
            }
            SysActType::Bad if !self.last_acts.is_empty() => self.last_acts.clone(),
            SysActType::Welcome | SysActType::Bad | SysActType::Bye => self.pop_next(),
        }
    }

    fn goal_value(&self, slot: &str) -> String {
        self.goal.constraints.get(slot).cloned().unwrap_or_else(|| DONTCARE.to_string())
    }

    fn drop_pending_inform(&mut self, slot: &str) {
        self.agenda.remove_where(|a| a.act_type == UserActType::Inform && a.slot.as_deref() == Some(slot));
    }

    fn answer_slot(&mut self, slot: &str) -> Vec<UserAct> {
        self.drop_pending_inform(slot);
        vec![UserAct::inform(slot, self.goal_value(slot))]
    }

    fn answer_confirm(&mut self, sys: &SysAct) -> Vec<UserAct> {
        for (slot, value) in &sys.slot_values {
            let Some(wanted) = self.goal.constraints.get(slot).cloned() else { continue };
            let matches = same_value(&wanted, DONTCARE) || value.as_deref().is_some_and(|v| same_value(v, &wanted));
            if !matches && self.db.ontology().is_informable(slot) {
                let slot = slot.clone();
                self.drop_pending_inform(&slot);
                return vec![UserAct::new(UserActType::Deny), UserAct::inform(slot, wanted)];
            }
        }
        vec![UserAct::new(UserActType::Affirm)]
    }

    fn on_offer(&mut self, sys: &SysAct) -> Vec<UserAct> {
        let pk = self.db.ontology().primary_key.clone();
        let Some(row) = sys.value(&pk).and_then(|name| self.db.find(name)).cloned() else {
            // nothing left to offer
            return self.bye();
        };
        let violated = self
            .goal
            .concrete()
            .find(|(slot, v)| !row.get(*slot).is_some_and(|r| same_value(r, v)))
            .map(|(s, v)| (s.clone(), v.clone()));
        if let Some((slot, value)) = violated {
            self.drop_pending_inform(&slot);
            return vec![UserAct::new(UserActType::Deny), UserAct::inform(slot, value)];
        }
        let same_entity = self.offered.as_ref().is_some_and(|o| same_value(&o[&pk], &row[&pk]));
        if !same_entity {
            self.goal.requests.values_mut().for_each(|done| *done = false);
        }
        for (slot, done) in self.goal.requests.iter_mut() {
            if sys.slot_values.contains_key(slot) {
                *done = true;
            }
        }
        self.offered = Some(row);
        let open: Vec<String> = self.goal.requests.iter().filter(|(_, d)| !**d).map(|(s, _)| s.clone()).collect();
        if !open.is_empty() {
            for slot in open.iter().rev() {
                let pending = self
                    .agenda
                    .contains(|a| a.act_type == UserActType::Request && a.slot.as_deref() == Some(slot.as_str()));
                if !pending {
                    self.agenda.push(UserAct::request(slot.clone()));
                }
            }
            return self.pop_next();
        }
        if self.agenda.only_bye_left() {
            self.bye()
        } else {
            self.pop_next()
        }
    }

    fn bye(&mut self) -> Vec<UserAct> {
        self.agenda.remove_where(|_| true);
        vec![UserAct::new(UserActType::Bye)]
    }

    fn pop_next(&mut self) -> Vec<UserAct> {
        let n = self.rng.random_range(1..=self.cfg.max_pop);
        let acts = self.agenda.pop_batch(n);
        if acts.is_empty() {
            vec![UserAct::new(UserActType::Bye)]
        } else {
            acts
        }
    }

    fn is_done(&self) -> bool {
        self.offered.is_some() && self.goal.requests_fulfilled() && self.agenda.only_bye_left()
    }

    /// Every concrete constraint informed with the goal value, every request
    /// answered, and the offered entity consistent with the goal.
    pub fn is_success(&self) -> bool {
        let informed = self
            .goal
            .concrete()
            .all(|(slot, v)| self.informed.get(slot).is_some_and(|i| same_value(i, v)));
        let offered = self.offered.as_ref().is_some_and(|row| self.goal.satisfied_by(row));
        informed && offered && self.goal.requests_fulfilled()
    }

    pub fn outcome(&self) -> SimOutcome {
        let success = self.is_success();
        SimOutcome {
            success,
            turns: self.turns,
            reward: self.cfg.reward.episode_return(self.turns, success),
            goal: self.goal.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn sim(constraints: &[(&str, &str)], requests: &[&str]) -> UserSimulator {
        let goal = UserGoal {
            constraints: constraints.iter().map(|(s, v)| (s.to_string(), v.to_string())).collect(),
            requests: requests.iter().map(|s| (s.to_string(), false)).collect(),
        };
        let cfg = SimConfig { max_pop: 1, ..SimConfig::default() };
        UserSimulator::with_goal(Arc::new(fixtures::mensa_database()), cfg, goal, ChaCha8Rng::seed_from_u64(0))
    }

    fn offer(name: &str, db: &EntityDatabase, extra: &[&str]) -> SysAct {
        let row = db.find(name).unwrap();
        let mut act = SysAct::new(SysActType::InformByName).with("name", name);
        for slot in ["dish_type", "vegan"].iter().chain(extra) {
            act = act.with(*slot, row[*slot].clone());
        }
        act
    }

    #[test]
    fn request_is_answered_from_the_goal() {
        let mut s = sim(&[("vegan", "true"), ("dish_type", "main dish")], &["price"]);
        assert_eq!(s.simulate_turn(&SysAct::request("vegan")), [UserAct::inform("vegan", "true")]);
        assert!(!s.agenda().contains(|a| a.slot.as_deref() == Some("vegan") && a.act_type == UserActType::Inform));
        let mut s = sim(&[("vegan", "true")], &["price"]);
        assert_eq!(s.simulate_turn(&SysAct::request("dish_type")), [UserAct::inform("dish_type", DONTCARE)]);
    }

    #[test]
    fn wrong_offer_is_denied_and_corrected() {
        let db = fixtures::mensa_database();
        let mut s = sim(&[("vegan", "true"), ("dish_type", "main dish")], &["price"]);
        let wrong = db.rows().iter().find(|r| r["dish_type"] == "main dish" && r["vegan"] == "false").unwrap();
        let acts = s.simulate_turn(&offer(&wrong["name"], &db, &[]));
        assert_eq!(acts, [UserAct::new(UserActType::Deny), UserAct::inform("vegan", "true")]);
    }

    #[test]
    fn answering_the_last_request_ends_with_bye() {
        let db = fixtures::mensa_database();
        let mut s = sim(&[("vegan", "true"), ("dish_type", "main dish")], &["price"]);
        assert_eq!(s.simulate_turn(&SysAct::new(SysActType::Welcome)), [UserAct::inform("dish_type", "main dish")]);
        assert_eq!(s.simulate_turn(&SysAct::request("vegan")), [UserAct::inform("vegan", "true")]);
        let acts = s.simulate_turn(&offer("mediterranean Ebly wheat", &db, &[]));
        assert_eq!(acts, [UserAct::request("price")]);
        let acts = s.simulate_turn(&offer("mediterranean Ebly wheat", &db, &["price"]));
        assert_eq!(acts, [UserAct::new(UserActType::Bye)]);
        assert!(s.is_success());
        assert_eq!(s.step(&SysAct::new(SysActType::Bye)), None);
        let o = s.outcome();
        assert_eq!((o.turns, o.reward), (4, 16.0));
        assert!(s.agenda().pops() <= s.agenda().pushes());
    }

    #[test]
    fn turn_limit_ends_without_success() {
        let mut s = sim(&[("vegan", "true")], &["price"]);
        s.cfg.max_turns = 1;
        assert!(s.step(&SysAct::new(SysActType::Welcome)).is_some());
        assert!(s.step(&SysAct::request("dish_type")).is_none());
        assert!(!s.outcome().success);
    }

    #[test]
    fn confirm_and_bad() {
        let mut s = sim(&[("vegan", "true")], &["price"]);
        let c = SysAct::new(SysActType::Confirm).with("vegan", "false");
        assert_eq!(s.simulate_turn(&c), [UserAct::new(UserActType::Deny), UserAct::inform("vegan", "true")]);
        let again = s.simulate_turn(&SysAct::new(SysActType::Bad));
        assert_eq!(again, [UserAct::new(UserActType::Deny), UserAct::inform("vegan", "true")]);
        let ok = SysAct::new(SysActType::Confirm).with("vegan", "true");
        assert_eq!(s.simulate_turn(&ok), [UserAct::new(UserActType::Affirm)]);
    }
}
