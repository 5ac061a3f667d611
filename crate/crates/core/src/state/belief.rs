use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::StateError;
use crate::acts::{SysAct, SysActType, UserAct, UserActType};
use crate::domain::{same_value, EntityDatabase, Ontology, Row, DONTCARE};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlotBelief {
    pub value: String,
    pub score: f64,
}

/// The belief of one turn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeliefSnapshot {
    pub turn: usize,
    pub informs: BTreeMap<String, SlotBelief>,
    /// Informed slots, least recently informed first.
    pub inform_order: Vec<String>,
    pub requests: BTreeSet<String>,
    pub last_act_types: BTreeSet<UserActType>,
    pub num_matches: usize,
    /// Unconstrained informable slots that still split the candidates, in
    /// ontology order.
    pub discriminable_slots: Vec<String>,
    /// Primary key of the entity the system last offered.
    pub offered: Option<String>,
    /// Entities the user asked alternatives for.
    pub excluded: Vec<String>,
}

/// Current belief plus the snapshots of all earlier turns (the current one
/// included), so `history.len() == turn + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeliefState {
    pub domain: String,
    #[serde(flatten)]
    pub current: BeliefSnapshot,
    pub history: Vec<BeliefSnapshot>,
}

impl std::ops::Deref for BeliefState {
    type Target = BeliefSnapshot;

    fn deref(&self) -> &BeliefSnapshot {
        &self.current
    }
}

impl BeliefState {
    /// Turn-0 belief for a database domain.
    pub fn new(db: &EntityDatabase) -> Self {
        Self::initial(db.ontology(), Some(db))
    }

    /// Turn-0 belief for an API domain.
    pub fn new_api(ontology: &Ontology) -> Self {
        Self::initial(ontology, None)
    }

    fn initial(ontology: &Ontology, db: Option<&EntityDatabase>) -> Self {
        let mut current = BeliefSnapshot {
            turn: 0,
            informs: BTreeMap::new(),
            inform_order: Vec::new(),
            requests: BTreeSet::new(),
            last_act_types: BTreeSet::new(),
            num_matches: 0,
            discriminable_slots: Vec::new(),
            offered: None,
            excluded: Vec::new(),
        };
        refresh(&mut current, ontology, db);
        BeliefState { domain: ontology.name.clone(), history: vec![current.clone()], current }
    }

    /// Informs as query constraints.
    pub fn constraints(&self) -> BTreeMap<String, String> {
        self.current.informs.iter().map(|(s, b)| (s.clone(), b.value.clone())).collect()
    }

    pub fn value(&self, slot: &str) -> Option<&str> {
        self.current.informs.get(slot).map(|b| b.value.as_str())
    }

    pub fn is_bad_only(&self) -> bool {
        self.last_act_types.iter().all(|t| *t == UserActType::Bad) && !self.last_act_types.is_empty()
    }

    pub fn has_act(&self, t: UserActType) -> bool {
        self.last_act_types.contains(&t)
    }

    /// Remembers the entity offered by a system act, without starting a
    /// new turn.
    pub fn record_system_act(&mut self, act: &SysAct, primary_key: &str) {
        if matches!(act.act_type, SysActType::InformByName | SysActType::InformByAlternatives) {
            if let Some(name) = act.value(primary_key) {
                self.current.offered = Some(name.to_string());
            }
        }
    }

    /// Matching rows that the user has not rejected.
    pub fn candidates<'a>(&self, db: &'a EntityDatabase) -> Result<Vec<&'a Row>, StateError> {
        let excluded = &self.current.excluded;
        let pk = &db.ontology().primary_key;
        Ok(db
            .query_entities(&self.constraints())?
            .into_iter()
            .filter(|r| !excluded.iter().any(|e| same_value(e, &r[pk])))
            .collect())
    }
}

fn refresh(s: &mut BeliefSnapshot, ontology: &Ontology, db: Option<&EntityDatabase>) {
    let constrained = |slot: &str| s.informs.contains_key(slot);
    match db {
        Some(db) => {
            let constraints: BTreeMap<String, String> =
                s.informs.iter().map(|(k, b)| (k.clone(), b.value.clone())).collect();
            let matches = db.query_entities(&constraints).unwrap_or_default();
            s.num_matches = matches.len();
            let pk = &ontology.primary_key;
            let candidates: Vec<&Row> = matches
                .into_iter()
                .filter(|r| !s.excluded.iter().any(|e| same_value(e, &r[pk])))
                .collect();
            s.discriminable_slots = ontology
                .informable_slots()
                .filter(|slot| !constrained(slot))
                .filter(|slot| {
                    let distinct: BTreeSet<String> =
                        candidates.iter().map(|r| r[*slot].trim().to_lowercase()).collect();
                    distinct.len() >= 2
                })
                .map(str::to_string)
                .collect();
        }
        None => {
            s.num_matches = 0;
            s.discriminable_slots =
                ontology.informable_slots().filter(|slot| !constrained(slot)).map(str::to_string).collect();
        }
    }
}

fn update(
    prev: &BeliefState,
    acts: &[UserAct],
    ontology: &Ontology,
    db: Option<&EntityDatabase>,
) -> Result<BeliefState, StateError> {
    let mut s = prev.current.clone();
    s.turn += 1;
    s.requests.clear();
    s.last_act_types = acts.iter().map(|a| a.act_type).collect();
    for act in acts {
        match act.act_type {
            UserActType::Inform => {
                let slot = act.slot.as_deref().unwrap_or_default();
                if !ontology.is_informable(slot) {
                    return Err(StateError::UnknownSlot(slot.to_string()));
                }
                let raw = act.value.as_deref().unwrap_or_default();
                let value = if same_value(raw, DONTCARE) {
                    DONTCARE.to_string()
                } else {
                    ontology.canonical_value(slot, raw).map(str::to_string).ok_or_else(|| {
                        StateError::InvalidValue { slot: slot.to_string(), value: raw.to_string() }
                    })?
                };
                s.informs.insert(slot.to_string(), SlotBelief { value, score: act.score });
                s.inform_order.retain(|x| x != slot);
                s.inform_order.push(slot.to_string());
            }
            UserActType::Request => {
                let slot = act.slot.as_deref().unwrap_or_default();
                if !ontology.is_requestable(slot) {
                    return Err(StateError::UnknownSlot(slot.to_string()));
                }
                s.requests.insert(slot.to_string());
            }
            UserActType::RequestAlternatives => {
                if let Some(offered) = s.offered.take() {
                    if !s.excluded.iter().any(|e| same_value(e, &offered)) {
                        s.excluded.push(offered);
                    }
                }
            }
            _ => {}
        }
    }
    refresh(&mut s, ontology, db);
    let mut history = prev.history.clone();
    history.push(s.clone());
    Ok(BeliefState { domain: prev.domain.clone(), current: s, history })
}

/// One belief-tracking step for a database domain.
pub fn bst_update(prev: &BeliefState, acts: &[UserAct], db: &EntityDatabase) -> Result<BeliefState, StateError> {
    update(prev, acts, db.ontology(), Some(db))
}

/// One belief-tracking step for an API domain (no match counting).
pub fn bst_update_api(prev: &BeliefState, acts: &[UserAct], ontology: &Ontology) -> Result<BeliefState, StateError> {
    update(prev, acts, ontology, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn main_dish_then_vegan() {
        let db = fixtures::mensa_database();
        let s0 = BeliefState::new(&db);
        assert_eq!(s0.num_matches, 13);
        assert_eq!(s0.discriminable_slots, ["dish_type", "vegan"]);
        let s1 = bst_update(&s0, &[UserAct::inform("dish_type", "Main Dish")], &db).unwrap();
        assert_eq!(s1.value("dish_type"), Some("main dish"));
        assert_eq!(s1.num_matches, 6);
        assert_eq!(s1.discriminable_slots, ["vegan"]);
        let s2 = bst_update(&s1, &[UserAct::inform("vegan", "true")], &db).unwrap();
        assert_eq!(s2.num_matches, 1);
        assert_eq!(s2.turn, 2);
        assert_eq!(s2.history.len(), 3);
        assert_eq!(s2.history[1], s1.current);
    }

    #[test]
    fn bad_only_keeps_informs() {
        let db = fixtures::mensa_database();
        let s1 = bst_update(&BeliefState::new(&db), &[UserAct::inform("vegan", "true")], &db).unwrap();
        let s2 = bst_update(&s1, &[UserAct::new(UserActType::Bad)], &db).unwrap();
        assert_eq!(s2.informs, s1.informs);
        assert_eq!(s2.turn, s1.turn + 1);
        assert!(s2.is_bad_only());
    }

    #[test]
    fn requests_reset_and_alternatives_exclude_offer() {
        let db = fixtures::mensa_database();
        let s1 = bst_update(&BeliefState::new(&db), &[UserAct::request("price")], &db).unwrap();
        assert!(s1.requests.contains("price"));
        let mut s2 = bst_update(&s1, &[UserAct::inform("dish_type", "dessert")], &db).unwrap();
        assert!(s2.requests.is_empty());
        let offer = SysAct::new(SysActType::InformByName).with("name", "apple strudel");
        s2.record_system_act(&offer, "name");
        let s3 = bst_update(&s2, &[UserAct::new(UserActType::RequestAlternatives)], &db).unwrap();
        assert_eq!(s3.excluded, ["apple strudel"]);
        assert_eq!(s3.offered, None);
        assert_eq!(s3.num_matches, 2);
        assert_eq!(s3.candidates(&db).unwrap().len(), 1);
    }

    #[test]
    fn rejects_unknown_slots_and_values() {
        let db = fixtures::mensa_database();
        let s0 = BeliefState::new(&db);
        assert!(matches!(bst_update(&s0, &[UserAct::inform("colour", "red")], &db), Err(StateError::UnknownSlot(_))));
        assert!(matches!(
            bst_update(&s0, &[UserAct::inform("dish_type", "pizza")], &db),
            Err(StateError::InvalidValue { .. })
        ));
        assert!(bst_update(&s0, &[UserAct::inform("dish_type", "dontcare")], &db).is_ok());
    }

    #[test]
    fn json_round_trip() {
        let db = fixtures::mensa_database();
        let s1 = bst_update(&BeliefState::new(&db), &[UserAct::inform("vegan", "true")], &db).unwrap();
        let back: BeliefState = serde_json::from_str(&serde_json::to_string(&s1).unwrap()).unwrap();
        assert_eq!(back, s1);
    }
}
