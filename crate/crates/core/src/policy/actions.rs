use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::handcrafted::{alternatives_act, entity_act};
use crate::acts::{SysAct, SysActType, UserActType};
use crate::domain::{same_value, EntityDatabase, Ontology, DONTCARE};
use crate::nlg::Signature;
use crate::state::BeliefState;

/// An abstract system action the RL policy chooses among; slot-specific
/// kinds are expanded over the informable slots.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RlAction {
    Request(String),
    Confirm(String),
    Select(String),
    InformByName,
    InformByAlternatives,
    RequestMore,
    Bad,
    Bye,
}

/// The ontology-instantiated action set, in a fixed order: requests,
/// confirms and selects per informable slot, then the slotless actions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionSpace {
    actions: Vec<RlAction>,
}

impl ActionSpace {
    pub fn for_ontology(ontology: &Ontology) -> Self {
        let slots: Vec<String> = ontology.informable_slots().map(str::to_string).collect();
        let mut actions: Vec<RlAction> = Vec::new();
        actions.extend(slots.iter().cloned().map(RlAction::Request));
        actions.extend(slots.iter().cloned().map(RlAction::Confirm));
        actions.extend(slots.iter().cloned().map(RlAction::Select));
        actions.extend([
            RlAction::InformByName,
            RlAction::InformByAlternatives,
            RlAction::RequestMore,
            RlAction::Bad,
            RlAction::Bye,
        ]);
        ActionSpace { actions }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&RlAction> {
        self.actions.get(index)
    }

    pub fn iter(&self) -> impl Iterator<Item = &RlAction> {
        self.actions.iter()
    }

    pub fn index_of(&self, action: &RlAction) -> Option<usize> {
        self.actions.iter().position(|a| a == action)
    }

    /// Which actions make sense in `bs`: no re-asking constrained slots,
    /// confirming only constrained ones, selecting only between at least
    /// two candidate values, naming only when a candidate exists, and
    /// alternatives only on request or when nothing matches.
    pub fn mask(&self, bs: &BeliefState, db: &EntityDatabase) -> Vec<bool> {
        let candidates = bs.candidates(db).unwrap_or_default();
        self.actions
            .iter()
            .map(|a| match a {
                RlAction::Request(slot) => bs.value(slot).is_none(),
                RlAction::Confirm(slot) => bs.value(slot).is_some(),
                RlAction::Select(slot) => {
                    bs.value(slot).is_none() && {
                        let distinct: BTreeSet<String> =
                            candidates.iter().map(|r| r[slot].trim().to_lowercase()).collect();
                        distinct.len() >= 2
                    }
                }
                RlAction::InformByName => !candidates.is_empty(),
                RlAction::InformByAlternatives => {
                    candidates.is_empty() || bs.has_act(UserActType::RequestAlternatives)
                }
                RlAction::RequestMore | RlAction::Bad | RlAction::Bye => true,
            })
            .collect()
    }

    /// Turns an abstract action into a concrete system act for `bs`.
    pub fn instantiate(&self, index: usize, bs: &BeliefState, db: &EntityDatabase) -> SysAct {
        let ontology = db.ontology();
        match &self.actions[index] {
            RlAction::Request(slot) => SysAct::request(slot.clone()),
            RlAction::Confirm(slot) => {
                SysAct::new(SysActType::Confirm).with(slot.clone(), bs.value(slot).unwrap_or(DONTCARE))
            }
            RlAction::Select(slot) => {
                let candidates = bs.candidates(db).unwrap_or_default();
                let values: Vec<&String> = ontology.informable[slot]
                    .iter()
                    .filter(|v| candidates.iter().any(|r| same_value(&r[slot], v)))
                    .collect();
                let text = match values.split_last() {
                    Some((last, rest)) if !rest.is_empty() => {
                        let head: Vec<&str> = rest.iter().map(|s| s.as_str()).collect();
                        format!("{} or {}", head.join(", "), last)
                    }
                    Some((last, _)) => last.to_string(),
                    None => ontology.informable[slot].join(" or "),
                };
                SysAct::new(SysActType::Select).with(slot.clone(), text)
            }
            RlAction::InformByName => {
                let candidates = bs.candidates(db).unwrap_or_default();
                let pk = &ontology.primary_key;
                let offered =
                    bs.offered.as_deref().and_then(|o| candidates.iter().find(|r| same_value(&r[pk], o)));
                match offered.or(candidates.first()) {
                    Some(row) => entity_act(SysActType::InformByName, row, ontology, &bs.requests),
                    None => alternatives_act(bs, db),
                }
            }
            RlAction::InformByAlternatives => alternatives_act(bs, db),
            RlAction::RequestMore => SysAct::new(SysActType::RequestMore),
            RlAction::Bad => SysAct::new(SysActType::Bad),
            RlAction::Bye => SysAct::new(SysActType::Bye),
        }
    }
}

/// Every signature the handcrafted and RL database policies can emit.
pub fn database_signatures(ontology: &Ontology) -> Vec<Signature> {
    let informable: Vec<&str> = ontology.informable_slots().collect();
    let entity: Vec<&str> = std::iter::once(ontology.primary_key.as_str()).chain(informable.iter().copied()).collect();
    let extra: Vec<&str> =
        ontology.requestable.iter().map(String::as_str).filter(|s| !entity.contains(s)).collect();
    let mut out = vec![
        Signature::new::<&str>(SysActType::Welcome, []),
        Signature::new::<&str>(SysActType::Bad, []),
        Signature::new::<&str>(SysActType::Bye, []),
        Signature::new::<&str>(SysActType::RequestMore, []),
        Signature::new::<&str>(SysActType::InformByAlternatives, []),
        Signature::new(SysActType::InformByAlternatives, entity.iter().copied()),
    ];
    for slot in &informable {
        for t in [SysActType::Request, SysActType::Confirm, SysActType::Select] {
            out.push(Signature::new(t, [*slot]));
        }
    }
    for mask in 0..(1u32 << extra.len()) {
        let chosen = extra.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, s)| *s);
        out.push(Signature::new(SysActType::InformByName, entity.iter().copied().chain(chosen)));
    }
    out
}

/// Every signature [`super::api_policy`] can emit.
pub fn api_signatures(ontology: &Ontology) -> Vec<Signature> {
    let mandatory: Vec<&str> =
        ontology.api.as_ref().map(|a| a.mandatory.iter().map(String::as_str).collect()).unwrap_or_default();
    let mut out = vec![
        Signature::new::<&str>(SysActType::Welcome, []),
        Signature::new::<&str>(SysActType::Bad, []),
        Signature::new::<&str>(SysActType::Bye, []),
        Signature::new(SysActType::Bad, mandatory.iter().copied()),
        Signature::new(
            SysActType::InformByName,
            mandatory.iter().copied().chain(ontology.requestable.iter().map(String::as_str)),
        ),
    ];
    out.extend(mandatory.iter().map(|s| Signature::new(SysActType::Request, [*s])));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acts::UserAct;
    use crate::fixtures;
    use crate::state::bst_update;

    #[test]
    fn mensa_action_set() {
        let space = ActionSpace::for_ontology(&fixtures::mensa_ontology());
        assert_eq!(space.len(), 3 * 2 + 5);
        assert_eq!(space.get(0), Some(&RlAction::Request("dish_type".into())));
        assert_eq!(space.index_of(&RlAction::Bye), Some(10));
    }

    #[test]
    fn masks_follow_belief() {
        let db = fixtures::mensa_database();
        let space = ActionSpace::for_ontology(db.ontology());
        let s1 = bst_update(&BeliefState::new(&db), &[UserAct::inform("dish_type", "dessert")], &db).unwrap();
        let mask = space.mask(&s1, &db);
        let valid: Vec<&RlAction> = space.iter().zip(&mask).filter(|(_, m)| **m).map(|(a, _)| a).collect();
        assert!(valid.contains(&&RlAction::Request("vegan".into())));
        assert!(!valid.contains(&&RlAction::Request("dish_type".into())));
        assert!(valid.contains(&&RlAction::Confirm("dish_type".into())));
        assert!(!valid.contains(&&RlAction::Select("vegan".into())));
        assert!(!valid.contains(&&RlAction::InformByAlternatives));
        let select = space.index_of(&RlAction::Select("dish_type".into())).unwrap();
        let act = space.instantiate(select, &BeliefState::new(&db), &db);
        assert_eq!(act.value("dish_type"), Some("main dish, side dish, dessert or starter"));
    }

    #[test]
    fn signature_counts() {
        assert_eq!(database_signatures(&fixtures::mensa_ontology()).len(), 6 + 6 + 4);
        assert_eq!(api_signatures(&fixtures::weather_ontology()).len(), 5 + 3);
    }
}
