use std::collections::BTreeMap;

use crate::acts::{SysAct, SysActType, UserActType};
use crate::domain::{same_value, EntityDatabase, Ontology, Row};
use crate::state::BeliefState;

/// An act describing `row`: its primary key, every informable slot, and the
/// requested slots.
pub fn entity_act<'a>(
    act_type: SysActType,
    row: &Row,
    ontology: &Ontology,
    requested: impl IntoIterator<Item = &'a String>,
) -> SysAct {
    let mut act = SysAct::new(act_type).with(ontology.primary_key.clone(), row[&ontology.primary_key].clone());
    for slot in ontology.informable_slots() {
        act = act.with(slot, row[slot].clone());
    }
    for slot in requested {
        if ontology.is_requestable(slot) {
            act = act.with(slot.clone(), row[slot].clone());
        }
    }
    act
}

/// Offer for a user who asked for something else, or for whom nothing
/// matches: the next unrejected candidate, or a relaxed query dropping the
/// most recent constraints first. Empty `InformByAlternatives` when nothing
/// is left.
pub fn alternatives_act(bs: &BeliefState, db: &EntityDatabase) -> SysAct {
    let ontology = db.ontology();
    let pk = &ontology.primary_key;
    let unrejected = |rows: Vec<&Row>| -> Option<Row> {
        rows.into_iter().find(|r| !bs.excluded.iter().any(|e| same_value(e, &r[pk]))).cloned()
    };
    let mut constraints: BTreeMap<String, String> = bs.constraints();
    let mut order = bs.inform_order.clone();
    loop {
        if let Some(row) = unrejected(db.query_entities(&constraints).unwrap_or_default()) {
            return entity_act(SysActType::InformByAlternatives, &row, ontology, &[]);
        }
        match order.pop() {
            Some(slot) => {
                constraints.remove(&slot);
            }
            None => return SysAct::new(SysActType::InformByAlternatives),
        }
    }
}

/// Rule-based policy for database domains. Rules, in order:
///
/// 1. user said bye: `Bye`
/// 2. nothing said yet: `Welcome`
/// 3. only unparseable input: `Bad`
/// 4. user asked for alternatives: [`alternatives_act`]
/// 5. requests about the offered entity (or the only candidate):
///    `InformByName` answering them
/// 6. no candidates: [`alternatives_act`]
/// 7. exactly one candidate: `InformByName`
/// 8. an unconstrained slot still splits the candidates: `Request` it
/// 9. otherwise `InformByName` with the first candidate
pub fn handcrafted_policy(bs: &BeliefState, db: &EntityDatabase) -> SysAct {
    let ontology = db.ontology();
    if bs.has_act(UserActType::Bye) {
        return SysAct::new(SysActType::Bye);
    }
    if bs.turn == 0 && bs.last_act_types.is_empty() {
        return SysAct::new(SysActType::Welcome);
    }
    if bs.is_bad_only() {
        return SysAct::new(SysActType::Bad);
    }
    let candidates = bs.candidates(db).unwrap_or_default();
    if bs.has_act(UserActType::RequestAlternatives) {
        return alternatives_act(bs, db);
    }
    let offered = bs
        .offered
        .as_deref()
        .and_then(|o| candidates.iter().find(|r| same_value(&r[&ontology.primary_key], o)));
    if !bs.requests.is_empty() {
        let target = offered.or(if candidates.len() == 1 { candidates.first() } else { None });
        if let Some(row) = target {
            return entity_act(SysActType::InformByName, row, ontology, &bs.requests);
        }
    }
    match candidates.len() {
        0 => alternatives_act(bs, db),
        1 => entity_act(SysActType::InformByName, candidates[0], ontology, &bs.requests),
        _ => match bs.discriminable_slots.first() {
            Some(slot) => SysAct::request(slot.clone()),
            None => {
                let row = offered.unwrap_or(&candidates[0]);
                entity_act(SysActType::InformByName, row, ontology, &bs.requests)
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acts::UserAct;
    use crate::fixtures;
    use crate::state::bst_update;

    #[test]
    fn mensa_reference_path() {
        let db = fixtures::mensa_database();
        let s0 = BeliefState::new(&db);
        assert_eq!(handcrafted_policy(&s0, &db), SysAct::new(SysActType::Welcome));
        let s1 = bst_update(&s0, &[UserAct::select_domain("mensa")], &db).unwrap();
        assert_eq!(handcrafted_policy(&s1, &db), SysAct::request("dish_type"));
        let s2 = bst_update(&s1, &[UserAct::inform("dish_type", "main dish")], &db).unwrap();
        assert_eq!(handcrafted_policy(&s2, &db), SysAct::request("vegan"));
        let s3 = bst_update(&s2, &[UserAct::inform("vegan", "true")], &db).unwrap();
        let act = handcrafted_policy(&s3, &db);
        assert_eq!(act.act_type, SysActType::InformByName);
        assert_eq!(act.value("name"), Some("mediterranean Ebly wheat"));
        assert_eq!(act.value("dish_type"), Some("main dish"));
        assert_eq!(act.value("vegan"), Some("true"));
    }

    #[test]
    fn no_match_relaxes_latest_constraint() {
        let db = fixtures::mensa_database();
        let s = bst_update(
            &BeliefState::new(&db),
            &[UserAct::inform("dish_type", "dessert"), UserAct::inform("vegan", "true")],
            &db,
        )
        .unwrap();
        assert_eq!(s.num_matches, 0);
        let act = handcrafted_policy(&s, &db);
        assert_eq!(act.act_type, SysActType::InformByAlternatives);
        assert_eq!(act.value("dish_type"), Some("dessert"));
    }

    #[test]
    fn answers_requests_about_offer_and_handles_bye_and_bad() {
        let db = fixtures::mensa_database();
        let mut s = bst_update(&BeliefState::new(&db), &[UserAct::inform("dish_type", "dessert")], &db).unwrap();
        let offer = handcrafted_policy(&s, &db);
        assert_eq!(offer.act_type, SysActType::InformByName);
        s.record_system_act(&offer, "name");
        let s = bst_update(&s, &[UserAct::request("price")], &db).unwrap();
        let answer = handcrafted_policy(&s, &db);
        assert_eq!(answer.value("name"), offer.value("name"));
        assert!(answer.value("price").is_some());
        let bad = bst_update(&s, &[UserAct::new(UserActType::Bad)], &db).unwrap();
        assert_eq!(handcrafted_policy(&bad, &db).act_type, SysActType::Bad);
        let bye = bst_update(&s, &[UserAct::new(UserActType::Bye)], &db).unwrap();
        assert_eq!(handcrafted_policy(&bye, &db).act_type, SysActType::Bye);
    }
}
