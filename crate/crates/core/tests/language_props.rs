mod common;

use std::collections::BTreeMap;

use colloquy_core::acts::{SysActType, UserAct, UserActType};
use colloquy_core::domain::{EntityDatabase, DONTCARE};
use colloquy_core::fixtures;
use colloquy_core::nlg::generate;
use colloquy_core::nlu::{parse, KeywordTracker};
use colloquy_core::policy::{api_signatures, database_signatures};
use colloquy_core::state::{bst_update, BeliefState};
use proptest::prelude::*;

fn constraint_strategy() -> impl Strategy<Value = BTreeMap<String, String>> {
    let dish = proptest::option::of(prop_oneof![
        Just("main dish"), Just("side dish"), Just("dessert"), Just("starter"), Just(DONTCARE), Just("MAIN DISH")
    ]);
    let vegan = proptest::option::of(prop_oneof![Just("true"), Just("false"), Just(DONTCARE)]);
    (dish, vegan).prop_map(|(d, v)| {
        let mut c = BTreeMap::new();
        if let Some(d) = d {
            c.insert("dish_type".to_string(), d.to_string());
        }
        if let Some(v) = v {
            c.insert("vegan".to_string(), v.to_string());
        }
        c
    })
}

fn keys(db: &EntityDatabase, c: &BTreeMap<String, String>) -> Vec<String> {
    db.query_entities(c).unwrap().iter().map(|r| r["name"].clone()).collect()
}

fn user_act_strategy() -> impl Strategy<Value = UserAct> {
    prop_oneof![
        (prop_oneof![Just("main dish"), Just("side dish"), Just("dessert"), Just("starter"), Just(DONTCARE)])
            .prop_map(|v| UserAct::inform("dish_type", v)),
        (prop_oneof![Just("true"), Just("false"), Just(DONTCARE)]).prop_map(|v| UserAct::inform("vegan", v)),
        (prop_oneof![Just("price"), Just("allergens"), Just("name")]).prop_map(UserAct::request),
        Just(UserAct::new(UserActType::Affirm)),
        Just(UserAct::new(UserActType::Bad)),
        Just(UserAct::new(UserActType::RequestAlternatives)),
        Just(UserAct::new(UserActType::Thanks)),
    ]
}

const FILLER: &[&str] = &["hello", "please", "the", "cool", "thanks", "a", "okay", "what", "is", "there", "maybe", "hmm"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn adding_constraints_only_narrows(c1 in constraint_strategy(), c2 in constraint_strategy()) {
        let db = fixtures::mensa_database();
        let mut both = c1.clone();
        for (k, v) in c2 {
            both.entry(k).or_insert(v);
        }
        let narrow = keys(&db, &both);
        let wide = keys(&db, &c1);
        prop_assert!(narrow.iter().all(|k| wide.contains(k)));
    }

    #[test]
    fn parse_never_returns_nothing(text in ".{0,60}") {
        let rules = fixtures::mensa_rules();
        let acts = parse(&text, &fixtures::mensa_ontology(), &rules);
        prop_assert!(!acts.is_empty());
        prop_assert!(acts.iter().all(UserAct::is_well_formed));
    }

    #[test]
    fn utterances_without_keywords_keep_the_domain(
        words in proptest::collection::vec(proptest::sample::select(FILLER), 0..8),
        current in proptest::option::of(prop_oneof![Just("mensa"), Just("weather")]),
        shout in any::<bool>(),
    ) {
        let ontologies = [fixtures::mensa_ontology().as_ref().clone(), fixtures::weather_ontology().as_ref().clone()];
        let tracker = KeywordTracker::new(&ontologies);
        let text = words.join(" ");
        let (active, _) = tracker.track(&text, current);
        prop_assert_eq!(active.as_deref(), current);
        let text = if shout { "WHAT IS THE WEATHER".to_string() } else { "what is the weather".to_string() };
        let (again, _) = tracker.track(&text, current);
        prop_assert_eq!(again.as_deref(), Some("weather"));
    }

    #[test]
    fn belief_updates_are_deterministic_and_count_matches(
        turns in proptest::collection::vec(proptest::collection::vec(user_act_strategy(), 1..4), 1..8)
    ) {
        let db = fixtures::mensa_database();
        let mut bs = BeliefState::new(&db);
        let mut snapshots = Vec::new();
        for acts in &turns {
            let next = bst_update(&bs, acts, &db).unwrap();
            prop_assert_eq!(&next, &bst_update(&bs, acts, &db).unwrap());
            prop_assert_eq!(next.num_matches, db.query_entities(&next.constraints()).unwrap().len());
            prop_assert_eq!(next.history.len(), next.turn + 1);
            prop_assert_eq!(&next.history[..bs.history.len()], &bs.history[..]);
            snapshots.push(next.current.clone());
            bs = next;
        }
        for (i, snap) in snapshots.iter().enumerate() {
            prop_assert_eq!(&bs.history[i + 1], snap);
        }
    }
}

#[test]
fn dontcare_everywhere_returns_every_row() {
    let db = fixtures::mensa_database();
    let all: BTreeMap<String, String> =
        db.ontology().informable_slots().map(|s| (s.to_string(), DONTCARE.to_string())).collect();
    assert_eq!(db.query_entities(&all).unwrap().len(), db.len());
}

#[test]
fn lookup_restricts_each_row() {
    let db = fixtures::mensa_database();
    let requestable: Vec<&str> = db.ontology().requestable.iter().map(String::as_str).collect();
    for row in db.rows() {
        let got = db.lookup_entity(&row["name"], &requestable).unwrap();
        let want: BTreeMap<String, String> =
            row.iter().filter(|(k, _)| requestable.contains(&k.as_str())).map(|(k, v)| (k.clone(), v.clone())).collect();
        assert_eq!(got, want);
    }
}

#[test]
fn api_query_is_pure() {
    let fixture = fixtures::weather_fixture();
    let params: BTreeMap<String, String> =
        [("city", "Stuttgart"), ("date", "January 28"), ("time", "3 PM")].map(|(k, v)| (k.into(), v.into())).into();
    assert_eq!(fixture.api_query(&params).unwrap(), fixture.api_query(&params).unwrap());
}

#[test]
fn every_ontology_value_is_understood() {
    for (ontology, rules) in [
        (fixtures::mensa_ontology(), fixtures::mensa_rules()),
        (fixtures::weather_ontology(), fixtures::weather_rules()),
    ] {
        for (slot, values) in &ontology.informable {
            let phrasings: Vec<(String, String)> = if ontology.is_boolean(slot) {
                ontology.synonyms[slot].iter().map(|(surface, v)| (surface.clone(), v.clone())).collect()
            } else {
                values.iter().map(|v| (v.clone(), v.clone())).collect()
            };
            for (surface, value) in phrasings {
                let acts = parse(&format!("i want {surface}"), &ontology, &rules);
                assert!(
                    acts.contains(&UserAct::inform(slot.clone(), value.clone())),
                    "i want {surface}: {acts:?}"
                );
            }
        }
    }
}

#[test]
fn neutral_templates_cover_every_policy_act() {
    let db = fixtures::mensa_database();
    let sigs = database_signatures(db.ontology());
    let mensa = fixtures::mensa_templates();
    mensa.check_coverage(&sigs).unwrap();
    let acts = common::enumerate_acts(&sigs, db.ontology(), &common::db_rows(&db));
    assert!(acts.iter().any(|a| a.act_type == SysActType::InformByName));
    let checked = common::nlg_totality(&mensa, &acts).unwrap();
    assert_eq!(checked, acts.len() * 3);

    let weather_ontology = fixtures::weather_ontology();
    let sigs = api_signatures(&weather_ontology);
    let weather = fixtures::weather_templates();
    weather.check_coverage(&sigs).unwrap();
    let rows = common::api_rows(&weather_ontology, &fixtures::weather_fixture());
    let acts = common::enumerate_acts(&sigs, &weather_ontology, &rows);
    common::nlg_totality(&weather, &acts).unwrap();
}

#[test]
fn generation_is_pure() {
    let db = fixtures::mensa_database();
    let catalog = fixtures::mensa_templates();
    let acts = common::enumerate_acts(&database_signatures(db.ontology()), db.ontology(), &common::db_rows(&db));
    for act in &acts {
        for emotion in colloquy_core::acts::SystemEmotion::ALL {
            let a = generate(act, *emotion, Some("Right"), &catalog).unwrap();
            let b = generate(act, *emotion, Some("Right"), &catalog).unwrap();
            assert_eq!(a, b);
            assert!(a.starts_with("Right, "));
        }
    }
}
