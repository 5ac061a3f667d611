//! The shipped example domains (mensa food and weather), compiled into the
//! crate. Every loader panics only if the bundled data is malformed, which
//! the test suite rules out.

use std::sync::Arc;

use crate::domain::{ApiFixture, EntityDatabase, Ontology, TripleStore};
use crate::nlg::TemplateCatalog;
use crate::nlu::{KbQuestionRules, NluRuleSet};

pub const MENSA_ONTOLOGY: &str = include_str!("../data/mensa/ontology.json");
pub const MENSA_DATABASE: &str = include_str!("../data/mensa/database.json");
pub const MENSA_RULES: &str = include_str!("../data/mensa/rules.json");
pub const MENSA_TEMPLATES: &str = include_str!("../data/mensa/templates.txt");
pub const WEATHER_ONTOLOGY: &str = include_str!("../data/weather/ontology.json");
pub const WEATHER_FIXTURE: &str = include_str!("../data/weather/fixture.json");
pub const WEATHER_RULES: &str = include_str!("../data/weather/rules.json");
pub const WEATHER_TEMPLATES: &str = include_str!("../data/weather/templates.txt");
pub const GENERAL_RULES: &str = include_str!("../data/general_rules.json");
pub const KB_TRIPLES: &str = include_str!("../data/kb/triples.json");
pub const KB_QUESTIONS: &str = include_str!("../data/kb/questions.json");
pub const VALENCE_LEXICON: &str = include_str!("../data/lexicon.json");

pub fn mensa_ontology() -> Arc<Ontology> {
    Arc::new(Ontology::from_json(MENSA_ONTOLOGY).expect("bundled mensa ontology"))
}

pub fn mensa_database() -> EntityDatabase {
    EntityDatabase::from_json(mensa_ontology(), MENSA_DATABASE).expect("bundled mensa database")
}

pub fn mensa_rules() -> NluRuleSet {
    NluRuleSet::from_json(&mensa_ontology(), GENERAL_RULES, MENSA_RULES).expect("bundled mensa rules")
}

pub fn mensa_templates() -> TemplateCatalog {
    TemplateCatalog::parse(MENSA_TEMPLATES).expect("bundled mensa templates")
}

pub fn weather_ontology() -> Arc<Ontology> {
    Arc::new(Ontology::from_json(WEATHER_ONTOLOGY).expect("bundled weather ontology"))
}

pub fn weather_fixture() -> ApiFixture {
    let ontology = weather_ontology();
    let params = &ontology.api.as_ref().expect("weather is API-backed").mandatory;
    ApiFixture::from_json(WEATHER_FIXTURE, params).expect("bundled weather fixture")
}

pub fn weather_rules() -> NluRuleSet {
    NluRuleSet::from_json(&weather_ontology(), GENERAL_RULES, WEATHER_RULES).expect("bundled weather rules")
}

pub fn weather_templates() -> TemplateCatalog {
    TemplateCatalog::parse(WEATHER_TEMPLATES).expect("bundled weather templates")
}

pub fn triple_store() -> TripleStore {
    TripleStore::from_json(KB_TRIPLES).expect("bundled triples")
}

pub fn kb_questions() -> KbQuestionRules {
    KbQuestionRules::from_json(KB_QUESTIONS).expect("bundled question rules")
}
