use std::collections::BTreeMap;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{normalize, read_file, same_value, DomainError, DONTCARE};

/// Mandatory parameters of an API-backed domain and the values used when the
/// user leaves one unspecified.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ApiSpec {
    pub mandatory: Vec<String>,
    #[serde(default)]
    pub defaults: BTreeMap<String, String>,
}

/// Slots a domain understands. `informable` keeps file order, which is also
/// the order in which policies ask for unconstrained slots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ontology {
    #[serde(rename = "domain")]
    pub name: String,
    #[serde(default)]
    pub display_name: Option<String>,
    pub informable: IndexMap<String, Vec<String>>,
    pub requestable: Vec<String>,
    pub primary_key: String,
    pub keywords: Vec<String>,
    /// slot -> surface form -> canonical value
    #[serde(default)]
    pub synonyms: BTreeMap<String, BTreeMap<String, String>>,
    #[serde(default)]
    pub api: Option<ApiSpec>,
}

impl Ontology {
    pub fn from_json(text: &str) -> Result<Self, DomainError> {
        let ontology: Ontology = serde_json::from_str(text)?;
        ontology.validate()?;
        Ok(ontology)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DomainError> {
        Self::from_json(&read_file(path.as_ref())?)
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        let bad = |m: String| Err(DomainError::InvalidOntology(format!("{}: {m}", self.name)));
        if self.name.is_empty() || self.name.contains('/') {
            return bad("domain name must be non-empty and contain no '/'".into());
        }
        if self.informable.is_empty() || self.requestable.is_empty() {
            return bad("informable and requestable slots must be non-empty".into());
        }
        if self.keywords.is_empty() {
            return bad("keywords must be non-empty".into());
        }
        if !self.requestable.contains(&self.primary_key) {
            return bad(format!("primary key {} is not requestable", self.primary_key));
        }
        for (slot, values) in &self.informable {
            if values.is_empty() {
                return bad(format!("slot {slot} has no values"));
            }
            if values.iter().any(|v| same_value(v, DONTCARE)) {
                return bad(format!("slot {slot} lists the reserved value {DONTCARE}"));
            }
        }
        for (slot, table) in &self.synonyms {
            if !self.is_informable(slot) {
                return bad(format!("synonyms for unknown slot {slot}"));
            }
            for canonical in table.values() {
                if self.canonical_value(slot, canonical).is_none() && !same_value(canonical, DONTCARE) {
                    return bad(format!("synonym target {canonical} is not a value of {slot}"));
                }
            }
        }
        if let Some(api) = &self.api {
            for slot in api.mandatory.iter().chain(api.defaults.keys()) {
                if !self.is_informable(slot) {
                    return bad(format!("api parameter {slot} is not informable"));
                }
            }
        }
        Ok(())
    }

    pub fn display_name(&self) -> String {
        self.display_name.clone().unwrap_or_else(|| {
            let mut c = self.name.chars();
            match c.next() {
                Some(f) => f.to_uppercase().collect::<String>() + c.as_str(),
                None => String::new(),
            }
        })
    }

    pub fn is_informable(&self, slot: &str) -> bool {
        self.informable.contains_key(slot)
    }

    pub fn is_requestable(&self, slot: &str) -> bool {
        self.requestable.iter().any(|s| s == slot)
    }

    pub fn informable_slots(&self) -> impl Iterator<Item = &str> {
        self.informable.keys().map(String::as_str)
    }

    /// The ontology spelling of `value` for `slot`, if it is a legal value.
    pub fn canonical_value(&self, slot: &str, value: &str) -> Option<&str> {
        self.informable.get(slot)?.iter().find(|v| same_value(v, value)).map(String::as_str)
    }

    /// Legal value or dontcare.
    pub fn accepts(&self, slot: &str, value: &str) -> bool {
        same_value(value, DONTCARE) || self.canonical_value(slot, value).is_some()
    }

    /// Resolves a surface form through the synonym table, then the value list.
    pub fn resolve_surface(&self, slot: &str, surface: &str) -> Option<String> {
        let key = normalize(surface);
        if let Some(table) = self.synonyms.get(slot) {
            if let Some((_, canonical)) = table.iter().find(|(s, _)| normalize(s) == key) {
                return if same_value(canonical, DONTCARE) {
                    Some(DONTCARE.to_string())
                } else {
                    self.canonical_value(slot, canonical).map(str::to_string)
                };
            }
        }
        self.canonical_value(slot, surface).map(str::to_string)
    }

    /// Informable slots whose legal values are exactly `true`/`false`.
    pub fn is_boolean(&self, slot: &str) -> bool {
        self.informable.get(slot).is_some_and(|values| {
            values.len() == 2
                && values.iter().any(|v| same_value(v, "true"))
                && values.iter().any(|v| same_value(v, "false"))
        })
    }
}
