use std::collections::{BTreeMap, HashSet};
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;
use serde_json::Value;

use super::{normalize, read_file, same_value, scalar_to_string, DomainError, Ontology, DONTCARE};

pub type Row = BTreeMap<String, String>;

/// Entity rows of one domain. Every row carries every informable and
/// requestable slot, and primary keys are unique.
#[derive(Clone, Debug)]
pub struct EntityDatabase {
    ontology: Arc<Ontology>,
    rows: Vec<Row>,
}

#[derive(Deserialize)]
struct DatabaseFile {
    rows: Vec<BTreeMap<String, Value>>,
}

impl EntityDatabase {
    pub fn new(ontology: Arc<Ontology>, rows: Vec<Row>) -> Result<Self, DomainError> {
        let db = EntityDatabase { ontology, rows };
        db.validate()?;
        Ok(db)
    }

    pub fn from_json(ontology: Arc<Ontology>, text: &str) -> Result<Self, DomainError> {
        let file: DatabaseFile = serde_json::from_str(text)?;
        let rows = file
            .rows
            .into_iter()
            .enumerate()
            .map(|(i, raw)| {
                raw.into_iter()
                    .map(|(slot, v)| {
                        scalar_to_string(&v)
                            .map(|s| (slot.clone(), s))
                            .ok_or_else(|| DomainError::InvalidData(format!("row {i}: {slot} is not a scalar")))
                    })
                    .collect::<Result<Row, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(ontology, rows)
    }

    pub fn load(ontology: Arc<Ontology>, path: impl AsRef<Path>) -> Result<Self, DomainError> {
        Self::from_json(ontology, &read_file(path.as_ref())?)
    }

    fn validate(&self) -> Result<(), DomainError> {
        let o = &self.ontology;
        let mut keys = HashSet::new();
        for (i, row) in self.rows.iter().enumerate() {
            let slots = o.informable_slots().chain(o.requestable.iter().map(String::as_str));
            for slot in slots {
                if !row.contains_key(slot) {
                    return Err(DomainError::InvalidData(format!("row {i} lacks slot {slot}")));
                }
            }
            for slot in o.informable_slots() {
                if o.canonical_value(slot, &row[slot]).is_none() {
                    return Err(DomainError::InvalidData(format!(
                        "row {i}: {:?} is not a legal {slot}",
                        row[slot]
                    )));
                }
            }
            if !keys.insert(normalize(&row[&o.primary_key])) {
                return Err(DomainError::InvalidData(format!(
                    "duplicate primary key {:?}",
                    row[&o.primary_key]
                )));
            }
        }
        Ok(())
    }

    pub fn ontology(&self) -> &Ontology {
        &self.ontology
    }

    pub fn ontology_arc(&self) -> Arc<Ontology> {
        Arc::clone(&self.ontology)
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn primary_key_of<'a>(&self, row: &'a Row) -> &'a str {
        &row[&self.ontology.primary_key]
    }

    /// Rows matching every constraint; `dontcare` matches anything.
    pub fn query_entities(&self, constraints: &BTreeMap<String, String>) -> Result<Vec<&Row>, DomainError> {
        if let Some(slot) = constraints.keys().find(|s| !self.ontology.is_informable(s)) {
            return Err(DomainError::UnknownSlot(slot.clone()));
        }
        Ok(self
            .rows
            .iter()
            .filter(|row| {
                constraints
                    .iter()
                    .all(|(slot, want)| same_value(want, DONTCARE) || same_value(&row[slot], want))
            })
            .collect())
    }

    pub fn find(&self, primary_key_value: &str) -> Option<&Row> {
        let pk = &self.ontology.primary_key;
        self.rows.iter().find(|r| same_value(&r[pk], primary_key_value))
    }

    pub fn lookup_entity(&self, primary_key_value: &str, requested: &[&str]) -> Result<Row, DomainError> {
        if let Some(slot) = requested.iter().find(|s| !self.ontology.is_requestable(s)) {
            return Err(DomainError::UnknownSlot(slot.to_string()));
        }
        let row = self
            .find(primary_key_value)
            .ok_or_else(|| DomainError::NoSuchEntity(primary_key_value.to_string()))?;
        Ok(requested.iter().map(|s| (s.to_string(), row[*s].clone())).collect())
    }
}
