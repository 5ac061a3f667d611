use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{normalize, read_file, DomainError};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgeTriple {
    pub subject: String,
    pub relation: String,
    pub object: String,
}

/// Local (subject, relation) -> object store for factual questions.
#[derive(Clone, Debug, Default)]
pub struct TripleStore {
    index: HashMap<(String, String), KnowledgeTriple>,
}

#[derive(Deserialize)]
struct TripleFile {
    triples: Vec<(String, String, String)>,
}

impl TripleStore {
    pub fn new(triples: impl IntoIterator<Item = KnowledgeTriple>) -> Result<Self, DomainError> {
        let mut index = HashMap::new();
        for t in triples {
            let key = (normalize(&t.subject), normalize(&t.relation));
            if index.contains_key(&key) {
                return Err(DomainError::InvalidData(format!(
                    "duplicate triple for ({}, {})",
                    t.subject, t.relation
                )));
            }
            index.insert(key, t);
        }
        Ok(TripleStore { index })
    }

    pub fn from_json(text: &str) -> Result<Self, DomainError> {
        let file: TripleFile = serde_json::from_str(text)?;
        Self::new(
            file.triples
                .into_iter()
                .map(|(subject, relation, object)| KnowledgeTriple { subject, relation, object }),
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DomainError> {
        Self::from_json(&read_file(path.as_ref())?)
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn kb_answer(&self, subject: &str, relation: &str) -> Result<&str, DomainError> {
        self.index
            .get(&(normalize(subject), normalize(relation)))
            .map(|t| t.object.as_str())
            .ok_or_else(|| DomainError::NoTriple {
                subject: subject.to_string(),
                relation: relation.to_string(),
            })
    }
}
