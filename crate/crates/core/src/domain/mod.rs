//! Domain definitions and the external information sources a domain can use:
//! an entity database, a deterministic API fixture, and a triple store.
//!
//! All stores load from JSON and are immutable afterwards. Value comparison
//! is case-insensitive and whitespace-trimmed everywhere; [`DONTCARE`]
//! matches any value.

mod api;
mod database;
mod kb;
mod ontology;

use std::path::PathBuf;

use thiserror::Error;

pub use api::ApiFixture;
pub use database::{EntityDatabase, Row};
pub use kb::{KnowledgeTriple, TripleStore};
pub use ontology::{ApiSpec, Ontology};

/// Reserved value meaning "any value is acceptable".
pub const DONTCARE: &str = "dontcare";

/// Normalized form used for all value comparisons.
pub fn normalize(value: &str) -> String {
    value.trim().to_lowercase()
}

pub fn same_value(a: &str, b: &str) -> bool {
    a.trim().eq_ignore_ascii_case(b.trim()) || normalize(a) == normalize(b)
}

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("unknown slot {0:?}")]
    UnknownSlot(String),
    #[error("no entity named {0:?}")]
    NoSuchEntity(String),
    #[error("missing parameters {0:?}")]
    MissingParameter(Vec<String>),
    #[error("no fixture entry for {0:?}")]
    NoFixtureEntry(Vec<(String, String)>),
    #[error("no triple ({subject:?}, {relation:?})")]
    NoTriple { subject: String, relation: String },
    #[error("invalid ontology: {0}")]
    InvalidOntology(String),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn read_file(path: &std::path::Path) -> Result<String, DomainError> {
    std::fs::read_to_string(path).map_err(|source| DomainError::Io { path: path.to_path_buf(), source })
}

/// Renders a JSON scalar as a slot value string.
pub(crate) fn scalar_to_string(v: &serde_json::Value) -> Option<String> {
    match v {
        serde_json::Value::String(s) => Some(s.clone()),
        serde_json::Value::Bool(b) => Some(b.to_string()),
        serde_json::Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}
