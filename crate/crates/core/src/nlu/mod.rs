//! Rule-based language understanding and keyword domain tracking.
//!
//! [`parse`] maps an utterance to user acts for one domain. Slot values are
//! found by explicit regular-expression rules and by matching every legal
//! value and synonym of the domain's informable slots; [`parse_in_context`]
//! additionally resolves short answers ("yes", "I don't care") against the
//! previous system act.

mod kb;
mod rules;
mod tracker;

use std::path::PathBuf;

use thiserror::Error;

pub use kb::{KbQuestion, KbQuestionRules};
pub use rules::{parse, parse_in_context, NluRuleSet, RuleFile, RuleSpec};
pub use tracker::{track_domain, KeywordTracker};

#[derive(Debug, Error)]
pub enum NluError {
    #[error("rule pattern {pattern:?} does not compile: {source}")]
    Pattern { pattern: String, source: regex::Error },
    #[error("invalid rule {pattern:?}: {reason}")]
    InvalidRule { pattern: String, reason: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn compile(pattern: &str) -> Result<regex::Regex, NluError> {
    regex::RegexBuilder::new(pattern)
        .case_insensitive(true)
        .build()
        .map_err(|source| NluError::Pattern { pattern: pattern.to_string(), source })
}
