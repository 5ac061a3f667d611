use std::path::Path;

use regex::Regex;
use serde::Deserialize;

use super::{compile, NluError};
use crate::domain::{DomainError, TripleStore};

/// A factual question recognized in an utterance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KbQuestion {
    pub subject: String,
    pub relation: String,
    answer: String,
}

impl KbQuestion {
    /// Looks the question up and renders the answer sentence.
    pub fn answer(&self, store: &TripleStore) -> Result<String, DomainError> {
        let object = store.kb_answer(&self.subject, &self.relation)?;
        Ok(self.answer.replace("{subject}", &self.subject).replace("{object}", object))
    }
}

#[derive(Deserialize)]
struct QuestionSpec {
    pattern: String,
    relation: String,
    answer: String,
}

#[derive(Deserialize)]
struct QuestionFile {
    rules: Vec<QuestionSpec>,
}

/// Patterns with a `subject` capture group mapping questions to relations.
#[derive(Clone, Debug, Default)]
pub struct KbQuestionRules {
    rules: Vec<(Regex, String, String)>,
}

impl KbQuestionRules {
    pub fn from_json(text: &str) -> Result<Self, NluError> {
        let file: QuestionFile = serde_json::from_str(text)?;
        let rules = file
            .rules
            .into_iter()
            .map(|q| {
                let regex = compile(&q.pattern)?;
                if !regex.capture_names().any(|n| n == Some("subject")) {
                    return Err(NluError::InvalidRule {
                        pattern: q.pattern,
                        reason: "missing subject group".into(),
                    });
                }
                Ok((regex, q.relation, q.answer))
            })
            .collect::<Result<_, _>>()?;
        Ok(KbQuestionRules { rules })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, NluError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| NluError::Io { path: path.to_path_buf(), source })?;
        Self::from_json(&text)
    }

    pub fn recognize(&self, utterance: &str) -> Option<KbQuestion> {
        let text = utterance.trim().trim_end_matches(['?', '.', '!']);
        self.rules.iter().find_map(|(regex, relation, answer)| {
            let caps = regex.captures(text)?;
            let subject = caps.name("subject")?.as_str().trim().to_string();
            Some(KbQuestion { subject, relation: relation.clone(), answer: answer.clone() })
        })
    }
}
