use regex::Regex;

use super::compile;
use crate::acts::UserAct;
use crate::domain::Ontology;

/// Keyword-based domain tracker. The domain whose keyword occurs last in
/// the utterance becomes active; utterances without keywords keep the
/// current domain.
#[derive(Clone, Debug)]
pub struct KeywordTracker {
    domains: Vec<(String, Regex)>,
}

impl KeywordTracker {
    pub fn new<'a>(domains: impl IntoIterator<Item = &'a Ontology>) -> Self {
        let domains = domains
            .into_iter()
            .map(|o| {
                let mut keywords: Vec<String> = o.keywords.iter().map(|k| regex::escape(k.trim())).collect();
                keywords.sort_by_key(|k| std::cmp::Reverse(k.len()));
                let pattern = format!(r"\b(?:{})\b", keywords.join("|"));
                let regex = compile(&pattern).expect("escaped keywords always compile");
                (o.name.clone(), regex)
            })
            .collect();
        KeywordTracker { domains }
    }

    pub fn domain_names(&self) -> impl Iterator<Item = &str> {
        self.domains.iter().map(|(n, _)| n.as_str())
    }

    /// Returns the active domain and, when it changed, a `SelectDomain` act.
    pub fn track(&self, utterance: &str, current: Option<&str>) -> (Option<String>, Option<UserAct>) {
        let mut best: Option<(usize, &str)> = None;
        for (name, regex) in &self.domains {
            if let Some(pos) = regex.find_iter(utterance).map(|m| m.start()).last() {
                if best.is_none_or(|(p, _)| pos >= p) {
                    best = Some((pos, name));
                }
            }
        }
        match best {
            Some((_, name)) if current != Some(name) => {
                (Some(name.to_string()), Some(UserAct::select_domain(name)))
            }
            _ => (current.map(str::to_string), None),
        }
    }
}

/// One-shot form of [`KeywordTracker::track`].
pub fn track_domain(
    utterance: &str,
    current: Option<&str>,
    domains: &[Ontology],
) -> (Option<String>, Option<UserAct>) {
    KeywordTracker::new(domains).track(utterance, current)
}
