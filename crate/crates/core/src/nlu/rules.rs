use std::collections::BTreeMap;
use std::ops::Range;
use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{compile, NluError};
use crate::acts::{SysAct, SysActType, UserAct, UserActType};
use crate::domain::{normalize, same_value, Ontology, DONTCARE};

/// One rule as written in a rules file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleSpec {
    pub pattern: String,
    pub act_type: UserActType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot: Option<String>,
    /// Literal value for informs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    /// Named capture group holding the surface form of the value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value_group: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RuleFile {
    #[serde(default)]
    pub rules: Vec<RuleSpec>,
    /// slot -> surface -> canonical, merged over the ontology's table.
    #[serde(default)]
    pub synonyms: BTreeMap<String, BTreeMap<String, String>>,
}

impl RuleFile {
    pub fn from_json(text: &str) -> Result<Self, NluError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, NluError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| NluError::Io { path: path.to_path_buf(), source })?;
        Self::from_json(&text)
    }
}

#[derive(Clone, Debug)]
struct CompiledRule {
    regex: Regex,
    spec: RuleSpec,
}

#[derive(Clone, Debug)]
struct ValueMatcher {
    slot: String,
    canonical: String,
    regex: Regex,
    len: usize,
}

/// Compiled rules of one domain: general rules, then domain rules, then one
/// matcher per (slot, surface form).
#[derive(Clone, Debug)]
pub struct NluRuleSet {
    domain: String,
    rules: Vec<CompiledRule>,
    values: Vec<ValueMatcher>,
    surfaces: BTreeMap<String, BTreeMap<String, String>>,
}

impl NluRuleSet {
    pub fn compile(ontology: &Ontology, general: &RuleFile, domain: &RuleFile) -> Result<Self, NluError> {
        let mut surfaces: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        for (slot, values) in &ontology.informable {
            let table = surfaces.entry(slot.clone()).or_default();
            for v in values {
                table.insert(normalize(v), v.clone());
            }
        }
        for source in [&ontology.synonyms, &general.synonyms, &domain.synonyms] {
            for (slot, table) in source {
                if !ontology.is_informable(slot) {
                    return Err(NluError::InvalidRule {
                        pattern: format!("synonyms for {slot}"),
                        reason: "slot is not informable".into(),
                    });
                }
                for (surface, canonical) in table {
                    let canonical = if same_value(canonical, DONTCARE) {
                        DONTCARE.to_string()
                    } else {
                        ontology.canonical_value(slot, canonical).map(str::to_string).ok_or_else(|| {
                            NluError::InvalidRule {
                                pattern: format!("synonym {surface}"),
                                reason: format!("{canonical:?} is not a value of {slot}"),
                            }
                        })?
                    };
                    surfaces.entry(slot.clone()).or_default().insert(normalize(surface), canonical);
                }
            }
        }

        let mut rules = Vec::new();
        for spec in general.rules.iter().chain(&domain.rules) {
            check_rule(spec, ontology)?;
            rules.push(CompiledRule { regex: compile(&spec.pattern)?, spec: spec.clone() });
        }

        let mut values = Vec::new();
        for (slot, table) in &surfaces {
            for (surface, canonical) in table {
                let pattern = format!(r"(?:^|\b|\s){}(?:$|\b|\s)", regex::escape(surface));
                values.push(ValueMatcher {
                    slot: slot.clone(),
                    canonical: canonical.clone(),
                    regex: compile(&pattern)?,
                    len: surface.chars().count(),
                });
            }
        }
        values.sort_by_key(|v| std::cmp::Reverse(v.len));
        Ok(NluRuleSet { domain: ontology.name.clone(), rules, values, surfaces })
    }

    pub fn from_json(ontology: &Ontology, general: &str, domain: &str) -> Result<Self, NluError> {
        Self::compile(ontology, &RuleFile::from_json(general)?, &RuleFile::from_json(domain)?)
    }

    pub fn domain(&self) -> &str {
        &self.domain
    }

    fn resolve(&self, slot: &str, surface: &str) -> Option<String> {
        self.surfaces.get(slot)?.get(&normalize(surface)).cloned()
    }
}

fn check_rule(spec: &RuleSpec, ontology: &Ontology) -> Result<(), NluError> {
    let bad = |reason: String| Err(NluError::InvalidRule { pattern: spec.pattern.clone(), reason });
    match spec.act_type {
        UserActType::Request => match &spec.slot {
            Some(slot) if ontology.is_requestable(slot) => {}
            Some(slot) => return bad(format!("{slot} is not requestable")),
            None => return bad("request rules need a slot".into()),
        },
        UserActType::Inform => {
            if spec.value.is_some() == spec.value_group.is_some() {
                return bad("inform rules need exactly one of value and value_group".into());
            }
            match &spec.slot {
                Some(slot) if !ontology.is_informable(slot) => return bad(format!("{slot} is not informable")),
                Some(slot) => {
                    if let Some(v) = &spec.value {
                        if !ontology.accepts(slot, v) {
                            return bad(format!("{v:?} is not a value of {slot}"));
                        }
                    }
                }
                None => {
                    if !spec.value.as_deref().is_some_and(|v| same_value(v, DONTCARE)) {
                        return bad("slotless informs may only carry dontcare".into());
                    }
                }
            }
        }
        _ => {}
    }
    Ok(())
}

fn overlaps(a: &Range<usize>, b: &Range<usize>) -> bool {
    a.start < b.end && b.start < a.end
}

/// Parses an utterance without dialog context. Never returns an empty list.
pub fn parse(utterance: &str, ontology: &Ontology, rules: &NluRuleSet) -> Vec<UserAct> {
    parse_in_context(utterance, ontology, rules, None)
}

/// Parses an utterance, resolving answers to the previous system act.
pub fn parse_in_context(
    utterance: &str,
    ontology: &Ontology,
    rules: &NluRuleSet,
    last_sys_act: Option<&SysAct>,
) -> Vec<UserAct> {
    let text = utterance.trim();
    let mut found: Vec<(usize, UserAct)> = Vec::new();
    let mut claimed: Vec<Range<usize>> = Vec::new();
    let mut open_dontcare = false;

    for rule in &rules.rules {
        let Some(caps) = rule.regex.captures(text) else { continue };
        let span = caps.get(0).map_or(0..0, |m| m.range());
        let spec = &rule.spec;
        let act = match spec.act_type {
            UserActType::Inform => {
                let Some(slot) = &spec.slot else {
                    open_dontcare = true;
                    claimed.push(span);
                    continue;
                };
                let value = match (&spec.value, &spec.value_group) {
                    (Some(v), _) if same_value(v, DONTCARE) => Some(DONTCARE.to_string()),
                    (Some(v), _) => ontology.canonical_value(slot, v).map(str::to_string),
                    (None, Some(group)) => caps.name(group).and_then(|m| rules.resolve(slot, m.as_str())),
                    (None, None) => None,
                };
                match value {
                    Some(v) => UserAct::inform(slot.clone(), v),
                    None => continue,
                }
            }
            UserActType::Request => UserAct::request(spec.slot.clone().unwrap_or_default()),
            other => UserAct::new(other),
        };
        if act.slot.is_some() {
            claimed.push(span.clone());
        }
        found.push((span.start, act));
    }

    let mut hits: Vec<(Range<usize>, &ValueMatcher)> = Vec::new();
    for m in &rules.values {
        for hit in m.regex.find_iter(text) {
            hits.push((trimmed(text, hit.range()), m));
        }
    }
    hits.sort_by(|(ra, ma), (rb, mb)| mb.len.cmp(&ma.len).then(ra.start.cmp(&rb.start)));
    for (range, m) in hits {
        if claimed.iter().any(|c| overlaps(c, &range)) {
            continue;
        }
        claimed.push(range.clone());
        found.push((range.start, UserAct::inform(m.slot.clone(), m.canonical.clone())));
    }

    found.sort_by_key(|(pos, _)| *pos);
    let mut acts: Vec<UserAct> = Vec::new();
    for (_, act) in found {
        if !acts.contains(&act) {
            acts.push(act);
        }
    }

    if let Some(sys) = last_sys_act {
        resolve_context(&mut acts, open_dontcare, ontology, sys);
    }
    if acts.is_empty() {
        acts.push(UserAct::new(UserActType::Bad));
    }
    acts
}

fn trimmed(text: &str, range: Range<usize>) -> Range<usize> {
    let s = &text[range.clone()];
    let lead = s.len() - s.trim_start().len();
    let tail = s.len() - s.trim_end().len();
    range.start + lead..range.end - tail
}

fn resolve_context(acts: &mut Vec<UserAct>, open_dontcare: bool, ontology: &Ontology, sys: &SysAct) {
    let informed = |acts: &[UserAct], slot: &str| {
        acts.iter().any(|a| a.act_type == UserActType::Inform && a.slot.as_deref() == Some(slot))
    };
    let asked = match sys.act_type {
        SysActType::Request | SysActType::Confirm | SysActType::Select => {
            sys.only_slot().filter(|s| ontology.is_informable(s)).map(str::to_string)
        }
        _ => None,
    };
    let Some(slot) = asked else { return };

    if open_dontcare && !informed(acts, &slot) {
        acts.push(UserAct::inform(slot.clone(), DONTCARE));
    }
    if informed(acts, &slot) {
        return;
    }
    let answer = |yes: bool| -> Option<String> {
        match sys.act_type {
            SysActType::Request if ontology.is_boolean(&slot) => {
                ontology.canonical_value(&slot, if yes { "true" } else { "false" }).map(str::to_string)
            }
            SysActType::Confirm if yes => sys.value(&slot).map(str::to_string),
            _ => None,
        }
    };
    for act in acts.iter_mut() {
        let yes = match act.act_type {
            UserActType::Affirm => true,
            UserActType::Deny => false,
            _ => continue,
        };
        if let Some(v) = answer(yes) {
            *act = UserAct::inform(slot.clone(), v);
            return;
        }
    }
}
