//! Template-based generation.
//!
//! A template file holds one entry per line,
//! `act_type(slot,slot=value,...) :: pattern`, grouped under
//! `[emotion=Neutral]`-style section headers (entries before the first
//! header belong to the neutral set) with `#` comments. Patterns substitute
//! `{slot}` with the act's value and `{fn(arg,...)}` with one of the
//! builtins `article`, `plural` and `capitalize`; arguments are slot names
//! or double-quoted literals.
//!
//! Lookup prefers the template of the requested emotion whose pinned values
//! match most specifically, and falls back to the neutral set.

mod template;

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use crate::acts::{SysAct, SystemEmotion};
pub use template::{article, capitalize, plural, Signature, Template};
use template::{Arg, Piece};

#[derive(Debug, Error)]
pub enum NlgError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("duplicate template for {signature} in the {emotion} set")]
    DuplicateSignature { emotion: SystemEmotion, signature: String },
    #[error("neutral templates do not cover {}", .0.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", "))]
    Coverage(Vec<Signature>),
    #[error("no template for {0}")]
    NoTemplate(Signature),
    #[error("act {act} has no value for slot {slot}")]
    MissingSlotValue { act: String, slot: String },
    #[error("{path}: {source}")]
    Io { path: std::path::PathBuf, source: std::io::Error },
}

/// The templates of one system emotion.
#[derive(Clone, Debug, Default)]
pub struct TemplateSet {
    pub emotion: SystemEmotion,
    templates: Vec<Template>,
}

impl TemplateSet {
    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    /// Most specific template for the act: same signature, all pins
    /// matching, most pins first.
    pub fn find(&self, act: &SysAct) -> Option<&Template> {
        let signature = Signature::of(act);
        self.templates
            .iter()
            .filter(|t| t.signature == signature && t.applies_to(act))
            .max_by_key(|t| t.pins.len())
    }

    /// Signatures with an unpinned template, i.e. usable for every act of
    /// that signature.
    pub fn covers(&self, signature: &Signature) -> bool {
        self.templates.iter().any(|t| &t.signature == signature && t.pins.is_empty())
    }
}

/// Template sets keyed by system emotion.
#[derive(Clone, Debug, Default)]
pub struct TemplateCatalog {
    sets: BTreeMap<SystemEmotion, TemplateSet>,
}

impl TemplateCatalog {
    pub fn parse(text: &str) -> Result<Self, NlgError> {
        let mut sets: BTreeMap<SystemEmotion, TemplateSet> = BTreeMap::new();
        let mut emotion = SystemEmotion::Neutral;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(header) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let value = header
                    .trim()
                    .strip_prefix("emotion")
                    .and_then(|r| r.trim_start().strip_prefix('='))
                    .ok_or_else(|| NlgError::Parse { line: line_no, reason: format!("bad section header {line}") })?;
                emotion = value
                    .parse()
                    .map_err(|e| NlgError::Parse { line: line_no, reason: format!("{e}") })?;
                continue;
            }
            let template = Template::parse_entry(line).map_err(|reason| NlgError::Parse { line: line_no, reason })?;
            let set = sets.entry(emotion).or_insert_with(|| TemplateSet { emotion, ..Default::default() });
            if set.templates.iter().any(|t| t.signature == template.signature && t.pins == template.pins) {
                return Err(NlgError::DuplicateSignature { emotion, signature: template.signature.to_string() });
            }
            set.templates.push(template);
        }
        sets.entry(SystemEmotion::Neutral)
            .or_insert_with(|| TemplateSet { emotion: SystemEmotion::Neutral, ..Default::default() });
        Ok(TemplateCatalog { sets })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, NlgError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| NlgError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    pub fn set(&self, emotion: SystemEmotion) -> Option<&TemplateSet> {
        self.sets.get(&emotion)
    }

    pub fn neutral(&self) -> &TemplateSet {
        &self.sets[&SystemEmotion::Neutral]
    }

    pub fn emotions(&self) -> impl Iterator<Item = SystemEmotion> + '_ {
        self.sets.keys().copied()
    }

    /// Fails with every signature the neutral set cannot realize.
    pub fn check_coverage<'a>(&self, signatures: impl IntoIterator<Item = &'a Signature>) -> Result<(), NlgError> {
        let neutral = self.neutral();
        let mut missing: Vec<Signature> = signatures.into_iter().filter(|s| !neutral.covers(s)).cloned().collect();
        if missing.is_empty() {
            Ok(())
        } else {
            missing.sort();
            missing.dedup();
            Err(NlgError::Coverage(missing))
        }
    }

    /// The template `generate` would use.
    pub fn select(&self, act: &SysAct, emotion: SystemEmotion) -> Option<&Template> {
        self.sets
            .get(&emotion)
            .and_then(|set| set.find(act))
            .or_else(|| self.neutral().find(act))
    }
}

/// Reads, parses and coverage-checks a template file.
pub fn load_templates(path: impl AsRef<Path>, signatures: &[Signature]) -> Result<TemplateCatalog, NlgError> {
    let catalog = TemplateCatalog::load(path)?;
    catalog.check_coverage(signatures)?;
    Ok(catalog)
}

/// Realizes a system act, optionally prefixed by a backchannel.
pub fn generate(
    act: &SysAct,
    emotion: SystemEmotion,
    backchannel: Option<&str>,
    catalog: &TemplateCatalog,
) -> Result<String, NlgError> {
    let template = catalog.select(act, emotion).ok_or_else(|| NlgError::NoTemplate(Signature::of(act)))?;
    let value = |slot: &str| {
        act.value(slot).ok_or_else(|| NlgError::MissingSlotValue { act: act.to_string(), slot: slot.to_string() })
    };
    let mut out = String::new();
    if let Some(bc) = backchannel.map(str::trim).filter(|b| !b.is_empty()) {
        out.push_str(bc);
        out.push_str(", ");
    }
    for piece in &template.pieces {
        match piece {
            Piece::Text(t) => out.push_str(t),
            Piece::Slot(s) => out.push_str(value(s)?),
            Piece::Call { name, args } => {
                let args = args
                    .iter()
                    .map(|a| match a {
                        Arg::Slot(s) => value(s),
                        Arg::Literal(l) => Ok(l.as_str()),
                    })
                    .collect::<Result<Vec<&str>, _>>()?;
                match name.as_str() {
                    "article" => out.push_str(article(args[0])),
                    "plural" => out.push_str(plural(args[0], args[1], args[2])),
                    "capitalize" => out.push_str(&capitalize(args[0])),
                    other => unreachable!("builtin {other} accepted at parse time"),
                }
            }
        }
    }
    Ok(out)
}
