use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::acts::{SysAct, SysActType};
use crate::domain::same_value;

/// A system act with its values stripped: the act type and the sorted slot
/// names. This is what templates are indexed by.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Signature {
    pub act_type: SysActType,
    pub slots: Vec<String>,
}

impl Signature {
    pub fn new<S: Into<String>>(act_type: SysActType, slots: impl IntoIterator<Item = S>) -> Self {
        let mut slots: Vec<String> = slots.into_iter().map(Into::into).collect();
        slots.sort();
        slots.dedup();
        Signature { act_type, slots }
    }

    pub fn of(act: &SysAct) -> Self {
        Signature { act_type: act.act_type, slots: act.slot_values.keys().cloned().collect() }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.act_type, self.slots.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Arg {
    Slot(String),
    Literal(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Piece {
    Text(String),
    Slot(String),
    Call { name: String, args: Vec<Arg> },
}

/// One utterance pattern. `pins` restricts the template to acts carrying
/// those exact slot values, so one signature can have value-specific
/// phrasings next to a general one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Template {
    pub signature: Signature,
    pub pins: BTreeMap<String, String>,
    pub(crate) pieces: Vec<Piece>,
    pub source: String,
}

pub(crate) const BUILTINS: &[(&str, usize)] = &[("article", 1), ("plural", 3), ("capitalize", 1)];

impl Template {
    pub fn applies_to(&self, act: &SysAct) -> bool {
        self.pins.iter().all(|(slot, want)| act.value(slot).is_some_and(|v| same_value(v, want)))
    }

    /// Parses `act_type(slot,slot=value,...) :: pattern`.
    pub(crate) fn parse_entry(line: &str) -> Result<Template, String> {
        let (head, pattern) = line.split_once("::").ok_or("expected `::` between act and pattern")?;
        let head = head.trim();
        let open = head.find('(').ok_or("expected `(` after the act type")?;
        if !head.ends_with(')') {
            return Err("expected `)` closing the slot list".into());
        }
        let act_type: SysActType = head[..open].trim().parse().map_err(|e| format!("{e}"))?;
        let mut slots = Vec::new();
        let mut pins = BTreeMap::new();
        for part in head[open + 1..head.len() - 1].split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part.split_once('=') {
                Some((slot, value)) => {
                    let slot = slot.trim().to_string();
                    pins.insert(slot.clone(), unquote(value.trim()).to_string());
                    slots.push(slot);
                }
                None => slots.push(part.to_string()),
            }
        }
        let signature = Signature::new(act_type, slots);
        let pieces = parse_pattern(pattern.trim())?;
        for piece in &pieces {
            let used: Vec<&str> = match piece {
                Piece::Slot(s) => vec![s.as_str()],
                Piece::Call { args, .. } => args
                    .iter()
                    .filter_map(|a| match a {
                        Arg::Slot(s) => Some(s.as_str()),
                        Arg::Literal(_) => None,
                    })
                    .collect(),
                Piece::Text(_) => vec![],
            };
            if let Some(s) = used.iter().find(|s| !signature.slots.iter().any(|x| x == *s)) {
                return Err(format!("placeholder {s} is not in the signature {signature}"));
            }
        }
        Ok(Template { signature, pins, pieces, source: line.trim().to_string() })
    }
}

fn unquote(s: &str) -> &str {
    s.strip_prefix('"').and_then(|r| r.strip_suffix('"')).unwrap_or(s)
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_pattern(pattern: &str) -> Result<Vec<Piece>, String> {
    let mut pieces = Vec::new();
    let mut rest = pattern;
    while let Some(open) = rest.find('{') {
        if open > 0 {
            pieces.push(Piece::Text(rest[..open].to_string()));
        }
        let close = rest[open..].find('}').ok_or("unclosed `{`")? + open;
        let inner = rest[open + 1..close].trim();
        pieces.push(parse_placeholder(inner)?);
        rest = &rest[close + 1..];
    }
    if rest.contains('}') {
        return Err("unmatched `}`".into());
    }
    if !rest.is_empty() {
        pieces.push(Piece::Text(rest.to_string()));
    }
    Ok(pieces)
}

fn parse_placeholder(inner: &str) -> Result<Piece, String> {
    let Some(open) = inner.find('(') else {
        return if is_identifier(inner) {
            Ok(Piece::Slot(inner.to_string()))
        } else {
            Err(format!("bad placeholder {{{inner}}}"))
        };
    };
    let name = inner[..open].trim();
    let body = inner[open + 1..].strip_suffix(')').ok_or_else(|| format!("bad call {{{inner}}}"))?;
    let args: Vec<Arg> = body
        .split(',')
        .map(str::trim)
        .filter(|a| !a.is_empty())
        .map(|a| {
            if a.starts_with('"') {
                if a.len() >= 2 && a.ends_with('"') {
                    Ok(Arg::Literal(a[1..a.len() - 1].to_string()))
                } else {
                    Err(format!("unterminated literal in {{{inner}}}"))
                }
            } else if is_identifier(a) {
                Ok(Arg::Slot(a.to_string()))
            } else {
                Err(format!("bad argument {a:?} in {{{inner}}}"))
            }
        })
        .collect::<Result<_, _>>()?;
    match BUILTINS.iter().find(|(n, _)| *n == name) {
        Some((_, arity)) if *arity == args.len() => Ok(Piece::Call { name: name.to_string(), args }),
        Some((_, arity)) => Err(format!("{name} takes {arity} arguments")),
        None => Err(format!("unknown function {name}")),
    }
}

/// Indefinite article for a noun phrase.
pub fn article(value: &str) -> &'static str {
    let lower = value.trim().to_lowercase();
    let vowel_sound = lower.starts_with(['a', 'e', 'i', 'o'])
        || (lower.starts_with('u') && !lower.starts_with("uni") && !lower.starts_with("use"))
        || lower.starts_with("hour")
        || lower.starts_with("honest");
    if vowel_sound {
        "an"
    } else {
        "a"
    }
}

pub fn capitalize(value: &str) -> String {
    let mut chars = value.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// `singular` when `count` parses as exactly one, `plural` otherwise.
pub fn plural<'a>(count: &str, singular: &'a str, plural: &'a str) -> &'a str {
    match count.trim().parse::<f64>() {
        Ok(1.0) => singular,
        _ => plural,
    }
}
