//! Semantic dialog acts exchanged between understanding, policies and
//! generation.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
#[error("unknown {kind} {value:?}")]
pub struct ParseLabelError {
    pub kind: &'static str,
    pub value: String,
}

macro_rules! labelled_enum {
    ($(#[$meta:meta])* $name:ident, $kind:literal { $($variant:ident => $label:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, ::serde::Serialize, ::serde::Deserialize)]
        pub enum $name {
            $(#[serde(rename = $label)] $variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn label(self) -> &'static str {
                match self {
                    $($name::$variant => $label),+
                }
            }
        }

        impl ::std::fmt::Display for $name {
            fn fmt(&self, f: &mut ::std::fmt::Formatter<'_>) -> ::std::fmt::Result {
                f.write_str(self.label())
            }
        }

        impl ::std::str::FromStr for $name {
            type Err = $crate::acts::ParseLabelError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                let key = s.trim();
                $name::ALL
                    .iter()
                    .copied()
                    .find(|v| v.label().eq_ignore_ascii_case(key))
                    .ok_or_else(|| $crate::acts::ParseLabelError { kind: $kind, value: s.to_string() })
            }
        }
    };
}

pub(crate) use labelled_enum;

labelled_enum!(UserActType, "user act type" {
    Inform => "inform",
    Request => "request",
    Hello => "hello",
    Bye => "bye",
    Thanks => "thanks",
    Affirm => "affirm",
    Deny => "deny",
    RequestAlternatives => "request_alternatives",
    Bad => "bad",
    SelectDomain => "select_domain",
});

labelled_enum!(SysActType, "system act type" {
    Welcome => "welcome",
    Request => "request",
    InformByName => "inform_by_name",
    InformByAlternatives => "inform_by_alternatives",
    Select => "select",
    Confirm => "confirm",
    RequestMore => "request_more",
    Bad => "bad",
    Bye => "bye",
});

labelled_enum!(
    /// Emotion the system should express in its next utterance.
    SystemEmotion, "system emotion" {
    Neutral => "neutral",
    Compassionate => "compassionate",
    Enthusiastic => "enthusiastic",
});

#[allow(clippy::derivable_impls)]
impl Default for SystemEmotion {
    fn default() -> Self {
        SystemEmotion::Neutral
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserAct {
    pub act_type: UserActType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    #[serde(default = "full_score")]
    pub score: f64,
}

fn full_score() -> f64 {
    1.0
}

impl UserAct {
    pub fn new(act_type: UserActType) -> Self {
        UserAct { act_type, slot: None, value: None, score: 1.0 }
    }

    pub fn inform(slot: impl Into<String>, value: impl Into<String>) -> Self {
        UserAct { slot: Some(slot.into()), value: Some(value.into()), ..Self::new(UserActType::Inform) }
    }

    pub fn request(slot: impl Into<String>) -> Self {
        UserAct { slot: Some(slot.into()), ..Self::new(UserActType::Request) }
    }

    pub fn select_domain(domain: impl Into<String>) -> Self {
        UserAct { value: Some(domain.into()), ..Self::new(UserActType::SelectDomain) }
    }

    /// Checks the slot/value shape required by the act type.
    pub fn is_well_formed(&self) -> bool {
        let score_ok = (0.0..=1.0).contains(&self.score);
        score_ok
            && match self.act_type {
                UserActType::Inform => self.slot.is_some() && self.value.is_some(),
                UserActType::Request => self.slot.is_some() && self.value.is_none(),
                _ => true,
            }
    }
}

impl fmt::Display for UserAct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.act_type)?;
        match (&self.slot, &self.value) {
            (Some(s), Some(v)) => write!(f, "{s}={v}")?,
            (Some(s), None) => write!(f, "{s}")?,
            (None, Some(v)) => write!(f, "{v}")?,
            (None, None) => {}
        }
        f.write_str(")")
    }
}

/// A system act. Slots without a value (the slot asked for by `Request`,
/// for instance) map to `None`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SysAct {
    pub act_type: SysActType,
    #[serde(default)]
    pub slot_values: BTreeMap<String, Option<String>>,
}

impl SysAct {
    pub fn new(act_type: SysActType) -> Self {
        SysAct { act_type, slot_values: BTreeMap::new() }
    }

    pub fn request(slot: impl Into<String>) -> Self {
        Self::new(SysActType::Request).with_slot(slot)
    }

    pub fn with_slot(mut self, slot: impl Into<String>) -> Self {
        self.slot_values.insert(slot.into(), None);
        self
    }

    pub fn with(mut self, slot: impl Into<String>, value: impl Into<String>) -> Self {
        self.slot_values.insert(slot.into(), Some(value.into()));
        self
    }

    pub fn value(&self, slot: &str) -> Option<&str> {
        self.slot_values.get(slot).and_then(|v| v.as_deref())
    }

    pub fn slots(&self) -> impl Iterator<Item = &str> {
        self.slot_values.keys().map(String::as_str)
    }

    /// The single slot of a one-slot act such as `Request`.
    pub fn only_slot(&self) -> Option<&str> {
        if self.slot_values.len() == 1 {
            self.slots().next()
        } else {
            None
        }
    }
}

impl fmt::Display for SysAct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.act_type)?;
        for (i, (slot, value)) in self.slot_values.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            match value {
                Some(v) => write!(f, "{slot}={v}")?,
                None => f.write_str(slot)?,
            }
        }
        f.write_str(")")
    }
}
