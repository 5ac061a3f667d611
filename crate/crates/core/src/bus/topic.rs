use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::TopicError;

/// Broadcast by the bus once every service acknowledged start.
pub const DIALOG_START: &str = "dialog_start";
/// Publishing on this topic ends the dialog after the current cycle.
pub const DIALOG_END: &str = "dialog_end";
/// Broadcast by the bus while the dialog is ending.
pub const DIALOG_EXIT: &str = "dialog_exit";

/// A topic name `base` or `base/domain`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TopicName {
    base: String,
    domain: Option<String>,
}

fn check_part(part: &str) -> Result<(), TopicError> {
    if part.contains('/') {
        return Err(TopicError::Separator(part.to_string()));
    }
    Ok(())
}

impl TopicName {
    pub fn new(base: impl Into<String>) -> Result<Self, TopicError> {
        let base = base.into();
        if base.is_empty() {
            return Err(TopicError::EmptyBase);
        }
        check_part(&base)?;
        Ok(TopicName { base, domain: None })
    }

    pub fn with_domain(
        base: impl Into<String>,
        domain: impl Into<String>,
    ) -> Result<Self, TopicError> {
        let mut topic = TopicName::new(base)?;
        let domain = domain.into();
        if domain.is_empty() {
            return Err(TopicError::EmptyDomain);
        }
        check_part(&domain)?;
        topic.domain = Some(domain);
        Ok(topic)
    }

    /// Parses the rendered form `base` or `base/domain`.
    pub fn parse(rendered: &str) -> Result<Self, TopicError> {
        match rendered.split_once('/') {
            None => TopicName::new(rendered),
            Some((base, domain)) => TopicName::with_domain(base, domain),
        }
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    pub fn domain(&self) -> Option<&str> {
        self.domain.as_deref()
    }

    /// The same base without a domain suffix.
    pub fn base_topic(&self) -> TopicName {
        TopicName { base: self.base.clone(), domain: None }
    }

    /// Whether a subscription to `self` receives messages published on `published`.
    pub fn matches(&self, published: &TopicName) -> bool {
        self.base == published.base
            && match (&self.domain, &published.domain) {
                (None, _) => true,
                (Some(a), Some(b)) => a == b,
                (Some(_), None) => false,
            }
    }

    /// Whether either topic matches the other; used to pair declared
    /// publications with subscriptions when neither side is concrete.
    pub fn overlaps(&self, other: &TopicName) -> bool {
        self.matches(other) || other.matches(self)
    }

    pub fn is_lifecycle(&self) -> bool {
        self.domain.is_none()
            && matches!(self.base.as_str(), DIALOG_START | DIALOG_END | DIALOG_EXIT)
    }
}

impl fmt::Display for TopicName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.domain {
            Some(d) => write!(f, "{}/{}", self.base, d),
            None => f.write_str(&self.base),
        }
    }
}

impl FromStr for TopicName {
    type Err = TopicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TopicName::parse(s)
    }
}

impl TryFrom<String> for TopicName {
    type Error = TopicError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        TopicName::parse(&s)
    }
}

impl TryFrom<&str> for TopicName {
    type Error = TopicError;

    fn try_from(s: &str) -> Result<Self, Self::Error> {
        TopicName::parse(s)
    }
}

impl From<TopicName> for String {
    fn from(t: TopicName) -> String {
        t.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_and_parses() {
        let t = TopicName::with_domain("user_acts", "mensa").unwrap();
        assert_eq!(t.to_string(), "user_acts/mensa");
        assert_eq!(TopicName::parse("user_acts/mensa").unwrap(), t);
        assert_eq!(TopicName::parse("beliefstate").unwrap().domain(), None);
    }

    #[test]
    fn rejects_malformed_names() {
        assert_eq!(TopicName::new(""), Err(TopicError::EmptyBase));
        assert_eq!(TopicName::parse("a/"), Err(TopicError::EmptyDomain));
        assert!(matches!(TopicName::parse("a/b/c"), Err(TopicError::Separator(_))));
        assert!(TopicName::parse("/x").is_err());
    }

    #[test]
    fn prefix_matching() {
        let base = TopicName::new("user_acts").unwrap();
        let mensa = TopicName::with_domain("user_acts", "mensa").unwrap();
        let weather = TopicName::with_domain("user_acts", "weather").unwrap();
        assert!(base.matches(&mensa));
        assert!(base.matches(&base));
        assert!(mensa.matches(&mensa));
        assert!(!mensa.matches(&weather));
        assert!(!mensa.matches(&base));
        assert!(mensa.overlaps(&base));
        assert!(!TopicName::new("sys_acts").unwrap().matches(&mensa));
    }

    #[test]
    fn serde_uses_rendered_form() {
        let t = TopicName::with_domain("a", "b").unwrap();
        assert_eq!(serde_json::to_string(&t).unwrap(), "\"a/b\"");
        let back: TopicName = serde_json::from_str("\"a/b\"").unwrap();
        assert_eq!(back, t);
        assert!(serde_json::from_str::<TopicName>("\"\"").is_err());
    }
}
