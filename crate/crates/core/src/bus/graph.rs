use std::collections::BTreeSet;
use std::fmt::Write;

use super::{ServiceDescriptor, TopicName, DIALOG_END, DIALOG_EXIT, DIALOG_START};

/// Publish/subscribe connectivity derived purely from descriptors.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GraphReport {
    pub nodes: Vec<String>,
    pub remote_nodes: BTreeSet<String>,
    /// (publisher, topic, subscriber)
    pub edges: Vec<(String, TopicName, String)>,
    pub orphan_publications: BTreeSet<TopicName>,
    pub orphan_subscriptions: BTreeSet<TopicName>,
    /// (service, topic) pairs behind the two orphan sets, for rendering.
    pub orphan_details: Vec<(String, TopicName, Orphan)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orphan {
    Publication,
    Subscription,
}

fn bus_publishes(topic: &TopicName) -> bool {
    topic.domain().is_none() && matches!(topic.base(), DIALOG_START | DIALOG_EXIT)
}

fn bus_consumes(topic: &TopicName) -> bool {
    topic.domain().is_none() && topic.base() == DIALOG_END
}

impl GraphReport {
    pub fn from_descriptors<'a>(descriptors: impl IntoIterator<Item = &'a ServiceDescriptor>) -> Self {
        let mut all: Vec<&ServiceDescriptor> = descriptors.into_iter().collect();
        all.sort_by(|a, b| a.name.cmp(&b.name));
        let mut report = GraphReport {
            nodes: all.iter().map(|d| d.name.clone()).collect(),
            remote_nodes: all
                .iter()
                .filter(|d| d.location.is_remote())
                .map(|d| d.name.clone())
                .collect(),
            ..GraphReport::default()
        };
        let mut edges = BTreeSet::new();
        for publisher in &all {
            for publication in &publisher.publications {
                let mut consumed = bus_consumes(publication);
                for subscriber in &all {
                    for sub in &subscriber.subscriptions {
                        if sub.topic.overlaps(publication) {
                            consumed = true;
                            let topic = if publication.domain().is_some() {
                                publication.clone()
                            } else {
                                sub.topic.clone()
                            };
                            edges.insert((publisher.name.clone(), topic, subscriber.name.clone()));
                        }
                    }
                }
                if !consumed {
                    report.orphan_publications.insert(publication.clone());
                    report.orphan_details.push((
                        publisher.name.clone(),
                        publication.clone(),
                        Orphan::Publication,
                    ));
                }
            }
        }
        for subscriber in &all {
            for sub in &subscriber.subscriptions {
                let fed = bus_publishes(&sub.topic)
                    || all.iter().any(|p| p.publications.iter().any(|t| t.overlaps(&sub.topic)));
                if !fed {
                    report.orphan_subscriptions.insert(sub.topic.clone());
                    report.orphan_details.push((
                        subscriber.name.clone(),
                        sub.topic.clone(),
                        Orphan::Subscription,
                    ));
                }
            }
        }
        report.edges = edges.into_iter().collect();
        report
    }

    /// Graphviz rendering. Remote services are drawn as `box3d`, orphaned
    /// connections as dashed red edges to point nodes.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph dialog {\n  rankdir=LR;\n  node [fontname=\"Helvetica\"];\n");
        for node in &self.nodes {
            if self.remote_nodes.contains(node) {
                let _ = writeln!(out, "  \"{node}\" [shape=box3d, style=dashed, label=\"{node}\\n(remote)\"];");
            } else {
                let _ = writeln!(out, "  \"{node}\" [shape=box];");
            }
        }
        for (from, topic, to) in &self.edges {
            let _ = writeln!(out, "  \"{from}\" -> \"{to}\" [label=\"{topic}\"];");
        }
        for (i, (service, topic, kind)) in self.orphan_details.iter().enumerate() {
            let _ = writeln!(out, "  \"orphan_{i}\" [shape=point, color=red];");
            let (from, to) = match kind {
                Orphan::Publication => (service.clone(), format!("orphan_{i}")),
                Orphan::Subscription => (format!("orphan_{i}"), service.clone()),
            };
            let _ = writeln!(
                out,
                "  \"{from}\" -> \"{to}\" [label=\"{topic}\", color=red, style=dashed];"
            );
        }
        out.push_str("}\n");
        out
    }
}
