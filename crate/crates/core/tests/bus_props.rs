mod common;

use std::sync::{Arc, Mutex};

use colloquy_core::bus::{
    BusError, DialogBus, DialogLifecycle, GraphReport, Inputs, LifecycleEvent, Orphan, Outputs, Service,
    ServiceDescriptor, ServiceError, SubscriptionMode, TerminationReason, TopicName,
};
use proptest::prelude::*;

fn overlap(a: &str, b: &str) -> bool {
    let base = |t: &str| t.split('/').next().unwrap().to_string();
    a == b || (base(a) == base(b) && (!a.contains('/') || !b.contains('/')))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn randomized_schedules_keep_queue_semantics(seed in any::<u64>(), bases in 2usize..6, services in 3usize..16) {
        let report = common::bus_stress(seed, 1500, bases, services);
        prop_assert!(report.violations.is_empty(), "{:?}", &report.violations[..report.violations.len().min(5)]);
        prop_assert!(report.messages >= 1500);
    }

    #[test]
    fn topic_names_render_and_parse(base in "[a-z_]{1,12}", domain in proptest::option::of("[a-z]{1,8}")) {
        let t = match &domain {
            Some(d) => TopicName::with_domain(base.clone(), d.clone()).unwrap(),
            None => TopicName::new(base.clone()).unwrap(),
        };
        let rendered = t.to_string();
        prop_assert_eq!(TopicName::parse(&rendered).unwrap(), t.clone());
        prop_assert_eq!(t.base(), base.as_str());
        prop_assert_eq!(t.domain(), domain.as_deref());
        let slashed = format!("{}/x", base);
        prop_assert!(TopicName::new(slashed).is_err());
    }

    #[test]
    fn seqs_are_dense_per_topic(picks in proptest::collection::vec(0usize..4, 1..200)) {
        let names = ["a", "a/x", "b", "b/y"];
        let mut bus = DialogBus::new();
        bus.start().unwrap();
        let mut counts = [0u64; 4];
        for p in &picks {
            let seq = bus.publish(TopicName::parse(names[*p]).unwrap(), *p).unwrap();
            prop_assert_eq!(seq, counts[*p]);
            counts[*p] += 1;
        }
    }

    #[test]
    fn graph_orphans_never_overlap_a_counterpart(
        specs in proptest::collection::vec(
            (proptest::collection::vec(0usize..9, 0..3), proptest::collection::vec(0usize..9, 0..3)),
            1..8,
        )
    ) {
        let topics = ["a", "a/x", "a/y", "b", "b/x", "c", "c/z", "dialog_start", "dialog_end"];
        let mut descriptors = Vec::new();
        for (i, (subs, pubs)) in specs.iter().enumerate() {
            let mut d = ServiceDescriptor::new(format!("s{i}"));
            for s in subs {
                d = d.subscribe(topics[*s], SubscriptionMode::Latest);
            }
            for p in pubs {
                d = d.publish(topics[*p]);
            }
            if d.validate().is_ok() {
                descriptors.push(d);
            }
        }
        let report = GraphReport::from_descriptors(&descriptors);
        let subs: Vec<String> = descriptors.iter().flat_map(|d| d.subscriptions.iter().map(|s| s.topic.to_string())).collect();
        let pubs: Vec<String> = descriptors.iter().flat_map(|d| d.publications.iter().map(|p| p.to_string())).collect();
        for orphan in &report.orphan_publications {
            let o = orphan.to_string();
            prop_assert!(!subs.iter().any(|s| overlap(s, &o)), "{o} has a subscriber");
        }
        for orphan in &report.orphan_subscriptions {
            let o = orphan.to_string();
            prop_assert!(!pubs.iter().any(|p| overlap(p, &o)), "{o} has a publisher");
            prop_assert!(o != "dialog_start");
        }
        for (publisher, topic, _) in &report.edges {
            let orphaned = report
                .orphan_details
                .iter()
                .any(|(s, t, kind)| s == publisher && t == topic && *kind == Orphan::Publication);
            prop_assert!(!orphaned, "{publisher} {topic} is both wired and orphaned");
        }
    }
}

#[derive(Default)]
struct Probe {
    events: Arc<Mutex<Vec<String>>>,
}

impl Service for Probe {
    fn handle(&mut self, inputs: &Inputs) -> Result<Outputs, ServiceError> {
        let x: i64 = inputs.latest("ping")?;
        self.events.lock().unwrap().push(format!("handle {x}"));
        Outputs::new().with("dialog_end", true)
    }

    fn on_lifecycle(&mut self, event: LifecycleEvent) -> Result<(), ServiceError> {
        self.events.lock().unwrap().push(format!("{event:?}"));
        Ok(())
    }
}

#[test]
fn handlers_run_between_start_and_end() {
    let events = Arc::new(Mutex::new(Vec::new()));
    let mut bus = DialogBus::new();
    let d = ServiceDescriptor::new("probe").subscribe("ping", SubscriptionMode::Latest).publish("dialog_end");
    bus.register_service(d, Probe { events: Arc::clone(&events) }).unwrap();
    assert!(matches!(bus.dispatch_cycle(), Err(BusError::NotRunning(DialogLifecycle::Idle))));
    let result = bus.run_dialog(TopicName::new("ping").unwrap(), 7, 10).unwrap();
    assert_eq!(result.reason, TerminationReason::DialogEnd);
    assert_eq!(bus.state(), DialogLifecycle::Terminated);
    assert_eq!(*events.lock().unwrap(), vec!["Start", "handle 7", "End"]);
    let topics: Vec<String> = result.envelopes.iter().map(|e| e.topic.to_string()).collect();
    assert_eq!(topics, vec!["dialog_start", "ping", "dialog_end", "dialog_exit"]);
}

#[test]
fn start_failure_still_ends_the_dialog() {
    struct Refuses;
    impl Service for Refuses {
        fn handle(&mut self, _: &Inputs) -> Result<Outputs, ServiceError> {
            Outputs::none()
        }
        fn on_lifecycle(&mut self, event: LifecycleEvent) -> Result<(), ServiceError> {
            match event {
                LifecycleEvent::Start => Err(ServiceError::new("not today")),
                LifecycleEvent::End => Ok(()),
            }
        }
    }
    let mut bus = DialogBus::new();
    bus.register_service(ServiceDescriptor::new("r").subscribe("x", SubscriptionMode::Collect), Refuses).unwrap();
    let err = bus.start().unwrap_err();
    assert!(matches!(err, BusError::HandlerError { ref service, .. } if service == "r"));
    assert_eq!(bus.state(), DialogLifecycle::Terminated);
    assert!(matches!(bus.publish(TopicName::new("x").unwrap(), 1), Err(BusError::PublishWhileTerminated)));
}
