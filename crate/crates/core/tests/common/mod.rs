//! Reference implementations shared by the integration and acceptance tests.
//! Each oracle is written from the defining formula, without calling into
//! the code under test.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use colloquy_core::acts::{SysAct, SysActType, SystemEmotion};
use colloquy_core::bus::{
    DialogBus, Inputs, Outputs, ServiceDescriptor, ServiceError, SubscriptionMode, TopicName,
};
use colloquy_core::domain::{EntityDatabase, Ontology, DONTCARE};
use colloquy_core::nlg::{generate, Signature, TemplateCatalog};
use colloquy_core::policy::qnet::DuelingQNetwork;
use colloquy_core::policy::replay::{Experience, PrioritizedReplay};
use colloquy_core::policy::rl::{batch_loss_gradient, greedy, DqnConfig, DqnTrainer};
use colloquy_core::signals::{Engagement, EngagementConfig, GazeSample};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use statrs::distribution::{ChiSquared, ContinuousCDF};

// ---------------------------------------------------------------- bus

/// Outcome of a randomized publish/dispatch schedule checked against a
/// shadow model of every subscription queue.
#[derive(Debug, Default)]
pub struct StressReport {
    pub messages: usize,
    pub topics: usize,
    pub invocations: usize,
    pub cycles: usize,
    pub violations: Vec<String>,
}

#[derive(Clone, Debug)]
struct Invocation {
    service: String,
    deliveries: Vec<(String, Vec<(String, u64)>)>,
}

#[derive(Clone)]
struct Plan {
    name: String,
    subs: Vec<(String, SubscriptionMode)>,
    pubs: Vec<String>,
}

fn prefix_match(subscription: &str, topic: &str) -> bool {
    topic == subscription || (!subscription.contains('/') && topic.starts_with(&format!("{subscription}/")))
}

fn stress_topics(bases: usize) -> Vec<String> {
    let mut out = Vec::new();
    for b in 0..bases {
        out.push(format!("t{b:02}"));
        out.push(format!("t{b:02}/alpha"));
        out.push(format!("t{b:02}/beta"));
    }
    out
}

/// Drives a bus with `services` random services until at least
/// `min_messages` envelopes were published, checking per-topic sequencing,
/// FIFO delivery for Collect, newest-only delivery for Latest, the gating
/// rule and the name order of each cycle.
pub fn bus_stress(seed: u64, min_messages: usize, bases: usize, services: usize) -> StressReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let topics = stress_topics(bases);
    let record: Arc<Mutex<Vec<Invocation>>> = Arc::new(Mutex::new(Vec::new()));
    let mut bus = DialogBus::new();
    let mut plans = Vec::new();
    for i in 0..services {
        let n_subs = rng.random_range(1..=3);
        let mut subs: Vec<(String, SubscriptionMode)> = Vec::new();
        while subs.len() < n_subs {
            let t = topics[rng.random_range(0..topics.len())].clone();
            if subs.iter().all(|(s, _)| *s != t) {
                let mode = if rng.random_bool(0.5) { SubscriptionMode::Latest } else { SubscriptionMode::Collect };
                subs.push((t, mode));
            }
        }
        let n_pubs = rng.random_range(0..=2);
        let pubs: BTreeSet<String> =
            (0..n_pubs).map(|_| topics[rng.random_range(0..topics.len())].clone()).collect();
        let plan = Plan { name: format!("svc{i:02}"), subs, pubs: pubs.into_iter().collect() };
        let mut d = ServiceDescriptor::new(plan.name.clone());
        for (t, m) in &plan.subs {
            d = d.subscribe(t, *m);
        }
        for t in &plan.pubs {
            d = d.publish(t);
        }
        let log = Arc::clone(&record);
        let name = plan.name.clone();
        let pubs = plan.pubs.clone();
        let mut own_rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut counter = 0u64;
        bus.register_service(d, move |inputs: &Inputs| -> Result<Outputs, ServiceError> {
            let deliveries = inputs
                .iter()
                .map(|(sub, delivery)| {
                    let got = delivery.envelopes().iter().map(|e| (e.topic.to_string(), e.seq)).collect();
                    (sub.to_string(), got)
                })
                .collect();
            log.lock().unwrap().push(Invocation { service: name.clone(), deliveries });
            let mut out = Outputs::new();
            for t in &pubs {
                if own_rng.random_bool(0.45) {
                    counter += 1;
                    out = out.with(t, format!("{name}#{counter}"))?;
                }
            }
            Ok(out)
        })
        .expect("register stress service");
        plans.push(plan);
    }
    plans.sort_by(|a, b| a.name.cmp(&b.name));

    let mut report = StressReport::default();
    let mut shadow: Vec<Vec<Vec<(String, u64)>>> =
        plans.iter().map(|p| vec![Vec::new(); p.subs.len()]).collect();
    let mut next_seq: BTreeMap<String, u64> = BTreeMap::new();
    let mut cursor = 0usize;
    let mut sync = |bus: &DialogBus,
                    shadow: &mut Vec<Vec<Vec<(String, u64)>>>,
                    cursor: &mut usize,
                    violations: &mut Vec<String>| {
        for e in &bus.log()[*cursor..] {
            let topic = e.topic.to_string();
            let expected = next_seq.entry(topic.clone()).or_insert(0);
            if e.seq != *expected {
                violations.push(format!("{topic}: seq {} where {} was due", e.seq, expected));
            }
            *expected = e.seq + 1;
            for (p, queues) in plans.iter().zip(shadow.iter_mut()) {
                for ((sub, _), q) in p.subs.iter().zip(queues.iter_mut()) {
                    if prefix_match(sub, &topic) {
                        q.push((topic.clone(), e.seq));
                    }
                }
            }
        }
        *cursor = bus.log().len();
    };

    bus.start().expect("start");
    let mut ext = 0u64;
    while bus.log().len() < min_messages && report.violations.len() < 20 {
        let burst = rng.random_range(0..6);
        for _ in 0..burst {
            let t = &topics[rng.random_range(0..topics.len())];
            ext += 1;
            bus.publish(TopicName::parse(t).unwrap(), format!("ext#{ext}")).unwrap();
        }
        if rng.random_bool(0.3) {
            continue;
        }
        sync(&bus, &mut shadow, &mut cursor, &mut report.violations);
        let expected: Vec<String> = plans
            .iter()
            .zip(&shadow)
            .filter(|(_, qs)| qs.iter().all(|q| !q.is_empty()))
            .map(|(p, _)| p.name.clone())
            .collect();
        let invoked = bus.dispatch_cycle().expect("dispatch");
        report.cycles += 1;
        if invoked != expected {
            report.violations.push(format!("cycle {}: invoked {invoked:?}, ready {expected:?}", report.cycles));
        }
        let calls: Vec<Invocation> = std::mem::take(&mut *record.lock().unwrap());
        let called: Vec<&str> = calls.iter().map(|c| c.service.as_str()).collect();
        if called != invoked.iter().map(String::as_str).collect::<Vec<_>>() {
            report.violations.push(format!("handlers ran as {called:?}, reported {invoked:?}"));
        }
        for call in &calls {
            report.invocations += 1;
            let idx = plans.iter().position(|p| p.name == call.service).unwrap();
            let plan = &plans[idx];
            if call.deliveries.len() != plan.subs.len() {
                report.violations.push(format!("{}: {} inputs for {} subscriptions", call.service, call.deliveries.len(), plan.subs.len()));
                continue;
            }
            for (s, (sub, mode)) in plan.subs.iter().enumerate() {
                let Some((_, got)) = call.deliveries.iter().find(|(t, _)| t == sub) else {
                    report.violations.push(format!("{}: no input for {sub}", call.service));
                    continue;
                };
                if got.is_empty() {
                    report.violations.push(format!("{}: empty input for {sub}", call.service));
                }
                let pending = std::mem::take(&mut shadow[idx][s]);
                let want: Vec<(String, u64)> = match mode {
                    SubscriptionMode::Collect => pending,
                    SubscriptionMode::Latest => pending.last().cloned().into_iter().collect(),
                };
                if *got != want {
                    report.violations.push(format!("{} {sub} {mode:?}: got {got:?}, want {want:?}", call.service));
                }
            }
        }
    }
    sync(&bus, &mut shadow, &mut cursor, &mut report.violations);
    for (p, qs) in plans.iter().zip(&shadow) {
        for ((sub, _), q) in p.subs.iter().zip(qs) {
            let pending = bus.pending(&p.name, sub).unwrap_or(usize::MAX);
            if pending != q.len() {
                report.violations.push(format!("{} {sub}: {pending} pending, shadow has {}", p.name, q.len()));
            }
        }
    }
    report.messages = bus.log().len();
    report.topics = bus.log().iter().map(|e| e.topic.to_string()).collect::<BTreeSet<_>>().len();
    bus.end().expect("end");
    report
}

/// Per-topic multiset of `(seq, payload)`, ignoring wall-clock stamps.
pub fn envelope_multiset(
    envelopes: &[colloquy_core::bus::MessageEnvelope],
) -> BTreeMap<String, Vec<(u64, String)>> {
    let mut out: BTreeMap<String, Vec<(u64, String)>> = BTreeMap::new();
    for e in envelopes {
        out.entry(e.topic.to_string()).or_default().push((e.seq, e.payload.to_string()));
    }
    for v in out.values_mut() {
        v.sort();
    }
    out
}

// ---------------------------------------------------------------- signals

pub fn engagement_oracle(stream: &[GazeSample], cfg: &EngagementConfig) -> Vec<Engagement> {
    let away = |s: &GazeSample| {
        let dx = s.gaze_angle_x - cfg.center.0;
        let dy = s.gaze_angle_y - cfg.center.1;
        (dx * dx + dy * dy).sqrt() > cfg.angle_threshold
    };
    (0..stream.len())
        .map(|i| {
            let disengaged = (0..=i).any(|j| {
                (j..=i).all(|m| away(&stream[m])) && stream[i].t - stream[j].t >= cfg.duration_threshold - 1e-9
            });
            if disengaged {
                Engagement::NotLooking
            } else {
                Engagement::Looking
            }
        })
        .collect()
}

/// Random non-decreasing gaze stream with runs of looking away.
pub fn random_gaze_stream(rng: &mut impl Rng, len: usize) -> Vec<GazeSample> {
    let mut t = rng.random_range(0.0..2.0);
    let mut away = false;
    (0..len)
        .map(|_| {
            if rng.random_bool(0.2) {
                away = !away;
            }
            let step: f64 = match rng.random_range(0..10) {
                0 => 0.0,
                1 => 1.0,
                _ => rng.random_range(0.05..1.2),
            };
            t += step;
            let r = if away { rng.random_range(0.2..0.8) } else { rng.random_range(0.0..0.3) };
            let phi = rng.random_range(0.0..2.0 * PI);
            GazeSample::new(t, r * phi.cos(), r * phi.sin())
        })
        .collect()
}

pub fn eou_oracle(chunks: &[Vec<f64>], amp: f64, k: usize) -> Option<usize> {
    let k = k.max(1);
    (0..chunks.len()).find(|&i| {
        i + 1 >= k && chunks[i + 1 - k..=i].iter().all(|c| c.iter().all(|x| x.abs() <= amp))
    })
}

pub fn random_chunks(rng: &mut impl Rng, n: usize, size: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            let level = if rng.random_bool(0.6) { rng.random_range(0.0..0.06) } else { rng.random_range(0.0..1.0) };
            (0..size).map(|_| rng.random_range(-level..=level)).collect()
        })
        .collect()
}

fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Log mel energies via a direct O(N²) DFT of each Hamming-windowed,
/// zero-padded 25 ms frame (10 ms hop).
pub fn naive_log_mel(samples: &[f64], sample_rate: u32, n_mels: usize) -> Vec<Vec<f64>> {
    let sr = sample_rate as f64;
    let frame = (0.025 * sr).round() as usize;
    let hop = (0.010 * sr).round() as usize;
    let mut n_fft = 1;
    while n_fft < frame {
        n_fft *= 2;
    }
    let window: Vec<f64> =
        (0..frame).map(|n| 0.54 - 0.46 * (2.0 * PI * n as f64 / (frame - 1) as f64).cos()).collect();
    let twiddle: Vec<(f64, f64)> =
        (0..n_fft).map(|m| ((2.0 * PI * m as f64 / n_fft as f64).cos(), (2.0 * PI * m as f64 / n_fft as f64).sin())).collect();
    let top = hz_to_mel(sr / 2.0);
    let edges: Vec<f64> = (0..n_mels + 2).map(|i| mel_to_hz(top * i as f64 / (n_mels + 1) as f64)).collect();
    let frames = if samples.len() < frame { 0 } else { 1 + (samples.len() - frame) / hop };
    (0..frames)
        .map(|f| {
            let x: Vec<f64> = (0..frame).map(|n| samples[f * hop + n] * window[n]).collect();
            let power: Vec<f64> = (0..=n_fft / 2)
                .map(|k| {
                    let (mut re, mut im) = (0.0, 0.0);
                    for (n, v) in x.iter().enumerate() {
                        let (c, s) = twiddle[(k * n) % n_fft];
                        re += v * c;
                        im -= v * s;
                    }
                    re * re + im * im
                })
                .collect();
            (0..n_mels)
                .map(|m| {
                    let (lo, mid, hi) = (edges[m], edges[m + 1], edges[m + 2]);
                    let e: f64 = power
                        .iter()
                        .enumerate()
                        .map(|(k, p)| {
                            let hz = k as f64 * sr / n_fft as f64;
                            let w = ((hz - lo) / (mid - lo)).min((hi - hz) / (hi - mid)).max(0.0);
                            w * p
                        })
                        .sum();
                    e.max(1e-10).ln()
                })
                .collect()
        })
        .collect()
}

pub fn naive_dct(x: &[f64], keep: usize) -> Vec<f64> {
    let n = x.len() as f64;
    (0..keep)
        .map(|k| {
            let alpha = if k == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
            alpha * x.iter().enumerate().map(|(i, v)| v * (PI * (i as f64 + 0.5) * k as f64 / n).cos()).sum::<f64>()
        })
        .collect()
}

pub fn naive_mfcc(samples: &[f64], sample_rate: u32) -> Vec<Vec<f64>> {
    naive_log_mel(samples, sample_rate, 26).iter().map(|r| naive_dct(r, 13)).collect()
}

pub fn random_signal(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    let amp = rng.random_range(0.05..1.0);
    let f = rng.random_range(50.0..6000.0);
    (0..len)
        .map(|i| {
            let tone = (2.0 * PI * f * i as f64 / 16000.0).sin();
            (0.5 * tone + 0.5 * rng.random_range(-1.0..1.0)) * amp
        })
        .collect()
}

pub fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    assert_eq!(a.len(), b.len(), "row count");
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| {
            assert_eq!(x.len(), y.len(), "column count");
            x.iter().zip(y).map(|(p, q)| (p - q).abs())
        })
        .fold(0.0, f64::max)
}

// ---------------------------------------------------------------- RL

/// Five-state chain: `left` from state 0 ends with reward 0.7, `right` from
/// state 4 ends with reward 1, every other move shifts by one state for
/// free.
pub struct ChainMdp {
    pub gamma: f64,
}

pub const CHAIN_STATES: usize = 5;

impl ChainMdp {
    /// `(next_state, reward, terminal)`
    pub fn step(&self, s: usize, a: usize) -> (usize, f64, bool) {
        match (s, a) {
            (0, 0) => (0, 0.7, true),
            (s, 0) => (s - 1, 0.0, false),
            (4, _) => (4, 1.0, true),
            (s, _) => (s + 1, 0.0, false),
        }
    }

    pub fn value_iteration(&self) -> [[f64; 2]; CHAIN_STATES] {
        let mut q = [[0.0f64; 2]; CHAIN_STATES];
        for _ in 0..1000 {
            let v: Vec<f64> = q.iter().map(|r: &[f64; 2]| r[0].max(r[1])).collect();
            for (s, row) in q.iter_mut().enumerate() {
                for (a, cell) in row.iter_mut().enumerate() {
                    let (n, r, done) = self.step(s, a);
                    *cell = if done { r } else { r + self.gamma * v[n] };
                }
            }
        }
        q
    }

    pub fn one_hot(s: usize) -> Vec<f64> {
        let mut v = vec![0.0; CHAIN_STATES];
        v[s] = 1.0;
        v
    }

    /// Trains a dueling DQN on uniformly drawn transitions and returns the
    /// learned Q table.
    pub fn train(&self, steps: usize, seed: u64) -> [[f64; 2]; CHAIN_STATES] {
        let config = DqnConfig {
            hidden: vec![32],
            gamma: self.gamma,
            learning_rate: 2e-3,
            batch_size: 32,
            replay_capacity: 5000,
            warmup: 64,
            target_sync_steps: 100,
            seed,
            ..DqnConfig::default()
        };
        let mut trainer = DqnTrainer::<f64>::new(config, CHAIN_STATES, 2).expect("config");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..steps {
            let s = rng.random_range(0..CHAIN_STATES);
            let a = rng.random_range(0..2);
            let (n, r, terminal) = self.step(s, a);
            let e = Experience {
                state: Self::one_hot(s),
                action: a,
                reward: r,
                next_state: Self::one_hot(n),
                terminal,
                next_mask: vec![],
            };
            trainer.observe(e, i as f64 / steps as f64).expect("observe");
        }
        let mut q = [[0.0f64; 2]; CHAIN_STATES];
        for (s, row) in q.iter_mut().enumerate() {
            let out = trainer.network().forward(&Self::one_hot(s)).unwrap();
            row.copy_from_slice(&out);
        }
        q
    }
}

pub fn greedy_table(q: &[[f64; 2]; CHAIN_STATES]) -> Vec<usize> {
    q.iter().map(|r| greedy(r, &[]).unwrap()).collect()
}

/// Largest relative deviation between the analytic gradient of the batch
/// loss and central finite differences, over every parameter of a random
/// network. Relative error is `|g - d| / max(|g| + |d|, floor)`.
pub fn gradient_check(seed: u64, hidden: &[usize], floor: f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (input, actions, batch) = (6, 4, 5);
    let mut net = DuelingQNetwork::<f64>::new(input, hidden, actions, &mut rng);
    let target = DuelingQNetwork::<f64>::new(input, hidden, actions, &mut rng);
    let vec = |rng: &mut ChaCha8Rng| (0..input).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>();
    let experiences: Vec<Experience<f64>> = (0..batch)
        .map(|_| {
            let mut mask: Vec<bool> = (0..actions).map(|_| rng.random_bool(0.6)).collect();
            mask[0] = true;
            Experience {
                state: vec(&mut rng),
                action: rng.random_range(0..actions),
                reward: rng.random_range(-1.0..1.0),
                next_state: vec(&mut rng),
                terminal: rng.random_bool(0.3),
                next_mask: mask,
            }
        })
        .collect();
    let refs: Vec<&Experience<f64>> = experiences.iter().collect();
    let weights: Vec<f64> = (0..batch).map(|_| rng.random_range(0.2..1.0)).collect();
    let gamma = 0.9;
    let (_, grad, _) = batch_loss_gradient(&net, &target, &refs, &weights, gamma).unwrap();
    let h = 1e-6;
    let mut worst = 0.0f64;
    for (p, g) in grad.iter().enumerate() {
        let orig = net.params()[p];
        net.params_mut()[p] = orig + h;
        let up = batch_loss_gradient(&net, &target, &refs, &weights, gamma).unwrap().0;
        net.params_mut()[p] = orig - h;
        let down = batch_loss_gradient(&net, &target, &refs, &weights, gamma).unwrap().0;
        net.params_mut()[p] = orig;
        let fd = (up - down) / (2.0 * h);
        let rel = (g - fd).abs() / (g.abs() + fd.abs()).max(floor);
        worst = worst.max(rel);
    }
    worst
}

pub struct PerCheck {
    pub chi_square: f64,
    pub p_value: f64,
    pub max_weight_error: f64,
    pub draws: usize,
}

/// Fills a buffer with random priorities, draws `draws` indices and tests
/// the empirical frequencies against `p^α / Σ p^α`; also compares every
/// returned importance weight to `(N P(i))^-β / max_j (N P(j))^-β`.
pub fn per_check(seed: u64, n: usize, alpha: f64, beta: f64, draws: usize) -> PerCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buf = PrioritizedReplay::<f64>::new(n, alpha);
    let priorities: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..5.0)).collect();
    for (i, p) in priorities.iter().enumerate() {
        let e = Experience { state: vec![i as f64], action: 0, reward: 0.0, next_state: vec![], terminal: true, next_mask: vec![] };
        buf.add(e, Some(*p));
    }
    let scaled: Vec<f64> = priorities.iter().map(|p| p.powf(alpha)).collect();
    let total: f64 = scaled.iter().sum();
    let probs: Vec<f64> = scaled.iter().map(|s| s / total).collect();
    let raw: Vec<f64> = probs.iter().map(|p| (n as f64 * p).powf(-beta)).collect();
    let max_raw = raw.iter().cloned().fold(0.0, f64::max);
    let mut counts = vec![0usize; n];
    let mut max_weight_error = 0.0f64;
    let batch = n;
    for _ in 0..draws.div_ceil(batch) {
        let b = buf.sample(batch, beta, &mut rng).unwrap();
        for (i, w) in b.indices.iter().zip(&b.weights) {
            counts[*i] += 1;
            max_weight_error = max_weight_error.max((w - raw[*i] / max_raw).abs());
        }
    }
    let total_draws = draws.div_ceil(batch) * batch;
    let chi_square: f64 = counts
        .iter()
        .zip(&probs)
        .map(|(c, p)| {
            let expected = p * total_draws as f64;
            (*c as f64 - expected).powi(2) / expected
        })
        .sum();
    let dist = ChiSquared::new((n - 1) as f64).unwrap();
    PerCheck { chi_square, p_value: 1.0 - dist.cdf(chi_square), max_weight_error, draws: total_draws }
}

// ---------------------------------------------------------------- NLG

/// Concrete acts for every signature: value-less slots for requests, legal
/// values (plus dontcare) for confirm/select, and database rows or API
/// results for entity informs.
pub fn enumerate_acts(signatures: &[Signature], ontology: &Ontology, rows: &[BTreeMap<String, String>]) -> Vec<SysAct> {
    let mut out = Vec::new();
    for sig in signatures {
        let base = SysAct::new(sig.act_type);
        match sig.act_type {
            SysActType::Request => {
                out.push(sig.slots.iter().fold(base, |a, s| a.with_slot(s)));
            }
            SysActType::Confirm => {
                for slot in &sig.slots {
                    let mut values = ontology.informable.get(slot).cloned().unwrap_or_default();
                    values.push(DONTCARE.to_string());
                    for v in values {
                        out.push(base.clone().with(slot, v));
                    }
                }
            }
            SysActType::Select => {
                for slot in &sig.slots {
                    let values = ontology.informable.get(slot).cloned().unwrap_or_default();
                    for pair in values.windows(2) {
                        out.push(base.clone().with(slot, pair.join(" or ")));
                    }
                }
            }
            _ if sig.slots.is_empty() => out.push(base),
            _ => {
                for row in rows {
                    if sig.slots.iter().all(|s| row.contains_key(s)) {
                        out.push(sig.slots.iter().fold(base.clone(), |a, s| a.with(s, row[s].clone())));
                    }
                }
            }
        }
    }
    out
}

/// Checks neutral totality and the emotion fallback rule on `acts`.
/// Returns the number of `(act, emotion)` pairs verified.
pub fn nlg_totality(catalog: &TemplateCatalog, acts: &[SysAct]) -> Result<usize, String> {
    let mut checked = 0;
    for act in acts {
        let neutral = generate(act, SystemEmotion::Neutral, None, catalog).map_err(|e| format!("{act}: {e}"))?;
        for emotion in SystemEmotion::ALL {
            let text = generate(act, *emotion, None, catalog).map_err(|e| format!("{act} as {emotion}: {e}"))?;
            let own = catalog.set(*emotion).and_then(|s| s.find(act));
            if own.is_none() && text != neutral {
                return Err(format!("{act} as {emotion} should fall back to {neutral:?}, got {text:?}"));
            }
            checked += 1;
        }
    }
    Ok(checked)
}

pub fn db_rows(db: &EntityDatabase) -> Vec<BTreeMap<String, String>> {
    db.rows().to_vec()
}

pub fn api_rows(ontology: &Ontology, fixture: &colloquy_core::domain::ApiFixture) -> Vec<BTreeMap<String, String>> {
    let mandatory = &ontology.api.as_ref().unwrap().mandatory;
    let mut combos: Vec<BTreeMap<String, String>> = vec![BTreeMap::new()];
    for slot in mandatory {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                ontology.informable[slot].iter().map(move |v| {
                    let mut c = c.clone();
                    c.insert(slot.clone(), v.clone());
                    c
                })
            })
            .collect();
    }
    combos
        .into_iter()
        .map(|params| {
            let mut row = params.clone();
            if let Ok(result) = fixture.api_query(&params) {
                for (k, v) in result {
                    let s = match v {
                        Value::String(s) => s,
                        other => other.to_string(),
                    };
                    row.insert(k, s);
                }
            }
            row
        })
        .collect()
}
