use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::realize::realize_user_acts;
use super::{SimConfig, SimError, SimOutcome, UserSimulator};
use crate::acts::{SysAct, SysActType};
use crate::bus::{
    DialogResult, Inputs, LifecycleEvent, Outputs, Service, ServiceDescriptor, ServiceError, SubscriptionMode,
    TerminationReason, TopicName, DIALOG_END, DIALOG_START,
};
use crate::domain::EntityDatabase;
use crate::nlg::TemplateCatalog;
use crate::nlu::NluRuleSet;
use crate::fixtures;
use crate::policy::qnet::DuelingQNetwork;
use crate::policy::rl::RlPolicy;
use crate::policy::{DialogPolicy, HandcraftedPolicy};
use crate::services::topics::{scoped, SIM_OUTCOME, SYS_ACT, USER_ACTS, USER_UTTERANCE};
use crate::services::{
    bst_services, nlg_services, nlu_services, policy_service, welcome_service, BstBackend, DomainUtterance,
    NlgOptions, ServiceEntry,
};
use crate::state::BeliefState;
use crate::system::{assemble, Placement};

/// How the simulated user talks to the system.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    /// User acts straight into belief tracking.
    #[default]
    Acts,
    /// User acts realized as text, parsed by NLU; system acts realized by NLG.
    Text,
}

/// Policy selection for configuration files.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PolicyKind {
    #[default]
    Handcrafted,
    Rl {
        model: PathBuf,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub domain: String,
    pub policy: PolicyKind,
    pub n_dialogs: usize,
    pub seed: u64,
    pub sim: SimConfig,
    pub route: Route,
    /// Run each dialog on its own bus; otherwise call the components directly.
    pub over_bus: bool,
    /// Worker threads; dialogs are sharded by index.
    pub threads: usize,
    /// Services to host out of process, by name or name prefix.
    pub remote: Vec<String>,
    pub max_cycles: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            domain: "mensa".into(),
            policy: PolicyKind::Handcrafted,
            n_dialogs: 500,
            seed: 7,
            sim: SimConfig::default(),
            route: Route::Acts,
            over_bus: true,
            threads: 1,
            remote: Vec::new(),
            max_cycles: 1000,
        }
    }
}

impl EvalConfig {
    pub fn from_json(text: &str) -> Result<Self, SimError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SimError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DialogRecord {
    pub index: usize,
    pub seed: u64,
    pub success: bool,
    pub turns: usize,
    pub reward: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub dialogs: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub avg_turns: f64,
    pub avg_reward: f64,
}

impl EvalMetrics {
    /// Aggregates records in index order, so sharded runs give the same
    /// floating-point sums as sequential ones.
    pub fn from_records(records: &[DialogRecord]) -> Self {
        let mut sorted: Vec<&DialogRecord> = records.iter().collect();
        sorted.sort_by_key(|r| r.index);
        let n = sorted.len();
        let successes = sorted.iter().filter(|r| r.success).count();
        let turns: f64 = sorted.iter().map(|r| r.turns as f64).sum();
        let reward: f64 = sorted.iter().map(|r| r.reward).sum();
        let div = |x: f64| if n == 0 { 0.0 } else { x / n as f64 };
        EvalMetrics {
            dialogs: n,
            successes,
            success_rate: div(successes as f64),
            avg_turns: div(turns),
            avg_reward: div(reward),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub metrics: EvalMetrics,
    pub records: Vec<DialogRecord>,
}

impl EvalReport {
    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<(), SimError> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    /// One row per dialog.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<(), SimError> {
        let mut w = csv::Writer::from_path(path)?;
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Seed of dialog `index` in a run seeded with `base` (splitmix64).
pub fn dialog_seed(base: u64, index: usize) -> u64 {
    let mut z = base.wrapping_add((index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct SimulatorService {
    make: Box<dyn Fn() -> Result<UserSimulator, SimError> + Send>,
    sim: UserSimulator,
    rules: Option<Arc<NluRuleSet>>,
    input: String,
    output: String,
}

impl Service for SimulatorService {
    fn handle(&mut self, inputs: &Inputs) -> Result<Outputs, ServiceError> {
        let sys: SysAct = inputs.latest(&self.input)?;
        match self.sim.step(&sys) {
            None => Outputs::new().with(SIM_OUTCOME, self.sim.outcome())?.with(DIALOG_END, ()),
            Some(acts) => match &self.rules {
                None => Outputs::new().with(&self.output, acts),
                Some(rules) => {
                    let ontology = self.sim_ontology();
                    let text = realize_user_acts(&acts, &ontology, rules, Some(&sys));
                    Outputs::new().with(&self.output, DomainUtterance { text, domain_switched: false })
                }
            },
        }
    }

    fn on_lifecycle(&mut self, event: LifecycleEvent) -> Result<(), ServiceError> {
        if event == LifecycleEvent::Start {
            self.sim = (self.make)().map_err(|e| ServiceError::new(e.to_string()))?;
        }
        Ok(())
    }
}

impl SimulatorService {
    fn sim_ontology(&self) -> Arc<crate::domain::Ontology> {
        self.sim.db().ontology_arc()
    }
}

/// `simulator`: answers `sys_act/<d>` with `user_acts/<d>` (or, with NLU
/// rules, with text on `user_utterance/<d>`) and closes the dialog with
/// `sim_outcome` and `dialog_end`.
pub fn simulator_service(
    db: Arc<EntityDatabase>,
    cfg: SimConfig,
    seed: u64,
    rules: Option<Arc<NluRuleSet>>,
) -> Result<ServiceEntry, SimError> {
    let d = db.ontology().name.clone();
    let input = scoped(SYS_ACT, &d);
    let output = if rules.is_some() { scoped(USER_UTTERANCE, &d) } else { scoped(USER_ACTS, &d) };
    let sim = UserSimulator::new(Arc::clone(&db), cfg, seed)?;
    let make = Box::new(move || UserSimulator::new(Arc::clone(&db), cfg, seed));
    let descriptor = ServiceDescriptor::new("simulator")
        .subscribe(&input, SubscriptionMode::Latest)
        .publish(&output)
        .publish(SIM_OUTCOME)
        .publish(DIALOG_END);
    Ok((descriptor, Box::new(SimulatorService { make, sim, rules, input, output })))
}

/// Everything a simulated dialog needs besides its configuration.
#[derive(Clone)]
pub struct Harness {
    pub db: Arc<EntityDatabase>,
    pub policy: Arc<dyn DialogPolicy>,
    pub rules: Option<Arc<NluRuleSet>>,
    pub catalog: Option<Arc<TemplateCatalog>>,
}

impl Harness {
    pub fn new(db: Arc<EntityDatabase>, policy: Arc<dyn DialogPolicy>) -> Self {
        Harness { db, policy, rules: None, catalog: None }
    }

    /// The bundled database domain with the policy selected by `cfg`, able
    /// to run either route.
    pub fn reference(cfg: &EvalConfig) -> Result<Self, SimError> {
        if !cfg.domain.eq_ignore_ascii_case("mensa") {
            return Err(SimError::Config(format!("no simulated-user database for domain {:?}", cfg.domain)));
        }
        let db = Arc::new(fixtures::mensa_database());
        let policy: Arc<dyn DialogPolicy> = match &cfg.policy {
            PolicyKind::Handcrafted => Arc::new(HandcraftedPolicy::new(Arc::clone(&db))),
            PolicyKind::Rl { model } => Arc::new(RlPolicy::new(DuelingQNetwork::<f64>::load(model)?, Arc::clone(&db))?),
        };
        Ok(Harness::new(db, policy).with_text(Arc::new(fixtures::mensa_rules()), Arc::new(fixtures::mensa_templates())))
    }

    /// Enables [`Route::Text`].
    pub fn with_text(mut self, rules: Arc<NluRuleSet>, catalog: Arc<TemplateCatalog>) -> Self {
        self.rules = Some(rules);
        self.catalog = Some(catalog);
        self
    }

    /// Services of one simulated dialog.
    pub fn services(&self, cfg: &EvalConfig, seed: u64) -> Result<Vec<ServiceEntry>, SimError> {
        let d = self.db.ontology().name.clone();
        let text = match cfg.route {
            Route::Acts => None,
            Route::Text => match (&self.rules, &self.catalog) {
                (Some(r), Some(c)) => Some((Arc::clone(r), Arc::clone(c))),
                _ => return Err(SimError::Config("text route needs NLU rules and templates".into())),
            },
        };
        let mut entries = vec![simulator_service(
            Arc::clone(&self.db),
            cfg.sim,
            seed,
            text.as_ref().map(|(r, _)| Arc::clone(r)),
        )?];
        entries.extend(bst_services(BstBackend::Database(Arc::clone(&self.db))));
        entries.push(policy_service(&d, Arc::clone(&self.policy)));
        entries.push(welcome_service(&d));
        if let Some((rules, catalog)) = text {
            entries.extend(nlu_services(self.db.ontology_arc(), rules));
            entries.extend(nlg_services(&d, catalog, NlgOptions::default()));
        }
        Ok(entries)
    }

    /// Runs dialog `index` of `cfg` on a fresh bus.
    pub fn run_bus_dialog(&self, cfg: &EvalConfig, index: usize) -> Result<(SimOutcome, DialogResult), SimError> {
        let seed = dialog_seed(cfg.seed, index);
        let placement = Placement::remote_prefixes(cfg.remote.clone());
        let mut system = assemble(self.services(cfg, seed)?, &placement)?;
        let result = system.bus.run_dialog(TopicName::new(DIALOG_START)?, (), cfg.max_cycles);
        system.shutdown();
        let result = result?;
        if let TerminationReason::HandlerError { service, cause } = &result.reason {
            return Err(SimError::Dialog { index, cause: format!("{service}: {cause}") });
        }
        let topic = TopicName::new(SIM_OUTCOME)?;
        let outcome = result
            .on_topic(&topic)
            .next()
            .map(|e| e.decode::<SimOutcome>())
            .transpose()?
            .ok_or_else(|| SimError::Dialog { index, cause: format!("ended without outcome: {:?}", result.reason) })?;
        Ok((outcome, result))
    }

    fn run_one(&self, cfg: &EvalConfig, index: usize) -> Result<SimOutcome, SimError> {
        if cfg.over_bus {
            Ok(self.run_bus_dialog(cfg, index)?.0)
        } else {
            run_episode(self.policy.as_ref(), &self.db, &cfg.sim, dialog_seed(cfg.seed, index))
        }
    }
}

/// Simulates one dialog by calling tracker and policy directly.
pub fn run_episode(
    policy: &dyn DialogPolicy,
    db: &Arc<EntityDatabase>,
    cfg: &SimConfig,
    seed: u64,
) -> Result<SimOutcome, SimError> {
    let mut sim = UserSimulator::new(Arc::clone(db), *cfg, seed)?;
    let pk = db.ontology().primary_key.clone();
    let mut bs = BeliefState::new(db);
    let mut sys = SysAct::new(SysActType::Welcome);
    while let Some(acts) = sim.step(&sys) {
        bs.record_system_act(&sys, &pk);
        bs = crate::state::bst_update(&bs, &acts, db)?;
        sys = policy.act(&bs)?;
    }
    Ok(sim.outcome())
}

/// Runs `cfg.n_dialogs` seeded dialogs and aggregates their outcomes.
pub fn run_evaluation(harness: &Harness, cfg: &EvalConfig) -> Result<EvalReport, SimError> {
    let record = |index: usize| -> Result<DialogRecord, SimError> {
        let o = harness.run_one(cfg, index)?;
        Ok(DialogRecord { index, seed: dialog_seed(cfg.seed, index), success: o.success, turns: o.turns, reward: o.reward })
    };
    let threads = cfg.threads.max(1).min(cfg.n_dialogs.max(1));
    let mut records = if threads == 1 {
        (0..cfg.n_dialogs).map(record).collect::<Result<Vec<_>, _>>()?
    } else {
        let collected: Mutex<Vec<Result<DialogRecord, SimError>>> = Mutex::new(Vec::new());
        std::thread::scope(|scope| {
            for shard in 0..threads {
                let collected = &collected;
                let record = &record;
                scope.spawn(move || {
                    let mine: Vec<_> = (shard..cfg.n_dialogs).step_by(threads).map(record).collect();
                    collected.lock().unwrap_or_else(|p| p.into_inner()).extend(mine);
                });
            }
        });
        collected.into_inner().unwrap_or_else(|p| p.into_inner()).into_iter().collect::<Result<Vec<_>, _>>()?
    };
    records.sort_by_key(|r| r.index);
    Ok(EvalReport { metrics: EvalMetrics::from_records(&records), records })
}
