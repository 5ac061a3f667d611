use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::eval::dialog_seed;
use super::{SimConfig, SimError, UserSimulator};
use crate::acts::{SysAct, SysActType, UserActType};
use crate::domain::EntityDatabase;
use crate::policy::replay::Experience;
use crate::policy::rl::{DqnConfig, DqnTrainer, RlPolicy};
use crate::policy::{vectorize_belief, ActionSpace, BeliefVector};
use crate::state::{bst_update, BeliefState};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub dqn: DqnConfig,
    pub sim: SimConfig,
    pub episodes: usize,
    /// Base seed of the training dialogs; keep it apart from evaluation seeds.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { dqn: DqnConfig::default(), sim: SimConfig::default(), episodes: 5000, seed: 1_000_003 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub episodes: usize,
    pub train_steps: usize,
    /// Success rate over the last tenth of the training dialogs.
    pub late_success_rate: f64,
    /// Mean loss over the last tenth of the updates.
    pub late_loss: Option<f64>,
}

/// Trains a Q-network against the simulator with epsilon-greedy
/// exploration; each system decision is one transition, rewarded per user
/// turn that follows it.
pub fn train_rl(db: Arc<EntityDatabase>, cfg: &TrainConfig) -> Result<(RlPolicy<f64>, TrainReport), SimError> {
    let ontology = db.ontology();
    let actions = ActionSpace::for_ontology(ontology);
    let dim = BeliefVector::dimension(ontology);
    let mut trainer = DqnTrainer::<f64>::new(cfg.dqn.clone(), dim, actions.len())?;
    let pk = ontology.primary_key.clone();
    let reward = cfg.sim.reward;
    let tail = (cfg.episodes / 10).max(1);
    let mut late_successes = 0usize;
    let mut losses = Vec::new();

    for episode in 0..cfg.episodes {
        let progress = episode as f64 / cfg.episodes.max(1) as f64;
        let mut sim = UserSimulator::new(Arc::clone(&db), cfg.sim, dialog_seed(cfg.seed, episode))?;
        let welcome = SysAct::new(SysActType::Welcome);
        let Some(first) = sim.step(&welcome) else { continue };
        let mut bs = bst_update(&BeliefState::new(&db), &first, &db)?;
        let mut user_done = first.iter().any(|a| a.act_type == UserActType::Bye);
        while !user_done {
            let state = vectorize_belief(&bs, ontology).0;
            let mask = actions.mask(&bs, &db);
            let action = trainer.act(&state, &mask, progress)?;
            let sys = actions.instantiate(action, &bs, &db);
            let experience = match sim.step(&sys) {
                None => Experience {
                    next_state: state.clone(),
                    state,
                    action,
                    reward: reward.turn_reward(sim.is_success(), true),
                    terminal: true,
                    next_mask: Vec::new(),
                },
                Some(acts) => {
                    bs.record_system_act(&sys, &pk);
                    bs = bst_update(&bs, &acts, &db)?;
                    user_done = acts.iter().any(|a| a.act_type == UserActType::Bye);
                    let terminal = user_done || sim.turns() >= cfg.sim.max_turns;
                    Experience {
                        state,
                        action,
                        reward: reward.turn_reward(terminal && sim.is_success(), terminal),
                        next_state: vectorize_belief(&bs, ontology).0,
                        terminal,
                        next_mask: actions.mask(&bs, &db),
                    }
                }
            };
            let terminal = experience.terminal;
            if let Some(loss) = trainer.observe(experience, progress)? {
                losses.push(loss);
            }
            if terminal {
                break;
            }
        }
        if episode + tail >= cfg.episodes && sim.is_success() {
            late_successes += 1;
        }
    }
    let late = &losses[losses.len() - losses.len() / 10..];
    let report = TrainReport {
        episodes: cfg.episodes,
        train_steps: trainer.train_steps(),
        late_success_rate: late_successes as f64 / tail.min(cfg.episodes.max(1)) as f64,
        late_loss: if late.is_empty() { None } else { Some(late.iter().sum::<f64>() / late.len() as f64) },
    };
    Ok((RlPolicy::new(trainer.into_network(), db)?, report))
}
