//! Deep Q-learning over the dueling network with prioritized replay, and
//! the trained policy as used in dialogs.

use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::qnet::{DuelingQNetwork, Optimizer, OptimizerKind};
use super::replay::{Experience, PrioritizedReplay};
use super::{vectorize_belief, ActionSpace, BeliefVector, PolicyError};
use crate::acts::{SysAct, SysActType, UserActType};
use crate::domain::EntityDatabase;
use crate::state::BeliefState;
use crate::Scalar;

/// Training hyperparameters; every field has a default, so `{}` is a valid
/// configuration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DqnConfig {
    pub hidden: Vec<usize>,
    pub gamma: f64,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub batch_size: usize,
    pub replay_capacity: usize,
    pub alpha: f64,
    pub beta_start: f64,
    pub beta_end: f64,
    pub priority_eps: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub target_sync_steps: usize,
    /// Experiences collected before the first update.
    pub warmup: usize,
    /// Environment steps per gradient step.
    pub train_every: usize,
    /// Rescale gradients whose L2 norm exceeds this.
    pub clip_norm: Option<f64>,
    pub seed: u64,
}

impl Default for DqnConfig {
    fn default() -> Self {
        DqnConfig {
            hidden: vec![128, 128],
            gamma: 0.99,
            learning_rate: 1e-3,
            optimizer: OptimizerKind::Adam,
            batch_size: 32,
            replay_capacity: 20_000,
            alpha: 0.6,
            beta_start: 0.4,
            beta_end: 1.0,
            priority_eps: 1e-6,
            epsilon_start: 0.5,
            epsilon_end: 0.05,
            target_sync_steps: 500,
            warmup: 256,
            train_every: 1,
            clip_norm: Some(10.0),
            seed: 0,
        }
    }
}

impl DqnConfig {
    pub fn from_json(text: &str) -> Result<Self, PolicyError> {
        let config: DqnConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PolicyError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), PolicyError> {
        let bad = |m: &str| Err(PolicyError::Config(m.to_string()));
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1]");
        }
        if self.batch_size == 0 || self.replay_capacity < self.batch_size {
            return bad("need 0 < batch_size <= replay_capacity");
        }
        if self.learning_rate <= 0.0 || self.priority_eps <= 0.0 {
            return bad("learning_rate and priority_eps must be positive");
        }
        if self.target_sync_steps == 0 || self.train_every == 0 {
            return bad("target_sync_steps and train_every must be positive");
        }
        Ok(())
    }

    /// Linear interpolation by training progress in [0, 1].
    pub fn epsilon(&self, progress: f64) -> f64 {
        lerp(self.epsilon_start, self.epsilon_end, progress)
    }

    pub fn beta(&self, progress: f64) -> f64 {
        lerp(self.beta_start, self.beta_end, progress)
    }
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t.clamp(0.0, 1.0)
}

/// Highest-valued action among `mask` (all when empty), lowest index on ties.
pub fn greedy<S: Scalar>(q: &[S], mask: &[bool]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, v) in q.iter().enumerate() {
        if !mask.is_empty() && !mask[i] {
            continue;
        }
        if best.is_none_or(|b| *v > q[b]) {
            best = Some(i);
        }
    }
    best
}

/// Epsilon-greedy choice: uniform with probability `epsilon`, else argmax.
pub fn select_action<S: Scalar, R: Rng + ?Sized>(
    net: &DuelingQNetwork<S>,
    s: &[S],
    epsilon: f64,
    rng: &mut R,
) -> Result<usize, PolicyError> {
    select_action_masked(net, s, &[], epsilon, rng)
}

/// [`select_action`] restricted to the actions allowed by `mask`.
pub fn select_action_masked<S: Scalar, R: Rng + ?Sized>(
    net: &DuelingQNetwork<S>,
    s: &[S],
    mask: &[bool],
    epsilon: f64,
    rng: &mut R,
) -> Result<usize, PolicyError> {
    if epsilon > 0.0 && rng.random::<f64>() < epsilon {
        let valid: Vec<usize> = (0..net.n_actions()).filter(|i| mask.is_empty() || mask[*i]).collect();
        if valid.is_empty() {
            return Err(PolicyError::NoValidAction);
        }
        return Ok(valid[rng.random_range(0..valid.len())]);
    }
    let q = net.forward(s)?;
    greedy(&q, mask).ok_or(PolicyError::NoValidAction)
}

/// TD target `r + γ max_a' Q_target(s', a')`, just `r` at terminals.
pub fn td_target<S: Scalar>(target: &DuelingQNetwork<S>, e: &Experience<S>, gamma: S) -> Result<S, PolicyError> {
    if e.terminal {
        return Ok(e.reward);
    }
    let q = target.forward(&e.next_state)?;
    let best = greedy(&q, &e.next_mask).ok_or(PolicyError::NoValidAction)?;
    Ok(e.reward + gamma * q[best])
}

/// Importance-weighted loss `(1/B) Σ w_i δ_i²` with its gradient and the
/// TD errors `δ_i = Q(s_i, a_i) - y_i`.
pub fn batch_loss_gradient<S: Scalar>(
    net: &DuelingQNetwork<S>,
    target: &DuelingQNetwork<S>,
    experiences: &[&Experience<S>],
    weights: &[S],
    gamma: S,
) -> Result<(S, Vec<S>, Vec<S>), PolicyError> {
    let b = S::of(experiences.len() as f64);
    let mut grad = vec![S::zero(); net.num_params()];
    let mut loss = S::zero();
    let mut deltas = Vec::with_capacity(experiences.len());
    let mut dq = vec![S::zero(); net.n_actions()];
    for (e, w) in experiences.iter().zip(weights) {
        let y = td_target(target, e, gamma)?;
        let cache = net.forward_cached(&e.state)?;
        let delta = cache.q[e.action] - y;
        loss += *w * delta * delta / b;
        dq.iter_mut().for_each(|d| *d = S::zero());
        dq[e.action] = S::of(2.0) * *w * delta / b;
        net.accumulate_gradient(&cache, &dq, &mut grad);
        deltas.push(delta);
    }
    Ok((loss, grad, deltas))
}

/// Settings of one [`train_batch`] step.
#[derive(Clone, Copy, Debug)]
pub struct TrainStep {
    pub batch_size: usize,
    pub gamma: f64,
    pub beta: f64,
    pub priority_eps: f64,
    pub clip_norm: Option<f64>,
}

/// One gradient step on a prioritized batch; refreshes the sampled
/// priorities to `|δ| + ε_p` and returns the batch loss.
pub fn train_batch<S: Scalar, R: Rng + ?Sized>(
    net: &mut DuelingQNetwork<S>,
    target: &DuelingQNetwork<S>,
    buf: &mut PrioritizedReplay<S>,
    optimizer: &mut Optimizer<S>,
    step: TrainStep,
    rng: &mut R,
) -> Result<S, PolicyError> {
    let batch = buf.sample(step.batch_size, step.beta, rng)?;
    let (loss, mut grad, deltas) =
        batch_loss_gradient(net, target, &batch.experiences, &batch.weights, S::of(step.gamma))?;
    let indices = batch.indices;
    if let Some(limit) = step.clip_norm {
        let norm = grad.iter().fold(S::zero(), |a, g| a + *g * *g).sqrt();
        if norm > S::of(limit) {
            let scale = S::of(limit) / norm;
            grad.iter_mut().for_each(|g| *g *= scale);
        }
    }
    optimizer.step(net.params_mut(), &grad);
    let priorities: Vec<S> = deltas.iter().map(|d| d.abs() + S::of(step.priority_eps)).collect();
    buf.update_priorities(&indices, &priorities);
    Ok(loss)
}

/// Online/target network pair, optimizer and replay buffer.
pub struct DqnTrainer<S: Scalar> {
    config: DqnConfig,
    online: DuelingQNetwork<S>,
    target: DuelingQNetwork<S>,
    optimizer: Optimizer<S>,
    replay: PrioritizedReplay<S>,
    rng: ChaCha8Rng,
    env_steps: usize,
    train_steps: usize,
}

impl<S: Scalar> DqnTrainer<S> {
    pub fn new(config: DqnConfig, input_dim: usize, n_actions: usize) -> Result<Self, PolicyError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let online = DuelingQNetwork::new(input_dim, &config.hidden, n_actions, &mut rng);
        let optimizer = Optimizer::new(config.optimizer, config.learning_rate, online.num_params());
        let replay = PrioritizedReplay::new(config.replay_capacity, config.alpha);
        Ok(DqnTrainer {
            target: online.clone(),
            online,
            optimizer,
            replay,
            rng,
            config,
            env_steps: 0,
            train_steps: 0,
        })
    }

    pub fn config(&self) -> &DqnConfig {
        &self.config
    }

    pub fn network(&self) -> &DuelingQNetwork<S> {
        &self.online
    }

    pub fn into_network(self) -> DuelingQNetwork<S> {
        self.online
    }

    pub fn replay(&self) -> &PrioritizedReplay<S> {
        &self.replay
    }

    pub fn train_steps(&self) -> usize {
        self.train_steps
    }

    pub fn act(&mut self, s: &[S], mask: &[bool], progress: f64) -> Result<usize, PolicyError> {
        let epsilon = self.config.epsilon(progress);
        select_action_masked(&self.online, s, mask, epsilon, &mut self.rng)
    }

    /// Stores a transition and trains when due; returns the loss of the
    /// update if one happened.
    pub fn observe(&mut self, experience: Experience<S>, progress: f64) -> Result<Option<S>, PolicyError> {
        self.replay.add(experience, None);
        self.env_steps += 1;
        let ready = self.replay.len() >= self.config.warmup.max(self.config.batch_size);
        if !ready || !self.env_steps.is_multiple_of(self.config.train_every) {
            return Ok(None);
        }
        let step = TrainStep {
            batch_size: self.config.batch_size,
            gamma: self.config.gamma,
            beta: self.config.beta(progress),
            priority_eps: self.config.priority_eps,
            clip_norm: self.config.clip_norm,
        };
        let loss = train_batch(&mut self.online, &self.target, &mut self.replay, &mut self.optimizer, step, &mut self.rng)?;
        self.train_steps += 1;
        if self.train_steps.is_multiple_of(self.config.target_sync_steps) {
            self.target = self.online.clone();
        }
        Ok(Some(loss))
    }
}

/// A trained network acting greedily over the masked action set of a
/// database domain. Opening and closing are fixed: `Welcome` before the
/// first user turn and `Bye` after the user's bye.
#[derive(Clone, Debug)]
pub struct RlPolicy<S> {
    net: DuelingQNetwork<S>,
    actions: ActionSpace,
    db: Arc<EntityDatabase>,
}

impl<S: Scalar> RlPolicy<S> {
    pub fn new(net: DuelingQNetwork<S>, db: Arc<EntityDatabase>) -> Result<Self, PolicyError> {
        let actions = ActionSpace::for_ontology(db.ontology());
        let input = BeliefVector::dimension(db.ontology());
        if net.input_dim() != input {
            return Err(PolicyError::DimensionMismatch { expected: input, actual: net.input_dim() });
        }
        if net.n_actions() != actions.len() {
            return Err(PolicyError::DimensionMismatch { expected: actions.len(), actual: net.n_actions() });
        }
        Ok(RlPolicy { net, actions, db })
    }

    pub fn network(&self) -> &DuelingQNetwork<S> {
        &self.net
    }

    pub fn actions(&self) -> &ActionSpace {
        &self.actions
    }

    pub fn act(&self, bs: &BeliefState) -> Result<SysAct, PolicyError> {
        if bs.has_act(UserActType::Bye) {
            return Ok(SysAct::new(SysActType::Bye));
        }
        if bs.turn == 0 && bs.last_act_types.is_empty() {
            return Ok(SysAct::new(SysActType::Welcome));
        }
        let s = vectorize_belief(bs, self.db.ontology()).to_scalars::<S>();
        let mask = self.actions.mask(bs, &self.db);
        let q = self.net.forward(&s)?;
        let index = greedy(&q, &mask).ok_or(PolicyError::NoValidAction)?;
        Ok(self.actions.instantiate(index, bs, &self.db))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn greedy_ties_and_masks() {
        assert_eq!(greedy(&[-1.0, 1.0, 3.0], &[]), Some(2));
        assert_eq!(greedy(&[2.0, 2.0, 1.0], &[]), Some(0));
        assert_eq!(greedy(&[5.0, 2.0, 1.0], &[false, true, true]), Some(1));
        assert_eq!(greedy::<f64>(&[5.0], &[false]), None);
    }

    #[test]
    fn epsilon_zero_is_argmax_and_one_is_reproducible() {
        let mut net = DuelingQNetwork::<f64>::zeros(1, &[], 3);
        net.set_heads(1.0, &[0.0, 2.0, 4.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(select_action(&net, &[0.0], 0.0, &mut rng).unwrap(), 2);
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..20).map(|_| select_action(&net, &[0.0], 1.0, &mut rng).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
        assert!(draw(9).iter().any(|a| *a != 2));
    }

    #[test]
    fn schedules_and_config_file() {
        let c = DqnConfig::from_json(r#"{"gamma": 0.9}"#).unwrap();
        assert_eq!(c.gamma, 0.9);
        assert_eq!(c.hidden, [128, 128]);
        assert!((c.epsilon(0.0) - 0.5).abs() < 1e-12 && (c.epsilon(1.0) - 0.05).abs() < 1e-12);
        assert!((c.beta(0.5) - 0.7).abs() < 1e-12);
        assert!(DqnConfig::from_json(r#"{"batch_size": 0}"#).is_err());
    }

    #[test]
    fn single_transition_loss_shrinks() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut net = DuelingQNetwork::<f64>::new(3, &[8], 2, &mut rng);
        let target = net.clone();
        let mut buf = PrioritizedReplay::new(4, 0.6);
        let e = Experience { state: vec![1.0, 0.0, 0.5], action: 1, reward: 2.0, next_state: vec![0.0; 3], terminal: false, next_mask: vec![] };
        buf.add(e, None);
        let mut opt = Optimizer::new(OptimizerKind::Sgd, 0.05, net.num_params());
        let step = TrainStep { batch_size: 1, gamma: 0.0, beta: 1.0, priority_eps: 1e-6, clip_norm: None };
        let first = train_batch(&mut net, &target, &mut buf, &mut opt, step, &mut rng).unwrap();
        let mut last = first;
        for _ in 0..200 {
            last = train_batch(&mut net, &target, &mut buf, &mut opt, step, &mut rng).unwrap();
        }
        assert!(first > 0.1 && last < 1e-6, "{first} -> {last}");
        assert!((net.forward(&[1.0, 0.0, 0.5]).unwrap()[1] - 2.0).abs() < 1e-3);
    }
}
