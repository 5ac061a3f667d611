//! Prioritized experience replay with proportional sampling
//! `P(i) = p_i^α / Σ_j p_j^α` and importance weights
//! `w_i = (N P(i))^-β`, normalized by the largest weight in the buffer.

use rand::Rng;

use super::PolicyError;
use crate::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Experience<S> {
    pub state: Vec<S>,
    pub action: usize,
    pub reward: S,
    pub next_state: Vec<S>,
    pub terminal: bool,
    /// Valid actions in `next_state`; empty means all are valid.
    pub next_mask: Vec<bool>,
}

/// Complete binary tree over `capacity` leaves combining with `op`.
#[derive(Clone, Debug)]
struct SegmentTree<S> {
    leaves: usize,
    nodes: Vec<S>,
    identity: S,
    op: fn(S, S) -> S,
}

impl<S: Scalar> SegmentTree<S> {
    fn new(capacity: usize, identity: S, op: fn(S, S) -> S) -> Self {
        let leaves = capacity.next_power_of_two();
        SegmentTree { leaves, nodes: vec![identity; 2 * leaves], identity, op }
    }

    fn set(&mut self, index: usize, value: S) {
        let mut i = index + self.leaves;
        self.nodes[i] = value;
        while i > 1 {
            i /= 2;
            self.nodes[i] = (self.op)(self.nodes[2 * i], self.nodes[2 * i + 1]);
        }
    }

    fn get(&self, index: usize) -> S {
        self.nodes[index + self.leaves]
    }

    fn root(&self) -> S {
        if self.nodes.len() > 1 {
            self.nodes[1]
        } else {
            self.identity
        }
    }

    /// Sum trees only: smallest index whose prefix sum exceeds `mass`.
    fn find_prefix(&self, mut mass: S) -> usize {
        let mut i = 1;
        while i < self.leaves {
            let left = self.nodes[2 * i];
            if mass < left {
                i *= 2;
            } else {
                mass -= left;
                i = 2 * i + 1;
            }
        }
        i - self.leaves
    }
}

/// A sampled batch.
#[derive(Clone, Debug)]
pub struct Batch<'a, S> {
    pub experiences: Vec<&'a Experience<S>>,
    pub indices: Vec<usize>,
    pub weights: Vec<S>,
}

#[derive(Clone, Debug)]
pub struct PrioritizedReplay<S> {
    capacity: usize,
    alpha: S,
    data: Vec<Experience<S>>,
    next: usize,
    priorities: Vec<S>,
    sums: SegmentTree<S>,
    mins: SegmentTree<S>,
    maxes: SegmentTree<S>,
}

fn add<S: Scalar>(a: S, b: S) -> S {
    a + b
}

fn min<S: Scalar>(a: S, b: S) -> S {
    a.min(b)
}

fn max<S: Scalar>(a: S, b: S) -> S {
    a.max(b)
}

impl<S: Scalar> PrioritizedReplay<S> {
    pub fn new(capacity: usize, alpha: f64) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        PrioritizedReplay {
            capacity,
            alpha: S::of(alpha),
            data: Vec::with_capacity(capacity.min(1 << 16)),
            next: 0,
            priorities: Vec::new(),
            sums: SegmentTree::new(capacity, S::zero(), add),
            mins: SegmentTree::new(capacity, S::infinity(), min),
            maxes: SegmentTree::new(capacity, S::zero(), max),
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn get(&self, index: usize) -> Option<&Experience<S>> {
        self.data.get(index)
    }

    pub fn priority(&self, index: usize) -> S {
        self.priorities[index]
    }

    /// Largest stored priority, 1 for an empty buffer.
    pub fn max_priority(&self) -> S {
        if self.is_empty() {
            S::one()
        } else {
            self.maxes.root()
        }
    }

    /// Stores an experience, overwriting the oldest one at capacity. Without
    /// an explicit priority the current maximum is used.
    pub fn add(&mut self, experience: Experience<S>, priority: Option<S>) -> usize {
        let p = priority.unwrap_or_else(|| self.max_priority());
        let index = self.next;
        if self.data.len() < self.capacity {
            self.data.push(experience);
            self.priorities.push(p);
        } else {
            self.data[index] = experience;
        }
        self.set_priority(index, p);
        self.next = (self.next + 1) % self.capacity;
        index
    }

    fn set_priority(&mut self, index: usize, p: S) {
        assert!(p > S::zero(), "priorities must be positive");
        self.priorities[index] = p;
        let scaled = p.powf(self.alpha);
        self.sums.set(index, scaled);
        self.mins.set(index, scaled);
        self.maxes.set(index, p);
    }

    pub fn update_priorities(&mut self, indices: &[usize], priorities: &[S]) {
        for (i, p) in indices.iter().zip(priorities) {
            self.set_priority(*i, *p);
        }
    }

    /// Sampling probability of each stored entry.
    pub fn probabilities(&self) -> Vec<S> {
        let total = self.sums.root();
        (0..self.len()).map(|i| self.sums.get(i) / total).collect()
    }

    /// Importance weight of entry `index`, before normalization.
    pub fn raw_weight(&self, index: usize, beta: f64) -> S {
        let n = S::of(self.len() as f64);
        (n * self.sums.get(index) / self.sums.root()).powf(-S::of(beta))
    }

    /// Draws `batch_size` indices independently from `P`.
    pub fn sample<R: Rng + ?Sized>(&self, batch_size: usize, beta: f64, rng: &mut R) -> Result<Batch<'_, S>, PolicyError> {
        if self.len() < batch_size || self.is_empty() {
            return Err(PolicyError::BufferTooSmall { size: self.len(), needed: batch_size.max(1) });
        }
        let total = self.sums.root();
        let n = S::of(self.len() as f64);
        let max_weight = (n * self.mins.root() / total).powf(-S::of(beta));
        let mut indices = Vec::with_capacity(batch_size);
        let mut weights = Vec::with_capacity(batch_size);
        for _ in 0..batch_size {
            let mass = S::of(rng.random::<f64>()) * total;
            let i = self.find_index(mass);
            indices.push(i);
            weights.push(self.raw_weight(i, beta) / max_weight);
        }
        let experiences = indices.iter().map(|i| &self.data[*i]).collect();
        Ok(Batch { experiences, indices, weights })
    }

    fn find_index(&self, mass: S) -> usize {
        let i = self.sums.find_prefix(mass);
        if i < self.len() && self.sums.get(i) > S::zero() {
            return i;
        }
        // Rounding pushed the draw past the last occupied leaf.
        (0..self.len()).rev().find(|j| self.sums.get(*j) > S::zero()).unwrap_or(0)
    }
}
