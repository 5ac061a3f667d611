use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::domain::{same_value, EntityDatabase, Row, DONTCARE};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GoalConfig {
    pub max_constraints: usize,
    pub max_requests: usize,
    /// Probability that a chosen constraint slot is `dontcare`.
    pub dontcare_prob: f64,
    pub max_attempts: usize,
}

impl Default for GoalConfig {
    fn default() -> Self {
        GoalConfig { max_constraints: 3, max_requests: 3, dontcare_prob: 0.0, max_attempts: 1000 }
    }
}

/// What the simulated user wants. `requests` maps each requested slot to
/// whether it has been answered.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserGoal {
    pub constraints: BTreeMap<String, String>,
    pub requests: BTreeMap<String, bool>,
}

impl UserGoal {
    /// Constraints other than `dontcare`.
    pub fn concrete(&self) -> impl Iterator<Item = (&String, &String)> {
        self.constraints.iter().filter(|(_, v)| !same_value(v, DONTCARE))
    }

    pub fn satisfied_by(&self, row: &Row) -> bool {
        self.concrete().all(|(slot, v)| row.get(slot).is_some_and(|r| same_value(r, v)))
    }

    pub fn requests_fulfilled(&self) -> bool {
        self.requests.values().all(|done| *done)
    }
}

/// Draws constraints uniformly from the ontology until some entity matches,
/// then 1 to `max_requests` requests among the requestable slots that are
/// neither the primary key nor constrained.
pub fn sample_goal<R: Rng + ?Sized>(db: &EntityDatabase, cfg: &GoalConfig, rng: &mut R) -> Result<UserGoal, SimError> {
    if db.is_empty() {
        return Err(SimError::EmptyDatabase);
    }
    let ontology = db.ontology();
    let slots: Vec<&str> = ontology.informable_slots().filter(|s| *s != ontology.primary_key).collect();
    let most = cfg.max_constraints.min(slots.len());
    for _ in 0..cfg.max_attempts.max(1) {
        let mut constraints = BTreeMap::new();
        if most > 0 {
            let k = rng.random_range(1..=most);
            let mut chosen = slots.clone();
            chosen.shuffle(rng);
            for slot in chosen.into_iter().take(k) {
                let values = &ontology.informable[slot];
                let value = if cfg.dontcare_prob > 0.0 && rng.random_bool(cfg.dontcare_prob.min(1.0)) {
                    DONTCARE.to_string()
                } else {
                    values[rng.random_range(0..values.len())].clone()
                };
                constraints.insert(slot.to_string(), value);
            }
        }
        if db.query_entities(&constraints)?.is_empty() {
            continue;
        }
        let mut pool: Vec<&String> = ontology
            .requestable
            .iter()
            .filter(|s| **s != ontology.primary_key && !constraints.contains_key(*s))
            .collect();
        let mut requests = BTreeMap::new();
        let n = cfg.max_requests.min(pool.len());
        if n > 0 {
            let k = rng.random_range(1..=n);
            pool.shuffle(rng);
            requests = pool.into_iter().take(k).map(|s| (s.clone(), false)).collect();
        }
        return Ok(UserGoal { constraints, requests });
    }
    Err(SimError::UnsatisfiableOntology(cfg.max_attempts.max(1)))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::fixtures;

    #[test]
    fn goals_are_satisfiable_and_reproducible() {
        let db = fixtures::mensa_database();
        let cfg = GoalConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let g = sample_goal(&db, &cfg, &mut rng).unwrap();
            assert!(!db.query_entities(&g.constraints).unwrap().is_empty());
            assert!(!g.constraints.contains_key("name") && !g.requests.contains_key("name"));
            assert!((1..=3).contains(&g.requests.len()));
            assert!(g.requests.keys().all(|r| !g.constraints.contains_key(r)));
        }
        let a = sample_goal(&db, &cfg, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let b = sample_goal(&db, &cfg, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn singleton_database() {
        let ontology = fixtures::mensa_ontology();
        let row = fixtures::mensa_database().rows()[0].clone();
        let db = EntityDatabase::new(Arc::clone(&ontology), vec![row.clone()]).unwrap();
        let g = sample_goal(&db, &GoalConfig::default(), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(g.satisfied_by(&row));
    }
}
