use serde::{Deserialize, Serialize};

use crate::acts::UserActType;
use crate::domain::{same_value, Ontology, DONTCARE};
use crate::state::BeliefState;
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlotFill {
    Filled,
    DontCare,
    Empty,
}

const MATCH_BUCKETS: usize = 4;

/// Fixed-length 0/1 encoding of a belief state: per informable slot a
/// filled/dontcare/empty one-hot triple, the match count bucketed over
/// {0, 1, 2-4, 5+}, and the last user act types as a multi-hot block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeliefVector(pub Vec<f64>);

impl BeliefVector {
    pub fn dimension(ontology: &Ontology) -> usize {
        3 * ontology.informable.len() + MATCH_BUCKETS + UserActType::ALL.len()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_scalars<S: Scalar>(&self) -> Vec<S> {
        self.0.iter().map(|v| S::of(*v)).collect()
    }
}

fn bucket(n: usize) -> usize {
    match n {
        0 => 0,
        1 => 1,
        2..=4 => 2,
        _ => 3,
    }
}

pub fn vectorize_belief(bs: &BeliefState, ontology: &Ontology) -> BeliefVector {
    let mut v = vec![0.0; BeliefVector::dimension(ontology)];
    for (i, slot) in ontology.informable_slots().enumerate() {
        let fill = match bs.value(slot) {
            Some(value) if same_value(value, DONTCARE) => SlotFill::DontCare,
            Some(_) => SlotFill::Filled,
            None => SlotFill::Empty,
        };
        let offset = match fill {
            SlotFill::Filled => 0,
            SlotFill::DontCare => 1,
            SlotFill::Empty => 2,
        };
        v[3 * i + offset] = 1.0;
    }
    let base = 3 * ontology.informable.len();
    v[base + bucket(bs.num_matches)] = 1.0;
    let base = base + MATCH_BUCKETS;
    for (i, t) in UserActType::ALL.iter().enumerate() {
        if bs.last_act_types.contains(t) {
            v[base + i] = 1.0;
        }
    }
    BeliefVector(v)
}

/// Reads the per-slot fill states back out of a vector.
pub fn decode_filled_mask(v: &BeliefVector, ontology: &Ontology) -> Vec<SlotFill> {
    (0..ontology.informable.len())
        .map(|i| {
            let triple = &v.0[3 * i..3 * i + 3];
            if triple[0] > 0.5 {
                SlotFill::Filled
            } else if triple[1] > 0.5 {
                SlotFill::DontCare
            } else {
                SlotFill::Empty
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acts::UserAct;
    use crate::fixtures;
    use crate::state::bst_update;

    #[test]
    fn empty_and_filled() {
        let db = fixtures::mensa_database();
        let o = db.ontology();
        let s0 = BeliefState::new(&db);
        let v0 = vectorize_belief(&s0, o);
        assert_eq!(v0.len(), 20);
        assert_eq!(&v0.0[..6], &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        assert_eq!(&v0.0[6..10], &[0.0, 0.0, 0.0, 1.0]);
        let s1 = bst_update(&s0, &[UserAct::inform("vegan", "true")], &db).unwrap();
        let v1 = vectorize_belief(&s1, o);
        let flipped: Vec<usize> = (0..6).filter(|i| v0.0[*i] != v1.0[*i]).collect();
        assert_eq!(flipped, [3, 5]);
        assert!(v1.0.iter().all(|x| *x == 0.0 || *x == 1.0));
        assert_eq!(decode_filled_mask(&v1, o), [SlotFill::Empty, SlotFill::Filled]);
    }
}
