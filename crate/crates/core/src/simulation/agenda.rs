use serde::{Deserialize, Serialize};

use crate::acts::{UserAct, UserActType};

/// Stack of pending user acts; the top is the end of the vector.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Agenda {
    stack: Vec<UserAct>,
    pushes: usize,
    pops: usize,
}

impl Agenda {
    pub fn new() -> Self {
        Agenda::default()
    }

    pub fn push(&mut self, act: UserAct) {
        self.pushes += 1;
        self.stack.push(act);
    }

    pub fn pop(&mut self) -> Option<UserAct> {
        let act = self.stack.pop()?;
        self.pops += 1;
        Some(act)
    }

    pub fn peek(&self) -> Option<&UserAct> {
        self.stack.last()
    }

    /// Pops up to `n` acts sharing the type of the top act.
    pub fn pop_batch(&mut self, n: usize) -> Vec<UserAct> {
        let mut out = Vec::new();
        let Some(kind) = self.peek().map(|a| a.act_type) else { return out };
        while out.len() < n.max(1) && self.peek().is_some_and(|a| a.act_type == kind) {
            out.extend(self.pop());
        }
        out
    }

    /// Drops pending acts matching `pred`, counted as pops.
    pub fn remove_where(&mut self, pred: impl Fn(&UserAct) -> bool) {
        let before = self.stack.len();
        self.stack.retain(|a| !pred(a));
        self.pops += before - self.stack.len();
    }

    pub fn contains(&self, pred: impl Fn(&UserAct) -> bool) -> bool {
        self.stack.iter().any(pred)
    }

    /// Only the closing `Bye` is left.
    pub fn only_bye_left(&self) -> bool {
        self.stack.iter().all(|a| a.act_type == UserActType::Bye)
    }

    pub fn len(&self) -> usize {
        self.stack.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stack.is_empty()
    }

    pub fn pushes(&self) -> usize {
        self.pushes
    }

    pub fn pops(&self) -> usize {
        self.pops
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batch_stops_at_type_change() {
        let mut a = Agenda::new();
        a.push(UserAct::new(UserActType::Bye));
        a.push(UserAct::inform("x", "1"));
        a.push(UserAct::inform("y", "2"));
        a.push(UserAct::request("z"));
        assert_eq!(a.pop_batch(3), [UserAct::request("z")]);
        assert_eq!(a.pop_batch(5).len(), 2);
        assert!(a.only_bye_left());
        assert_eq!((a.pushes(), a.pops()), (4, 3));
    }
}
