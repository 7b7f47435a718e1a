//! The limited-information view of a system and a simulator that provides
//! it on top of an explicit model.
//!
//! A learner sees only the initial state, a target test, an upper bound on
//! the number of actions, a lower bound on the transition probabilities
//! under uniform choice, the available actions of a visited state and a
//! successor sampler. The simulator keeps track of the current hidden state,
//! so `succ` is only legal for actions available there.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{ActionId, Mdp, StateId};

/// Walks inside a known component give up after this many steps.
pub const NAVIGATION_CAP: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("action {action} is not available in the current state {state}")]
    NotAvailable { action: ActionId, state: StateId },
    #[error("no internal action is available in {0}")]
    Stuck(StateId),
    #[error("walk to {goal} did not arrive within {steps} steps")]
    NavigationCap { goal: StateId, steps: u64 },
}

pub trait LimitedInfoOracle {
    fn initial_state(&self) -> StateId;
    fn is_target(&self, s: StateId) -> bool;
    /// At least the number of actions of the system.
    fn action_bound(&self) -> usize;
    /// At most the smallest positive probability under uniform action choice.
    fn prob_floor(&self) -> f64;
    fn available_actions(&self, s: StateId) -> Vec<ActionId>;
    /// Plays `a` in the current state and returns the sampled successor.
    fn succ(&mut self, a: ActionId) -> Result<StateId, OracleError>;
    /// Moves back to the initial state.
    fn reset(&mut self);
    /// The state the system is currently in. Learners use this only to steer
    /// walks inside components they have already identified.
    fn position(&self) -> StateId;
    /// Random walk over `internal` actions until `goal` is the current state.
    /// Returns the number of steps taken.
    fn walk_to(&mut self, goal: StateId, internal: &[ActionId]) -> Result<u64, OracleError>;
}

/// Oracle backed by an explicit model that stays hidden from the learner.
#[derive(Clone, Debug)]
pub struct SimulatorOracle {
    model: Mdp,
    rng: ChaCha8Rng,
    position: StateId,
    q: f64,
    draws: u64,
}

/// Smallest |Av(s)|⁻¹ · P(s, a, s′) over all available pairs and positive entries.
pub fn uniform_prob_floor(m: &Mdp) -> f64 {
    m.actions()
        .flat_map(|a| {
            let k = m.available(m.owner(a)).len() as f64;
            m.transition(a).iter().map(move |(_, p)| p / k)
        })
        .fold(1.0, f64::min)
}

pub fn make_simulator(m: &Mdp, seed: u64) -> SimulatorOracle {
    SimulatorOracle {
        q: uniform_prob_floor(m),
        model: m.clone(),
        rng: ChaCha8Rng::seed_from_u64(seed),
        position: m.initial(),
        draws: 0,
    }
}

impl SimulatorOracle {
    /// Successor draws made so far, walks included.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    /// The hidden model, for test instrumentation.
    pub fn backing(&self) -> &Mdp {
        &self.model
    }

    /// Moves to `s` without sampling.
    pub fn teleport(&mut self, s: StateId) {
        self.position = s;
    }
}

impl LimitedInfoOracle for SimulatorOracle {
    fn initial_state(&self) -> StateId {
        self.model.initial()
    }

    fn is_target(&self, s: StateId) -> bool {
        self.model.is_target(s)
    }

    fn action_bound(&self) -> usize {
        self.model.num_actions()
    }

    fn prob_floor(&self) -> f64 {
        self.q
    }

    fn available_actions(&self, s: StateId) -> Vec<ActionId> {
        self.model.available(s).to_vec()
    }

    fn succ(&mut self, a: ActionId) -> Result<StateId, OracleError> {
        if a.0 >= self.model.num_actions() || self.model.owner(a) != self.position {
            return Err(OracleError::NotAvailable {
                action: a,
                state: self.position,
            });
        }
        self.draws += 1;
        self.position = self.model.transition(a).sample_with(self.rng.gen::<f64>());
        Ok(self.position)
    }

    fn reset(&mut self) {
        self.position = self.model.initial();
    }

    fn position(&self) -> StateId {
        self.position
    }

    fn walk_to(&mut self, goal: StateId, internal: &[ActionId]) -> Result<u64, OracleError> {
        let mut steps = 0;
        while self.position != goal {
            if steps >= NAVIGATION_CAP {
                return Err(OracleError::NavigationCap { goal, steps });
            }
            let here: Vec<ActionId> = self
                .model
                .available(self.position)
                .iter()
                .copied()
                .filter(|a| internal.contains(a))
                .collect();
            if here.is_empty() {
                return Err(OracleError::Stuck(self.position));
            }
            let a = here[self.rng.gen_range(0..here.len())];
            self.succ(a)?;
            steps += 1;
        }
        Ok(steps)
    }
}

/// Relative frequencies of `n` successor draws of `a`, each taken from the owner of `a`.
pub fn empirical_frequency_check(o: &mut SimulatorOracle, a: ActionId, n: u64) -> BTreeMap<StateId, f64> {
    let owner = o.backing().owner(a);
    let mut counts: BTreeMap<StateId, u64> = BTreeMap::new();
    for _ in 0..n {
        o.teleport(owner);
        let s = o.succ(a).expect("owner plays its own action");
        *counts.entry(s).or_insert(0) += 1;
    }
    counts.into_iter().map(|(s, k)| (s, k as f64 / n as f64)).collect()
}
