//! Explicit-state MDPs, Markov chains, distributions and per-action bounds.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Absolute tolerance used when checking that probabilities sum to one.
pub const PROB_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionId(pub usize);

impl StateId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl ActionId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}", self.0)
    }
}

pub type StateSet = BTreeSet<StateId>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("distribution has empty support")]
    EmptySupport,
    #[error("probability {p} for {state} is outside (0, 1]")]
    ProbabilityRange { state: StateId, p: f64 },
    #[error("probabilities sum to {sum}, expected 1")]
    Sum { sum: f64 },
    #[error("no value supplied for {0}")]
    MissingValue(StateId),
    #[error("{0}")]
    Invalid(String),
}

/// A finite probability distribution over states with sorted, duplicate-free support.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    support: Vec<(StateId, f64)>,
}

impl Distribution {
    /// Builds a distribution and checks every probability is in (0, 1] and
    /// that they sum to one. Repeated states are merged by adding.
    pub fn new(entries: impl IntoIterator<Item = (StateId, f64)>) -> Result<Self, ModelError> {
        let d = Self::from_entries_unchecked(entries);
        d.check()?;
        Ok(d)
    }

    /// Sorts and merges the entries without checking them.
    pub fn from_entries_unchecked(entries: impl IntoIterator<Item = (StateId, f64)>) -> Self {
        let mut merged: BTreeMap<StateId, f64> = BTreeMap::new();
        for (s, p) in entries {
            *merged.entry(s).or_insert(0.0) += p;
        }
        Distribution {
            support: merged.into_iter().collect(),
        }
    }

    pub fn dirac(s: StateId) -> Self {
        Distribution {
            support: vec![(s, 1.0)],
        }
    }

    pub fn uniform(states: &[StateId]) -> Result<Self, ModelError> {
        if states.is_empty() {
            return Err(ModelError::EmptySupport);
        }
        let p = 1.0 / states.len() as f64;
        Self::new(states.iter().map(|&s| (s, p)))
    }

    pub fn check(&self) -> Result<(), ModelError> {
        if self.support.is_empty() {
            return Err(ModelError::EmptySupport);
        }
        for &(state, p) in &self.support {
            if !(p > 0.0 && p <= 1.0 + PROB_TOLERANCE) {
                return Err(ModelError::ProbabilityRange { state, p });
            }
        }
        let sum = self.total();
        if (sum - 1.0).abs() > PROB_TOLERANCE {
            return Err(ModelError::Sum { sum });
        }
        Ok(())
    }

    pub fn support(&self) -> &[(StateId, f64)] {
        &self.support
    }

    pub fn iter(&self) -> impl Iterator<Item = (StateId, f64)> + '_ {
        self.support.iter().copied()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> + '_ {
        self.support.iter().map(|&(s, _)| s)
    }

    pub fn prob(&self, s: StateId) -> f64 {
        match self.support.binary_search_by_key(&s, |&(t, _)| t) {
            Ok(i) => self.support[i].1,
            Err(_) => 0.0,
        }
    }

    pub fn total(&self) -> f64 {
        self.support.iter().map(|&(_, p)| p).sum()
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Expectation over a dense value vector indexed by state. Dividing by the
    /// stored mass keeps rounding in the probabilities from pulling a constant
    /// vector off its value, so a bound of exactly 1 or 0 backs up exactly.
    pub fn expect(&self, values: &[f64]) -> f64 {
        let (sum, mass) = self
            .support
            .iter()
            .fold((0.0, 0.0), |(sum, mass), &(s, p)| (sum + p * values[s.0], mass + p));
        sum / mass
    }

    /// Inverse-CDF lookup over the sorted support for a uniform draw `u` in [0, 1).
    pub fn sample_with(&self, u: f64) -> StateId {
        let mut cum = 0.0;
        for &(s, p) in &self.support {
            cum += p;
            if u < cum {
                return s;
            }
        }
        self.support.last().expect("non-empty support").0
    }

    /// Maps every support state through `f`, adding up mass that lands on the same state.
    pub fn map_states(&self, mut f: impl FnMut(StateId) -> StateId) -> Distribution {
        Distribution::from_entries_unchecked(self.support.iter().map(|&(s, p)| (f(s), p)))
    }
}

/// Σ d(s)·f(s) over the support of `d`. Fails if `f` has no value for a support state.
pub fn weighted_sum(d: &Distribution, f: impl Fn(StateId) -> Option<f64>) -> Result<f64, ModelError> {
    let mut acc = 0.0;
    for (s, p) in d.iter() {
        acc += p * f(s).ok_or(ModelError::MissingValue(s))?;
    }
    Ok(acc)
}

/// An MDP whose actions are globally numbered and each owned by one state.
#[derive(Clone, Debug, PartialEq)]
pub struct Mdp {
    available: Vec<Vec<ActionId>>,
    owner: Vec<StateId>,
    transitions: Vec<Distribution>,
    labels: Vec<String>,
    initial: StateId,
    targets: StateSet,
}

impl Mdp {
    /// Assembles a model without validation. Actions are numbered in the order given;
    /// owners outside the state range are dropped from the per-state lists but kept
    /// for reporting by [`validate_mdp`].
    pub fn from_parts_unchecked(
        num_states: usize,
        actions: Vec<(StateId, String, Distribution)>,
        initial: StateId,
        targets: StateSet,
    ) -> Mdp {
        let mut available = vec![Vec::new(); num_states];
        let mut owner = Vec::with_capacity(actions.len());
        let mut transitions = Vec::with_capacity(actions.len());
        let mut labels = Vec::with_capacity(actions.len());
        for (i, (s, label, d)) in actions.into_iter().enumerate() {
            if s.0 < num_states {
                available[s.0].push(ActionId(i));
            }
            owner.push(s);
            transitions.push(d);
            labels.push(label);
        }
        Mdp {
            available,
            owner,
            transitions,
            labels,
            initial,
            targets,
        }
    }

    /// Assembles and validates a model.
    pub fn from_parts(
        num_states: usize,
        actions: Vec<(StateId, String, Distribution)>,
        initial: StateId,
        targets: StateSet,
    ) -> Result<Mdp, Vec<Violation>> {
        let m = Self::from_parts_unchecked(num_states, actions, initial, targets);
        validate_mdp(&m)?;
        Ok(m)
    }

    pub fn num_states(&self) -> usize {
        self.available.len()
    }

    pub fn num_actions(&self) -> usize {
        self.owner.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.num_states()).map(StateId)
    }

    pub fn actions(&self) -> impl Iterator<Item = ActionId> {
        (0..self.num_actions()).map(ActionId)
    }

    pub fn available(&self, s: StateId) -> &[ActionId] {
        &self.available[s.0]
    }

    pub fn owner(&self, a: ActionId) -> StateId {
        self.owner[a.0]
    }

    pub fn transition(&self, a: ActionId) -> &Distribution {
        &self.transitions[a.0]
    }

    pub fn label(&self, a: ActionId) -> &str {
        &self.labels[a.0]
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn targets(&self) -> &StateSet {
        &self.targets
    }

    pub fn is_target(&self, s: StateId) -> bool {
        self.targets.contains(&s)
    }

    pub fn with_initial(&self, initial: StateId) -> Mdp {
        Mdp {
            initial,
            ..self.clone()
        }
    }

    pub fn with_targets(&self, targets: StateSet) -> Mdp {
        Mdp {
            targets,
            ..self.clone()
        }
    }

    /// Copies the model keeping only the actions accepted by `keep`.
    pub fn restrict_actions(&self, keep: impl Fn(ActionId) -> bool) -> Mdp {
        let actions = self
            .actions()
            .filter(|&a| keep(a))
            .map(|a| (self.owner(a), self.label(a).to_string(), self.transition(a).clone()))
            .collect();
        Mdp::from_parts_unchecked(self.num_states(), actions, self.initial, self.targets.clone())
    }

    /// Smallest positive transition probability over all actions.
    pub fn min_probability(&self) -> f64 {
        self.transitions
            .iter()
            .flat_map(|d| d.iter().map(|(_, p)| p))
            .fold(1.0, f64::min)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    EmptyActionSet,
    DistributionSum,
    ProbabilityRange,
    EmptySupport,
    DanglingState,
    InitialOutOfRange,
    TargetOutOfRange,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::EmptyActionSet => "empty action set",
            Rule::DistributionSum => "distribution sum",
            Rule::ProbabilityRange => "probability range",
            Rule::EmptySupport => "empty support",
            Rule::DanglingState => "dangling state",
            Rule::InitialOutOfRange => "initial out of range",
            Rule::TargetOutOfRange => "target out of range",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub rule: Rule,
    pub state: Option<StateId>,
    pub action: Option<ActionId>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rule.name())?;
        if let Some(s) = self.state {
            write!(f, " at state {}", s.0)?;
        }
        if let Some(a) = self.action {
            write!(f, " for action {}", a.0)?;
        }
        if !self.detail.is_empty() {
            write!(f, ": {}", self.detail)?;
        }
        Ok(())
    }
}

/// Checks every structural invariant of `m`. Violations are returned as data.
pub fn validate_mdp(m: &Mdp) -> Result<(), Vec<Violation>> {
    let n = m.num_states();
    let mut out = Vec::new();
    let mut push = |rule, state, action, detail: String| {
        out.push(Violation {
            rule,
            state,
            action,
            detail,
        })
    };
    if m.initial.0 >= n {
        push(Rule::InitialOutOfRange, Some(m.initial), None, String::new());
    }
    for &t in &m.targets {
        if t.0 >= n {
            push(Rule::TargetOutOfRange, Some(t), None, String::new());
        }
    }
    for s in m.states() {
        if m.available(s).is_empty() {
            push(Rule::EmptyActionSet, Some(s), None, String::new());
        }
    }
    for a in m.actions() {
        let owner = m.owner(a);
        if owner.0 >= n {
            push(Rule::DanglingState, Some(owner), Some(a), "owner".into());
        }
        let d = m.transition(a);
        if d.is_empty() {
            push(Rule::EmptySupport, Some(owner), Some(a), String::new());
            continue;
        }
        for (t, p) in d.iter() {
            if t.0 >= n {
                push(Rule::DanglingState, Some(t), Some(a), "successor".into());
            }
            if !(p > 0.0 && p <= 1.0 + PROB_TOLERANCE) {
                push(Rule::ProbabilityRange, Some(owner), Some(a), format!("{p}"));
            }
        }
        let sum = d.total();
        if (sum - 1.0).abs() > PROB_TOLERANCE {
            push(Rule::DistributionSum, Some(owner), Some(a), format!("sum {sum}"));
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    Up,
    Lo,
}

/// Upper and lower bounds per action.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundsMap {
    pub up: Vec<f64>,
    pub lo: Vec<f64>,
}

impl BoundsMap {
    /// Trivial bounds: up = 1 and lo = 0 everywhere.
    pub fn trivial(num_actions: usize) -> Self {
        BoundsMap {
            up: vec![1.0; num_actions],
            lo: vec![0.0; num_actions],
        }
    }

    pub fn get(&self, which: Bound, a: ActionId) -> f64 {
        match which {
            Bound::Up => self.up[a.0],
            Bound::Lo => self.lo[a.0],
        }
    }

    pub fn state_bound(&self, m: &Mdp, s: StateId, which: Bound) -> f64 {
        let values = match which {
            Bound::Up => &self.up,
            Bound::Lo => &self.lo,
        };
        m.available(s)
            .iter()
            .map(|a| values[a.0])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Actions of `s` whose upper bound equals the state maximum exactly.
    pub fn max_actions(&self, m: &Mdp, s: StateId) -> Vec<ActionId> {
        let best = self.state_bound(m, s, Bound::Up);
        m.available(s)
            .iter()
            .copied()
            .filter(|a| self.up[a.0] == best)
            .collect()
    }
}

/// A Markov chain over dense states.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovChain {
    transitions: Vec<Distribution>,
}

impl MarkovChain {
    pub fn new(transitions: Vec<Distribution>) -> Result<Self, ModelError> {
        let n = transitions.len();
        for d in &transitions {
            d.check()?;
            if let Some((s, _)) = d.iter().find(|(s, _)| s.0 >= n) {
                return Err(ModelError::Invalid(format!("successor {s} out of range")));
            }
        }
        Ok(MarkovChain { transitions })
    }

    pub fn num_states(&self) -> usize {
        self.transitions.len()
    }

    pub fn transition(&self, s: StateId) -> &Distribution {
        &self.transitions[s.0]
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.num_states()).map(StateId)
    }
}

/// A memoryless randomized strategy.
#[derive(Clone, Debug, PartialEq)]
pub struct MemorylessStrategy {
    choice: Vec<Vec<(ActionId, f64)>>,
}

impl MemorylessStrategy {
    pub fn new(m: &Mdp, choice: Vec<Vec<(ActionId, f64)>>) -> Result<Self, ModelError> {
        if choice.len() != m.num_states() {
            return Err(ModelError::Invalid("strategy must cover every state".into()));
        }
        for (i, row) in choice.iter().enumerate() {
            if row.is_empty() {
                return Err(ModelError::Invalid(format!("no choice at state {i}")));
            }
            for &(a, p) in row {
                if a.0 >= m.num_actions() || m.owner(a) != StateId(i) {
                    return Err(ModelError::Invalid(format!("{a} is not available in s{i}")));
                }
                if !(p > 0.0 && p <= 1.0 + PROB_TOLERANCE) {
                    return Err(ModelError::ProbabilityRange { state: StateId(i), p });
                }
            }
            let sum: f64 = row.iter().map(|&(_, p)| p).sum();
            if (sum - 1.0).abs() > PROB_TOLERANCE {
                return Err(ModelError::Sum { sum });
            }
        }
        Ok(MemorylessStrategy { choice })
    }

    pub fn deterministic(m: &Mdp, picks: &[ActionId]) -> Result<Self, ModelError> {
        Self::new(m, picks.iter().map(|&a| vec![(a, 1.0)]).collect())
    }

    /// Uniform choice over the given action set of every state.
    pub fn uniform(m: &Mdp, sets: &[Vec<ActionId>]) -> Result<Self, ModelError> {
        let choice = sets
            .iter()
            .map(|set| {
                let p = 1.0 / set.len() as f64;
                set.iter().map(|&a| (a, p)).collect()
            })
            .collect();
        Self::new(m, choice)
    }

    pub fn choice(&self, s: StateId) -> &[(ActionId, f64)] {
        &self.choice[s.0]
    }
}

/// The Markov chain obtained by resolving every choice of `m` with `pi`.
pub fn induce_chain(m: &Mdp, pi: &MemorylessStrategy) -> MarkovChain {
    let transitions = m
        .states()
        .map(|s| {
            Distribution::from_entries_unchecked(
                pi.choice(s)
                    .iter()
                    .flat_map(|&(a, pa)| m.transition(a).iter().map(move |(t, p)| (t, pa * p))),
            )
        })
        .collect();
    MarkovChain { transitions }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;

    #[test]
    fn distribution_merges_and_sorts() {
        let d = Distribution::new([(StateId(2), 0.25), (StateId(0), 0.5), (StateId(2), 0.25)]).unwrap();
        assert_eq!(d.support(), &[(StateId(0), 0.5), (StateId(2), 0.5)]);
        assert!(Distribution::new([(StateId(0), 0.6), (StateId(1), 0.3)]).is_err());
        assert!(Distribution::new([]).is_err());
    }

    #[test]
    fn fig1_is_valid() {
        assert!(validate_mdp(&models::fig1()).is_ok());
    }

    #[test]
    fn short_sum_is_reported() {
        let d = Distribution::from_entries_unchecked([(StateId(0), 0.9)]);
        let m = Mdp::from_parts_unchecked(1, vec![(StateId(0), "a".into(), d)], StateId(0), StateSet::new());
        let v = validate_mdp(&m).unwrap_err();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule.name(), "distribution sum");
    }

    #[test]
    fn empty_action_set_is_reported() {
        let m = Mdp::from_parts_unchecked(
            2,
            vec![(StateId(0), "a".into(), Distribution::dirac(StateId(0)))],
            StateId(0),
            StateSet::new(),
        );
        let v = validate_mdp(&m).unwrap_err();
        assert_eq!(v[0].rule.name(), "empty action set");
        assert_eq!(v[0].state, Some(StateId(1)));
    }

    #[test]
    fn constant_vectors_back_up_exactly() {
        let d = Distribution::new([(StateId(0), 2.0 / 3.0), (StateId(1), 1.0 / 3.0 - 1e-10)]).unwrap();
        assert_eq!(d.expect(&[1.0, 1.0]), 1.0);
        assert_eq!(d.expect(&[0.0, 0.0]), 0.0);
    }

    #[test]
    fn weighted_sum_examples() {
        let d = Distribution::uniform(&[StateId(0), StateId(1)]).unwrap();
        let f = |s: StateId| Some(s.0 as f64);
        assert_eq!(weighted_sum(&d, f).unwrap(), 0.5);
        let dirac = Distribution::dirac(StateId(3));
        assert_eq!(weighted_sum(&dirac, |_| Some(0.7)).unwrap(), 0.7);
        assert_eq!(
            weighted_sum(&d, |s| (s.0 == 0).then_some(1.0)),
            Err(ModelError::MissingValue(StateId(1)))
        );
        let m = models::fig1();
        let val = |s: StateId| Some(if s == models::fig1::S_PLUS { 1.0 } else { 0.0 });
        assert_eq!(weighted_sum(m.transition(models::fig1::A2), val).unwrap(), 0.5);
    }

    #[test]
    fn state_bound_and_max_actions() {
        let m = models::fig2();
        let mut b = BoundsMap::trivial(m.num_actions());
        b.up[models::fig2::A1.0] = 0.5;
        assert_eq!(b.state_bound(&m, models::fig2::S_HAT, Bound::Up), 1.0);
        assert_eq!(b.max_actions(&m, models::fig2::S_HAT), vec![models::fig2::B1]);
        b.up[models::fig2::B1.0] = 0.5;
        assert_eq!(b.max_actions(&m, models::fig2::S_HAT).len(), 2);
        b.up[models::fig2::A1.0] = 0.3;
        b.up[models::fig2::B1.0] = 0.9;
        assert_eq!(b.state_bound(&m, models::fig2::S_HAT, Bound::Up), 0.9);
        let fresh = BoundsMap::trivial(m.num_actions());
        assert_eq!(
            fresh.max_actions(&m, models::fig2::S_HAT),
            m.available(models::fig2::S_HAT)
        );
    }

    #[test]
    fn induced_chain_fig1() {
        use models::fig1::*;
        let m = models::fig1();
        let pi =
            MemorylessStrategy::uniform(&m, &[vec![A], vec![A1, B1], vec![A2], vec![A_PLUS], vec![A_MINUS]]).unwrap();
        let c = induce_chain(&m, &pi);
        assert_eq!(c.transition(S1).prob(S1), 0.75);
        assert_eq!(c.transition(S1).prob(S2), 0.25);
        let det = MemorylessStrategy::deterministic(&m, &[A, A1, A2, A_PLUS, A_MINUS]).unwrap();
        let c = induce_chain(&m, &det);
        assert_eq!(c.transition(S2).support(), &[(S_PLUS, 0.5), (S_MINUS, 0.5)]);
        for s in c.states() {
            assert_eq!(c.transition(s), m.transition(det.choice(s)[0].0));
        }
    }

    #[test]
    fn strategy_rejects_foreign_action() {
        let m = models::fig1();
        use models::fig1::*;
        assert!(MemorylessStrategy::deterministic(&m, &[A1, A1, A2, A_PLUS, A_MINUS]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn dist() -> impl Strategy<Value = Distribution> {
            prop::collection::vec((0usize..6, 1u32..100), 1..6).prop_map(|raw| {
                let total: u32 = raw.iter().map(|&(_, w)| w).sum();
                Distribution::from_entries_unchecked(
                    raw.into_iter().map(|(s, w)| (StateId(s), w as f64 / total as f64)),
                )
            })
        }

        proptest! {
            #[test]
            fn weighted_sum_is_linear(
                d in dist(),
                f in prop::collection::vec(-1.0f64..1.0, 6),
                g in prop::collection::vec(-1.0f64..1.0, 6),
                alpha in -2.0f64..2.0,
                beta in -2.0f64..2.0,
            ) {
                let mix: Vec<f64> = f.iter().zip(&g).map(|(x, y)| alpha * x + beta * y).collect();
                let lhs = weighted_sum(&d, |s| Some(mix[s.0])).unwrap();
                let rhs = alpha * weighted_sum(&d, |s| Some(f[s.0])).unwrap()
                    + beta * weighted_sum(&d, |s| Some(g[s.0])).unwrap();
                prop_assert!((lhs - rhs).abs() < 1e-12);
            }

            #[test]
            fn induced_rows_are_stochastic(m in crate::testutil::arb_mdp(6, 3), seed in any::<u64>()) {
                let sets: Vec<Vec<ActionId>> = m.states().map(|s| {
                    let av = m.available(s);
                    let k = 1 + (seed as usize + s.0) % av.len();
                    av[..k].to_vec()
                }).collect();
                let pi = MemorylessStrategy::uniform(&m, &sets).unwrap();
                let c = induce_chain(&m, &pi);
                for s in c.states() {
                    prop_assert!((c.transition(s).total() - 1.0).abs() <= PROB_TOLERANCE);
                }
            }

            #[test]
            fn max_actions_attain_state_bound(
                m in crate::testutil::arb_mdp(6, 3),
                ups in prop::collection::vec(prop::sample::select(vec![0.0, 0.25, 0.5, 1.0]), 18),
            ) {
                let mut b = BoundsMap::trivial(m.num_actions());
                for a in m.actions() {
                    b.up[a.0] = ups[a.0 % ups.len()];
                }
                for s in m.states() {
                    let best = b.state_bound(&m, s, Bound::Up);
                    let max = b.max_actions(&m, s);
                    prop_assert!(!max.is_empty());
                    for a in max {
                        prop_assert!(m.available(s).contains(&a));
                        prop_assert_eq!(b.up[a.0], best);
                    }
                }
            }
        }
    }
}
