//! White-box views of a learning run for tests. These read the hidden model,
//! which the learner itself never does.

use std::collections::{BTreeMap, BTreeSet};

use super::{DqlRun, NodeId};
use crate::blackbox::LimitedInfoOracle;
use crate::model::{ActionId, Bound, Distribution, Mdp, StateId, StateSet};

/// A state of the sampling model: a node the learner created, or an original
/// state it has not seen yet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ViewState {
    Node(NodeId),
    Unseen(StateId),
}

/// The model the learner's current view induces on the hidden model.
#[derive(Clone, Debug)]
pub struct SamplingMdp {
    pub mdp: Mdp,
    /// View state of each state of `mdp`.
    pub states: Vec<ViewState>,
    /// Original state to its state in `mdp`.
    pub image: Vec<StateId>,
    /// Action of `mdp` to the original action.
    pub actions: Vec<ActionId>,
}

fn view_state<O: LimitedInfoOracle + ?Sized>(run: &DqlRun<'_, O>, s: StateId) -> ViewState {
    match run.node_of_state(s) {
        Some(n) => ViewState::Node(n),
        None => ViewState::Unseen(s),
    }
}

fn absorbing<O: LimitedInfoOracle + ?Sized>(run: &DqlRun<'_, O>, v: ViewState) -> bool {
    match v {
        ViewState::Node(n) => run.node_is_target(n) || run.node_is_zero(n),
        ViewState::Unseen(s) => run.unseen_is_target(s) || run.unseen_is_zero(s),
    }
}

fn is_target<O: LimitedInfoOracle + ?Sized>(run: &DqlRun<'_, O>, v: ViewState) -> bool {
    match v {
        ViewState::Node(n) => run.node_is_target(n),
        ViewState::Unseen(s) => run.unseen_is_target(s),
    }
}

/// Self-loops on target and zero states; elsewhere successors are mapped
/// to their current representative and their mass added up.
pub fn build_sampling_mdp<O: LimitedInfoOracle + ?Sized>(run: &DqlRun<'_, O>, m: &Mdp) -> SamplingMdp {
    let mut index: BTreeMap<ViewState, StateId> = BTreeMap::new();
    let mut states = Vec::new();
    let mut image = Vec::with_capacity(m.num_states());
    for s in m.states() {
        let v = view_state(run, s);
        let id = *index.entry(v).or_insert_with(|| {
            states.push(v);
            StateId(states.len() - 1)
        });
        image.push(id);
    }
    let mut actions = Vec::new();
    let mut back = Vec::new();
    for (i, &v) in states.iter().enumerate() {
        let here = StateId(i);
        let av: Vec<ActionId> = match v {
            ViewState::Node(n) => run.node_actions(n).to_vec(),
            ViewState::Unseen(s) => m.available(s).to_vec(),
        };
        let looped = absorbing(run, v);
        for a in av {
            let d = if looped {
                Distribution::dirac(here)
            } else {
                m.transition(a).map_states(|t| image[t.0])
            };
            actions.push((here, m.label(a).to_string(), d));
            back.push(a);
        }
    }
    let targets: StateSet = (0..states.len())
        .filter(|&i| is_target(run, states[i]))
        .map(StateId)
        .collect();
    let initial = image[m.initial().0];
    SamplingMdp {
        mdp: Mdp::from_parts_unchecked(states.len(), actions, initial, targets),
        states,
        image,
        actions: back,
    }
}

fn action_bound<O: LimitedInfoOracle + ?Sized>(run: &DqlRun<'_, O>, m: &Mdp, a: ActionId, which: Bound) -> f64 {
    match run.record(a) {
        Some(r) => match which {
            Bound::Up => r.up,
            Bound::Lo => r.lo,
        },
        None => run.state_bound(m.owner(a), which),
    }
}

/// Actions of the sampling model whose bound is within `3·eps_bar` of its
/// one-step backup, for the upper and the lower bound.
pub fn converged_sets<O: LimitedInfoOracle + ?Sized>(
    run: &DqlRun<'_, O>,
    m: &Mdp,
) -> (BTreeSet<ActionId>, BTreeSet<ActionId>) {
    let view = build_sampling_mdp(run, m);
    let q = &view.mdp;
    let state_val = |s: StateId, which: Bound| -> f64 {
        q.available(s)
            .iter()
            .map(|&qa| action_bound(run, m, view.actions[qa.0], which))
            .fold(0.0, f64::max)
    };
    let up_vals: Vec<f64> = q.states().map(|s| state_val(s, Bound::Up)).collect();
    let lo_vals: Vec<f64> = q.states().map(|s| state_val(s, Bound::Lo)).collect();
    let slack = 3.0 * run.constants().eps_bar;
    let mut up = BTreeSet::new();
    let mut lo = BTreeSet::new();
    for qa in q.actions() {
        let a = view.actions[qa.0];
        let d = q.transition(qa);
        if action_bound(run, m, a, Bound::Up) - d.expect(&up_vals) <= slack {
            up.insert(a);
        }
        if d.expect(&lo_vals) - action_bound(run, m, a, Bound::Lo) <= slack {
            lo.insert(a);
        }
    }
    (up, lo)
}

/// Resolved (lower, upper) bound of every original state.
pub fn resolved_bounds<O: LimitedInfoOracle + ?Sized>(run: &DqlRun<'_, O>, num_states: usize) -> Vec<(f64, f64)> {
    (0..num_states)
        .map(|s| {
            (
                run.state_bound(StateId(s), Bound::Lo),
                run.state_bound(StateId(s), Bound::Up),
            )
        })
        .collect()
}
