//! SCCs of chains, maximal end components of MDPs, and the frequency-based
//! end-component candidate detector.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::model::{ActionId, MarkovChain, Mdp, StateId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("path has {len} steps, {needed} required")]
    PathTooShort { len: usize, needed: usize },
}

/// Tarjan's algorithm without recursion. Components are emitted sinks first,
/// which is a reverse topological order of the condensation.
pub fn tarjan(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut next = 0;
    let mut frames: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        frames.push((root, 0));
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut edge)) = frames.last_mut() {
            if let Some(&w) = adj[v].get(*edge) {
                *edge += 1;
                if index[w] == UNSEEN {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            frames.pop();
            if let Some(&(parent, _)) = frames.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                out.push(comp);
            }
        }
    }
    out
}

fn chain_adjacency(c: &MarkovChain) -> Vec<Vec<usize>> {
    c.states()
        .map(|s| c.transition(s).states().map(|t| t.0).collect())
        .collect()
}

fn to_states(comps: Vec<Vec<usize>>) -> Vec<Vec<StateId>> {
    comps
        .into_iter()
        .map(|c| c.into_iter().map(StateId).collect())
        .collect()
}

/// Maximal strongly connected state sets, sinks first.
pub fn scc_decomposition(c: &MarkovChain) -> Vec<Vec<StateId>> {
    to_states(tarjan(&chain_adjacency(c)))
}

/// SCCs that no transition leaves.
pub fn bsccs(c: &MarkovChain) -> Vec<Vec<StateId>> {
    let sccs = scc_decomposition(c);
    let mut comp = vec![0; c.num_states()];
    for (i, scc) in sccs.iter().enumerate() {
        for s in scc {
            comp[s.0] = i;
        }
    }
    sccs.iter()
        .enumerate()
        .filter(|(i, scc)| scc.iter().all(|&s| c.transition(s).states().all(|t| comp[t.0] == *i)))
        .map(|(_, scc)| scc.clone())
        .collect()
}

/// A sub-MDP (states, actions) that is closed and strongly connected.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct EndComponent {
    pub states: BTreeSet<StateId>,
    pub actions: BTreeSet<ActionId>,
}

impl EndComponent {
    pub fn new(states: impl IntoIterator<Item = StateId>, actions: impl IntoIterator<Item = ActionId>) -> Self {
        EndComponent {
            states: states.into_iter().collect(),
            actions: actions.into_iter().collect(),
        }
    }

    /// True if both sets of `self` are contained in those of `other`.
    pub fn is_sub_of(&self, other: &EndComponent) -> bool {
        self.states.is_subset(&other.states) && self.actions.is_subset(&other.actions)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EcError {
    #[error("end component is empty")]
    Empty,
    #[error("{0} is not an action of the model")]
    UnknownAction(ActionId),
    #[error("{action} is owned by {owner}, which is outside the component")]
    ForeignAction { action: ActionId, owner: StateId },
    #[error("{action} can leave the component")]
    NotClosed { action: ActionId },
    #[error("component is not strongly connected")]
    NotConnected,
}

/// Checks every end-component condition of `ec` against `m`.
pub fn validate_end_component(m: &Mdp, ec: &EndComponent) -> Result<(), EcError> {
    if ec.states.is_empty() || ec.actions.is_empty() {
        return Err(EcError::Empty);
    }
    for &a in &ec.actions {
        if a.0 >= m.num_actions() {
            return Err(EcError::UnknownAction(a));
        }
        let owner = m.owner(a);
        if !ec.states.contains(&owner) {
            return Err(EcError::ForeignAction { action: a, owner });
        }
        if m.transition(a).states().any(|t| !ec.states.contains(&t)) {
            return Err(EcError::NotClosed { action: a });
        }
    }
    let local: BTreeMap<StateId, usize> = ec.states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let mut adj = vec![Vec::new(); local.len()];
    for &a in &ec.actions {
        let from = local[&m.owner(a)];
        adj[from].extend(m.transition(a).states().map(|t| local[&t]));
    }
    if tarjan(&adj).len() != 1 {
        return Err(EcError::NotConnected);
    }
    Ok(())
}

/// The maximal end components of `m`, ordered by smallest state.
///
/// Repeatedly computes SCCs of the graph induced by the surviving actions and
/// drops every action that can leave the SCC of its owner.
pub fn mec_decomposition(m: &Mdp) -> Vec<EndComponent> {
    let n = m.num_states();
    let mut active = vec![true; m.num_actions()];
    let mut comp = vec![0usize; n];
    loop {
        let mut adj = vec![Vec::new(); n];
        for a in m.actions().filter(|a| active[a.0]) {
            adj[m.owner(a).0].extend(m.transition(a).states().map(|t| t.0));
        }
        for (i, scc) in tarjan(&adj).into_iter().enumerate() {
            for s in scc {
                comp[s] = i;
            }
        }
        let mut changed = false;
        for a in m.actions() {
            if !active[a.0] {
                continue;
            }
            let home = comp[m.owner(a).0];
            if m.transition(a).states().any(|t| comp[t.0] != home) {
                active[a.0] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut groups: BTreeMap<usize, EndComponent> = BTreeMap::new();
    for a in m.actions().filter(|a| active[a.0]) {
        let owner = m.owner(a);
        let ec = groups.entry(comp[owner.0]).or_default();
        ec.actions.insert(a);
    }
    for s in m.states() {
        if let Some(ec) = groups.get_mut(&comp[s.0]) {
            ec.states.insert(s);
        }
    }
    let mut mecs: Vec<EndComponent> = groups.into_values().collect();
    mecs.sort_by_key(|ec| *ec.states.iter().next().expect("non-empty"));
    mecs
}

/// Pairs that occur at least `i` times among the first `j` steps of `path`,
/// split into their states and actions. The result is only a candidate.
pub fn appear<S: Ord + Copy, A: Ord + Copy>(
    path: &[(S, A)],
    i: usize,
    j: usize,
) -> Result<(BTreeSet<S>, BTreeSet<A>), GraphError> {
    if path.len() < j {
        return Err(GraphError::PathTooShort {
            len: path.len(),
            needed: j,
        });
    }
    let mut counts: BTreeMap<(S, A), usize> = BTreeMap::new();
    for &pair in &path[..j] {
        *counts.entry(pair).or_insert(0) += 1;
    }
    let mut states = BTreeSet::new();
    let mut actions = BTreeSet::new();
    for ((s, a), k) in counts {
        if k >= i {
            states.insert(s);
            actions.insert(a);
        }
    }
    Ok((states, actions))
}

/// Smallest positive transition probability of `c`.
pub fn min_transition_prob(c: &MarkovChain) -> f64 {
    c.states()
        .flat_map(|s| c.transition(s).iter().map(|(_, p)| p))
        .fold(1.0, f64::min)
}
