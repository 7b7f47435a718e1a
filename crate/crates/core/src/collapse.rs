//! Quotient of an MDP in which each given end component becomes one state.
//!
//! Layout of the quotient: states outside the components keep their relative
//! order, followed by the fresh goal state, the fresh sink state and one
//! representative per component (input order). Actions follow the same
//! scheme: surviving original actions in order, then the goal and sink
//! self-loops, then one "remain" action per representative.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::graph::{mec_decomposition, validate_end_component, EcError, EndComponent};
use crate::model::{ActionId, Distribution, Mdp, StateId, StateSet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CollapseError {
    #[error("components {first} and {second} share {state}")]
    Overlap {
        first: usize,
        second: usize,
        state: StateId,
    },
    #[error("component {index} is not an end component: {source}")]
    NotEndComponent { index: usize, source: EcError },
    #[error("state {0} is outside the model")]
    UnknownState(StateId),
}

/// Where an action of the quotient comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActionOrigin {
    Original(ActionId),
    Plus,
    Minus,
    /// The remain action of the representative with this component index.
    Remain(usize),
}

#[derive(Clone, Debug)]
pub struct CollapsedMdp {
    pub quotient: Mdp,
    /// Original state to quotient state.
    pub collapsed_map: Vec<StateId>,
    /// Quotient state to the original states it stands for; empty for the two fresh states.
    pub states_map: Vec<BTreeSet<StateId>>,
    pub action_origin: Vec<ActionOrigin>,
    /// Original action to its quotient copy; `None` for actions internal to a component.
    pub action_map: Vec<Option<ActionId>>,
    pub s_plus: StateId,
    pub s_minus: StateId,
    pub a_plus: ActionId,
    pub a_minus: ActionId,
    pub representatives: Vec<StateId>,
    /// Whether each component meets the target set.
    pub rep_hits_target: Vec<bool>,
    pub ecs: Vec<EndComponent>,
}

impl CollapsedMdp {
    pub fn initial(&self) -> StateId {
        self.quotient.initial()
    }

    pub fn collapsed(&self, s: StateId) -> StateId {
        self.collapsed_map[s.0]
    }

    /// All original states in the same component as `s`, or just `s`.
    pub fn equiv(&self, s: StateId) -> &BTreeSet<StateId> {
        &self.states_map[self.collapsed(s).0]
    }

    pub fn remain_action(&self, ec_index: usize) -> ActionId {
        let rep = self.representatives[ec_index];
        *self
            .quotient
            .available(rep)
            .last()
            .expect("representatives own their remain action")
    }
}

/// Builds the quotient of `m` for the disjoint end components `ecs`.
pub fn collapse(
    m: &Mdp,
    ecs: &[EndComponent],
    s_hat: StateId,
    targets: &StateSet,
) -> Result<CollapsedMdp, CollapseError> {
    let n = m.num_states();
    if s_hat.0 >= n {
        return Err(CollapseError::UnknownState(s_hat));
    }
    let mut member: Vec<Option<usize>> = vec![None; n];
    for (i, ec) in ecs.iter().enumerate() {
        validate_end_component(m, ec).map_err(|source| CollapseError::NotEndComponent { index: i, source })?;
        for &s in &ec.states {
            if let Some(j) = member[s.0] {
                return Err(CollapseError::Overlap {
                    first: j,
                    second: i,
                    state: s,
                });
            }
            member[s.0] = Some(i);
        }
    }

    let mut collapsed_map = vec![StateId(0); n];
    let mut states_map: Vec<BTreeSet<StateId>> = Vec::new();
    for s in m.states().filter(|s| member[s.0].is_none()) {
        collapsed_map[s.0] = StateId(states_map.len());
        states_map.push([s].into_iter().collect());
    }
    let s_plus = StateId(states_map.len());
    let s_minus = StateId(states_map.len() + 1);
    states_map.push(BTreeSet::new());
    states_map.push(BTreeSet::new());
    let mut representatives = Vec::with_capacity(ecs.len());
    for ec in ecs {
        let rep = StateId(states_map.len());
        representatives.push(rep);
        for &s in &ec.states {
            collapsed_map[s.0] = rep;
        }
        states_map.push(ec.states.clone());
    }
    let internal: BTreeSet<ActionId> = ecs.iter().flat_map(|ec| ec.actions.iter().copied()).collect();

    let mut actions: Vec<(StateId, String, Distribution)> = Vec::new();
    let mut action_origin = Vec::new();
    let mut action_map = vec![None; m.num_actions()];
    for a in m.actions().filter(|a| !internal.contains(a)) {
        action_map[a.0] = Some(ActionId(actions.len()));
        let owner = collapsed_map[m.owner(a).0];
        let d = m.transition(a).map_states(|t| collapsed_map[t.0]);
        actions.push((owner, m.label(a).to_string(), d));
        action_origin.push(ActionOrigin::Original(a));
    }
    let a_plus = ActionId(actions.len());
    actions.push((s_plus, "a+".into(), Distribution::dirac(s_plus)));
    action_origin.push(ActionOrigin::Plus);
    let a_minus = ActionId(actions.len());
    actions.push((s_minus, "a-".into(), Distribution::dirac(s_minus)));
    action_origin.push(ActionOrigin::Minus);
    let mut rep_hits_target = Vec::with_capacity(ecs.len());
    for (i, ec) in ecs.iter().enumerate() {
        let hits = ec.states.iter().any(|s| targets.contains(s));
        rep_hits_target.push(hits);
        let to = if hits { s_plus } else { s_minus };
        actions.push((representatives[i], format!("rem{i}"), Distribution::dirac(to)));
        action_origin.push(ActionOrigin::Remain(i));
    }

    let mut q_targets: StateSet = [s_plus].into_iter().collect();
    q_targets.extend(
        targets
            .iter()
            .filter(|t| t.0 < n && member[t.0].is_none())
            .map(|t| collapsed_map[t.0]),
    );
    // Actions of a representative come out ordered by original id with the
    // remain action last, because originals are pushed before all remains.
    let quotient = Mdp::from_parts_unchecked(states_map.len(), actions, collapsed_map[s_hat.0], q_targets);
    Ok(CollapsedMdp {
        quotient,
        collapsed_map,
        states_map,
        action_origin,
        action_map,
        s_plus,
        s_minus,
        a_plus,
        a_minus,
        representatives,
        rep_hits_target,
        ecs: ecs.to_vec(),
    })
}

/// Collapses every maximal end component of `m`.
pub fn collapse_all_mecs(m: &Mdp, s_hat: StateId, targets: &StateSet) -> CollapsedMdp {
    let mecs = mec_decomposition(m);
    collapse(m, &mecs, s_hat, targets).expect("maximal end components are disjoint end components")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_mdp;
    use crate::models;

    #[test]
    fn fig4_two_loops() {
        use models::fig4::*;
        let m = models::fig4();
        let ecs = [
            EndComponent::new([S_HAT, S1], [A0, A1]),
            EndComponent::new([S2, S3], [A2, A3]),
        ];
        let c = collapse(&m, &ecs, S_HAT, m.targets()).unwrap();
        let q = &c.quotient;
        assert!(validate_mdp(q).is_ok());
        assert_eq!(q.num_states(), 4);
        assert_eq!((c.s_plus, c.s_minus), (StateId(0), StateId(1)));
        let (c1, c2) = (c.representatives[0], c.representatives[1]);
        assert_eq!(q.initial(), c1);
        let origins =
            |s: StateId| -> Vec<ActionOrigin> { q.available(s).iter().map(|a| c.action_origin[a.0]).collect() };
        assert_eq!(origins(c1), vec![ActionOrigin::Original(B0), ActionOrigin::Remain(0)]);
        assert_eq!(origins(c2), vec![ActionOrigin::Original(B1), ActionOrigin::Remain(1)]);
        assert_eq!(q.transition(c.remain_action(0)), &Distribution::dirac(c.s_minus));
        assert_eq!(q.transition(c.remain_action(1)), &Distribution::dirac(c.s_plus));
        let b0 = c.action_map[B0.0].unwrap();
        assert_eq!(q.transition(b0), &Distribution::dirac(c2));
        assert_eq!(c.equiv(S1), &[S_HAT, S1].into_iter().collect());
        assert_eq!(q.targets(), &[c.s_plus].into_iter().collect());
        assert!(c.action_map[A0.0].is_none());
    }

    #[test]
    fn no_components_is_identity_plus_specials() {
        let m = models::fig2();
        let c = collapse(&m, &[], m.initial(), m.targets()).unwrap();
        let q = &c.quotient;
        assert_eq!(q.num_states(), m.num_states() + 2);
        for s in m.states() {
            assert_eq!(c.collapsed(s), s);
        }
        for a in m.actions() {
            assert_eq!(c.action_map[a.0], Some(a));
            assert_eq!(q.transition(a), m.transition(a));
            assert_eq!(q.owner(a), m.owner(a));
        }
        assert_eq!(q.available(c.s_plus), &[c.a_plus]);
        assert_eq!(q.available(c.s_minus), &[c.a_minus]);
    }

    #[test]
    fn fig1_full_mec_set() {
        use models::fig1::*;
        let m = models::fig1();
        let c = collapse_all_mecs(&m, S_HAT, m.targets());
        let rep = c.collapsed(S1);
        assert_eq!(rep, c.collapsed(S2));
        // a2 leaves the loop, so it is kept next to the remain action
        let origins: Vec<ActionOrigin> = c.quotient.available(rep).iter().map(|a| c.action_origin[a.0]).collect();
        assert_eq!(origins, vec![ActionOrigin::Original(A2), ActionOrigin::Remain(0)]);
        assert_eq!(
            c.quotient.transition(c.remain_action(0)),
            &Distribution::dirac(c.s_minus)
        );
        let a2 = c.action_map[A2.0].unwrap();
        let plus_rep = c.collapsed(S_PLUS);
        let minus_rep = c.collapsed(S_MINUS);
        assert_eq!(
            c.quotient.transition(a2).support(),
            &[(plus_rep, 0.5), (minus_rep, 0.5)]
        );
        assert_eq!(
            c.quotient.transition(c.remain_action(1)),
            &Distribution::dirac(c.s_plus)
        );
    }

    #[test]
    fn rejects_overlap_and_non_components() {
        use models::fig3::*;
        let m = models::fig3();
        let ec = EndComponent::new([S_HAT, S1], [A0, A1]);
        assert!(matches!(
            collapse(&m, &[ec.clone(), ec], S_HAT, m.targets()),
            Err(CollapseError::Overlap { .. })
        ));
        let bad = EndComponent::new([S1], [B1]);
        assert!(matches!(
            collapse(&m, &[bad], S_HAT, m.targets()),
            Err(CollapseError::NotEndComponent { .. })
        ));
    }

    mod props {
        use super::*;
        use crate::graph::mec_decomposition;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn quotient_has_only_special_mecs(m in crate::testutil::arb_mdp(6, 3)) {
                let c = collapse_all_mecs(&m, m.initial(), m.targets());
                prop_assert!(validate_mdp(&c.quotient).is_ok());
                let mecs = mec_decomposition(&c.quotient);
                prop_assert_eq!(mecs, vec![
                    EndComponent::new([c.s_plus], [c.a_plus]),
                    EndComponent::new([c.s_minus], [c.a_minus]),
                ]);
            }

            #[test]
            fn surviving_actions_keep_their_owner(m in crate::testutil::arb_mdp(6, 3)) {
                let c = collapse_all_mecs(&m, m.initial(), m.targets());
                for (qa, origin) in c.action_origin.iter().enumerate() {
                    if let ActionOrigin::Original(a) = origin {
                        prop_assert_eq!(c.collapsed(m.owner(*a)), c.quotient.owner(ActionId(qa)));
                    }
                }
            }
        }
    }
}
