//! Seeded random models for tests and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::{Distribution, MarkovChain, Mdp, StateId, StateSet};

#[derive(Clone, Debug)]
pub struct RandomSpec {
    pub min_states: usize,
    pub max_states: usize,
    pub max_actions: usize,
    pub max_successors: usize,
    /// Successor weights are drawn from `1..=max_weight` and normalized.
    pub max_weight: u32,
    pub target_prob: f64,
}

impl RandomSpec {
    pub fn new(max_states: usize, max_actions: usize) -> Self {
        RandomSpec {
            min_states: 1,
            max_states,
            max_actions,
            max_successors: 3,
            max_weight: 4,
            target_prob: 0.2,
        }
    }
}

fn random_distribution<R: Rng>(rng: &mut R, candidates: &[StateId], spec: &RandomSpec) -> Distribution {
    let k = rng.gen_range(1..=spec.max_successors.min(candidates.len()).max(1));
    let picked: Vec<StateId> = candidates.choose_multiple(rng, k).copied().collect();
    let weights: Vec<u32> = (0..k).map(|_| rng.gen_range(1..=spec.max_weight)).collect();
    let total: u32 = weights.iter().sum();
    Distribution::from_entries_unchecked(
        picked
            .into_iter()
            .zip(weights)
            .map(|(s, w)| (s, w as f64 / total as f64)),
    )
}

/// An arbitrary MDP; may contain end components of any shape.
pub fn random_mdp<R: Rng>(rng: &mut R, spec: &RandomSpec) -> Mdp {
    let n = rng.gen_range(spec.min_states..=spec.max_states);
    let all: Vec<StateId> = (0..n).map(StateId).collect();
    let mut actions = Vec::new();
    for s in 0..n {
        let k = rng.gen_range(1..=spec.max_actions);
        for j in 0..k {
            actions.push((StateId(s), format!("a{s}_{j}"), random_distribution(rng, &all, spec)));
        }
    }
    let targets: StateSet = all.iter().copied().filter(|_| rng.gen_bool(spec.target_prob)).collect();
    let initial = StateId(rng.gen_range(0..n));
    Mdp::from_parts_unchecked(n, actions, initial, targets)
}

/// An MDP whose only end components are two absorbing states: the goal
/// (second to last) and the sink (last). Other states only move forward.
pub fn random_ec_free_mdp<R: Rng>(rng: &mut R, spec: &RandomSpec) -> Mdp {
    let n = rng.gen_range(spec.min_states.max(3)..=spec.max_states.max(3));
    let goal = StateId(n - 2);
    let sink = StateId(n - 1);
    let mut actions = Vec::new();
    for s in 0..n - 2 {
        let later: Vec<StateId> = (s + 1..n).map(StateId).collect();
        let k = rng.gen_range(1..=spec.max_actions);
        for j in 0..k {
            actions.push((StateId(s), format!("a{s}_{j}"), random_distribution(rng, &later, spec)));
        }
    }
    actions.push((goal, "a+".into(), Distribution::dirac(goal)));
    actions.push((sink, "a-".into(), Distribution::dirac(sink)));
    Mdp::from_parts_unchecked(n, actions, StateId(0), [goal].into_iter().collect())
}

pub fn random_chain<R: Rng>(rng: &mut R, spec: &RandomSpec) -> MarkovChain {
    let n = rng.gen_range(spec.min_states..=spec.max_states);
    let all: Vec<StateId> = (0..n).map(StateId).collect();
    let rows = (0..n).map(|_| random_distribution(rng, &all, spec)).collect();
    MarkovChain::new(rows).expect("generated rows are stochastic")
}

pub fn random_targets<R: Rng>(rng: &mut R, n: usize, p: f64) -> StateSet {
    (0..n).map(StateId).filter(|_| rng.gen_bool(p)).collect()
}

const FUZZ_TOKENS: [&str; 16] = [
    "mdp", "initial", "target", "action", "to", "#", "0", "1", "7", "-1", "0.5", "1.5", "0.0", "nan", "1e400", "x",
];

/// A few random line and token edits of a model file.
pub fn mutate_model_text<R: Rng>(rng: &mut R, text: &str) -> String {
    let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
    for _ in 0..rng.gen_range(1..=3) {
        if lines.is_empty() {
            lines.push(String::new());
        }
        let i = rng.gen_range(0..lines.len());
        match rng.gen_range(0..7) {
            0 => {
                lines.remove(i);
            }
            1 => {
                let l = lines[i].clone();
                lines.insert(i, l);
            }
            2 => {
                let j = rng.gen_range(0..lines.len());
                lines.swap(i, j);
            }
            3 | 4 => {
                let mut toks: Vec<String> = lines[i].split_whitespace().map(str::to_owned).collect();
                let tok = FUZZ_TOKENS.choose(rng).expect("non-empty").to_string();
                if toks.is_empty() || rng.gen_bool(0.3) {
                    let at = rng.gen_range(0..=toks.len());
                    toks.insert(at, tok);
                } else {
                    let at = rng.gen_range(0..toks.len());
                    toks[at] = tok;
                }
                lines[i] = toks.join(" ");
            }
            5 => {
                let mut chars: Vec<char> = lines[i].chars().collect();
                if !chars.is_empty() {
                    let at = rng.gen_range(0..chars.len());
                    chars.remove(at);
                }
                lines[i] = chars.into_iter().collect();
            }
            _ => {
                let mut chars: Vec<char> = lines[i].chars().collect();
                let at = rng.gen_range(0..=chars.len());
                let c = *[' ', '\t', '.', '-', '9', 'e', '\u{fffd}']
                    .choose(rng)
                    .expect("non-empty");
                chars.insert(at, c);
                lines[i] = chars.into_iter().collect();
            }
        }
    }
    let mut out = lines.join("\n");
    if rng.gen_bool(0.5) {
        out.push('\n');
    }
    out
}
