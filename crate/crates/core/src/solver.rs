//! Reference solvers: value iteration, interval iteration on the MEC
//! quotient, step-bounded reachability and exhaustive strategy enumeration.

use thiserror::Error;

use crate::collapse::{collapse_all_mecs, ActionOrigin, CollapsedMdp};
use crate::model::{induce_chain, ActionId, Bound, BoundsMap, MarkovChain, Mdp, MemorylessStrategy, StateId, StateSet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("{count} memoryless deterministic strategies exceed the limit of {limit}")]
    TooLarge { count: u128, limit: u128 },
    #[error("{0}")]
    Domain(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverResult {
    pub lower: f64,
    pub upper: f64,
    pub iterations: u64,
    pub converged: bool,
}

impl SolverResult {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }
}

pub(crate) fn target_mask(n: usize, targets: &StateSet) -> Vec<bool> {
    let mut mask = vec![false; n];
    for t in targets.iter().filter(|t| t.0 < n) {
        mask[t.0] = true;
    }
    mask
}

/// State bound maxima for every state of `m`.
pub fn state_bounds(m: &Mdp, b: &BoundsMap, which: Bound) -> Vec<f64> {
    m.states().map(|s| b.state_bound(m, s, which)).collect()
}

/// One Bellman backup of action `a`: 1 if its owner is a target, otherwise the
/// expectation of the successor state bounds.
pub fn backup(m: &Mdp, is_target: &[bool], a: ActionId, state_values: &[f64]) -> f64 {
    if is_target[m.owner(a).0] {
        1.0
    } else {
        m.transition(a).expect(state_values)
    }
}

#[derive(Clone, Debug)]
pub struct ValueIterationResult {
    pub values: Vec<f64>,
    pub iterations: u64,
    /// Always set: the difference-based stop gives no guarantee on the gap to the true value.
    pub lower_bound_only: bool,
}

/// Classic value iteration from the target indicator. Values approach the
/// true value from below.
pub fn value_iteration(m: &Mdp, targets: &StateSet, max_iters: u64, diff_stop: f64) -> ValueIterationResult {
    let is_target = target_mask(m.num_states(), targets);
    let mut v: Vec<f64> = is_target.iter().map(|&t| if t { 1.0 } else { 0.0 }).collect();
    let mut iterations = 0;
    while iterations < max_iters {
        let next: Vec<f64> = m
            .states()
            .map(|s| {
                if is_target[s.0] {
                    1.0
                } else {
                    m.available(s)
                        .iter()
                        .map(|&a| m.transition(a).expect(&v))
                        .fold(0.0, f64::max)
                }
            })
            .collect();
        iterations += 1;
        let diff = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = next;
        if diff < diff_stop {
            break;
        }
    }
    ValueIterationResult {
        values: v,
        iterations,
        lower_bound_only: true,
    }
}

/// Correct starting bounds for a quotient: trivial everywhere, 1/1 on target
/// actions (including the goal loop), 0/0 on the sink loop, and the exact
/// value on every remain action.
pub fn quotient_initial_bounds(c: &CollapsedMdp) -> BoundsMap {
    let q = &c.quotient;
    let mut b = BoundsMap::trivial(q.num_actions());
    for a in q.actions() {
        let exact = match c.action_origin[a.0] {
            ActionOrigin::Plus => Some(1.0),
            ActionOrigin::Minus => Some(0.0),
            ActionOrigin::Remain(i) => Some(if c.rep_hits_target[i] { 1.0 } else { 0.0 }),
            ActionOrigin::Original(_) => q.is_target(q.owner(a)).then_some(1.0),
        };
        if let Some(v) = exact {
            b.up[a.0] = v;
            b.lo[a.0] = v;
        }
    }
    b
}

/// Synchronous iteration of lower and upper bounds per action.
#[derive(Clone, Debug)]
pub struct IntervalIteration {
    model: Mdp,
    is_target: Vec<bool>,
    bounds: BoundsMap,
    collapsed: Option<CollapsedMdp>,
    sweeps: u64,
}

impl IntervalIteration {
    /// Works on the quotient in which every MEC is collapsed; converges.
    pub fn collapsed(m: &Mdp, s_hat: StateId, targets: &StateSet) -> Self {
        let c = collapse_all_mecs(m, s_hat, targets);
        let bounds = quotient_initial_bounds(&c);
        let model = c.quotient.clone();
        IntervalIteration {
            is_target: target_mask(model.num_states(), model.targets()),
            model,
            bounds,
            collapsed: Some(c),
            sweeps: 0,
        }
    }

    /// Works on `m` directly. Upper bounds may get stuck inside end components.
    pub fn uncollapsed(m: &Mdp, s_hat: StateId, targets: &StateSet) -> Self {
        let model = m.with_initial(s_hat).with_targets(targets.clone());
        let is_target = target_mask(model.num_states(), targets);
        let mut bounds = BoundsMap::trivial(model.num_actions());
        for a in model.actions().filter(|&a| is_target[model.owner(a).0]) {
            bounds.lo[a.0] = 1.0;
        }
        IntervalIteration {
            model,
            is_target,
            bounds,
            collapsed: None,
            sweeps: 0,
        }
    }

    pub fn model(&self) -> &Mdp {
        &self.model
    }

    pub fn bounds(&self) -> &BoundsMap {
        &self.bounds
    }

    pub fn collapsed_model(&self) -> Option<&CollapsedMdp> {
        self.collapsed.as_ref()
    }

    pub fn sweeps(&self) -> u64 {
        self.sweeps
    }

    pub fn sweep(&mut self) {
        let up = state_bounds(&self.model, &self.bounds, Bound::Up);
        let lo = state_bounds(&self.model, &self.bounds, Bound::Lo);
        let m = &self.model;
        let mut next = self.bounds.clone();
        for a in m.actions() {
            next.up[a.0] = backup(m, &self.is_target, a, &up);
            next.lo[a.0] = backup(m, &self.is_target, a, &lo);
        }
        self.bounds = next;
        self.sweeps += 1;
    }

    /// Bounds of a state of the working model.
    pub fn working_bounds(&self, s: StateId) -> (f64, f64) {
        (
            self.bounds.state_bound(&self.model, s, Bound::Lo),
            self.bounds.state_bound(&self.model, s, Bound::Up),
        )
    }

    /// Bounds of a state of the original model.
    pub fn original_bounds(&self, s: StateId) -> (f64, f64) {
        let w = match &self.collapsed {
            Some(c) => c.collapsed(s),
            None => s,
        };
        if self.is_target[w.0] {
            return (1.0, 1.0);
        }
        self.working_bounds(w)
    }

    pub fn initial_bounds(&self) -> (f64, f64) {
        let s = self.model.initial();
        if self.is_target[s.0] {
            (1.0, 1.0)
        } else {
            self.working_bounds(s)
        }
    }

    /// Sweeps until the gap at the initial state is below `eps`.
    pub fn run(&mut self, eps: f64, max_sweeps: u64) -> SolverResult {
        loop {
            let (lower, upper) = self.initial_bounds();
            let converged = upper - lower < eps;
            if converged || self.sweeps >= max_sweeps {
                return SolverResult {
                    lower,
                    upper,
                    iterations: self.sweeps,
                    converged,
                };
            }
            self.sweep();
        }
    }

    /// Sweeps until the gap is below `eps` at every original state.
    pub fn run_all(&mut self, eps: f64, max_sweeps: u64) -> bool {
        let n = self.model.num_states();
        loop {
            let widest = (0..n)
                .map(|s| {
                    let (lo, up) = if self.is_target[s] {
                        (1.0, 1.0)
                    } else {
                        self.working_bounds(StateId(s))
                    };
                    up - lo
                })
                .fold(0.0, f64::max);
            if widest < eps {
                return true;
            }
            if self.sweeps >= max_sweeps {
                return false;
            }
            self.sweep();
        }
    }
}

pub const DEFAULT_MAX_SWEEPS: u64 = 10_000_000;

/// Interval iteration on the MEC quotient. The result contains the value of `s_hat`.
pub fn interval_iteration(m: &Mdp, s_hat: StateId, targets: &StateSet, eps: f64) -> SolverResult {
    IntervalIteration::collapsed(m, s_hat, targets).run(eps, DEFAULT_MAX_SWEEPS)
}

/// Lower and upper bounds for every state, each of width below `eps`.
#[derive(Clone, Debug)]
pub struct AllBounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub iterations: u64,
    pub converged: bool,
}

pub fn interval_iteration_all(m: &Mdp, targets: &StateSet, eps: f64) -> AllBounds {
    let mut ii = IntervalIteration::collapsed(m, m.initial(), targets);
    let converged = ii.run_all(eps, DEFAULT_MAX_SWEEPS);
    let (lower, upper) = m.states().map(|s| ii.original_bounds(s)).unzip();
    AllBounds {
        lower,
        upper,
        iterations: ii.sweeps,
        converged,
    }
}

/// Probability of reaching `targets` within `k` steps, for every state.
pub fn bounded_reach_all(c: &MarkovChain, targets: &StateSet, k: u64) -> Vec<f64> {
    let is_target = target_mask(c.num_states(), targets);
    let mut v: Vec<f64> = is_target.iter().map(|&t| if t { 1.0 } else { 0.0 }).collect();
    let mut next = v.clone();
    for _ in 0..k {
        for s in c.states() {
            next[s.0] = if is_target[s.0] {
                1.0
            } else {
                c.transition(s).expect(&v)
            };
        }
        std::mem::swap(&mut v, &mut next);
        // An exact fixed point repeats forever.
        if v == next {
            break;
        }
    }
    v
}

pub fn bounded_reach(c: &MarkovChain, s: StateId, targets: &StateSet, k: u64) -> f64 {
    bounded_reach_all(c, targets, k)[s.0]
}

/// Smallest N with N ≥ ln(2/τ)·n·δ^(−n). A relative slack of 1e-12 absorbs
/// rounding when the bound is an exact integer.
pub fn horizon_for_tolerance(num_states: usize, delta_min: f64, tau: f64) -> Result<u64, SolverError> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(SolverError::Domain(format!("tolerance {tau} outside (0, 1]")));
    }
    if !(delta_min > 0.0 && delta_min <= 1.0) {
        return Err(SolverError::Domain(format!(
            "minimal probability {delta_min} outside (0, 1]"
        )));
    }
    let n = num_states as f64;
    let x = (2.0 / tau).ln() * n * delta_min.powf(-n);
    let x = x * (1.0 - 1e-12);
    if !x.is_finite() || x >= u64::MAX as f64 {
        return Err(SolverError::Domain("horizon does not fit in 64 bits".into()));
    }
    Ok(x.ceil().max(0.0) as u64)
}

/// Reachability probabilities under a chain: states that cannot reach the
/// targets are fixed to 0 and the rest solve a linear system by Gaussian
/// elimination.
pub fn chain_reach(c: &MarkovChain, targets: &StateSet) -> Vec<f64> {
    let n = c.num_states();
    let is_target = target_mask(n, targets);
    let mut preds = vec![Vec::new(); n];
    for s in c.states() {
        for t in c.transition(s).states() {
            preds[t.0].push(s.0);
        }
    }
    let mut can_reach = is_target.clone();
    let mut stack: Vec<usize> = (0..n).filter(|&s| is_target[s]).collect();
    while let Some(t) = stack.pop() {
        for &s in &preds[t] {
            if !can_reach[s] {
                can_reach[s] = true;
                stack.push(s);
            }
        }
    }
    // Unknowns are the non-target states that can reach a target; on them
    // (I - P) x = P·1_T has a unique solution.
    let unknown: Vec<usize> = (0..n).filter(|&s| can_reach[s] && !is_target[s]).collect();
    let mut col = vec![usize::MAX; n];
    for (i, &s) in unknown.iter().enumerate() {
        col[s] = i;
    }
    let k = unknown.len();
    let mut a = vec![vec![0.0; k + 1]; k];
    for (i, &s) in unknown.iter().enumerate() {
        a[i][i] = 1.0;
        for (t, p) in c.transition(StateId(s)).iter() {
            if is_target[t.0] {
                a[i][k] += p;
            } else if col[t.0] != usize::MAX {
                a[i][col[t.0]] -= p;
            }
        }
    }
    for j in 0..k {
        let pivot = (j..k)
            .max_by(|&x, &y| a[x][j].abs().total_cmp(&a[y][j].abs()))
            .expect("non-empty range");
        a.swap(j, pivot);
        let (top, rest) = a.split_at_mut(j + 1);
        let pivot_row = &top[j];
        for row in rest.iter_mut() {
            let f = row[j] / pivot_row[j];
            if f != 0.0 {
                for (x, &p) in row[j..].iter_mut().zip(&pivot_row[j..]) {
                    *x -= f * p;
                }
            }
        }
    }
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let tail: f64 = (i + 1..k).map(|q| a[i][q] * x[q]).sum();
        x[i] = ((a[i][k] - tail) / a[i][i]).clamp(0.0, 1.0);
    }
    (0..n)
        .map(|s| {
            if is_target[s] {
                1.0
            } else if col[s] != usize::MAX {
                x[col[s]]
            } else {
                0.0
            }
        })
        .collect()
}

/// Reachability probabilities when every state plays the given action.
pub fn strategy_value(m: &Mdp, picks: &[ActionId], targets: &StateSet) -> Result<Vec<f64>, SolverError> {
    let pi = MemorylessStrategy::deterministic(m, picks).map_err(|e| SolverError::Domain(e.to_string()))?;
    Ok(chain_reach(&induce_chain(m, &pi), targets))
}

pub const BRUTE_FORCE_LIMIT: u128 = 1_000_000;

/// Maximum over all memoryless deterministic strategies of the reachability
/// probability from `s`.
pub fn brute_force_value(m: &Mdp, s: StateId, targets: &StateSet) -> Result<f64, SolverError> {
    m.states()
        .map(|x| m.available(x).len() as u128)
        .try_fold(1u128, |acc, k| acc.checked_mul(k).filter(|&c| c <= BRUTE_FORCE_LIMIT))
        .ok_or(SolverError::TooLarge {
            count: u128::MAX,
            limit: BRUTE_FORCE_LIMIT,
        })?;
    let mut choice = vec![0usize; m.num_states()];
    let mut best: f64 = 0.0;
    loop {
        let picks: Vec<ActionId> = m.states().map(|x| m.available(x)[choice[x.0]]).collect();
        best = best.max(strategy_value(m, &picks, targets)?[s.0]);
        // odometer over per-state choices
        let mut i = 0;
        loop {
            if i == choice.len() {
                return Ok(best);
            }
            choice[i] += 1;
            if choice[i] < m.available(StateId(i)).len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}
