//! Delayed Q-learning of reachability bounds through a [`LimitedInfoOracle`].
//!
//! Each action keeps an upper and a lower bound. Observed successor bounds
//! are accumulated per action and only after `m_bar` observations is an
//! update attempted; it succeeds only if it moves the bound by more than
//! `2·eps_bar`. Learn flags throttle repeated failed attempts.
//!
//! The general variant caps episodes at `2·i³` steps. A capped episode is
//! searched for pairs seen at least `i` times; these are treated as an end
//! component and either classified (target or zero) or merged into a fresh
//! representative state.
//!
//! Random draws per step: one tie-break index when several actions share
//! the maximal upper bound, then the oracle's successor draw.

use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::blackbox::{LimitedInfoOracle, OracleError};
use crate::graph::appear;
use crate::model::{ActionId, Bound, StateId};
use crate::solver::SolverResult;

pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DqlError {
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LearnFlag {
    Yes,
    Once,
    No,
}

pub fn decrease(f: LearnFlag) -> LearnFlag {
    match f {
        LearnFlag::Yes => LearnFlag::Once,
        LearnFlag::Once | LearnFlag::No => LearnFlag::No,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DqlConstants {
    pub eps_bar: f64,
    pub xi_bar: f64,
    /// Integer valued; can exceed the range of any integer type.
    pub m_bar: f64,
    /// `None` when the smallest admissible value does not fit in a u128.
    pub i_param: Option<u128>,
}

fn check_unit(name: &str, v: f64) -> Result<(), DqlError> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(DqlError::Domain(format!("{name} must be in (0, 1], got {v}")))
    }
}

pub fn xi_bar(action_bound: usize, eps_bar: f64) -> f64 {
    let a = action_bound as f64;
    2.0 * a * (1.0 + a / eps_bar)
}

pub fn m_bar(eps_bar: f64, xi_bar: f64, delta: f64) -> f64 {
    ((8.0 * xi_bar / delta).ln() / (2.0 * eps_bar * eps_bar)).ceil()
}

/// Update step, attempt bound and update delay for the given precision,
/// confidence, state and action bounds and probability floor. Without a
/// known state count, pass the action bound as `state_bound`.
pub fn compute_constants(
    eps: f64,
    delta: f64,
    state_bound: usize,
    action_bound: usize,
    q: f64,
) -> Result<DqlConstants, DqlError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(DqlError::Domain(format!("eps must be positive, got {eps}")));
    }
    check_unit("delta", delta)?;
    check_unit("q", q)?;
    if state_bound == 0 || action_bound == 0 {
        return Err(DqlError::Domain("state and action bounds must be positive".into()));
    }
    let s = state_bound as f64;
    let eps_bar = eps / 2.0 * q.powf(s) / (3.0 * s);
    if eps_bar <= 0.0 {
        return Err(DqlError::Domain("update step underflows".into()));
    }
    let xi = xi_bar(action_bound, eps_bar);
    Ok(DqlConstants {
        eps_bar,
        xi_bar: xi,
        m_bar: m_bar(eps_bar, xi, delta),
        i_param: choose_i(action_bound, q, delta),
    })
}

/// Natural log of the left-hand side of the episode-length condition.
pub fn choose_i_lhs_ln(action_bound: usize, q: f64, i: f64) -> f64 {
    let k = action_bound as f64 + 1.0;
    let c = q.powf(k) / k;
    (action_bound as f64).ln() + 2f64.ln() + (1.0 + i * i).ln() - (i - 1.0) * c - k * q.ln()
}

fn choose_i_holds(action_bound: usize, q: f64, delta: f64, i: u128) -> bool {
    choose_i_lhs_ln(action_bound, q, i as f64) <= (delta / 4.0).ln()
}

/// Smallest `i ≥ action_bound` meeting the episode-length condition.
/// The condition fails on an initial segment and holds on the rest, so
/// doubling finds an upper end and bisection the boundary.
pub fn choose_i(action_bound: usize, q: f64, delta: f64) -> Option<u128> {
    let start = action_bound.max(1) as u128;
    let holds = |i| choose_i_holds(action_bound, q, delta, i);
    let mut hi = start;
    while !holds(hi) {
        hi = hi.checked_mul(2)?;
        if hi > 1u128 << 120 {
            return None;
        }
    }
    if hi == start {
        return Some(start);
    }
    let mut lo = hi / 2; // fails
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Desk-scale replacements for the constants. Any override makes the result unsound.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Overrides {
    pub m_bar: Option<u64>,
    pub eps_bar: Option<f64>,
    pub i_param: Option<u64>,
}

impl Overrides {
    pub fn any(&self) -> bool {
        self.m_bar.is_some() || self.eps_bar.is_some() || self.i_param.is_some()
    }

    pub fn desk() -> Self {
        Overrides {
            m_bar: Some(2000),
            eps_bar: Some(0.01),
            i_param: Some(8),
        }
    }
}

/// Constants for a run: computed from the oracle's bounds, then overridden.
/// Derived quantities follow the overridden update step.
pub fn effective_constants(
    eps: f64,
    delta: f64,
    action_bound: usize,
    q: f64,
    ov: &Overrides,
) -> Result<DqlConstants, DqlError> {
    let mut c = compute_constants(eps, delta, action_bound, action_bound, q)?;
    if let Some(e) = ov.eps_bar {
        if !(e > 0.0 && e < 0.5) {
            return Err(DqlError::Domain(format!(
                "update step override must be in (0, 0.5), got {e}"
            )));
        }
        c.eps_bar = e;
        c.xi_bar = xi_bar(action_bound, e);
        c.m_bar = m_bar(e, c.xi_bar, delta);
    }
    if let Some(m) = ov.m_bar {
        if m == 0 {
            return Err(DqlError::Domain("update delay override must be positive".into()));
        }
        c.m_bar = m as f64;
    }
    if let Some(i) = ov.i_param {
        if i == 0 {
            return Err(DqlError::Domain("episode parameter override must be positive".into()));
        }
        c.i_param = Some(i as u128);
    }
    Ok(c)
}

#[derive(Clone, Debug)]
pub struct DqlConfig {
    pub eps: f64,
    pub delta: f64,
    pub seed: u64,
    pub overrides: Overrides,
    pub step_budget: u64,
}

impl DqlConfig {
    pub fn new(eps: f64, delta: f64, seed: u64) -> Self {
        DqlConfig {
            eps,
            delta,
            seed,
            overrides: Overrides::default(),
            step_budget: DEFAULT_STEP_BUDGET,
        }
    }

    pub fn with_overrides(mut self, ov: Overrides) -> Self {
        self.overrides = ov;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Accumulator {
    pub count: u64,
    pub acc: f64,
    pub learn: LearnFlag,
}

impl Accumulator {
    fn fresh() -> Self {
        Accumulator {
            count: 0,
            acc: 0.0,
            learn: LearnFlag::Yes,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActionRecord {
    pub up: f64,
    pub lo: f64,
    pub up_acc: Accumulator,
    pub lo_acc: Accumulator,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DqlStats {
    pub episodes: u64,
    pub steps: u64,
    pub up_attempts: u64,
    pub lo_attempts: u64,
    pub up_successes: u64,
    pub lo_successes: u64,
    /// Smallest decrease of a successful upper update.
    pub min_up_drop: f64,
    /// Smallest increase of a successful lower update.
    pub min_lo_rise: f64,
    /// Capped episodes whose candidate component had actions.
    pub ec_branches: u64,
    pub ec_targets: u64,
    pub ec_zeros: u64,
    pub ec_collapses: u64,
    /// Capped episodes whose candidate had no actions.
    pub empty_candidates: u64,
    pub navigation_steps: u64,
    pub explored_states: usize,
}

impl Default for DqlStats {
    fn default() -> Self {
        DqlStats {
            episodes: 0,
            steps: 0,
            up_attempts: 0,
            lo_attempts: 0,
            up_successes: 0,
            lo_successes: 0,
            min_up_drop: f64::INFINITY,
            min_lo_rise: f64::INFINITY,
            ec_branches: 0,
            ec_targets: 0,
            ec_zeros: 0,
            ec_collapses: 0,
            empty_candidates: 0,
            navigation_steps: 0,
            explored_states: 0,
        }
    }
}

/// Index of a state of the learner's abstract view.
pub type NodeId = usize;

#[derive(Clone, Debug)]
struct Node {
    actions: Vec<ActionId>,
    parent: Option<NodeId>,
    /// Original states this node stands for.
    members: BTreeSet<StateId>,
    /// Actions hidden inside this node, used to move between members.
    internal: Vec<ActionId>,
    target: bool,
    zero: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    NoEc { s_plus: StateId, s_minus: StateId },
    General,
}

/// Outcome of one episode.
#[derive(Clone, Debug, PartialEq)]
pub struct Episode {
    pub pairs: Vec<(NodeId, ActionId)>,
    pub capped: bool,
}

pub struct DqlRun<'o, O: LimitedInfoOracle + ?Sized> {
    oracle: &'o mut O,
    mode: Mode,
    eps: f64,
    step_budget: u64,
    consts: DqlConstants,
    unsound: bool,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
    node_of: HashMap<StateId, NodeId>,
    owner: HashMap<ActionId, StateId>,
    records: HashMap<ActionId, ActionRecord>,
    s_hat: NodeId,
    max_a: HashMap<NodeId, Vec<ActionId>>,
    stats: DqlStats,
}

#[derive(Clone, Debug)]
pub struct DqlOutcome {
    pub result: SolverResult,
    pub stats: DqlStats,
    pub constants: DqlConstants,
    pub unsound_constants: bool,
}

impl<'o, O: LimitedInfoOracle + ?Sized> DqlRun<'o, O> {
    /// Run for a system whose only end components are the given goal and sink.
    pub fn no_ec(oracle: &'o mut O, s_plus: StateId, s_minus: StateId, cfg: &DqlConfig) -> Result<Self, DqlError> {
        Self::build(oracle, Mode::NoEc { s_plus, s_minus }, cfg)
    }

    pub fn general(oracle: &'o mut O, cfg: &DqlConfig) -> Result<Self, DqlError> {
        let run = Self::build(oracle, Mode::General, cfg)?;
        if run.consts.i_param.is_none() {
            return Err(DqlError::Domain("episode parameter is out of range".into()));
        }
        Ok(run)
    }

    fn build(oracle: &'o mut O, mode: Mode, cfg: &DqlConfig) -> Result<Self, DqlError> {
        if cfg.eps.is_nan() || cfg.eps <= 0.0 {
            return Err(DqlError::Domain(format!("eps must be positive, got {}", cfg.eps)));
        }
        let consts = effective_constants(
            cfg.eps,
            cfg.delta,
            oracle.action_bound(),
            oracle.prob_floor(),
            &cfg.overrides,
        )?;
        let mut run = DqlRun {
            oracle,
            mode,
            eps: cfg.eps,
            step_budget: cfg.step_budget,
            consts,
            unsound: cfg.overrides.any(),
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            nodes: Vec::new(),
            node_of: HashMap::new(),
            owner: HashMap::new(),
            records: HashMap::new(),
            s_hat: 0,
            max_a: HashMap::new(),
            stats: DqlStats::default(),
        };
        let s0 = run.oracle.initial_state();
        run.s_hat = run.discover(s0);
        Ok(run)
    }

    /// Node of an original state, creating it on first sight.
    fn discover(&mut self, s: StateId) -> NodeId {
        if let Some(&n) = self.node_of.get(&s) {
            return self.rep(n);
        }
        let actions = self.oracle.available_actions(s);
        let target = match self.mode {
            Mode::NoEc { s_plus, .. } => s == s_plus,
            Mode::General => self.oracle.is_target(s),
        };
        let sink = matches!(self.mode, Mode::NoEc { s_minus, .. } if s == s_minus);
        for &a in &actions {
            self.owner.insert(a, s);
            self.records.insert(
                a,
                ActionRecord {
                    up: if sink { 0.0 } else { 1.0 },
                    lo: if target { 1.0 } else { 0.0 },
                    up_acc: Accumulator::fresh(),
                    lo_acc: Accumulator::fresh(),
                },
            );
        }
        let n = self.nodes.len();
        self.nodes.push(Node {
            actions,
            parent: None,
            members: [s].into_iter().collect(),
            internal: Vec::new(),
            target,
            zero: sink,
        });
        self.node_of.insert(s, n);
        self.stats.explored_states += 1;
        // a fresh node's bounds are still the ones it had at episode start
        let best = self.max_actions(n);
        self.max_a.insert(n, best);
        n
    }

    /// Follows representative links to a current node, compressing the path.
    fn rep(&mut self, n: NodeId) -> NodeId {
        let mut root = n;
        while let Some(p) = self.nodes[root].parent {
            root = p;
        }
        let mut cur = n;
        while let Some(p) = self.nodes[cur].parent {
            if p != root {
                self.nodes[cur].parent = Some(root);
            }
            cur = p;
        }
        root
    }

    fn resolve_ro(&self, mut n: NodeId) -> NodeId {
        while let Some(p) = self.nodes[n].parent {
            n = p;
        }
        n
    }

    fn max_actions(&self, n: NodeId) -> Vec<ActionId> {
        let acts = &self.nodes[n].actions;
        let best = acts
            .iter()
            .map(|a| self.records[a].up)
            .fold(f64::NEG_INFINITY, f64::max);
        acts.iter().copied().filter(|a| self.records[a].up == best).collect()
    }

    /// Bound of a current node: maximum over its available actions.
    pub fn node_bound(&self, n: NodeId, which: Bound) -> f64 {
        self.nodes[n]
            .actions
            .iter()
            .map(|a| {
                let r = &self.records[a];
                match which {
                    Bound::Up => r.up,
                    Bound::Lo => r.lo,
                }
            })
            .fold(0.0, f64::max)
    }

    /// Bound of an original state through its current representative.
    /// States not seen yet report their initial bound.
    pub fn state_bound(&self, s: StateId, which: Bound) -> f64 {
        match self.node_of.get(&s) {
            Some(&n) => self.node_bound(self.resolve_ro(n), which),
            None => {
                let (target, sink) = match self.mode {
                    Mode::NoEc { s_plus, s_minus } => (s == s_plus, s == s_minus),
                    Mode::General => (self.oracle.is_target(s), false),
                };
                match which {
                    Bound::Up if sink => 0.0,
                    Bound::Up => 1.0,
                    Bound::Lo if target => 1.0,
                    Bound::Lo => 0.0,
                }
            }
        }
    }

    pub fn initial_node(&self) -> NodeId {
        self.resolve_ro(self.s_hat)
    }

    /// (lower, upper) at the initial state.
    pub fn bounds(&self) -> (f64, f64) {
        let n = self.initial_node();
        (self.node_bound(n, Bound::Lo), self.node_bound(n, Bound::Up))
    }

    pub fn converged(&self) -> bool {
        let (lo, up) = self.bounds();
        up - lo < self.eps
    }

    pub fn record(&self, a: ActionId) -> Option<&ActionRecord> {
        self.records.get(&a)
    }

    pub fn records(&self) -> impl Iterator<Item = (ActionId, &ActionRecord)> {
        self.records.iter().map(|(a, r)| (*a, r))
    }

    pub fn stats(&self) -> DqlStats {
        self.stats
    }

    pub fn constants(&self) -> DqlConstants {
        self.consts
    }

    /// Current node of an original state, if it was seen.
    pub fn node_of_state(&self, s: StateId) -> Option<NodeId> {
        self.node_of.get(&s).map(|&n| self.resolve_ro(n))
    }

    /// Nodes of the current view.
    pub fn current_nodes(&self) -> Vec<NodeId> {
        (0..self.nodes.len())
            .filter(|&n| self.nodes[n].parent.is_none())
            .collect()
    }

    pub fn node_actions(&self, n: NodeId) -> &[ActionId] {
        &self.nodes[n].actions
    }

    pub fn node_members(&self, n: NodeId) -> &BTreeSet<StateId> {
        &self.nodes[n].members
    }

    pub fn node_is_target(&self, n: NodeId) -> bool {
        self.nodes[n].target
    }

    pub fn node_is_zero(&self, n: NodeId) -> bool {
        self.nodes[n].zero
    }

    /// Nodes created for detected components.
    pub fn representatives(&self) -> Vec<NodeId> {
        self.current_nodes()
            .into_iter()
            .filter(|&n| !self.nodes[n].internal.is_empty())
            .collect()
    }

    /// Whether an unseen original state counts as a target of the view.
    pub fn unseen_is_target(&self, s: StateId) -> bool {
        match self.mode {
            Mode::NoEc { s_plus, .. } => s == s_plus,
            Mode::General => self.oracle.is_target(s),
        }
    }

    /// Whether an unseen original state counts as a zero state of the view.
    pub fn unseen_is_zero(&self, s: StateId) -> bool {
        matches!(self.mode, Mode::NoEc { s_minus, .. } if s == s_minus)
    }

    pub fn is_no_ec(&self) -> bool {
        matches!(self.mode, Mode::NoEc { .. })
    }

    fn stop(&self, n: NodeId) -> bool {
        self.nodes[n].target || self.nodes[n].zero
    }

    fn cap(&self) -> Option<u128> {
        match self.mode {
            Mode::NoEc { .. } => None,
            Mode::General => {
                let i = self.consts.i_param.expect("checked at construction");
                Some(i.saturating_pow(3).saturating_mul(2))
            }
        }
    }

    fn observe(&mut self, a: ActionId, next: NodeId) {
        let up_next = self.node_bound(next, Bound::Up);
        let lo_next = self.node_bound(next, Bound::Lo);
        let m = self.consts.m_bar;
        let eb = self.consts.eps_bar;
        let r = self.records.get_mut(&a).expect("sampled actions are known");
        for (acc, v) in [(&mut r.up_acc, up_next), (&mut r.lo_acc, lo_next)] {
            if acc.learn != LearnFlag::No {
                acc.count += 1;
                acc.acc += v;
            }
        }
        let mut reset_up = false;
        let mut reset_lo = false;
        if r.up_acc.count as f64 == m {
            self.stats.up_attempts += 1;
            let mean = r.up_acc.acc / m;
            if mean < r.up - 2.0 * eb {
                let new = mean + eb;
                self.stats.min_up_drop = self.stats.min_up_drop.min(r.up - new);
                r.up = new;
                self.stats.up_successes += 1;
                reset_up = true;
            } else {
                r.up_acc.learn = decrease(r.up_acc.learn);
            }
            r.up_acc.count = 0;
            r.up_acc.acc = 0.0;
        }
        if r.lo_acc.count as f64 == m {
            self.stats.lo_attempts += 1;
            let mean = r.lo_acc.acc / m;
            if mean > r.lo + 2.0 * eb {
                let new = mean - eb;
                self.stats.min_lo_rise = self.stats.min_lo_rise.min(new - r.lo);
                r.lo = new;
                self.stats.lo_successes += 1;
                reset_lo = true;
            } else {
                r.lo_acc.learn = decrease(r.lo_acc.learn);
            }
            r.lo_acc.count = 0;
            r.lo_acc.acc = 0.0;
        }
        if reset_up || reset_lo {
            for r in self.records.values_mut() {
                if reset_up {
                    r.up_acc.learn = LearnFlag::Yes;
                }
                if reset_lo {
                    r.lo_acc.learn = LearnFlag::Yes;
                }
            }
        }
    }

    /// Remaining step budget is exhausted.
    pub fn out_of_budget(&self) -> bool {
        self.stats.steps >= self.step_budget
    }

    /// Samples one episode and learns from it. Does nothing once converged.
    pub fn episode(&mut self) -> Result<Episode, DqlError> {
        let mut out = Episode {
            pairs: Vec::new(),
            capped: false,
        };
        if self.converged() {
            return Ok(out);
        }
        self.max_a.clear();
        for n in self.current_nodes() {
            let best = self.max_actions(n);
            self.max_a.insert(n, best);
        }
        self.oracle.reset();
        let cap = self.cap();
        let mut s = self.initial_node();
        while !self.stop(s) {
            if cap.is_some_and(|c| out.pairs.len() as u128 >= c) {
                out.capped = true;
                break;
            }
            if self.out_of_budget() {
                break;
            }
            let best = &self.max_a[&s];
            let a = if best.len() == 1 {
                best[0]
            } else {
                best[self.rng.gen_range(0..best.len())]
            };
            let owner = self.owner[&a];
            if self.oracle.position() != owner {
                let internal = self.nodes[s].internal.clone();
                self.stats.navigation_steps += self.oracle.walk_to(owner, &internal)?;
            }
            let raw = self.oracle.succ(a)?;
            let next = self.discover(raw);
            self.observe(a, next);
            out.pairs.push((s, a));
            self.stats.steps += 1;
            s = next;
        }
        if out.capped {
            self.update_components(&out.pairs);
        }
        self.stats.episodes += 1;
        Ok(out)
    }

    fn update_components(&mut self, path: &[(NodeId, ActionId)]) {
        let i = self.consts.i_param.expect("general mode") as usize;
        let (r, b) = appear(path, i, path.len()).expect("path has the full length");
        if b.is_empty() {
            self.stats.empty_candidates += 1;
            return;
        }
        self.stats.ec_branches += 1;
        let c: Vec<ActionId> = r
            .iter()
            .flat_map(|&n| self.nodes[n].actions.iter().copied())
            .filter(|a| !b.contains(a))
            .collect();
        if r.iter().any(|&n| self.nodes[n].target) {
            self.stats.ec_targets += 1;
            for &n in &r {
                self.nodes[n].target = true;
            }
            for a in &b {
                self.records.get_mut(a).expect("known").lo = 1.0;
            }
        } else if c.is_empty() {
            self.stats.ec_zeros += 1;
            for &n in &r {
                self.nodes[n].zero = true;
            }
            for a in &b {
                self.records.get_mut(a).expect("known").up = 0.0;
            }
        } else {
            self.stats.ec_collapses += 1;
            let rep = self.nodes.len();
            let mut members = BTreeSet::new();
            let mut internal: Vec<ActionId> = b.iter().copied().collect();
            for &n in &r {
                members.extend(self.nodes[n].members.iter().copied());
                internal.extend(self.nodes[n].internal.iter().copied());
                self.nodes[n].parent = Some(rep);
            }
            internal.sort();
            self.nodes.push(Node {
                actions: c,
                parent: None,
                members,
                internal,
                target: false,
                zero: false,
            });
            // the initial state follows through rep resolution
        }
    }

    /// Runs episodes until the gap at the initial state is below eps or the step budget is spent.
    pub fn run(&mut self) -> Result<SolverResult, DqlError> {
        while !self.converged() && !self.out_of_budget() {
            self.episode()?;
        }
        Ok(self.result())
    }

    pub fn result(&self) -> SolverResult {
        let (lower, upper) = self.bounds();
        SolverResult {
            lower,
            upper,
            iterations: self.stats.episodes,
            converged: upper - lower < self.eps,
        }
    }

    fn outcome(&self, result: SolverResult) -> DqlOutcome {
        DqlOutcome {
            result,
            stats: self.stats,
            constants: self.consts,
            unsound_constants: self.unsound,
        }
    }
}

/// Delayed Q-learning for systems whose only end components are `s_plus` and `s_minus`.
pub fn dql_no_ec<O: LimitedInfoOracle + ?Sized>(
    o: &mut O,
    s_plus: StateId,
    s_minus: StateId,
    cfg: &DqlConfig,
) -> Result<DqlOutcome, DqlError> {
    let mut run = DqlRun::no_ec(o, s_plus, s_minus, cfg)?;
    let r = run.run()?;
    Ok(run.outcome(r))
}

/// Delayed Q-learning with end-component detection.
pub fn dql_general<O: LimitedInfoOracle + ?Sized>(o: &mut O, cfg: &DqlConfig) -> Result<DqlOutcome, DqlError> {
    let mut run = DqlRun::general(o, cfg)?;
    let r = run.run()?;
    Ok(run.outcome(r))
}

pub mod inspect;
