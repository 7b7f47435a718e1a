//! Bounded real-time dynamic programming: asynchronous interval iteration
//! along sampled paths, with optional on-the-fly end-component collapsing.
//!
//! Bounds are kept per original action. Each episode samples pairs on the
//! current quotient, backs them up from the bounds of the previous episode
//! and writes the results back. Between episodes an [`EcUpdatePolicy`] may
//! grow the set of collapsed end components.
//!
//! Random draws per sampled step: one tie-break index when several actions
//! share the maximal upper bound, then one uniform for the successor.

use std::collections::{BTreeSet, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::collapse::{collapse, ActionOrigin, CollapseError, CollapsedMdp};
use crate::graph::{mec_decomposition, validate_end_component, EndComponent};
use crate::model::{ActionId, Bound, BoundsMap, Distribution, Mdp, StateId, StateSet};
use crate::solver::{backup, state_bounds, target_mask, SolverResult};

pub const DEFAULT_MAX_EPISODES: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BrtdpError {
    #[error("model has an end component other than an absorbing state: {0:?}")]
    HasEndComponents(EndComponent),
    #[error("initial bounds cover {got} actions, model has {expected}")]
    BoundsShape { got: usize, expected: usize },
    #[error("end-component policy returned an invalid set: {0}")]
    EcPolicy(String),
    #[error(transparent)]
    Collapse(#[from] CollapseError),
    #[error("sampler returned an invalid pair ({state}, {action})")]
    BadPair { state: StateId, action: ActionId },
    #[error("sampler returned no pairs")]
    EmptySample,
}

/// What a sampler sees of the current run.
pub struct SampleContext<'a> {
    /// The working quotient.
    pub model: &'a Mdp,
    pub s_hat: StateId,
    pub bounds: &'a BoundsMap,
    pub eps: f64,
    /// Working states at which a path ends.
    pub stop: &'a [bool],
    /// Number of original states explored so far.
    pub explored: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Sample {
    pub pairs: Vec<(StateId, ActionId)>,
    /// The path ended because a pair came up a second time.
    pub repeated: bool,
    /// The path hit the length cap.
    pub capped: bool,
}

/// Chooses the state-action pairs to back up in one episode. Implementations
/// must return valid pairs of the working model in finite time and should
/// visit the initial state infinitely often over a run.
pub trait SamplePairs {
    fn sample(&mut self, ctx: &SampleContext<'_>, rng: &mut ChaCha8Rng) -> Sample;
}

/// Upper-bound guided path sampling: uniform among maximal actions, successor
/// by inverse CDF, stopping at a stop state, on the first repeated pair, or
/// after 20·(explored + 1) steps.
#[derive(Clone, Copy, Debug, Default)]
pub struct DefaultSampler;

pub fn default_sample_pairs(ctx: &SampleContext<'_>, rng: &mut ChaCha8Rng) -> Sample {
    let cap = 20 * (ctx.explored + 1);
    let mut out = Sample::default();
    let mut seen: HashSet<(StateId, ActionId)> = HashSet::new();
    let mut s = ctx.s_hat;
    while !ctx.stop[s.0] {
        if out.pairs.len() >= cap {
            out.capped = true;
            break;
        }
        let best = ctx.bounds.max_actions(ctx.model, s);
        let a = if best.len() == 1 {
            best[0]
        } else {
            best[rng.gen_range(0..best.len())]
        };
        if !seen.insert((s, a)) {
            out.repeated = true;
            break;
        }
        out.pairs.push((s, a));
        s = ctx.model.transition(a).sample_with(rng.gen::<f64>());
    }
    out
}

impl SamplePairs for DefaultSampler {
    fn sample(&mut self, ctx: &SampleContext<'_>, rng: &mut ChaCha8Rng) -> Sample {
        default_sample_pairs(ctx, rng)
    }
}

/// Every pair of the working model, every episode. Turns the run into
/// synchronous interval iteration.
#[derive(Clone, Copy, Debug, Default)]
pub struct AllPairs;

impl SamplePairs for AllPairs {
    fn sample(&mut self, ctx: &SampleContext<'_>, _rng: &mut ChaCha8Rng) -> Sample {
        Sample {
            pairs: ctx.model.actions().map(|a| (ctx.model.owner(a), a)).collect(),
            ..Sample::default()
        }
    }
}

/// Exploration data handed to an [`EcUpdatePolicy`].
pub struct EcStats<'a> {
    /// Original states whose actions have been seen.
    pub explored: &'a [bool],
    pub last: &'a Sample,
    pub episode: u64,
}

/// Produces the next set of end components to collapse. The result must
/// consist of disjoint end components of the original model, and every
/// current component must be contained in one of them.
pub trait EcUpdatePolicy {
    fn update(&mut self, m: &Mdp, current: &[EndComponent], stats: &EcStats<'_>) -> Vec<EndComponent>;
}

/// MECs of the explored part after each truncated episode.
#[derive(Clone, Copy, Debug, Default)]
pub struct DefaultEcUpdate;

/// Keeps whatever set the run started with.
#[derive(Clone, Copy, Debug, Default)]
pub struct KeepEcs;

impl EcUpdatePolicy for KeepEcs {
    fn update(&mut self, _m: &Mdp, current: &[EndComponent], _stats: &EcStats<'_>) -> Vec<EndComponent> {
        current.to_vec()
    }
}

/// MECs of the sub-model formed by the explored states. Successors outside
/// it are redirected to one fresh absorbing state, whose component is dropped.
pub fn explored_mecs(m: &Mdp, explored: &[bool]) -> Vec<EndComponent> {
    let n = m.num_states();
    let sink = StateId(n);
    let mut actions = Vec::new();
    let mut back = Vec::new();
    for a in m.actions().filter(|&a| explored[m.owner(a).0]) {
        let d = m.transition(a).map_states(|t| if explored[t.0] { t } else { sink });
        actions.push((m.owner(a), String::new(), d));
        back.push(a);
    }
    actions.push((sink, String::new(), Distribution::dirac(sink)));
    back.push(ActionId(usize::MAX));
    // unexplored states get a self-loop so the sub-model stays well formed;
    // they cannot reach explored states, so they never join a real component
    for s in m.states().filter(|s| !explored[s.0]) {
        actions.push((s, String::new(), Distribution::dirac(sink)));
        back.push(ActionId(usize::MAX));
    }
    let sub = Mdp::from_parts_unchecked(n + 1, actions, m.initial(), StateSet::new());
    mec_decomposition(&sub)
        .into_iter()
        .filter(|ec| ec.states.iter().all(|s| s.0 < n && explored[s.0]))
        .map(|ec| EndComponent {
            states: ec.states,
            actions: ec.actions.into_iter().map(|a| back[a.0]).collect(),
        })
        .collect()
}

/// Merges `found` into `current`: components sharing a state are united.
/// The union of two overlapping end components is again one.
pub fn merge_components(current: &[EndComponent], found: Vec<EndComponent>) -> Vec<EndComponent> {
    let mut out: Vec<EndComponent> = Vec::new();
    for ec in current.iter().cloned().chain(found) {
        let mut merged = ec;
        let mut i = 0;
        while i < out.len() {
            if out[i].states.is_disjoint(&merged.states) {
                i += 1;
            } else {
                let other = out.swap_remove(i);
                merged.states.extend(other.states);
                merged.actions.extend(other.actions);
                i = 0;
            }
        }
        out.push(merged);
    }
    out.sort_by_key(|ec| *ec.states.iter().next().expect("non-empty"));
    out
}

pub fn default_update_ecs(m: &Mdp, current: &[EndComponent], stats: &EcStats<'_>) -> Vec<EndComponent> {
    if !(stats.last.repeated || stats.last.capped) {
        return current.to_vec();
    }
    merge_components(current, explored_mecs(m, stats.explored))
}

impl EcUpdatePolicy for DefaultEcUpdate {
    fn update(&mut self, m: &Mdp, current: &[EndComponent], stats: &EcStats<'_>) -> Vec<EndComponent> {
        default_update_ecs(m, current, stats)
    }
}

#[derive(Clone, Debug)]
pub struct BrtdpConfig {
    pub eps: f64,
    pub seed: u64,
    pub max_episodes: u64,
    /// Bounds over the original actions; defaults to 0/1 with 1/1 on target actions.
    pub init: Option<BoundsMap>,
    pub init_ecs: Vec<EndComponent>,
}

impl BrtdpConfig {
    pub fn new(eps: f64, seed: u64) -> Self {
        BrtdpConfig {
            eps,
            seed,
            max_episodes: DEFAULT_MAX_EPISODES,
            init: None,
            init_ecs: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BrtdpStats {
    pub episodes: u64,
    /// Sampled steps over all episodes.
    pub steps: u64,
    /// Pair updates; each one backs up both bounds.
    pub backups: u64,
    pub explored_states: usize,
    /// Episodes after which the collapsed component set grew.
    pub ec_collapses: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    NoEc,
    General,
}

/// The state of one run.
pub struct BrtdpRun {
    m: Mdp,
    s_hat: StateId,
    targets: StateSet,
    mode: Mode,
    eps: f64,
    max_episodes: u64,
    rng: ChaCha8Rng,
    store: BoundsMap,
    ecs: Vec<EndComponent>,
    working: CollapsedMdp,
    bounds: BoundsMap,
    q_target: Vec<bool>,
    stop: Vec<bool>,
    explored: Vec<bool>,
    stats: BrtdpStats,
}

fn default_init(m: &Mdp, targets: &StateSet) -> BoundsMap {
    let mut b = BoundsMap::trivial(m.num_actions());
    for a in m.actions().filter(|&a| targets.contains(&m.owner(a))) {
        b.lo[a.0] = 1.0;
    }
    b
}

fn is_absorbing(m: &Mdp, ec: &EndComponent) -> bool {
    ec.states.len() == 1 && {
        let s = *ec.states.iter().next().expect("non-empty");
        m.available(s).iter().all(|a| ec.actions.contains(a))
    }
}

impl BrtdpRun {
    /// Run on a model whose only end components are absorbing states.
    pub fn no_ec(m: &Mdp, s_hat: StateId, cfg: &BrtdpConfig) -> Result<Self, BrtdpError> {
        let targets = m.targets().clone();
        let mecs = mec_decomposition(m);
        if let Some(bad) = mecs.iter().find(|ec| !is_absorbing(m, ec)) {
            return Err(BrtdpError::HasEndComponents(bad.clone()));
        }
        let mut store = match &cfg.init {
            Some(b) => b.clone(),
            None => {
                let mut b = default_init(m, &targets);
                for ec in mecs.iter().filter(|ec| ec.states.is_disjoint(&targets)) {
                    for a in &ec.actions {
                        b.up[a.0] = 0.0;
                    }
                }
                b
            }
        };
        let mut run = Self::build(m, s_hat, targets, cfg, Mode::NoEc, Vec::new(), &mut store)?;
        for ec in &mecs {
            for s in &ec.states {
                let w = run.working.collapsed(*s);
                run.stop[w.0] = true;
            }
        }
        Ok(run)
    }

    /// Run on an arbitrary model, starting from `cfg.init_ecs`.
    pub fn general(m: &Mdp, s_hat: StateId, targets: &StateSet, cfg: &BrtdpConfig) -> Result<Self, BrtdpError> {
        let mut store = cfg.init.clone().unwrap_or_else(|| default_init(m, targets));
        Self::build(
            m,
            s_hat,
            targets.clone(),
            cfg,
            Mode::General,
            cfg.init_ecs.clone(),
            &mut store,
        )
    }

    fn build(
        m: &Mdp,
        s_hat: StateId,
        targets: StateSet,
        cfg: &BrtdpConfig,
        mode: Mode,
        ecs: Vec<EndComponent>,
        store: &mut BoundsMap,
    ) -> Result<Self, BrtdpError> {
        if store.up.len() != m.num_actions() || store.lo.len() != m.num_actions() {
            return Err(BrtdpError::BoundsShape {
                got: store.up.len(),
                expected: m.num_actions(),
            });
        }
        check_components(m, &[], &ecs)?;
        let working = collapse(m, &ecs, s_hat, &targets)?;
        let mut run = BrtdpRun {
            m: m.clone(),
            s_hat,
            targets,
            mode,
            eps: cfg.eps,
            max_episodes: cfg.max_episodes,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            store: std::mem::replace(store, BoundsMap::trivial(0)),
            ecs,
            bounds: BoundsMap::trivial(0),
            q_target: Vec::new(),
            stop: Vec::new(),
            explored: vec![false; m.num_states()],
            working,
            stats: BrtdpStats::default(),
        };
        run.refresh_working();
        run.mark_explored(run.working.initial());
        Ok(run)
    }

    /// Regenerates quotient bounds from the per-action store.
    fn refresh_working(&mut self) {
        let q = &self.working.quotient;
        let mut b = BoundsMap::trivial(q.num_actions());
        for a in q.actions() {
            let (up, lo) = match self.working.action_origin[a.0] {
                ActionOrigin::Original(o) => (self.store.up[o.0], self.store.lo[o.0]),
                ActionOrigin::Plus => (1.0, 1.0),
                ActionOrigin::Minus => (0.0, 0.0),
                ActionOrigin::Remain(i) => {
                    let v = if self.working.rep_hits_target[i] { 1.0 } else { 0.0 };
                    (v, v)
                }
            };
            b.up[a.0] = up;
            b.lo[a.0] = lo;
        }
        self.bounds = b;
        self.q_target = target_mask(q.num_states(), q.targets());
        let mut stop = self.q_target.clone();
        stop[self.working.s_minus.0] = true;
        if self.mode == Mode::NoEc {
            for (i, s) in stop.iter_mut().enumerate() {
                *s |= self.stop.get(i).copied().unwrap_or(false);
            }
        }
        self.stop = stop;
    }

    fn mark_explored(&mut self, w: StateId) {
        for &s in &self.working.states_map[w.0] {
            if !self.explored[s.0] {
                self.explored[s.0] = true;
                self.stats.explored_states += 1;
            }
        }
    }

    pub fn model(&self) -> &Mdp {
        &self.m
    }

    pub fn working(&self) -> &CollapsedMdp {
        &self.working
    }

    /// Bounds over the working quotient's actions.
    pub fn working_bounds(&self) -> &BoundsMap {
        &self.bounds
    }

    /// Bounds over the original actions. Actions inside a collapsed component
    /// keep the value they had when it was collapsed.
    pub fn original_bounds(&self) -> &BoundsMap {
        &self.store
    }

    pub fn ecs(&self) -> &[EndComponent] {
        &self.ecs
    }

    pub fn stats(&self) -> BrtdpStats {
        self.stats
    }

    /// Current (lower, upper) bound of the initial state.
    pub fn initial_bounds(&self) -> (f64, f64) {
        let q = &self.working.quotient;
        let s = q.initial();
        if self.q_target[s.0] {
            return (1.0, 1.0);
        }
        (
            self.bounds.state_bound(q, s, Bound::Lo),
            self.bounds.state_bound(q, s, Bound::Up),
        )
    }

    pub fn converged(&self) -> bool {
        let (lo, up) = self.initial_bounds();
        up - lo < self.eps
    }

    /// Samples, backs up and updates the component set once.
    pub fn episode(&mut self, h: &mut dyn SamplePairs, p: &mut dyn EcUpdatePolicy) -> Result<Sample, BrtdpError> {
        let q = &self.working.quotient;
        let ctx = SampleContext {
            model: q,
            s_hat: q.initial(),
            bounds: &self.bounds,
            eps: self.eps,
            stop: &self.stop,
            explored: self.stats.explored_states,
        };
        let sample = h.sample(&ctx, &mut self.rng);
        for &(s, a) in &sample.pairs {
            if a.0 >= q.num_actions() || q.owner(a) != s {
                return Err(BrtdpError::BadPair { state: s, action: a });
            }
        }
        if sample.pairs.is_empty() && !self.converged() {
            return Err(BrtdpError::EmptySample);
        }

        let up = state_bounds(q, &self.bounds, Bound::Up);
        let lo = state_bounds(q, &self.bounds, Bound::Lo);
        let updates: Vec<(ActionId, f64, f64)> = sample
            .pairs
            .iter()
            .rev()
            .map(|&(_, a)| {
                // An action of a target state keeps its value 1 even when the
                // state sits inside a collapsed component.
                let of_target = matches!(self.working.action_origin[a.0],
                    ActionOrigin::Original(o) if self.targets.contains(&self.m.owner(o)));
                let (bu, bl) = if of_target {
                    (1.0, 1.0)
                } else {
                    (backup(q, &self.q_target, a, &up), backup(q, &self.q_target, a, &lo))
                };
                let new_up = bu.min(self.bounds.up[a.0]);
                let new_lo = bl.max(self.bounds.lo[a.0]);
                (a, new_up, new_lo)
            })
            .collect();
        for (a, new_up, new_lo) in updates {
            self.bounds.up[a.0] = new_up;
            self.bounds.lo[a.0] = new_lo;
            if let ActionOrigin::Original(o) = self.working.action_origin[a.0] {
                self.store.up[o.0] = new_up;
                self.store.lo[o.0] = new_lo;
            }
        }
        self.stats.episodes += 1;
        self.stats.steps += sample.pairs.len() as u64;
        self.stats.backups += sample.pairs.len() as u64;
        for &(s, _) in &sample.pairs {
            self.mark_explored(s);
        }

        if self.mode == Mode::General {
            let stats = EcStats {
                explored: &self.explored,
                last: &sample,
                episode: self.stats.episodes,
            };
            let next = p.update(&self.m, &self.ecs, &stats);
            check_components(&self.m, &self.ecs, &next)?;
            if next != self.ecs {
                self.working = collapse(&self.m, &next, self.s_hat, &self.targets)?;
                self.ecs = next;
                self.stats.ec_collapses += 1;
                self.refresh_working();
            }
        }
        Ok(sample)
    }

    /// Runs episodes until the gap at the initial state is below `eps`.
    pub fn run(&mut self, h: &mut dyn SamplePairs, p: &mut dyn EcUpdatePolicy) -> Result<SolverResult, BrtdpError> {
        while !self.converged() && self.stats.episodes < self.max_episodes {
            self.episode(h, p)?;
        }
        let (lower, upper) = self.initial_bounds();
        Ok(SolverResult {
            lower,
            upper,
            iterations: self.stats.episodes,
            converged: upper - lower < self.eps,
        })
    }
}

/// Checks that `next` is a disjoint family of end components of `m` that covers `current`.
fn check_components(m: &Mdp, current: &[EndComponent], next: &[EndComponent]) -> Result<(), BrtdpError> {
    let mut seen = BTreeSet::new();
    for ec in next {
        validate_end_component(m, ec).map_err(|e| BrtdpError::EcPolicy(e.to_string()))?;
        for s in &ec.states {
            if !seen.insert(*s) {
                return Err(BrtdpError::EcPolicy(format!("{s} is in two components")));
            }
        }
    }
    for ec in current {
        if !next.iter().any(|n| ec.is_sub_of(n)) {
            return Err(BrtdpError::EcPolicy(
                "a collapsed component was dropped or shrunk".into(),
            ));
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct BrtdpOutcome {
    pub result: SolverResult,
    pub stats: BrtdpStats,
}

/// BRTDP for models whose only end components are absorbing states.
pub fn brtdp_no_ec(
    m: &Mdp,
    s_hat: StateId,
    cfg: &BrtdpConfig,
    h: &mut dyn SamplePairs,
) -> Result<BrtdpOutcome, BrtdpError> {
    let mut run = BrtdpRun::no_ec(m, s_hat, cfg)?;
    let result = run.run(h, &mut KeepEcs)?;
    Ok(BrtdpOutcome {
        result,
        stats: run.stats(),
    })
}

/// BRTDP with end-component collapsing.
pub fn brtdp_general(
    m: &Mdp,
    s_hat: StateId,
    targets: &StateSet,
    cfg: &BrtdpConfig,
    h: &mut dyn SamplePairs,
    p: &mut dyn EcUpdatePolicy,
) -> Result<BrtdpOutcome, BrtdpError> {
    let mut run = BrtdpRun::general(m, s_hat, targets, cfg)?;
    let result = run.run(h, p)?;
    Ok(BrtdpOutcome {
        result,
        stats: run.stats(),
    })
}

/// [`brtdp_general`] with the default sampler and component policy.
pub fn brtdp_default(m: &Mdp, eps: f64, seed: u64) -> Result<BrtdpOutcome, BrtdpError> {
    brtdp_general(
        m,
        m.initial(),
        m.targets(),
        &BrtdpConfig::new(eps, seed),
        &mut DefaultSampler,
        &mut DefaultEcUpdate,
    )
}
