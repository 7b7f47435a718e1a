//! Command-line front end: argument parsing, validation and dispatch.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use thiserror::Error;

use crate::blackbox::{make_simulator, LimitedInfoOracle};
use crate::brtdp::{brtdp_general, BrtdpConfig, DefaultEcUpdate, DefaultSampler};
use crate::dql::{dql_general, dql_no_ec, effective_constants, DqlConfig, DqlOutcome, Overrides, DEFAULT_STEP_BUDGET};
use crate::graph::mec_decomposition;
use crate::io::{parse_model, RunReport};
use crate::model::{Mdp, StateId};
use crate::solver::{value_iteration, IntervalIteration};

/// Seeds of the learner and of the simulator it samples from are kept apart.
const SIMULATOR_SEED_MIX: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    /// Value iteration; the upper bound stays trivial.
    Vi,
    /// Interval iteration on the quotient of all maximal end components.
    Ii,
    /// Bounded real-time dynamic programming with end-component collapsing.
    Brtdp,
    /// Delayed Q-learning assuming no end components besides goal and sink.
    #[value(name = "dql-no-ec")]
    DqlNoEc,
    /// Delayed Q-learning with end-component detection.
    Dql,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Vi => "vi",
            Algorithm::Ii => "ii",
            Algorithm::Brtdp => "brtdp",
            Algorithm::DqlNoEc => "dql-no-ec",
            Algorithm::Dql => "dql",
        }
    }

    fn is_dql(self) -> bool {
        matches!(self, Algorithm::DqlNoEc | Algorithm::Dql)
    }
}

/// Bounds on the maximal probability of reaching the target states of an MDP.
#[derive(Clone, Debug, Parser)]
#[command(name = "mdp-reach", version)]
pub struct Args {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum)]
    pub algorithm: Algorithm,
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
    /// Confidence parameter, required by the dql algorithms.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Episode cap for brtdp, sweep cap for vi and ii.
    #[arg(long, default_value_t = 10_000_000)]
    pub max_episodes: u64,
    /// Step cap for the dql algorithms.
    #[arg(long, default_value_t = DEFAULT_STEP_BUDGET)]
    pub step_budget: u64,
    #[arg(long)]
    pub override_m: Option<u64>,
    #[arg(long)]
    pub override_eps_bar: Option<f64>,
    #[arg(long)]
    pub override_i: Option<u64>,
    /// Run dql with the computed constants even if they exceed the step budget.
    #[arg(long)]
    pub accept_true_constants: bool,
    #[arg(long)]
    pub json: bool,
    /// Add wall time and extra counters to the report.
    #[arg(long)]
    pub stats: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub eps: f64,
    pub delta: Option<f64>,
    pub seed: u64,
    pub max_episodes: u64,
    pub step_budget: u64,
    pub overrides: Overrides,
    pub accept_true_constants: bool,
    pub timed: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse {
        path: String,
        source: crate::io::ParseError,
    },
    #[error("{0}")]
    Algorithm(String),
}

impl RunConfig {
    pub fn new(algorithm: Algorithm, eps: f64) -> Self {
        RunConfig {
            algorithm,
            eps,
            delta: None,
            seed: 0,
            max_episodes: 10_000_000,
            step_budget: DEFAULT_STEP_BUDGET,
            overrides: Overrides::default(),
            accept_true_constants: false,
            timed: false,
        }
    }

    pub fn from_args(a: &Args) -> Result<Self, CliError> {
        let cfg = RunConfig {
            algorithm: a.algorithm,
            eps: a.epsilon,
            delta: a.delta,
            seed: a.seed,
            max_episodes: a.max_episodes,
            step_budget: a.step_budget,
            overrides: Overrides {
                m_bar: a.override_m,
                eps_bar: a.override_eps_bar,
                i_param: a.override_i,
            },
            accept_true_constants: a.accept_true_constants,
            timed: a.stats,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(CliError::Usage(format!("--epsilon must be positive, got {}", self.eps)));
        }
        if self.algorithm.is_dql() {
            match self.delta {
                None => return Err(CliError::Usage("--delta is required for dql algorithms".into())),
                Some(d) if !(d > 0.0 && d <= 1.0) => {
                    return Err(CliError::Usage(format!("--delta must be in (0, 1], got {d}")))
                }
                Some(_) => {}
            }
        } else if self.overrides.any() {
            return Err(CliError::Usage(
                "constant overrides apply only to dql algorithms".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of a run with its process exit code.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub exit_code: i32,
}

pub fn run(path: &std::path::Path, cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.display().to_string(),
        source,
    })?;
    let m = parse_model(&text).map_err(|source| CliError::Parse {
        path: path.display().to_string(),
        source,
    })?;
    run_model(&m, cfg)
}

/// The goal is the only target; the sink is the only absorbing non-target.
fn goal_and_sink(m: &Mdp) -> Result<(StateId, StateId), CliError> {
    let mut ts = m.targets().iter();
    let goal = match (ts.next(), ts.next()) {
        (Some(&t), None) => t,
        _ => return Err(CliError::Usage("dql-no-ec needs exactly one target state".into())),
    };
    let sinks: Vec<StateId> = mec_decomposition(m)
        .into_iter()
        .filter(|ec| ec.states.len() == 1 && !ec.states.contains(&goal))
        .map(|ec| *ec.states.iter().next().expect("non-empty"))
        .filter(|&s| m.available(s).len() == 1)
        .collect();
    match sinks.as_slice() {
        [s] => Ok((goal, *s)),
        // a state id outside the model is never reached
        [] => Ok((goal, StateId(m.num_states()))),
        _ => Err(CliError::Usage(
            "dql-no-ec needs at most one absorbing non-target state".into(),
        )),
    }
}

pub fn run_model(m: &Mdp, cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    cfg.validate()?;
    let start = Instant::now();
    let mut report = match cfg.algorithm {
        Algorithm::Vi => {
            let r = value_iteration(m, m.targets(), cfg.max_episodes, cfg.eps);
            let lower = r.values[m.initial().0];
            RunReport {
                algorithm: cfg.algorithm.name().into(),
                lower,
                upper: 1.0,
                width: 1.0 - lower,
                episodes: r.iterations,
                steps: 0,
                backups: r.iterations * m.num_actions() as u64,
                explored_states: m.num_states() as u64,
                ec_collapses: 0,
                wall_time_millis: None,
                converged: r.iterations < cfg.max_episodes,
                sound: true,
                seed: cfg.seed,
            }
        }
        Algorithm::Ii => {
            let mut ii = IntervalIteration::collapsed(m, m.initial(), m.targets());
            let r = ii.run(cfg.eps, cfg.max_episodes);
            let collapsed = ii.collapsed_model().map_or(0, |c| c.ecs.len() as u64);
            RunReport {
                algorithm: cfg.algorithm.name().into(),
                lower: r.lower,
                upper: r.upper,
                width: r.width(),
                episodes: r.iterations,
                steps: 0,
                backups: r.iterations * ii.model().num_actions() as u64,
                explored_states: m.num_states() as u64,
                ec_collapses: collapsed,
                wall_time_millis: None,
                converged: r.converged,
                sound: true,
                seed: cfg.seed,
            }
        }
        Algorithm::Brtdp => {
            let mut bc = BrtdpConfig::new(cfg.eps, cfg.seed);
            bc.max_episodes = cfg.max_episodes;
            let out = brtdp_general(
                m,
                m.initial(),
                m.targets(),
                &bc,
                &mut DefaultSampler,
                &mut DefaultEcUpdate,
            )
            .map_err(|e| CliError::Algorithm(e.to_string()))?;
            RunReport {
                algorithm: cfg.algorithm.name().into(),
                lower: out.result.lower,
                upper: out.result.upper,
                width: out.result.width(),
                episodes: out.stats.episodes,
                steps: out.stats.steps,
                backups: out.stats.backups,
                explored_states: out.stats.explored_states as u64,
                ec_collapses: out.stats.ec_collapses,
                wall_time_millis: None,
                converged: out.result.converged,
                sound: true,
                seed: cfg.seed,
            }
        }
        Algorithm::DqlNoEc | Algorithm::Dql => dql_report(m, cfg)?,
    };
    if cfg.timed {
        report.wall_time_millis = Some(start.elapsed().as_millis() as u64);
    }
    let exit_code = if report.converged { 0 } else { 2 };
    Ok(RunOutcome { report, exit_code })
}

fn dql_report(m: &Mdp, cfg: &RunConfig) -> Result<RunReport, CliError> {
    let delta = cfg.delta.expect("validated");
    let mut oracle = make_simulator(m, cfg.seed ^ SIMULATOR_SEED_MIX);
    let consts = effective_constants(
        cfg.eps,
        delta,
        oracle.action_bound(),
        oracle.prob_floor(),
        &cfg.overrides,
    )
    .map_err(|e| CliError::Usage(e.to_string()))?;
    if !cfg.accept_true_constants {
        if consts.m_bar > cfg.step_budget as f64 {
            return Err(CliError::Usage(format!(
                "update delay {:.3e} exceeds the step budget {}; pass overrides or --accept-true-constants",
                consts.m_bar, cfg.step_budget
            )));
        }
        if cfg.algorithm == Algorithm::Dql && consts.i_param.is_none() {
            return Err(CliError::Usage(
                "episode parameter is out of range; pass --override-i".into(),
            ));
        }
    }
    let dc = DqlConfig {
        eps: cfg.eps,
        delta,
        seed: cfg.seed,
        overrides: cfg.overrides,
        step_budget: cfg.step_budget,
    };
    let out: DqlOutcome = match cfg.algorithm {
        Algorithm::DqlNoEc => {
            let (goal, sink) = goal_and_sink(m)?;
            dql_no_ec(&mut oracle, goal, sink, &dc)
        }
        _ => dql_general(&mut oracle, &dc),
    }
    .map_err(|e| CliError::Algorithm(e.to_string()))?;
    Ok(RunReport {
        algorithm: cfg.algorithm.name().into(),
        lower: out.result.lower,
        upper: out.result.upper,
        width: out.result.width(),
        episodes: out.stats.episodes,
        steps: out.stats.steps,
        backups: out.stats.up_attempts + out.stats.lo_attempts,
        explored_states: out.stats.explored_states as u64,
        ec_collapses: out.stats.ec_collapses,
        wall_time_millis: None,
        converged: out.result.converged,
        sound: !out.unsound_constants,
        seed: cfg.seed,
    })
}

/// Parses arguments, runs, prints and returns the exit code.
pub fn main_with(args: Args) -> i32 {
    let cfg = match RunConfig::from_args(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    match run(&args.model, &cfg) {
        Ok(out) => {
            if args.json {
                println!("{}", out.report.to_json());
            } else {
                print!("{}", out.report.to_table());
            }
            if out.exit_code == 2 {
                eprintln!("budget exhausted before the bounds met");
            }
            out.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
