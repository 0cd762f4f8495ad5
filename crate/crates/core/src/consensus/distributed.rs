use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use super::graph::CommGraph;
use crate::model::{EquilibriumResult, MarketInstance, ModelKind, UtilityParams};
use crate::solver::{solve, MethodChoice, SolveError, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConsensusMode {
    /// Relay every `(theta_i, a_i)` until all agents hold the full profile.
    #[default]
    Flood,
    /// Average `a_i` with Metropolis weights to estimate `C/n`; preference
    /// profiles are assumed already shared.
    Average,
    /// Average both `a_i` and the quadratic parameters, then clear the
    /// homogeneous market at the averaged parameters.
    HomogeneousAverage,
}

impl FromStr for ConsensusMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "flood" => Ok(ConsensusMode::Flood),
            "average" => Ok(ConsensusMode::Average),
            "homogeneous" => Ok(ConsensusMode::HomogeneousAverage),
            other => Err(format!("unknown mode {other:?} (expected flood|average|homogeneous)")),
        }
    }
}

impl fmt::Display for ConsensusMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConsensusMode::Flood => "flood",
            ConsensusMode::Average => "average",
            ConsensusMode::HomogeneousAverage => "homogeneous",
        })
    }
}

#[derive(Debug, Clone)]
pub struct ConsensusConfig {
    pub mode: ConsensusMode,
    /// Round budget. Flooding needs the graph diameter.
    pub rounds: usize,
    /// Averaging stops once every `|estimate - C/n|` is at most this.
    pub tolerance: f64,
    pub solver: SolverConfig,
}

impl Default for ConsensusConfig {
    fn default() -> Self {
        Self { mode: ConsensusMode::Flood, rounds: 1000, tolerance: 1e-10, solver: SolverConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConsensusError {
    #[error("graph has {graph} nodes but the instance has {instance} agents")]
    SizeMismatch { graph: usize, instance: usize },
    #[error("no consensus after {rounds} rounds: error {error:e} > tolerance {tolerance:e}")]
    NotConverged { rounds: usize, error: f64, tolerance: f64 },
    #[error("agent {agent}: only quadratic parameters can be averaged (got {family})")]
    NotAveragable { agent: usize, family: &'static str },
    #[error("agent {agent}: {source}")]
    Solve { agent: usize, source: SolveError },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub round: usize,
    pub agent: usize,
    pub estimate: f64,
    pub error: f64,
}

/// Per-round, per-agent estimates of the network average production.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConsensusTrace {
    pub rows: Vec<TraceRow>,
    /// Rounds actually run; round 0 is the initial state.
    pub rounds: usize,
    pub final_errors: Vec<f64>,
}

impl ConsensusTrace {
    fn record(&mut self, round: usize, estimates: &[f64], target: f64) {
        self.rows.extend(estimates.iter().enumerate().map(|(agent, &estimate)| TraceRow {
            round,
            agent,
            estimate,
            error: (estimate - target).abs(),
        }));
    }

    /// `max_i |estimate_i - C/n|` for each recorded round.
    pub fn max_error_by_round(&self) -> Vec<f64> {
        let mut out = vec![0.0f64; self.rounds + 1];
        for r in &self.rows {
            out[r.round] = out[r.round].max(r.error);
        }
        out
    }

    pub fn final_max_error(&self) -> f64 {
        self.final_errors.iter().copied().fold(0.0, f64::max)
    }

    /// CSV with columns `round,agent,estimate,error`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// What one agent computed locally.
#[derive(Debug, Clone)]
pub struct AgentOutcome {
    pub agent: usize,
    /// The agent's estimate of `C`.
    pub capacity_estimate: f64,
    /// Equilibrium of the market as the agent sees it.
    pub result: EquilibriumResult,
    /// The agent's own trade in a trading market.
    pub own_trade: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct DistributedRun {
    pub outcomes: Vec<AgentOutcome>,
    pub trace: ConsensusTrace,
}

impl DistributedRun {
    /// Whether every agent arrived at a bit-identical price and allocation.
    pub fn agents_agree(&self) -> bool {
        self.outcomes.windows(2).all(|w| {
            w[0].result.lambda_star.to_bits() == w[1].result.lambda_star.to_bits()
                && w[0].result.x_star.iter().zip(&w[1].result.x_star).all(|(a, b)| a.to_bits() == b.to_bits())
        })
    }
}

pub fn run_distributed(
    instance: &MarketInstance,
    graph: &CommGraph,
    cfg: &ConsensusConfig,
) -> Result<DistributedRun, ConsensusError> {
    let n = instance.n();
    if graph.n() != n || instance.production.len() != n {
        return Err(ConsensusError::SizeMismatch { graph: graph.n(), instance: n });
    }
    match cfg.mode {
        ConsensusMode::Flood => flood(instance, graph, cfg),
        ConsensusMode::Average => average(instance, graph, cfg),
        ConsensusMode::HomogeneousAverage => homogeneous_average(instance, graph, cfg),
    }
}

fn flood(instance: &MarketInstance, graph: &CommGraph, cfg: &ConsensusConfig) -> Result<DistributedRun, ConsensusError> {
    let n = instance.n();
    let target = instance.capacity() / n as f64;
    // known[i][j]: agent i holds agent j's submission.
    let mut known: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i == j).collect()).collect();
    let estimates = |known: &[Vec<bool>]| -> Vec<f64> {
        known
            .iter()
            .map(|row| {
                row.iter().zip(&instance.production).filter(|(k, _)| **k).map(|(_, a)| a).sum::<f64>() / n as f64
            })
            .collect()
    };

    let mut trace = ConsensusTrace::default();
    trace.record(0, &estimates(&known), target);
    let needed = graph.diameter();
    let mut round = 0;
    while round < needed.min(cfg.rounds) {
        round += 1;
        let prev = known.clone();
        for (i, row) in known.iter_mut().enumerate() {
            for &j in graph.neighbors(i) {
                for (mine, theirs) in row.iter_mut().zip(&prev[j]) {
                    *mine |= *theirs;
                }
            }
        }
        trace.record(round, &estimates(&known), target);
    }
    trace.rounds = round;
    let last = estimates(&known);
    trace.final_errors = last.iter().map(|e| (e - target).abs()).collect();
    if known.iter().any(|row| row.iter().any(|k| !k)) {
        return Err(ConsensusError::NotConverged {
            rounds: round,
            error: trace.final_max_error(),
            tolerance: 0.0,
        });
    }

    // Every agent now reconstructs the same instance and solves it.
    let outcomes = (0..n)
        .map(|agent| {
            let view = instance.clone();
            let result =
                solve(&view, &cfg.solver, MethodChoice::Auto).map_err(|source| ConsensusError::Solve { agent, source })?;
            let own_trade = result.e_star.as_ref().map(|e| e[agent]);
            Ok(AgentOutcome { agent, capacity_estimate: view.capacity(), result, own_trade })
        })
        .collect::<Result<_, _>>()?;
    Ok(DistributedRun { outcomes, trace })
}

/// Synchronous Metropolis averaging of each column in `values`, until every
/// column is within `tolerance` of its true mean. Records column 0 in the trace.
fn mix(
    graph: &CommGraph,
    values: &mut [Vec<f64>],
    cfg: &ConsensusConfig,
) -> Result<ConsensusTrace, ConsensusError> {
    let n = graph.n();
    let targets: Vec<f64> = values.iter().map(|v| v.iter().sum::<f64>() / n as f64).collect();
    let weights = graph.metropolis_weights();
    let worst = |values: &[Vec<f64>]| {
        values
            .iter()
            .zip(&targets)
            .flat_map(|(v, t)| v.iter().map(move |x| (x - t).abs()))
            .fold(0.0, f64::max)
    };

    let mut trace = ConsensusTrace::default();
    trace.record(0, &values[0], targets[0]);
    let mut round = 0;
    while round < cfg.rounds && worst(values) > cfg.tolerance {
        round += 1;
        for v in values.iter_mut() {
            let next: Vec<f64> = weights.iter().map(|row| row.iter().map(|&(j, w)| w * v[j]).sum()).collect();
            *v = next;
        }
        trace.record(round, &values[0], targets[0]);
    }
    trace.rounds = round;
    trace.final_errors = values[0].iter().map(|e| (e - targets[0]).abs()).collect();
    let error = worst(values);
    if error > cfg.tolerance {
        return Err(ConsensusError::NotConverged { rounds: round, error, tolerance: cfg.tolerance });
    }
    Ok(trace)
}

/// The market as an agent sees it: the shared preference profile and its
/// estimate of `C`, spread evenly over the agents.
fn local_outcome(
    agent: usize,
    own_production: f64,
    preferences: Vec<UtilityParams>,
    share_estimate: f64,
    model: ModelKind,
    solver: &SolverConfig,
) -> Result<AgentOutcome, ConsensusError> {
    let n = preferences.len();
    let view = MarketInstance::new(model, vec![share_estimate; n], preferences);
    let result = solve(&view, solver, MethodChoice::Auto).map_err(|source| ConsensusError::Solve { agent, source })?;
    let own_trade = result.e_star.as_ref().map(|_| {
        let unused = view.capacity() - result.x_star.iter().sum::<f64>();
        own_production - result.x_star[agent] - unused / n as f64
    });
    Ok(AgentOutcome { agent, capacity_estimate: view.capacity(), result, own_trade })
}

fn average(instance: &MarketInstance, graph: &CommGraph, cfg: &ConsensusConfig) -> Result<DistributedRun, ConsensusError> {
    let mut values = vec![instance.production.clone()];
    let trace = mix(graph, &mut values, cfg)?;
    let outcomes = values[0]
        .iter()
        .enumerate()
        .map(|(agent, &share)| {
            local_outcome(
                agent,
                instance.production[agent],
                instance.preferences.clone(),
                share,
                instance.model,
                &cfg.solver,
            )
        })
        .collect::<Result<_, _>>()?;
    Ok(DistributedRun { outcomes, trace })
}

fn homogeneous_average(
    instance: &MarketInstance,
    graph: &CommGraph,
    cfg: &ConsensusConfig,
) -> Result<DistributedRun, ConsensusError> {
    let n = instance.n();
    let mut b = Vec::with_capacity(n);
    let mut m = Vec::with_capacity(n);
    for (agent, p) in instance.preferences.iter().enumerate() {
        match p {
            UtilityParams::Quadratic { b: bi, m: mi } => {
                b.push(*bi);
                m.push(*mi);
            }
            UtilityParams::PiecewiseLinear { .. } => {
                return Err(ConsensusError::NotAveragable { agent, family: "piecewise-linear" })
            }
            UtilityParams::Custom(_) => return Err(ConsensusError::NotAveragable { agent, family: "custom" }),
        }
    }
    let mut values = vec![instance.production.clone(), b, m];
    let trace = mix(graph, &mut values, cfg)?;
    let outcomes = (0..n)
        .map(|agent| {
            let theta = UtilityParams::quadratic(values[1][agent], values[2][agent]);
            local_outcome(
                agent,
                instance.production[agent],
                vec![theta; n],
                values[0][agent],
                instance.model,
                &cfg.solver,
            )
        })
        .collect::<Result<_, _>>()?;
    Ok(DistributedRun { outcomes, trace })
}
