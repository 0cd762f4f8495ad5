use serde::Serialize;

use crate::model::{validate_instance, EquilibriumResult, MarketInstance, ModelKind, UtilityParams};
use crate::solver::{solve, MethodChoice, SolveError, SolverConfig};

/// What one agent reports to the aggregator.
#[derive(Debug, Clone)]
pub struct AgentSubmission {
    pub agent: usize,
    pub production: f64,
    pub utility: UtilityParams,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum LogEntry {
    Collect { agent: usize, production: f64 },
    Broadcast { agent: usize, lambda_star: f64, x: f64 },
}

#[derive(Debug, Clone)]
pub struct AggregatorRun {
    pub result: EquilibriumResult,
    pub log: Vec<LogEntry>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AggregatorError {
    #[error("collection failed for agent {agent}: {reason}")]
    Collection { agent: usize, reason: String },
    #[error("aggregator: {0}")]
    Solve(#[from] SolveError),
}

/// Collect every submission, clear the market, broadcast `(lambda*, x_i*)`.
pub fn run_aggregator(
    submissions: &[AgentSubmission],
    model: ModelKind,
    cfg: &SolverConfig,
) -> Result<AggregatorRun, AggregatorError> {
    let mut log = Vec::with_capacity(2 * submissions.len());
    let mut production = Vec::with_capacity(submissions.len());
    let mut preferences = Vec::with_capacity(submissions.len());
    for (slot, s) in submissions.iter().enumerate() {
        if s.agent != slot {
            return Err(AggregatorError::Collection {
                agent: s.agent,
                reason: format!("submitted out of order (expected agent {slot})"),
            });
        }
        log.push(LogEntry::Collect { agent: s.agent, production: s.production });
        production.push(s.production);
        preferences.push(s.utility.clone());
    }

    let instance = MarketInstance::new(model, production, preferences);
    let report = validate_instance(&instance);
    if let Some(v) = report.violations.iter().find(|v| v.agent().is_some()) {
        return Err(AggregatorError::Collection {
            agent: v.agent().unwrap_or_default(),
            reason: v.to_string(),
        });
    }
    let result = solve(&instance, cfg, MethodChoice::Auto)?;
    log.extend(result.x_star.iter().enumerate().map(|(agent, &x)| LogEntry::Broadcast {
        agent,
        lambda_star: result.lambda_star,
        x,
    }));
    Ok(AggregatorRun { result, log })
}

/// Run the aggregator on an instance, one submission per agent.
pub fn run_aggregator_on(instance: &MarketInstance, cfg: &SolverConfig) -> Result<AggregatorRun, AggregatorError> {
    run_aggregator(&submissions(instance), instance.model, cfg)
}

pub fn submissions(instance: &MarketInstance) -> Vec<AgentSubmission> {
    instance
        .production
        .iter()
        .zip(&instance.preferences)
        .enumerate()
        .map(|(agent, (&production, utility))| AgentSubmission { agent, production, utility: utility.clone() })
        .collect()
}
