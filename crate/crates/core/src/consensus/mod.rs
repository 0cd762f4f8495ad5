//! Simulated implementations of market clearing: a central aggregator, and
//! a distributed scheme where agents talk only to graph neighbours.
//!
//! Rounds are synchronous and deterministic; there is no real networking.

mod aggregator;
mod distributed;
mod graph;

pub use aggregator::{
    run_aggregator, run_aggregator_on, submissions, AgentSubmission, AggregatorError, AggregatorRun, LogEntry,
};
pub use distributed::{
    run_distributed, AgentOutcome, ConsensusConfig, ConsensusError, ConsensusMode, ConsensusTrace,
    DistributedRun, TraceRow,
};
pub use graph::{CommGraph, GraphError};
