//! Result and error types shared by every solver.

use core::time::Duration;

use thiserror::Error;

use crate::heuristics::HeuristicError;
use crate::model::{BlockId, Instance, ModelError};
use crate::plan::{metrics, Metrics, Plan};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub expanded: u64,
    pub generated: u64,
    pub elapsed: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub plan: Plan,
    pub metrics: Metrics,
    /// Composite cost of the first solution found. Equals the final cost for
    /// solvers that stop at their first solution.
    pub first_cost: f64,
    pub first_time: Duration,
    pub stats: SolveStats,
}

impl SolveResult {
    pub(crate) fn single(inst: &Instance, plan: Plan, stats: SolveStats) -> Result<Self, SolveError> {
        let m = metrics(&plan, &inst.costs)?;
        Ok(Self {
            plan,
            metrics: m,
            first_cost: m.composite_cost,
            first_time: stats.elapsed,
            stats,
        })
    }

    pub fn final_cost(&self) -> f64 {
        self.metrics.composite_cost
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("time budget exhausted after {} expansions", .0.expanded)]
    Timeout(SolveStats),
    #[error("instance has no solution")]
    Infeasible(SolveStats),
    #[error("solver failed{}: {reason}", target.map(|t| alloc::format!(" on {t}")).unwrap_or_default())]
    Failure {
        target: Option<BlockId>,
        reason: &'static str,
        stats: SolveStats,
    },
    #[error("search exceeded its node limit of {0}")]
    NodeLimit(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl From<HeuristicError> for SolveError {
    fn from(e: HeuristicError) -> Self {
        match e {
            HeuristicError::UnreachableGoal(_) => SolveError::Infeasible(SolveStats::default()),
            HeuristicError::MissingTarget(t) => SolveError::Failure {
                target: Some(t),
                reason: "target missing from configuration",
                stats: SolveStats::default(),
            },
        }
    }
}
