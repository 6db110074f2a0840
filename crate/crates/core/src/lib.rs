//! Models and solvers for block rearrangement on 4-connected grids.
//!
//! Blocks are targets, which must each be completed on one of their goal
//! vertices, or non-targets, which only move out of the way. A completed
//! target freezes its vertex for the rest of the plan.

#![no_std]

extern crate alloc;

pub mod benchgen;
pub mod budget;
pub mod heuristics;
pub mod model;
pub mod oracle;
pub mod pddl;
pub mod plan;
pub mod solve;
pub mod solvers;

pub use budget::{Budget, Clock};
pub use model::{
    apply_action, is_terminal, BlockId, BlockKind, Cell, Configuration, CostModel, GoalSpec, GridMap,
    Instance, ModelError, Occupant, Vertex,
};
pub use plan::{metrics, path_cost, validate, Action, Metrics, Path, Plan, PlanError};
pub use solve::{SolveError, SolveResult, SolveStats};
