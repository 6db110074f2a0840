//! Planners. Each takes an instance and a time budget and returns a valid
//! plan or a [`SolveError`](crate::SolveError).

pub mod astar;
pub mod priority;
pub mod greedy;
pub mod lacam;
