use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use hashbrown::HashMap;
use thiserror::Error;

use super::{Action, Plan};
use crate::model::{BlockId, Configuration, Instance, ModelError, Occupant, Vertex};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("vertex conflict at t={t} on {vertex}: {first} and {second}")]
    VertexConflict {
        t: u32,
        vertex: Vertex,
        first: BlockId,
        second: BlockId,
    },
    #[error("edge conflict at t={t} between {u} and {v}: {first} and {second}")]
    EdgeConflict {
        t: u32,
        u: Vertex,
        v: Vertex,
        first: BlockId,
        second: BlockId,
    },
    #[error("following conflict at t={t} on {vertex}: {follower} enters as {leader} leaves")]
    FollowingConflict {
        t: u32,
        vertex: Vertex,
        leader: BlockId,
        follower: BlockId,
    },
    #[error("illegal action at t={t} for {block}: {reason}")]
    IllegalAction {
        t: u32,
        block: BlockId,
        reason: &'static str,
    },
    #[error("target {block} is never completed")]
    IncompleteTarget { block: BlockId, at: Option<Vertex> },
    #[error(transparent)]
    Model(ModelError),
}

impl PlanError {
    /// Stable machine-readable name of the error class.
    pub fn code(&self) -> &'static str {
        match self {
            PlanError::VertexConflict { .. } => "vertex-conflict",
            PlanError::EdgeConflict { .. } => "edge-conflict",
            PlanError::FollowingConflict { .. } => "following-conflict",
            PlanError::IllegalAction { .. } => "illegal-action",
            PlanError::IncompleteTarget { .. } => "incomplete-target",
            PlanError::Model(_) => "model",
        }
    }
}

/// Replays a plan step by step from the instance's start configuration.
///
/// Actions sharing a timestamp are simultaneous. A move destination must be
/// free at the start of its step and destinations within a step must be
/// distinct, so swaps and following moves are both rejected. Returns the
/// final configuration, which is terminal on success.
pub fn validate(plan: &Plan, inst: &Instance) -> Result<Configuration, PlanError> {
    let grid = &inst.grid;
    let mut by_time: BTreeMap<u32, Vec<Action>> = BTreeMap::new();
    for (block, path) in &plan.paths {
        let mut last: Option<u32> = None;
        for a in &path.actions {
            let t = a.time();
            if a.block() != *block {
                return Err(PlanError::IllegalAction {
                    t,
                    block: *block,
                    reason: "action belongs to another block",
                });
            }
            if last.is_some_and(|l| t <= l) {
                return Err(PlanError::IllegalAction {
                    t,
                    block: *block,
                    reason: "timestamps are not strictly increasing",
                });
            }
            last = Some(t);
            by_time.entry(t).or_default().push(*a);
        }
    }

    let mut cfg = inst.start.clone();
    let mut dests: HashMap<usize, BlockId> = HashMap::new();
    let mut moving: HashMap<usize, (BlockId, usize)> = HashMap::new();
    for (&t, step) in &by_time {
        cfg.set_time(t);
        let cell = |v: Vertex, block: BlockId, reason| {
            grid.open_cell(v)
                .map_err(|_| PlanError::IllegalAction { t, block, reason })
        };
        moving.clear();
        for a in step {
            if let Action::Move { block, from, to, .. } = *a {
                let f = cell(from, block, "source is not a grid vertex")?;
                let d = cell(to, block, "destination is not a grid vertex")?;
                moving.insert(f, (block, d));
            }
        }
        dests.clear();
        for a in step {
            let block = a.block();
            let illegal = |reason| PlanError::IllegalAction { t, block, reason };
            match *a {
                Action::Move { from, to, .. } => {
                    let (f, d) = (grid.cell(from), grid.cell(to));
                    if cfg.cell_of(block) != Some(f) {
                        return Err(illegal("block is not at the move source"));
                    }
                    if !grid.are_adjacent(f, d) {
                        return Err(illegal("source and destination are not adjacent"));
                    }
                    match cfg.occupant(d) {
                        Occupant::Free => {}
                        Occupant::Block(other) => {
                            return Err(match moving.get(&d) {
                                Some(&(_, od)) if od == f => PlanError::EdgeConflict {
                                    t,
                                    u: from,
                                    v: to,
                                    first: other.min(block),
                                    second: other.max(block),
                                },
                                Some(_) => PlanError::FollowingConflict {
                                    t,
                                    vertex: to,
                                    leader: other,
                                    follower: block,
                                },
                                None => illegal("destination is not free"),
                            });
                        }
                        _ => return Err(illegal("destination is not free")),
                    }
                    if let Some(&other) = dests.get(&d) {
                        return Err(PlanError::VertexConflict {
                            t,
                            vertex: to,
                            first: other.min(block),
                            second: other.max(block),
                        });
                    }
                    dests.insert(d, block);
                }
                Action::Wait { at, .. } => {
                    let c = cell(at, block, "wait vertex is not a grid vertex")?;
                    if cfg.cell_of(block) != Some(c) {
                        return Err(illegal("block is not at the wait vertex"));
                    }
                }
                Action::Complete { at, .. } => {
                    if !block.is_target() {
                        return Err(illegal("only targets can complete"));
                    }
                    let c = cell(at, block, "complete vertex is not a grid vertex")?;
                    if cfg.cell_of(block) != Some(c) {
                        return Err(illegal("target is not at the complete vertex"));
                    }
                    if !inst.is_goal(block.id, c) {
                        return Err(illegal("target is not on one of its goal vertices"));
                    }
                }
            }
        }
        // Sources are vacated before destinations fill; destinations were
        // free at step start, so no mover overwrites another.
        for a in step {
            match *a {
                Action::Move { block, from, to, .. } => {
                    cfg.move_block(block, grid.cell(from), grid.cell(to));
                }
                Action::Complete { block, at, .. } => cfg.complete_target(block.id, grid.cell(at)),
                Action::Wait { .. } => {}
            }
        }
        debug_assert!(cfg.check_partition(grid));
    }
    cfg.set_time(plan.horizon());
    if let Some((id, c)) = cfg.remaining_targets().next() {
        return Err(PlanError::IncompleteTarget {
            block: BlockId::target(id),
            at: Some(grid.vertex(c)),
        });
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CostModel, GoalSpec, GridMap};
    use alloc::vec;

    fn v(r: u32, c: u32) -> Vertex {
        Vertex::new(r, c)
    }

    fn inst(h: u32, w: u32, t: &[Vertex], n: &[Vertex], goals: &[Vertex]) -> Instance {
        let grid = GridMap::new(h, w, &[]).unwrap();
        let start = Configuration::new(&grid, t, n).unwrap();
        Instance::new(grid, start, GoalSpec::Shared(goals.to_vec()), CostModel::TABLE1, "t").unwrap()
    }

    fn mv(block: BlockId, t: u32, from: Vertex, to: Vertex) -> Action {
        Action::Move { block, t, from, to }
    }

    fn plan(actions: &[Action]) -> Plan {
        let mut p = Plan::new();
        for a in actions {
            p.push(*a);
        }
        p
    }

    const T0: BlockId = BlockId::target(0);
    const T1: BlockId = BlockId::target(1);
    const N0: BlockId = BlockId::non_target(0);

    #[test]
    fn accepts_simple_plan() {
        let i = inst(1, 3, &[v(0, 0)], &[], &[v(0, 2)]);
        let p = plan(&[
            mv(T0, 0, v(0, 0), v(0, 1)),
            mv(T0, 1, v(0, 1), v(0, 2)),
            Action::Complete { block: T0, t: 2, at: v(0, 2) },
        ]);
        let end = validate(&p, &i).unwrap();
        assert!(end.is_terminal());
        assert_eq!(end.time(), 3);
    }

    #[test]
    fn same_free_destination_is_vertex_conflict() {
        let i = inst(1, 3, &[v(0, 0)], &[v(0, 2)], &[v(0, 1)]);
        let p = plan(&[mv(T0, 0, v(0, 0), v(0, 1)), mv(N0, 0, v(0, 2), v(0, 1))]);
        assert!(matches!(
            validate(&p, &i),
            Err(PlanError::VertexConflict { t: 0, vertex, .. }) if vertex == v(0, 1)
        ));
    }

    #[test]
    fn swap_is_edge_conflict() {
        let i = inst(1, 2, &[v(0, 0)], &[v(0, 1)], &[v(0, 1)]);
        let p = plan(&[mv(T0, 0, v(0, 0), v(0, 1)), mv(N0, 0, v(0, 1), v(0, 0))]);
        let e = validate(&p, &i).unwrap_err();
        assert_eq!(e.code(), "edge-conflict");
    }

    #[test]
    fn entering_a_vacated_vertex_is_following_conflict() {
        let i = inst(1, 3, &[v(0, 0)], &[v(0, 1)], &[v(0, 2)]);
        let p = plan(&[mv(N0, 0, v(0, 1), v(0, 2)), mv(T0, 0, v(0, 0), v(0, 1))]);
        assert!(matches!(
            validate(&p, &i),
            Err(PlanError::FollowingConflict { leader, follower, .. }) if leader == N0 && follower == T0
        ));
    }

    #[test]
    fn moving_into_completed_is_illegal() {
        let i = inst(1, 3, &[v(0, 0), v(0, 2)], &[], &[v(0, 1), v(0, 2)]);
        let p = plan(&[
            Action::Complete { block: T1, t: 0, at: v(0, 2) },
            mv(T0, 1, v(0, 0), v(0, 1)),
            Action::Complete { block: T0, t: 2, at: v(0, 1) },
        ]);
        assert!(validate(&p, &i).is_ok());
        let bad = plan(&[
            Action::Complete { block: T1, t: 0, at: v(0, 2) },
            mv(T0, 1, v(0, 0), v(0, 1)),
            mv(T0, 2, v(0, 1), v(0, 2)),
        ]);
        assert_eq!(validate(&bad, &i).unwrap_err().code(), "illegal-action");
    }

    #[test]
    fn missing_completion_is_reported() {
        let i = inst(1, 3, &[v(0, 0)], &[], &[v(0, 2)]);
        let p = plan(&[mv(T0, 0, v(0, 0), v(0, 1))]);
        assert_eq!(
            validate(&p, &i),
            Err(PlanError::IncompleteTarget { block: T0, at: Some(v(0, 1)) })
        );
    }

    #[test]
    fn decreasing_timestamps_are_rejected() {
        let i = inst(1, 3, &[v(0, 0)], &[], &[v(0, 2)]);
        let mut p = Plan::new();
        p.paths.insert(
            T0,
            super::super::Path {
                block: T0,
                actions: vec![mv(T0, 1, v(0, 0), v(0, 1)), mv(T0, 1, v(0, 1), v(0, 2))],
            },
        );
        assert_eq!(validate(&p, &i).unwrap_err().code(), "illegal-action");
    }

    #[test]
    fn nontarget_cannot_complete() {
        let i = inst(1, 3, &[v(0, 0)], &[v(0, 2)], &[v(0, 0), v(0, 2)]);
        let p = plan(&[Action::Complete { block: N0, t: 0, at: v(0, 2) }]);
        assert_eq!(validate(&p, &i).unwrap_err().code(), "illegal-action");
    }
}
