//! Actions, paths and plans, with the composite-cost and makespan metrics.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::model::{BlockId, BlockKind, CostModel, Instance, ModelError, Vertex};

mod record;
mod text;
mod validate;

pub(crate) use record::{Recorder, StepAction};
pub use text::{format_plan, parse_plan, ParsePlanError};
pub use validate::{validate, PlanError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    Move {
        block: BlockId,
        t: u32,
        from: Vertex,
        to: Vertex,
    },
    Wait {
        block: BlockId,
        t: u32,
        at: Vertex,
    },
    Complete {
        block: BlockId,
        t: u32,
        at: Vertex,
    },
}

impl Action {
    pub fn block(&self) -> BlockId {
        match *self {
            Action::Move { block, .. } | Action::Wait { block, .. } | Action::Complete { block, .. } => {
                block
            }
        }
    }

    pub fn time(&self) -> u32 {
        match *self {
            Action::Move { t, .. } | Action::Wait { t, .. } | Action::Complete { t, .. } => t,
        }
    }

    /// Vertex the block occupies before the action.
    pub fn source(&self) -> Vertex {
        match *self {
            Action::Move { from, .. } => from,
            Action::Wait { at, .. } | Action::Complete { at, .. } => at,
        }
    }

    /// Vertex the block occupies after the action.
    pub fn destination(&self) -> Vertex {
        match *self {
            Action::Move { to, .. } => to,
            Action::Wait { at, .. } | Action::Complete { at, .. } => at,
        }
    }

    pub fn cost(&self, costs: &CostModel) -> Result<f64, ModelError> {
        let kind = self.block().kind;
        Ok(match self {
            Action::Move { .. } => costs.move_cost(kind),
            Action::Wait { .. } => costs.wait_cost(kind),
            Action::Complete { .. } => match kind {
                BlockKind::Target => costs.complete_tgt,
                BlockKind::NonTarget => {
                    return Err(ModelError::InvalidCosts("non-target blocks have no complete cost"))
                }
            },
        })
    }
}

/// Time-ordered actions of one block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    pub block: BlockId,
    pub actions: Vec<Action>,
}

impl Path {
    pub fn new(block: BlockId) -> Self {
        Self {
            block,
            actions: Vec::new(),
        }
    }

    pub fn last_time(&self) -> Option<u32> {
        self.actions.last().map(Action::time)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Plan {
    pub paths: BTreeMap<BlockId, Path>,
}

impl Plan {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends an action to its block's path. Callers keep per-block
    /// timestamps increasing; `validate` rejects plans that do not.
    pub fn push(&mut self, action: Action) {
        let block = action.block();
        self.paths
            .entry(block)
            .or_insert_with(|| Path::new(block))
            .actions
            .push(action);
    }

    pub fn num_actions(&self) -> usize {
        self.paths.values().map(|p| p.actions.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.num_actions() == 0
    }

    /// All actions ordered by (time, block).
    pub fn actions(&self) -> Vec<Action> {
        let mut all: Vec<Action> = self.paths.values().flat_map(|p| p.actions.iter().copied()).collect();
        all.sort_by_key(|a| (a.time(), a.block()));
        all
    }

    /// Wall-clock length of the plan: last timestamp + 1.
    pub fn horizon(&self) -> u32 {
        self.paths
            .values()
            .filter_map(Path::last_time)
            .max()
            .map_or(0, |t| t + 1)
    }

    /// Fills every idle timestep of each target, from time 0 up to its last
    /// action, with an explicit Wait at the vertex it occupies.
    pub fn with_target_waits(&self) -> Plan {
        let mut out = self.clone();
        for path in out.paths.values_mut() {
            if !path.block.is_target() || path.actions.is_empty() {
                continue;
            }
            let mut filled = Vec::with_capacity(path.actions.len());
            let mut t = 0;
            let mut at = path.actions[0].source();
            for a in &path.actions {
                while t < a.time() {
                    filled.push(Action::Wait {
                        block: path.block,
                        t,
                        at,
                    });
                    t += 1;
                }
                filled.push(*a);
                at = a.destination();
                t = a.time() + 1;
            }
            path.actions = filled;
        }
        out
    }

    /// Rewrites timestamps so that actions happen one per step in the given
    /// (time, block) order. Used to serialise a plan.
    pub fn retimed_sequential(&self) -> Plan {
        let mut out = Plan::new();
        for (t, a) in self.actions().into_iter().filter(|a| !matches!(a, Action::Wait { .. })).enumerate() {
            let t = t as u32;
            out.push(match a {
                Action::Move { block, from, to, .. } => Action::Move { block, t, from, to },
                Action::Complete { block, at, .. } => Action::Complete { block, t, at },
                Action::Wait { .. } => unreachable!(),
            });
        }
        out
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Metrics {
    pub composite_cost: f64,
    pub makespan: f64,
    pub moves_target: usize,
    pub moves_nontarget: usize,
    /// Last timestamp + 1; reported next to the cost-based makespan.
    pub horizon: u32,
}

pub fn path_cost(path: &Path, costs: &CostModel) -> Result<f64, ModelError> {
    path.actions.iter().try_fold(0.0, |acc, a| Ok(acc + a.cost(costs)?))
}

pub fn metrics(plan: &Plan, costs: &CostModel) -> Result<Metrics, ModelError> {
    let mut m = Metrics {
        horizon: plan.horizon(),
        ..Metrics::default()
    };
    for path in plan.paths.values() {
        let c = path_cost(path, costs)?;
        m.composite_cost += c;
        if c > m.makespan {
            m.makespan = c;
        }
        let moves = path.actions.iter().filter(|a| matches!(a, Action::Move { .. })).count();
        match path.block.kind {
            BlockKind::Target => m.moves_target += moves,
            BlockKind::NonTarget => m.moves_nontarget += moves,
        }
    }
    Ok(m)
}

/// Validates a plan and computes its metrics in one call.
pub fn checked_metrics(plan: &Plan, inst: &Instance) -> Result<Metrics, PlanError> {
    validate(plan, inst)?;
    metrics(plan, &inst.costs).map_err(PlanError::Model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(r: u32, c: u32) -> Vertex {
        Vertex::new(r, c)
    }

    fn target_path() -> Path {
        let b = BlockId::target(0);
        Path {
            block: b,
            actions: alloc::vec![
                Action::Move { block: b, t: 0, from: v(0, 0), to: v(0, 1) },
                Action::Move { block: b, t: 1, from: v(0, 1), to: v(0, 2) },
                Action::Complete { block: b, t: 2, at: v(0, 2) },
            ],
        }
    }

    #[test]
    fn path_cost_sums_table1() {
        assert_eq!(path_cost(&target_path(), &CostModel::TABLE1).unwrap(), 6.0);
    }

    #[test]
    fn nontarget_wait_is_free() {
        let b = BlockId::non_target(0);
        let p = Path {
            block: b,
            actions: alloc::vec![Action::Wait { block: b, t: 0, at: v(0, 0) }],
        };
        assert_eq!(path_cost(&p, &CostModel::TABLE1).unwrap(), 0.0);
        assert_eq!(path_cost(&Path::new(b), &CostModel::TABLE1).unwrap(), 0.0);
    }

    #[test]
    fn nontarget_complete_has_no_cost() {
        let b = BlockId::non_target(0);
        let p = Path {
            block: b,
            actions: alloc::vec![Action::Complete { block: b, t: 0, at: v(0, 0) }],
        };
        assert!(path_cost(&p, &CostModel::TABLE1).is_err());
    }

    #[test]
    fn composite_and_makespan() {
        let mut plan = Plan::new();
        for a in target_path().actions {
            plan.push(a);
        }
        let n = BlockId::non_target(0);
        plan.push(Action::Move { block: n, t: 0, from: v(1, 0), to: v(1, 1) });
        let m = metrics(&plan, &CostModel::TABLE1).unwrap();
        assert_eq!(m.composite_cost, 8.0);
        assert_eq!(m.makespan, 6.0);
        assert_eq!(m.moves_target, 2);
        assert_eq!(m.moves_nontarget, 1);
        assert_eq!(m.horizon, 3);

        let single: Plan = {
            let mut p = Plan::new();
            for a in target_path().actions {
                p.push(a);
            }
            p
        };
        let m = metrics(&single, &CostModel::TABLE1).unwrap();
        assert_eq!((m.composite_cost, m.makespan), (6.0, 6.0));
        assert_eq!(metrics(&Plan::new(), &CostModel::TABLE1).unwrap(), Metrics::default());
    }

    #[test]
    fn target_waits_fill_idle_steps() {
        let b = BlockId::target(0);
        let mut plan = Plan::new();
        plan.push(Action::Move { block: b, t: 2, from: v(0, 0), to: v(0, 1) });
        plan.push(Action::Complete { block: b, t: 4, at: v(0, 1) });
        let dense = plan.with_target_waits();
        let acts = &dense.paths[&b].actions;
        assert_eq!(acts.len(), 5);
        assert_eq!(acts[0], Action::Wait { block: b, t: 0, at: v(0, 0) });
        assert_eq!(acts[3], Action::Wait { block: b, t: 3, at: v(0, 1) });
        assert_eq!(metrics(&dense, &CostModel::TABLE1).unwrap().composite_cost, 7.0);
    }
}
