//! Greedy planner: each target walks its least-blocking path, pulling the
//! nearest blank ahead of it one vertex at a time. Vertex blocking times let
//! later targets start before earlier plans have finished.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::budget::Budget;
use crate::heuristics::{compute_priority, least_blocking_cells, HeuristicError, TraversalWeights};
use crate::model::{BlockId, Cell, Configuration, GridMap, Instance, Occupant, Vertex};
use crate::plan::{Action, Plan};
use crate::solve::{SolveError, SolveResult, SolveStats};

/// Earliest step at which each vertex is clear of earlier plans. Vertices
/// absent from the map are free from step 0.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BlockingTimes {
    pub earliest_free: BTreeMap<Vertex, u32>,
}

impl BlockingTimes {
    /// Marks a vertex that never becomes free again.
    pub const NEVER: u32 = u32::MAX;

    pub fn get(&self, v: Vertex) -> u32 {
        self.earliest_free.get(&v).copied().unwrap_or(0)
    }
}

pub fn compute_vertex_blocking_time(plan: &Plan) -> BlockingTimes {
    let mut psi = BlockingTimes::default();
    let mut touch = |v: Vertex, t: u32| {
        let e = psi.earliest_free.entry(v).or_insert(0);
        *e = (*e).max(t);
    };
    for a in plan.actions() {
        match a {
            Action::Move { t, from, to, .. } => {
                touch(from, t + 1);
                touch(to, t + 1);
            }
            Action::Wait { t, at, .. } => touch(at, t + 1),
            Action::Complete { at, .. } => touch(at, BlockingTimes::NEVER),
        }
    }
    psi
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum GreedyError {
    #[error("no blank can be routed to {0}")]
    NoBlank(Vertex),
}

/// Cell-level blocking times used while planning.
struct Psi(Vec<u32>);

impl Psi {
    fn earliest(&self, cells: &[Cell], after: Option<u32>) -> u32 {
        let floor = after.map_or(0, |t| t + 1);
        cells.iter().map(|&c| self.0[c]).fold(floor, u32::max)
    }

    fn touch(&mut self, cells: &[Cell], t: u32) {
        for &c in cells {
            self.0[c] = self.0[c].max(t + 1);
        }
    }
}

/// Chain of cells from the nearest blank to `u`: `[blank, .., u]`, routed
/// through free or non-target cells outside `forbidden`. Ties go to the
/// lowest cell index within a BFS layer.
fn blank_route(cfg: &Configuration, grid: &GridMap, u: Cell, forbidden: &[bool]) -> Option<Vec<Cell>> {
    let n = grid.num_cells();
    let mut parent = vec![usize::MAX; n];
    parent[u] = u;
    let mut layer = vec![u];
    while !layer.is_empty() {
        let mut next = Vec::new();
        for &c in &layer {
            for &nb in grid.adjacent(c) {
                let nb = nb as usize;
                if parent[nb] != usize::MAX || forbidden[nb] {
                    continue;
                }
                match cfg.occupant(nb) {
                    Occupant::Free | Occupant::Block(BlockId { kind: crate::model::BlockKind::NonTarget, .. }) => {
                        parent[nb] = c;
                        next.push(nb);
                    }
                    _ => {}
                }
            }
        }
        next.sort_unstable();
        if let Some(&blank) = next.iter().find(|&&c| cfg.is_free(c)) {
            let mut chain = vec![blank];
            let mut c = blank;
            while c != u {
                c = parent[c];
                chain.push(c);
            }
            return Some(chain);
        }
        next.retain(|&c| !cfg.is_free(c));
        layer = next;
    }
    None
}

/// Shifts non-targets along a blank route so `u` ends up free, scheduling
/// each shift after `after` and after every blocking time it touches.
fn pull_blank(
    cfg: &mut Configuration,
    grid: &GridMap,
    chain: &[Cell],
    psi: &mut Psi,
    after: &mut Option<u32>,
    out: &mut Vec<Action>,
) {
    for w in chain.windows(2) {
        let (to, from) = (w[0], w[1]);
        let Occupant::Block(block) = cfg.occupant(from) else {
            unreachable!("blank route passes through a non-block cell")
        };
        let t = psi.earliest(&[from, to], *after);
        out.push(Action::Move {
            block,
            t,
            from: grid.vertex(from),
            to: grid.vertex(to),
        });
        cfg.move_block(block, from, to);
        psi.touch(&[from, to], t);
        *after = Some(t);
    }
}

/// Moves that relocate the nearest blank onto `u`, avoiding `forbidden`.
pub fn move_blank_to_vertex(
    cfg: &Configuration,
    grid: &GridMap,
    u: Vertex,
    forbidden: &[Vertex],
    psi: &BlockingTimes,
) -> Result<Vec<Action>, GreedyError> {
    let uc = grid.open_cell(u).map_err(|_| GreedyError::NoBlank(u))?;
    if cfg.is_free(uc) {
        return Ok(Vec::new());
    }
    let mut mask = vec![false; grid.num_cells()];
    for &f in forbidden {
        if grid.contains(f) {
            mask[grid.cell(f)] = true;
        }
    }
    let chain = blank_route(cfg, grid, uc, &mask).ok_or(GreedyError::NoBlank(u))?;
    let mut cells = Psi((0..grid.num_cells()).map(|c| psi.get(grid.vertex(c))).collect());
    let mut cfg = cfg.clone();
    let mut out = Vec::new();
    pull_blank(&mut cfg, grid, &chain, &mut cells, &mut None, &mut out);
    Ok(out)
}

pub fn solve_greedy(inst: &Instance, budget: &Budget<'_>) -> Result<SolveResult, SolveError> {
    let grid = &inst.grid;
    let mut stats = SolveStats::default();
    let order = match compute_priority(&inst.start, inst) {
        Ok(o) => o,
        Err(HeuristicError::UnreachableGoal(_)) => return Err(SolveError::Infeasible(stats)),
        Err(e) => return Err(e.into()),
    };
    let weights = TraversalWeights {
        target: f64::INFINITY,
        ..TraversalWeights::from_costs(&inst.costs)
    };
    let mut cfg = inst.start.clone();
    let mut psi = Psi(vec![0; grid.num_cells()]);
    let mut plan = Plan::new();
    let mut forbidden = vec![false; grid.num_cells()];
    for target in order {
        if budget.expired() {
            stats.elapsed = budget.elapsed();
            return Err(SolveError::Timeout(stats));
        }
        stats.expanded += 1;
        let fail = |reason, stats: &SolveStats| SolveError::Failure {
            target: Some(target),
            reason,
            stats: *stats,
        };
        let start = cfg.cell_of(target).expect("unplanned target is on the grid");
        let mut is_goal = vec![false; grid.num_cells()];
        for &g in inst.goal_cells(target.id) {
            is_goal[g as usize] = true;
        }
        let path = least_blocking_cells(&cfg, grid, start, &is_goal, &weights)
            .ok_or_else(|| fail("no goal reachable around other targets", &stats))?;
        let mut actions = Vec::new();
        let mut after: Option<u32> = None;
        for (l, w) in path.windows(2).enumerate() {
            let (prev, u) = (w[0], w[1]);
            if !cfg.is_free(u) {
                forbidden.fill(false);
                forbidden[prev] = true;
                for &c in &path[l + 2..] {
                    forbidden[c] = true;
                }
                let chain = blank_route(&cfg, grid, u, &forbidden)
                    .or_else(|| {
                        forbidden.fill(false);
                        forbidden[prev] = true;
                        blank_route(&cfg, grid, u, &forbidden)
                    })
                    .ok_or_else(|| fail("no blank reachable", &stats))?;
                pull_blank(&mut cfg, grid, &chain, &mut psi, &mut after, &mut actions);
            }
            let t = psi.earliest(&[prev, u], after);
            actions.push(Action::Move {
                block: target,
                t,
                from: grid.vertex(prev),
                to: grid.vertex(u),
            });
            cfg.move_block(target, prev, u);
            psi.touch(&[prev, u], t);
            after = Some(t);
        }
        let goal = *path.last().expect("path is nonempty");
        let t = psi.earliest(&[goal], after);
        actions.push(Action::Complete {
            block: target,
            t,
            at: grid.vertex(goal),
        });
        cfg.complete_target(target.id, goal);
        psi.0[goal] = u32::MAX;
        for a in actions {
            plan.push(a);
        }
    }
    stats.elapsed = budget.elapsed();
    SolveResult::single(inst, plan.with_target_waits(), stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::FrozenClock;
    use crate::model::{CostModel, GoalSpec};
    use crate::plan::validate;

    fn v(r: u32, c: u32) -> Vertex {
        Vertex::new(r, c)
    }

    fn instance(h: u32, w: u32, obs: &[Vertex], t: &[Vertex], n: &[Vertex], goals: &[Vertex]) -> Instance {
        let grid = GridMap::new(h, w, obs).unwrap();
        let start = Configuration::new(&grid, t, n).unwrap();
        Instance::new(grid, start, GoalSpec::Shared(goals.to_vec()), CostModel::TABLE1, "g").unwrap()
    }

    fn solve(i: &Instance) -> Result<SolveResult, SolveError> {
        solve_greedy(i, &Budget::unlimited(&FrozenClock))
    }

    #[test]
    fn blocking_times() {
        assert_eq!(compute_vertex_blocking_time(&Plan::new()), BlockingTimes::default());
        let b = BlockId::target(0);
        let mut p = Plan::new();
        p.push(Action::Move { block: b, t: 4, from: v(0, 0), to: v(0, 1) });
        p.push(Action::Complete { block: b, t: 6, at: v(0, 1) });
        let psi = compute_vertex_blocking_time(&p);
        assert_eq!(psi.get(v(0, 0)), 5);
        assert_eq!(psi.get(v(0, 1)), BlockingTimes::NEVER);
        assert_eq!(psi.get(v(3, 3)), 0);
    }

    #[test]
    fn adjacent_blank_takes_one_move() {
        let i = instance(1, 3, &[], &[v(0, 0)], &[v(0, 1)], &[v(0, 2)]);
        let acts = move_blank_to_vertex(&i.start, &i.grid, v(0, 1), &[], &BlockingTimes::default()).unwrap();
        assert_eq!(acts.len(), 1);
        assert!(matches!(acts[0], Action::Move { to, .. } if to == v(0, 2)));
    }

    #[test]
    fn distant_blank_is_shifted_in_a_chain() {
        // 2x3: T . N / N N .   pull the blank at (1,2) to (0,1).
        let i = instance(2, 3, &[], &[v(0, 0)], &[v(0, 1), v(1, 0), v(1, 1)], &[v(0, 2)]);
        let forbidden = [v(0, 0), v(0, 2)];
        let acts = move_blank_to_vertex(&i.start, &i.grid, v(0, 1), &forbidden, &BlockingTimes::default()).unwrap();
        assert_eq!(acts.len(), 2);
        let mut cfg = i.start.clone();
        for a in &acts {
            let Action::Move { block, from, to, .. } = *a else { panic!() };
            assert!(!block.is_target());
            cfg.move_block(block, i.grid.cell(from), i.grid.cell(to));
        }
        assert!(cfg.is_free(i.grid.cell(v(0, 1))));
        assert!(acts[0].time() < acts[1].time());
    }

    #[test]
    fn walled_off_blanks_are_an_error() {
        let i = instance(1, 4, &[v(0, 2)], &[v(0, 0)], &[v(0, 1)], &[v(0, 3)]);
        assert_eq!(
            move_blank_to_vertex(&i.start, &i.grid, v(0, 1), &[v(0, 0)], &BlockingTimes::default()),
            Err(GreedyError::NoBlank(v(0, 1)))
        );
    }

    #[test]
    fn row_costs_eight() {
        let i = instance(1, 4, &[], &[v(0, 0)], &[], &[v(0, 3)]);
        let r = solve(&i).unwrap();
        validate(&r.plan, &i).unwrap();
        assert_eq!(r.final_cost(), 8.0);
    }

    #[test]
    fn target_on_goal_only_completes() {
        let i = instance(1, 2, &[], &[v(0, 1)], &[], &[v(0, 1)]);
        let r = solve(&i).unwrap();
        assert_eq!(r.plan.num_actions(), 1);
    }

    #[test]
    fn two_targets_share_the_grid() {
        let i = instance(
            3,
            4,
            &[],
            &[v(0, 0), v(2, 0)],
            &[v(0, 1), v(1, 1), v(2, 1), v(1, 0)],
            &[v(0, 3), v(2, 3)],
        );
        let r = solve(&i).unwrap();
        validate(&r.plan, &i).unwrap();
    }
}
