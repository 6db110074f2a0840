//! Least-blocking paths, the configuration heuristic and target priorities.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use thiserror::Error;

use crate::model::{BlockId, BlockKind, Cell, Configuration, CostModel, GridMap, Instance, Occupant, Vertex};

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum HeuristicError {
    #[error("no goal vertex is reachable for {0}")]
    UnreachableGoal(BlockId),
    #[error("{0} is not on the grid")]
    MissingTarget(BlockId),
}

/// `f64` with a total order, for heap keys.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Cost(pub f64);

impl Eq for Cost {}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Cost of entering a cell by what occupies it. Obstacles and completed
/// targets are always impassable; an infinite weight makes a kind
/// impassable too.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraversalWeights {
    pub free: f64,
    pub non_target: f64,
    pub target: f64,
}

impl TraversalWeights {
    pub fn from_costs(costs: &CostModel) -> Self {
        Self {
            free: costs.move_tgt,
            non_target: costs.move_tgt + costs.move_non,
            target: costs.move_tgt + 2.0 * costs.move_non,
        }
    }

    fn of(&self, occ: Occupant) -> f64 {
        match occ {
            Occupant::Free => self.free,
            Occupant::Block(b) => match b.kind {
                BlockKind::Target => self.target,
                BlockKind::NonTarget => self.non_target,
            },
            Occupant::Obstacle | Occupant::Completed => f64::INFINITY,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LeastBlockingPath {
    /// Start vertex first, goal vertex last.
    pub vertices: Vec<Vertex>,
    /// Occupied vertices on the path, start excluded.
    pub blocking: usize,
    pub weight: f64,
}

impl LeastBlockingPath {
    pub fn length(&self) -> usize {
        self.vertices.len() - 1
    }
}

/// Minimum-weight path from a target to the nearest vertex of `goals`.
/// Ties break on weight, then length, then row-major cell order.
pub fn least_blocking_path(
    cfg: &Configuration,
    grid: &GridMap,
    target: BlockId,
    goals: &[Vertex],
    weights: &TraversalWeights,
) -> Result<LeastBlockingPath, HeuristicError> {
    let start = cfg.cell_of(target).ok_or(HeuristicError::MissingTarget(target))?;
    let mut is_goal = vec![false; grid.num_cells()];
    for &g in goals {
        if grid.contains(g) {
            is_goal[grid.cell(g)] = true;
        }
    }
    let cells = least_blocking_cells(cfg, grid, start, &is_goal, weights)
        .ok_or(HeuristicError::UnreachableGoal(target))?;
    let blocking = cells[1..].iter().filter(|&&c| !cfg.is_free(c)).count();
    let weight = cells[1..].iter().map(|&c| weights.of(cfg.occupant(c))).sum();
    Ok(LeastBlockingPath {
        vertices: cells.iter().map(|&c| grid.vertex(c)).collect(),
        blocking,
        weight,
    })
}

/// Cell-level least-blocking search shared with the greedy solver.
pub(crate) fn least_blocking_cells(
    cfg: &Configuration,
    grid: &GridMap,
    start: Cell,
    is_goal: &[bool],
    weights: &TraversalWeights,
) -> Option<Vec<Cell>> {
    let n = grid.num_cells();
    let mut best: Vec<(Cost, u32)> = vec![(Cost(f64::INFINITY), u32::MAX); n];
    let mut parent = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    best[start] = (Cost(0.0), 0);
    heap.push(Reverse((Cost(0.0), 0u32, start)));
    while let Some(Reverse((w, len, u))) = heap.pop() {
        if (w, len) != best[u] {
            continue;
        }
        if is_goal[u] {
            let mut path = vec![u];
            let mut c = u;
            while c != start {
                c = parent[c];
                path.push(c);
            }
            path.reverse();
            return Some(path);
        }
        for &v in grid.adjacent(u) {
            let v = v as usize;
            let step = weights.of(cfg.occupant(v));
            if !step.is_finite() {
                continue;
            }
            let key = (Cost(w.0 + step), len + 1);
            if key < best[v] {
                best[v] = key;
                parent[v] = u;
                heap.push(Reverse((key.0, key.1, v)));
            }
        }
    }
    None
}

/// Per-cell lower bound on the cost of bringing a target from that cell to
/// any cell of `goals`, excluding the final complete. Entering a cell costs
/// one target move plus, if occupied, one move of the cheaper block kind.
pub(crate) fn goal_distance_map(cfg: &Configuration, grid: &GridMap, goals: &[u32], costs: &CostModel) -> Vec<f64> {
    let n = grid.num_cells();
    let blocker = costs.move_tgt.min(costs.move_non);
    let enter = |c: Cell| match cfg.occupant(c) {
        Occupant::Free => costs.move_tgt,
        Occupant::Block(_) => costs.move_tgt + blocker,
        Occupant::Obstacle | Occupant::Completed => f64::INFINITY,
    };
    let mut dist = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    for &g in goals {
        let g = g as usize;
        if !grid.is_obstacle(g) && !cfg.is_completed(g) {
            dist[g] = 0.0;
            heap.push(Reverse((Cost(0.0), g)));
        }
    }
    while let Some(Reverse((Cost(d), v))) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        let w = enter(v);
        if !w.is_finite() {
            continue;
        }
        for &u in grid.adjacent(v) {
            let u = u as usize;
            if grid.is_obstacle(u) || cfg.is_completed(u) {
                continue;
            }
            let nd = d + w;
            if nd < dist[u] {
                dist[u] = nd;
                heap.push(Reverse((Cost(nd), u)));
            }
        }
    }
    dist
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum HeuristicMode {
    /// Mean of the per-target bounds.
    #[default]
    Average,
    /// Largest per-target bound. Also admissible, sometimes tighter.
    Max,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeuristicValue {
    pub total: f64,
    /// Indexed by target id; completed targets hold 0.
    pub per_target: Vec<f64>,
}

pub fn h_state(cfg: &Configuration, inst: &Instance) -> Result<HeuristicValue, HeuristicError> {
    h_state_with(cfg, inst, HeuristicMode::Average)
}

pub fn h_state_with(
    cfg: &Configuration,
    inst: &Instance,
    mode: HeuristicMode,
) -> Result<HeuristicValue, HeuristicError> {
    let mut per_target = vec![0.0; cfg.num_targets()];
    let mut maps: Vec<Option<Vec<f64>>> = vec![None; inst.num_goal_groups()];
    let mut live = 0usize;
    for (id, cell) in cfg.remaining_targets() {
        let group = inst.goal_group(id);
        let map = maps[group]
            .get_or_insert_with(|| goal_distance_map(cfg, &inst.grid, inst.goal_group_cells(group), &inst.costs));
        let d = map[cell];
        if !d.is_finite() {
            return Err(HeuristicError::UnreachableGoal(BlockId::target(id)));
        }
        per_target[id as usize] = d + inst.costs.complete_tgt;
        live += 1;
    }
    let total = match (live, mode) {
        (0, _) => 0.0,
        (_, HeuristicMode::Average) => per_target.iter().sum::<f64>() / live as f64,
        (_, HeuristicMode::Max) => per_target.iter().copied().fold(0.0, f64::max),
    };
    Ok(HeuristicValue { total, per_target })
}

/// Remaining targets in ascending h(s,i), ties by id.
pub fn compute_priority(cfg: &Configuration, inst: &Instance) -> Result<Vec<BlockId>, HeuristicError> {
    let h = h_state(cfg, inst)?;
    let mut ids: Vec<u32> = cfg.remaining_targets().map(|(id, _)| id).collect();
    ids.sort_by(|&a, &b| {
        h.per_target[a as usize]
            .total_cmp(&h.per_target[b as usize])
            .then(a.cmp(&b))
    });
    Ok(ids.into_iter().map(BlockId::target).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GoalSpec;

    fn v(r: u32, c: u32) -> Vertex {
        Vertex::new(r, c)
    }

    fn instance(h: u32, w: u32, obs: &[Vertex], t: &[Vertex], n: &[Vertex], goals: &[Vertex]) -> Instance {
        let grid = GridMap::new(h, w, obs).unwrap();
        let start = Configuration::new(&grid, t, n).unwrap();
        Instance::new(grid, start, GoalSpec::Shared(goals.to_vec()), CostModel::TABLE1, "h").unwrap()
    }

    #[test]
    fn straight_free_row() {
        let i = instance(1, 5, &[], &[v(0, 0)], &[], &[v(0, 4)]);
        let w = TraversalWeights::from_costs(&i.costs);
        let p = least_blocking_path(&i.start, &i.grid, BlockId::target(0), &[v(0, 4)], &w).unwrap();
        assert_eq!(p.length(), 4);
        assert_eq!(p.blocking, 0);
        assert_eq!(p.vertices.last(), Some(&v(0, 4)));
    }

    #[test]
    fn row_with_one_blocker() {
        let i = instance(1, 5, &[], &[v(0, 0)], &[v(0, 2)], &[v(0, 4)]);
        let w = TraversalWeights::from_costs(&i.costs);
        let p = least_blocking_path(&i.start, &i.grid, BlockId::target(0), &[v(0, 4)], &w).unwrap();
        assert_eq!((p.length(), p.blocking), (4, 1));
    }

    #[test]
    fn enclosed_target_is_unreachable() {
        let obs = [v(0, 1), v(1, 0)];
        let i = instance(3, 3, &obs, &[v(0, 0)], &[], &[v(2, 2)]);
        let w = TraversalWeights::from_costs(&i.costs);
        assert_eq!(
            least_blocking_path(&i.start, &i.grid, BlockId::target(0), &[v(2, 2)], &w),
            Err(HeuristicError::UnreachableGoal(BlockId::target(0)))
        );
        assert!(h_state(&i.start, &i).is_err());
    }

    #[test]
    fn worked_two_target_state() {
        // T0 needs two moves and clears one blocker; T1 has a free two-move path.
        let i = instance(
            4,
            6,
            &[],
            &[v(3, 3), v(1, 3)],
            &[v(3, 4)],
            &[v(3, 5), v(1, 5)],
        );
        let h = h_state(&i.start, &i).unwrap();
        assert_eq!(h.per_target, vec![3.0 * 2.0 + 2.0, 2.0 * 2.0 + 2.0]);
        assert_eq!(h.total, 7.0);
        assert_eq!(h_state_with(&i.start, &i, HeuristicMode::Max).unwrap().total, 8.0);
        assert_eq!(compute_priority(&i.start, &i).unwrap(), vec![BlockId::target(1), BlockId::target(0)]);
    }

    #[test]
    fn target_on_goal_costs_one_complete() {
        let i = instance(1, 3, &[], &[v(0, 1)], &[], &[v(0, 1)]);
        assert_eq!(h_state(&i.start, &i).unwrap().total, 2.0);
    }

    #[test]
    fn equal_h_orders_by_id() {
        let i = instance(1, 5, &[], &[v(0, 0), v(0, 4)], &[], &[v(0, 2)]);
        assert_eq!(compute_priority(&i.start, &i).unwrap(), vec![BlockId::target(0), BlockId::target(1)]);
    }
}
