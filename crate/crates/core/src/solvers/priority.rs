//! Prioritised planning: targets are planned one at a time in heuristic
//! order, each against the spacetime constraints of the plans before it.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;
use core::hash::BuildHasher;

use hashbrown::{DefaultHashBuilder, HashTable};

use crate::budget::{Budget, Ticker};
use crate::heuristics::{compute_priority, Cost, HeuristicError};
use crate::model::{BlockId, Instance, Vertex};
use crate::plan::{Action, Plan, Recorder, StepAction};
use crate::solve::{SolveError, SolveResult, SolveStats};

/// Spacetime requirements derived from a plan.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConstraintSet {
    /// A block must be on the vertex at the start of the step.
    pub occupied_at: BTreeMap<(Vertex, u32), BlockId>,
    /// The vertex must be empty at the start of the step.
    pub must_be_free: BTreeSet<(Vertex, u32)>,
    /// No other action may touch the vertex during the step.
    pub frozen: BTreeSet<(Vertex, u32)>,
    /// Vertices frozen from the given step onward.
    pub frozen_from: BTreeMap<Vertex, u32>,
}

impl ConstraintSet {
    pub fn is_empty(&self) -> bool {
        self.occupied_at.is_empty() && self.frozen.is_empty() && self.frozen_from.is_empty()
    }

    pub fn is_frozen(&self, v: Vertex, t: u32) -> bool {
        self.frozen.contains(&(v, t)) || self.frozen_from.get(&v).is_some_and(|&s| t >= s)
    }
}

pub fn compute_constraint(plan: &Plan) -> ConstraintSet {
    let mut xi = ConstraintSet::default();
    for a in plan.actions() {
        match a {
            Action::Move { block, t, from, to } => {
                xi.occupied_at.insert((from, t), block);
                xi.must_be_free.insert((to, t));
                xi.frozen.insert((from, t));
                xi.frozen.insert((to, t));
            }
            Action::Wait { block, t, at } => {
                xi.occupied_at.insert((at, t), block);
                xi.frozen.insert((at, t));
            }
            Action::Complete { block, t, at } => {
                xi.occupied_at.insert((at, t), block);
                xi.frozen_from.insert(at, t);
            }
        }
    }
    xi
}

#[derive(Clone, Debug, Default)]
pub struct PriorityOptions {
    /// Planning order; defaults to ascending h(s,i).
    pub order: Option<Vec<BlockId>>,
    /// Per-target horizon beyond the last constrained step, in multiples
    /// of the vertex count.
    pub horizon_factor: u32,
    /// Upper bound on stored nodes per target search.
    pub node_limit: usize,
}

impl PriorityOptions {
    fn horizon_factor(&self) -> u32 {
        if self.horizon_factor == 0 {
            4
        } else {
            self.horizon_factor
        }
    }

    fn node_limit(&self) -> usize {
        if self.node_limit == 0 {
            2_000_000
        } else {
            self.node_limit
        }
    }
}

const FREE: u16 = 0;
const COMPLETED: u16 = 1;
const NON_TARGET: u16 = 2;
const TARGET0: u16 = 3;

/// A forced action of an earlier plan, tagged with the code of the block
/// expected at its source.
#[derive(Clone, Copy, Debug)]
struct Forced {
    code: u16,
    step: StepAction,
}

/// Forced actions indexed by step, with the cells each step freezes.
struct Schedule {
    steps: Vec<Vec<Forced>>,
    frozen: Vec<Vec<bool>>,
}

impl Schedule {
    fn new(union: &[(u32, Forced)], cells: usize) -> Self {
        let len = union.iter().map(|(t, _)| *t as usize + 1).max().unwrap_or(0);
        let mut steps = vec![Vec::new(); len];
        let mut frozen = vec![vec![false; cells]; len];
        for &(t, f) in union {
            let t = t as usize;
            steps[t].push(f);
            match f.step {
                StepAction::Move { from, to } => {
                    frozen[t][from] = true;
                    frozen[t][to] = true;
                }
                StepAction::Complete { at } => frozen[t][at] = true,
            }
        }
        Self { steps, frozen }
    }

    /// First step after every forced action.
    fn end(&self) -> u32 {
        self.steps.len() as u32
    }

    fn at(&self, t: u32) -> &[Forced] {
        self.steps.get(t as usize).map_or(&[], |s| s.as_slice())
    }

    fn is_frozen(&self, t: u32, cell: usize) -> bool {
        self.frozen.get(t as usize).is_some_and(|f| f[cell])
    }

    /// Applies the forced actions of step `t` if their preconditions hold.
    fn apply(&self, t: u32, key: &mut [u16]) -> bool {
        let forced = self.at(t);
        for f in forced {
            let ok = match f.step {
                StepAction::Move { from, to } => key[from] == f.code && key[to] == FREE,
                StepAction::Complete { at } => key[at] == f.code,
            };
            if !ok {
                return false;
            }
        }
        for f in forced {
            match f.step {
                StepAction::Move { from, to } => {
                    key[from] = FREE;
                    key[to] = f.code;
                }
                StepAction::Complete { at } => key[at] = COMPLETED,
            }
        }
        true
    }

    /// Replays every forced action from step `t` on.
    fn replay_from(&self, t: u32, key: &mut [u16]) -> bool {
        (t..self.end()).all(|s| self.apply(s, key))
    }
}

struct Node {
    key: Box<[u16]>,
    t: u32,
    g: f64,
    h: f64,
    parent: u32,
    /// The action chosen at step `t - 1`.
    step: Option<Forced>,
    done: bool,
}

pub fn solve_priority(inst: &Instance, budget: &Budget<'_>) -> Result<SolveResult, SolveError> {
    solve_priority_with(inst, budget, &PriorityOptions::default())
}

pub fn solve_priority_with(
    inst: &Instance,
    budget: &Budget<'_>,
    opts: &PriorityOptions,
) -> Result<SolveResult, SolveError> {
    let mut stats = SolveStats::default();
    let order = match &opts.order {
        Some(o) => o.clone(),
        None => match compute_priority(&inst.start, inst) {
            Ok(o) => o,
            Err(HeuristicError::UnreachableGoal(_)) => return Err(SolveError::Infeasible(stats)),
            Err(e) => return Err(e.into()),
        },
    };
    let mut union: Vec<(u32, Forced)> = Vec::new();
    let mut planned = vec![false; inst.num_targets()];
    for &target in &order {
        let schedule = Schedule::new(&union, inst.grid.num_cells());
        let steps = plan_target(inst, budget, opts, target, &planned, &schedule, &mut stats)?;
        union.extend(steps);
        planned[target.id as usize] = true;
    }
    union.sort_by_key(|(t, _)| *t);
    let mut rec = Recorder::new(inst);
    let mut i = 0;
    while i < union.len() {
        let t = union[i].0;
        let j = i + union[i..].iter().take_while(|(s, _)| *s == t).count();
        let step: Vec<StepAction> = union[i..j].iter().map(|(_, f)| f.step).collect();
        rec.step_at(t, &step);
        i = j;
    }
    stats.elapsed = budget.elapsed();
    SolveResult::single(inst, rec.finish(), stats)
}

/// Lower bound on the searched target's remaining cost: its own moves plus
/// one move per non-target in the way. Earlier targets cost nothing to
/// pass (forced actions move them); later targets never move.
fn target_bound(inst: &Instance, key: &[u16], cell: usize, id: u32, planned: &[bool]) -> f64 {
    let grid = &inst.grid;
    let costs = &inst.costs;
    let n = grid.num_cells();
    let mut dist = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    dist[cell] = 0.0;
    heap.push(Reverse((Cost(0.0), cell)));
    while let Some(Reverse((Cost(d), u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        if inst.is_goal(id, u) {
            return d + costs.complete_tgt;
        }
        for &v in grid.adjacent(u) {
            let v = v as usize;
            let w = match key[v] {
                FREE => costs.move_tgt,
                COMPLETED => continue,
                NON_TARGET => costs.move_tgt + costs.move_non,
                k if planned[(k - TARGET0) as usize] => costs.move_tgt,
                _ => continue,
            };
            if d + w < dist[v] {
                dist[v] = d + w;
                heap.push(Reverse((Cost(d + w), v)));
            }
        }
    }
    f64::INFINITY
}

/// Time-expanded A* for one target. Returns its timed actions, including the
/// non-target moves made to clear the way.
fn plan_target(
    inst: &Instance,
    budget: &Budget<'_>,
    opts: &PriorityOptions,
    target: BlockId,
    planned: &[bool],
    schedule: &Schedule,
    stats: &mut SolveStats,
) -> Result<Vec<(u32, Forced)>, SolveError> {
    let grid = &inst.grid;
    let costs = &inst.costs;
    let code = TARGET0 + target.id as u16;
    let horizon = schedule.end() + opts.horizon_factor() * grid.num_cells() as u32;
    let clamp = schedule.end();
    let fail = |reason, stats: &SolveStats| SolveError::Failure {
        target: Some(target),
        reason,
        stats: *stats,
    };

    let root_key = inst.start.key(true);
    let start_cell = root_key.iter().position(|&k| k == code).expect("target on grid");
    let h0 = target_bound(inst, &root_key, start_cell, target.id, planned);
    if !h0.is_finite() {
        return Err(fail("no goal reachable", stats));
    }
    let hasher = DefaultHashBuilder::default();
    let hash = |t: u32, k: &[u16]| hasher.hash_one((t.min(clamp), k));
    let mut nodes = vec![Node {
        key: root_key,
        t: 0,
        g: 0.0,
        h: h0,
        parent: u32::MAX,
        step: None,
        done: false,
    }];
    let mut table: HashTable<u32> = HashTable::new();
    table.insert_unique(hash(0, &nodes[0].key), 0, |&i| {
        let n = &nodes[i as usize];
        hash(n.t, &n.key)
    });
    let mut open = BinaryHeap::new();
    let mut seq = 0u64;
    open.push(Reverse((Cost(h0), Cost(h0), seq, 0u32)));
    let mut ticker = Ticker::new(64);

    while let Some(Reverse((Cost(f), _, _, idx))) = open.pop() {
        let node = &nodes[idx as usize];
        if f > node.g + node.h {
            continue;
        }
        if node.done {
            let mut steps = Vec::new();
            let mut i = idx;
            while i != 0 {
                let n = &nodes[i as usize];
                if let Some(s) = n.step {
                    steps.push((n.t - 1, s));
                }
                i = n.parent;
            }
            steps.reverse();
            // Past `clamp` nodes are shared across timesteps and a reopened
            // ancestor may carry a later t than its children. Nothing is
            // forced there, so retime that tail back to back.
            let mut prev: Option<u32> = None;
            for s in &mut steps {
                if s.0 >= clamp {
                    s.0 = prev.map_or(clamp, |p| (p + 1).max(clamp));
                }
                prev = Some(s.0);
            }
            return Ok(steps);
        }
        if ticker.expired(budget) {
            stats.elapsed = budget.elapsed();
            return Err(SolveError::Timeout(*stats));
        }
        stats.expanded += 1;
        let (t, g) = (node.t, node.g);
        if t >= horizon {
            continue;
        }
        let key = node.key.clone();
        let cell = key.iter().position(|&k| k == code).expect("target on grid");

        // (action, cost, target acted)
        let mut options: Vec<(Option<Forced>, f64, bool)> = vec![(None, 0.0, false)];
        if !schedule.is_frozen(t, cell) {
            for &n in grid.adjacent(cell) {
                let n = n as usize;
                if key[n] == FREE && !schedule.is_frozen(t, n) {
                    let step = StepAction::Move { from: cell, to: n };
                    options.push((Some(Forced { code, step }), costs.move_tgt, true));
                }
            }
            if inst.is_goal(target.id, cell) {
                let step = StepAction::Complete { at: cell };
                options.push((Some(Forced { code, step }), costs.complete_tgt, true));
            }
        }
        for (c, &k) in key.iter().enumerate() {
            if k != NON_TARGET || schedule.is_frozen(t, c) {
                continue;
            }
            for &n in grid.adjacent(c) {
                let n = n as usize;
                if key[n] == FREE && !schedule.is_frozen(t, n) {
                    let step = StepAction::Move { from: c, to: n };
                    options.push((Some(Forced { code: NON_TARGET, step }), costs.move_non, false));
                }
            }
        }

        for (step, c, acted) in options {
            stats.generated += 1;
            let mut next = key.clone();
            let mut done = false;
            match step.map(|f| f.step) {
                Some(StepAction::Move { from, to }) => {
                    next[to] = next[from];
                    next[from] = FREE;
                }
                Some(StepAction::Complete { at }) => {
                    next[at] = COMPLETED;
                    done = true;
                }
                None => {}
            }
            if !schedule.apply(t, &mut next) {
                continue;
            }
            if done && !schedule.replay_from(t + 1, &mut next.clone()) {
                continue;
            }
            let ng = g + c + if acted { 0.0 } else { costs.wait_tgt };
            let h = if done {
                0.0
            } else {
                let tc = next.iter().position(|&k| k == code).expect("target on grid");
                let h = target_bound(inst, &next, tc, target.id, planned);
                if !h.is_finite() {
                    continue;
                }
                h
            };
            let nt = t + 1;
            let hv = hash(nt, &next);
            let found = table
                .find(hv, |&i| {
                    let n = &nodes[i as usize];
                    n.t.min(clamp) == nt.min(clamp) && n.key == next
                })
                .copied();
            let j = match found {
                Some(j) => {
                    let n = &mut nodes[j as usize];
                    if n.g <= ng {
                        continue;
                    }
                    n.g = ng;
                    n.t = nt;
                    n.parent = idx;
                    n.step = step;
                    j
                }
                None => {
                    if nodes.len() >= opts.node_limit() {
                        return Err(fail("node limit reached", stats));
                    }
                    let j = nodes.len() as u32;
                    nodes.push(Node {
                        key: next.into(),
                        t: nt,
                        g: ng,
                        h,
                        parent: idx,
                        step,
                        done,
                    });
                    table.insert_unique(hv, j, |&i| {
                        let n = &nodes[i as usize];
                        hash(n.t, &n.key)
                    });
                    j
                }
            };
            let n = &nodes[j as usize];
            seq += 1;
            open.push(Reverse((Cost(n.g + n.h), Cost(n.h), seq, j)));
        }
    }
    Err(fail("no constrained plan within the horizon", stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::FrozenClock;
    use crate::model::{Configuration, CostModel, GoalSpec, GridMap};
    use crate::plan::validate;

    fn v(r: u32, c: u32) -> Vertex {
        Vertex::new(r, c)
    }

    fn instance(h: u32, w: u32, obs: &[Vertex], t: &[Vertex], n: &[Vertex], goals: GoalSpec) -> Instance {
        let grid = GridMap::new(h, w, obs).unwrap();
        let start = Configuration::new(&grid, t, n).unwrap();
        Instance::new(grid, start, goals, CostModel::TABLE1, "p").unwrap()
    }

    fn solve(i: &Instance) -> Result<SolveResult, SolveError> {
        solve_priority(i, &Budget::unlimited(&FrozenClock))
    }

    #[test]
    fn empty_plan_has_no_constraints() {
        assert!(compute_constraint(&Plan::new()).is_empty());
    }

    #[test]
    fn move_constrains_source_and_destination() {
        let mut p = Plan::new();
        let b = BlockId::target(0);
        p.push(Action::Move { block: b, t: 3, from: v(0, 0), to: v(0, 1) });
        p.push(Action::Complete { block: b, t: 5, at: v(0, 1) });
        let xi = compute_constraint(&p);
        assert_eq!(xi.occupied_at.get(&(v(0, 0), 3)), Some(&b));
        assert!(xi.must_be_free.contains(&(v(0, 1), 3)));
        assert!(xi.is_frozen(v(0, 1), 3));
        assert!(xi.is_frozen(v(0, 0), 3));
        assert!(!xi.is_frozen(v(0, 1), 4));
        assert!(xi.is_frozen(v(0, 1), 5) && xi.is_frozen(v(0, 1), 500));
    }

    #[test]
    fn single_target_row_matches_optimum() {
        let i = instance(1, 4, &[], &[v(0, 0)], &[], GoalSpec::Shared(vec![v(0, 3)]));
        let r = solve(&i).unwrap();
        validate(&r.plan, &i).unwrap();
        assert_eq!(r.final_cost(), 8.0);
    }

    #[test]
    fn disjoint_corridors_run_in_parallel() {
        let i = instance(
            2,
            4,
            &[],
            &[v(0, 0), v(1, 0)],
            &[],
            GoalSpec::PerTarget(vec![vec![v(0, 3)], vec![v(1, 3)]]),
        );
        let r = solve(&i).unwrap();
        validate(&r.plan, &i).unwrap();
        // Each alone takes 4 steps; run back to back they would take 8.
        assert_eq!(r.metrics.horizon, 4);
    }

    #[test]
    fn lower_priority_target_waits_for_frozen_corridor() {
        // T0 is closer to its goal and crosses (0,1) first; T1 must wait.
        let i = instance(
            2,
            3,
            &[v(1, 0), v(1, 2)],
            &[v(0, 0), v(1, 1)],
            &[],
            GoalSpec::PerTarget(vec![vec![v(0, 2)], vec![v(0, 0)]]),
        );
        let r = solve(&i).unwrap();
        validate(&r.plan, &i).unwrap();
        let waits = r.plan.paths[&BlockId::target(1)]
            .actions
            .iter()
            .filter(|a| matches!(a, Action::Wait { .. }))
            .count();
        assert!(waits >= 1);
    }

    #[test]
    fn clears_nontarget_blockers() {
        let i = instance(2, 3, &[], &[v(0, 0)], &[v(0, 1), v(1, 1)], GoalSpec::Shared(vec![v(0, 2)]));
        let r = solve(&i).unwrap();
        validate(&r.plan, &i).unwrap();
    }
}
