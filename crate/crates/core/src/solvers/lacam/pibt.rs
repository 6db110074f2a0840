//! BRaP-PIBT: one-step configuration generator.
//!
//! Targets are processed in descending priority. A block asks for its most
//! preferred neighbour; if that cell holds another undecided block, the
//! request is passed on recursively until it reaches a block next to an
//! empty cell. Only that last block moves this step: every move goes into a
//! cell that was empty when the step started.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;
use thiserror::Error;

use crate::model::{BlockId, BlockKind, Cell, Configuration, Instance, Occupant, Vertex};
use crate::plan::{Action, StepAction};

const NONE: u32 = u32::MAX;
const FAR: u32 = u32::MAX / 2;

/// Per-target priority values, indexed by target id.
#[derive(Clone, Debug, PartialEq)]
pub struct PriorityTable {
    pub value: Vec<f64>,
}

impl PriorityTable {
    /// Initial priorities from a ranking (highest priority first): every
    /// value lies in (1, 2] and earlier ranks get larger values.
    pub fn from_ranking(ranking: &[BlockId], num_targets: usize) -> Self {
        let n = num_targets as f64;
        let mut value = vec![1.0; num_targets];
        for (rank, b) in ranking.iter().enumerate() {
            value[b.id as usize] = 1.0 + (n - rank as f64) / (n + 1.0);
        }
        Self { value }
    }

    /// Value a target drops to when it stands on one of its goals.
    pub fn reset_value(id: u32, num_targets: usize) -> f64 {
        (id as f64 + 1.0) / (num_targets as f64 + 1.0)
    }
}

/// Temporary goal per target, indexed by target id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TempGoals {
    pub assigned: Vec<Option<Vertex>>,
}

/// Forces `who` to end the step on `to`; with `complete` set the target
/// completes where it stands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LowLevelConstraint {
    pub who: BlockId,
    pub to: Vertex,
    pub complete: bool,
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum PibtError {
    #[error("two constraints force blocks onto {0}")]
    ConstraintConflict(Vertex),
    #[error("constraint on {0} cannot be satisfied")]
    InvalidConstraint(BlockId),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PibtOutcome {
    pub config: Configuration,
    pub temp_goals: TempGoals,
    pub priorities: PriorityTable,
    /// Moves and completes of the step; every other block waits.
    pub actions: Vec<Action>,
}

/// Runs one BRaP-PIBT step.
pub fn brap_pibt_step(
    cfg: &Configuration,
    inst: &Instance,
    omega: &PriorityTable,
    goals: &TempGoals,
    forced: &[LowLevelConstraint],
) -> Result<PibtOutcome, PibtError> {
    let grid = &inst.grid;
    let mut generator = Generator::new(inst);
    let forced: Vec<Forced> = forced
        .iter()
        .map(|c| {
            let to = grid.open_cell(c.to).map_err(|_| PibtError::InvalidConstraint(c.who))?;
            Ok(Forced {
                who: c.who,
                to,
                complete: c.complete,
            })
        })
        .collect::<Result<_, _>>()?;
    let goals: Vec<u32> = goals
        .assigned
        .iter()
        .map(|g| g.map_or(NONE, |v| grid.cell(v) as u32))
        .collect();
    let step = generator.step(cfg, &omega.value, &goals, &forced)?;
    let t = cfg.time();
    let mut next = cfg.clone();
    let mut actions = Vec::new();
    for a in &step.actions {
        match *a {
            StepAction::Move { from, to } => {
                let Occupant::Block(block) = cfg.occupant(from) else { unreachable!() };
                actions.push(Action::Move {
                    block,
                    t,
                    from: grid.vertex(from),
                    to: grid.vertex(to),
                });
            }
            StepAction::Complete { at } => {
                let Occupant::Block(block) = cfg.occupant(at) else { unreachable!() };
                actions.push(Action::Complete {
                    block,
                    t,
                    at: grid.vertex(at),
                });
            }
        }
    }
    apply_step(&mut next, &step.actions);
    next.set_time(t + 1);
    Ok(PibtOutcome {
        config: next,
        temp_goals: TempGoals {
            assigned: step.goals.iter().map(|&g| (g != NONE).then(|| grid.vertex(g as Cell))).collect(),
        },
        priorities: PriorityTable { value: step.omega },
        actions,
    })
}

/// Applies a step whose moves all target cells empty at step start.
pub(crate) fn apply_step(cfg: &mut Configuration, actions: &[StepAction]) {
    let blocks: Vec<(BlockId, StepAction)> = actions
        .iter()
        .map(|&a| {
            let src = match a {
                StepAction::Move { from, .. } => from,
                StepAction::Complete { at } => at,
            };
            let Occupant::Block(b) = cfg.occupant(src) else { unreachable!("step source is empty") };
            (b, a)
        })
        .collect();
    for (b, a) in blocks {
        match a {
            StepAction::Move { from, to } => cfg.move_block(b, from, to),
            StepAction::Complete { at } => cfg.complete_target(b.id, at),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Forced {
    pub who: BlockId,
    pub to: Cell,
    pub complete: bool,
}

pub(crate) struct Step {
    pub actions: Vec<StepAction>,
    pub omega: Vec<f64>,
    pub goals: Vec<u32>,
}

/// Generator state reused across steps of one solve: distance-map cache
/// and scratch buffers.
pub(crate) struct Generator<'a> {
    inst: &'a Instance,
    zobrist: Vec<u64>,
    cache: HashMap<(u32, u64), Vec<u32>>,
    group_cache: HashMap<(u32, u64), Vec<u32>>,
    // scratch, sized per step
    next: Vec<u32>,
    occ_next: Vec<u32>,
    taken: Vec<bool>,
    completing: Vec<bool>,
    empty_dist: Vec<u32>,
    goals_next: Vec<u32>,
    goals_prev: Vec<u32>,
    free_left: usize,
    completed_hash: u64,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

const CACHE_LIMIT: usize = 4096;

impl<'a> Generator<'a> {
    pub fn new(inst: &'a Instance) -> Self {
        let n = inst.grid.num_cells();
        Self {
            inst,
            zobrist: (0..n as u64).map(splitmix).collect(),
            cache: HashMap::new(),
            group_cache: HashMap::new(),
            next: Vec::new(),
            occ_next: vec![NONE; n],
            taken: vec![false; n],
            completing: Vec::new(),
            empty_dist: vec![FAR; n],
            goals_next: Vec::new(),
            goals_prev: Vec::new(),
            free_left: 0,
            completed_hash: 0,
        }
    }

    fn nt(&self) -> usize {
        self.inst.num_targets()
    }

    /// Dense index: targets first, then non-targets.
    fn index(&self, b: BlockId) -> usize {
        match b.kind {
            BlockKind::Target => b.id as usize,
            BlockKind::NonTarget => self.nt() + b.id as usize,
        }
    }

    /// BFS from `sources` over cells that are neither obstacles nor
    /// completed. Blocks are ignored.
    fn bfs(&self, cfg: &Configuration, sources: impl Iterator<Item = Cell>) -> Vec<u32> {
        let grid = &self.inst.grid;
        let mut dist = vec![FAR; grid.num_cells()];
        let mut queue = VecDeque::new();
        for s in sources {
            if dist[s] == FAR && !cfg.is_completed(s) && !grid.is_obstacle(s) {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            for &v in grid.adjacent(u) {
                let v = v as usize;
                if dist[v] == FAR && !cfg.is_completed(v) {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    fn goal_dist(&mut self, cfg: &Configuration, goal: Cell, cell: Cell) -> u32 {
        let key = (goal as u32, self.completed_hash);
        if !self.cache.contains_key(&key) {
            if self.cache.len() >= CACHE_LIMIT {
                self.cache.clear();
            }
            let d = self.bfs(cfg, core::iter::once(goal));
            self.cache.insert(key, d);
        }
        self.cache[&key][cell]
    }

    fn group_dist(&mut self, cfg: &Configuration, target: u32, cell: Cell) -> u32 {
        let group = self.inst.goal_group(target);
        let key = (group as u32, self.completed_hash);
        if !self.group_cache.contains_key(&key) {
            if self.group_cache.len() >= CACHE_LIMIT {
                self.group_cache.clear();
            }
            let cells = self.inst.goal_group_cells(group).iter().map(|&c| c as Cell);
            let d = self.bfs(cfg, cells);
            self.group_cache.insert(key, d);
        }
        self.group_cache[&key][cell]
    }

    /// Whether the occupant of `goal` can clear it without `from` moving
    /// first: some empty cell is reachable from `goal` avoiding `from`.
    fn enterable(&self, cfg: &Configuration, goal: Cell, from: Cell) -> bool {
        if cfg.is_free(goal) {
            return true;
        }
        let grid = &self.inst.grid;
        let mut seen = vec![false; grid.num_cells()];
        seen[goal] = true;
        seen[from] = true;
        let mut stack = vec![goal];
        while let Some(u) = stack.pop() {
            for &v in grid.adjacent(u) {
                let v = v as usize;
                if seen[v] || cfg.is_completed(v) {
                    continue;
                }
                if cfg.is_free(v) {
                    return true;
                }
                seen[v] = true;
                stack.push(v);
            }
        }
        false
    }

    /// Nearest goal of `target` from `from` that no other target claimed.
    /// Goals whose occupant is walled in behind `from` are used only when
    /// nothing else is left.
    fn closest_free_goal(&self, cfg: &Configuration, target: u32, from: Cell) -> u32 {
        let grid = &self.inst.grid;
        let mut seen = vec![false; grid.num_cells()];
        let mut layer = vec![from];
        seen[from] = true;
        let mut fallback = NONE;
        while !layer.is_empty() {
            let mut best = NONE;
            let mut goals: Vec<Cell> = layer
                .iter()
                .copied()
                .filter(|&c| self.inst.is_goal(target, c) && !self.taken[c])
                .collect();
            goals.sort_unstable();
            for c in goals {
                if fallback == NONE {
                    fallback = c as u32;
                }
                if self.enterable(cfg, c, from) {
                    best = c as u32;
                    break;
                }
            }
            if best != NONE {
                return best;
            }
            let mut next = Vec::new();
            for &c in &layer {
                for &v in grid.adjacent(c) {
                    let v = v as usize;
                    if !seen[v] && !cfg.is_completed(v) {
                        seen[v] = true;
                        next.push(v);
                    }
                }
            }
            layer = next;
        }
        fallback
    }

    pub fn step(
        &mut self,
        cfg: &Configuration,
        omega: &[f64],
        goals: &[u32],
        forced: &[Forced],
    ) -> Result<Step, PibtError> {
        let inst = self.inst;
        let grid = &inst.grid;
        let nt = self.nt();
        let nblocks = nt + cfg.num_nontargets();
        self.completed_hash = cfg.completed().fold(0, |h, c| h ^ self.zobrist[c]);

        let mut omega = omega.to_vec();
        for (id, cell) in cfg.remaining_targets() {
            if inst.is_goal(id, cell) {
                omega[id as usize] = PriorityTable::reset_value(id, nt);
            } else {
                omega[id as usize] += 1.0;
            }
        }
        self.goals_prev.clear();
        self.goals_prev.extend_from_slice(goals);
        for (id, cell) in cfg.remaining_targets() {
            let g = self.goals_prev[id as usize];
            if g == cell as u32 || (g != NONE && (cfg.is_completed(g as Cell) || !self.enterable(cfg, g as Cell, cell))) {
                self.goals_prev[id as usize] = NONE;
            }
        }
        self.goals_next.clear();
        self.goals_next.resize(nt, NONE);
        self.next.clear();
        self.next.resize(nblocks, NONE);
        self.completing.clear();
        self.completing.resize(nt, false);
        self.occ_next.fill(NONE);
        self.taken.fill(false);
        self.free_left = cfg.free().count();

        for f in forced {
            let pos = cfg.cell_of(f.who).ok_or(PibtError::InvalidConstraint(f.who))?;
            let i = self.index(f.who);
            if self.next[i] != NONE {
                return Err(PibtError::InvalidConstraint(f.who));
            }
            if self.occ_next[f.to] != NONE {
                return Err(PibtError::ConstraintConflict(grid.vertex(f.to)));
            }
            if f.complete {
                if !f.who.is_target() || f.to != pos || !inst.is_goal(f.who.id, pos) {
                    return Err(PibtError::InvalidConstraint(f.who));
                }
                self.completing[i] = true;
                self.goals_next[i] = pos as u32;
                self.taken[pos] = true;
            } else if f.to != pos {
                if !cfg.is_free(f.to) || !grid.are_adjacent(pos, f.to) {
                    return Err(PibtError::InvalidConstraint(f.who));
                }
                self.free_left -= 1;
            }
            self.next[i] = f.to as u32;
            self.occ_next[f.to] = i as u32;
        }

        // Targets already on a goal complete, unless constrained.
        for (id, cell) in cfg.remaining_targets() {
            let i = id as usize;
            if self.next[i] == NONE && inst.is_goal(id, cell) {
                self.next[i] = cell as u32;
                self.occ_next[cell] = i as u32;
                self.completing[i] = true;
                self.goals_next[i] = cell as u32;
                self.taken[cell] = true;
            }
        }

        self.empty_dist = self.bfs(cfg, cfg.free());

        let mut order: Vec<u32> = cfg.remaining_targets().map(|(id, _)| id).collect();
        order.sort_by(|&a, &b| omega[b as usize].total_cmp(&omega[a as usize]).then(a.cmp(&b)));
        for id in order {
            if self.next[id as usize] == NONE {
                self.pibt(cfg, None, BlockId::target(id));
            }
        }

        let mut actions = Vec::new();
        for (i, &n) in self.next.iter().enumerate() {
            if n == NONE {
                continue;
            }
            let b = if i < nt {
                BlockId::target(i as u32)
            } else {
                BlockId::non_target((i - nt) as u32)
            };
            let pos = cfg.cell_of(b).expect("decided block is on the grid");
            if n as usize != pos {
                actions.push(StepAction::Move { from: pos, to: n as usize });
            } else if i < nt && self.completing[i] {
                actions.push(StepAction::Complete { at: pos });
            }
        }
        Ok(Step {
            actions,
            omega,
            goals: self.goals_next.clone(),
        })
    }

    fn pibt(&mut self, cfg: &Configuration, parent: Option<usize>, b: BlockId) -> bool {
        let grid = &self.inst.grid;
        let i = self.index(b);
        let pos = cfg.cell_of(b).expect("block on grid");
        self.next[i] = pos as u32;
        self.occ_next[pos] = i as u32;

        let mut goal = NONE;
        if b.is_target() {
            let prev = self.goals_prev[i];
            goal = if prev == NONE || self.taken[prev as usize] {
                self.closest_free_goal(cfg, b.id, pos)
            } else {
                prev
            };
            self.goals_next[i] = goal;
            if goal != NONE {
                self.taken[goal as usize] = true;
            }
        }
        if self.free_left == 0 {
            return true;
        }

        let mut cands: Vec<(u32, u32, Cell)> = Vec::with_capacity(5);
        for c in grid.adjacent(pos).iter().map(|&c| c as Cell).chain(core::iter::once(pos)) {
            let primary = if b.is_target() {
                if goal != NONE {
                    self.goal_dist(cfg, goal as Cell, c)
                } else {
                    self.group_dist(cfg, b.id, c)
                }
            } else {
                // Keep out of cells that targets are heading for.
                let g = c as u32;
                (self.taken[c] || self.goals_prev.contains(&g)) as u32
            };
            cands.push((primary, self.empty_dist[c], c));
        }
        cands.sort_unstable();

        for &(_, _, u) in &cands {
            let held = self.occ_next[u];
            if held != NONE && held as usize != i {
                continue;
            }
            if parent.is_some() && u == pos {
                continue;
            }
            match cfg.occupant(u) {
                Occupant::Block(j) if j != b => {
                    let ji = self.index(j);
                    if self.next[ji] != NONE || !self.pibt(cfg, Some(i), j) {
                        continue;
                    }
                    return true;
                }
                Occupant::Free => {
                    self.occ_next[pos] = NONE;
                    self.next[i] = u as u32;
                    self.occ_next[u] = i as u32;
                    self.free_left -= 1;
                    return true;
                }
                Occupant::Block(_) => return true,
                Occupant::Completed | Occupant::Obstacle => continue,
            }
        }
        false
    }
}
