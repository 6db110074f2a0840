//! Static grid world, block identities, configurations and goal sets.
//!
//! Vertices are addressed either by [`Vertex`] (row, column) at the public
//! surface or by a row-major cell index internally. Every search in the crate
//! works on cell indices; conversions happen at the API boundary.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::plan::Action;

/// Row-major cell index.
pub type Cell = usize;

pub(crate) const NO_CELL: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    pub row: u32,
    pub col: u32,
}

impl Vertex {
    pub const fn new(row: u32, col: u32) -> Self {
        Self { row, col }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.row, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BlockKind {
    Target,
    NonTarget,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockId {
    pub kind: BlockKind,
    pub id: u32,
}

impl BlockId {
    pub const fn target(id: u32) -> Self {
        Self {
            kind: BlockKind::Target,
            id,
        }
    }

    pub const fn non_target(id: u32) -> Self {
        Self {
            kind: BlockKind::NonTarget,
            id,
        }
    }

    pub fn is_target(&self) -> bool {
        self.kind == BlockKind::Target
    }

    /// Parses the display form, `T3` or `N0`.
    pub fn parse(s: &str) -> Option<Self> {
        let id = s.get(1..)?.parse().ok()?;
        match s.as_bytes().first()? {
            b'T' => Some(Self::target(id)),
            b'N' => Some(Self::non_target(id)),
            _ => None,
        }
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            BlockKind::Target => write!(f, "T{}", self.id),
            BlockKind::NonTarget => write!(f, "N{}", self.id),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("vertex {0} is outside the grid or an obstacle")]
    InvalidVertex(Vertex),
    #[error("grid dimensions must be at least 1x1")]
    EmptyGrid,
    #[error("illegal action at t={t} for {block}: {reason}")]
    IllegalAction {
        t: u32,
        block: BlockId,
        reason: &'static str,
    },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid cost model: {0}")]
    InvalidCosts(&'static str),
}

/// Static world: dimensions, obstacles and 4-connected adjacency.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridMap {
    height: u32,
    width: u32,
    obstacle: Vec<bool>,
    adj_start: Vec<u32>,
    adj: Vec<u32>,
}

impl GridMap {
    pub fn new(height: u32, width: u32, obstacles: &[Vertex]) -> Result<Self, ModelError> {
        if height == 0 || width == 0 {
            return Err(ModelError::EmptyGrid);
        }
        let n = (height * width) as usize;
        let mut obstacle = vec![false; n];
        for &v in obstacles {
            if v.row >= height || v.col >= width {
                return Err(ModelError::InvalidVertex(v));
            }
            obstacle[(v.row * width + v.col) as usize] = true;
        }
        let mut adj_start = Vec::with_capacity(n + 1);
        let mut adj = Vec::with_capacity(4 * n);
        for cell in 0..n {
            adj_start.push(adj.len() as u32);
            if obstacle[cell] {
                continue;
            }
            let (r, c) = ((cell as u32) / width, (cell as u32) % width);
            // up, down, left, right
            let cands = [
                (r > 0).then(|| cell - width as usize),
                (r + 1 < height).then(|| cell + width as usize),
                (c > 0).then(|| cell - 1),
                (c + 1 < width).then(|| cell + 1),
            ];
            for nb in cands.into_iter().flatten() {
                if !obstacle[nb] {
                    adj.push(nb as u32);
                }
            }
        }
        adj_start.push(adj.len() as u32);
        Ok(Self {
            height,
            width,
            obstacle,
            adj_start,
            adj,
        })
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn num_cells(&self) -> usize {
        self.obstacle.len()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        v.row < self.height && v.col < self.width
    }

    pub fn cell(&self, v: Vertex) -> Cell {
        (v.row * self.width + v.col) as usize
    }

    pub fn vertex(&self, cell: Cell) -> Vertex {
        Vertex::new(cell as u32 / self.width, cell as u32 % self.width)
    }

    pub fn is_obstacle(&self, cell: Cell) -> bool {
        self.obstacle[cell]
    }

    pub fn obstacles(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.obstacle
            .iter()
            .enumerate()
            .filter(|(_, &o)| o)
            .map(|(c, _)| self.vertex(c))
    }

    /// Cell index of a valid non-obstacle vertex.
    pub fn open_cell(&self, v: Vertex) -> Result<Cell, ModelError> {
        if !self.contains(v) || self.obstacle[self.cell(v)] {
            return Err(ModelError::InvalidVertex(v));
        }
        Ok(self.cell(v))
    }

    /// Neighbour cells in (up, down, left, right) order, obstacles removed.
    pub fn adjacent(&self, cell: Cell) -> &[u32] {
        &self.adj[self.adj_start[cell] as usize..self.adj_start[cell + 1] as usize]
    }

    pub fn are_adjacent(&self, a: Cell, b: Cell) -> bool {
        self.adjacent(a).contains(&(b as u32))
    }

    pub fn neighbors(&self, v: Vertex) -> Result<Vec<Vertex>, ModelError> {
        let cell = self.open_cell(v)?;
        Ok(self
            .adjacent(cell)
            .iter()
            .map(|&c| self.vertex(c as Cell))
            .collect())
    }

    pub fn is_boundary(&self, cell: Cell) -> bool {
        let v = self.vertex(cell);
        v.row == 0 || v.col == 0 || v.row + 1 == self.height || v.col + 1 == self.width
    }
}

/// What sits on a vertex in a given configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Occupant {
    Free,
    Obstacle,
    Completed,
    Block(BlockId),
}

/// Dynamic state: time, block positions, free and completed vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    time: u32,
    cells: Vec<Occupant>,
    targets: Vec<u32>,
    nontargets: Vec<u32>,
}

impl Configuration {
    /// Builds a time-0 configuration. Target and non-target ids are their
    /// positions in the given slices.
    pub fn new(
        grid: &GridMap,
        targets: &[Vertex],
        nontargets: &[Vertex],
    ) -> Result<Self, ModelError> {
        let mut cells: Vec<Occupant> = (0..grid.num_cells())
            .map(|c| {
                if grid.is_obstacle(c) {
                    Occupant::Obstacle
                } else {
                    Occupant::Free
                }
            })
            .collect();
        let mut place = |v: Vertex, block: BlockId| -> Result<u32, ModelError> {
            let c = grid.open_cell(v)?;
            if cells[c] != Occupant::Free {
                return Err(ModelError::InvalidInstance(alloc::format!(
                    "two blocks placed on {v}"
                )));
            }
            cells[c] = Occupant::Block(block);
            Ok(c as u32)
        };
        let t: Vec<u32> = targets
            .iter()
            .enumerate()
            .map(|(i, &v)| place(v, BlockId::target(i as u32)))
            .collect::<Result<_, _>>()?;
        let n: Vec<u32> = nontargets
            .iter()
            .enumerate()
            .map(|(i, &v)| place(v, BlockId::non_target(i as u32)))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            time: 0,
            cells,
            targets: t,
            nontargets: n,
        })
    }

    pub(crate) fn from_parts(
        time: u32,
        cells: Vec<Occupant>,
        targets: Vec<u32>,
        nontargets: Vec<u32>,
    ) -> Self {
        Self {
            time,
            cells,
            targets,
            nontargets,
        }
    }

    pub fn time(&self) -> u32 {
        self.time
    }

    pub fn num_targets(&self) -> usize {
        self.targets.len()
    }

    pub fn num_nontargets(&self) -> usize {
        self.nontargets.len()
    }

    pub fn occupant(&self, cell: Cell) -> Occupant {
        self.cells[cell]
    }

    pub fn occupants(&self) -> &[Occupant] {
        &self.cells
    }

    /// Cell of a block, or `None` for a completed target.
    pub fn cell_of(&self, block: BlockId) -> Option<Cell> {
        let raw = match block.kind {
            BlockKind::Target => *self.targets.get(block.id as usize)?,
            BlockKind::NonTarget => *self.nontargets.get(block.id as usize)?,
        };
        (raw != NO_CELL).then_some(raw as Cell)
    }

    pub fn target_cells(&self) -> &[u32] {
        &self.targets
    }

    pub fn nontarget_cells(&self) -> &[u32] {
        &self.nontargets
    }

    pub fn is_free(&self, cell: Cell) -> bool {
        self.cells[cell] == Occupant::Free
    }

    pub fn is_completed(&self, cell: Cell) -> bool {
        self.cells[cell] == Occupant::Completed
    }

    pub fn position(&self, grid: &GridMap, block: BlockId) -> Option<Vertex> {
        self.cell_of(block).map(|c| grid.vertex(c))
    }

    pub fn free(&self) -> impl Iterator<Item = Cell> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, o)| **o == Occupant::Free)
            .map(|(c, _)| c)
    }

    pub fn completed(&self) -> impl Iterator<Item = Cell> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, o)| **o == Occupant::Completed)
            .map(|(c, _)| c)
    }

    pub fn remaining_targets(&self) -> impl Iterator<Item = (u32, Cell)> + '_ {
        self.targets
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != NO_CELL)
            .map(|(i, &c)| (i as u32, c as Cell))
    }

    pub fn num_remaining_targets(&self) -> usize {
        self.targets.iter().filter(|&&c| c != NO_CELL).count()
    }

    pub fn is_terminal(&self) -> bool {
        self.targets.iter().all(|&c| c == NO_CELL)
    }

    pub(crate) fn set_time(&mut self, time: u32) {
        self.time = time;
    }

    pub(crate) fn move_block(&mut self, block: BlockId, from: Cell, to: Cell) {
        self.cells[from] = Occupant::Free;
        self.cells[to] = Occupant::Block(block);
        match block.kind {
            BlockKind::Target => self.targets[block.id as usize] = to as u32,
            BlockKind::NonTarget => self.nontargets[block.id as usize] = to as u32,
        }
    }

    pub(crate) fn complete_target(&mut self, id: u32, at: Cell) {
        self.cells[at] = Occupant::Completed;
        self.targets[id as usize] = NO_CELL;
    }

    /// Time-free state key: one code per cell. With `anonymous` set, all
    /// non-targets share a code since they are interchangeable.
    pub(crate) fn key(&self, anonymous: bool) -> alloc::boxed::Box<[u16]> {
        let nt = self.targets.len() as u16;
        self.cells
            .iter()
            .map(|o| match *o {
                Occupant::Free | Occupant::Obstacle => 0,
                Occupant::Completed => 1,
                Occupant::Block(b) => match b.kind {
                    BlockKind::NonTarget if anonymous => 2,
                    BlockKind::NonTarget => 3 + nt + b.id as u16,
                    BlockKind::Target => 3 + b.id as u16,
                },
            })
            .collect()
    }

    /// Inverse of [`key`](Self::key) for anonymous keys. Non-targets get
    /// ids in cell order.
    pub(crate) fn from_key(grid: &GridMap, num_targets: usize, key: &[u16]) -> Self {
        let mut targets = vec![NO_CELL; num_targets];
        let mut nontargets = Vec::new();
        let cells = key
            .iter()
            .enumerate()
            .map(|(c, &k)| match k {
                0 if grid.is_obstacle(c) => Occupant::Obstacle,
                0 => Occupant::Free,
                1 => Occupant::Completed,
                2 => {
                    nontargets.push(c as u32);
                    Occupant::Block(BlockId::non_target(nontargets.len() as u32 - 1))
                }
                _ => {
                    let id = (k - 3) as u32;
                    targets[id as usize] = c as u32;
                    Occupant::Block(BlockId::target(id))
                }
            })
            .collect();
        Self::from_parts(0, cells, targets, nontargets)
    }

    /// Checks that blocks, free, completed and obstacle cells partition the
    /// grid and that the position tables agree with the cell table.
    pub fn check_partition(&self, grid: &GridMap) -> bool {
        if self.cells.len() != grid.num_cells() {
            return false;
        }
        let mut seen = 0usize;
        for (c, occ) in self.cells.iter().enumerate() {
            let ok = match *occ {
                Occupant::Obstacle => grid.is_obstacle(c),
                Occupant::Free | Occupant::Completed => !grid.is_obstacle(c),
                Occupant::Block(b) => {
                    seen += 1;
                    !grid.is_obstacle(c) && self.cell_of(b) == Some(c)
                }
            };
            if !ok {
                return false;
            }
        }
        let placed = self.targets.iter().filter(|&&c| c != NO_CELL).count() + self.nontargets.len();
        seen == placed
    }
}

/// Goal vertex sets: one set shared by every target, or one set per target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GoalSpec {
    Shared(Vec<Vertex>),
    PerTarget(Vec<Vec<Vertex>>),
}

/// Action costs by block kind. Non-targets cannot complete.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostModel {
    pub move_tgt: f64,
    pub wait_tgt: f64,
    pub complete_tgt: f64,
    pub move_non: f64,
    pub wait_non: f64,
}

impl CostModel {
    /// The example cost matrix used throughout the benchmarks.
    pub const TABLE1: CostModel = CostModel {
        move_tgt: 2.0,
        wait_tgt: 1.0,
        complete_tgt: 2.0,
        move_non: 2.0,
        wait_non: 0.0,
    };

    pub fn validate(&self) -> Result<(), ModelError> {
        let all = [
            self.move_tgt,
            self.wait_tgt,
            self.complete_tgt,
            self.move_non,
            self.wait_non,
        ];
        if all.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(ModelError::InvalidCosts("costs must be finite and non-negative"));
        }
        Ok(())
    }

    pub fn move_cost(&self, kind: BlockKind) -> f64 {
        match kind {
            BlockKind::Target => self.move_tgt,
            BlockKind::NonTarget => self.move_non,
        }
    }

    pub fn wait_cost(&self, kind: BlockKind) -> f64 {
        match kind {
            BlockKind::Target => self.wait_tgt,
            BlockKind::NonTarget => self.wait_non,
        }
    }
}

impl Default for CostModel {
    fn default() -> Self {
        Self::TABLE1
    }
}

/// Resolved goal cells, shared between targets where possible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct GoalIndex {
    sets: Vec<Vec<u32>>,
    masks: Vec<Vec<bool>>,
    of_target: Vec<usize>,
}

/// A complete problem: grid, start configuration, goals, costs.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub grid: GridMap,
    pub start: Configuration,
    pub goals: GoalSpec,
    pub costs: CostModel,
    pub label: String,
    index: GoalIndex,
}

impl Instance {
    pub fn new(
        grid: GridMap,
        start: Configuration,
        goals: GoalSpec,
        costs: CostModel,
        label: impl Into<String>,
    ) -> Result<Self, ModelError> {
        costs.validate()?;
        if start.time() != 0 || start.completed().next().is_some() {
            return Err(ModelError::InvalidInstance(
                "start configuration must be at time 0 with nothing completed".into(),
            ));
        }
        if !start.check_partition(&grid) {
            return Err(ModelError::InvalidInstance(
                "start configuration does not match the grid".into(),
            ));
        }
        let n = start.num_targets();
        if n == 0 {
            return Err(ModelError::InvalidInstance("at least one target is required".into()));
        }
        let resolve = |set: &[Vertex]| -> Result<Vec<u32>, ModelError> {
            if set.is_empty() {
                return Err(ModelError::InvalidInstance("goal sets must be nonempty".into()));
            }
            let mut cells: Vec<u32> = set
                .iter()
                .map(|&v| grid.open_cell(v).map(|c| c as u32))
                .collect::<Result<_, _>>()?;
            cells.sort_unstable();
            cells.dedup();
            Ok(cells)
        };
        let (sets, of_target) = match &goals {
            GoalSpec::Shared(set) => (vec![resolve(set)?], vec![0; n]),
            GoalSpec::PerTarget(per) => {
                if per.len() != n {
                    return Err(ModelError::InvalidInstance(alloc::format!(
                        "per-target goals cover {} of {} targets",
                        per.len(),
                        n
                    )));
                }
                let sets = per.iter().map(|s| resolve(s)).collect::<Result<Vec<_>, _>>()?;
                (sets, (0..n).collect())
            }
        };
        let masks = sets
            .iter()
            .map(|s| {
                let mut m = vec![false; grid.num_cells()];
                for &c in s {
                    m[c as usize] = true;
                }
                m
            })
            .collect();
        Ok(Self {
            grid,
            start,
            goals,
            costs,
            label: label.into(),
            index: GoalIndex {
                sets,
                masks,
                of_target,
            },
        })
    }

    pub fn num_targets(&self) -> usize {
        self.start.num_targets()
    }

    pub fn num_nontargets(&self) -> usize {
        self.start.num_nontargets()
    }

    pub fn num_blanks(&self) -> usize {
        self.start.free().count()
    }

    /// Sorted goal cells of a target.
    pub fn goal_cells(&self, target: u32) -> &[u32] {
        &self.index.sets[self.index.of_target[target as usize]]
    }

    pub fn is_goal(&self, target: u32, cell: Cell) -> bool {
        self.index.masks[self.index.of_target[target as usize]][cell]
    }

    /// Index of the distinct goal set a target uses; targets with the same
    /// group share a goal set.
    pub fn goal_group(&self, target: u32) -> usize {
        self.index.of_target[target as usize]
    }

    pub fn num_goal_groups(&self) -> usize {
        self.index.sets.len()
    }

    pub fn goal_group_cells(&self, group: usize) -> &[u32] {
        &self.index.sets[group]
    }

    /// Same instance with a different start configuration (used to pose
    /// subproblems from intermediate states).
    pub fn with_start(&self, start: Configuration) -> Result<Self, ModelError> {
        if !start.check_partition(&self.grid) {
            return Err(ModelError::InvalidInstance(
                "configuration does not match the grid".into(),
            ));
        }
        let mut inst = self.clone();
        inst.start = start;
        Ok(inst)
    }
}

/// Applies a single action and advances time by one step.
pub fn apply_action(
    cfg: &Configuration,
    inst: &Instance,
    action: &Action,
) -> Result<Configuration, ModelError> {
    let grid = &inst.grid;
    let block = action.block();
    let t = cfg.time();
    let illegal = |reason| ModelError::IllegalAction { t, block, reason };
    let mut next = cfg.clone();
    match *action {
        Action::Move { from, to, .. } => {
            let (f, d) = (
                grid.open_cell(from).map_err(|_| illegal("source is not a grid vertex"))?,
                grid.open_cell(to).map_err(|_| illegal("destination is not a grid vertex"))?,
            );
            if cfg.cell_of(block) != Some(f) {
                return Err(illegal("block is not at the move source"));
            }
            if !grid.are_adjacent(f, d) {
                return Err(illegal("source and destination are not adjacent"));
            }
            if !cfg.is_free(d) {
                return Err(illegal("destination is not free"));
            }
            next.move_block(block, f, d);
        }
        Action::Wait { at, .. } => {
            let c = grid.open_cell(at).map_err(|_| illegal("wait vertex is not a grid vertex"))?;
            if cfg.cell_of(block) != Some(c) {
                return Err(illegal("block is not at the wait vertex"));
            }
        }
        Action::Complete { at, .. } => {
            if !block.is_target() {
                return Err(illegal("only targets can complete"));
            }
            let c = grid.open_cell(at).map_err(|_| illegal("complete vertex is not a grid vertex"))?;
            if cfg.cell_of(block) != Some(c) {
                return Err(illegal("target is not at the complete vertex"));
            }
            if !inst.is_goal(block.id, c) {
                return Err(illegal("target is not on one of its goal vertices"));
            }
            next.complete_target(block.id, c);
        }
    }
    next.set_time(t + 1);
    Ok(next)
}

pub fn is_terminal(cfg: &Configuration) -> bool {
    cfg.is_terminal()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::Action;

    fn v(r: u32, c: u32) -> Vertex {
        Vertex::new(r, c)
    }

    fn row_instance() -> Instance {
        // 1x4: T at col 0, blanks elsewhere, goal col 3
        let grid = GridMap::new(1, 4, &[]).unwrap();
        let start = Configuration::new(&grid, &[v(0, 0)], &[]).unwrap();
        Instance::new(grid, start, GoalSpec::Shared(vec![v(0, 3)]), CostModel::TABLE1, "row").unwrap()
    }

    #[test]
    fn corner_neighbors_drop_out_of_bounds() {
        let g = GridMap::new(4, 10, &[]).unwrap();
        assert_eq!(g.neighbors(v(0, 0)).unwrap(), vec![v(1, 0), v(0, 1)]);
    }

    #[test]
    fn obstacle_square_removes_neighbor() {
        let obs = [v(8, 8), v(8, 9), v(9, 8), v(9, 9)];
        let g = GridMap::new(10, 10, &obs).unwrap();
        let n = g.neighbors(v(8, 7)).unwrap();
        assert!(!n.contains(&v(8, 8)));
        assert_eq!(n, vec![v(7, 7), v(9, 7), v(8, 6)]);
        assert_eq!(g.neighbors(v(8, 8)), Err(ModelError::InvalidVertex(v(8, 8))));
    }

    #[test]
    fn interior_has_four_neighbors_in_fixed_order() {
        let g = GridMap::new(10, 10, &[]).unwrap();
        assert_eq!(
            g.neighbors(v(2, 2)).unwrap(),
            vec![v(1, 2), v(3, 2), v(2, 1), v(2, 3)]
        );
        assert!(g.neighbors(v(10, 0)).is_err());
    }

    #[test]
    fn move_updates_free_set() {
        let inst = row_instance();
        let a = Action::Move {
            block: BlockId::target(0),
            t: 0,
            from: v(0, 0),
            to: v(0, 1),
        };
        let next = apply_action(&inst.start, &inst, &a).unwrap();
        assert_eq!(next.time(), 1);
        assert!(next.is_free(0));
        assert!(!next.is_free(1));
        assert_eq!(next.position(&inst.grid, BlockId::target(0)), Some(v(0, 1)));
        assert!(next.check_partition(&inst.grid));
    }

    #[test]
    fn move_into_occupied_is_illegal() {
        let grid = GridMap::new(1, 3, &[]).unwrap();
        let start = Configuration::new(&grid, &[v(0, 0)], &[v(0, 1)]).unwrap();
        let inst =
            Instance::new(grid, start, GoalSpec::Shared(vec![v(0, 2)]), CostModel::TABLE1, "x").unwrap();
        let a = Action::Move {
            block: BlockId::target(0),
            t: 0,
            from: v(0, 0),
            to: v(0, 1),
        };
        assert!(matches!(
            apply_action(&inst.start, &inst, &a),
            Err(ModelError::IllegalAction { reason: "destination is not free", .. })
        ));
    }

    #[test]
    fn complete_on_goal_makes_vertex_immovable() {
        let grid = GridMap::new(1, 2, &[]).unwrap();
        let start = Configuration::new(&grid, &[v(0, 1)], &[]).unwrap();
        let inst =
            Instance::new(grid, start, GoalSpec::Shared(vec![v(0, 1)]), CostModel::TABLE1, "x").unwrap();
        assert!(!is_terminal(&inst.start));
        let a = Action::Complete {
            block: BlockId::target(0),
            t: 0,
            at: v(0, 1),
        };
        let next = apply_action(&inst.start, &inst, &a).unwrap();
        assert!(next.is_completed(1));
        assert_eq!(next.cell_of(BlockId::target(0)), None);
        assert!(is_terminal(&next));
        assert!(next.check_partition(&inst.grid));
    }

    #[test]
    fn complete_off_goal_is_illegal() {
        let inst = row_instance();
        let a = Action::Complete {
            block: BlockId::target(0),
            t: 0,
            at: v(0, 0),
        };
        assert!(apply_action(&inst.start, &inst, &a).is_err());
    }

    #[test]
    fn terminal_needs_every_target_completed() {
        let grid = GridMap::new(1, 3, &[]).unwrap();
        let start = Configuration::new(&grid, &[v(0, 0), v(0, 2)], &[]).unwrap();
        let inst = Instance::new(
            grid,
            start,
            GoalSpec::Shared(vec![v(0, 0), v(0, 2)]),
            CostModel::TABLE1,
            "x",
        )
        .unwrap();
        let a = Action::Complete {
            block: BlockId::target(0),
            t: 0,
            at: v(0, 0),
        };
        let next = apply_action(&inst.start, &inst, &a).unwrap();
        assert!(!is_terminal(&next));
    }

    #[test]
    fn instance_rejects_bad_goals() {
        let grid = GridMap::new(2, 2, &[v(1, 1)]).unwrap();
        let start = Configuration::new(&grid, &[v(0, 0)], &[]).unwrap();
        assert!(Instance::new(
            grid.clone(),
            start.clone(),
            GoalSpec::Shared(vec![v(1, 1)]),
            CostModel::TABLE1,
            "x"
        )
        .is_err());
        assert!(Instance::new(
            grid.clone(),
            start.clone(),
            GoalSpec::Shared(vec![]),
            CostModel::TABLE1,
            "x"
        )
        .is_err());
        assert!(Instance::new(grid, start, GoalSpec::PerTarget(vec![]), CostModel::TABLE1, "x").is_err());
    }
}
