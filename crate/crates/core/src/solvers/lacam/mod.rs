//! LaCAM: depth-first search over configurations, one successor at a time
//! from BRaP-PIBT, with low-level constraints grown lazily on revisits.
//! After the first solution the search keeps going, pruning by the
//! incumbent cost.

mod pibt;

use alloc::boxed::Box;
use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::hash::BuildHasher;
use core::time::Duration;

use hashbrown::{DefaultHashBuilder, HashTable};

pub use pibt::{brap_pibt_step, LowLevelConstraint, PibtError, PibtOutcome, PriorityTable, TempGoals};

use crate::budget::{Budget, Ticker};
use crate::heuristics::{compute_priority, h_state, HeuristicError};
use crate::model::{BlockId, Configuration, Instance, Occupant, Vertex};
use crate::plan::{metrics, Recorder, StepAction};
use crate::solve::{SolveError, SolveResult, SolveStats};
use pibt::{apply_step, Forced, Generator};

#[derive(Clone, Copy, Debug)]
pub struct LacamOptions {
    /// Keep searching for cheaper plans after the first one.
    pub anytime: bool,
    /// Upper bound on stored high-level nodes.
    pub node_limit: usize,
}

impl Default for LacamOptions {
    fn default() -> Self {
        Self {
            anytime: true,
            node_limit: 3_000_000,
        }
    }
}

/// One level of a node's constraint tree.
struct LowNode {
    constraints: Vec<Forced>,
}

struct HighNode {
    key: Box<[u16]>,
    parent: u32,
    /// Actions leading here from `parent`.
    step: Vec<StepAction>,
    g: f64,
    /// Cost of `step`.
    edge: f64,
    /// Lazily computed; NaN until needed.
    h: f64,
    omega: Vec<f64>,
    goals: Vec<u32>,
    tree: VecDeque<LowNode>,
    /// Constraint choices per block, in growth order.
    choices: Option<Vec<Vec<Forced>>>,
}

fn path_cost_to(nodes: &[HighNode], mut i: u32) -> f64 {
    let mut cost = 0.0;
    while i != u32::MAX {
        cost += nodes[i as usize].edge;
        i = nodes[i as usize].parent;
    }
    cost
}

pub fn lacam_solve(inst: &Instance, budget: &Budget<'_>) -> Result<SolveResult, SolveError> {
    lacam_solve_with(inst, budget, LacamOptions::default())
}

fn step_cost(inst: &Instance, cfg: &Configuration, actions: &[StepAction]) -> f64 {
    let costs = &inst.costs;
    let mut cost = 0.0;
    let mut acting = 0usize;
    for a in actions {
        match *a {
            StepAction::Move { from, .. } => {
                let Occupant::Block(b) = cfg.occupant(from) else { unreachable!() };
                cost += costs.move_cost(b.kind);
                acting += b.is_target() as usize;
            }
            StepAction::Complete { .. } => {
                cost += costs.complete_tgt;
                acting += 1;
            }
        }
    }
    cost + (cfg.num_remaining_targets() - acting) as f64 * costs.wait_tgt
}

/// Constraint options for every block that can act: blocks next to an
/// empty cell and targets on one of their goals. Targets come first by
/// descending priority; non-targets follow, nearest to a temporary goal
/// first. Ties go by cell.
fn growth_choices(inst: &Instance, cfg: &Configuration, omega: &[f64], goals: &[u32]) -> Vec<Vec<Forced>> {
    let grid = &inst.grid;
    let goal_cells: Vec<Vertex> = goals.iter().filter(|&&g| g != u32::MAX).map(|&g| grid.vertex(g as usize)).collect();
    let near_goal = |c: usize| -> f64 {
        let v = grid.vertex(c);
        let d = goal_cells.iter().map(|g| g.row.abs_diff(v.row) + g.col.abs_diff(v.col)).min();
        d.map_or(0.0, |d| d as f64)
    };
    let mut blocks: Vec<(f64, usize, BlockId)> = Vec::new();
    for (c, occ) in cfg.occupants().iter().enumerate() {
        let Occupant::Block(b) = *occ else { continue };
        let near_empty = grid.adjacent(c).iter().any(|&n| cfg.is_free(n as usize));
        let on_goal = b.is_target() && inst.is_goal(b.id, c);
        if near_empty || on_goal {
            let w = if b.is_target() { omega[b.id as usize] } else { -1.0 - near_goal(c) };
            blocks.push((w, c, b));
        }
    }
    blocks.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    blocks
        .into_iter()
        .map(|(_, c, who)| {
            let mut opts = vec![Forced {
                who,
                to: c,
                complete: false,
            }];
            for &n in grid.adjacent(c) {
                if cfg.is_free(n as usize) {
                    opts.push(Forced {
                        who,
                        to: n as usize,
                        complete: false,
                    });
                }
            }
            if who.is_target() && inst.is_goal(who.id, c) {
                opts.push(Forced {
                    who,
                    to: c,
                    complete: true,
                });
            }
            opts
        })
        .collect()
}

pub fn lacam_solve_with(
    inst: &Instance,
    budget: &Budget<'_>,
    opts: LacamOptions,
) -> Result<SolveResult, SolveError> {
    let grid = &inst.grid;
    let nt = inst.num_targets();
    let mut stats = SolveStats::default();
    let ranking = match compute_priority(&inst.start, inst) {
        Ok(r) => r,
        Err(HeuristicError::UnreachableGoal(_)) => return Err(SolveError::Infeasible(stats)),
        Err(e) => return Err(e.into()),
    };
    let mut generator = Generator::new(inst);
    let hasher = DefaultHashBuilder::default();
    let hash = |k: &[u16]| hasher.hash_one(k);

    let mut nodes = vec![HighNode {
        key: inst.start.key(true),
        parent: u32::MAX,
        step: Vec::new(),
        g: 0.0,
        edge: 0.0,
        h: f64::NAN,
        omega: PriorityTable::from_ranking(&ranking, nt).value,
        goals: vec![u32::MAX; nt],
        tree: VecDeque::from([LowNode {
            constraints: Vec::new(),
        }]),
        choices: None,
    }];
    let mut table: HashTable<u32> = HashTable::new();
    table.insert_unique(hash(&nodes[0].key), 0, |&i| hash(&nodes[i as usize].key));
    let mut stack: Vec<u32> = vec![0];
    // (node, cost) of the best terminal node so far
    let mut incumbent: Option<(u32, f64)> = None;
    let mut first: Option<(f64, Duration)> = None;
    let mut ticker = Ticker::new(16);
    let mut timed_out = false;

    if inst.start.is_terminal() {
        incumbent = Some((0, 0.0));
    }

    let lower_bound = |nodes: &mut Vec<HighNode>, j: u32| -> f64 {
        let n = &mut nodes[j as usize];
        if n.h.is_nan() {
            let cfg = Configuration::from_key(grid, nt, &n.key);
            n.h = h_state(&cfg, inst).map_or(f64::INFINITY, |h| h.total);
        }
        n.g + n.h
    };

    while let Some(&top) = stack.last() {
        if incumbent.is_some() && !opts.anytime {
            break;
        }
        if ticker.expired(budget) {
            timed_out = true;
            break;
        }
        if let Some((_, best)) = incumbent {
            if lower_bound(&mut nodes, top) >= best {
                stack.pop();
                continue;
            }
        }
        let Some(low) = nodes[top as usize].tree.pop_front() else {
            let n = &mut nodes[top as usize];
            n.choices = None;
            n.tree = VecDeque::new();
            stack.pop();
            continue;
        };
        stats.expanded += 1;
        let cfg = Configuration::from_key(grid, nt, &nodes[top as usize].key);
        let depth = low.constraints.len();
        let n = &mut nodes[top as usize];
        let choices = n
            .choices
            .get_or_insert_with(|| growth_choices(inst, &cfg, &n.omega, &n.goals));
        if depth < choices.len() {
            let children: Vec<LowNode> = choices[depth]
                .iter()
                .map(|&c| {
                    let mut constraints = low.constraints.clone();
                    constraints.push(c);
                    LowNode { constraints }
                })
                .collect();
            nodes[top as usize].tree.extend(children);
        }
        let node = &nodes[top as usize];
        let Ok(step) = generator.step(&cfg, &node.omega, &node.goals, &low.constraints) else {
            continue;
        };
        let edge = step_cost(inst, &cfg, &step.actions);
        let g = node.g + edge;
        let mut next = cfg.clone();
        apply_step(&mut next, &step.actions);
        let terminal = next.is_terminal();
        let key = next.key(true);
        let hv = hash(&key);
        stats.generated += 1;

        let found = table.find(hv, |&i| nodes[i as usize].key == key).copied();
        let j = match found {
            Some(j) => {
                if incumbent.is_none() {
                    // Re-insert the known node so the search resumes there.
                    if j != top {
                        stack.push(j);
                    }
                    continue;
                }
                if g >= nodes[j as usize].g {
                    continue;
                }
                let n = &mut nodes[j as usize];
                n.parent = top;
                n.step = step.actions;
                n.g = g;
                n.edge = edge;
                n.omega = step.omega;
                n.goals = step.goals;
                n.tree = VecDeque::from([LowNode {
                    constraints: Vec::new(),
                }]);
                n.choices = None;
                j
            }
            None => {
                if nodes.len() >= opts.node_limit {
                    if incumbent.is_some() {
                        break;
                    }
                    return Err(SolveError::NodeLimit(opts.node_limit));
                }
                let j = nodes.len() as u32;
                nodes.push(HighNode {
                    key,
                    parent: top,
                    step: step.actions,
                    g,
                    edge,
                    h: if terminal { 0.0 } else { f64::NAN },
                    omega: step.omega,
                    goals: step.goals,
                    tree: VecDeque::from([LowNode {
                        constraints: Vec::new(),
                    }]),
                    choices: None,
                });
                table.insert_unique(hv, j, |&i| hash(&nodes[i as usize].key));
                j
            }
        };
        if terminal {
            // Ancestors may have been rewired since `g` was computed.
            let g = path_cost_to(&nodes, j);
            nodes[j as usize].g = g;
            if incumbent.map_or(true, |(_, best)| g < best) {
                incumbent = Some((j, g));
                if first.is_none() {
                    first = Some((g, budget.elapsed()));
                }
            }
            continue;
        }
        if let Some((_, best)) = incumbent {
            if lower_bound(&mut nodes, j) >= best {
                continue;
            }
        }
        stack.push(j);
    }

    stats.elapsed = budget.elapsed();
    let Some((goal, _)) = incumbent else {
        return Err(if timed_out {
            SolveError::Timeout(stats)
        } else {
            SolveError::Infeasible(stats)
        });
    };
    let mut steps = Vec::new();
    let mut i = goal;
    while i != 0 {
        steps.push(i);
        i = nodes[i as usize].parent;
    }
    let mut rec = Recorder::new(inst);
    for &i in steps.iter().rev() {
        rec.step(&nodes[i as usize].step);
    }
    let plan = rec.finish();
    let m = metrics(&plan, &inst.costs)?;
    debug_assert!((m.composite_cost - path_cost_to(&nodes, goal)).abs() < 1e-6);
    let (first_cost, first_time) = first.unwrap_or((m.composite_cost, Duration::ZERO));
    Ok(SolveResult {
        plan,
        metrics: m,
        first_cost,
        first_time,
        stats,
    })
}
