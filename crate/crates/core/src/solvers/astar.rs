//! A* over the joint configuration space with one action per timestep.

use alloc::boxed::Box;
use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Reverse;
use core::hash::BuildHasher;

use hashbrown::hash_table::Entry;
use hashbrown::{DefaultHashBuilder, HashTable};

use crate::budget::{Budget, Ticker};
use crate::heuristics::{h_state_with, Cost, HeuristicError, HeuristicMode};
use crate::model::{Configuration, Instance};
use crate::plan::{Recorder, StepAction};
use crate::solve::{SolveError, SolveResult, SolveStats};

const FREE: u16 = 0;
const COMPLETED: u16 = 1;
const NON_TARGET: u16 = 2;
const TARGET0: u16 = 3;

#[derive(Clone, Copy, Debug)]
pub struct AstarOptions {
    pub heuristic: HeuristicMode,
    /// Upper bound on stored nodes; exceeding it aborts the search.
    pub node_limit: usize,
}

impl Default for AstarOptions {
    fn default() -> Self {
        Self {
            heuristic: HeuristicMode::Average,
            node_limit: 4_000_000,
        }
    }
}

struct Node {
    key: Box<[u16]>,
    g: f64,
    h: f64,
    parent: u32,
    step: Option<StepAction>,
}

pub fn solve_astar(inst: &Instance, budget: &Budget<'_>) -> Result<SolveResult, SolveError> {
    solve_astar_with(inst, budget, AstarOptions::default())
}

fn decode(inst: &Instance, key: &[u16]) -> Configuration {
    Configuration::from_key(&inst.grid, inst.num_targets(), key)
}

pub fn solve_astar_with(
    inst: &Instance,
    budget: &Budget<'_>,
    opts: AstarOptions,
) -> Result<SolveResult, SolveError> {
    let grid = &inst.grid;
    let costs = &inst.costs;
    let mut stats = SolveStats::default();
    let h0 = match h_state_with(&inst.start, inst, opts.heuristic) {
        Ok(h) => h.total,
        Err(HeuristicError::UnreachableGoal(_)) => return Err(SolveError::Infeasible(stats)),
        Err(e) => return Err(e.into()),
    };
    let hasher = DefaultHashBuilder::default();
    let hash = |k: &[u16]| hasher.hash_one(k);
    let mut nodes = alloc::vec![Node {
        key: inst.start.key(true),
        g: 0.0,
        h: h0,
        parent: u32::MAX,
        step: None,
    }];
    let mut table: HashTable<u32> = HashTable::new();
    table.insert_unique(hash(&nodes[0].key), 0, |&i| hash(&nodes[i as usize].key));
    // (f, h, insertion order)
    let mut open = BinaryHeap::new();
    let mut seq = 0u64;
    open.push(Reverse((Cost(h0), Cost(h0), seq, 0u32)));
    // Ticks on expansions and on heuristic evaluations, which dominate on
    // large grids.
    let mut ticker = Ticker::new(16);

    while let Some(Reverse((Cost(f), _, _, idx))) = open.pop() {
        let node = &nodes[idx as usize];
        if f > node.g + node.h {
            continue;
        }
        if ticker.expired(budget) {
            stats.elapsed = budget.elapsed();
            return Err(SolveError::Timeout(stats));
        }
        stats.expanded += 1;
        let g = node.g;
        let key = node.key.clone();
        let cfg = decode(inst, &key);
        if cfg.is_terminal() {
            stats.elapsed = budget.elapsed();
            let plan = extract(inst, &nodes, idx);
            return SolveResult::single(inst, plan, stats);
        }
        let live = cfg.num_remaining_targets() as f64;
        let mut succ: Vec<(StepAction, f64, Box<[u16]>)> = Vec::new();
        for (c, &k) in key.iter().enumerate() {
            if k < NON_TARGET {
                continue;
            }
            let is_target = k >= TARGET0;
            let idle = if is_target { live - 1.0 } else { live };
            let wait = idle * costs.wait_tgt;
            let mc = if is_target { costs.move_tgt } else { costs.move_non };
            for &n in grid.adjacent(c) {
                let n = n as usize;
                if key[n] != FREE {
                    continue;
                }
                let mut next = key.clone();
                next[n] = k;
                next[c] = FREE;
                succ.push((StepAction::Move { from: c, to: n }, mc + wait, next));
            }
            if is_target && inst.is_goal((k - TARGET0) as u32, c) {
                let mut next = key.clone();
                next[c] = COMPLETED;
                succ.push((StepAction::Complete { at: c }, costs.complete_tgt + wait, next));
            }
        }
        for (step, c, next) in succ {
            stats.generated += 1;
            let ng = g + c;
            let hv = hash(&next);
            let existing = table
                .find(hv, |&i| nodes[i as usize].key == next)
                .copied();
            let j = match existing {
                Some(j) => {
                    let n = &mut nodes[j as usize];
                    if n.g <= ng {
                        continue;
                    }
                    n.g = ng;
                    n.parent = idx;
                    n.step = Some(step);
                    j
                }
                None => {
                    if ticker.expired(budget) {
                        stats.elapsed = budget.elapsed();
                        return Err(SolveError::Timeout(stats));
                    }
                    let h = match h_state_with(&decode(inst, &next), inst, opts.heuristic) {
                        Ok(h) => h.total,
                        // Some target can no longer reach a goal.
                        Err(_) => continue,
                    };
                    if nodes.len() >= opts.node_limit {
                        return Err(SolveError::NodeLimit(opts.node_limit));
                    }
                    let j = nodes.len() as u32;
                    nodes.push(Node {
                        key: next,
                        g: ng,
                        h,
                        parent: idx,
                        step: Some(step),
                    });
                    match table.entry(hv, |&i| i == j, |&i| hash(&nodes[i as usize].key)) {
                        Entry::Vacant(v) => {
                            v.insert(j);
                        }
                        Entry::Occupied(_) => unreachable!(),
                    }
                    j
                }
            };
            let n = &nodes[j as usize];
            seq += 1;
            open.push(Reverse((Cost(n.g + n.h), Cost(n.h), seq, j)));
        }
    }
    stats.elapsed = budget.elapsed();
    Err(SolveError::Infeasible(stats))
}

fn extract(inst: &Instance, nodes: &[Node], mut idx: u32) -> crate::plan::Plan {
    let mut steps = Vec::new();
    while let Some(s) = nodes[idx as usize].step {
        steps.push(s);
        idx = nodes[idx as usize].parent;
    }
    let mut rec = Recorder::new(inst);
    for s in steps.into_iter().rev() {
        rec.step(&[s]);
    }
    rec.finish()
}
