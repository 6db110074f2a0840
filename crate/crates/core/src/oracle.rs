//! Exhaustive uniform-cost search over the configuration graph, one action
//! per step. Ground truth for tiny instances.

use alloc::boxed::Box;
use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Reverse;

use hashbrown::HashMap;
use thiserror::Error;

use crate::heuristics::Cost;
use crate::model::{apply_action, BlockId, Configuration, Instance};
use crate::plan::{Action, Plan, Recorder, StepAction};

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("configuration graph exceeds the state cap of {0}")]
pub struct TooLarge(pub usize);

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    /// `None` when no terminal configuration is reachable.
    pub optimal_cost: Option<f64>,
    pub optimal_plan: Option<Plan>,
    pub states_explored: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct OracleOptions {
    pub state_cap: usize,
    /// Treat non-targets as interchangeable in the visited set.
    pub anonymous: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            state_cap: 2_000_000,
            anonymous: true,
        }
    }
}

pub fn oracle_solve(inst: &Instance, state_cap: usize) -> Result<OracleResult, TooLarge> {
    oracle_solve_with(
        inst,
        OracleOptions {
            state_cap,
            ..OracleOptions::default()
        },
    )
}

struct Node {
    cfg: Configuration,
    cost: f64,
    parent: usize,
    step: Option<StepAction>,
}

/// Every single action legal in `cfg`, in block order.
fn legal_actions(cfg: &Configuration, inst: &Instance) -> Vec<Action> {
    let grid = &inst.grid;
    let t = cfg.time();
    let mut out = Vec::new();
    let blocks = cfg
        .remaining_targets()
        .map(|(id, c)| (BlockId::target(id), c))
        .chain(
            cfg.nontarget_cells()
                .iter()
                .enumerate()
                .map(|(id, &c)| (BlockId::non_target(id as u32), c as usize)),
        );
    for (block, c) in blocks {
        let at = grid.vertex(c);
        for &n in grid.adjacent(c) {
            let to = grid.vertex(n as usize);
            out.push(Action::Move { block, t, from: at, to });
        }
        if block.is_target() {
            out.push(Action::Complete { block, t, at });
        }
    }
    out
}

pub fn oracle_solve_with(inst: &Instance, opts: OracleOptions) -> Result<OracleResult, TooLarge> {
    let grid = &inst.grid;
    let mut nodes = alloc::vec![Node {
        cfg: inst.start.clone(),
        cost: 0.0,
        parent: usize::MAX,
        step: None,
    }];
    let mut best: HashMap<Box<[u16]>, usize> = HashMap::new();
    best.insert(inst.start.key(opts.anonymous), 0);
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((Cost(0.0), 0usize)));
    let mut closed = 0usize;
    while let Some(Reverse((Cost(g), idx))) = heap.pop() {
        if g > nodes[idx].cost {
            continue;
        }
        closed += 1;
        let cfg = nodes[idx].cfg.clone();
        if cfg.is_terminal() {
            return Ok(OracleResult {
                optimal_cost: Some(g),
                optimal_plan: Some(extract(inst, &nodes, idx)),
                states_explored: closed,
            });
        }
        let live = cfg.num_remaining_targets() as f64;
        for a in legal_actions(&cfg, inst) {
            let Ok(next) = apply_action(&cfg, inst, &a) else {
                continue;
            };
            let idle = if a.block().is_target() { live - 1.0 } else { live };
            let Ok(c) = a.cost(&inst.costs) else { continue };
            let ng = g + c + idle * inst.costs.wait_tgt;
            let step = match a {
                Action::Move { from, to, .. } => StepAction::Move {
                    from: grid.cell(from),
                    to: grid.cell(to),
                },
                Action::Complete { at, .. } => StepAction::Complete { at: grid.cell(at) },
                Action::Wait { .. } => unreachable!(),
            };
            let key = next.key(opts.anonymous);
            match best.get(&key) {
                Some(&j) if nodes[j].cost <= ng => continue,
                Some(&j) => {
                    nodes[j] = Node {
                        cfg: next,
                        cost: ng,
                        parent: idx,
                        step: Some(step),
                    };
                    heap.push(Reverse((Cost(ng), j)));
                }
                None => {
                    if nodes.len() >= opts.state_cap {
                        return Err(TooLarge(opts.state_cap));
                    }
                    best.insert(key, nodes.len());
                    heap.push(Reverse((Cost(ng), nodes.len())));
                    nodes.push(Node {
                        cfg: next,
                        cost: ng,
                        parent: idx,
                        step: Some(step),
                    });
                }
            }
        }
    }
    Ok(OracleResult {
        optimal_cost: None,
        optimal_plan: None,
        states_explored: closed,
    })
}

fn extract(inst: &Instance, nodes: &[Node], mut idx: usize) -> Plan {
    let mut steps = Vec::new();
    while let Some(s) = nodes[idx].step {
        steps.push(s);
        idx = nodes[idx].parent;
    }
    let mut rec = Recorder::new(inst);
    for s in steps.into_iter().rev() {
        rec.step(&[s]);
    }
    rec.finish()
}
