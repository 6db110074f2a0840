use alloc::vec::Vec;

use super::{Action, Plan};
use crate::model::{BlockId, Cell, Configuration, Instance, Occupant};

/// A step action addressed by cell; the acting block is whatever occupies
/// the source cell when the step starts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub(crate) enum StepAction {
    Move { from: Cell, to: Cell },
    Complete { at: Cell },
}

/// Turns a sequence of cell-level steps into a labelled plan by simulating
/// from the start configuration. Searches that treat non-targets as
/// interchangeable emit steps without ids and recover them here.
pub(crate) struct Recorder<'a> {
    inst: &'a Instance,
    cfg: Configuration,
    plan: Plan,
    next_t: u32,
}

impl<'a> Recorder<'a> {
    pub fn new(inst: &'a Instance) -> Self {
        Self {
            inst,
            cfg: inst.start.clone(),
            plan: Plan::new(),
            next_t: 0,
        }
    }

    pub fn config(&self) -> &Configuration {
        &self.cfg
    }

    /// Records one simultaneous step at the next timestep.
    pub fn step(&mut self, actions: &[StepAction]) {
        self.step_at(self.next_t, actions);
    }

    /// Records one simultaneous step at `t >= next_time()`.
    pub fn step_at(&mut self, t: u32, actions: &[StepAction]) {
        debug_assert!(t >= self.next_t);
        let grid = &self.inst.grid;
        let resolved: Vec<(BlockId, StepAction)> = actions
            .iter()
            .map(|&a| {
                let src = match a {
                    StepAction::Move { from, .. } => from,
                    StepAction::Complete { at } => at,
                };
                match self.cfg.occupant(src) {
                    Occupant::Block(b) => (b, a),
                    other => panic!("step source {src} holds {other:?}"),
                }
            })
            .collect();
        for &(block, a) in &resolved {
            match a {
                StepAction::Move { from, to } => {
                    debug_assert!(self.cfg.is_free(to) && grid.are_adjacent(from, to));
                    self.plan.push(Action::Move {
                        block,
                        t,
                        from: grid.vertex(from),
                        to: grid.vertex(to),
                    });
                }
                StepAction::Complete { at } => {
                    debug_assert!(block.is_target() && self.inst.is_goal(block.id, at));
                    self.plan.push(Action::Complete {
                        block,
                        t,
                        at: grid.vertex(at),
                    });
                }
            }
        }
        for &(block, a) in &resolved {
            match a {
                StepAction::Move { from, to } => self.cfg.move_block(block, from, to),
                StepAction::Complete { at } => self.cfg.complete_target(block.id, at),
            }
        }
        self.next_t = t + 1;
        self.cfg.set_time(self.next_t);
    }

    /// The recorded plan with explicit target waits filled in.
    pub fn finish(self) -> Plan {
        self.plan.with_target_waits()
    }
}
