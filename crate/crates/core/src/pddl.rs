//! PDDL encoding of the configuration-space search and parsing of
//! totally ordered plans produced by an external classical planner.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::model::{Cell, GoalSpec, Instance, Occupant};
use crate::plan::{Plan, Recorder, StepAction};

const DOMAIN: &str = r"(define
    (domain block-rearrangement)
    (:requirements :strips :action-costs)
    (:predicates
        (tgt ?loc)
        (fre ?loc)
        (blo ?loc)
        (cmp ?loc)
        (goal ?loc)
        (adjacent ?loc1 ?loc2)
    )
    (:action slide_blo
        :parameters (?from ?to)
        :precondition  (and (blo ?from) (fre ?to) (adjacent ?from ?to))
        :effect (and
                (not (blo ?from)) 
                (blo ?to)
                (not (fre ?to))
                (fre ?from)
                )
    )
    (:action slide_tgt
        :parameters (?from ?to)
        :precondition  (and (tgt ?from) (fre ?to) (adjacent ?from ?to))
        :effect (and
                (not (tgt ?from))
                (tgt ?to)
                (not (fre ?to))
                (fre ?from)
                (cmp ?from)
                (not (cmp ?to))
                )
    )
    (:action complete
        :parameters (?loc)
        :precondition  (and (goal ?loc) (tgt ?loc))
        :effect (and
                (not (tgt ?loc))
                (cmp ?loc)
                )
    )
)
";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PddlError {
    #[error("per-target goal sets cannot be expressed with the single goal predicate")]
    UnsupportedGoal,
    #[error("plan line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// The block-rearrangement domain exactly as published. It declares
/// `:action-costs` but never increases `total-cost`, so planners treat
/// every action as unit cost.
pub fn emit_domain() -> String {
    DOMAIN.into()
}

/// Domain variant whose actions increase `total-cost` by the instance's
/// move and complete costs. Not part of the published listing.
pub fn emit_domain_costed(inst: &Instance) -> String {
    let c = &inst.costs;
    let mut out = String::from(DOMAIN);
    out = out.replacen(
        "    (:action slide_blo",
        "    (:functions (total-cost) - number)\n    (:action slide_blo",
        1,
    );
    let incs = [
        format!("                (increase (total-cost) {})\n", c.move_non),
        format!("                (increase (total-cost) {})\n", c.move_tgt),
        format!("                (increase (total-cost) {})\n", c.complete_tgt),
    ];
    // Each action's effect conjunction closes with this exact line.
    let close = "                )\n";
    let mut result = String::with_capacity(out.len() + 128);
    let mut rest = out.as_str();
    for inc in &incs {
        let at = rest.find(close).expect("effect terminator");
        result.push_str(&rest[..at]);
        result.push_str(inc);
        result.push_str(close);
        rest = &rest[at + close.len()..];
    }
    result.push_str(rest);
    result
}

fn node(inst: &Instance, cell: Cell) -> String {
    let v = inst.grid.vertex(cell);
    format!("node-{}-{}", v.row, v.col)
}

/// Problem file: one object per open vertex, row-major. Only shared goal
/// sets are expressible.
pub fn emit_problem(inst: &Instance) -> Result<String, PddlError> {
    emit_problem_with(inst, false)
}

/// With `costed`, initializes `total-cost` and adds the minimization
/// metric, for use with [`emit_domain_costed`].
pub fn emit_problem_with(inst: &Instance, costed: bool) -> Result<String, PddlError> {
    let GoalSpec::Shared(goals) = &inst.goals else {
        return Err(PddlError::UnsupportedGoal);
    };
    let grid = &inst.grid;
    let goal_cells: Vec<Cell> = goals.iter().map(|&g| grid.cell(g)).collect();
    let open: Vec<Cell> = (0..grid.num_cells()).filter(|&c| !grid.is_obstacle(c)).collect();
    let mut out = String::new();
    let name = sanitize(&inst.label);
    let _ = writeln!(out, "(define (problem {name})");
    out.push_str("    (:domain block-rearrangement)\n    (:objects");
    for &c in &open {
        let _ = write!(out, " {}", node(inst, c));
    }
    out.push_str(")\n    (:init\n");
    if costed {
        out.push_str("        (= (total-cost) 0)\n");
    }
    for &c in &open {
        let n = node(inst, c);
        let kind = match inst.start.occupant(c) {
            Occupant::Block(b) if b.is_target() => "tgt",
            Occupant::Block(_) => "blo",
            _ => "fre",
        };
        let _ = writeln!(out, "        ({kind} {n})");
        if kind != "tgt" {
            let _ = writeln!(out, "        (cmp {n})");
        }
        if goal_cells.contains(&c) {
            let _ = writeln!(out, "        (goal {n})");
        }
    }
    for &c in &open {
        for &m in grid.adjacent(c) {
            let _ = writeln!(out, "        (adjacent {} {})", node(inst, c), node(inst, m as Cell));
        }
    }
    out.push_str("    )\n    (:goal (and");
    for &c in &open {
        let _ = write!(out, " (cmp {})", node(inst, c));
    }
    out.push_str("))\n");
    if costed {
        out.push_str("    (:metric minimize (total-cost))\n");
    }
    out.push_str(")\n");
    Ok(out)
}

fn sanitize(label: &str) -> String {
    let s: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c.to_ascii_lowercase() } else { '-' })
        .collect();
    if s.chars().next().map_or(true, |c| !c.is_ascii_alphabetic()) {
        format!("brap-{s}")
    } else {
        s
    }
}

fn parse_node(inst: &Instance, tok: &str) -> Result<Cell, String> {
    let bad = || format!("malformed node `{tok}`");
    let rest = tok.strip_prefix("node-").ok_or_else(bad)?;
    let (r, c) = rest.split_once('-').ok_or_else(bad)?;
    let r: u32 = r.parse().map_err(|_| bad())?;
    let c: u32 = c.parse().map_err(|_| bad())?;
    let v = crate::model::Vertex::new(r, c);
    inst.grid.open_cell(v).map_err(|_| format!("`{tok}` is not an open vertex"))
}

/// Reads a totally ordered plan, one ground action per line, e.g.
/// `(slide_tgt node-0-0 node-0-1)`. Lines starting with `;` are comments.
/// Actions get consecutive timesteps; block identities are recovered by
/// simulating from the start configuration.
pub fn parse_plan_file(text: &str, inst: &Instance) -> Result<Plan, PddlError> {
    let grid = &inst.grid;
    let mut rec = Recorder::new(inst);
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |reason: String| PddlError::Parse { line, reason };
        let s = raw.trim();
        if s.is_empty() || s.starts_with(';') {
            continue;
        }
        let inner = s
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| err("expected a parenthesized action".into()))?
            .to_ascii_lowercase();
        let toks: Vec<&str> = inner.split_whitespace().collect();
        let cfg = rec.config();
        let step = match toks.as_slice() {
            [op @ ("slide_tgt" | "slide_blo"), a, b] => {
                let from = parse_node(inst, a).map_err(err)?;
                let to = parse_node(inst, b).map_err(err)?;
                if !grid.are_adjacent(from, to) {
                    return Err(err(format!("{a} and {b} are not adjacent")));
                }
                let want_target = *op == "slide_tgt";
                match cfg.occupant(from) {
                    Occupant::Block(blk) if blk.is_target() == want_target => {}
                    other => return Err(err(format!("{op} from {a}, which holds {other:?}"))),
                }
                if !cfg.is_free(to) {
                    return Err(err(format!("{b} is not free")));
                }
                StepAction::Move { from, to }
            }
            ["complete", a] => {
                let at = parse_node(inst, a).map_err(err)?;
                match cfg.occupant(at) {
                    Occupant::Block(blk) if blk.is_target() && inst.is_goal(blk.id, at) => {}
                    other => return Err(err(format!("cannot complete {a}, which holds {other:?}"))),
                }
                StepAction::Complete { at }
            }
            [op, ..] => return Err(err(format!("unknown action `{op}` or wrong arity"))),
            [] => return Err(err("empty action".into())),
        };
        rec.step(&[step]);
    }
    Ok(rec.finish())
}
