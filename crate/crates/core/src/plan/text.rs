//! Line-oriented plan text:
//!
//! ```text
//! t 0 move T0 0,0 -> 0,1
//! t 1 wait N3 2,2
//! t 2 complete T0 0,1
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use alloc::string::String;
use core::fmt::Write;

use thiserror::Error;

use super::{Action, Plan};
use crate::model::{BlockId, Vertex};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {reason}")]
pub struct ParsePlanError {
    pub line: usize,
    pub reason: &'static str,
}

pub fn format_plan(plan: &Plan) -> String {
    let mut out = String::new();
    for a in plan.actions() {
        // Writing to a String cannot fail.
        let _ = match a {
            Action::Move { block, t, from, to } => writeln!(out, "t {t} move {block} {from} -> {to}"),
            Action::Wait { block, t, at } => writeln!(out, "t {t} wait {block} {at}"),
            Action::Complete { block, t, at } => writeln!(out, "t {t} complete {block} {at}"),
        };
    }
    out
}

fn parse_vertex(s: &str) -> Option<Vertex> {
    let (r, c) = s.split_once(',')?;
    Some(Vertex::new(r.trim().parse().ok()?, c.trim().parse().ok()?))
}

pub fn parse_plan(text: &str) -> Result<Plan, ParsePlanError> {
    let mut plan = Plan::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |reason| ParsePlanError { line: i + 1, reason };
        let mut tok = line.split_whitespace();
        if tok.next() != Some("t") {
            return Err(err("expected leading 't'"));
        }
        let t: u32 = tok
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err("bad timestamp"))?;
        let kind = tok.next().ok_or_else(|| err("missing action"))?;
        let block = tok.next().and_then(BlockId::parse).ok_or_else(|| err("bad block id"))?;
        let at = tok.next().and_then(parse_vertex).ok_or_else(|| err("bad vertex"))?;
        let action = match kind {
            "move" => {
                if tok.next() != Some("->") {
                    return Err(err("expected '->'"));
                }
                let to = tok.next().and_then(parse_vertex).ok_or_else(|| err("bad destination"))?;
                Action::Move { block, t, from: at, to }
            }
            "wait" => Action::Wait { block, t, at },
            "complete" => Action::Complete { block, t, at },
            _ => return Err(err("unknown action")),
        };
        if tok.next().is_some() {
            return Err(err("trailing tokens"));
        }
        plan.push(action);
    }
    Ok(plan)
}
