//! JSON documents for instances and plans, and file helpers that also
//! accept the line-oriented plan format.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use brap_core::plan::{format_plan, parse_plan};
use brap_core::{Action, BlockId, Configuration, CostModel, GoalSpec, GridMap, Instance, Plan, Vertex};
use serde::{Deserialize, Serialize};

type Rc = [u32; 2];

fn rc(v: Vertex) -> Rc {
    [v.row, v.col]
}

fn vx(p: Rc) -> Vertex {
    Vertex::new(p[0], p[1])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockDoc {
    pub id: u32,
    pub start: Rc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoalsDoc {
    Shared(Vec<Rc>),
    /// Keyed by target id; JSON object keys are strings.
    PerTarget(BTreeMap<String, Vec<Rc>>),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostsDoc {
    pub move_tgt: f64,
    pub wait_tgt: f64,
    pub complete_tgt: f64,
    pub move_non: f64,
    pub wait_non: f64,
}

impl From<CostModel> for CostsDoc {
    fn from(c: CostModel) -> Self {
        Self {
            move_tgt: c.move_tgt,
            wait_tgt: c.wait_tgt,
            complete_tgt: c.complete_tgt,
            move_non: c.move_non,
            wait_non: c.wait_non,
        }
    }
}

impl From<CostsDoc> for CostModel {
    fn from(c: CostsDoc) -> Self {
        Self {
            move_tgt: c.move_tgt,
            wait_tgt: c.wait_tgt,
            complete_tgt: c.complete_tgt,
            move_non: c.move_non,
            wait_non: c.wait_non,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub height: u32,
    pub width: u32,
    #[serde(default)]
    pub obstacles: Vec<Rc>,
    pub targets: Vec<BlockDoc>,
    #[serde(default)]
    pub nontargets: Vec<BlockDoc>,
    pub goals: GoalsDoc,
    #[serde(default = "table1")]
    pub costs: CostsDoc,
    #[serde(default)]
    pub label: String,
}

fn table1() -> CostsDoc {
    CostModel::TABLE1.into()
}

impl InstanceDoc {
    pub fn from_instance(inst: &Instance) -> Self {
        let grid = &inst.grid;
        let blocks = |cells: &[u32]| -> Vec<BlockDoc> {
            cells
                .iter()
                .enumerate()
                .map(|(i, &c)| BlockDoc {
                    id: i as u32,
                    start: rc(grid.vertex(c as usize)),
                })
                .collect()
        };
        let goals = match &inst.goals {
            GoalSpec::Shared(g) => GoalsDoc::Shared(g.iter().copied().map(rc).collect()),
            GoalSpec::PerTarget(per) => GoalsDoc::PerTarget(
                per.iter()
                    .enumerate()
                    .map(|(i, g)| (i.to_string(), g.iter().copied().map(rc).collect()))
                    .collect(),
            ),
        };
        Self {
            height: grid.height(),
            width: grid.width(),
            obstacles: grid.obstacles().map(rc).collect(),
            targets: blocks(inst.start.target_cells()),
            nontargets: blocks(inst.start.nontarget_cells()),
            goals,
            costs: inst.costs.into(),
            label: inst.label.clone(),
        }
    }

    pub fn to_instance(&self) -> Result<Instance> {
        let ordered = |blocks: &[BlockDoc], what: &str| -> Result<Vec<Vertex>> {
            let mut out = vec![None; blocks.len()];
            for b in blocks {
                let slot = out
                    .get_mut(b.id as usize)
                    .with_context(|| format!("{what} ids must be 0..{}", blocks.len()))?;
                if slot.replace(vx(b.start)).is_some() {
                    bail!("duplicate {what} id {}", b.id);
                }
            }
            Ok(out.into_iter().map(Option::unwrap).collect())
        };
        let obstacles: Vec<Vertex> = self.obstacles.iter().copied().map(vx).collect();
        let grid = GridMap::new(self.height, self.width, &obstacles)?;
        let targets = ordered(&self.targets, "target")?;
        let nontargets = ordered(&self.nontargets, "non-target")?;
        let start = Configuration::new(&grid, &targets, &nontargets)?;
        let goals = match &self.goals {
            GoalsDoc::Shared(g) => GoalSpec::Shared(g.iter().copied().map(vx).collect()),
            GoalsDoc::PerTarget(per) => {
                let mut sets = vec![None; targets.len()];
                for (k, g) in per {
                    let id: usize = k.parse().with_context(|| format!("bad target id `{k}`"))?;
                    let slot = sets
                        .get_mut(id)
                        .with_context(|| format!("goal set for unknown target {id}"))?;
                    *slot = Some(g.iter().copied().map(vx).collect());
                }
                let sets: Option<Vec<Vec<Vertex>>> = sets.into_iter().collect();
                GoalSpec::PerTarget(sets.context("every target needs a goal set")?)
            }
        };
        Ok(Instance::new(grid, start, goals, self.costs.into(), self.label.clone())?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActionDoc {
    Move { t: u32, block: String, from: Rc, to: Rc },
    Wait { t: u32, block: String, at: Rc },
    Complete { t: u32, block: String, at: Rc },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanDoc {
    #[serde(default)]
    pub label: String,
    pub actions: Vec<ActionDoc>,
}

impl PlanDoc {
    pub fn from_plan(plan: &Plan, label: &str) -> Self {
        let actions = plan
            .actions()
            .into_iter()
            .map(|a| match a {
                Action::Move { block, t, from, to } => ActionDoc::Move {
                    t,
                    block: block.to_string(),
                    from: rc(from),
                    to: rc(to),
                },
                Action::Wait { block, t, at } => ActionDoc::Wait {
                    t,
                    block: block.to_string(),
                    at: rc(at),
                },
                Action::Complete { block, t, at } => ActionDoc::Complete {
                    t,
                    block: block.to_string(),
                    at: rc(at),
                },
            })
            .collect();
        Self {
            label: label.into(),
            actions,
        }
    }

    pub fn to_plan(&self) -> Result<Plan> {
        let block = |s: &str| BlockId::parse(s).with_context(|| format!("bad block id `{s}`"));
        let mut plan = Plan::new();
        for a in &self.actions {
            plan.push(match a {
                ActionDoc::Move { t, block: b, from, to } => Action::Move {
                    block: block(b)?,
                    t: *t,
                    from: vx(*from),
                    to: vx(*to),
                },
                ActionDoc::Wait { t, block: b, at } => Action::Wait {
                    block: block(b)?,
                    t: *t,
                    at: vx(*at),
                },
                ActionDoc::Complete { t, block: b, at } => Action::Complete {
                    block: block(b)?,
                    t: *t,
                    at: vx(*at),
                },
            });
        }
        Ok(plan)
    }
}

pub fn instance_to_json(inst: &Instance) -> String {
    serde_json::to_string_pretty(&InstanceDoc::from_instance(inst)).expect("instance serializes")
}

pub fn instance_from_json(text: &str) -> Result<Instance> {
    let doc: InstanceDoc = serde_json::from_str(text).context("malformed instance document")?;
    doc.to_instance()
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    instance_from_json(&text).with_context(|| format!("in {}", path.display()))
}

pub fn write_instance(path: &Path, inst: &Instance) -> Result<()> {
    fs::write(path, instance_to_json(inst)).with_context(|| format!("writing {}", path.display()))
}

/// Parses either a JSON plan document or the line format.
pub fn plan_from_str(text: &str) -> Result<Plan> {
    if text.trim_start().starts_with('{') {
        let doc: PlanDoc = serde_json::from_str(text).context("malformed plan document")?;
        doc.to_plan()
    } else {
        Ok(parse_plan(text)?)
    }
}

pub fn read_plan(path: &Path) -> Result<Plan> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    plan_from_str(&text).with_context(|| format!("in {}", path.display()))
}

pub fn plan_to_text(plan: &Plan) -> String {
    format_plan(plan)
}

pub fn plan_to_json(plan: &Plan, label: &str) -> String {
    serde_json::to_string_pretty(&PlanDoc::from_plan(plan, label)).expect("plan serializes")
}
