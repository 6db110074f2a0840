//! Suite manifests: ladders per grid size, kept as editable JSON.

use std::path::Path;

use anyhow::{Context, Result};
use brap_core::benchgen::{GoalType, GridLadder, SuiteParams};
use serde::{Deserialize, Serialize};

pub const PAPER: &str = include_str!("../manifests/paper.json");
pub const PER_TARGET: &str = include_str!("../manifests/per_target.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderDoc {
    pub height: u32,
    pub width: u32,
    pub targets: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets_boundary: Option<Vec<u32>>,
    pub blanks: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub goal_types: Vec<String>,
    pub cases: u32,
    pub grids: Vec<LadderDoc>,
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).context("malformed suite manifest")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn from_params(p: &SuiteParams) -> Self {
        Self {
            goal_types: p.goal_types.iter().map(|g| g.name().to_string()).collect(),
            cases: p.cases,
            grids: p
                .grids
                .iter()
                .map(|g| LadderDoc {
                    height: g.height,
                    width: g.width,
                    targets: g.targets.clone(),
                    targets_boundary: g.targets_boundary.clone(),
                    blanks: g.blanks.clone(),
                })
                .collect(),
        }
    }

    pub fn to_params(&self, seed: u64) -> Result<SuiteParams> {
        let goal_types = self
            .goal_types
            .iter()
            .map(|g| GoalType::from_name(g).with_context(|| format!("unknown goal type `{g}`")))
            .collect::<Result<_>>()?;
        Ok(SuiteParams {
            grids: self
                .grids
                .iter()
                .map(|g| GridLadder {
                    height: g.height,
                    width: g.width,
                    targets: g.targets.clone(),
                    targets_boundary: g.targets_boundary.clone(),
                    blanks: g.blanks.clone(),
                })
                .collect(),
            goal_types,
            cases: self.cases,
            seed,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}
