//! Deterministic benchmark instance generation.
//!
//! A suite is the cross product of grid sizes, per-grid target and blank
//! ladders, goal types and case indices. Every instance is generated from
//! its own seed, so any single instance can be regenerated in isolation.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{Configuration, CostModel, GoalSpec, GridMap, Instance, ModelError, Vertex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GoalType {
    /// Every open boundary vertex.
    Boundary,
    /// As many random goals as targets.
    R1,
    /// Twice as many random goals as targets.
    R2,
    /// Five random goals for each target, sampled independently.
    PerTarget5,
}

impl GoalType {
    pub const ALL_SHARED: [GoalType; 3] = [GoalType::Boundary, GoalType::R1, GoalType::R2];

    pub fn name(self) -> &'static str {
        match self {
            GoalType::Boundary => "B",
            GoalType::R1 => "R1",
            GoalType::R2 => "R2",
            GoalType::PerTarget5 => "P5",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "B" => GoalType::Boundary,
            "R1" => GoalType::R1,
            "R2" => GoalType::R2,
            "P5" => GoalType::PerTarget5,
            _ => return None,
        })
    }

    fn code(self) -> u64 {
        match self {
            GoalType::Boundary => 0,
            GoalType::R1 => 1,
            GoalType::R2 => 2,
            GoalType::PerTarget5 => 3,
        }
    }
}

/// Ladders for one grid size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridLadder {
    pub height: u32,
    pub width: u32,
    /// Target counts for random goal types.
    pub targets: Vec<u32>,
    /// Target counts for boundary goals, when they differ from `targets`.
    pub targets_boundary: Option<Vec<u32>>,
    pub blanks: Vec<u32>,
}

impl GridLadder {
    pub fn targets_for(&self, goal: GoalType) -> &[u32] {
        match (goal, &self.targets_boundary) {
            (GoalType::Boundary, Some(b)) => b,
            _ => &self.targets,
        }
    }

    /// Eleven evenly spaced blank counts from 1 up to a quarter of the grid.
    pub fn default_blanks(height: u32, width: u32) -> Vec<u32> {
        // round(k/10 * |V|/4), halves rounding up
        let v = height * width;
        (0..=10)
            .map(|k| ((k * v + 20) / 40).max(1))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteParams {
    pub grids: Vec<GridLadder>,
    pub goal_types: Vec<GoalType>,
    pub cases: u32,
    pub seed: u64,
}

/// Everything needed to regenerate one instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct InstanceSpec {
    pub height: u32,
    pub width: u32,
    pub targets: u32,
    pub blanks: u32,
    pub goal: GoalType,
    pub case: u32,
}

impl InstanceSpec {
    pub fn label(&self) -> String {
        format!(
            "x{}_y{}_t{}_b{}_{}_rand{}",
            self.height,
            self.width,
            self.targets,
            self.blanks,
            self.goal.name(),
            self.case
        )
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BenchgenError {
    #[error("{label}: {reason}")]
    Params { label: String, reason: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn ladder(height: u32, width: u32, targets: &[u32], boundary: Option<&[u32]>) -> GridLadder {
    GridLadder {
        height,
        width,
        targets: targets.to_vec(),
        targets_boundary: boundary.map(<[u32]>::to_vec),
        blanks: GridLadder::default_blanks(height, width),
    }
}

impl SuiteParams {
    /// Grid sizes and target ladders of the main benchmark.
    pub fn paper(seed: u64) -> Self {
        Self {
            grids: paper_grids(true),
            goal_types: GoalType::ALL_SHARED.to_vec(),
            cases: 10,
            seed,
        }
    }

    /// Same grids and ladders with five independent goals per target.
    pub fn per_target(seed: u64) -> Self {
        Self {
            grids: paper_grids(false),
            goal_types: alloc::vec![GoalType::PerTarget5],
            cases: 10,
            seed,
        }
    }

    /// Keeps only the listed grid sizes.
    pub fn restrict_grids(mut self, sizes: &[(u32, u32)]) -> Self {
        self.grids.retain(|g| sizes.contains(&(g.height, g.width)));
        self
    }

    /// Thins every ladder to about `factor` of its values, keeping both
    /// ends. `factor >= 1` leaves the suite unchanged.
    pub fn scaled(mut self, factor: f64) -> Self {
        if factor >= 1.0 {
            return self;
        }
        let thin = |v: &mut Vec<u32>| {
            let keep = ((v.len() as f64 * factor + 0.5) as usize).clamp(1, v.len());
            if keep == 1 {
                v.truncate(1);
                return;
            }
            let n = v.len() - 1;
            *v = (0..keep).map(|i| v[(i * n + (keep - 1) / 2) / (keep - 1)]).collect();
        };
        for g in &mut self.grids {
            thin(&mut g.targets);
            if let Some(b) = &mut g.targets_boundary {
                thin(b);
            }
            thin(&mut g.blanks);
        }
        self
    }

    /// Every instance in suite order. A (targets, blanks) pair listed twice
    /// in the ladders gets case indices offset by `cases` the second time.
    pub fn specs(&self) -> Vec<InstanceSpec> {
        let mut out = Vec::new();
        for g in &self.grids {
            for &goal in &self.goal_types {
                for (ti, &t) in g.targets_for(goal).iter().enumerate() {
                    let t_rep = g.targets_for(goal)[..ti].iter().filter(|&&x| x == t).count() as u32;
                    for (bi, &b) in g.blanks.iter().enumerate() {
                        let b_rep = g.blanks[..bi].iter().filter(|&&x| x == b).count() as u32;
                        let offset = (t_rep + b_rep) * self.cases;
                        for k in 0..self.cases {
                            out.push(InstanceSpec {
                                height: g.height,
                                width: g.width,
                                targets: t,
                                blanks: b,
                                goal,
                                case: offset + k,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn count(&self) -> usize {
        self.specs().len()
    }
}

fn paper_grids(boundary_ladders: bool) -> Vec<GridLadder> {
    let b = |v: &'static [u32]| boundary_ladders.then_some(v);
    alloc::vec![
        ladder(4, 10, &[1, 2, 3, 4, 5, 6], None),
        ladder(6, 10, &[1, 2, 3, 5, 6, 8], None),
        ladder(8, 10, &[1, 2, 4, 6, 8, 10], None),
        ladder(10, 10, &[1, 3, 5, 8, 10, 13], None),
        ladder(20, 20, &[1, 10, 20, 30, 40, 50], b(&[1, 8, 16, 24, 32, 40])),
        ladder(40, 40, &[1, 40, 80, 120, 160, 200], b(&[1, 16, 32, 48, 64, 80])),
        ladder(80, 80, &[1, 160, 320, 480, 640, 800], b(&[1, 32, 64, 96, 128, 160])),
    ]
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-instance seed: splitmix64 folded over the master seed, then
/// height, width, targets, blanks, goal-type code and case index.
pub fn instance_seed(master: u64, spec: &InstanceSpec) -> u64 {
    [
        spec.height as u64,
        spec.width as u64,
        spec.targets as u64,
        spec.blanks as u64,
        spec.goal.code(),
        spec.case as u64,
    ]
    .iter()
    .fold(splitmix(master), |h, &x| splitmix(h ^ x))
}

/// Side of the square obstacle block in the bottom-right corner.
pub fn obstacle_side(height: u32, width: u32) -> u32 {
    height.min(width) / 5
}

fn check(spec: &InstanceSpec, open: usize) -> Result<(), BenchgenError> {
    let bad = |reason: String| {
        Err(BenchgenError::Params {
            label: spec.label(),
            reason,
        })
    };
    let v = spec.height * spec.width;
    let mut cap = v / 8 + 1;
    if spec.goal == GoalType::Boundary {
        cap = cap.min(2 * spec.height);
    }
    if spec.targets == 0 || spec.targets > cap {
        return bad(format!("targets must be in 1..={cap}"));
    }
    let blank_cap = (v + 3) / 4;
    if spec.blanks == 0 || spec.blanks > blank_cap {
        return bad(format!("blanks must be in 1..={blank_cap}"));
    }
    if (spec.targets + spec.blanks) as usize > open {
        return bad("more targets and blanks than open vertices".into());
    }
    let goals = match spec.goal {
        GoalType::R1 => spec.targets as usize,
        GoalType::R2 => 2 * spec.targets as usize,
        GoalType::PerTarget5 => 5,
        GoalType::Boundary => 0,
    };
    if goals > open {
        return bad("more goals than open vertices".into());
    }
    Ok(())
}

pub fn generate_instance(spec: &InstanceSpec, master_seed: u64) -> Result<Instance, BenchgenError> {
    generate_instance_with(spec, master_seed, CostModel::TABLE1)
}

pub fn generate_instance_with(
    spec: &InstanceSpec,
    master_seed: u64,
    costs: CostModel,
) -> Result<Instance, BenchgenError> {
    let (h, w) = (spec.height, spec.width);
    let side = obstacle_side(h, w);
    let obstacles: Vec<Vertex> = (h - side..h)
        .flat_map(|r| (w - side..w).map(move |c| Vertex::new(r, c)))
        .collect();
    let grid = GridMap::new(h, w, &obstacles)?;
    let open: Vec<usize> = (0..grid.num_cells()).filter(|&c| !grid.is_obstacle(c)).collect();
    check(spec, open.len())?;

    let mut rng = ChaCha8Rng::seed_from_u64(instance_seed(master_seed, spec));
    let (t, b) = (spec.targets as usize, spec.blanks as usize);
    let picked = index::sample(&mut rng, open.len(), t + b).into_vec();
    let mut taken = alloc::vec![false; open.len()];
    for &i in &picked {
        taken[i] = true;
    }
    let targets: Vec<Vertex> = picked[..t].iter().map(|&i| grid.vertex(open[i])).collect();
    let nontargets: Vec<Vertex> = (0..open.len())
        .filter(|&i| !taken[i])
        .map(|i| grid.vertex(open[i]))
        .collect();

    let mut sample_goals = |n: usize| -> Vec<Vertex> {
        let mut g: Vec<Vertex> = index::sample(&mut rng, open.len(), n)
            .into_iter()
            .map(|i| grid.vertex(open[i]))
            .collect();
        g.sort();
        g
    };
    let goals = match spec.goal {
        GoalType::Boundary => GoalSpec::Shared(
            open.iter()
                .filter(|&&c| grid.is_boundary(c))
                .map(|&c| grid.vertex(c))
                .collect(),
        ),
        GoalType::R1 => GoalSpec::Shared(sample_goals(t)),
        GoalType::R2 => GoalSpec::Shared(sample_goals(2 * t)),
        GoalType::PerTarget5 => GoalSpec::PerTarget((0..t).map(|_| sample_goals(5)).collect()),
    };
    let start = Configuration::new(&grid, &targets, &nontargets)?;
    Ok(Instance::new(grid, start, goals, costs, spec.label())?)
}

/// Lazily generates every instance of a suite in suite order.
pub fn generate_suite(
    params: &SuiteParams,
) -> impl Iterator<Item = Result<Instance, BenchgenError>> + '_ {
    params
        .specs()
        .into_iter()
        .map(move |s| generate_instance(&s, params.seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(h: u32, w: u32, t: u32, b: u32, goal: GoalType) -> InstanceSpec {
        InstanceSpec {
            height: h,
            width: w,
            targets: t,
            blanks: b,
            goal,
            case: 0,
        }
    }

    #[test]
    fn paper_suite_counts() {
        assert_eq!(SuiteParams::paper(0).count(), 13_860);
        assert_eq!(SuiteParams::per_target(0).count(), 4_620);
        let small = SuiteParams::paper(0).restrict_grids(&[(4, 10)]);
        assert_eq!(small.count(), 6 * 11 * 3 * 10);
    }

    #[test]
    fn specs_are_unique() {
        let specs = SuiteParams::paper(0).specs();
        let mut labels: Vec<String> = specs.iter().map(InstanceSpec::label).collect();
        labels.sort();
        labels.dedup();
        assert_eq!(labels.len(), specs.len());
    }

    #[test]
    fn blank_ladders() {
        assert_eq!(GridLadder::default_blanks(4, 10), [1, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10]);
        assert_eq!(*GridLadder::default_blanks(80, 80).last().unwrap(), 1600);
    }

    #[test]
    fn boundary_goals_on_ten_by_ten() {
        let inst = generate_instance(&spec(10, 10, 3, 5, GoalType::Boundary), 7).unwrap();
        let GoalSpec::Shared(g) = &inst.goals else { panic!() };
        // 36 boundary cells, three of them under the 2x2 obstacle block.
        assert_eq!(g.len(), 33);
        let obs: Vec<Vertex> = inst.grid.obstacles().collect();
        assert_eq!(obs, [Vertex::new(8, 8), Vertex::new(8, 9), Vertex::new(9, 8), Vertex::new(9, 9)]);
        assert!(g.iter().all(|v| !obs.contains(v)));
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let s = spec(8, 10, 4, 6, GoalType::R2);
        let a = generate_instance(&s, 1).unwrap();
        assert_eq!(a, generate_instance(&s, 1).unwrap());
        assert_ne!(a.start, generate_instance(&s, 2).unwrap().start);
        assert_eq!(a.num_targets(), 4);
        assert_eq!(a.num_blanks(), 6);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(generate_instance(&spec(4, 10, 7, 1, GoalType::R1), 0).is_err());
        assert!(generate_instance(&spec(4, 10, 1, 0, GoalType::R1), 0).is_err());
        assert!(generate_instance(&spec(4, 10, 1, 11, GoalType::R1), 0).is_err());
        assert!(generate_instance(&spec(20, 20, 50, 1, GoalType::Boundary), 0).is_err());
    }

    #[test]
    fn per_target_goals() {
        let inst = generate_instance(&spec(6, 10, 3, 2, GoalType::PerTarget5), 3).unwrap();
        let GoalSpec::PerTarget(g) = &inst.goals else { panic!() };
        assert_eq!(g.len(), 3);
        assert!(g.iter().all(|s| s.len() == 5));
    }

    #[test]
    fn scaled_keeps_ends() {
        let p = SuiteParams::paper(0).scaled(0.5);
        let g = &p.grids[0];
        assert_eq!(g.targets, [1, 4, 6]);
        assert_eq!(g.blanks.first(), Some(&1));
        assert_eq!(g.blanks.last(), Some(&10));
    }
}
