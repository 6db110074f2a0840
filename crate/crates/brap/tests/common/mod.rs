#![allow(dead_code)]

use brap_core::{Configuration, CostModel, GoalSpec, GridMap, Instance, Vertex};

pub fn v(r: u32, c: u32) -> Vertex {
    Vertex::new(r, c)
}

pub fn instance(
    h: u32,
    w: u32,
    obstacles: &[Vertex],
    targets: &[Vertex],
    nontargets: &[Vertex],
    goals: &[Vertex],
) -> Instance {
    let grid = GridMap::new(h, w, obstacles).unwrap();
    let start = Configuration::new(&grid, targets, nontargets).unwrap();
    Instance::new(grid, start, GoalSpec::Shared(goals.to_vec()), CostModel::TABLE1, "test").unwrap()
}

/// 1x3 row T,F,F with the goal at the far end.
pub fn corridor() -> Instance {
    instance(1, 3, &[], &[v(0, 0)], &[], &[v(0, 2)])
}

/// The target's only neighbour is a non-target with no room to move.
pub fn sealed() -> Instance {
    instance(1, 3, &[], &[v(0, 0)], &[v(0, 1), v(0, 2)], &[v(0, 2)])
}

use rand::seq::SliceRandom;
use rand::Rng;

/// Random instance on an `h x w` grid. Targets and blanks are clamped to
/// what fits; every remaining open cell holds a non-target.
pub fn random_instance<R: Rng>(
    rng: &mut R,
    h: u32,
    w: u32,
    obstacles: usize,
    targets: usize,
    blanks: usize,
    per_target_goals: bool,
) -> Option<Instance> {
    let mut cells: Vec<Vertex> = (0..h).flat_map(|r| (0..w).map(move |c| v(r, c))).collect();
    cells.shuffle(rng);
    let obs: Vec<Vertex> = cells.drain(..obstacles.min(cells.len())).collect();
    if targets == 0 || cells.len() < targets + blanks {
        return None;
    }
    let open = cells.clone();
    let tg: Vec<Vertex> = cells.drain(..targets).collect();
    cells.drain(..blanks);
    let nt = cells;
    let mut pick_goals = |n: usize| -> Vec<Vertex> {
        let mut g = open.clone();
        g.shuffle(rng);
        g.truncate(n.clamp(1, open.len()));
        g
    };
    let goals = if per_target_goals {
        GoalSpec::PerTarget((0..targets).map(|_| pick_goals(2)).collect())
    } else {
        let n = targets + (targets + 1) / 2;
        GoalSpec::Shared(pick_goals(n))
    };
    let grid = GridMap::new(h, w, &obs).ok()?;
    let start = Configuration::new(&grid, &tg, &nt).ok()?;
    Instance::new(grid, start, goals, CostModel::TABLE1, format!("rand-{h}x{w}")).ok()
}

/// Random instance up to 10x10 with loads similar to the benchmark suites.
pub fn random_benchmark_like<R: Rng>(rng: &mut R) -> Instance {
    loop {
        let h = rng.gen_range(2..=10);
        let w = rng.gen_range(2..=10);
        let cells = (h * w) as usize;
        let obstacles = rng.gen_range(0..=cells / 10);
        let targets = rng.gen_range(1..=(cells / 8).max(1));
        let blanks = rng.gen_range(1..=(cells / 4).max(1));
        let per_target = rng.gen_bool(0.2);
        if let Some(i) = random_instance(rng, h, w, obstacles, targets, blanks, per_target) {
            return i;
        }
    }
}

/// Fixed grid of tiny instances: 1x3, 1x4, 1x5, 2x2, 2x3 and 3x3 grids,
/// with and without an obstacle, 1-2 targets, 0-2 blanks, several random
/// placements each.
pub fn tiny_suite() -> Vec<Instance> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x7a11);
    let grids: [(u32, u32, Vertex); 6] = [
        (1, 3, v(0, 1)),
        (1, 4, v(0, 1)),
        (1, 5, v(0, 2)),
        (2, 2, v(0, 0)),
        (2, 3, v(0, 1)),
        (3, 3, v(1, 1)),
    ];
    let mut out = Vec::new();
    for (h, w, obstacle) in grids {
        for with_obstacle in [false, true] {
            let obs: &[Vertex] = if with_obstacle { &[obstacle] } else { &[] };
            for targets in 1..=2usize {
                for blanks in 0..=2usize {
                    for _ in 0..4 {
                        if let Some(i) = tiny(&mut rng, h, w, obs, targets, blanks) {
                            out.push(i);
                        }
                    }
                }
            }
        }
    }
    out
}

fn tiny<R: Rng>(rng: &mut R, h: u32, w: u32, obs: &[Vertex], targets: usize, blanks: usize) -> Option<Instance> {
    let mut open: Vec<Vertex> = (0..h)
        .flat_map(|r| (0..w).map(move |c| v(r, c)))
        .filter(|c| !obs.contains(c))
        .collect();
    if open.len() < targets + blanks {
        return None;
    }
    open.shuffle(rng);
    let tg = &open[..targets];
    let nt = &open[targets + blanks..];
    let mut goals = open.clone();
    goals.shuffle(rng);
    goals.truncate(rng.gen_range(targets..=targets + 1).min(open.len()));
    let grid = GridMap::new(h, w, obs).ok()?;
    let start = Configuration::new(&grid, tg, nt).ok()?;
    Instance::new(grid, start, GoalSpec::Shared(goals), CostModel::TABLE1, format!("tiny-{h}x{w}")).ok()
}
