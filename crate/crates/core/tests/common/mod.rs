#![allow(dead_code)]

use brap_core::{Configuration, CostModel, GoalSpec, GridMap, Instance, Vertex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn v(r: u32, c: u32) -> Vertex {
    Vertex::new(r, c)
}

/// Random instance with at most `max_h x max_w` cells. Every open cell
/// that is not a target or a blank holds a non-target.
pub fn random_instance(seed: u64, max_h: u32, max_w: u32, max_targets: usize, max_blanks: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let h = rng.gen_range(1..=max_h);
        let w = rng.gen_range(2..=max_w);
        let mut cells: Vec<Vertex> = (0..h).flat_map(|r| (0..w).map(move |c| v(r, c))).collect();
        cells.shuffle(&mut rng);
        let obstacles = rng.gen_range(0..=cells.len() / 6);
        let obs: Vec<Vertex> = cells.drain(..obstacles).collect();
        let targets = rng.gen_range(1..=max_targets);
        let blanks = rng.gen_range(1..=max_blanks);
        if cells.len() < targets + blanks {
            continue;
        }
        let open = cells.clone();
        let tg: Vec<Vertex> = cells.drain(..targets).collect();
        cells.drain(..blanks);
        let mut pick = |n: usize| {
            let mut g = open.clone();
            g.shuffle(&mut rng);
            g.truncate(n.clamp(1, open.len()));
            g
        };
        let goals = if targets > 1 && seed % 4 == 0 {
            GoalSpec::PerTarget((0..targets).map(|_| pick(2)).collect())
        } else {
            GoalSpec::Shared(pick(targets + 1))
        };
        let grid = GridMap::new(h, w, &obs).unwrap();
        let start = Configuration::new(&grid, &tg, &cells).unwrap();
        return Instance::new(grid, start, goals, CostModel::TABLE1, format!("r{seed}")).unwrap();
    }
}
