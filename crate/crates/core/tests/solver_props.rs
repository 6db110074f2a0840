mod common;

use std::collections::BTreeSet;

use brap_core::budget::FrozenClock;
use brap_core::oracle::oracle_solve;
use brap_core::solvers::astar::solve_astar;
use brap_core::solvers::greedy::{compute_vertex_blocking_time, move_blank_to_vertex, solve_greedy};
use brap_core::solvers::lacam::{brap_pibt_step, lacam_solve, lacam_solve_with, LacamOptions, PriorityTable, TempGoals};
use brap_core::solvers::priority::{solve_priority_with, PriorityOptions};
use brap_core::{
    apply_action, validate, Action, BlockId, BlockKind, Budget, Configuration, GoalSpec, GridMap, Instance, Plan,
    SolveError, Vertex,
};
use common::*;
use proptest::prelude::*;

fn unlimited() -> FrozenClock {
    FrozenClock
}

/// Plans from every solver, keyed by name.
fn all_plans(inst: &Instance) -> Vec<(&'static str, Result<brap_core::SolveResult, SolveError>)> {
    let clock = unlimited();
    let b = Budget::unlimited(&clock);
    vec![
        ("config", solve_astar(inst, &b)),
        ("priority", solve_priority_with(inst, &b, &PriorityOptions::default())),
        ("greedy", solve_greedy(inst, &b)),
        ("mapf", lacam_solve(inst, &b)),
    ]
}

/// Action identity with non-targets made anonymous.
fn anon(a: &Action) -> (u32, Option<u32>, &'static str, Vertex, Vertex) {
    let id = |b: BlockId| (b.kind == BlockKind::Target).then_some(b.id);
    match *a {
        Action::Move { block, t, from, to } => (t, id(block), "move", from, to),
        Action::Wait { block, t, at } => (t, id(block), "wait", at, at),
        Action::Complete { block, t, at } => (t, id(block), "complete", at, at),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn every_solver_plan_validates(seed in any::<u64>()) {
        let inst = random_instance(seed, 3, 4, 2, 3);
        for (name, r) in all_plans(&inst) {
            if let Ok(r) = r {
                prop_assert!(validate(&r.plan, &inst).is_ok(), "{name}: {:?}", validate(&r.plan, &inst));
                prop_assert!(r.final_cost() <= r.first_cost + 1e-9, "{name}");
            }
        }
    }

    #[test]
    fn astar_matches_oracle_and_bounds_sequential_solvers(seed in any::<u64>()) {
        let inst = random_instance(seed, 3, 3, 2, 2);
        let oracle = oracle_solve(&inst, 2_000_000).unwrap();
        let clock = unlimited();
        let b = Budget::unlimited(&clock);
        match (oracle.optimal_cost, solve_astar(&inst, &b)) {
            (Some(opt), Ok(r)) => {
                prop_assert_eq!(r.final_cost(), opt);
                let plan = oracle.optimal_plan.unwrap();
                prop_assert!(validate(&plan, &inst).is_ok());
                // Greedy may overlap blank pulls with target actions, so compare
                // its plan once serialised.
                if let Ok(g) = solve_greedy(&inst, &b) {
                    let seq = g.plan.retimed_sequential().with_target_waits();
                    prop_assert!(brap_core::metrics(&seq, &inst.costs).unwrap().composite_cost >= opt);
                }
            }
            (None, Err(SolveError::Infeasible(_))) => {}
            (o, r) => prop_assert!(false, "oracle {o:?}, astar {r:?}"),
        }
    }

    #[test]
    fn lacam_agrees_with_oracle_on_solvability(seed in any::<u64>()) {
        let inst = random_instance(seed, 3, 3, 2, 2);
        let solvable = oracle_solve(&inst, 2_000_000).unwrap().optimal_cost.is_some();
        let clock = unlimited();
        match lacam_solve(&inst, &Budget::unlimited(&clock)) {
            Ok(r) => {
                prop_assert!(solvable);
                prop_assert!(validate(&r.plan, &inst).is_ok());
            }
            Err(SolveError::Infeasible(_)) => prop_assert!(!solvable),
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn lacam_anytime_starts_from_the_first_solution(seed in any::<u64>()) {
        let inst = random_instance(seed, 3, 4, 3, 3);
        let clock = unlimited();
        let b = Budget::unlimited(&clock);
        let opts = LacamOptions { anytime: false, node_limit: 5_000 };
        let first = lacam_solve_with(&inst, &b, opts);
        let full = lacam_solve_with(&inst, &b, LacamOptions { anytime: true, ..opts });
        if let (Ok(f), Ok(a)) = (first, full) {
            prop_assert_eq!(f.final_cost(), a.first_cost);
            prop_assert!(a.final_cost() <= a.first_cost);
        }
    }

    #[test]
    fn priority_plan_ignores_lower_ranked_targets(seed in any::<u64>()) {
        let inst = random_instance(seed, 4, 5, 3, 3);
        if inst.num_targets() < 2 || !matches!(inst.goals, GoalSpec::Shared(_)) {
            return Ok(());
        }
        let order: Vec<BlockId> = (0..inst.num_targets() as u32).map(BlockId::target).collect();
        let clock = unlimited();
        let b = Budget::unlimited(&clock);
        let opts = PriorityOptions { order: Some(order.clone()), ..PriorityOptions::default() };
        let Ok(full) = solve_priority_with(&inst, &b, &opts) else { return Ok(()) };

        // Keep the top-ranked target; the others become obstacles.
        let g = &inst.grid;
        let cells = inst.start.target_cells();
        let mut obs: Vec<Vertex> = g.obstacles().collect();
        obs.extend(cells[1..].iter().map(|&c| g.vertex(c as usize)));
        let grid = GridMap::new(g.height(), g.width(), &obs).unwrap();
        let nt: Vec<Vertex> = inst.start.nontarget_cells().iter().map(|&c| g.vertex(c as usize)).collect();
        let start = Configuration::new(&grid, &[g.vertex(cells[0] as usize)], &nt).unwrap();
        let GoalSpec::Shared(goals) = &inst.goals else { unreachable!() };
        let goals: Vec<Vertex> = goals.iter().copied().filter(|v| !obs.contains(v)).collect();
        let Ok(reduced) = Instance::new(grid, start, GoalSpec::Shared(goals), inst.costs, "reduced") else {
            return Ok(());
        };
        let opts = PriorityOptions { order: Some(vec![BlockId::target(0)]), ..PriorityOptions::default() };
        let Ok(top) = solve_priority_with(&reduced, &b, &opts) else {
            return Ok(());
        };
        let full_set: BTreeSet<_> = full.plan.actions().iter().map(anon).collect();
        for a in top.plan.actions() {
            prop_assert!(full_set.contains(&anon(&a)), "{a:?} missing from the full plan");
        }
    }

    #[test]
    fn greedy_timestamps_increase_per_block(seed in any::<u64>()) {
        let inst = random_instance(seed, 6, 6, 4, 5);
        let clock = unlimited();
        let Ok(r) = solve_greedy(&inst, &Budget::unlimited(&clock)) else { return Ok(()) };
        let mut last = std::collections::BTreeMap::new();
        for a in r.plan.actions() {
            if let Some(prev) = last.insert(a.block(), a.time()) {
                prop_assert!(a.time() > prev);
            }
        }
    }

    #[test]
    fn blank_pull_frees_the_vertex_without_moving_targets(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let inst = random_instance(seed, 6, 6, 3, 4);
        let g = &inst.grid;
        let nts = inst.start.nontarget_cells();
        if nts.is_empty() {
            return Ok(());
        }
        let u = g.vertex(nts[pick.index(nts.len())] as usize);
        let psi = compute_vertex_blocking_time(&Plan::new());
        let Ok(actions) = move_blank_to_vertex(&inst.start, g, u, &[], &psi) else { return Ok(()) };
        let mut cfg = inst.start.clone();
        for a in &actions {
            prop_assert!(!a.block().is_target());
            cfg = apply_action(&cfg, &inst, a).unwrap();
        }
        prop_assert!(cfg.is_free(g.cell(u)));
    }

    #[test]
    fn pibt_steps_are_legal(seed in any::<u64>()) {
        let inst = random_instance(seed, 5, 6, 4, 4);
        let n = inst.num_targets();
        let ranking: Vec<BlockId> = (0..n as u32).map(BlockId::target).collect();
        let mut omega = PriorityTable::from_ranking(&ranking, n);
        let mut goals = TempGoals { assigned: vec![None; n] };
        let mut cfg = inst.start.clone();
        let mut plan = Plan::new();
        for _ in 0..30 {
            let out = brap_pibt_step(&cfg, &inst, &omega, &goals, &[]).unwrap();
            let mut seen = BTreeSet::new();
            for a in &out.actions {
                // At most one decision per block per step.
                prop_assert!(seen.insert(a.block()));
                plan.push(*a);
            }
            let assigned: Vec<Vertex> = out.temp_goals.assigned.iter().flatten().copied().collect();
            let distinct: BTreeSet<Vertex> = assigned.iter().copied().collect();
            prop_assert_eq!(distinct.len(), assigned.len());
            cfg = out.config;
            omega = out.priorities;
            goals = out.temp_goals;
            if cfg.is_terminal() {
                break;
            }
        }
        match validate(&plan, &inst) {
            Ok(_) => {}
            Err(e) => prop_assert_eq!(e.code(), "incomplete-target", "{}", e),
        }
    }
}
