mod common;

use std::path::Path;
use std::process::{Command, Output};

use brap::formats::write_instance;
use brap_core::benchgen::{generate_instance, GoalType, InstanceSpec};
use common::*;

fn brap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_brap")).args(args).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn solve_then_validate() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("corridor.json");
    let plan = dir.path().join("plan.txt");
    write_instance(&inst, &corridor()).unwrap();
    for solver in ["config", "priority", "greedy", "mapf"] {
        let out = brap(&["solve", p(&inst), "--solver", solver, "--plan-out", p(&plan)]);
        assert!(out.status.success(), "{solver}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8_lossy(&out.stdout).contains("composite_cost"));
        let out = brap(&["validate", p(&inst), p(&plan)]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("corridor.json");
    write_instance(&inst, &corridor()).unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(brap(&["solve", p(&missing)]).status.code(), Some(2));
    assert_eq!(brap(&["solve", p(&inst), "--budget", "0"]).status.code(), Some(2));

    // Moving through the wall of a 1x3 grid.
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "t 0 move T0 0,0 -> 1,0\n").unwrap();
    assert_eq!(brap(&["validate", p(&inst), p(&bad)]).status.code(), Some(3));

    // A plan that never completes the target.
    std::fs::write(&bad, "t 0 move T0 0,0 -> 0,1\n").unwrap();
    assert_eq!(brap(&["validate", p(&inst), p(&bad)]).status.code(), Some(3));
}

#[test]
fn solve_timeout_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("big.json");
    let spec = InstanceSpec {
        height: 80,
        width: 80,
        targets: 160,
        blanks: 160,
        goal: GoalType::R1,
        case: 0,
    };
    write_instance(&inst, &generate_instance(&spec, 0).unwrap()).unwrap();
    let out = brap(&["solve", p(&inst), "--solver", "config", "--budget", "0.000001"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn export_pddl_and_read_back_a_plan() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("corridor.json");
    write_instance(&inst, &corridor()).unwrap();
    let (domain, problem, plan) = (dir.path().join("d.pddl"), dir.path().join("p.pddl"), dir.path().join("sas_plan"));
    std::fs::write(&plan, "(slide_tgt node-0-0 node-0-1)\n(slide_tgt node-0-1 node-0-2)\n(complete node-0-2)\n; cost = 6 (unit cost)\n").unwrap();
    let out = brap(&[
        "export-pddl", p(&inst), "--domain-out", p(&domain), "--problem-out", p(&problem), "--plan-in", p(&plan),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("composite_cost 6"));
    assert!(std::fs::read_to_string(&domain).unwrap().contains("(domain block-rearrangement)"));
    assert!(std::fs::read_to_string(&problem).unwrap().contains("node-0-2"));

    std::fs::write(&plan, "(slide_tgt node-0-0 node-0-2)\n").unwrap();
    let out = brap(&["export-pddl", p(&inst), "--domain-out", p(&domain), "--problem-out", p(&problem), "--plan-in", p(&plan)]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn gen_is_deterministic_and_bench_writes_reports() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = |out: &Path| {
        brap(&["gen", "--grids", "4x10", "--goals", "R1", "--scale", "0", "--cases", "1", "--seed", "5", "--out", p(out)])
    };
    assert!(args(a.path()).status.success());
    assert!(args(b.path()).status.success());
    let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    // One instance plus the manifest.
    assert_eq!(names.len(), 2);
    for n in &names {
        assert_eq!(std::fs::read(a.path().join(n)).unwrap(), std::fs::read(b.path().join(n)).unwrap());
    }

    let out_dir = tempfile::tempdir().unwrap();
    let out = brap(&[
        "bench", "--instances", p(a.path()), "--solvers", "greedy,mapf,pddl-export", "--budget", "0.2", "--workers", "1",
        "--out", p(out_dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let records = brap::runner::read_csv(&out_dir.path().join("runs.csv")).unwrap();
    assert_eq!(records.len(), 3);
    assert!(records.iter().all(|r| r.goal == "R1"));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["schema"], "brap-summary/1");
}
