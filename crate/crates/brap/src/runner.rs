//! Budgeted solver runs, each isolated against panics, and a worker pool
//! for running many of them.

use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use brap_core::pddl::{emit_domain_costed, emit_problem_with, parse_plan_file};
use brap_core::solvers::{astar, greedy, lacam, priority};
use brap_core::{validate, Budget, Clock, GoalSpec, Instance, Plan, SolveError, SolveResult};
use serde::{Deserialize, Serialize};

/// Wall clock backed by `Instant`.
#[derive(Clone, Copy, Debug)]
pub struct StdClock(Instant);

impl StdClock {
    pub fn new() -> Self {
        Self(Instant::now())
    }
}

impl Default for StdClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for StdClock {
    fn now(&self) -> Duration {
        self.0.elapsed()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SolverName {
    /// Optimal A* over configurations, one action per step.
    Config,
    /// Prioritised constrained search, targets planned one by one.
    Priority,
    /// Least-blocking-path heuristic with blank pulling.
    Greedy,
    /// Anytime LaCAM with BRaP-PIBT.
    Mapf,
    /// PDDL export, solved by an external planner when one is configured.
    PddlExport,
}

impl SolverName {
    pub const ALL: [SolverName; 5] = [
        SolverName::Mapf,
        SolverName::Greedy,
        SolverName::Priority,
        SolverName::Config,
        SolverName::PddlExport,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SolverName::Config => "config",
            SolverName::Priority => "priority",
            SolverName::Greedy => "greedy",
            SolverName::Mapf => "mapf",
            SolverName::PddlExport => "pddl-export",
        }
    }

    pub fn is_anytime(self) -> bool {
        self == SolverName::Mapf
    }
}

impl fmt::Display for SolverName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Success,
    Timeout,
    Infeasible,
    /// The solver gave up without proving infeasibility.
    Failure,
    Error,
    /// No external planner configured.
    Skipped,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Success => "success",
            Status::Timeout => "timeout",
            Status::Infeasible => "infeasible",
            Status::Failure => "failure",
            Status::Error => "error",
            Status::Skipped => "skipped",
        }
    }
}

/// Grouping attributes of an instance. Generated suites fill all of them.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub label: String,
    pub grid: String,
    pub goal: String,
    pub targets: u32,
    pub blanks: u32,
}

impl InstanceMeta {
    pub fn of(inst: &Instance) -> Self {
        Self {
            label: inst.label.clone(),
            grid: format!("{}x{}", inst.grid.height(), inst.grid.width()),
            goal: match inst.goals {
                GoalSpec::Shared(_) => "shared".into(),
                GoalSpec::PerTarget(_) => "per-target".into(),
            },
            targets: inst.num_targets() as u32,
            blanks: inst.num_blanks() as u32,
        }
    }

    pub fn with_goal(mut self, goal: &str) -> Self {
        self.goal = goal.into();
        self
    }
}

/// One (instance, solver) run. Column order is the CSV schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub grid: String,
    pub goal: String,
    pub targets: u32,
    pub blanks: u32,
    pub solver: SolverName,
    pub status: Status,
    pub first_time_ms: Option<f64>,
    pub first_cost: Option<f64>,
    pub final_cost: Option<f64>,
    pub final_makespan: Option<f64>,
    pub horizon: Option<u32>,
    pub elapsed_ms: f64,
    pub detail: String,
}

pub const CSV_SCHEMA: &str = "brap-runs/1";

impl RunRecord {
    fn new(meta: &InstanceMeta, solver: SolverName, status: Status, elapsed: Duration, detail: String) -> Self {
        Self {
            instance: meta.label.clone(),
            grid: meta.grid.clone(),
            goal: meta.goal.clone(),
            targets: meta.targets,
            blanks: meta.blanks,
            solver,
            status,
            first_time_ms: None,
            first_cost: None,
            final_cost: None,
            final_makespan: None,
            horizon: None,
            elapsed_ms: ms(elapsed),
            detail,
        }
    }

    pub fn is_success(&self) -> bool {
        self.status == Status::Success
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Environment variable naming an external planner command. It is run as
/// `<cmd> <domain.pddl> <problem.pddl> <plan-out>` and must write a
/// totally ordered plan to `<plan-out>`.
pub const PLANNER_ENV: &str = "BRAP_PDDL_PLANNER";

/// Runs `solver` directly, without validation or panic isolation.
pub fn solve(inst: &Instance, solver: SolverName, budget: &Budget<'_>) -> Result<SolveResult, SolveError> {
    match solver {
        SolverName::Config => astar::solve_astar(inst, budget),
        SolverName::Priority => priority::solve_priority(inst, budget),
        SolverName::Greedy => greedy::solve_greedy(inst, budget),
        SolverName::Mapf => lacam::lacam_solve(inst, budget),
        SolverName::PddlExport => unreachable!("pddl-export runs through run_with_budget"),
    }
}

fn status_of(e: &SolveError) -> Status {
    match e {
        SolveError::Timeout(_) => Status::Timeout,
        SolveError::Infeasible(_) => Status::Infeasible,
        SolveError::Failure { .. } | SolveError::NodeLimit(_) => Status::Failure,
        SolveError::Model(_) => Status::Error,
    }
}

/// Runs one solver under a wall-clock budget and validates any plan it
/// returns. Panics inside the solver become `Status::Error`.
pub fn run_with_budget(inst: &Instance, solver: SolverName, budget: Duration) -> RunRecord {
    run_with_meta(inst, &InstanceMeta::of(inst), solver, budget)
}

pub fn run_with_meta(inst: &Instance, meta: &InstanceMeta, solver: SolverName, budget: Duration) -> RunRecord {
    let started = Instant::now();
    if solver == SolverName::PddlExport {
        return run_pddl(inst, meta, budget);
    }
    let clock = StdClock::new();
    let b = Budget::new(&clock, Some(budget));
    let outcome = catch_unwind(AssertUnwindSafe(|| solve(inst, solver, &b)));
    let elapsed = started.elapsed();
    match outcome {
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            RunRecord::new(meta, solver, Status::Error, elapsed, format!("panic: {msg}"))
        }
        Ok(Err(e)) => RunRecord::new(meta, solver, status_of(&e), elapsed, e.to_string()),
        Ok(Ok(r)) => finish(inst, meta, solver, elapsed, &r.plan, r.first_cost, r.first_time),
    }
}

fn finish(
    inst: &Instance,
    meta: &InstanceMeta,
    solver: SolverName,
    elapsed: Duration,
    plan: &Plan,
    first_cost: f64,
    first_time: Duration,
) -> RunRecord {
    if let Err(e) = validate(plan, inst) {
        return RunRecord::new(meta, solver, Status::Error, elapsed, format!("invalid plan: {e}"));
    }
    let m = match brap_core::metrics(plan, &inst.costs) {
        Ok(m) => m,
        Err(e) => return RunRecord::new(meta, solver, Status::Error, elapsed, e.to_string()),
    };
    let mut rec = RunRecord::new(meta, solver, Status::Success, elapsed, String::new());
    rec.first_time_ms = Some(ms(first_time));
    rec.first_cost = Some(first_cost);
    rec.final_cost = Some(m.composite_cost);
    rec.final_makespan = Some(m.makespan);
    rec.horizon = Some(m.horizon);
    rec
}

fn run_pddl(inst: &Instance, meta: &InstanceMeta, budget: Duration) -> RunRecord {
    let started = Instant::now();
    let solver = SolverName::PddlExport;
    let problem = match emit_problem_with(inst, true) {
        Ok(p) => p,
        Err(e) => return RunRecord::new(meta, solver, Status::Error, started.elapsed(), e.to_string()),
    };
    let Ok(cmd) = std::env::var(PLANNER_ENV) else {
        return RunRecord::new(meta, solver, Status::Skipped, started.elapsed(), format!("{PLANNER_ENV} not set"));
    };
    let dir = scratch_dir(&meta.label);
    let result = (|| -> anyhow::Result<Option<Plan>> {
        std::fs::create_dir_all(&dir)?;
        let (domain_path, problem_path, plan_path) = (dir.join("domain.pddl"), dir.join("problem.pddl"), dir.join("plan.txt"));
        std::fs::write(&domain_path, emit_domain_costed(inst))?;
        std::fs::write(&problem_path, &problem)?;
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(format!("{cmd} \"$1\" \"$2\" \"$3\""))
            .arg("brap-planner")
            .arg(&domain_path)
            .arg(&problem_path)
            .arg(&plan_path)
            .stdout(std::process::Stdio::null())
            .stderr(std::process::Stdio::null())
            .spawn()?;
        loop {
            if child.try_wait()?.is_some() {
                break;
            }
            if started.elapsed() >= budget {
                let _ = child.kill();
                let _ = child.wait();
                return Ok(None);
            }
            std::thread::sleep(Duration::from_millis(5));
        }
        let text = std::fs::read_to_string(&plan_path)?;
        Ok(Some(parse_plan_file(&text, inst)?))
    })();
    let _ = std::fs::remove_dir_all(&dir);
    let elapsed = started.elapsed();
    match result {
        Ok(None) => RunRecord::new(meta, solver, Status::Timeout, elapsed, "planner timed out".into()),
        Ok(Some(plan)) => {
            let cost = brap_core::metrics(&plan, &inst.costs).map(|m| m.composite_cost).unwrap_or(f64::NAN);
            finish(inst, meta, solver, elapsed, &plan, cost, elapsed)
        }
        Err(e) => RunRecord::new(meta, solver, Status::Error, elapsed, format!("{e:#}")),
    }
}

fn scratch_dir(label: &str) -> PathBuf {
    static NEXT: AtomicUsize = AtomicUsize::new(0);
    let n = NEXT.fetch_add(1, Ordering::Relaxed);
    let safe: String = label.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect();
    std::env::temp_dir().join(format!("brap-pddl-{}-{n}-{safe}", std::process::id()))
}

/// Stack size for worker threads; PIBT recursion is as deep as the number
/// of targets.
pub const WORKER_STACK: usize = 256 << 20;

/// Runs `job(i)` for every `i < n` on `workers` threads and returns the
/// results in index order.
pub fn parallel_map<T, F>(n: usize, workers: usize, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let next = AtomicUsize::new(0);
    let out: Mutex<Vec<Option<T>>> = Mutex::new((0..n).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers.max(1).min(n.max(1)) {
            std::thread::Builder::new()
                .stack_size(WORKER_STACK)
                .spawn_scoped(s, || loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= n {
                        break;
                    }
                    let r = job(i);
                    out.lock().unwrap()[i] = Some(r);
                })
                .expect("spawn worker");
        }
    });
    out.into_inner().unwrap().into_iter().map(|r| r.expect("job ran")).collect()
}

/// Runs every solver on every instance. Instances are produced on demand
/// by `load`, so large suites never sit in memory at once.
pub fn run_suite<L>(
    n: usize,
    load: L,
    solvers: &[SolverName],
    budget: Duration,
    workers: usize,
) -> Vec<RunRecord>
where
    L: Fn(usize) -> anyhow::Result<(Instance, InstanceMeta)> + Sync,
{
    parallel_map(n, workers, |i| match load(i) {
        Ok((inst, meta)) => solvers.iter().map(|&s| run_with_meta(&inst, &meta, s, budget)).collect(),
        Err(e) => {
            let meta = InstanceMeta {
                label: format!("#{i}"),
                ..InstanceMeta::default()
            };
            solvers
                .iter()
                .map(|&s| RunRecord::new(&meta, s, Status::Error, Duration::ZERO, format!("{e:#}")))
                .collect::<Vec<_>>()
        }
    })
    .into_iter()
    .flatten()
    .collect()
}

pub fn write_csv(path: &Path, records: &[RunRecord]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> anyhow::Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}
