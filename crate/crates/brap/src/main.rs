use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{Context, Result};
use brap_core::benchgen::{generate_instance, GoalType, InstanceSpec, SuiteParams};
use brap_core::pddl::{emit_domain, emit_domain_costed, emit_problem_with, parse_plan_file};
use brap_core::{metrics, validate, Budget, Instance, Metrics, SolveError};
use brap::formats::{plan_to_json, plan_to_text, read_instance, read_plan, write_instance};
use brap::manifest::{Manifest, PAPER, PER_TARGET};
use brap::report::{aggregate, render, Grouping};
use brap::runner::{run_suite, solve, write_csv, InstanceMeta, SolverName, StdClock, CSV_SCHEMA};
use clap::{Args, Parser, Subcommand, ValueEnum};

const EXIT_INPUT: u8 = 2;
const EXIT_INVALID: u8 = 3;
const EXIT_TIMEOUT: u8 = 4;

#[derive(Parser)]
#[command(name = "brap", version, about = "Block rearrangement planning toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a benchmark suite as instance files.
    Gen {
        #[command(flatten)]
        suite: SuiteArgs,
        #[arg(long, default_value = "instances")]
        out: PathBuf,
    },
    /// Solve one instance and print the plan and its metrics.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "mapf")]
        solver: SolverName,
        /// Wall-clock budget in seconds.
        #[arg(long, default_value_t = 10.0)]
        budget: f64,
        /// Write the plan here instead of stdout.
        #[arg(long)]
        plan_out: Option<PathBuf>,
        /// Emit the plan as a JSON document.
        #[arg(long)]
        json: bool,
    },
    /// Check a plan file against an instance.
    Validate { instance: PathBuf, plan: PathBuf },
    /// Write PDDL domain and problem files, and optionally read back a
    /// planner's output.
    ExportPddl {
        instance: PathBuf,
        #[arg(long, default_value = "domain.pddl")]
        domain_out: PathBuf,
        #[arg(long, default_value = "problem.pddl")]
        problem_out: PathBuf,
        /// Add total-cost increments from the instance's cost model.
        #[arg(long)]
        costed: bool,
        /// A totally ordered plan produced by an external planner.
        #[arg(long)]
        plan_in: Option<PathBuf>,
    },
    /// Run solvers over a suite and write runs.csv and summary.json.
    Bench {
        #[command(flatten)]
        suite: SuiteArgs,
        /// Use instance files from this directory instead of generating.
        #[arg(long)]
        instances: Option<PathBuf>,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [SolverName::Mapf, SolverName::Greedy, SolverName::Priority, SolverName::Config])]
        solvers: Vec<SolverName>,
        #[arg(long, default_value_t = 10.0)]
        budget: f64,
        #[arg(long, default_value_t = default_workers())]
        workers: usize,
        #[arg(long, value_enum, default_value = "grid")]
        group_by: Grouping,
        #[arg(long, default_value = "bench-out")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteKind {
    Paper,
    PerTarget,
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long, value_enum, default_value = "paper")]
    suite: SuiteKind,
    /// Ladder manifest overriding the built-in one.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fraction of each ladder to keep, both ends included.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Restrict to these grid sizes, e.g. 4x10,6x10.
    #[arg(long, value_delimiter = ',')]
    grids: Vec<String>,
    /// Restrict to these goal types (B, R1, R2, P5).
    #[arg(long, value_delimiter = ',')]
    goals: Vec<String>,
    /// Cases per parameter combination.
    #[arg(long)]
    cases: Option<u32>,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl SuiteArgs {
    fn params(&self) -> Result<SuiteParams> {
        let manifest = match &self.manifest {
            Some(p) => Manifest::load(p)?,
            None => Manifest::parse(match self.suite {
                SuiteKind::Paper => PAPER,
                SuiteKind::PerTarget => PER_TARGET,
            })?,
        };
        let mut p = manifest.to_params(self.seed)?.scaled(self.scale);
        if !self.grids.is_empty() {
            let sizes = self
                .grids
                .iter()
                .map(|g| {
                    let (h, w) = g.split_once('x').with_context(|| format!("bad grid size `{g}`"))?;
                    Ok((h.parse()?, w.parse()?))
                })
                .collect::<Result<Vec<(u32, u32)>>>()?;
            p = p.restrict_grids(&sizes);
        }
        if !self.goals.is_empty() {
            let keep = self
                .goals
                .iter()
                .map(|g| GoalType::from_name(g).with_context(|| format!("unknown goal type `{g}`")))
                .collect::<Result<Vec<_>>>()?;
            p.goal_types.retain(|g| keep.contains(g));
        }
        if let Some(c) = self.cases {
            p.cases = c;
        }
        Ok(p)
    }
}

/// Error carrying an exit code.
struct Exit(u8, anyhow::Error);

fn input<E: Into<anyhow::Error>>(e: E) -> Exit {
    Exit(EXIT_INPUT, e.into())
}

fn print_metrics(m: &Metrics) {
    println!(
        "composite_cost {}\nmakespan {}\nhorizon {}\nmoves_target {}\nmoves_nontarget {}",
        m.composite_cost, m.makespan, m.horizon, m.moves_target, m.moves_nontarget
    );
}

fn budget_of(secs: f64) -> std::result::Result<Duration, Exit> {
    if !(secs.is_finite() && secs > 0.0) {
        return Err(input(anyhow::anyhow!("--budget must be a positive number of seconds")));
    }
    Ok(Duration::from_secs_f64(secs))
}

fn run(cli: Cli) -> std::result::Result<(), Exit> {
    match cli.command {
        Cmd::Gen { suite, out } => {
            let params = suite.params().map_err(input)?;
            gen(&params, &out).map_err(|e| Exit(1, e))
        }
        Cmd::Solve {
            instance,
            solver,
            budget,
            plan_out,
            json,
        } => {
            let budget = budget_of(budget)?;
            let inst = read_instance(&instance).map_err(input)?;
            if solver == SolverName::PddlExport {
                return Err(input(anyhow::anyhow!("use export-pddl for the PDDL bridge")));
            }
            let clock = StdClock::new();
            let b = Budget::new(&clock, Some(budget));
            let r = match solve(&inst, solver, &b) {
                Ok(r) => r,
                Err(e @ SolveError::Timeout(_)) => return Err(Exit(EXIT_TIMEOUT, e.into())),
                Err(e) => return Err(Exit(1, e.into())),
            };
            if let Err(e) = validate(&r.plan, &inst) {
                return Err(Exit(EXIT_INVALID, anyhow::anyhow!("solver produced an invalid plan: {e}")));
            }
            let text = if json {
                plan_to_json(&r.plan, &inst.label)
            } else {
                plan_to_text(&r.plan)
            };
            match plan_out {
                Some(p) => std::fs::write(&p, text)
                    .with_context(|| format!("writing {}", p.display()))
                    .map_err(|e| Exit(1, e))?,
                None => print!("{text}"),
            }
            print_metrics(&r.metrics);
            println!("first_cost {}\nfirst_time_ms {:.3}", r.first_cost, r.first_time.as_secs_f64() * 1e3);
            Ok(())
        }
        Cmd::Validate { instance, plan } => {
            let inst = read_instance(&instance).map_err(input)?;
            let plan = read_plan(&plan).map_err(input)?;
            check_plan(&inst, &plan)
        }
        Cmd::ExportPddl {
            instance,
            domain_out,
            problem_out,
            costed,
            plan_in,
        } => {
            let inst = read_instance(&instance).map_err(input)?;
            let problem = emit_problem_with(&inst, costed).map_err(input)?;
            let domain = if costed { emit_domain_costed(&inst) } else { emit_domain() };
            let write = |p: &Path, s: &str| std::fs::write(p, s).with_context(|| format!("writing {}", p.display()));
            write(&domain_out, &domain).map_err(|e| Exit(1, e))?;
            write(&problem_out, &problem).map_err(|e| Exit(1, e))?;
            eprintln!("wrote {} and {}", domain_out.display(), problem_out.display());
            if let Some(p) = plan_in {
                let text = std::fs::read_to_string(&p)
                    .with_context(|| format!("reading {}", p.display()))
                    .map_err(input)?;
                let plan = parse_plan_file(&text, &inst).map_err(|e| Exit(EXIT_INVALID, e.into()))?;
                check_plan(&inst, &plan)?;
            }
            Ok(())
        }
        Cmd::Bench {
            suite,
            instances,
            solvers,
            budget,
            workers,
            group_by,
            out,
        } => {
            let budget = budget_of(budget)?;
            bench(&suite, instances.as_deref(), &solvers, budget, workers, group_by, &out).map_err(|e| Exit(1, e))
        }
    }
}

fn check_plan(inst: &Instance, plan: &brap_core::Plan) -> std::result::Result<(), Exit> {
    if let Err(e) = validate(plan, inst) {
        return Err(Exit(EXIT_INVALID, anyhow::anyhow!("{} ({})", e, e.code())));
    }
    let m = metrics(plan, &inst.costs).map_err(|e| Exit(EXIT_INVALID, e.into()))?;
    println!("valid");
    print_metrics(&m);
    Ok(())
}

fn gen(params: &SuiteParams, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    let specs = params.specs();
    for s in &specs {
        let inst = generate_instance(s, params.seed)?;
        write_instance(&out.join(format!("{}.json", s.label())), &inst)?;
    }
    std::fs::write(out.join("manifest.json"), Manifest::from_params(params).to_json())?;
    println!("generated {} instances in {}", specs.len(), out.display());
    Ok(())
}

fn bench(
    suite: &SuiteArgs,
    dir: Option<&Path>,
    solvers: &[SolverName],
    budget: Duration,
    workers: usize,
    group_by: Grouping,
    out: &Path,
) -> Result<()> {
    let records = match dir {
        Some(dir) => {
            let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
                .map(|e| e.map(|e| e.path()))
                .collect::<std::io::Result<_>>()?;
            files.retain(|p| p.extension().is_some_and(|e| e == "json") && !p.ends_with("manifest.json"));
            files.sort();
            eprintln!("running {} instances x {} solvers", files.len(), solvers.len());
            run_suite(
                files.len(),
                |i| {
                    let inst = read_instance(&files[i])?;
                    let meta = InstanceMeta::of(&inst);
                    let goal = goal_from_label(&inst.label).unwrap_or(meta.goal.clone());
                    Ok((inst, meta.with_goal(&goal)))
                },
                solvers,
                budget,
                workers,
            )
        }
        None => {
            let params = suite.params()?;
            let specs: Vec<InstanceSpec> = params.specs();
            eprintln!("running {} instances x {} solvers", specs.len(), solvers.len());
            run_suite(
                specs.len(),
                |i| {
                    let inst = generate_instance(&specs[i], params.seed)?;
                    let meta = InstanceMeta::of(&inst).with_goal(specs[i].goal.name());
                    Ok((inst, meta))
                },
                solvers,
                budget,
                workers,
            )
        }
    };
    std::fs::create_dir_all(out)?;
    write_csv(&out.join("runs.csv"), &records)?;
    let report = aggregate(&records, group_by);
    std::fs::write(out.join("summary.json"), serde_json::to_string_pretty(&report)?)?;
    print!("{}", render(&report));
    println!("records {} ({CSV_SCHEMA}) written to {}", records.len(), out.display());
    Ok(())
}

/// Goal type embedded in generated labels, e.g. `x4_y10_t2_b3_R1_rand0`.
fn goal_from_label(label: &str) -> Option<String> {
    label
        .split('_')
        .find(|p| GoalType::from_name(p).is_some())
        .map(str::to_string)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // Deep PIBT recursion on large instances needs more than the default
    // main-thread stack.
    let handle = std::thread::Builder::new()
        .stack_size(brap::runner::WORKER_STACK)
        .spawn(move || run(cli))
        .expect("spawn main worker");
    match handle.join().expect("main worker panicked") {
        Ok(()) => ExitCode::SUCCESS,
        Err(Exit(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
