//! Aggregate metrics over run records: success rates, cost and makespan
//! ratios against the per-instance best, pairwise comparisons on
//! co-solvable instances, and anytime statistics.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::runner::{RunRecord, SolverName, Status};

/// Ratio metrics are reported only when at least this share of a group's
/// runs succeeded.
pub const MIN_SUCCESS_FOR_RATIOS: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl MeanStd {
    pub fn of(xs: &[f64]) -> Option<Self> {
        if xs.is_empty() {
            return None;
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        Some(Self {
            mean,
            std: var.sqrt(),
            n: xs.len(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Grouping {
    All,
    Grid,
    Goal,
    GridTargets,
}

impl Grouping {
    fn key(self, r: &RunRecord) -> String {
        match self {
            Grouping::All => "all".into(),
            Grouping::Grid => r.grid.clone(),
            Grouping::Goal => r.goal.clone(),
            Grouping::GridTargets => format!("{} t{}", r.grid, r.targets),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverStats {
    pub runs: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub cost_ratio: Option<MeanStd>,
    pub makespan_ratio: Option<MeanStd>,
    /// first_cost / final_cost over successful runs.
    pub first_over_final: Option<MeanStd>,
    pub first_time_ms: Option<MeanStd>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupReport {
    pub key: String,
    pub solvers: BTreeMap<SolverName, SolverStats>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairCell {
    pub row: SolverName,
    pub col: SolverName,
    pub co_solved: usize,
    pub cost_ratio: Option<f64>,
    pub makespan_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub grouping: Grouping,
    pub groups: Vec<GroupReport>,
    /// Mean of row/column cost over instances both solved.
    pub pairwise: Vec<PairCell>,
    pub status_counts: BTreeMap<SolverName, BTreeMap<&'static str, usize>>,
}

pub const SUMMARY_SCHEMA: &str = "brap-summary/1";

/// Per-instance best final cost and makespan among successful runs.
fn baselines(records: &[RunRecord]) -> BTreeMap<&str, (f64, f64)> {
    let mut best: BTreeMap<&str, (f64, f64)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.is_success()) {
        let (c, m) = (r.final_cost.unwrap(), r.final_makespan.unwrap());
        let e = best.entry(&r.instance).or_insert((c, m));
        e.0 = e.0.min(c);
        e.1 = e.1.min(m);
    }
    best
}

fn ratio(x: f64, base: f64) -> f64 {
    if base > 0.0 {
        x / base
    } else {
        1.0
    }
}

pub fn aggregate(records: &[RunRecord], grouping: Grouping) -> Report {
    let best = baselines(records);
    let mut groups: BTreeMap<String, BTreeMap<SolverName, Vec<&RunRecord>>> = BTreeMap::new();
    for r in records {
        groups.entry(grouping.key(r)).or_default().entry(r.solver).or_default().push(r);
    }
    let groups = groups
        .into_iter()
        .map(|(key, by_solver)| {
            let solvers = by_solver
                .into_iter()
                .map(|(s, rs)| (s, solver_stats(&rs, &best)))
                .collect();
            GroupReport { key, solvers }
        })
        .collect();
    let mut status_counts: BTreeMap<SolverName, BTreeMap<&'static str, usize>> = BTreeMap::new();
    for r in records {
        *status_counts.entry(r.solver).or_default().entry(r.status.as_str()).or_default() += 1;
    }
    Report {
        schema: SUMMARY_SCHEMA,
        grouping,
        groups,
        pairwise: pairwise(records),
        status_counts,
    }
}

fn solver_stats(rs: &[&RunRecord], best: &BTreeMap<&str, (f64, f64)>) -> SolverStats {
    // Skipped runs never attempted the instance.
    let attempted: Vec<&&RunRecord> = rs.iter().filter(|r| r.status != Status::Skipped).collect();
    let ok: Vec<&&RunRecord> = attempted.iter().copied().filter(|r| r.is_success()).collect();
    let runs = attempted.len();
    let success_rate = if runs == 0 { 0.0 } else { ok.len() as f64 / runs as f64 };
    let show = runs > 0 && success_rate >= MIN_SUCCESS_FOR_RATIOS;
    let cost: Vec<f64> = ok.iter().map(|r| ratio(r.final_cost.unwrap(), best[r.instance.as_str()].0)).collect();
    let span: Vec<f64> = ok
        .iter()
        .map(|r| ratio(r.final_makespan.unwrap(), best[r.instance.as_str()].1))
        .collect();
    let ff: Vec<f64> = ok.iter().map(|r| ratio(r.first_cost.unwrap(), r.final_cost.unwrap())).collect();
    let times: Vec<f64> = ok.iter().filter_map(|r| r.first_time_ms).collect();
    SolverStats {
        runs,
        successes: ok.len(),
        success_rate,
        cost_ratio: if show { MeanStd::of(&cost) } else { None },
        makespan_ratio: if show { MeanStd::of(&span) } else { None },
        first_over_final: MeanStd::of(&ff),
        first_time_ms: MeanStd::of(&times),
    }
}

fn successes(records: &[RunRecord]) -> BTreeMap<(SolverName, &str), &RunRecord> {
    records
        .iter()
        .filter(|r| r.is_success())
        .map(|r| ((r.solver, r.instance.as_str()), r))
        .collect()
}

fn pairwise(records: &[RunRecord]) -> Vec<PairCell> {
    let ok = successes(records);
    let solvers: BTreeSet<SolverName> = records.iter().map(|r| r.solver).collect();
    let instances: BTreeSet<&str> = records.iter().map(|r| r.instance.as_str()).collect();
    let mut out = Vec::new();
    for &row in &solvers {
        for &col in &solvers {
            let mut cost = Vec::new();
            let mut span = Vec::new();
            for &i in &instances {
                if let (Some(a), Some(b)) = (ok.get(&(row, i)), ok.get(&(col, i))) {
                    cost.push(ratio(a.final_cost.unwrap(), b.final_cost.unwrap()));
                    span.push(ratio(a.final_makespan.unwrap(), b.final_makespan.unwrap()));
                }
            }
            out.push(PairCell {
                row,
                col,
                co_solved: cost.len(),
                cost_ratio: MeanStd::of(&cost).map(|m| m.mean),
                makespan_ratio: MeanStd::of(&span).map(|m| m.mean),
            });
        }
    }
    out
}

/// Cost ratios on the instances every listed solver solved, with the
/// baseline taken among those solvers only.
pub fn co_solvable_cost_ratios(records: &[RunRecord], solvers: &[SolverName]) -> BTreeMap<SolverName, MeanStd> {
    let ok = successes(records);
    let instances: BTreeSet<&str> = records.iter().map(|r| r.instance.as_str()).collect();
    let mut ratios: BTreeMap<SolverName, Vec<f64>> = BTreeMap::new();
    for &i in &instances {
        let Some(costs) = solvers
            .iter()
            .map(|&s| ok.get(&(s, i)).map(|r| r.final_cost.unwrap()))
            .collect::<Option<Vec<f64>>>()
        else {
            continue;
        };
        let base = costs.iter().copied().fold(f64::INFINITY, f64::min);
        for (&s, c) in solvers.iter().zip(costs) {
            ratios.entry(s).or_default().push(ratio(c, base));
        }
    }
    ratios
        .into_iter()
        .filter_map(|(s, xs)| MeanStd::of(&xs).map(|m| (s, m)))
        .collect()
}

fn cell(m: Option<MeanStd>) -> String {
    m.map_or_else(|| "N/A".into(), |m| format!("{:.2} ({:.2})", m.mean, m.std))
}

/// Human-readable summary table.
pub fn render(report: &Report) -> String {
    let mut out = String::new();
    for g in &report.groups {
        out.push_str(&format!("== {} ==\n", g.key));
        out.push_str(&format!(
            "{:<12} {:>7} {:>9} {:>14} {:>14} {:>14} {:>12}\n",
            "solver", "runs", "success%", "cost ratio", "makespan", "first/final", "first ms"
        ));
        for (s, st) in &g.solvers {
            out.push_str(&format!(
                "{:<12} {:>7} {:>9.1} {:>14} {:>14} {:>14} {:>12}\n",
                s.as_str(),
                st.runs,
                100.0 * st.success_rate,
                cell(st.cost_ratio),
                cell(st.makespan_ratio),
                cell(st.first_over_final),
                st.first_time_ms.map_or("N/A".into(), |m| format!("{:.1}", m.mean)),
            ));
        }
    }
    out
}
