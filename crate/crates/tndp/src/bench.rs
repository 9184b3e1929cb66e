//! Multi-run benchmark batches and their comparison report.
//!
//! Runs of one batch use seeds `base_seed + i` and execute in parallel;
//! results are ordered by seed, so reports do not depend on scheduling.
//! Wall-clock times are kept apart from the report for the same reason.

use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use rayon::ThreadPool;
use serde::Serialize;
use tndp_core::centrality::edge_betweenness;
use tndp_core::design::{augment, EvalObserver};
use tndp_core::solvers::{solve_observed, GreedyPhase, StopReason, TracePoint};
use tndp_core::stats::{mann_whitney_u, n_fold, stability, MannWhitney, StabilityScore, Summary};
use tndp_core::{DesignProblem, EdgeKey, SolverConfig, SolverKind, SolverResult, Weighting};

use crate::error::{Error, Result};
use crate::io;

/// Significance level of the pairwise tests.
pub const ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeOut {
    pub u: u32,
    pub v: u32,
    pub length_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub seed: u64,
    pub objective: f64,
    pub travel_time: f64,
    pub crossings: usize,
    pub cost_km: f64,
    pub edges: Vec<EdgeOut>,
    pub evals_used: usize,
    pub iterations: usize,
    pub stop: StopReason,
    pub mean_betweenness: f64,
    #[serde(skip)]
    pub trace: Vec<TracePoint>,
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl RunRecord {
    pub fn new(problem: &DesignProblem, weighting: Weighting, r: SolverResult) -> Result<Self> {
        let net = augment(problem, &r.best_design)?;
        Ok(RunRecord {
            seed: r.seed,
            objective: r.best_objective.total,
            travel_time: r.best_objective.travel_time,
            crossings: r.best_objective.crossings,
            cost_km: r.best_design.cost_km(),
            edges: r.best_edges.iter().map(|e| EdgeOut { u: e.u, v: e.v, length_km: e.length_km }).collect(),
            evals_used: r.evals_used,
            iterations: r.iterations,
            stop: r.stop,
            mean_betweenness: edge_betweenness(&net, weighting).mean(),
            trace: r.trace,
            wall_time_s: r.wall_time_s,
        })
    }

    pub fn edge_keys(&self) -> Vec<EdgeKey> {
        self.edges.iter().map(|e| tndp_core::network::edge_key(e.u, e.v)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailedRun {
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunBatch {
    pub solver: SolverKind,
    pub seeds: Vec<u64>,
    pub runs: Vec<RunRecord>,
    pub failed: Vec<FailedRun>,
}

pub fn seeds(base_seed: u64, n_runs: usize) -> Vec<u64> {
    (0..n_runs as u64).map(|i| base_seed.wrapping_add(i)).collect()
}

/// Worker pool of `threads` threads (all cores when `None`).
pub fn thread_pool(threads: Option<usize>) -> Result<ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        b = b.num_threads(t.max(1));
    }
    b.build().map_err(|e| Error::Config(format!("cannot start worker threads: {e}")))
}

/// `n_runs` independent runs of `kind`. Failed runs are recorded, not fatal.
///
/// Greedy-seeded solvers share one greedy phase across seeds; each run
/// still reports the evaluations and time of its own greedy prefix.
#[allow(clippy::too_many_arguments)]
pub fn run_batch(
    problem: &DesignProblem,
    kind: SolverKind,
    n_runs: usize,
    base_seed: u64,
    cfg: &SolverConfig,
    weighting: Weighting,
    observer: Option<&dyn EvalObserver>,
    pool: &ThreadPool,
) -> RunBatch {
    let seeds = seeds(base_seed, n_runs);
    let phase = if kind.is_greedy_seeded() {
        let start = Instant::now();
        Some(GreedyPhase::compute(problem, cfg, observer).map(|p| (p, start.elapsed().as_secs_f64())))
    } else {
        None
    };
    let outcomes: Vec<Result<RunRecord>> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&seed| {
                let run_cfg = cfg.with_seed(seed);
                let start = Instant::now();
                let mut result = match &phase {
                    None => solve_observed(kind, problem, &run_cfg, observer)?,
                    Some(Ok((p, greedy_s))) => {
                        let mut r = p.resume(problem, kind, &run_cfg, observer)?;
                        r.wall_time_s = *greedy_s;
                        r
                    }
                    Some(Err(e)) => return Err(Error::Design(e.clone())),
                };
                result.wall_time_s += start.elapsed().as_secs_f64();
                RunRecord::new(problem, weighting, result)
            })
            .collect()
    });
    let mut runs = Vec::new();
    let mut failed = Vec::new();
    for (seed, outcome) in seeds.iter().zip(outcomes) {
        match outcome {
            Ok(r) => runs.push(r),
            Err(e) => failed.push(FailedRun { seed: *seed, error: e.to_string() }),
        }
    }
    RunBatch { solver: kind, seeds, runs, failed }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseTest {
    pub against: SolverKind,
    #[serde(flatten)]
    pub result: MannWhitney,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverSection {
    pub solver: SolverKind,
    pub completed_runs: usize,
    pub failed: Vec<FailedRun>,
    pub objective: Option<Summary>,
    pub travel_time: Option<Summary>,
    /// Baseline travel time over mean objective.
    pub n_fold: Option<f64>,
    /// Baseline travel time over mean travel time.
    pub n_fold_travel_time: Option<f64>,
    pub betweenness: Option<Summary>,
    /// Baseline mean betweenness over the runs' mean.
    pub betweenness_n_fold: Option<f64>,
    /// Absent with fewer than two completed runs.
    pub stability: Option<StabilityScore>,
    pub evals_used: Option<Summary>,
    /// Test against the best solver; absent for the best solver itself.
    pub mann_whitney: Option<PairwiseTest>,
    pub runs: Vec<RunRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemReport {
    pub q: u8,
    pub lambda: f64,
    pub candidate_count: usize,
    pub baseline_travel_time: f64,
    pub baseline_mean_betweenness: f64,
    pub weighting: Weighting,
    pub best_solver: Option<SolverKind>,
    pub solvers: Vec<SolverSection>,
}

fn summary(values: &[f64]) -> Option<Summary> {
    Summary::of(values).ok()
}

/// Aggregates batches run on `problem` into one report section.
pub fn compare(problem: &DesignProblem, batches: &[RunBatch], weighting: Weighting, alpha: f64) -> ProblemReport {
    let t0 = problem.baseline().travel_time;
    let b0 = edge_betweenness(problem.base(), weighting).mean();
    let objectives: Vec<Vec<f64>> = batches.iter().map(|b| b.runs.iter().map(|r| r.objective).collect()).collect();
    let means: Vec<Option<f64>> = objectives.iter().map(|o| summary(o).map(|s| s.mean)).collect();
    let best = means
        .iter()
        .enumerate()
        .filter_map(|(i, m)| m.map(|m| (i, m)))
        .fold(None, |acc: Option<(usize, f64)>, (i, m)| match acc {
            Some((_, bm)) if bm <= m => acc,
            _ => Some((i, m)),
        })
        .map(|(i, _)| i);

    let solvers = batches
        .iter()
        .enumerate()
        .map(|(i, batch)| {
            let obj = summary(&objectives[i]);
            let tt = summary(&batch.runs.iter().map(|r| r.travel_time).collect::<Vec<_>>());
            let bc = summary(&batch.runs.iter().map(|r| r.mean_betweenness).collect::<Vec<_>>());
            let evals = summary(&batch.runs.iter().map(|r| r.evals_used as f64).collect::<Vec<_>>());
            let edge_sets: Vec<Vec<EdgeKey>> = batch.runs.iter().map(RunRecord::edge_keys).collect();
            let mann_whitney = match best {
                Some(b) if b != i && !objectives[i].is_empty() => mann_whitney_u(&objectives[i], &objectives[b], alpha)
                    .ok()
                    .map(|result| PairwiseTest { against: batches[b].solver, result }),
                _ => None,
            };
            SolverSection {
                solver: batch.solver,
                completed_runs: batch.runs.len(),
                failed: batch.failed.clone(),
                n_fold: obj.and_then(|s| n_fold(t0, s.mean).ok()),
                n_fold_travel_time: tt.and_then(|s| n_fold(t0, s.mean).ok()),
                betweenness_n_fold: bc.and_then(|s| n_fold(b0, s.mean).ok()),
                objective: obj,
                travel_time: tt,
                betweenness: bc,
                stability: stability(&edge_sets).ok(),
                evals_used: evals,
                mann_whitney,
                runs: batch.runs.clone(),
            }
        })
        .collect();

    ProblemReport {
        q: u8::from(problem.config().penalize_crossings),
        lambda: problem.lambda(),
        candidate_count: problem.candidates().len(),
        baseline_travel_time: t0,
        baseline_mean_betweenness: b0,
        weighting,
        best_solver: best.map(|b| batches[b].solver),
        solvers,
    }
}

/// Provenance block embedded in every bench output file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchConfig {
    pub problem: crate::problem::ProblemSpec,
    pub q: Vec<u8>,
    pub solvers: Vec<SolverKind>,
    pub runs: usize,
    pub base_seed: u64,
    pub solver: SolverConfig,
    pub weighting: Weighting,
    pub alpha: f64,
    pub test: &'static str,
}

impl BenchConfig {
    pub fn new(
        problem: crate::problem::ProblemSpec,
        q: Vec<u8>,
        solvers: Vec<SolverKind>,
        runs: usize,
        base_seed: u64,
    ) -> Self {
        BenchConfig {
            problem,
            q,
            solvers,
            runs,
            base_seed,
            solver: SolverConfig::default().with_seed(base_seed),
            weighting: crate::analyze::DEFAULT_WEIGHTING,
            alpha: ALPHA,
            test: "mann-whitney-u, two-sided",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub schema: u32,
    pub config: BenchConfig,
    pub problems: Vec<ProblemReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunTiming {
    pub q: u8,
    pub solver: SolverKind,
    pub seed: u64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timings {
    pub schema: u32,
    pub config: BenchConfig,
    pub runs: Vec<RunTiming>,
    pub mean_wall_time_s: Vec<(SolverKind, u8, f64)>,
}

/// Runs every configured solver on every configured `q`.
pub fn run_bench(
    config: &BenchConfig,
    pool: &ThreadPool,
    observer: Option<&dyn EvalObserver>,
) -> Result<(BenchReport, Timings)> {
    let mut problems = Vec::new();
    let mut timings = Vec::new();
    let mut means = Vec::new();
    for &q in &config.q {
        let spec = crate::problem::ProblemSpec { q, ..config.problem.clone() };
        let problem = spec.build()?;
        let batches: Vec<RunBatch> = config
            .solvers
            .iter()
            .map(|&kind| {
                run_batch(
                    &problem,
                    kind,
                    config.runs,
                    config.base_seed,
                    &config.solver,
                    config.weighting,
                    observer,
                    pool,
                )
            })
            .collect();
        for b in &batches {
            for r in &b.runs {
                timings.push(RunTiming { q, solver: b.solver, seed: r.seed, wall_time_s: r.wall_time_s });
            }
            if let Some(s) = summary(&b.runs.iter().map(|r| r.wall_time_s).collect::<Vec<_>>()) {
                means.push((b.solver, q, s.mean));
            }
        }
        problems.push(compare(&problem, &batches, config.weighting, config.alpha));
    }
    let report = BenchReport { schema: 1, config: config.clone(), problems };
    let timings = Timings { schema: 1, config: config.clone(), runs: timings, mean_wall_time_s: means };
    Ok((report, timings))
}

impl BenchReport {
    pub fn failed_runs(&self) -> usize {
        self.problems.iter().flat_map(|p| &p.solvers).map(|s| s.failed.len()).sum()
    }
}

/// Writes `report.json`, `timings.json` and one trace per run under
/// `traces/q{q}_{solver}_seed{seed}.csv`.
pub fn write_outputs(dir: &Path, report: &BenchReport, timings: &Timings) -> Result<()> {
    let traces = dir.join("traces");
    fs::create_dir_all(&traces).map_err(|e| Error::io(&traces, e))?;
    io::write_json(&dir.join("report.json"), report)?;
    io::write_json(&dir.join("timings.json"), timings)?;
    let config = serde_json::to_string(&report.config).map_err(|e| Error::Json { path: dir.into(), source: e })?;
    for p in &report.problems {
        for s in &p.solvers {
            for r in &s.runs {
                let path = traces.join(format!("q{}_{}_seed{}.csv", p.q, s.solver, r.seed));
                let provenance = format!("q={} solver={} seed={}\nconfig={config}", p.q, s.solver, r.seed);
                io::write_trace(&path, &provenance, &r.trace)?;
            }
        }
    }
    Ok(())
}
