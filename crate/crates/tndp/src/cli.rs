//! Command-line interface.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use tndp_core::solvers::solve;
use tndp_core::{AssignmentConfig, SolverConfig, SolverKind};

use crate::analyze::{analyze, Analysis, DEFAULT_WEIGHTING};
use crate::bench::{self, BenchConfig, RunRecord};
use crate::dataset;
use crate::error::{Error, Result};
use crate::io;
use crate::lint::{lint, Lint};
use crate::problem::{LambdaSpec, ProblemSpec};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "TNDP_THREADS";

#[derive(Debug, Parser)]
#[command(name = "tndp", version, about = "Budget-constrained road network design")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Edge betweenness, equilibrium flows and their correlation.
    Analyze(AnalyzeArgs),
    /// One run of one solver.
    Solve(SolveArgs),
    /// Repeated seeded runs of several solvers, with comparison statistics.
    Bench(BenchArgs),
    /// Check network and demand files.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct DataArgs {
    /// Node table (id,lat,lon[,name]). Defaults to the bundled instance.
    #[arg(long)]
    pub nodes: Option<PathBuf>,
    /// Edge table (u,v[,length_km]).
    #[arg(long)]
    pub edges: Option<PathBuf>,
    /// Demand matrix, dense or origin,dest,demand triplets.
    #[arg(long)]
    pub od: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ProblemArgs {
    /// Problem definition JSON; flags override its values.
    #[arg(long)]
    pub problem: Option<PathBuf>,
    #[command(flatten)]
    pub data: DataArgs,
    /// Construction budget in km.
    #[arg(long)]
    pub budget: Option<f64>,
    /// Crossing penalty weight: `auto` or a number.
    #[arg(long)]
    pub lambda: Option<LambdaSpec>,
    /// Frank-Wolfe relative gap tolerance.
    #[arg(long = "fw-tol")]
    pub fw_tol: Option<f64>,
}

impl ProblemArgs {
    pub fn spec(&self) -> Result<ProblemSpec> {
        let mut spec = match &self.problem {
            Some(path) => ProblemSpec::from_json_file(path)?,
            None => ProblemSpec::default(),
        };
        let d = &self.data;
        if d.nodes.is_some() || d.edges.is_some() || d.od.is_some() {
            spec.nodes = d.nodes.clone().or(spec.nodes);
            spec.edges = d.edges.clone().or(spec.edges);
            spec.od = d.od.clone().or(spec.od);
        }
        if let Some(b) = self.budget {
            spec.budget_km = b;
        }
        if let Some(l) = self.lambda {
            spec.lambda = l;
        }
        if let Some(t) = self.fw_tol {
            spec.assignment.fw_tolerance = t;
        }
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct SolverArgs {
    /// Solver parameters as JSON; flags override its values.
    #[arg(long = "solver-config")]
    pub solver_config: Option<PathBuf>,
    /// Evaluation cap per run.
    #[arg(long = "fev-cap")]
    pub fev_cap: Option<usize>,
    #[arg(long = "pop-size")]
    pub pop_size: Option<usize>,
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
}

impl SolverArgs {
    pub fn config(&self, seed: u64) -> Result<SolverConfig> {
        let mut cfg = match &self.solver_config {
            Some(path) => {
                let text = io::read_text(path)?;
                serde_json::from_str(&text).map_err(|e| Error::Json { path: path.clone(), source: e })?
            }
            None => SolverConfig::default(),
        };
        cfg.seed = seed;
        if let Some(v) = self.fev_cap {
            cfg.fev_cap = v;
        }
        if let Some(v) = self.pop_size {
            cfg.pop_size = v;
        }
        if let Some(v) = self.max_iter {
            cfg.max_iter = v;
        }
        cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Published betweenness and volumes (u,v,betweenness,volume) used to
    /// pick the shortest-path weighting. Bundled data uses its own table.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long = "fw-tol")]
    pub fw_tol: Option<f64>,
    /// Report file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// 1 penalizes new edges that cross existing ones.
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub q: Option<u8>,
    #[arg(long, default_value = "greedy")]
    pub solver: SolverKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub solver_args: SolverArgs,
    /// Output directory for report.json and trace.csv.
    #[arg(long, default_value = "tndp-solve")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Design problems to run, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0,1", value_parser = clap::value_parser!(u8).range(0..=1))]
    pub q: Vec<u8>,
    #[arg(long, value_delimiter = ',', default_value = "greedy,ga,sa,ts,pso,aco,gr-sa,gr-ts")]
    pub solvers: Vec<SolverKind>,
    #[arg(long, default_value_t = 30)]
    pub runs: usize,
    /// Run i uses seed `seed + i`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub solver_args: SolverArgs,
    /// Output directory for report.json, timings.json and traces/.
    #[arg(long, default_value = "tndp-bench")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub data: DataArgs,
}

/// Outcome of a command that ran to the end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Complete,
    /// Finished, but some requested work failed.
    Partial,
}

pub fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Solve(a) => cmd_solve(&a),
        Command::Bench(a) => cmd_bench(&a),
        Command::Validate(a) => cmd_validate(&a),
    }
}

/// Usage problems map to exit code 2, everything else to 1.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Solver(_) => 2,
        _ => 1,
    }
}

pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(None),
    }
}

fn data_spec(data: &DataArgs) -> Result<ProblemSpec> {
    let spec = ProblemSpec {
        nodes: data.nodes.clone(),
        edges: data.edges.clone(),
        od: data.od.clone(),
        ..ProblemSpec::default()
    };
    spec.validate()?;
    Ok(spec)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn stdout_lines(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| Error::io("<stdout>", e))
}

#[derive(Debug, Serialize)]
pub struct AnalyzeConfig {
    pub nodes: Option<PathBuf>,
    pub edges: Option<PathBuf>,
    pub od: Option<PathBuf>,
    /// `None` with bundled data means the bundled table.
    pub reference: Option<PathBuf>,
    pub assignment: AssignmentConfig,
}

#[derive(Debug, Serialize)]
pub struct AnalyzeReport {
    pub schema: u32,
    pub config: AnalyzeConfig,
    #[serde(flatten)]
    pub analysis: Analysis,
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<Outcome> {
    let mut spec = data_spec(&args.data)?;
    if let Some(t) = args.fw_tol {
        spec.assignment.fw_tolerance = t;
        spec.validate()?;
    }
    let (net, od) = spec.load_data()?;
    let reference = match (&args.reference, &spec.nodes) {
        (Some(path), _) => Some(io::load_reference(path)?),
        (None, None) => Some(dataset::kinshasa()?.reference),
        (None, Some(_)) => None,
    };
    let analysis = analyze(&net, &od, &spec.assignment, reference.as_deref())?;
    let report = AnalyzeReport {
        schema: 1,
        config: AnalyzeConfig {
            nodes: spec.nodes,
            edges: spec.edges,
            od: spec.od,
            reference: args.reference.clone(),
            assignment: spec.assignment,
        },
        analysis,
    };
    match &args.out {
        Some(path) => io::write_json(path, &report)?,
        None => {
            let text = serde_json::to_string_pretty(&report)
                .map_err(|e| Error::Json { path: "<stdout>".into(), source: e })?;
            stdout_lines(&format!("{text}\n"))?;
        }
    }
    Ok(Outcome::Complete)
}

#[derive(Debug, Serialize)]
pub struct SolveConfig {
    pub problem: ProblemSpec,
    pub solver: SolverKind,
    pub solver_config: SolverConfig,
}

#[derive(Debug, Serialize)]
pub struct SolveReport {
    pub schema: u32,
    pub config: SolveConfig,
    pub lambda: f64,
    pub candidate_count: usize,
    pub baseline_travel_time: f64,
    /// Baseline travel time over the run's travel time.
    pub n_fold_travel_time: f64,
    #[serde(flatten)]
    pub run: RunRecord,
    pub wall_time_s: f64,
}

fn cmd_solve(args: &SolveArgs) -> Result<Outcome> {
    let mut spec = args.problem.spec()?;
    if let Some(q) = args.q {
        spec.q = q;
    }
    let cfg = args.solver_args.config(args.seed)?;
    let problem = spec.build()?;
    let start = Instant::now();
    let mut result = solve(args.solver, &problem, &cfg)?;
    result.wall_time_s = start.elapsed().as_secs_f64();
    let wall_time_s = result.wall_time_s;
    let run = RunRecord::new(&problem, DEFAULT_WEIGHTING, result)?;
    let t0 = problem.baseline().travel_time;
    let report = SolveReport {
        schema: 1,
        config: SolveConfig { problem: spec, solver: args.solver, solver_config: cfg },
        lambda: problem.lambda(),
        candidate_count: problem.candidates().len(),
        baseline_travel_time: t0,
        n_fold_travel_time: t0 / run.travel_time,
        run,
        wall_time_s,
    };

    create_dir(&args.out)?;
    io::write_json(&args.out.join("report.json"), &report)?;
    let config =
        serde_json::to_string(&report.config).map_err(|e| Error::Json { path: args.out.clone(), source: e })?;
    io::write_trace(&args.out.join("trace.csv"), &format!("config={config}"), &report.run.trace)?;

    let mut text = format!(
        "# {} seed {} q {} budget {} km: objective {:.4}, travel time {:.4} (baseline {:.4}), {} crossings, {:.3} km used\n",
        args.solver,
        args.seed,
        report.config.problem.q,
        report.config.problem.budget_km,
        report.run.objective,
        report.run.travel_time,
        t0,
        report.run.crossings,
        report.run.cost_km,
    );
    text.push_str("u,v,length_km\n");
    for e in &report.run.edges {
        text.push_str(&format!("{},{},{:.3}\n", e.u, e.v, e.length_km));
    }
    stdout_lines(&text)?;
    Ok(Outcome::Complete)
}

fn cmd_bench(args: &BenchArgs) -> Result<Outcome> {
    if args.runs == 0 {
        return Err(Error::Config("--runs must be at least 1".into()));
    }
    let spec = args.problem.spec()?;
    let mut config = BenchConfig::new(spec, args.q.clone(), args.solvers.clone(), args.runs, args.seed);
    config.solver = args.solver_args.config(args.seed)?;
    let pool = bench::thread_pool(threads_from_env()?)?;
    let (report, timings) = bench::run_bench(&config, &pool, None)?;
    create_dir(&args.out)?;
    bench::write_outputs(&args.out, &report, &timings)?;

    let mut text =
        String::from("q,solver,runs,failed,mean_objective,std_objective,n_fold,stability,mann_whitney_p,differs\n");
    for p in &report.problems {
        for s in &p.solvers {
            let num = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.6}"));
            let mw = s.mann_whitney.as_ref();
            text.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                p.q,
                s.solver,
                s.completed_runs,
                s.failed.len(),
                num(s.objective.map(|o| o.mean)),
                num(s.objective.map(|o| o.std)),
                num(s.n_fold),
                num(s.stability.as_ref().map(|st| st.model)),
                num(mw.map(|m| m.result.p_value)),
                mw.map_or(String::new(), |m| m.result.reject.to_string()),
            ));
        }
    }
    stdout_lines(&text)?;
    for p in &report.problems {
        for s in &p.solvers {
            for f in &s.failed {
                eprintln!("q={} {} seed {} failed: {}", p.q, s.solver, f.seed, f.error);
            }
        }
    }
    Ok(if report.failed_runs() == 0 { Outcome::Complete } else { Outcome::Partial })
}

fn cmd_validate(args: &ValidateArgs) -> Result<Outcome> {
    let spec = data_spec(&args.data)?;
    let (net, od) = spec.load_data()?;
    let report: Lint = lint(&net, &od);
    let mut text = format!(
        "nodes {}, edges {}, candidates {}, components {}, demand {:.6} over {} pairs\n",
        report.node_count,
        report.edge_count,
        report.candidate_count,
        report.components,
        report.demand_total,
        report.od_pairs
    );
    for w in &report.warnings {
        text.push_str(&format!("warning: {w}\n"));
    }
    stdout_lines(&text)?;
    for e in &report.errors {
        eprintln!("error: {e}");
    }
    Ok(if report.is_clean() { Outcome::Complete } else { Outcome::Partial })
}
