//! Upper-level solvers behind one entry point, [`solve`].
//!
//! Every solver draws designs from a shared [`Evaluator`] whose evaluation
//! cap (Fev) bounds the run. Reaching the cap ends a run normally. Designs
//! are repaired to budget feasibility before they are evaluated.

mod anneal;
mod colony;
mod genetic;
mod greedy;
mod hybrid;
mod moves;
mod swarm;
mod tabu;

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::design::{DesignProblem, DesignVector, EvalObserver, Evaluator, ObjectiveValue};
use crate::error::DesignError;
use crate::network::Edge;

pub use anneal::{acceptance_probability, cooling_steps};
pub use colony::{deposit_amount, evaporate};
pub use hybrid::GreedyPhase;
pub use moves::{random_feasible, repair, Move};
pub use swarm::{inertia, sigmoid};
pub use tabu::TabuList;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SolverKind {
    #[cfg_attr(feature = "serde", serde(rename = "greedy"))]
    Greedy,
    #[cfg_attr(feature = "serde", serde(rename = "ga"))]
    Ga,
    #[cfg_attr(feature = "serde", serde(rename = "sa"))]
    Sa,
    #[cfg_attr(feature = "serde", serde(rename = "ts"))]
    Ts,
    #[cfg_attr(feature = "serde", serde(rename = "pso"))]
    Pso,
    #[cfg_attr(feature = "serde", serde(rename = "aco"))]
    Aco,
    #[cfg_attr(feature = "serde", serde(rename = "gr-sa"))]
    GrSa,
    #[cfg_attr(feature = "serde", serde(rename = "gr-ts"))]
    GrTs,
}

impl SolverKind {
    pub const ALL: [SolverKind; 8] = [
        SolverKind::Greedy,
        SolverKind::Ga,
        SolverKind::Sa,
        SolverKind::Ts,
        SolverKind::Pso,
        SolverKind::Aco,
        SolverKind::GrSa,
        SolverKind::GrTs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Greedy => "greedy",
            SolverKind::Ga => "ga",
            SolverKind::Sa => "sa",
            SolverKind::Ts => "ts",
            SolverKind::Pso => "pso",
            SolverKind::Aco => "aco",
            SolverKind::GrSa => "gr-sa",
            SolverKind::GrTs => "gr-ts",
        }
    }

    /// Whether results depend on the seed.
    pub fn is_stochastic(self) -> bool {
        self != SolverKind::Greedy
    }

    pub fn is_greedy_seeded(self) -> bool {
        matches!(self, SolverKind::GrSa | SolverKind::GrTs)
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownSolver(pub alloc::string::String);

impl fmt::Display for UnknownSolver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown solver `{}` (expected one of greedy, ga, sa, ts, pso, aco, gr-sa, gr-ts)", self.0)
    }
}

impl core::error::Error for UnknownSolver {}

impl FromStr for SolverKind {
    type Err = UnknownSolver;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SolverKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| UnknownSolver(s.into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct GaConfig {
    /// Elite individuals copied unchanged into the next generation.
    pub elite_count: usize,
    /// Offspring produced by single-point crossover.
    pub crossover_count: usize,
    /// Per-bit flip probability; `None` means `1 / |candidates|`.
    pub mutation_rate: Option<f64>,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig { elite_count: 2, crossover_count: 14, mutation_rate: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SaConfig {
    pub t0: f64,
    pub t_min: f64,
    pub cooling: f64,
    /// Starting temperature when seeded with the greedy design.
    pub seeded_t0: f64,
}

impl Default for SaConfig {
    fn default() -> Self {
        SaConfig { t0: 100.0, t_min: 1e-3, cooling: 0.97, seeded_t0: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct TsConfig {
    pub neighborhood_size: usize,
    pub tenure: usize,
}

impl Default for TsConfig {
    fn default() -> Self {
        TsConfig { neighborhood_size: 20, tenure: 5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct PsoConfig {
    pub c1: f64,
    pub c2: f64,
    pub w_max: f64,
    pub w_min: f64,
    pub v_max: f64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        PsoConfig { c1: 2.0, c2: 2.0, w_max: 0.9, w_min: 0.3, v_max: 4.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct AcoConfig {
    /// Deposit numerator, `Q / f`.
    pub q: f64,
    /// Evaporation rate.
    pub rho: f64,
    /// Pheromone exponent.
    pub alpha: f64,
    /// Heuristic exponent.
    pub beta: f64,
    pub tau0: f64,
}

impl Default for AcoConfig {
    fn default() -> Self {
        AcoConfig { q: 100.0, rho: 0.5, alpha: 2.0, beta: 2.0, tau0: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SolverConfig {
    /// Population, swarm, colony or neighbourhood-chain size.
    pub pop_size: usize,
    pub max_iter: usize,
    /// Evaluation cap per run (Fev).
    pub fev_cap: usize,
    pub seed: u64,
    /// Stop after this many iterations without a new best.
    pub stagnation_limit: usize,
    pub ga: GaConfig,
    pub sa: SaConfig,
    pub ts: TsConfig,
    pub pso: PsoConfig,
    pub aco: AcoConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            pop_size: 20,
            max_iter: 200,
            fev_cap: 4000,
            seed: 0,
            stagnation_limit: 50,
            ga: GaConfig::default(),
            sa: SaConfig::default(),
            ts: TsConfig::default(),
            pso: PsoConfig::default(),
            aco: AcoConfig::default(),
        }
    }
}

impl SolverConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), DesignError> {
        let bad = |msg| Err(DesignError::InvalidConfig(msg));
        if self.pop_size == 0 || self.fev_cap == 0 || self.stagnation_limit == 0 {
            return bad("pop_size, fev_cap and stagnation_limit must be positive");
        }
        if self.ga.elite_count + self.ga.crossover_count > self.pop_size {
            return bad("elite_count + crossover_count exceeds pop_size");
        }
        if let Some(rate) = self.ga.mutation_rate {
            if !(0.0..=1.0).contains(&rate) {
                return bad("mutation_rate must lie in [0, 1]");
            }
        }
        let sa = &self.sa;
        if !(sa.cooling > 0.0 && sa.cooling < 1.0) {
            return bad("cooling rate must lie in (0, 1)");
        }
        if !(sa.t0 > 0.0 && sa.seeded_t0 > 0.0 && sa.t_min > 0.0) {
            return bad("temperatures must be positive");
        }
        if self.ts.tenure == 0 || self.ts.neighborhood_size == 0 {
            return bad("tenure and neighborhood_size must be positive");
        }
        let p = &self.pso;
        if !(p.v_max > 0.0 && p.w_min <= p.w_max) {
            return bad("pso requires v_max > 0 and w_min <= w_max");
        }
        let a = &self.aco;
        if !(a.rho > 0.0 && a.rho <= 1.0 && a.tau0 > 0.0 && a.q > 0.0) {
            return bad("aco requires 0 < rho <= 1, tau0 > 0, q > 0");
        }
        Ok(())
    }
}

/// Best-so-far objective after `evals` evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TracePoint {
    pub evals: usize,
    pub best: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum StopReason {
    MaxIterations,
    Stagnation,
    EvalBudget,
    /// Greedy: no affordable candidate improves the objective.
    NoImprovement,
    /// No affordable move or candidate remains.
    NothingFits,
    MinTemperature,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolverResult {
    pub solver: SolverKind,
    pub seed: u64,
    pub best_design: DesignVector,
    pub best_edges: Vec<Edge>,
    pub best_objective: ObjectiveValue,
    pub trace: Vec<TracePoint>,
    pub evals_used: usize,
    pub iterations: usize,
    pub stop: StopReason,
    /// Filled by callers that own a clock.
    pub wall_time_s: f64,
}

/// Why a search loop ended early.
pub(crate) enum Halt {
    Exhausted,
    Failed(DesignError),
}

impl From<DesignError> for Halt {
    fn from(e: DesignError) -> Self {
        match e {
            DesignError::EvalBudgetExhausted { .. } => Halt::Exhausted,
            other => Halt::Failed(other),
        }
    }
}

/// Evaluation front-end for one run: best-so-far and convergence trace.
pub(crate) struct Search<'e, 'p> {
    pub(crate) ev: &'e Evaluator<'p>,
    pub(crate) best: Option<(DesignVector, ObjectiveValue)>,
    pub(crate) trace: Vec<TracePoint>,
    pub(crate) iterations: usize,
}

impl<'e, 'p> Search<'e, 'p> {
    pub(crate) fn new(ev: &'e Evaluator<'p>) -> Self {
        Search { ev, best: None, trace: Vec::new(), iterations: 0 }
    }

    pub(crate) fn problem(&self) -> &'p DesignProblem {
        self.ev.problem()
    }

    pub(crate) fn eval(&mut self, y: &DesignVector) -> Result<f64, Halt> {
        let before = self.ev.used();
        let value = self.ev.evaluate(y)?;
        let total = value.total;
        if self.best.as_ref().is_none_or(|(_, b)| total < b.total) {
            self.best = Some((y.clone(), value));
        }
        if self.ev.used() > before {
            let best = self.best_total();
            self.trace.push(TracePoint { evals: self.ev.used(), best });
        }
        Ok(total)
    }

    pub(crate) fn best_total(&self) -> f64 {
        self.best.as_ref().map_or(f64::INFINITY, |(_, b)| b.total)
    }

    pub(crate) fn best_design(&self) -> Option<&DesignVector> {
        self.best.as_ref().map(|(y, _)| y)
    }

    fn finish(self, solver: SolverKind, seed: u64, stop: StopReason) -> Result<SolverResult, DesignError> {
        let (best_design, best_objective) = match self.best {
            Some(b) => b,
            // Nothing evaluated, e.g. a cap of zero remaining evaluations.
            None => (DesignVector::empty(), self.ev.problem().baseline().clone()),
        };
        let candidates = self.ev.problem().candidates();
        Ok(SolverResult {
            solver,
            seed,
            best_edges: best_design.edges(candidates).copied().collect(),
            best_design,
            best_objective,
            trace: self.trace,
            evals_used: self.ev.used(),
            iterations: self.iterations,
            stop,
            wall_time_s: 0.0,
        })
    }
}

/// Tracks iterations without improvement of the best objective.
pub(crate) struct Stagnation {
    limit: usize,
    count: usize,
    last: f64,
}

impl Stagnation {
    pub(crate) fn new(limit: usize, start: f64) -> Self {
        Stagnation { limit, count: 0, last: start }
    }

    /// Returns true once `limit` consecutive iterations brought no new best.
    pub(crate) fn update(&mut self, best: f64) -> bool {
        if best < self.last {
            self.last = best;
            self.count = 0;
        } else {
            self.count += 1;
        }
        self.count >= self.limit
    }
}

pub(crate) fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Runs one solver on `problem` with its own evaluator.
pub fn solve(kind: SolverKind, problem: &DesignProblem, cfg: &SolverConfig) -> Result<SolverResult, DesignError> {
    solve_observed(kind, problem, cfg, None)
}

/// Like [`solve`], reporting every design handed to the evaluator.
pub fn solve_observed(
    kind: SolverKind,
    problem: &DesignProblem,
    cfg: &SolverConfig,
    observer: Option<&dyn EvalObserver>,
) -> Result<SolverResult, DesignError> {
    cfg.validate()?;
    let mut ev = Evaluator::new(problem, cfg.fev_cap);
    if let Some(obs) = observer {
        ev = ev.with_observer(obs);
    }
    let mut search = Search::new(&ev);
    let mut rng = rng_for(cfg.seed);
    let outcome = match kind {
        SolverKind::Greedy => greedy::run(&mut search),
        SolverKind::Ga => genetic::run(&mut search, cfg, &mut rng),
        SolverKind::Sa => anneal::run(&mut search, cfg, cfg.sa.t0, None, &mut rng),
        SolverKind::Ts => tabu::run(&mut search, cfg, None, &mut rng),
        SolverKind::Pso => swarm::run(&mut search, cfg, &mut rng),
        SolverKind::Aco => colony::run(&mut search, cfg, &mut rng),
        SolverKind::GrSa | SolverKind::GrTs => hybrid::run(&mut search, kind, cfg, &mut rng),
    };
    conclude(search, kind, cfg.seed, outcome)
}

pub(crate) fn conclude(
    search: Search<'_, '_>,
    kind: SolverKind,
    seed: u64,
    outcome: Result<StopReason, Halt>,
) -> Result<SolverResult, DesignError> {
    let stop = match outcome {
        Ok(stop) => stop,
        Err(Halt::Exhausted) => StopReason::EvalBudget,
        Err(Halt::Failed(e)) => return Err(e),
    };
    search.finish(kind, seed, stop)
}

pub fn greedy_solve(problem: &DesignProblem, cfg: &SolverConfig) -> Result<SolverResult, DesignError> {
    solve(SolverKind::Greedy, problem, cfg)
}

pub fn ga_solve(problem: &DesignProblem, cfg: &SolverConfig) -> Result<SolverResult, DesignError> {
    solve(SolverKind::Ga, problem, cfg)
}

pub fn pso_solve(problem: &DesignProblem, cfg: &SolverConfig) -> Result<SolverResult, DesignError> {
    solve(SolverKind::Pso, problem, cfg)
}

pub fn aco_solve(problem: &DesignProblem, cfg: &SolverConfig) -> Result<SolverResult, DesignError> {
    solve(SolverKind::Aco, problem, cfg)
}

pub fn gr_sa_solve(problem: &DesignProblem, cfg: &SolverConfig) -> Result<SolverResult, DesignError> {
    solve(SolverKind::GrSa, problem, cfg)
}

pub fn gr_ts_solve(problem: &DesignProblem, cfg: &SolverConfig) -> Result<SolverResult, DesignError> {
    solve(SolverKind::GrTs, problem, cfg)
}

/// Simulated annealing from `seed_design` (empty when `None`) at the
/// standalone starting temperature.
pub fn sa_solve(
    problem: &DesignProblem,
    cfg: &SolverConfig,
    seed_design: Option<&DesignVector>,
) -> Result<SolverResult, DesignError> {
    cfg.validate()?;
    let ev = Evaluator::new(problem, cfg.fev_cap);
    let mut search = Search::new(&ev);
    let mut rng = rng_for(cfg.seed);
    let outcome = anneal::run(&mut search, cfg, cfg.sa.t0, seed_design, &mut rng);
    conclude(search, SolverKind::Sa, cfg.seed, outcome)
}

/// Tabu search from `seed_design` (empty when `None`).
pub fn ts_solve(
    problem: &DesignProblem,
    cfg: &SolverConfig,
    seed_design: Option<&DesignVector>,
) -> Result<SolverResult, DesignError> {
    cfg.validate()?;
    let ev = Evaluator::new(problem, cfg.fev_cap);
    let mut search = Search::new(&ev);
    let mut rng = rng_for(cfg.seed);
    let outcome = tabu::run(&mut search, cfg, seed_design, &mut rng);
    conclude(search, SolverKind::Ts, cfg.seed, outcome)
}
