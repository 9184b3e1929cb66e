//! Greedy-seeded local search: the greedy construction runs first and its
//! best design seeds annealing (at the low seeded temperature) or tabu
//! search. Both phases draw on one evaluation budget.

use alloc::vec::Vec;

use rand::Rng;

use super::{
    anneal, conclude, greedy, rng_for, tabu, Halt, Search, SolverConfig, SolverKind, SolverResult, StopReason,
    TracePoint,
};
use crate::design::{DesignProblem, DesignVector, EvalObserver, Evaluator, EvaluatorState, ObjectiveValue};
use crate::error::DesignError;

pub(crate) fn run<R: Rng + ?Sized>(
    search: &mut Search<'_, '_>,
    kind: SolverKind,
    cfg: &SolverConfig,
    rng: &mut R,
) -> Result<StopReason, Halt> {
    greedy::run(search)?;
    local(search, kind, cfg, rng)
}

fn local<R: Rng + ?Sized>(
    search: &mut Search<'_, '_>,
    kind: SolverKind,
    cfg: &SolverConfig,
    rng: &mut R,
) -> Result<StopReason, Halt> {
    let start = search.best_design().cloned().unwrap_or_default();
    match kind {
        SolverKind::GrSa => anneal::run(search, cfg, cfg.sa.seeded_t0, Some(&start), rng),
        SolverKind::GrTs => tabu::run(search, cfg, Some(&start), rng),
        other => unreachable!("{other} is not a greedy-seeded solver"),
    }
}

/// The deterministic greedy prefix of a hybrid run, computed once and
/// replayed for every seed. Resuming from it gives the same result as a
/// fresh hybrid run.
#[derive(Debug, Clone)]
pub struct GreedyPhase {
    fev_cap: usize,
    state: EvaluatorState,
    best: Option<(DesignVector, ObjectiveValue)>,
    trace: Vec<TracePoint>,
    iterations: usize,
    exhausted: bool,
}

impl GreedyPhase {
    pub fn compute(
        problem: &DesignProblem,
        cfg: &SolverConfig,
        observer: Option<&dyn EvalObserver>,
    ) -> Result<Self, DesignError> {
        cfg.validate()?;
        let mut ev = Evaluator::new(problem, cfg.fev_cap);
        if let Some(obs) = observer {
            ev = ev.with_observer(obs);
        }
        let mut search = Search::new(&ev);
        let exhausted = match greedy::run(&mut search) {
            Ok(_) => false,
            Err(Halt::Exhausted) => true,
            Err(Halt::Failed(e)) => return Err(e),
        };
        Ok(GreedyPhase {
            fev_cap: cfg.fev_cap,
            state: ev.snapshot(),
            best: search.best,
            trace: search.trace,
            iterations: search.iterations,
            exhausted,
        })
    }

    pub fn evals_used(&self) -> usize {
        self.state.used()
    }

    /// Runs the local phase of `kind` for `cfg.seed`. `cfg.fev_cap` must
    /// match the cap the phase was computed with.
    pub fn resume(
        &self,
        problem: &DesignProblem,
        kind: SolverKind,
        cfg: &SolverConfig,
        observer: Option<&dyn EvalObserver>,
    ) -> Result<SolverResult, DesignError> {
        cfg.validate()?;
        if !kind.is_greedy_seeded() {
            return Err(DesignError::InvalidConfig("greedy phase only seeds gr-sa and gr-ts"));
        }
        if cfg.fev_cap != self.fev_cap {
            return Err(DesignError::InvalidConfig("fev_cap differs from the greedy phase"));
        }
        let mut ev = Evaluator::resume(problem, cfg.fev_cap, self.state.clone());
        if let Some(obs) = observer {
            ev = ev.with_observer(obs);
        }
        let mut search = Search::new(&ev);
        search.best = self.best.clone();
        search.trace = self.trace.clone();
        search.iterations = self.iterations;
        let mut rng = rng_for(cfg.seed);
        let outcome = if self.exhausted { Err(Halt::Exhausted) } else { local(&mut search, kind, cfg, &mut rng) };
        conclude(search, kind, cfg.seed, outcome)
    }
}
