//! Simulated annealing over the add/remove/swap neighbourhood.
//!
//! Each temperature level runs `pop_size` proposals, then the temperature
//! is multiplied by the cooling rate.

use rand::Rng;

use super::moves::random_move;
use super::{Halt, Search, SolverConfig, Stagnation, StopReason};
use crate::design::DesignVector;

/// Metropolis rule for a change `delta` in the objective.
pub fn acceptance_probability(delta: f64, temperature: f64) -> f64 {
    if delta <= 0.0 {
        1.0
    } else {
        libm::exp(-delta / temperature)
    }
}

/// Temperature levels visited before `t` drops to `t_min` or below.
pub fn cooling_steps(t0: f64, t_min: f64, cooling: f64) -> usize {
    let mut t = t0;
    let mut k = 0;
    while t > t_min {
        t *= cooling;
        k += 1;
    }
    k
}

pub(crate) fn run<R: Rng + ?Sized>(
    search: &mut Search<'_, '_>,
    cfg: &SolverConfig,
    t0: f64,
    start: Option<&DesignVector>,
    rng: &mut R,
) -> Result<StopReason, Halt> {
    let problem = search.problem();
    let mut y = start.cloned().unwrap_or_default();
    let mut f = search.eval(&y)?;
    let mut stagnation = Stagnation::new(cfg.stagnation_limit, search.best_total());
    let mut t = t0;
    for _ in 0..cfg.max_iter {
        if t <= cfg.sa.t_min {
            return Ok(StopReason::MinTemperature);
        }
        search.iterations += 1;
        for _ in 0..cfg.pop_size {
            let Some(mv) = random_move(problem, &y, rng) else {
                return Ok(StopReason::NothingFits);
            };
            let z = mv.apply(problem, &y);
            let fz = search.eval(&z)?;
            let p = acceptance_probability(fz - f, t);
            if p >= 1.0 || rng.random::<f64>() < p {
                y = z;
                f = fz;
            }
        }
        if stagnation.update(search.best_total()) {
            return Ok(StopReason::Stagnation);
        }
        t *= cfg.sa.cooling;
    }
    Ok(StopReason::MaxIterations)
}
