//! Ant colony construction over candidate edges.
//!
//! Each ant adds affordable candidates one at a time with probability
//! proportional to `tau^alpha * eta^beta`, `eta = 1 / length`, until
//! nothing fits. After all ants are evaluated pheromone evaporates by `rho`
//! and every ant deposits `Q / f` on the edges it chose.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::moves::affordable;
use super::{Halt, Search, SolverConfig, Stagnation, StopReason};
use crate::design::{DesignProblem, DesignVector};

/// `tau <- (1 - rho) tau`.
pub fn evaporate(tau: &mut [f64], rho: f64) {
    tau.iter_mut().for_each(|t| *t *= 1.0 - rho);
}

/// Pheromone an ant with objective `f` leaves on each of its edges.
pub fn deposit_amount(q: f64, f: f64) -> f64 {
    if f > 0.0 {
        q / f
    } else {
        q
    }
}

fn construct<R: Rng + ?Sized>(problem: &DesignProblem, weight: &[f64], rng: &mut R) -> DesignVector {
    let c = problem.candidates();
    let mut y = DesignVector::empty();
    loop {
        let options = affordable(problem, &y);
        if options.is_empty() {
            return y;
        }
        let total: f64 = options.iter().map(|&i| weight[i]).sum();
        let pick = if total > 0.0 && total.is_finite() {
            let mut r = rng.random::<f64>() * total;
            let mut chosen = *options.last().expect("non-empty");
            for &i in &options {
                r -= weight[i];
                if r < 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            options[rng.random_range(0..options.len())]
        };
        y = y.with(c, pick);
    }
}

pub(crate) fn run<R: Rng + ?Sized>(
    search: &mut Search<'_, '_>,
    cfg: &SolverConfig,
    rng: &mut R,
) -> Result<StopReason, Halt> {
    let problem = search.problem();
    let c = problem.candidates();
    let a = &cfg.aco;
    let eta_pow: Vec<f64> = (0..c.len()).map(|i| libm::pow(1.0 / c.cost_km(i), a.beta)).collect();
    let mut tau = vec![a.tau0; c.len()];
    let mut weight = vec![0.0; c.len()];
    let mut stagnation = Stagnation::new(cfg.stagnation_limit, f64::INFINITY);
    for _ in 0..cfg.max_iter {
        search.iterations += 1;
        for i in 0..c.len() {
            weight[i] = libm::pow(tau[i], a.alpha) * eta_pow[i];
        }
        let mut ants: Vec<(DesignVector, f64)> = Vec::with_capacity(cfg.pop_size);
        for _ in 0..cfg.pop_size {
            let y = construct(problem, &weight, rng);
            let f = search.eval(&y)?;
            ants.push((y, f));
        }
        evaporate(&mut tau, a.rho);
        for (y, f) in &ants {
            let deposit = deposit_amount(a.q, *f);
            for &i in y.indices() {
                tau[i] += deposit;
            }
        }
        if stagnation.update(search.best_total()) {
            return Ok(StopReason::Stagnation);
        }
    }
    Ok(StopReason::MaxIterations)
}
