//! Generational GA on the candidate bitstring.
//!
//! Each generation keeps `elite_count` best individuals, breeds
//! `crossover_count` children by single-point crossover of two parents and
//! fills the rest by bit-flip mutation. Parents come from stochastic
//! universal sampling on rank-scaled fitness (`1 / sqrt(rank)`). Every
//! child is repaired before evaluation.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use super::moves::{random_feasible, repair};
use super::{Halt, Search, SolverConfig, Stagnation, StopReason};
use crate::design::DesignVector;

/// Expected selection counts for individuals sorted best first, scaled to
/// sum to `parents`.
pub(crate) fn rank_expectations(len: usize, parents: usize) -> Vec<f64> {
    let raw: Vec<f64> = (1..=len).map(|r| 1.0 / libm::sqrt(r as f64)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|e| e * parents as f64 / total).collect()
}

/// Stochastic universal sampling: `count` equally spaced pointers over the
/// cumulative expectations, starting at a uniform offset.
pub(crate) fn sus<R: Rng + ?Sized>(expect: &[f64], count: usize, rng: &mut R) -> Vec<usize> {
    let total: f64 = expect.iter().sum();
    let step = total / count as f64;
    let mut pointer = rng.random::<f64>() * step;
    let mut out = Vec::with_capacity(count);
    let mut cum = 0.0;
    let mut i = 0;
    while out.len() < count {
        while i + 1 < expect.len() && cum + expect[i] <= pointer {
            cum += expect[i];
            i += 1;
        }
        out.push(i);
        pointer += step;
    }
    out
}

pub(crate) fn run<R: Rng + ?Sized>(
    search: &mut Search<'_, '_>,
    cfg: &SolverConfig,
    rng: &mut R,
) -> Result<StopReason, Halt> {
    let problem = search.problem();
    let c = problem.candidates();
    let n = c.len();
    let size = cfg.pop_size;
    let elite = cfg.ga.elite_count;
    let cross = cfg.ga.crossover_count;
    let mutants = size - elite - cross;
    let rate = cfg.ga.mutation_rate.unwrap_or(if n == 0 { 0.0 } else { 1.0 / n as f64 });

    let mut pop: Vec<(DesignVector, f64)> = Vec::with_capacity(size);
    for _ in 0..size {
        let y = random_feasible(problem, rng);
        let f = search.eval(&y)?;
        pop.push((y, f));
    }
    let mut stagnation = Stagnation::new(cfg.stagnation_limit, search.best_total());
    for _ in 0..cfg.max_iter {
        search.iterations += 1;
        // Stable sort: earlier individuals win ties.
        pop.sort_by(|a, b| a.1.total_cmp(&b.1));
        let parents_needed = 2 * cross + mutants;
        let expect = rank_expectations(pop.len(), parents_needed);
        let mut parents = sus(&expect, parents_needed, rng);
        parents.shuffle(rng);

        let mut next: Vec<(DesignVector, f64)> = pop[..elite].to_vec();
        let mut children: Vec<DesignVector> = Vec::with_capacity(cross + mutants);
        for k in 0..cross {
            let a = pop[parents[2 * k]].0.to_bits(n);
            let b = pop[parents[2 * k + 1]].0.to_bits(n);
            let cut = if n > 1 { rng.random_range(1..n) } else { 0 };
            let mut child = a;
            child[cut..].copy_from_slice(&b[cut..]);
            children.push(repair(problem, DesignVector::from_bits(c, &child)));
        }
        for k in 0..mutants {
            let mut bits = pop[parents[2 * cross + k]].0.to_bits(n);
            for bit in bits.iter_mut() {
                if rng.random::<f64>() < rate {
                    *bit = !*bit;
                }
            }
            children.push(repair(problem, DesignVector::from_bits(c, &bits)));
        }
        for y in children {
            let f = search.eval(&y)?;
            next.push((y, f));
        }
        pop = next;
        if stagnation.update(search.best_total()) {
            return Ok(StopReason::Stagnation);
        }
    }
    Ok(StopReason::MaxIterations)
}
