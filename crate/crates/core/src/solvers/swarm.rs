//! Binary particle swarm: sigmoid transfer of clamped real velocities,
//! inertia decreasing linearly from `w_max` to `w_min`.

use alloc::vec::Vec;

use rand::Rng;

use super::moves::{random_feasible, repair};
use super::{Halt, Search, SolverConfig, Stagnation, StopReason};
use crate::design::DesignVector;

pub fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-v))
}

/// Inertia weight at iteration `k` of `max_iter`.
pub fn inertia(w_max: f64, w_min: f64, k: usize, max_iter: usize) -> f64 {
    if max_iter == 0 {
        return w_max;
    }
    w_max - (w_max - w_min) * k as f64 / max_iter as f64
}

struct Particle {
    x: Vec<bool>,
    v: Vec<f64>,
    best_x: Vec<bool>,
    best_f: f64,
}

fn bit(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

pub(crate) fn run<R: Rng + ?Sized>(
    search: &mut Search<'_, '_>,
    cfg: &SolverConfig,
    rng: &mut R,
) -> Result<StopReason, Halt> {
    let problem = search.problem();
    let c = problem.candidates();
    let n = c.len();
    let p = &cfg.pso;

    let mut swarm: Vec<Particle> = Vec::with_capacity(cfg.pop_size);
    for _ in 0..cfg.pop_size {
        let y = random_feasible(problem, rng);
        let v = (0..n).map(|_| rng.random_range(-p.v_max..=p.v_max)).collect();
        let f = search.eval(&y)?;
        let x = y.to_bits(n);
        swarm.push(Particle { best_x: x.clone(), x, v, best_f: f });
    }
    // First particle wins ties for the global best.
    let lead = swarm.iter().enumerate().fold(0, |b, (i, q)| if q.best_f < swarm[b].best_f { i } else { b });
    let mut g_x = swarm[lead].best_x.clone();
    let mut g_f = swarm[lead].best_f;

    let mut stagnation = Stagnation::new(cfg.stagnation_limit, search.best_total());
    for k in 0..cfg.max_iter {
        search.iterations += 1;
        let w = inertia(p.w_max, p.w_min, k, cfg.max_iter);
        for part in swarm.iter_mut() {
            for b in 0..n {
                let (r1, r2): (f64, f64) = (rng.random(), rng.random());
                let xb = bit(part.x[b]);
                let v = w * part.v[b] + p.c1 * r1 * (bit(part.best_x[b]) - xb) + p.c2 * r2 * (bit(g_x[b]) - xb);
                part.v[b] = v.clamp(-p.v_max, p.v_max);
                part.x[b] = rng.random::<f64>() < sigmoid(part.v[b]);
            }
            let y = repair(problem, DesignVector::from_bits(c, &part.x));
            part.x = y.to_bits(n);
            let f = search.eval(&y)?;
            if f < part.best_f {
                part.best_f = f;
                part.best_x.clone_from(&part.x);
            }
            if f < g_f {
                g_f = f;
                g_x.clone_from(&part.x);
            }
        }
        if stagnation.update(search.best_total()) {
            return Ok(StopReason::Stagnation);
        }
    }
    Ok(StopReason::MaxIterations)
}
