//! Tabu search with a sampled add/remove/swap neighbourhood.
//!
//! The tabu attributes are the candidate indices a move touched. A move
//! touching a tabu index is admissible only if it beats the best objective
//! found so far.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use rand::Rng;

use super::moves::{random_move, Move};
use super::{Halt, Search, SolverConfig, Stagnation, StopReason};
use crate::design::DesignVector;

/// Fixed-capacity FIFO of recently touched move attributes.
#[derive(Debug, Clone)]
pub struct TabuList {
    tenure: usize,
    entries: VecDeque<(usize, Option<usize>)>,
}

impl TabuList {
    pub fn new(tenure: usize) -> Self {
        TabuList { tenure, entries: VecDeque::with_capacity(tenure + 1) }
    }

    pub fn push(&mut self, mv: Move) {
        if self.tenure == 0 {
            return;
        }
        self.entries.push_back(mv.touched());
        while self.entries.len() > self.tenure {
            self.entries.pop_front();
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn holds(&self, index: usize) -> bool {
        self.entries.iter().any(|&(a, b)| a == index || b == Some(index))
    }

    pub fn is_tabu(&self, mv: Move) -> bool {
        let (a, b) = mv.touched();
        self.holds(a) || b.is_some_and(|b| self.holds(b))
    }
}

pub(crate) fn run<R: Rng + ?Sized>(
    search: &mut Search<'_, '_>,
    cfg: &SolverConfig,
    start: Option<&DesignVector>,
    rng: &mut R,
) -> Result<StopReason, Halt> {
    let problem = search.problem();
    let mut y = start.cloned().unwrap_or_default();
    search.eval(&y)?;
    let mut tabu = TabuList::new(cfg.ts.tenure);
    let mut stagnation = Stagnation::new(cfg.stagnation_limit, search.best_total());
    for _ in 0..cfg.max_iter {
        search.iterations += 1;
        let mut sampled: Vec<(Move, DesignVector)> = Vec::with_capacity(cfg.ts.neighborhood_size);
        for _ in 0..cfg.ts.neighborhood_size {
            let Some(mv) = random_move(problem, &y, rng) else {
                return Ok(StopReason::NothingFits);
            };
            let z = mv.apply(problem, &y);
            if !sampled.iter().any(|(_, s)| *s == z) {
                sampled.push((mv, z));
            }
        }
        let mut chosen: Option<(Move, DesignVector, f64)> = None;
        for (mv, z) in sampled {
            let best_before = search.best_total();
            let fz = search.eval(&z)?;
            let admissible = !tabu.is_tabu(mv) || fz < best_before;
            if admissible && chosen.as_ref().is_none_or(|(_, _, b)| fz < *b) {
                chosen = Some((mv, z, fz));
            }
        }
        if let Some((mv, z, _)) = chosen {
            y = z;
            tabu.push(mv);
        }
        if stagnation.update(search.best_total()) {
            return Ok(StopReason::Stagnation);
        }
    }
    Ok(StopReason::MaxIterations)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tenure_bounds_length() {
        let mut t = TabuList::new(3);
        for i in 0..10 {
            t.push(Move::Add(i));
            assert!(t.len() <= 3);
        }
        assert!(t.is_tabu(Move::Remove(9)));
        assert!(t.is_tabu(Move::Swap { out: 1, inn: 7 }));
        assert!(!t.is_tabu(Move::Add(6)));
    }

    #[test]
    fn swap_marks_both_indices() {
        let mut t = TabuList::new(2);
        t.push(Move::Swap { out: 4, inn: 5 });
        assert!(t.is_tabu(Move::Add(4)));
        assert!(t.is_tabu(Move::Add(5)));
    }
}
