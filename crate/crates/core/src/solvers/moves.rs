//! Design-level operators shared by the solvers.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::design::{DesignProblem, DesignVector};

/// A single step in the add/remove/swap neighbourhood.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    Add(usize),
    Remove(usize),
    Swap { out: usize, inn: usize },
}

impl Move {
    pub fn apply(self, problem: &DesignProblem, y: &DesignVector) -> DesignVector {
        let c = problem.candidates();
        match self {
            Move::Add(i) => y.with(c, i),
            Move::Remove(i) => y.without(c, i),
            Move::Swap { out, inn } => y.without(c, out).with(c, inn),
        }
    }

    /// Candidate indices whose status the move changes.
    pub fn touched(self) -> (usize, Option<usize>) {
        match self {
            Move::Add(i) | Move::Remove(i) => (i, None),
            Move::Swap { out, inn } => (out, Some(inn)),
        }
    }
}

/// Unselected candidates that still fit in the budget, ascending.
pub(crate) fn affordable(problem: &DesignProblem, y: &DesignVector) -> Vec<usize> {
    (0..problem.candidates().len()).filter(|&i| !y.contains(i) && problem.fits(y, i)).collect()
}

/// Drops the longest selected edges (higher index first among equal
/// lengths) until the design is within budget.
pub fn repair(problem: &DesignProblem, y: DesignVector) -> DesignVector {
    let budget = problem.budget_km();
    if y.cost_km() <= budget {
        return y;
    }
    let c = problem.candidates();
    let mut order: Vec<usize> = y.indices().to_vec();
    order.sort_by(|&a, &b| c.cost_km(b).total_cmp(&c.cost_km(a)).then(b.cmp(&a)));
    let mut excess = y.cost_km() - budget;
    let mut cut = 0;
    while cut < order.len() && excess > 0.0 {
        excess -= c.cost_km(order[cut]);
        cut += 1;
    }
    loop {
        let kept =
            DesignVector::from_indices(c, order[cut..].iter().copied()).expect("indices come from a valid design");
        // Rounding in the running total can leave the exact sum just over.
        if kept.cost_km() <= budget || cut == order.len() {
            return kept;
        }
        cut += 1;
    }
}

/// Adds affordable candidates in a random order until none fits.
pub fn random_feasible<R: Rng + ?Sized>(problem: &DesignProblem, rng: &mut R) -> DesignVector {
    let c = problem.candidates();
    let mut order: Vec<usize> = (0..c.len()).collect();
    order.shuffle(rng);
    let mut y = DesignVector::empty();
    for i in order {
        if problem.fits(&y, i) {
            y = y.with(c, i);
        }
    }
    y
}

/// Draws a feasible move uniformly among the move kinds available at `y`.
/// Returns `None` when no move of any kind is possible.
pub(crate) fn random_move<R: Rng + ?Sized>(problem: &DesignProblem, y: &DesignVector, rng: &mut R) -> Option<Move> {
    let c = problem.candidates();
    let adds = affordable(problem, y);
    let swap = if y.is_empty() {
        None
    } else {
        let out = y.indices()[rng.random_range(0..y.len())];
        let rest = y.without(c, out);
        let ins: Vec<usize> = (0..c.len()).filter(|&i| !y.contains(i) && problem.fits(&rest, i)).collect();
        (!ins.is_empty()).then(|| Move::Swap { out, inn: ins[rng.random_range(0..ins.len())] })
    };
    let mut kinds: Vec<u8> = Vec::with_capacity(3);
    if !adds.is_empty() {
        kinds.push(0);
    }
    if !y.is_empty() {
        kinds.push(1);
    }
    if swap.is_some() {
        kinds.push(2);
    }
    match *kinds.get(rng.random_range(0..kinds.len().max(1)))? {
        0 => Some(Move::Add(adds[rng.random_range(0..adds.len())])),
        1 => Some(Move::Remove(y.indices()[rng.random_range(0..y.len())])),
        _ => swap,
    }
}
