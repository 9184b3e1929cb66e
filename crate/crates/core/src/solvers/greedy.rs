//! Best-improvement construction: repeatedly add the affordable candidate
//! with the lowest objective, while that lowers the objective.

use super::moves::affordable;
use super::{Halt, Search, StopReason};
use crate::design::DesignVector;

pub(crate) fn run(search: &mut Search<'_, '_>) -> Result<StopReason, Halt> {
    let problem = search.problem();
    let c = problem.candidates();
    let mut y = DesignVector::empty();
    let mut f = search.eval(&y)?;
    loop {
        let options = affordable(problem, &y);
        if options.is_empty() {
            return Ok(StopReason::NothingFits);
        }
        search.iterations += 1;
        let mut best: Option<(usize, f64)> = None;
        for i in options {
            let fz = search.eval(&y.with(c, i))?;
            // Strict comparison keeps the lowest index among ties.
            if best.is_none_or(|(_, b)| fz < b) {
                best = Some((i, fz));
            }
        }
        match best {
            Some((i, fz)) if fz < f => {
                y = y.with(c, i);
                f = fz;
            }
            _ => return Ok(StopReason::NoImprovement),
        }
    }
}
