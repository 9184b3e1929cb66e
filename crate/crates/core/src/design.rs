//! Upper-level problem: choose candidate edges under a km budget so that
//! equilibrium travel time (plus an optional crossing penalty) is minimal.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicUsize, Ordering};

use crate::assignment::{frank_wolfe_graph, AssignmentConfig, AssignmentResult, TrafficGraph};
use crate::error::DesignError;
use crate::geo::edges_cross;
use crate::network::{CandidateSet, Edge, OdMatrix, RoadNetwork};

/// Penalty weight per crossing.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Lambda {
    /// One tenth of the empty-design travel time.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DesignConfig {
    pub budget_km: f64,
    /// Penalize designs whose new edges cross other edges (`q = 1`).
    pub penalize_crossings: bool,
    pub lambda: Lambda,
    pub assignment: AssignmentConfig,
}

impl Default for DesignConfig {
    fn default() -> Self {
        DesignConfig {
            budget_km: 100.0,
            penalize_crossings: false,
            lambda: Lambda::Auto,
            assignment: AssignmentConfig::default(),
        }
    }
}

/// A set of selected candidate indices, kept sorted, with its total cost.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DesignVector {
    selected: Vec<usize>,
    cost_km: f64,
}

impl DesignVector {
    pub fn empty() -> Self {
        DesignVector::default()
    }

    /// Duplicates are dropped; out-of-range indices are rejected.
    pub fn from_indices(
        candidates: &CandidateSet,
        indices: impl IntoIterator<Item = usize>,
    ) -> Result<Self, DesignError> {
        let mut selected: Vec<usize> = indices.into_iter().collect();
        if let Some(&bad) = selected.iter().find(|&&i| i >= candidates.len()) {
            return Err(DesignError::InvalidIndex { index: bad, len: candidates.len() });
        }
        selected.sort_unstable();
        selected.dedup();
        Ok(Self::from_sorted(candidates, selected))
    }

    fn from_sorted(candidates: &CandidateSet, selected: Vec<usize>) -> Self {
        let cost_km = selected.iter().map(|&i| candidates.cost_km(i)).sum();
        DesignVector { selected, cost_km }
    }

    /// Bit `i` set selects candidate `i`.
    pub fn from_bits(candidates: &CandidateSet, bits: &[bool]) -> Self {
        let selected = bits.iter().enumerate().filter_map(|(i, &b)| b.then_some(i)).collect();
        Self::from_sorted(candidates, selected)
    }

    pub fn to_bits(&self, len: usize) -> Vec<bool> {
        let mut bits = vec![false; len];
        for &i in &self.selected {
            bits[i] = true;
        }
        bits
    }

    pub fn indices(&self) -> &[usize] {
        &self.selected
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.selected.binary_search(&index).is_ok()
    }

    pub fn cost_km(&self) -> f64 {
        self.cost_km
    }

    pub fn with(&self, candidates: &CandidateSet, index: usize) -> Self {
        let mut selected = self.selected.clone();
        if let Err(pos) = selected.binary_search(&index) {
            selected.insert(pos, index);
        }
        Self::from_sorted(candidates, selected)
    }

    pub fn without(&self, candidates: &CandidateSet, index: usize) -> Self {
        let mut selected = self.selected.clone();
        if let Ok(pos) = selected.binary_search(&index) {
            selected.remove(pos);
        }
        Self::from_sorted(candidates, selected)
    }

    pub fn edges<'a>(&'a self, candidates: &'a CandidateSet) -> impl Iterator<Item = &'a Edge> + 'a {
        self.selected.iter().map(move |&i| &candidates.edges()[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BudgetStatus {
    pub feasible: bool,
    pub cost_km: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ObjectiveValue {
    /// `travel_time + q * lambda * crossings`.
    pub total: f64,
    pub travel_time: f64,
    pub crossings: usize,
    pub feasible: bool,
    pub assignment: AssignmentResult,
}

/// Base network, candidates, demand and configuration, plus values derived
/// once per problem: the empty-design evaluation, the resolved penalty weight
/// and crossing tables.
#[derive(Debug, Clone)]
pub struct DesignProblem {
    base: RoadNetwork,
    candidates: CandidateSet,
    od: OdMatrix,
    config: DesignConfig,
    lambda: f64,
    baseline: ObjectiveValue,
    /// Per candidate, the number of base edges it crosses.
    base_crossings: Vec<u32>,
    /// Row-major bitset of crossing candidate pairs.
    pair_crossings: Vec<u64>,
    words_per_row: usize,
}

impl DesignProblem {
    pub fn new(base: RoadNetwork, od: OdMatrix, config: DesignConfig) -> Result<Self, DesignError> {
        if !(config.budget_km >= 0.0 && config.budget_km.is_finite()) {
            return Err(DesignError::InvalidConfig("budget_km must be non-negative"));
        }
        if let Lambda::Fixed(l) = config.lambda {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(DesignError::InvalidConfig("lambda must be non-negative"));
            }
        }
        config.assignment.validate()?;
        let candidates = CandidateSet::build(&base);
        let (base_crossings, pair_crossings, words_per_row) = crossing_tables(&base, &candidates);
        let graph = TrafficGraph::from_network(&base);
        let assignment = frank_wolfe_graph(&graph, &od, &config.assignment)?;
        let travel_time = assignment.total_travel_time;
        let lambda = match config.lambda {
            Lambda::Auto => travel_time / 10.0,
            Lambda::Fixed(l) => l,
        };
        let baseline = ObjectiveValue { total: travel_time, travel_time, crossings: 0, feasible: true, assignment };
        Ok(DesignProblem {
            base,
            candidates,
            od,
            config,
            lambda,
            baseline,
            base_crossings,
            pair_crossings,
            words_per_row,
        })
    }

    pub fn base(&self) -> &RoadNetwork {
        &self.base
    }

    pub fn candidates(&self) -> &CandidateSet {
        &self.candidates
    }

    pub fn od(&self) -> &OdMatrix {
        &self.od
    }

    pub fn config(&self) -> &DesignConfig {
        &self.config
    }

    pub fn budget_km(&self) -> f64 {
        self.config.budget_km
    }

    /// Resolved penalty weight per crossing.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Evaluation of the empty design (the unmodified base network).
    pub fn baseline(&self) -> &ObjectiveValue {
        &self.baseline
    }

    pub fn design(&self, indices: impl IntoIterator<Item = usize>) -> Result<DesignVector, DesignError> {
        DesignVector::from_indices(&self.candidates, indices)
    }

    /// Whether candidate `index` fits in what is left of the budget after `y`.
    /// Sums in the same order as [`DesignVector::with`], so the answer
    /// agrees with [`budget_check`] on the extended design.
    pub fn fits(&self, y: &DesignVector, index: usize) -> bool {
        if y.contains(index) {
            return y.cost_km <= self.config.budget_km;
        }
        let c = &self.candidates;
        let pos = y.selected.partition_point(|&i| i < index);
        let mut cost = 0.0;
        for &i in &y.selected[..pos] {
            cost += c.cost_km(i);
        }
        cost += c.cost_km(index);
        for &i in &y.selected[pos..] {
            cost += c.cost_km(i);
        }
        cost <= self.config.budget_km
    }

    fn check_indices(&self, y: &DesignVector) -> Result<(), DesignError> {
        match y.selected.last() {
            Some(&i) if i >= self.candidates.len() => {
                Err(DesignError::InvalidIndex { index: i, len: self.candidates.len() })
            }
            _ => Ok(()),
        }
    }

    fn crosses(&self, a: usize, b: usize) -> bool {
        self.pair_crossings[a * self.words_per_row + b / 64] >> (b % 64) & 1 == 1
    }
}

fn crossing_tables(base: &RoadNetwork, candidates: &CandidateSet) -> (Vec<u32>, Vec<u64>, usize) {
    let nodes = base.nodes();
    let c = candidates.edges();
    let words = c.len().div_ceil(64);
    let base_counts =
        c.iter().map(|e| base.edges().iter().filter(|b| edges_cross(nodes, e, b)).count() as u32).collect();
    let mut bits = vec![0u64; c.len() * words];
    for i in 0..c.len() {
        for j in i + 1..c.len() {
            if edges_cross(nodes, &c[i], &c[j]) {
                bits[i * words + j / 64] |= 1 << (j % 64);
                bits[j * words + i / 64] |= 1 << (i % 64);
            }
        }
    }
    (base_counts, bits, words)
}

/// Base network plus the selected candidates, appended in index order.
pub fn augment(problem: &DesignProblem, y: &DesignVector) -> Result<RoadNetwork, DesignError> {
    problem.check_indices(y)?;
    Ok(problem.base.augmented(y.edges(&problem.candidates))?)
}

/// Closed budget constraint: cost equal to the budget is feasible.
pub fn budget_check(problem: &DesignProblem, y: &DesignVector) -> BudgetStatus {
    BudgetStatus { feasible: y.cost_km <= problem.config.budget_km, cost_km: y.cost_km }
}

/// Crossing pairs involving at least one selected edge. Pairs among base
/// edges are not counted; pairs sharing an endpoint never cross.
pub fn crossings(problem: &DesignProblem, y: &DesignVector) -> usize {
    let sel = &y.selected;
    let mut count: usize = sel.iter().map(|&i| problem.base_crossings[i] as usize).sum();
    for (k, &a) in sel.iter().enumerate() {
        count += sel[k + 1..].iter().filter(|&&b| problem.crosses(a, b)).count();
    }
    count
}

/// Uncounted, uncached evaluation of a budget-feasible design.
pub fn evaluate(problem: &DesignProblem, y: &DesignVector) -> Result<ObjectiveValue, DesignError> {
    problem.check_indices(y)?;
    let status = budget_check(problem, y);
    if !status.feasible {
        return Err(DesignError::Infeasible { cost_km: status.cost_km, budget_km: problem.config.budget_km });
    }
    let n = problem.base.node_count();
    let graph = TrafficGraph::from_edges(n, problem.base.edges().iter().chain(y.edges(&problem.candidates)));
    let assignment = frank_wolfe_graph(&graph, &problem.od, &problem.config.assignment)?;
    let travel_time = assignment.total_travel_time;
    let crossings = crossings(problem, y);
    let penalty = if problem.config.penalize_crossings { problem.lambda * crossings as f64 } else { 0.0 };
    Ok(ObjectiveValue { total: travel_time + penalty, travel_time, crossings, feasible: true, assignment })
}

/// Sees every design handed to an [`Evaluator`], before any checks.
pub trait EvalObserver: Sync {
    fn observe(&self, problem: &DesignProblem, y: &DesignVector);
}

/// Saved [`Evaluator`] progress.
#[derive(Debug, Clone, Default)]
pub struct EvaluatorState {
    used: usize,
    cache: BTreeMap<Vec<usize>, ObjectiveValue>,
}

impl EvaluatorState {
    pub fn used(&self) -> usize {
        self.used
    }
}

/// Counted, memoized evaluation for one solver run.
///
/// Each cache miss consumes one unit of the evaluation budget; repeated
/// designs are served from the cache for free. Safe to share between threads.
pub struct Evaluator<'a> {
    problem: &'a DesignProblem,
    cap: usize,
    used: AtomicUsize,
    cache: spin::Mutex<BTreeMap<Vec<usize>, ObjectiveValue>>,
    observer: Option<&'a dyn EvalObserver>,
}

impl<'a> Evaluator<'a> {
    pub fn new(problem: &'a DesignProblem, cap: usize) -> Self {
        Evaluator { problem, cap, used: AtomicUsize::new(0), cache: spin::Mutex::new(BTreeMap::new()), observer: None }
    }

    pub fn with_observer(mut self, observer: &'a dyn EvalObserver) -> Self {
        self.observer = Some(observer);
        self
    }

    pub fn problem(&self) -> &'a DesignProblem {
        self.problem
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Evaluations consumed so far (cache misses).
    pub fn used(&self) -> usize {
        self.used.load(Ordering::SeqCst)
    }

    pub fn remaining(&self) -> usize {
        self.cap.saturating_sub(self.used())
    }

    pub fn is_cached(&self, y: &DesignVector) -> bool {
        self.cache.lock().contains_key(&y.selected)
    }

    /// Usage count and cache contents, for resuming later with [`Evaluator::resume`].
    pub fn snapshot(&self) -> EvaluatorState {
        EvaluatorState { used: self.used(), cache: self.cache.lock().clone() }
    }

    /// An evaluator that continues from `state` as if it had made those
    /// evaluations itself.
    pub fn resume(problem: &'a DesignProblem, cap: usize, state: EvaluatorState) -> Self {
        Evaluator {
            problem,
            cap,
            used: AtomicUsize::new(state.used),
            cache: spin::Mutex::new(state.cache),
            observer: None,
        }
    }

    pub fn evaluate(&self, y: &DesignVector) -> Result<ObjectiveValue, DesignError> {
        if let Some(obs) = self.observer {
            obs.observe(self.problem, y);
        }
        self.problem.check_indices(y)?;
        let status = budget_check(self.problem, y);
        if !status.feasible {
            return Err(DesignError::Infeasible { cost_km: status.cost_km, budget_km: self.problem.budget_km() });
        }
        if let Some(hit) = self.cache.lock().get(&y.selected) {
            return Ok(hit.clone());
        }
        self.used
            .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |u| (u < self.cap).then_some(u + 1))
            .map_err(|_| DesignError::EvalBudgetExhausted { cap: self.cap })?;
        let value = evaluate(self.problem, y)?;
        self.cache.lock().insert(y.selected.clone(), value.clone());
        Ok(value)
    }
}
