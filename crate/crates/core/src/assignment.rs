//! User-equilibrium traffic assignment.
//!
//! Link travel time follows the BPR form `t(x) = d (1 + alpha x^4)` with
//! capacity normalized to one demand unit. The equilibrium is the minimizer
//! of the Beckmann potential `sum_a int_0^{x_a} t_a(w) dw`, found here with
//! the link-based Frank-Wolfe method: all-or-nothing loading on current
//! shortest paths gives the descent target, an exact line search picks the
//! step.
//!
//! Undirected road edges are expanded into two opposing arcs of equal
//! length. Congestion is per arc; reported edge flows add both directions.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::AssignmentError;
use crate::network::{Edge, OdMatrix, RoadNetwork};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct AssignmentConfig {
    /// BPR coefficient.
    pub alpha: f64,
    /// Stop once the relative gap falls to this value.
    pub fw_tolerance: f64,
    pub fw_max_iters: usize,
    /// Width of the final bracket in the step-size bisection.
    pub line_search_tol: f64,
    /// How the descent target is built from all-or-nothing solutions.
    pub direction: Direction,
    /// Keep per-origin arc flows in the result.
    pub track_origin_flows: bool,
}

/// Frank-Wolfe target rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Direction {
    /// The all-or-nothing solution itself.
    Plain,
    /// Mixed with the previous target to be conjugate to the last direction.
    Conjugate,
    /// Mixed with the two previous targets (conjugate to both last directions).
    #[default]
    Biconjugate,
}

impl Default for AssignmentConfig {
    fn default() -> Self {
        AssignmentConfig {
            alpha: 0.15,
            fw_tolerance: 1e-3,
            fw_max_iters: 200,
            line_search_tol: 1e-6,
            direction: Direction::default(),
            track_origin_flows: false,
        }
    }
}

impl AssignmentConfig {
    pub fn validate(&self) -> Result<(), AssignmentError> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(AssignmentError::InvalidConfig("alpha must be non-negative"));
        }
        if !(self.fw_tolerance > 0.0) {
            return Err(AssignmentError::InvalidConfig("fw_tolerance must be positive"));
        }
        if !(self.line_search_tol > 0.0 && self.line_search_tol < 1.0) {
            return Err(AssignmentError::InvalidConfig("line_search_tol must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// `d (1 + alpha x^4)`.
#[inline]
pub fn bpr_time(length_km: f64, flow: f64, alpha: f64) -> f64 {
    let x2 = flow * flow;
    length_km * (1.0 + alpha * x2 * x2)
}

/// `int_0^x bpr_time(d, w, alpha) dw = d (x + alpha x^5 / 5)`.
#[inline]
pub fn bpr_integral(length_km: f64, flow: f64, alpha: f64) -> f64 {
    let x2 = flow * flow;
    length_km * flow * (1.0 + alpha * x2 * x2 / 5.0)
}

/// `sum_a x_a t_a(x_a)`.
pub fn total_travel_time(lengths: &[f64], flows: &[f64], alpha: f64) -> f64 {
    lengths.iter().zip(flows).map(|(&d, &x)| x * bpr_time(d, x, alpha)).sum()
}

pub fn beckmann(lengths: &[f64], flows: &[f64], alpha: f64) -> f64 {
    lengths.iter().zip(flows).map(|(&d, &x)| bpr_integral(d, x, alpha)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub length: f64,
}

/// Directed graph over 0-based node indices. Arcs are stored sorted by
/// `(from, to)`, insertion order breaking ties, so a lower arc index is the
/// lexicographically smaller arc.
#[derive(Debug, Clone)]
pub struct TrafficGraph {
    n: usize,
    arcs: Vec<Arc>,
    out_start: Vec<usize>,
    lengths: Vec<f64>,
    /// Source edge of each arc when built from a road network.
    arc_edge: Vec<usize>,
    edge_count: usize,
}

impl TrafficGraph {
    /// Arbitrary directed arcs; parallel arcs are allowed.
    pub fn from_arcs(n: usize, arcs: &[(usize, usize, f64)]) -> Self {
        let tagged: Vec<(Arc, usize)> =
            arcs.iter().enumerate().map(|(i, &(from, to, length))| (Arc { from, to, length }, i)).collect();
        Self::build(n, tagged, arcs.len())
    }

    /// Two opposing arcs per undirected edge.
    pub fn from_network(net: &RoadNetwork) -> Self {
        Self::from_edges(net.node_count(), net.edges().iter())
    }

    /// Two opposing arcs per undirected edge; edge endpoints are 1-based
    /// node ids in `1..=n`.
    pub fn from_edges<'a>(n: usize, edges: impl IntoIterator<Item = &'a Edge>) -> Self {
        let mut tagged = Vec::new();
        let mut count = 0;
        for (i, e) in edges.into_iter().enumerate() {
            let (u, v) = (e.u as usize - 1, e.v as usize - 1);
            tagged.push((Arc { from: u, to: v, length: e.length_km }, i));
            tagged.push((Arc { from: v, to: u, length: e.length_km }, i));
            count += 1;
        }
        Self::build(n, tagged, count)
    }

    fn build(n: usize, mut tagged: Vec<(Arc, usize)>, edge_count: usize) -> Self {
        tagged.sort_by(|(a, i), (b, j)| (a.from, a.to, *i).cmp(&(b.from, b.to, *j)));
        let mut out_start = vec![0; n + 1];
        for (a, _) in &tagged {
            out_start[a.from + 1] += 1;
        }
        for i in 0..n {
            out_start[i + 1] += out_start[i];
        }
        let lengths = tagged.iter().map(|(a, _)| a.length).collect();
        let arc_edge = tagged.iter().map(|&(_, e)| e).collect();
        let arcs = tagged.into_iter().map(|(a, _)| a).collect();
        TrafficGraph { n, arcs, out_start, lengths, arc_edge, edge_count }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc_lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// Index of the road edge (or input arc) each arc came from.
    pub fn arc_source(&self) -> &[usize] {
        &self.arc_edge
    }

    fn out_arcs(&self, v: usize) -> core::ops::Range<usize> {
        self.out_start[v]..self.out_start[v + 1]
    }

    /// Sums arc quantities back onto their source edges.
    pub fn fold_to_edges(&self, arc_values: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.edge_count];
        for (a, &x) in arc_values.iter().enumerate() {
            out[self.arc_edge[a]] += x;
        }
        out
    }
}

/// Single-source shortest paths under given arc times.
#[derive(Debug, Clone, PartialEq)]
pub struct ShortestPathTree {
    pub origin: usize,
    /// `f64::INFINITY` for unreachable nodes.
    pub cost: Vec<f64>,
    /// Arc entering each node on its shortest path; `None` at the origin and
    /// at unreachable nodes.
    pub pred_arc: Vec<Option<usize>>,
    /// Nodes in the order they were settled (non-decreasing cost).
    pub settled: Vec<usize>,
}

impl ShortestPathTree {
    pub fn is_reachable(&self, v: usize) -> bool {
        self.cost[v].is_finite()
    }
}

#[derive(Clone, Copy)]
struct QueueItem {
    cost: f64,
    node: usize,
}

impl PartialEq for QueueItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for QueueItem {}
impl PartialOrd for QueueItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for QueueItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.cost.total_cmp(&self.cost).then_with(|| other.node.cmp(&self.node))
    }
}

struct DijkstraScratch {
    cost: Vec<f64>,
    pred: Vec<usize>,
    done: Vec<bool>,
    settled: Vec<usize>,
    heap: BinaryHeap<QueueItem>,
}

const NO_ARC: usize = usize::MAX;

impl DijkstraScratch {
    fn new(n: usize) -> Self {
        DijkstraScratch {
            cost: vec![f64::INFINITY; n],
            pred: vec![NO_ARC; n],
            done: vec![false; n],
            settled: Vec::with_capacity(n),
            heap: BinaryHeap::with_capacity(n),
        }
    }

    /// Equal-cost labels keep the lower arc index.
    fn run(&mut self, g: &TrafficGraph, times: &[f64], origin: usize) {
        self.cost.fill(f64::INFINITY);
        self.pred.fill(NO_ARC);
        self.done.fill(false);
        self.settled.clear();
        self.heap.clear();
        self.cost[origin] = 0.0;
        self.heap.push(QueueItem { cost: 0.0, node: origin });
        while let Some(QueueItem { cost, node: v }) = self.heap.pop() {
            if self.done[v] || cost > self.cost[v] {
                continue;
            }
            self.done[v] = true;
            self.settled.push(v);
            for a in g.out_arcs(v) {
                let w = g.arcs[a].to;
                if self.done[w] {
                    continue;
                }
                let nc = cost + times[a];
                if nc < self.cost[w] {
                    self.cost[w] = nc;
                    self.pred[w] = a;
                    self.heap.push(QueueItem { cost: nc, node: w });
                } else if nc == self.cost[w] && a < self.pred[w] {
                    self.pred[w] = a;
                }
            }
        }
    }
}

/// Exact single-source shortest paths on `g` with arc costs `times`.
pub fn shortest_path_costs(g: &TrafficGraph, times: &[f64], origin: usize) -> ShortestPathTree {
    let mut sc = DijkstraScratch::new(g.n);
    sc.run(g, times, origin);
    ShortestPathTree {
        origin,
        cost: sc.cost.clone(),
        pred_arc: sc.pred.iter().map(|&a| (a != NO_ARC).then_some(a)).collect(),
        settled: sc.settled.clone(),
    }
}

/// Positive demand grouped by origin (0-based indices).
#[derive(Debug, Clone, PartialEq)]
pub struct DemandTable {
    origins: Vec<(usize, Vec<(usize, f64)>)>,
    n: usize,
}

impl DemandTable {
    pub fn from_matrix(od: &OdMatrix) -> Self {
        let n = od.size();
        let origins = (0..n)
            .filter_map(|r| {
                let dests: Vec<(usize, f64)> =
                    od.row(r).iter().enumerate().filter(|&(s, &d)| s != r && d > 0.0).map(|(s, &d)| (s, d)).collect();
                (!dests.is_empty()).then_some((r, dests))
            })
            .collect();
        DemandTable { origins, n }
    }

    pub fn is_empty(&self) -> bool {
        self.origins.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.n
    }
}

struct Loader {
    sp: DijkstraScratch,
    load: Vec<f64>,
}

impl Loader {
    fn new(n: usize) -> Self {
        Loader { sp: DijkstraScratch::new(n), load: vec![0.0; n] }
    }

    /// Loads all demand of one origin onto its shortest-path tree, adding
    /// into `flows`. Returns `(origin, dest)` of the first unreachable
    /// destination.
    fn load_origin(
        &mut self,
        g: &TrafficGraph,
        times: &[f64],
        origin: usize,
        dests: &[(usize, f64)],
        flows: &mut [f64],
    ) -> Result<(), AssignmentError> {
        self.sp.run(g, times, origin);
        self.load.fill(0.0);
        for &(s, d) in dests {
            if !self.sp.cost[s].is_finite() {
                return Err(AssignmentError::DisconnectedDemand { origin: origin as u32 + 1, dest: s as u32 + 1 });
            }
            self.load[s] += d;
        }
        // Reverse settle order visits every node after all its tree children.
        for &v in self.sp.settled.iter().rev() {
            let a = self.sp.pred[v];
            if a == NO_ARC || self.load[v] == 0.0 {
                continue;
            }
            flows[a] += self.load[v];
            self.load[g.arcs[a].from] += self.load[v];
        }
        Ok(())
    }
}

/// Loads every OD demand fully onto one current shortest path.
pub fn all_or_nothing(g: &TrafficGraph, od: &OdMatrix, times: &[f64]) -> Result<Vec<f64>, AssignmentError> {
    if od.size() != g.n {
        return Err(AssignmentError::SizeMismatch { demand: od.size(), network: g.n });
    }
    let table = DemandTable::from_matrix(od);
    let mut flows = vec![0.0; g.arcs.len()];
    let mut loader = Loader::new(g.n);
    for (r, dests) in &table.origins {
        loader.load_origin(g, times, *r, dests, &mut flows)?;
    }
    Ok(flows)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AssignmentResult {
    /// Per road edge (or per input arc for [`frank_wolfe_graph`]), both
    /// directions summed.
    pub link_flows: Vec<f64>,
    /// Per directed arc, in [`TrafficGraph`] order.
    pub arc_flows: Vec<f64>,
    pub total_travel_time: f64,
    pub beckmann_value: f64,
    pub relative_gap: f64,
    pub iterations: usize,
    /// Beckmann value after initialization and after every iteration.
    pub beckmann_trace: Vec<f64>,
    /// Per origin index, arc flows of that origin's demand. Only filled when
    /// `track_origin_flows` is set.
    pub origin_flows: Option<Vec<(usize, Vec<f64>)>>,
}

impl AssignmentResult {
    pub fn total_travel_time(&self) -> f64 {
        self.total_travel_time
    }
}

/// Equilibrium assignment of `od` on `net`.
pub fn frank_wolfe(
    net: &RoadNetwork,
    od: &OdMatrix,
    cfg: &AssignmentConfig,
) -> Result<AssignmentResult, AssignmentError> {
    let g = TrafficGraph::from_network(net);
    frank_wolfe_graph(&g, od, cfg)
}

/// Equilibrium assignment on an explicit directed graph.
pub fn frank_wolfe_graph(
    g: &TrafficGraph,
    od: &OdMatrix,
    cfg: &AssignmentConfig,
) -> Result<AssignmentResult, AssignmentError> {
    cfg.validate()?;
    if od.size() != g.n {
        return Err(AssignmentError::SizeMismatch { demand: od.size(), network: g.n });
    }
    let table = DemandTable::from_matrix(od);
    let m = g.arcs.len();
    let lengths = &g.lengths;
    let alpha = cfg.alpha;
    let tracking = cfg.track_origin_flows;

    let mut x = vec![0.0; m];
    let mut origin_x: Vec<Vec<f64>> = if tracking { vec![vec![0.0; m]; table.origins.len()] } else { Vec::new() };
    if table.is_empty() {
        return Ok(AssignmentResult {
            link_flows: g.fold_to_edges(&x),
            arc_flows: x,
            total_travel_time: 0.0,
            beckmann_value: 0.0,
            relative_gap: 0.0,
            iterations: 0,
            beckmann_trace: vec![0.0],
            origin_flows: tracking.then(Vec::new),
        });
    }

    let mut loader = Loader::new(g.n);
    let mut times = lengths.clone();
    let mut y = vec![0.0; m];
    let mut origin_y: Vec<Vec<f64>> = if tracking { vec![vec![0.0; m]; table.origins.len()] } else { Vec::new() };

    let mut aon = |times: &[f64], y: &mut [f64], origin_y: &mut [Vec<f64>]| -> Result<(), AssignmentError> {
        y.fill(0.0);
        for (k, (r, dests)) in table.origins.iter().enumerate() {
            if tracking {
                let oy = &mut origin_y[k];
                oy.fill(0.0);
                loader.load_origin(g, times, *r, dests, oy)?;
                y.iter_mut().zip(oy.iter()).for_each(|(a, b)| *a += b);
            } else {
                loader.load_origin(g, times, *r, dests, y)?;
            }
        }
        Ok(())
    };

    let mut target = vec![0.0; m];
    let mut older = vec![0.0; m];
    let mut origin_target = origin_y.clone();
    let mut origin_older = origin_y.clone();
    // Targets built so far, capped at 2, and the last step length.
    let mut history = 0usize;
    let mut last_step = 0.0;

    aon(&times, &mut x, &mut origin_x)?;
    let mut f_cur = beckmann(lengths, &x, alpha);
    let mut trace = vec![f_cur];
    let mut iterations = 0;
    let mut rel_gap;
    loop {
        for a in 0..m {
            times[a] = bpr_time(lengths[a], x[a], alpha);
        }
        aon(&times, &mut y, &mut origin_y)?;
        let mut gap = 0.0;
        for a in 0..m {
            gap += times[a] * (x[a] - y[a]);
        }
        rel_gap = if f_cur > 0.0 { gap.max(0.0) / f_cur } else { 0.0 };
        if rel_gap <= cfg.fw_tolerance || iterations >= cfg.fw_max_iters {
            break;
        }

        let weights = match cfg.direction {
            Direction::Plain => PLAIN,
            Direction::Conjugate if history >= 1 => conjugate_pair(conjugate_weight(lengths, &x, &y, &target, alpha)),
            Direction::Biconjugate if history >= 2 && last_step < 1.0 => {
                biconjugate_weights(lengths, &x, &y, &target, &older, last_step, alpha)
                    .unwrap_or_else(|| conjugate_pair(conjugate_weight(lengths, &x, &y, &target, alpha)))
            }
            Direction::Biconjugate if history >= 1 => conjugate_pair(conjugate_weight(lengths, &x, &y, &target, alpha)),
            _ => PLAIN,
        };
        combine(&mut target, &mut older, &y, weights);
        for ((t, o), oy) in origin_target.iter_mut().zip(origin_older.iter_mut()).zip(&origin_y) {
            combine(t, o, oy, weights);
        }
        history = (history + 1).min(2);
        let mut step = line_search(lengths, &x, &target, alpha, cfg.line_search_tol, f_cur);
        if step <= 0.0 && weights != PLAIN {
            // The mixed target is not a descent direction; restart from the
            // all-or-nothing solution.
            target.copy_from_slice(&y);
            for (t, oy) in origin_target.iter_mut().zip(&origin_y) {
                t.copy_from_slice(oy);
            }
            history = 1;
            step = line_search(lengths, &x, &target, alpha, cfg.line_search_tol, f_cur);
        }
        if step <= 0.0 {
            // No descent possible at this resolution.
            break;
        }
        last_step = step;
        for a in 0..m {
            x[a] = (x[a] + step * (target[a] - x[a])).max(0.0);
        }
        for (ox, os) in origin_x.iter_mut().zip(&origin_target) {
            for a in 0..m {
                ox[a] = (ox[a] + step * (os[a] - ox[a])).max(0.0);
            }
        }
        f_cur = beckmann(lengths, &x, alpha);
        trace.push(f_cur);
        iterations += 1;
    }

    Ok(AssignmentResult {
        link_flows: g.fold_to_edges(&x),
        total_travel_time: total_travel_time(lengths, &x, alpha),
        beckmann_value: f_cur,
        relative_gap: rel_gap,
        iterations,
        beckmann_trace: trace,
        origin_flows: tracking.then(|| table.origins.iter().map(|(r, _)| *r).zip(origin_x).collect()),
        arc_flows: x,
    })
}

/// Weight of the previous target in a conjugate Frank-Wolfe direction: the
/// new target `w * prev + (1 - w) * aon` is conjugate to the previous
/// direction under the (diagonal) Hessian of the Beckmann potential.
fn conjugate_weight(lengths: &[f64], x: &[f64], aon: &[f64], prev: &[f64], alpha: f64) -> f64 {
    const MAX_WEIGHT: f64 = 0.99;
    let (mut num, mut den) = (0.0, 0.0);
    for a in 0..x.len() {
        let h = 4.0 * alpha * lengths[a] * x[a] * x[a] * x[a];
        let dp = prev[a] - x[a];
        num += dp * h * (aon[a] - x[a]);
        den += dp * h * (aon[a] - prev[a]);
    }
    if den == 0.0 {
        return 0.0;
    }
    let w = num / den;
    if w.is_finite() {
        w.clamp(0.0, MAX_WEIGHT)
    } else {
        0.0
    }
}

const PLAIN: [f64; 3] = [1.0, 0.0, 0.0];

fn conjugate_pair(w: f64) -> [f64; 3] {
    [1.0 - w, w, 0.0]
}

/// Weights `[b0, b1, b2]` of the new target `b0 aon + b1 prev + b2 older`
/// conjugate to the last two directions, or `None` when degenerate.
fn biconjugate_weights(
    lengths: &[f64],
    x: &[f64],
    aon: &[f64],
    prev: &[f64],
    older: &[f64],
    last_step: f64,
    alpha: f64,
) -> Option<[f64; 3]> {
    let tau = last_step;
    let (mut mu_num, mut mu_den, mut nu_num, mut nu_den) = (0.0, 0.0, 0.0, 0.0);
    for a in 0..x.len() {
        let h = 4.0 * alpha * lengths[a] * x[a] * x[a] * x[a];
        let d1 = prev[a] - x[a];
        let d2 = tau * prev[a] + (1.0 - tau) * older[a] - x[a];
        let g = aon[a] - x[a];
        mu_num += d2 * h * g;
        mu_den += d2 * h * (older[a] - prev[a]);
        nu_num += d1 * h * g;
        nu_den += d1 * h * d1;
    }
    if mu_den == 0.0 || nu_den == 0.0 {
        return None;
    }
    let mu = (-mu_num / mu_den).max(0.0);
    let nu = (-nu_num / nu_den + mu * tau / (1.0 - tau)).max(0.0);
    let b0 = 1.0 / (1.0 + mu + nu);
    let w = [b0, nu * b0, mu * b0];
    w.iter().all(|v| v.is_finite()).then_some(w)
}

/// `older <- w0 aon + w1 target + w2 older`, then swaps so that `target`
/// holds the new mix and `older` the previous target.
fn combine(target: &mut [f64], older: &mut [f64], aon: &[f64], w: [f64; 3]) {
    for a in 0..aon.len() {
        older[a] = w[0] * aon[a] + w[1] * target[a] + w[2] * older[a];
    }
    target.swap_with_slice(older);
}

/// Step in `[0, 1]` minimizing the Beckmann potential along `x + s (y - x)`.
///
/// The directional derivative is monotone in `s`, so bisection on its sign
/// brackets the minimizer. The returned step never increases the potential.
fn line_search(lengths: &[f64], x: &[f64], y: &[f64], alpha: f64, tol: f64, f_cur: f64) -> f64 {
    let slope = |s: f64| -> f64 {
        let mut g = 0.0;
        for a in 0..x.len() {
            let d = y[a] - x[a];
            if d != 0.0 {
                g += bpr_time(lengths[a], x[a] + s * d, alpha) * d;
            }
        }
        g
    };
    let potential = |s: f64| -> f64 {
        let mut f = 0.0;
        for a in 0..x.len() {
            f += bpr_integral(lengths[a], (x[a] + s * (y[a] - x[a])).max(0.0), alpha);
        }
        f
    };
    if slope(0.0) >= 0.0 {
        return 0.0;
    }
    if slope(1.0) <= 0.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if slope(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mid = 0.5 * (lo + hi);
    if potential(mid) <= f_cur {
        mid
    } else {
        lo
    }
}
