//! Edge betweenness centrality.
//!
//! Brandes accumulation over every source node. Each unordered node pair
//! contributes the fraction of its shortest paths that use an edge; totals
//! are scaled by `2 / (n (n - 1))` so every score lies in `[0, 1]`.
//! Unreachable pairs contribute nothing.

use alloc::collections::{BinaryHeap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::network::{EdgeKey, RoadNetwork};

/// How shortest paths are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Weighting {
    /// Edge length in km.
    Distance,
    /// Every edge counts 1.
    Hops,
}

impl Weighting {
    pub fn name(self) -> &'static str {
        match self {
            Weighting::Distance => "distance",
            Weighting::Hops => "hops",
        }
    }
}

/// One score per edge, indexed like `RoadNetwork::edges`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BetweennessScores {
    pub weighting: Weighting,
    pub scores: Vec<f64>,
}

impl BetweennessScores {
    pub fn mean(&self) -> f64 {
        if self.scores.is_empty() {
            0.0
        } else {
            self.scores.iter().sum::<f64>() / self.scores.len() as f64
        }
    }
}

const TIE_TOL: f64 = 1e-9;

#[derive(Clone, Copy)]
struct HeapItem {
    dist: f64,
    node: usize,
}

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on distance, then node index.
        other.dist.total_cmp(&self.dist).then_with(|| other.node.cmp(&self.node))
    }
}

struct SourceScratch {
    order: Vec<usize>,
    preds: Vec<Vec<(usize, usize)>>,
    sigma: Vec<f64>,
    dist: Vec<f64>,
    delta: Vec<f64>,
}

impl SourceScratch {
    fn new(n: usize) -> Self {
        SourceScratch {
            order: Vec::with_capacity(n),
            preds: vec![Vec::new(); n],
            sigma: vec![0.0; n],
            dist: vec![f64::INFINITY; n],
            delta: vec![0.0; n],
        }
    }

    fn reset(&mut self) {
        self.order.clear();
        self.preds.iter_mut().for_each(Vec::clear);
        self.sigma.fill(0.0);
        self.dist.fill(f64::INFINITY);
        self.delta.fill(0.0);
    }
}

fn bfs(adj: &[Vec<(usize, usize)>], s: usize, sc: &mut SourceScratch) {
    sc.sigma[s] = 1.0;
    sc.dist[s] = 0.0;
    let mut queue = VecDeque::from([s]);
    while let Some(v) = queue.pop_front() {
        sc.order.push(v);
        for &(w, e) in &adj[v] {
            if sc.dist[w].is_infinite() {
                sc.dist[w] = sc.dist[v] + 1.0;
                queue.push_back(w);
            }
            if sc.dist[w] == sc.dist[v] + 1.0 {
                sc.sigma[w] += sc.sigma[v];
                sc.preds[w].push((v, e));
            }
        }
    }
}

fn dijkstra(adj: &[Vec<(usize, usize)>], lengths: &[f64], s: usize, sc: &mut SourceScratch) {
    let mut settled = vec![false; adj.len()];
    sc.sigma[s] = 1.0;
    sc.dist[s] = 0.0;
    let mut heap = BinaryHeap::from([HeapItem { dist: 0.0, node: s }]);
    while let Some(HeapItem { dist, node: v }) = heap.pop() {
        if settled[v] || dist > sc.dist[v] {
            continue;
        }
        settled[v] = true;
        sc.order.push(v);
        for &(w, e) in &adj[v] {
            if settled[w] {
                continue;
            }
            let nd = sc.dist[v] + lengths[e];
            let cur = sc.dist[w];
            let tol = TIE_TOL * nd.abs().max(1.0);
            if nd < cur - tol {
                sc.dist[w] = nd;
                sc.sigma[w] = sc.sigma[v];
                sc.preds[w].clear();
                sc.preds[w].push((v, e));
                heap.push(HeapItem { dist: nd, node: w });
            } else if (nd - cur).abs() <= tol {
                sc.sigma[w] += sc.sigma[v];
                sc.preds[w].push((v, e));
            }
        }
    }
}

pub fn edge_betweenness(net: &RoadNetwork, weighting: Weighting) -> BetweennessScores {
    let n = net.node_count();
    let m = net.edges().len();
    let mut scores = vec![0.0; m];
    if n < 2 {
        return BetweennessScores { weighting, scores };
    }
    let adj = net.adjacency();
    let lengths: Vec<f64> = net.edges().iter().map(|e| e.length_km).collect();
    let mut sc = SourceScratch::new(n);
    for s in 0..n {
        sc.reset();
        match weighting {
            Weighting::Hops => bfs(&adj, s, &mut sc),
            Weighting::Distance => dijkstra(&adj, &lengths, s, &mut sc),
        }
        while let Some(w) = sc.order.pop() {
            let coeff = (1.0 + sc.delta[w]) / sc.sigma[w];
            for &(v, e) in &sc.preds[w] {
                let c = sc.sigma[v] * coeff;
                scores[e] += c;
                sc.delta[v] += c;
            }
        }
    }
    // Each unordered pair was counted from both ends.
    let scale = 1.0 / (n as f64 * (n as f64 - 1.0));
    scores.iter_mut().for_each(|x| *x *= scale);
    BetweennessScores { weighting, scores }
}

/// Outcome of comparing both weightings against reference scores.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WeightingChoice {
    pub selected: Weighting,
    pub max_dev_hops: f64,
    pub max_dev_distance: f64,
}

/// Picks the weighting whose scores deviate least (maximum absolute
/// difference) from `reference`. Reference edges missing from the network
/// are ignored. Ties favour hop counts.
pub fn select_weighting(net: &RoadNetwork, reference: &[(EdgeKey, f64)]) -> WeightingChoice {
    let dev = |w: Weighting| {
        let scores = edge_betweenness(net, w);
        reference
            .iter()
            .filter_map(|&((u, v), r)| net.edge_index(u, v).map(|i| (scores.scores[i] - r).abs()))
            .fold(0.0, f64::max)
    };
    let max_dev_hops = dev(Weighting::Hops);
    let max_dev_distance = dev(Weighting::Distance);
    let selected = if max_dev_distance < max_dev_hops { Weighting::Distance } else { Weighting::Hops };
    WeightingChoice { selected, max_dev_hops, max_dev_distance }
}
