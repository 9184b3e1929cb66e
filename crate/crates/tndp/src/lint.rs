//! Data lint for network and demand files.

use serde::Serialize;
use tndp_core::network::build_candidates;
use tndp_core::{OdMatrix, RoadNetwork};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lint {
    pub node_count: usize,
    pub edge_count: usize,
    pub candidate_count: usize,
    pub components: usize,
    pub demand_total: f64,
    pub od_pairs: usize,
    pub warnings: Vec<String>,
    pub errors: Vec<String>,
}

impl Lint {
    pub fn is_clean(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Component label per node (0-based), labels dense from 0.
fn components(net: &RoadNetwork) -> Vec<usize> {
    let adj = net.adjacency();
    let mut label = vec![usize::MAX; adj.len()];
    let mut next = 0;
    for start in 0..adj.len() {
        if label[start] != usize::MAX {
            continue;
        }
        label[start] = next;
        let mut stack = vec![start];
        while let Some(a) = stack.pop() {
            for &(b, _) in &adj[a] {
                if label[b] == usize::MAX {
                    label[b] = next;
                    stack.push(b);
                }
            }
        }
        next += 1;
    }
    label
}

/// Checks that parse cleanly can still make a data set unusable.
pub fn lint(net: &RoadNetwork, od: &OdMatrix) -> Lint {
    let mut warnings = Vec::new();
    let mut errors = Vec::new();
    let label = components(net);
    let component_count = label.iter().copied().max().map_or(0, |m| m + 1);

    for node in net.nodes() {
        if net.degree(node.id) == 0 {
            warnings.push(format!("node {} has no edges", node.id));
        }
    }
    if od.size() != net.node_count() {
        errors.push(format!("demand covers {} nodes, network has {}", od.size(), net.node_count()));
    } else {
        let n = od.size() as u32;
        for o in 1..=n {
            for d in 1..=n {
                if od.get(o, d) > 0.0 && label[o as usize - 1] != label[d as usize - 1] {
                    errors.push(format!("demand {o}->{d} has no connecting path"));
                }
            }
        }
    }
    if od.total() == 0.0 {
        warnings.push("demand matrix is all zero".into());
    }
    Lint {
        node_count: net.node_count(),
        edge_count: net.edges().len(),
        candidate_count: build_candidates(net).len(),
        components: component_count,
        demand_total: od.total(),
        od_pairs: od.nonzero_count(),
        warnings,
        errors,
    }
}
