//! Structural and equilibrium analysis of a base network.

use serde::Serialize;
use tndp_core::assignment::{frank_wolfe, AssignmentConfig};
use tndp_core::centrality::{edge_betweenness, select_weighting, WeightingChoice};
use tndp_core::stats::{pearson, spearman};
use tndp_core::{OdMatrix, RoadNetwork, Weighting};

use crate::error::Result;
use crate::io::ReferenceRow;

/// Weighting used when no reference table is available.
pub const DEFAULT_WEIGHTING: Weighting = Weighting::Hops;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeRow {
    pub u: u32,
    pub v: u32,
    pub length_km: f64,
    /// Under the selected weighting.
    pub betweenness: f64,
    pub betweenness_hops: f64,
    pub betweenness_distance: f64,
    pub flow: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_betweenness: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_volume: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Analysis {
    pub weighting: Weighting,
    /// Present when a reference table drove the choice.
    pub weighting_choice: Option<WeightingChoice>,
    pub node_count: usize,
    pub edge_count: usize,
    pub candidate_count: usize,
    pub total_travel_time: f64,
    pub fw_iterations: usize,
    pub relative_gap: f64,
    pub mean_betweenness: f64,
    /// Betweenness against equilibrium flow; `None` when undefined.
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
    pub edges: Vec<EdgeRow>,
}

pub fn analyze(
    net: &RoadNetwork,
    od: &OdMatrix,
    cfg: &AssignmentConfig,
    reference: Option<&[ReferenceRow]>,
) -> Result<Analysis> {
    let hops = edge_betweenness(net, Weighting::Hops);
    let distance = edge_betweenness(net, Weighting::Distance);
    let weighting_choice = reference.map(|rows| {
        let pairs: Vec<_> = rows.iter().map(|r| (r.key(), r.betweenness)).collect();
        select_weighting(net, &pairs)
    });
    let weighting = weighting_choice.as_ref().map_or(DEFAULT_WEIGHTING, |c| c.selected);
    let selected = if weighting == Weighting::Hops { &hops } else { &distance };
    let assignment = frank_wolfe(net, od, cfg)?;

    let edges: Vec<EdgeRow> = net
        .edges()
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let reference_row = reference.and_then(|rows| rows.iter().find(|r| r.key() == e.key()));
            EdgeRow {
                u: e.u,
                v: e.v,
                length_km: e.length_km,
                betweenness: selected.scores[i],
                betweenness_hops: hops.scores[i],
                betweenness_distance: distance.scores[i],
                flow: assignment.link_flows[i],
                reference_betweenness: reference_row.map(|r| r.betweenness),
                reference_volume: reference_row.map(|r| r.volume),
            }
        })
        .collect();
    let b: Vec<f64> = edges.iter().map(|r| r.betweenness).collect();
    let f: Vec<f64> = edges.iter().map(|r| r.flow).collect();
    Ok(Analysis {
        weighting,
        weighting_choice,
        node_count: net.node_count(),
        edge_count: net.edges().len(),
        candidate_count: tndp_core::network::build_candidates(net).len(),
        total_travel_time: assignment.total_travel_time,
        fw_iterations: assignment.iterations,
        relative_gap: assignment.relative_gap,
        mean_betweenness: selected.mean(),
        pearson: pearson(&b, &f).ok(),
        spearman: spearman(&b, &f).ok(),
        edges,
    })
}
