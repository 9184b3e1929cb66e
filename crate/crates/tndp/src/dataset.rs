//! The bundled Kinshasa instance: 30 junctions of the main arterial roads,
//! 34 road segments and a normalized 30 x 30 demand matrix, with published
//! per-edge betweenness and traffic volumes.

use tndp_core::{OdMatrix, RoadNetwork};

use crate::error::Result;
use crate::io::{self, ReferenceRow};

pub const NODES_CSV: &str = include_str!("../data/kinshasa_nodes.csv");
pub const EDGES_CSV: &str = include_str!("../data/kinshasa_edges.csv");
pub const OD_CSV: &str = include_str!("../data/kinshasa_od.csv");
pub const REFERENCE_CSV: &str = include_str!("../data/kinshasa_reference.csv");

#[derive(Debug, Clone)]
pub struct Dataset {
    pub network: RoadNetwork,
    pub od: OdMatrix,
    pub reference: Vec<ReferenceRow>,
}

pub fn kinshasa() -> Result<Dataset> {
    let nodes = io::parse_nodes(NODES_CSV, "kinshasa_nodes.csv")?;
    let edges = io::parse_edges(EDGES_CSV, "kinshasa_edges.csv", &nodes)?;
    let network = RoadNetwork::new(nodes, edges)?;
    let od = io::parse_od(OD_CSV, "kinshasa_od.csv", network.node_count())?;
    let reference = io::parse_reference(REFERENCE_CSV, "kinshasa_reference.csv")?;
    Ok(Dataset { network, od, reference })
}
