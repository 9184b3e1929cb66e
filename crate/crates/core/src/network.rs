//! Road graph, candidate edge set and origin-destination demand.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::NetworkError;
use crate::geo::haversine_km;

/// Unordered node pair, stored with the smaller id first.
pub type EdgeKey = (u32, u32);

pub fn edge_key(u: u32, v: u32) -> EdgeKey {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Node {
    /// 1-based, contiguous within a network.
    pub id: u32,
    pub lat: f64,
    pub lon: f64,
    pub name: String,
}

impl Node {
    pub fn new(id: u32, lat: f64, lon: f64, name: impl Into<String>) -> Result<Self, NetworkError> {
        let node = Node { id, lat, lon, name: name.into() };
        node.validate()?;
        Ok(node)
    }

    fn validate(&self) -> Result<(), NetworkError> {
        let ok = (-90.0..=90.0).contains(&self.lat) && (-180.0..=180.0).contains(&self.lon);
        if ok {
            Ok(())
        } else {
            Err(NetworkError::InvalidCoordinates { id: self.id, lat: self.lat, lon: self.lon })
        }
    }
}

/// Undirected road segment. `length_km` doubles as free-flow time and as
/// construction cost.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Edge {
    pub u: u32,
    pub v: u32,
    pub length_km: f64,
}

impl Edge {
    pub fn new(u: u32, v: u32, length_km: f64) -> Self {
        Edge { u, v, length_km }
    }

    pub fn key(&self) -> EdgeKey {
        edge_key(self.u, self.v)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RoadNetwork {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
}

impl RoadNetwork {
    /// Validates ids, coordinates, endpoints, lengths and edge uniqueness.
    pub fn new(nodes: Vec<Node>, edges: Vec<Edge>) -> Result<Self, NetworkError> {
        for (i, node) in nodes.iter().enumerate() {
            let expected = i as u32 + 1;
            if node.id != expected {
                return Err(NetworkError::NonContiguousIds { expected, found: node.id });
            }
            node.validate()?;
        }
        let n = nodes.len() as u32;
        let mut seen = BTreeSet::new();
        for e in &edges {
            if e.u == e.v {
                return Err(NetworkError::SelfLoop(e.u));
            }
            if e.u == 0 || e.v == 0 || e.u > n || e.v > n {
                return Err(NetworkError::UnknownNode { u: e.u, v: e.v });
            }
            if !(e.length_km > 0.0 && e.length_km.is_finite()) {
                return Err(NetworkError::InvalidLength { u: e.u, v: e.v, length: e.length_km });
            }
            if !seen.insert(e.key()) {
                return Err(NetworkError::DuplicateEdge { u: e.u, v: e.v });
            }
        }
        Ok(RoadNetwork { nodes, edges })
    }

    /// Builds a network whose edge lengths are the haversine distances
    /// between endpoints.
    pub fn from_pairs(nodes: Vec<Node>, pairs: &[(u32, u32)]) -> Result<Self, NetworkError> {
        let n = nodes.len() as u32;
        let mut edges = Vec::with_capacity(pairs.len());
        for &(u, v) in pairs {
            if u == 0 || v == 0 || u > n || v > n {
                return Err(NetworkError::UnknownNode { u, v });
            }
            let length = haversine_km(&nodes[u as usize - 1], &nodes[v as usize - 1]);
            edges.push(Edge::new(u, v, length));
        }
        RoadNetwork::new(nodes, edges)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, id: u32) -> Option<&Node> {
        self.nodes.get((id as usize).checked_sub(1)?)
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        let key = edge_key(u, v);
        self.edges.iter().any(|e| e.key() == key)
    }

    pub fn edge_index(&self, u: u32, v: u32) -> Option<usize> {
        let key = edge_key(u, v);
        self.edges.iter().position(|e| e.key() == key)
    }

    /// Haversine distance between two nodes of this network.
    pub fn distance_km(&self, u: u32, v: u32) -> f64 {
        haversine_km(&self.nodes[u as usize - 1], &self.nodes[v as usize - 1])
    }

    /// A copy of this network with `extra` appended after the existing edges.
    pub fn augmented<'a>(&self, extra: impl IntoIterator<Item = &'a Edge>) -> Result<Self, NetworkError> {
        let mut edges = self.edges.clone();
        edges.extend(extra.into_iter().copied());
        RoadNetwork::new(self.nodes.clone(), edges)
    }

    /// Per node (0-based), the list of `(neighbor index, edge index)`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = alloc::vec![Vec::new(); self.nodes.len()];
        for (i, e) in self.edges.iter().enumerate() {
            let (a, b) = (e.u as usize - 1, e.v as usize - 1);
            adj[a].push((b, i));
            adj[b].push((a, i));
        }
        adj
    }

    pub fn degree(&self, id: u32) -> usize {
        self.edges.iter().filter(|e| e.u == id || e.v == id).count()
    }
}

/// Edges absent from the base network, in `(u, v)` order with `u < v`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CandidateSet {
    candidates: Vec<Edge>,
}

impl CandidateSet {
    pub fn build(net: &RoadNetwork) -> Self {
        let n = net.node_count() as u32;
        let existing: BTreeSet<EdgeKey> = net.edges().iter().map(Edge::key).collect();
        let mut candidates = Vec::new();
        for u in 1..=n {
            for v in u + 1..=n {
                if !existing.contains(&(u, v)) {
                    candidates.push(Edge::new(u, v, net.distance_km(u, v)));
                }
            }
        }
        CandidateSet { candidates }
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&Edge> {
        self.candidates.get(index)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.candidates
    }

    pub fn cost_km(&self, index: usize) -> f64 {
        self.candidates[index].length_km
    }

    pub fn index_of(&self, u: u32, v: u32) -> Option<usize> {
        let key = edge_key(u, v);
        self.candidates.binary_search_by(|e| e.key().cmp(&key)).ok()
    }
}

pub fn build_candidates(net: &RoadNetwork) -> CandidateSet {
    CandidateSet::build(net)
}

/// Dense origin-destination demand, row-major by 1-based node id.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OdMatrix {
    n: usize,
    demand: Vec<f64>,
}

impl OdMatrix {
    /// Diagonal entries are forced to zero; negative or non-finite cells are
    /// rejected.
    pub fn new(n: usize, mut demand: Vec<f64>) -> Result<Self, NetworkError> {
        if demand.len() != n * n {
            return Err(NetworkError::DemandShape { expected: n, found: demand.len() });
        }
        for (i, d) in demand.iter_mut().enumerate() {
            let (r, s) = (i / n, i % n);
            if !(d.is_finite() && *d >= 0.0) {
                return Err(NetworkError::InvalidDemand { origin: r as u32 + 1, dest: s as u32 + 1, value: *d });
            }
            if r == s {
                *d = 0.0;
            }
        }
        Ok(OdMatrix { n, demand })
    }

    pub fn zeros(n: usize) -> Self {
        OdMatrix { n, demand: alloc::vec![0.0; n * n] }
    }

    pub fn from_triplets(n: usize, triplets: &[(u32, u32, f64)]) -> Result<Self, NetworkError> {
        let mut demand = alloc::vec![0.0; n * n];
        for &(r, s, d) in triplets {
            if r == 0 || s == 0 || r as usize > n || s as usize > n {
                return Err(NetworkError::UnknownNode { u: r, v: s });
            }
            demand[(r as usize - 1) * n + (s as usize - 1)] += d;
        }
        OdMatrix::new(n, demand)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Demand from node `origin` to node `dest` (1-based ids).
    pub fn get(&self, origin: u32, dest: u32) -> f64 {
        self.demand[(origin as usize - 1) * self.n + (dest as usize - 1)]
    }

    pub fn row(&self, origin_index: usize) -> &[f64] {
        &self.demand[origin_index * self.n..(origin_index + 1) * self.n]
    }

    pub fn total(&self) -> f64 {
        self.demand.iter().sum()
    }

    pub fn nonzero_count(&self) -> usize {
        self.demand.iter().filter(|&&d| d > 0.0).count()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        OdMatrix { n: self.n, demand: self.demand.iter().map(|d| d * factor).collect() }
    }
}

/// Passenger-car units from a passenger count split across vehicle types.
///
/// Each vehicle type carries `trip_shares[i]` of the `passengers` with
/// `occupants[i]` people per vehicle, contributing
/// `trip_shares[i] * passengers / occupants[i]` vehicles.
pub fn pcu_convert(passengers: f64, occupants: &[f64], trip_shares: &[f64]) -> Result<f64, NetworkError> {
    if occupants.len() != trip_shares.len() {
        return Err(NetworkError::PcuLengthMismatch { occupants: occupants.len(), shares: trip_shares.len() });
    }
    if let Some(&bad) = occupants.iter().find(|&&o| !(o > 0.0)) {
        return Err(NetworkError::PcuOccupants(bad));
    }
    Ok(occupants.iter().zip(trip_shares).map(|(occ, share)| share * passengers / occ).sum())
}
