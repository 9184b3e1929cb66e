//! Great-circle distances and planar segment crossing tests.
//!
//! Crossing tests treat (lon, lat) as planar coordinates, which is adequate
//! for city-scale networks.

use libm::{asin, cos, sin, sqrt};

use crate::network::{Edge, EdgeKey, Node};

pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Haversine distance between two (lat, lon) pairs given in degrees.
pub fn haversine_deg(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dlat = p2 - p1;
    let dlon = (lon2 - lon1).to_radians();
    let s_lat = sin(dlat / 2.0);
    let s_lon = sin(dlon / 2.0);
    let h = s_lat * s_lat + cos(p1) * cos(p2) * s_lon * s_lon;
    2.0 * EARTH_RADIUS_KM * asin(sqrt(h.clamp(0.0, 1.0)))
}

pub fn haversine_km(a: &Node, b: &Node) -> f64 {
    haversine_deg(a.lat, a.lon, b.lat, b.lon)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn of(node: &Node) -> Self {
        Point { x: node.lon, y: node.lat }
    }
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// True when the open segments `p1p2` and `q1q2` cross at a single interior
/// point, or are collinear and overlap over a positive length.
///
/// An endpoint touching the other segment is not a crossing.
pub fn segments_cross(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let o1 = orient(p1, p2, q1);
    let o2 = orient(p1, p2, q2);
    let o3 = orient(q1, q2, p1);
    let o4 = orient(q1, q2, p2);
    if o1 == 0.0 && o2 == 0.0 && o3 == 0.0 && o4 == 0.0 {
        return collinear_overlap(p1, p2, q1, q2);
    }
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

fn collinear_overlap(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    // Project onto the dominant axis of the first segment.
    let use_x = (p2.x - p1.x).abs() >= (p2.y - p1.y).abs();
    let proj = |p: Point| if use_x { p.x } else { p.y };
    let (a0, a1) = min_max(proj(p1), proj(p2));
    let (b0, b1) = min_max(proj(q1), proj(q2));
    a0.max(b0) < a1.min(b1)
}

fn min_max(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Whether two network edges cross geometrically. Edges sharing an endpoint
/// node never count.
pub fn edges_cross(nodes: &[Node], a: &Edge, b: &Edge) -> bool {
    if a.u == b.u || a.u == b.v || a.v == b.u || a.v == b.v {
        return false;
    }
    let p = |id: u32| Point::of(&nodes[id as usize - 1]);
    segments_cross(p(a.u), p(a.v), p(b.u), p(b.v))
}

/// Number of distinct unordered edge pairs `{a, b}`, `a` from `edges_a` and
/// `b` from `edges_b`, whose segments cross.
pub fn segment_intersections(nodes: &[Node], edges_a: &[Edge], edges_b: &[Edge]) -> usize {
    let mut pairs: alloc::collections::BTreeSet<(EdgeKey, EdgeKey)> = Default::default();
    for a in edges_a {
        for b in edges_b {
            if edges_cross(nodes, a, b) {
                let (ka, kb) = (a.key(), b.key());
                pairs.insert(if ka <= kb { (ka, kb) } else { (kb, ka) });
            }
        }
    }
    pairs.len()
}
