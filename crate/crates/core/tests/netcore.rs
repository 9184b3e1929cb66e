mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use tndp_core::centrality::edge_betweenness;
use tndp_core::design::{augment, crossings};
use tndp_core::geo::{haversine_km, segments_cross, Point};
use tndp_core::network::build_candidates;
use tndp_core::{Node, RoadNetwork, Weighting};

/// Betweenness by listing every simple path of every node pair.
fn enumerated_betweenness(net: &RoadNetwork, weighting: Weighting) -> Vec<f64> {
    let n = net.node_count();
    let adj = net.adjacency();
    let cost = |e: usize| match weighting {
        Weighting::Hops => 1.0,
        Weighting::Distance => net.edges()[e].length_km,
    };
    let mut scores = vec![0.0; net.edges().len()];
    for s in 0..n {
        for t in s + 1..n {
            let mut paths: Vec<(f64, Vec<usize>)> = Vec::new();
            let mut stack = vec![(s, vec![s], Vec::new(), 0.0)];
            while let Some((v, visited, edges, c)) = stack.pop() {
                if v == t {
                    paths.push((c, edges));
                    continue;
                }
                for &(w, e) in &adj[v] {
                    if !visited.contains(&w) {
                        let mut vis = visited.clone();
                        vis.push(w);
                        let mut es: Vec<usize> = edges.clone();
                        es.push(e);
                        stack.push((w, vis, es, c + cost(e)));
                    }
                }
            }
            let Some(best) = paths.iter().map(|p| p.0).min_by(f64::total_cmp) else { continue };
            let shortest: Vec<&Vec<usize>> = paths.iter().filter(|p| p.0 <= best + 1e-9).map(|p| &p.1).collect();
            for path in &shortest {
                for &e in path.iter() {
                    scores[e] += 1.0 / shortest.len() as f64;
                }
            }
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    scores.iter().map(|x| x / pairs).collect()
}

#[test]
fn betweenness_matches_path_enumeration() {
    for seed in 0..60u64 {
        let n = 3 + (seed % 5) as usize;
        let net = common::random_network(n, (seed % 4) as usize, seed);
        for weighting in [Weighting::Hops, Weighting::Distance] {
            let got = edge_betweenness(&net, weighting).scores;
            let want = enumerated_betweenness(&net, weighting);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-12, "seed {seed} {weighting:?}: {got:?} vs {want:?}");
            }
        }
    }
}

#[test]
fn tree_edges_score_side_products() {
    for seed in 0..20u64 {
        let n = 3 + (seed % 6) as usize;
        let net = common::random_network(n, 0, seed);
        let scores = edge_betweenness(&net, Weighting::Hops).scores;
        let adj = net.adjacency();
        for (i, e) in net.edges().iter().enumerate() {
            // Nodes reachable from u without crossing edge i.
            let mut seen = vec![false; n];
            let mut stack = vec![e.u as usize - 1];
            seen[e.u as usize - 1] = true;
            while let Some(v) = stack.pop() {
                for &(w, j) in &adj[v] {
                    if j != i && !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            let a = seen.iter().filter(|&&x| x).count() as f64;
            let want = a * (n as f64 - a) / (n * (n - 1) / 2) as f64;
            assert!((scores[i] - want).abs() < 1e-12);
        }
    }
}

#[test]
fn candidates_complete_the_graph() {
    for seed in 0..20u64 {
        let n = 2 + (seed % 9) as usize;
        let net = common::random_network(n, (seed % 5) as usize, seed);
        let cands = build_candidates(&net);
        let base: BTreeSet<_> = net.edges().iter().map(|e| e.key()).collect();
        let extra: BTreeSet<_> = cands.edges().iter().map(|e| e.key()).collect();
        assert!(base.is_disjoint(&extra));
        assert_eq!(base.len() + extra.len(), n * (n - 1) / 2);
        assert_eq!(extra.len(), cands.len());
        for e in cands.edges() {
            assert!(e.u < e.v);
            let d = haversine_km(&net.nodes()[e.u as usize - 1], &net.nodes()[e.v as usize - 1]);
            assert!((e.length_km - d).abs() < 1e-12);
        }
    }
}

#[test]
fn augmenting_one_candidate_adds_one_edge() {
    let p = common::toy_problem(6, 3, 1e6, true);
    for i in 0..p.candidates().len() {
        let y = p.design([i]).unwrap();
        let net = augment(&p, &y).unwrap();
        assert_eq!(net.edges().len(), p.base().edges().len() + 1);
        let e = p.candidates().get(i).unwrap();
        assert!(net.has_edge(e.v, e.u));
    }
    assert_eq!(crossings(&p, &p.design([]).unwrap()), 0);
}

fn node(lat: f64, lon: f64) -> Node {
    Node::new(1, lat, lon, "").unwrap()
}

proptest! {
    #[test]
    fn haversine_is_a_metric(
        a in (-60.0f64..60.0, -170.0f64..170.0),
        b in (-60.0f64..60.0, -170.0f64..170.0),
        c in (-60.0f64..60.0, -170.0f64..170.0),
    ) {
        let (a, b, c) = (node(a.0, a.1), node(b.0, b.1), node(c.0, c.1));
        let ab = haversine_km(&a, &b);
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - haversine_km(&b, &a)).abs() < 1e-9);
        prop_assert!(haversine_km(&a, &a) == 0.0);
        prop_assert!(haversine_km(&a, &c) <= ab + haversine_km(&b, &c) + 1e-9);
    }

    #[test]
    fn crossing_ignores_argument_order(
        p in prop::array::uniform8(-1.0f64..1.0),
    ) {
        let pt = |i: usize| Point { x: p[2 * i], y: p[2 * i + 1] };
        let (p1, p2, q1, q2) = (pt(0), pt(1), pt(2), pt(3));
        let r = segments_cross(p1, p2, q1, q2);
        prop_assert_eq!(r, segments_cross(q1, q2, p1, p2));
        prop_assert_eq!(r, segments_cross(p2, p1, q1, q2));
        prop_assert_eq!(r, segments_cross(p1, p2, q2, q1));
    }
}
