#![allow(dead_code)]

use std::fs;
use std::path::Path;

use tndp::problem::ProblemSpec;

/// A 3 x 3 lattice with only its outer ring built, written as CSV files.
pub fn write_ring(dir: &Path) -> ProblemSpec {
    let mut nodes = String::from("id,lat,lon,name\n");
    for r in 0..3 {
        for c in 0..3 {
            nodes.push_str(&format!("{},{},{},n{}\n", r * 3 + c + 1, r as f64 * 0.01, c as f64 * 0.01, r * 3 + c + 1));
        }
    }
    let edges = "u,v\n1,2\n2,3\n3,6\n6,9\n9,8\n8,7\n7,4\n4,1\n";
    let od = "origin,dest,demand\n1,9,3\n9,1,3\n3,7,2\n7,3,2\n2,8,1\n4,6,1.5\n";
    let (n, e, o) = (dir.join("nodes.csv"), dir.join("edges.csv"), dir.join("od.csv"));
    fs::write(&n, nodes).unwrap();
    fs::write(&e, edges).unwrap();
    fs::write(&o, od).unwrap();
    ProblemSpec { budget_km: 3.5, nodes: Some(n), edges: Some(e), od: Some(o), ..ProblemSpec::default() }
}
