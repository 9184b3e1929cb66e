//! CSV formats for nodes, edges, demand and reference tables.
//!
//! - nodes: `id,lat,lon,name`, ids contiguous from 1.
//! - edges: `u,v[,length_km]`; missing lengths are haversine distances.
//! - demand: dense (`id,1,2,...,n` header, one row per origin) or triplets
//!   (`origin,dest,demand`).
//! - reference: `u,v,betweenness,volume`.
//!
//! Parse errors carry the source name and 1-based line number.

use std::fs;
use std::io::Write;
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Trim};
use tndp_core::geo::haversine_km;
use tndp_core::{Edge, EdgeKey, Node, OdMatrix, RoadNetwork};

use crate::error::{Error, Result};

/// One row of a published per-edge table.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ReferenceRow {
    pub u: u32,
    pub v: u32,
    pub betweenness: f64,
    pub volume: f64,
}

impl ReferenceRow {
    pub fn key(&self) -> EdgeKey {
        tndp_core::network::edge_key(self.u, self.v)
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

struct Table<'a> {
    origin: &'a str,
    header: StringRecord,
    rows: Vec<(u64, StringRecord)>,
}

fn table<'a>(text: &str, origin: &'a str) -> Result<Table<'a>> {
    let mut rdr = ReaderBuilder::new().trim(Trim::All).flexible(true).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| Error::parse(origin, 1, e.to_string()))?.clone();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::parse(origin, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(str::is_empty) {
            continue;
        }
        rows.push((line, rec));
    }
    if rows.is_empty() {
        return Err(Error::NoData(origin.to_string()));
    }
    Ok(Table { origin, header, rows })
}

impl Table<'_> {
    fn expect_header(&self, names: &[&str], optional: usize) -> Result<()> {
        let got: Vec<&str> = self.header.iter().collect();
        let required = &names[..names.len() - optional];
        let ok = got.len() >= required.len() && got.len() <= names.len() && got.iter().zip(names).all(|(g, n)| g == n);
        if ok {
            Ok(())
        } else {
            Err(Error::parse(
                self.origin,
                1,
                format!("expected header `{}`, found `{}`", names.join(","), got.join(",")),
            ))
        }
    }

    fn field<T: std::str::FromStr>(&self, line: u64, rec: &StringRecord, idx: usize, name: &str) -> Result<T> {
        let raw = rec.get(idx).ok_or_else(|| Error::parse(self.origin, line, format!("missing field `{name}`")))?;
        raw.parse().map_err(|_| Error::parse(self.origin, line, format!("invalid {name} `{raw}`")))
    }

    fn width(&self, line: u64, rec: &StringRecord, expected: usize) -> Result<()> {
        if rec.len() == expected {
            Ok(())
        } else {
            Err(Error::parse(self.origin, line, format!("expected {expected} fields, found {}", rec.len())))
        }
    }
}

pub fn parse_nodes(text: &str, origin: &str) -> Result<Vec<Node>> {
    let t = table(text, origin)?;
    t.expect_header(&["id", "lat", "lon", "name"], 0)?;
    let mut nodes = Vec::with_capacity(t.rows.len());
    for (i, (line, rec)) in t.rows.iter().enumerate() {
        t.width(*line, rec, 4)?;
        let id: u32 = t.field(*line, rec, 0, "id")?;
        if id as usize != i + 1 {
            return Err(Error::parse(origin, *line, format!("node id {id} out of sequence (expected {})", i + 1)));
        }
        let lat = t.field(*line, rec, 1, "lat")?;
        let lon = t.field(*line, rec, 2, "lon")?;
        let node = Node::new(id, lat, lon, &rec[3]).map_err(|e| Error::parse(origin, *line, e.to_string()))?;
        nodes.push(node);
    }
    Ok(nodes)
}

pub fn parse_edges(text: &str, origin: &str, nodes: &[Node]) -> Result<Vec<Edge>> {
    let t = table(text, origin)?;
    t.expect_header(&["u", "v", "length_km"], 1)?;
    let with_length = t.header.len() == 3;
    let n = nodes.len() as u32;
    let mut edges: Vec<Edge> = Vec::with_capacity(t.rows.len());
    for (line, rec) in &t.rows {
        t.width(*line, rec, t.header.len())?;
        let u: u32 = t.field(*line, rec, 0, "u")?;
        let v: u32 = t.field(*line, rec, 1, "v")?;
        for id in [u, v] {
            if id == 0 || id > n {
                return Err(Error::parse(origin, *line, format!("unknown node id {id}")));
            }
        }
        if u == v {
            return Err(Error::parse(origin, *line, format!("self-loop at node {u}")));
        }
        let key = tndp_core::network::edge_key(u, v);
        if edges.iter().any(|e| e.key() == key) {
            return Err(Error::parse(origin, *line, format!("duplicate edge {u}-{v}")));
        }
        let length_km = if with_length {
            let l: f64 = t.field(*line, rec, 2, "length_km")?;
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::parse(origin, *line, format!("length_km must be positive, found {l}")));
            }
            l
        } else {
            haversine_km(&nodes[u as usize - 1], &nodes[v as usize - 1])
        };
        edges.push(Edge::new(u, v, length_km));
    }
    Ok(edges)
}

fn check_demand(origin: &str, line: u64, value: f64) -> Result<f64> {
    if value >= 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::parse(origin, line, format!("demand must be non-negative and finite, found {value}")))
    }
}

/// Reads a dense or triplet demand table for `n` nodes.
pub fn parse_od(text: &str, origin: &str, n: usize) -> Result<OdMatrix> {
    let t = table(text, origin)?;
    let names: Vec<&str> = t.header.iter().collect();
    if names == ["origin", "dest", "demand"] {
        let mut d = vec![0.0; n * n];
        for (line, rec) in &t.rows {
            t.width(*line, rec, 3)?;
            let r: usize = t.field(*line, rec, 0, "origin")?;
            let s: usize = t.field(*line, rec, 1, "dest")?;
            for id in [r, s] {
                if id == 0 || id > n {
                    return Err(Error::parse(origin, *line, format!("unknown node id {id}")));
                }
            }
            let value = check_demand(origin, *line, t.field(*line, rec, 2, "demand")?)?;
            if r == s && value != 0.0 {
                return Err(Error::parse(origin, *line, "diagonal demand must be zero"));
            }
            d[(r - 1) * n + (s - 1)] += value;
        }
        return Ok(OdMatrix::new(n, d)?);
    }
    let ids_ok = names.len() == n + 1 && names[1..].iter().enumerate().all(|(i, h)| h.parse::<usize>() == Ok(i + 1));
    if !ids_ok {
        return Err(Error::parse(
            origin,
            1,
            format!("expected `origin,dest,demand` or a dense header with node ids 1..{n}"),
        ));
    }
    if t.rows.len() != n {
        let line = t.rows.last().map_or(1, |(l, _)| *l);
        return Err(Error::parse(origin, line, format!("expected {n} demand rows, found {}", t.rows.len())));
    }
    let mut d = Vec::with_capacity(n * n);
    for (i, (line, rec)) in t.rows.iter().enumerate() {
        t.width(*line, rec, n + 1)?;
        let id: usize = t.field(*line, rec, 0, "origin id")?;
        if id != i + 1 {
            return Err(Error::parse(origin, *line, format!("origin id {id} out of sequence (expected {})", i + 1)));
        }
        for s in 0..n {
            let value = check_demand(origin, *line, t.field(*line, rec, s + 1, "demand")?)?;
            if s == i && value != 0.0 {
                return Err(Error::parse(origin, *line, "diagonal demand must be zero"));
            }
            d.push(value);
        }
    }
    Ok(OdMatrix::new(n, d)?)
}

pub fn parse_reference(text: &str, origin: &str) -> Result<Vec<ReferenceRow>> {
    let t = table(text, origin)?;
    t.expect_header(&["u", "v", "betweenness", "volume"], 0)?;
    t.rows
        .iter()
        .map(|(line, rec)| {
            t.width(*line, rec, 4)?;
            Ok(ReferenceRow {
                u: t.field(*line, rec, 0, "u")?,
                v: t.field(*line, rec, 1, "v")?,
                betweenness: t.field(*line, rec, 2, "betweenness")?,
                volume: t.field(*line, rec, 3, "volume")?,
            })
        })
        .collect()
}

fn origin_of(path: &Path) -> String {
    path.display().to_string()
}

pub fn load_nodes(path: &Path) -> Result<Vec<Node>> {
    parse_nodes(&read_text(path)?, &origin_of(path))
}

pub fn load_network(nodes: &Path, edges: &Path) -> Result<RoadNetwork> {
    let nodes = load_nodes(nodes)?;
    let edges = parse_edges(&read_text(edges)?, &origin_of(edges), &nodes)?;
    Ok(RoadNetwork::new(nodes, edges)?)
}

pub fn load_od(path: &Path, n: usize) -> Result<OdMatrix> {
    parse_od(&read_text(path)?, &origin_of(path), n)
}

pub fn load_reference(path: &Path) -> Result<Vec<ReferenceRow>> {
    parse_reference(&read_text(path)?, &origin_of(path))
}

fn csv_io(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::io(path, std::io::Error::other(e))
}

pub fn write_nodes(path: &Path, nodes: &[Node]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_io(path))?;
    w.write_record(["id", "lat", "lon", "name"]).map_err(csv_io(path))?;
    for n in nodes {
        w.write_record([n.id.to_string(), n.lat.to_string(), n.lon.to_string(), n.name.clone()])
            .map_err(csv_io(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_edges(path: &Path, edges: &[Edge]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_io(path))?;
    w.write_record(["u", "v", "length_km"]).map_err(csv_io(path))?;
    for e in edges {
        w.write_record([e.u.to_string(), e.v.to_string(), e.length_km.to_string()]).map_err(csv_io(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Dense form.
pub fn write_od(path: &Path, od: &OdMatrix) -> Result<()> {
    let n = od.size();
    let mut w = csv::Writer::from_path(path).map_err(csv_io(path))?;
    let header: Vec<String> = std::iter::once("id".to_string()).chain((1..=n).map(|i| i.to_string())).collect();
    w.write_record(&header).map_err(csv_io(path))?;
    for r in 0..n {
        let row: Vec<String> =
            std::iter::once((r + 1).to_string()).chain(od.row(r).iter().map(|v| v.to_string())).collect();
        w.write_record(&row).map_err(csv_io(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Json { path: path.into(), source: e })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Convergence trace with a leading `#` line holding the run config.
pub fn write_trace(path: &Path, provenance: &str, trace: &[tndp_core::solvers::TracePoint]) -> Result<()> {
    let mut out = String::new();
    for line in provenance.lines() {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out.push_str("eval_count,best_objective\n");
    for p in trace {
        out.push_str(&format!("{},{}\n", p.evals, p.best));
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}
