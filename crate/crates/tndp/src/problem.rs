//! Problem definition files (JSON).
//!
//! ```json
//! {
//!   "budget_km": 100.0,
//!   "q": 0,
//!   "lambda": "auto",
//!   "assignment": { "fw_tolerance": 0.001 },
//!   "nodes": "nodes.csv", "edges": "edges.csv", "od": "od.csv"
//! }
//! ```
//!
//! Every key is optional; omitted data paths select the bundled Kinshasa
//! instance. Relative paths resolve against the file's directory. Unknown
//! keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tndp_core::{AssignmentConfig, DesignConfig, DesignProblem, Lambda, OdMatrix, RoadNetwork};

use crate::dataset;
use crate::error::{Error, Result};
use crate::io;

/// `"auto"` or a non-negative number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaSpec {
    Auto,
    Value(f64),
}

impl Serialize for LambdaSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            LambdaSpec::Auto => s.serialize_str("auto"),
            LambdaSpec::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for LambdaSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(LambdaSpec::Value(v)),
            Raw::Text(t) if t == "auto" => Ok(LambdaSpec::Auto),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("lambda must be \"auto\" or a number, got \"{t}\""))),
        }
    }
}

impl Default for LambdaSpec {
    fn default() -> Self {
        LambdaSpec::Auto
    }
}

impl std::str::FromStr for LambdaSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(LambdaSpec::Auto);
        }
        match s.parse::<f64>() {
            Ok(v) if v >= 0.0 && v.is_finite() => Ok(LambdaSpec::Value(v)),
            _ => Err(format!("lambda must be `auto` or a non-negative number, got `{s}`")),
        }
    }
}

impl From<LambdaSpec> for Lambda {
    fn from(l: LambdaSpec) -> Self {
        match l {
            LambdaSpec::Auto => Lambda::Auto,
            LambdaSpec::Value(v) => Lambda::Fixed(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemSpec {
    pub budget_km: f64,
    /// 1 penalizes edge crossings, 0 ignores them.
    pub q: u8,
    pub lambda: LambdaSpec,
    pub assignment: AssignmentConfig,
    pub nodes: Option<PathBuf>,
    pub edges: Option<PathBuf>,
    pub od: Option<PathBuf>,
}

impl Default for ProblemSpec {
    fn default() -> Self {
        ProblemSpec {
            budget_km: 100.0,
            q: 0,
            lambda: LambdaSpec::Auto,
            assignment: AssignmentConfig::default(),
            nodes: None,
            edges: None,
            od: None,
        }
    }
}

impl ProblemSpec {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = io::read_text(path)?;
        let mut spec: ProblemSpec =
            serde_json::from_str(&text).map_err(|e| Error::Json { path: path.into(), source: e })?;
        let dir = path.parent().unwrap_or(Path::new(""));
        for p in [&mut spec.nodes, &mut spec.edges, &mut spec.od].into_iter().flatten() {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.budget_km >= 0.0 && self.budget_km.is_finite()) {
            return Err(Error::Config(format!("budget must be a non-negative number, got {}", self.budget_km)));
        }
        if self.q > 1 {
            return Err(Error::Config(format!("q must be 0 or 1, got {}", self.q)));
        }
        if let LambdaSpec::Value(v) = self.lambda {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("lambda must be non-negative, got {v}")));
            }
        }
        let paths = [&self.nodes, &self.edges, &self.od].iter().filter(|p| p.is_some()).count();
        if paths != 0 && (self.nodes.is_none() || self.edges.is_none()) {
            return Err(Error::Config("nodes and edges must be given together".into()));
        }
        if self.nodes.is_some() && self.od.is_none() {
            return Err(Error::Config("a custom network needs its own demand file".into()));
        }
        self.assignment.validate()?;
        Ok(())
    }

    pub fn design_config(&self) -> DesignConfig {
        DesignConfig {
            budget_km: self.budget_km,
            penalize_crossings: self.q == 1,
            lambda: self.lambda.into(),
            assignment: self.assignment,
        }
    }

    /// Base network and demand, from files or the bundled instance.
    pub fn load_data(&self) -> Result<(RoadNetwork, OdMatrix)> {
        match (&self.nodes, &self.edges) {
            (Some(nodes), Some(edges)) => {
                let net = io::load_network(nodes, edges)?;
                let od_path = self.od.as_ref().ok_or_else(|| Error::Config("missing demand file".into()))?;
                let od = io::load_od(od_path, net.node_count())?;
                Ok((net, od))
            }
            _ => {
                let data = dataset::kinshasa()?;
                Ok((data.network, data.od))
            }
        }
    }

    pub fn build(&self) -> Result<DesignProblem> {
        self.validate()?;
        let (net, od) = self.load_data()?;
        Ok(DesignProblem::new(net, od, self.design_config())?)
    }
}
