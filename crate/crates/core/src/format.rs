//! JSON instance, solution, and report files.
//!
//! Numbers are exact: integers are JSON integers, other rationals the string
//! `"p/q"`, and infinity the string `"inf"`. Serialization always writes every
//! field in a fixed order, so parsing and re-serializing a canonical file
//! reproduces it byte for byte.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::flow;
use crate::graph::{Graph, NodeAttrs};
use crate::instance::{Candidate, CostMode, Demand, SnaInstance, SslInstance};
use crate::numeric::{format_rational, parse_rational, Capacity, Cost, Extended, Rational};

/// An exact number or infinity as it appears in files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Num(pub Extended<Rational>);

impl Num {
    pub fn int(x: i64) -> Self {
        Num(Extended::Finite(Rational::from_integer(x)))
    }

    pub fn rational(x: Rational) -> Self {
        Num(Extended::Finite(x))
    }

    pub fn inf() -> Self {
        Num(Extended::Infinite)
    }

    pub fn from_capacity(c: Capacity) -> Self {
        Num(c.map(|x| Rational::from_integer(x as i64)))
    }

    fn to_count(self, path: &str, min: u64) -> Result<Capacity, Error> {
        match self.0 {
            Extended::Infinite => Ok(Extended::Infinite),
            Extended::Finite(x) if x.is_integer() && x.to_integer() >= min as i64 => {
                Ok(Extended::Finite(x.to_integer() as u64))
            }
            Extended::Finite(x) => Err(Error::format(
                path,
                format!("expected an integer >= {min} or \"inf\", found {}", format_rational(&x)),
            )),
        }
    }

    fn to_cost(self, path: &str) -> Result<Cost, Error> {
        match self.0 {
            Extended::Finite(x) if x < Rational::from_integer(0) => {
                Err(Error::format(path, "costs must be nonnegative"))
            }
            c => Ok(c),
        }
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Extended::Finite(x) => write!(f, "{}", format_rational(x)),
            Extended::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match &self.0 {
            Extended::Finite(x) if x.is_integer() => s.serialize_i64(x.to_integer()),
            _ => s.serialize_str(&self.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct NumVisitor;
        impl Visitor<'_> for NumVisitor {
            type Value = Num;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an integer, a string \"p/q\", or \"inf\"")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Num, E> {
                Ok(Num::int(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Num, E> {
                i64::try_from(v).map(Num::int).map_err(|_| E::custom("integer out of range"))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Num, E> {
                Err(E::custom(format!("floating-point number {v} not allowed; use \"p/q\"")))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Num, E> {
                if v.trim() == "inf" {
                    return Ok(Num::inf());
                }
                parse_rational(v).map(|x| Num(Extended::Finite(x))).map_err(E::custom)
            }
        }
        d.deserialize_any(NumVisitor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Ssl,
    Sna,
    Dsna,
    SslFlowBounds,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Ssl => "ssl",
            Kind::Sna => "sna",
            Kind::Dsna => "dsna",
            Kind::SslFlowBounds => "ssl-flow-bounds",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostModeRecord {
    Edge,
    Node,
}

fn default_cost() -> Num {
    Num::int(1)
}

fn default_inf() -> Num {
    Num::inf()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeRecord {
    #[serde(default)]
    pub label: String,
    #[serde(default = "default_cost")]
    pub c: Num,
    #[serde(default)]
    pub d: u64,
    #[serde(default = "default_inf")]
    pub p: Num,
    #[serde(default = "default_inf")]
    pub q: Num,
    #[serde(default = "default_inf")]
    pub b: Num,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub u: usize,
    pub v: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<Num>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateRecord {
    pub u: usize,
    pub v: usize,
    #[serde(default = "default_cost")]
    pub cost: Num,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandRecord {
    pub s: usize,
    pub v: usize,
    pub r: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_optimum: Option<Num>,
    #[serde(flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

/// One instance per file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub kind: Kind,
    pub directed: bool,
    pub nodes: Vec<NodeRecord>,
    #[serde(default)]
    pub edges: Vec<EdgeRecord>,
    #[serde(default)]
    pub candidates: Vec<CandidateRecord>,
    #[serde(default)]
    pub demands: Vec<DemandRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_mode: Option<CostModeRecord>,
    #[serde(default)]
    pub metadata: Metadata,
}

/// A parsed instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Problem {
    Ssl(SslInstance),
    Sna(SnaInstance),
}

fn label(v: usize) -> String {
    format!("v{v}")
}

fn json_error(e: serde_json::Error) -> Error {
    let text = e.to_string();
    let suffix = format!(" at line {} column {}", e.line(), e.column());
    let message = text.strip_suffix(&suffix).unwrap_or(&text).to_string();
    Error::format(format!("line {}, column {}", e.line(), e.column()), message)
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self, Error> {
        let file: InstanceFile = serde_json::from_str(text).map_err(json_error)?;
        file.to_problem()?;
        Ok(file)
    }

    /// Canonical text: pretty JSON with a trailing newline.
    pub fn to_canonical(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    /// Hex SHA-256 of the canonical text.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_canonical().as_bytes()))
    }

    pub fn from_ssl(ssl: &SslInstance) -> Self {
        let nodes = ssl
            .nodes
            .iter()
            .enumerate()
            .map(|(v, a)| NodeRecord {
                label: label(v),
                c: Num(a.cost),
                d: a.demand,
                p: Num::from_capacity(a.supply),
                q: Num::from_capacity(a.capacity),
                b: Num(a.flow_cost_bound),
            })
            .collect();
        let edges = ssl
            .graph
            .edges()
            .iter()
            .enumerate()
            .map(|(i, &(u, v))| EdgeRecord {
                u,
                v,
                cost: ssl.edge_costs.as_ref().map(|c| Num(Extended::Finite(c[i]))),
            })
            .collect();
        InstanceFile {
            kind: if ssl.has_flow_bounds() { Kind::SslFlowBounds } else { Kind::Ssl },
            directed: ssl.graph.is_directed(),
            nodes,
            edges,
            candidates: Vec::new(),
            demands: Vec::new(),
            cost_mode: None,
            metadata: Metadata::default(),
        }
    }

    pub fn from_sna(sna: &SnaInstance) -> Self {
        let nodes = (0..sna.node_count())
            .map(|v| NodeRecord {
                label: label(v),
                c: Num(sna.node_costs[v]),
                d: 0,
                p: Num::inf(),
                q: Num::from_capacity(sna.capacity[v]),
                b: Num::inf(),
            })
            .collect();
        InstanceFile {
            kind: Kind::Sna,
            directed: sna.is_directed(),
            nodes,
            edges: sna.graph.edges().iter().map(|&(u, v)| EdgeRecord { u, v, cost: None }).collect(),
            candidates: sna
                .candidates
                .iter()
                .map(|c| CandidateRecord { u: c.u, v: c.v, cost: Num(Extended::Finite(c.cost)) })
                .collect(),
            demands: sna.demands.iter().map(|d| DemandRecord { s: d.s, v: d.v, r: d.r }).collect(),
            cost_mode: Some(match sna.cost_mode {
                CostMode::Edge => CostModeRecord::Edge,
                CostMode::Node => CostModeRecord::Node,
            }),
            metadata: Metadata::default(),
        }
    }

    pub fn with_metadata(mut self, metadata: Metadata) -> Self {
        self.metadata = metadata;
        self
    }

    fn graph(&self) -> Result<Graph, Error> {
        let n = self.nodes.len();
        let mut g = Graph::new(n, self.directed);
        for (i, e) in self.edges.iter().enumerate() {
            check_index(&format!("edges[{i}].u"), e.u, n)?;
            check_index(&format!("edges[{i}].v"), e.v, n)?;
            g.add_edge(e.u, e.v)
                .map_err(|err| Error::format(format!("edges[{i}]"), err.to_string()))?;
        }
        Ok(g)
    }

    /// Resolves indices and checks every field.
    pub fn to_problem(&self) -> Result<Problem, Error> {
        if self.nodes.is_empty() {
            return Err(Error::format("nodes", "an instance needs at least one node"));
        }
        let g = self.graph()?;
        match self.kind {
            Kind::Ssl | Kind::SslFlowBounds => self.to_ssl(g).map(Problem::Ssl),
            Kind::Sna | Kind::Dsna => self.to_sna(g).map(Problem::Sna),
        }
    }

    fn to_ssl(&self, g: Graph) -> Result<SslInstance, Error> {
        for field in ["candidates", "demands"] {
            let present = if field == "candidates" { !self.candidates.is_empty() } else { !self.demands.is_empty() };
            if present {
                return Err(Error::format(field, format!("not allowed for kind {}", self.kind.name())));
            }
        }
        if self.cost_mode.is_some() {
            return Err(Error::format("cost_mode", format!("not allowed for kind {}", self.kind.name())));
        }
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for (v, r) in self.nodes.iter().enumerate() {
            let path = |f: &str| format!("nodes[{v}].{f}");
            let capacity = r.q.to_count(&path("q"), 1)?;
            let supply = r.p.to_count(&path("p"), 0)?;
            nodes.push(NodeAttrs {
                cost: r.c.to_cost(&path("c"))?,
                demand: r.d,
                capacity,
                supply,
                flow_cost_bound: r.b.to_cost(&path("b"))?,
            });
        }
        // A positive supply below the capacity is allowed by the flow model
        // but not by the instance definition.
        for (v, a) in nodes.iter().enumerate() {
            if let (Extended::Finite(q), Extended::Finite(p)) = (a.capacity, a.supply) {
                if q > p && p > 0 {
                    return Err(Error::format(format!("nodes[{v}].q"), format!("capacity {q} exceeds supply {p}")));
                }
            }
        }
        let mut ssl = SslInstance::new(g, nodes).map_err(|e| Error::format("nodes", e.to_string()))?;
        let costs: Vec<Option<Num>> = self.edges.iter().map(|e| e.cost).collect();
        match self.kind {
            Kind::SslFlowBounds => {
                let mut out = Vec::with_capacity(costs.len());
                for (i, c) in costs.iter().enumerate() {
                    let path = format!("edges[{i}].cost");
                    match c.map(|c| c.0) {
                        Some(Extended::Finite(x)) if x >= Rational::from_integer(0) => out.push(x),
                        Some(_) => return Err(Error::format(path, "edge costs must be finite and nonnegative")),
                        None => return Err(Error::format(path, "required for kind ssl-flow-bounds")),
                    }
                }
                ssl.edge_costs = Some(out);
            }
            _ => {
                if let Some(i) = costs.iter().position(Option::is_some) {
                    return Err(Error::format(format!("edges[{i}].cost"), "edge costs need kind ssl-flow-bounds"));
                }
                if let Some(v) = ssl.nodes.iter().position(|a| a.flow_cost_bound.is_finite()) {
                    return Err(Error::format(format!("nodes[{v}].b"), "flow-cost bounds need kind ssl-flow-bounds"));
                }
            }
        }
        Ok(ssl)
    }

    fn to_sna(&self, g: Graph) -> Result<SnaInstance, Error> {
        let n = self.nodes.len();
        let mut capacity = Vec::with_capacity(n);
        let mut node_costs = Vec::with_capacity(n);
        for (v, r) in self.nodes.iter().enumerate() {
            capacity.push(r.q.to_count(&format!("nodes[{v}].q"), 1)?);
            node_costs.push(r.c.to_cost(&format!("nodes[{v}].c"))?);
            if r.d != 0 || r.p != Num::inf() || r.b != Num::inf() {
                return Err(Error::format(
                    format!("nodes[{v}]"),
                    "d, p and b belong to source location kinds; use demands and candidates",
                ));
            }
        }
        if let Some(i) = self.edges.iter().position(|e| e.cost.is_some()) {
            return Err(Error::format(format!("edges[{i}].cost"), "base edges carry no cost in augmentation kinds"));
        }
        let mut candidates = Vec::with_capacity(self.candidates.len());
        for (i, c) in self.candidates.iter().enumerate() {
            let path = |f: &str| format!("candidates[{i}].{f}");
            check_index(&path("u"), c.u, n)?;
            check_index(&path("v"), c.v, n)?;
            if c.u == c.v {
                return Err(Error::format(format!("candidates[{i}]"), "self-loop"));
            }
            let cost = match c.cost.to_cost(&path("cost"))? {
                Extended::Finite(x) => x,
                Extended::Infinite => return Err(Error::format(path("cost"), "candidate costs must be finite")),
            };
            candidates.push(Candidate { u: c.u, v: c.v, cost });
        }
        let mut demands = Vec::with_capacity(self.demands.len());
        for (i, d) in self.demands.iter().enumerate() {
            let path = |f: &str| format!("demands[{i}].{f}");
            check_index(&path("s"), d.s, n)?;
            check_index(&path("v"), d.v, n)?;
            if d.s == d.v {
                return Err(Error::format(format!("demands[{i}]"), "demand endpoints must differ"));
            }
            demands.push(Demand { s: d.s, v: d.v, r: d.r });
        }
        let cost_mode = match self.cost_mode {
            Some(CostModeRecord::Edge) => CostMode::Edge,
            Some(CostModeRecord::Node) => CostMode::Node,
            None => return Err(Error::format("cost_mode", "required for augmentation kinds")),
        };
        if capacity.contains(&Extended::Finite(0)) {
            return Err(Error::format("nodes", "capacities must be at least 1"));
        }
        if self.kind == Kind::Dsna {
            for (i, d) in demands.iter().enumerate() {
                let lambda = flow::pair_connectivity(&g, &capacity, d.s, d.v, u64::MAX)?;
                if d.r != lambda + 1 {
                    return Err(Error::format(
                        format!("demands[{i}].r"),
                        format!("a dsna requirement must be current connectivity plus one ({})", lambda + 1),
                    ));
                }
            }
        }
        let sna = SnaInstance { graph: g, capacity, candidates, node_costs, demands, cost_mode };
        sna.validate().map_err(|e| Error::format("instance", e.to_string()))?;
        Ok(sna)
    }
}

fn check_index(path: &str, x: usize, n: usize) -> Result<(), Error> {
    if x < n {
        Ok(())
    } else {
        Err(Error::format(path, format!("node {x} does not exist ({n} nodes)")))
    }
}

/// A solution stored next to its instance, referencing it by digest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub instance_sha256: String,
    /// Source nodes, for source location kinds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sources: Option<Vec<usize>>,
    /// Candidate indices, for augmentation kinds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<usize>>,
}

impl SolutionFile {
    pub fn parse(text: &str) -> Result<Self, Error> {
        serde_json::from_str(text).map_err(json_error)
    }

    pub fn to_canonical(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    /// The stored set for `problem`, checked against its size.
    pub fn selection(&self, problem: &Problem) -> Result<Vec<usize>, Error> {
        let (field, set, limit) = match problem {
            Problem::Ssl(s) => ("sources", &self.sources, s.node_count()),
            Problem::Sna(s) => ("candidates", &self.candidates, s.candidates.len()),
        };
        let set = set
            .as_ref()
            .ok_or_else(|| Error::format(field, "missing for this instance kind"))?;
        for (i, &x) in set.iter().enumerate() {
            if x >= limit {
                return Err(Error::format(format!("{field}[{i}]"), format!("index {x} out of range ({limit})")));
            }
        }
        Ok(set.clone())
    }
}
