//! Problem instances: source location (plain and with flow-cost bounds) and
//! network augmentation with candidate edges and demand pairs.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Infeasibility};
use crate::flow;
use crate::graph::{star_center, Edge, Graph, NodeAttrs};
use crate::numeric::{format_rational, Capacity, Cost, Extended, Rational};

/// Source location with `(p, q)`-connectivity: pick `S` so that
/// `λ^{p,q}_G(S, v) ≥ d_v` for every `v`. With `edge_costs` present, the
/// flow-cost bounds `μ_G(S, v) ≤ b_v` apply as well.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SslInstance {
    pub graph: Graph,
    pub nodes: Vec<NodeAttrs>,
    pub edge_costs: Option<Vec<Rational>>,
}

/// Per-node outcome of checking a source set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeCheck {
    pub node: usize,
    /// `min(λ^{p,q}(S, v), d_v)`.
    pub achieved: u64,
    pub demand: u64,
    /// `μ(S, v)` and `b_v`, when flow-cost bounds apply.
    pub flow_cost: Option<(Cost, Cost)>,
}

impl NodeCheck {
    pub fn ok(&self) -> bool {
        self.achieved >= self.demand
            && self.flow_cost.as_ref().is_none_or(|(mu, b)| mu <= b)
    }
}

impl SslInstance {
    pub fn new(graph: Graph, nodes: Vec<NodeAttrs>) -> Result<Self, Error> {
        let inst = SslInstance {
            graph,
            nodes,
            edge_costs: None,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn with_flow_costs(mut self, edge_costs: Vec<Rational>) -> Result<Self, Error> {
        self.edge_costs = Some(edge_costs);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), Error> {
        let n = self.graph.node_count();
        if self.nodes.len() != n {
            return Err(Error::Precondition(format!(
                "{} node records for {n} nodes",
                self.nodes.len()
            )));
        }
        for (v, a) in self.nodes.iter().enumerate() {
            if a.capacity == Extended::Finite(0) {
                return Err(Error::ZeroCapacity(v));
            }
            if matches!(a.cost, Extended::Finite(c) if c < Rational::from_integer(0)) {
                return Err(Error::Precondition(format!("node {v} has a negative cost")));
            }
        }
        if let Some(costs) = &self.edge_costs {
            if costs.len() != self.graph.edge_count() {
                return Err(Error::Precondition(format!(
                    "{} edge costs for {} edges",
                    costs.len(),
                    self.graph.edge_count()
                )));
            }
            if let Some(i) = costs.iter().position(|c| *c < Rational::from_integer(0)) {
                return Err(Error::Precondition(format!("edge {i} has a negative cost")));
            }
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    /// `k`, the maximum demand.
    pub fn max_demand(&self) -> u64 {
        self.nodes.iter().map(|a| a.demand).max().unwrap_or(0)
    }

    /// `d(V)`.
    pub fn total_demand(&self) -> u64 {
        self.nodes.iter().map(|a| a.demand).sum()
    }

    pub fn supplies(&self) -> Vec<Capacity> {
        self.nodes.iter().map(|a| a.supply).collect()
    }

    pub fn capacities(&self) -> Vec<Capacity> {
        self.nodes.iter().map(|a| a.capacity).collect()
    }

    pub fn has_flow_bounds(&self) -> bool {
        self.edge_costs.is_some()
    }

    pub fn cost(&self, sources: &[usize]) -> Cost {
        let distinct: BTreeSet<usize> = sources.iter().copied().collect();
        distinct
            .into_iter()
            .fold(Cost::zero(), |acc, v| acc + self.nodes[v].cost)
    }

    /// `min(λ^{p,q}(S, v), d_v)`.
    pub fn truncated_connectivity(&self, sources: &[usize], v: usize) -> Result<u64, Error> {
        let d = self.nodes[v].demand;
        if d == 0 {
            return Ok(0);
        }
        flow::lambda_pq_up_to(
            &self.graph,
            &self.supplies(),
            &self.capacities(),
            sources,
            v,
            d,
        )
    }

    /// `μ_G(S, v)` with this instance's edge costs; requires flow-cost data.
    pub fn flow_cost(&self, sources: &[usize], v: usize) -> Result<Cost, Error> {
        let costs = self
            .edge_costs
            .as_ref()
            .ok_or_else(|| Error::Incompatible("instance has no edge costs".into()))?;
        flow::mu(
            &self.graph,
            costs,
            &self.supplies(),
            &self.capacities(),
            sources,
            v,
            self.nodes[v].demand,
        )
    }

    /// Per-node connectivity (and flow cost, when bounds apply) for `S`.
    pub fn check(&self, sources: &[usize]) -> Result<Vec<NodeCheck>, Error> {
        (0..self.node_count())
            .map(|v| {
                let achieved = self.truncated_connectivity(sources, v)?;
                let flow_cost = if self.has_flow_bounds() {
                    Some((self.flow_cost(sources, v)?, self.nodes[v].flow_cost_bound))
                } else {
                    None
                };
                Ok(NodeCheck {
                    node: v,
                    achieved,
                    demand: self.nodes[v].demand,
                    flow_cost,
                })
            })
            .collect()
    }

    /// Demand feasibility only (flow-cost bounds ignored).
    pub fn demands_met(&self, sources: &[usize]) -> Result<bool, Error> {
        for v in 0..self.node_count() {
            if self.truncated_connectivity(sources, v)? < self.nodes[v].demand {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Full feasibility: demands, and flow-cost bounds when present.
    pub fn is_feasible(&self, sources: &[usize]) -> Result<bool, Error> {
        if !self.demands_met(sources)? {
            return Ok(false);
        }
        if self.has_flow_bounds() {
            for v in 0..self.node_count() {
                if self.flow_cost(sources, v)? > self.nodes[v].flow_cost_bound {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// First violated constraint for `S`, if any.
    pub fn violation(&self, sources: &[usize]) -> Result<Option<Infeasibility>, Error> {
        for c in self.check(sources)? {
            if c.achieved < c.demand {
                return Ok(Some(Infeasibility::NodeDemand {
                    node: c.node,
                    achieved: c.achieved,
                    required: c.demand,
                }));
            }
            if let Some((mu, b)) = &c.flow_cost {
                if mu > b {
                    return Ok(Some(Infeasibility::Budget {
                        node: c.node,
                        min_flow_cost: mu.to_string(),
                        bound: b.to_string(),
                    }));
                }
            }
        }
        Ok(None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CostMode {
    Edge,
    Node,
}

/// A candidate edge of `F`. Its `cost` is used in edge-cost mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub u: usize,
    pub v: usize,
    pub cost: Rational,
}

impl Candidate {
    pub fn edge(&self) -> Edge {
        (self.u, self.v)
    }
}

/// A demand pair with requirement `r`; for directed instances flow runs
/// `s -> v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Demand {
    pub s: usize,
    pub v: usize,
    pub r: u64,
}

/// Network augmentation with `q`-connectivity: choose `I ⊆ F` with
/// `λ^q_{G+I}(s, v) ≥ r_sv` for every demand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnaInstance {
    pub graph: Graph,
    pub capacity: Vec<Capacity>,
    pub candidates: Vec<Candidate>,
    /// Used in node-cost mode: the cost of `I` is the cost of its endpoints.
    pub node_costs: Vec<Cost>,
    pub demands: Vec<Demand>,
    pub cost_mode: CostMode,
}

impl SnaInstance {
    pub fn validate(&self) -> Result<(), Error> {
        let n = self.graph.node_count();
        if self.capacity.len() != n || self.node_costs.len() != n {
            return Err(Error::Precondition(
                "capacities and node costs need one entry per node".into(),
            ));
        }
        if let Some(v) = self.capacity.iter().position(|c| *c == Extended::Finite(0)) {
            return Err(Error::ZeroCapacity(v));
        }
        let in_range = |x: usize| {
            if x < n {
                Ok(())
            } else {
                Err(Error::NodeOutOfRange {
                    node: x,
                    node_count: n,
                })
            }
        };
        for c in &self.candidates {
            in_range(c.u)?;
            in_range(c.v)?;
            if c.u == c.v {
                return Err(Error::SelfLoop(c.u));
            }
            if c.cost < Rational::from_integer(0) {
                return Err(Error::Precondition("candidate edge with negative cost".into()));
            }
        }
        for d in &self.demands {
            in_range(d.s)?;
            in_range(d.v)?;
            if d.s == d.v {
                return Err(Error::SelfLoop(d.s));
            }
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn is_directed(&self) -> bool {
        self.graph.is_directed()
    }

    pub fn candidate_edges(&self) -> Vec<Edge> {
        self.candidates.iter().map(Candidate::edge).collect()
    }

    pub fn demand_edges(&self) -> Vec<Edge> {
        self.demands.iter().map(|d| (d.s, d.v)).collect()
    }

    /// Demands with a positive requirement; zero requirements never bind.
    pub fn active_demands(&self) -> impl Iterator<Item = &Demand> {
        self.demands.iter().filter(|d| d.r > 0)
    }

    /// Center `a` when `F` is a star.
    pub fn center(&self) -> Option<usize> {
        star_center(&self.candidate_edges())
    }

    /// Center `s` when the demand set is a star.
    pub fn root(&self) -> Option<usize> {
        let active: Vec<Edge> = self.active_demands().map(|d| (d.s, d.v)).collect();
        star_center(&active)
    }

    /// `k = max r`.
    pub fn max_requirement(&self) -> u64 {
        self.demands.iter().map(|d| d.r).max().unwrap_or(0)
    }

    /// `r(D) = Σ r`.
    pub fn total_requirement(&self) -> u64 {
        self.demands.iter().map(|d| d.r).sum()
    }

    /// `|D|`, counting demands with positive requirement.
    pub fn demand_count(&self) -> usize {
        self.active_demands().count()
    }

    /// `p_max`: largest multiplicity of one parallel class in `F`.
    pub fn p_max(&self) -> u64 {
        let mut classes: HashMap<Edge, u64> = HashMap::new();
        for c in &self.candidates {
            let key = if self.is_directed() {
                (c.u, c.v)
            } else {
                (c.u.min(c.v), c.u.max(c.v))
            };
            *classes.entry(key).or_default() += 1;
        }
        classes.values().copied().max().unwrap_or(0)
    }

    pub fn graph_with(&self, chosen: &[usize]) -> Graph {
        let extra: Vec<Edge> = chosen.iter().map(|&i| self.candidates[i].edge()).collect();
        self.graph.augmented(&extra)
    }

    /// `min(λ^q_{G+I}(s, v), r_sv)`.
    pub fn demand_connectivity(&self, g_plus_i: &Graph, d: &Demand) -> Result<u64, Error> {
        if d.r == 0 {
            return Ok(0);
        }
        flow::pair_connectivity(g_plus_i, &self.capacity, d.s, d.v, d.r)
    }

    /// First demand left short by `I`, if any.
    pub fn violation(&self, chosen: &[usize]) -> Result<Option<Infeasibility>, Error> {
        let g = self.graph_with(chosen);
        for d in self.active_demands() {
            let achieved = self.demand_connectivity(&g, d)?;
            if achieved < d.r {
                return Ok(Some(Infeasibility::Demand {
                    source: d.s,
                    target: d.v,
                    achieved,
                    required: d.r,
                }));
            }
        }
        Ok(None)
    }

    pub fn is_feasible(&self, chosen: &[usize]) -> Result<bool, Error> {
        Ok(self.violation(chosen)?.is_none())
    }

    /// Cost of `I`: the sum of candidate costs in edge mode, the cost of the
    /// distinct endpoints in node mode.
    pub fn cost(&self, chosen: &[usize]) -> Cost {
        match self.cost_mode {
            CostMode::Edge => chosen.iter().fold(Cost::zero(), |acc, &i| {
                acc + Extended::Finite(self.candidates[i].cost)
            }),
            CostMode::Node => {
                let ends: BTreeSet<usize> = chosen
                    .iter()
                    .flat_map(|&i| [self.candidates[i].u, self.candidates[i].v])
                    .collect();
                ends.into_iter()
                    .fold(Cost::zero(), |acc, v| acc + self.node_costs[v])
            }
        }
    }
}

pub fn describe_cost(c: &Cost) -> String {
    match c {
        Extended::Finite(x) => format_rational(x),
        Extended::Infinite => "inf".into(),
    }
}
