//! Seeded instance generators. The same parameters and seed always give the
//! same instance.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::error::Error;
use crate::flow;
use crate::format::{InstanceFile, Metadata, Num};
use crate::graph::{Graph, NodeAttrs};
use crate::instance::{Candidate, CostMode, Demand, SnaInstance, SslInstance};
use crate::numeric::{Capacity, Cost, Extended, Rational};
use crate::reductions::{default_gadget_copies, setcover_gadget, SetCoverGadget};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// How supplies `p` and capacities `q` are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PqMode {
    /// `p = q = ∞`.
    Lambda,
    /// `p = ∞`, `q = 1`.
    KappaHat,
    /// `p = q = 1`.
    KappaPrime,
    /// `1 ≤ q ≤ p ≤ k` drawn uniformly.
    General,
}

impl PqMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "lambda" => Some(PqMode::Lambda),
            "kappa_hat" => Some(PqMode::KappaHat),
            "kappa_prime" => Some(PqMode::KappaPrime),
            "general" => Some(PqMode::General),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PqMode::Lambda => "lambda",
            PqMode::KappaHat => "kappa_hat",
            PqMode::KappaPrime => "kappa_prime",
            PqMode::General => "general",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SslParams {
    pub nodes: usize,
    pub edges: usize,
    pub k: u64,
    pub max_cost: i64,
    pub directed: bool,
    pub mode: PqMode,
    /// Add integral edge costs and flow-cost bounds.
    pub flow_bounds: bool,
    pub max_edge_cost: i64,
    /// Largest slack added to `μ(V, v)` when drawing a bound.
    pub budget_slack: i64,
}

impl Default for SslParams {
    fn default() -> Self {
        SslParams {
            nodes: 6,
            edges: 9,
            k: 2,
            max_cost: 5,
            directed: true,
            mode: PqMode::General,
            flow_bounds: false,
            max_edge_cost: 3,
            budget_slack: 2,
        }
    }
}

fn random_edges(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<(usize, usize)> {
    if n < 2 {
        return Vec::new();
    }
    (0..m)
        .map(|_| {
            let u = rng.gen_range(0..n);
            let mut v = rng.gen_range(0..n - 1);
            if v >= u {
                v += 1;
            }
            (u, v)
        })
        .collect()
}

fn check_params(nodes: usize, what: &str) -> Result<(), Error> {
    if nodes == 0 {
        return Err(Error::Precondition(format!("{what}: need at least one node")));
    }
    Ok(())
}

/// Random source location instance; demands are lowered to what `S = V`
/// achieves, so the instance is always feasible.
pub fn ssl(params: &SslParams, seed: u64) -> Result<SslInstance, Error> {
    check_params(params.nodes, "ssl")?;
    if params.max_cost < 1 || (params.flow_bounds && params.max_edge_cost < 1) {
        return Err(Error::Precondition("cost ranges must start at 1".into()));
    }
    let mut rng = rng(seed);
    let n = params.nodes;
    let graph = Graph::from_edges(n, params.directed, random_edges(&mut rng, n, params.edges))?;
    let k = params.k;
    let mut nodes = Vec::with_capacity(n);
    for _ in 0..n {
        let (p, q) = match params.mode {
            PqMode::Lambda => (Extended::Infinite, Extended::Infinite),
            PqMode::KappaHat => (Extended::Infinite, Extended::Finite(1)),
            PqMode::KappaPrime => (Extended::Finite(1), Extended::Finite(1)),
            PqMode::General => {
                let top = k.max(1);
                let q = rng.gen_range(1..=top);
                (Extended::Finite(rng.gen_range(q..=top)), Extended::Finite(q))
            }
        };
        nodes.push(NodeAttrs {
            cost: Cost::int(rng.gen_range(1..=params.max_cost)),
            demand: rng.gen_range(0..=k),
            capacity: q,
            supply: p,
            flow_cost_bound: Extended::Infinite,
        });
    }
    let mut inst = SslInstance::new(graph, nodes)?;
    let all: Vec<usize> = (0..n).collect();
    for v in 0..n {
        let reach = inst.truncated_connectivity(&all, v)?;
        inst.nodes[v].demand = reach;
    }
    if params.flow_bounds {
        let costs = (0..inst.graph.edge_count())
            .map(|_| Rational::from_integer(rng.gen_range(1..=params.max_edge_cost)))
            .collect();
        inst = inst.with_flow_costs(costs)?;
        for v in 0..n {
            let unbounded = rng.gen_range(0..3) == 0;
            let slack = rng.gen_range(0..=params.budget_slack.max(0));
            if unbounded {
                continue;
            }
            let mu = inst.flow_cost(&all, v)?;
            inst.nodes[v].flow_cost_bound = mu.map(|m| m + Rational::from_integer(slack));
        }
    }
    Ok(inst)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnaParams {
    pub nodes: usize,
    pub edges: usize,
    pub candidates: usize,
    pub demands: usize,
    pub k: u64,
    pub max_cost: i64,
    pub directed: bool,
    pub cost_mode: CostMode,
    /// Demands all start at the root.
    pub rooted: bool,
    /// The root is the candidate center.
    pub root_is_center: bool,
    /// Finite capacities are drawn from `1..=q_max`; `None` gives `q ≡ ∞`.
    pub q_max: Option<u64>,
}

impl Default for SnaParams {
    fn default() -> Self {
        SnaParams {
            nodes: 5,
            edges: 5,
            candidates: 6,
            demands: 3,
            k: 2,
            max_cost: 5,
            directed: true,
            cost_mode: CostMode::Edge,
            rooted: true,
            root_is_center: true,
            q_max: None,
        }
    }
}

/// Random `a`-based augmentation instance with center `0`. Requirements are
/// lowered to what `G + F` achieves; zero requirements are dropped.
pub fn sna(params: &SnaParams, seed: u64) -> Result<SnaInstance, Error> {
    check_params(params.nodes, "sna")?;
    if params.nodes < 2 {
        return Err(Error::Precondition("sna: need at least two nodes".into()));
    }
    if params.max_cost < 1 {
        return Err(Error::Precondition("cost ranges must start at 1".into()));
    }
    let mut rng = rng(seed);
    let n = params.nodes;
    let center = 0;
    let root = if params.root_is_center { 0 } else { 1 };
    let graph = Graph::from_edges(n, params.directed, random_edges(&mut rng, n, params.edges))?;
    let capacity: Vec<Capacity> = (0..n)
        .map(|v| match params.q_max {
            Some(_) if v == center => Extended::Infinite,
            Some(top) => {
                if rng.gen_range(0..4) == 0 {
                    Extended::Infinite
                } else {
                    Extended::Finite(rng.gen_range(1..=top.max(1)))
                }
            }
            None => Extended::Infinite,
        })
        .collect();
    let candidates: Vec<Candidate> = (0..params.candidates)
        .map(|_| Candidate {
            u: center,
            v: rng.gen_range(1..n),
            cost: Rational::from_integer(rng.gen_range(1..=params.max_cost)),
        })
        .collect();
    let mut node_costs: Vec<Cost> = (0..n).map(|_| Cost::int(rng.gen_range(1..=params.max_cost))).collect();
    node_costs[center] = Cost::zero();
    let mut demands = Vec::new();
    if params.rooted {
        let mut targets: Vec<usize> = (0..n).filter(|&v| v != root).collect();
        targets.shuffle(&mut rng);
        for &v in targets.iter().take(params.demands) {
            demands.push(Demand { s: root, v, r: rng.gen_range(1..=params.k.max(1)) });
        }
    } else {
        for (s, v) in random_edges(&mut rng, n, params.demands) {
            demands.push(Demand { s, v, r: rng.gen_range(1..=params.k.max(1)) });
        }
    }
    let mut inst = SnaInstance {
        graph,
        capacity,
        candidates,
        node_costs,
        demands,
        cost_mode: params.cost_mode,
    };
    let full = inst.graph_with(&(0..inst.candidates.len()).collect::<Vec<_>>());
    for d in inst.demands.iter_mut() {
        d.r = flow::pair_connectivity(&full, &inst.capacity, d.s, d.v, d.r)?;
    }
    inst.demands.retain(|d| d.r > 0);
    inst.validate()?;
    Ok(inst)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetCoverParams {
    pub sets: usize,
    pub elements: usize,
    /// Defaults to `(|A| + |B|)²`.
    pub copies: Option<usize>,
    /// Membership probability in percent.
    pub density: u32,
    pub node_costs: bool,
}

impl Default for SetCoverParams {
    fn default() -> Self {
        SetCoverParams {
            sets: 3,
            elements: 3,
            copies: None,
            density: 40,
            node_costs: false,
        }
    }
}

/// Random set system in which every element lies in some set.
pub fn set_system(params: &SetCoverParams, seed: u64) -> Result<Vec<Vec<usize>>, Error> {
    if params.sets == 0 || params.elements == 0 {
        return Err(Error::Precondition("setcover: need at least one set and one element".into()));
    }
    if params.density > 100 {
        return Err(Error::Precondition("setcover: density is a percentage".into()));
    }
    let mut rng = rng(seed);
    let mut sets = vec![Vec::new(); params.sets];
    for b in 0..params.elements {
        for set in sets.iter_mut() {
            if rng.gen_range(0..100) < params.density {
                set.push(b);
            }
        }
        if !sets.iter().any(|s| s.contains(&b)) {
            let a = rng.gen_range(0..params.sets);
            sets[a].push(b);
        }
    }
    Ok(sets)
}

pub fn setcover(params: &SetCoverParams, seed: u64) -> Result<(Vec<Vec<usize>>, SetCoverGadget), Error> {
    let sets = set_system(params, seed)?;
    let copies = params
        .copies
        .unwrap_or_else(|| default_gadget_copies(params.sets, params.elements));
    let gadget = setcover_gadget(&sets, params.elements, copies, params.node_costs)?;
    Ok((sets, gadget))
}

/// Generator request as given on the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenSpec {
    Ssl(SslParams),
    Sna(SnaParams),
    SetCover(SetCoverParams),
}

/// Generates an instance file with the parameters and seed in its metadata.
pub fn generate(spec: &GenSpec, seed: u64) -> Result<InstanceFile, Error> {
    let mut extra = BTreeMap::new();
    let (file, generator) = match spec {
        GenSpec::Ssl(p) => {
            extra.insert(
                "params".to_string(),
                json!({
                    "n": p.nodes, "m": p.edges, "k": p.k, "max_cost": p.max_cost,
                    "mode": p.mode.name(), "flow_bounds": p.flow_bounds,
                }),
            );
            (InstanceFile::from_ssl(&ssl(p, seed)?), "ssl")
        }
        GenSpec::Sna(p) => {
            extra.insert(
                "params".to_string(),
                json!({
                    "n": p.nodes, "m": p.edges, "candidates": p.candidates, "demands": p.demands,
                    "k": p.k, "max_cost": p.max_cost, "rooted": p.rooted,
                }),
            );
            (InstanceFile::from_sna(&sna(p, seed)?), "sna")
        }
        GenSpec::SetCover(p) => {
            let (sets, gadget) = setcover(p, seed)?;
            extra.insert("sets".to_string(), json!(sets));
            extra.insert("copies".to_string(), json!(gadget.copies));
            let mut file = InstanceFile::from_sna(&gadget.instance);
            file.metadata.known_optimum = gadget.set_cover_optimum.map(|x| Num::int(x as i64));
            (file, "setcover")
        }
    };
    let known_optimum = file.metadata.known_optimum;
    Ok(file.with_metadata(Metadata {
        seed: Some(seed),
        generator: Some(generator.to_string()),
        known_optimum,
        extra,
    }))
}
