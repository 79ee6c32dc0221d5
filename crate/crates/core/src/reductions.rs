//! Problem transformations with solution pull-back.

use std::collections::BTreeSet;

use crate::error::{Error, Infeasibility};
use crate::graph::{Graph, NodeAttrs};
use crate::instance::{Candidate, CostMode, Demand, SnaInstance, SslInstance};
use crate::numeric::{Cost, Extended, Rational};

/// Correspondence between a source location instance on `n` nodes and its
/// rooted augmentation form: every SSL node keeps a node of the augmentation
/// instance, plus a root `s` with a star of supply edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SslSnaMap {
    pub root: usize,
    /// SSL node of each augmentation node; `None` for the root.
    pub ssl_node: Vec<Option<usize>>,
    /// Augmentation node of each SSL node.
    pub sna_node: Vec<usize>,
    /// SSL node each candidate edge supplies.
    pub leaf: Vec<usize>,
}

impl SslSnaMap {
    /// `S ↦ I`: every candidate edge from the root to `S`.
    pub fn edges_of(&self, sources: &[usize]) -> Vec<usize> {
        let s: BTreeSet<usize> = sources.iter().copied().collect();
        (0..self.leaf.len())
            .filter(|&i| s.contains(&self.leaf[i]))
            .collect()
    }

    /// `I ↦ S`: the distinct leaves touched by `I`, ascending.
    pub fn sources_of(&self, chosen: &[usize]) -> Vec<usize> {
        let s: BTreeSet<usize> = chosen.iter().map(|&i| self.leaf[i]).collect();
        s.into_iter().collect()
    }

    /// Rewrites an augmentation-side certificate in SSL node indices.
    pub fn pull_back_error(&self, e: Error) -> Error {
        match e {
            Error::Infeasible(Infeasibility::Demand {
                source,
                target,
                achieved,
                required,
            }) if source == self.root => match self.ssl_node[target] {
                Some(node) => Error::Infeasible(Infeasibility::NodeDemand {
                    node,
                    achieved,
                    required,
                }),
                None => e,
            },
            other => other,
        }
    }
}

/// SSL to `s`-based rooted augmentation with node costs.
///
/// Appends a root `s = n` of cost 0 with no graph edges, puts `min(p_v, k)`
/// parallel edges `s v` into `F`, and sets `r_sv = d_v`. Capping `p_v` at `k`
/// does not change any truncated connectivity.
pub fn ssl_to_rooted_sna(ssl: &SslInstance) -> (SnaInstance, SslSnaMap) {
    let n = ssl.node_count();
    let k = ssl.max_demand();
    let s = n;
    let mut graph = Graph::new(n + 1, ssl.graph.is_directed());
    for &(u, v) in ssl.graph.edges() {
        graph.add_edge(u, v).expect("edges of a valid instance");
    }
    let mut capacity = ssl.capacities();
    capacity.push(Extended::Infinite);
    let mut node_costs: Vec<Cost> = ssl.nodes.iter().map(|a| a.cost).collect();
    node_costs.push(Cost::zero());
    let mut candidates = Vec::new();
    let mut leaf = Vec::new();
    for (v, a) in ssl.nodes.iter().enumerate() {
        for _ in 0..a.supply.clamp_to(k) {
            candidates.push(Candidate {
                u: s,
                v,
                cost: Rational::from_integer(0),
            });
            leaf.push(v);
        }
    }
    let demands = ssl
        .nodes
        .iter()
        .enumerate()
        .map(|(v, a)| Demand { s, v, r: a.demand })
        .collect();
    let sna = SnaInstance {
        graph,
        capacity,
        candidates,
        node_costs,
        demands,
        cost_mode: CostMode::Node,
    };
    let map = SslSnaMap {
        root: s,
        ssl_node: (0..n).map(Some).chain([None]).collect(),
        sna_node: (0..n).collect(),
        leaf,
    };
    (sna, map)
}

/// Inverse of [`ssl_to_rooted_sna`]: removes `root`, turning its candidate
/// edges into supplies and its demands into node demands.
pub fn rooted_sna_to_ssl(sna: &SnaInstance, root: usize) -> Result<(SslInstance, SslSnaMap), Error> {
    sna.validate()?;
    let n = sna.node_count();
    if root >= n {
        return Err(Error::NodeOutOfRange { node: root, node_count: n });
    }
    let clause = |m: &str| Err(Error::Incompatible(format!("not an s-based rooted instance: {m}")));
    if sna.cost_mode != CostMode::Node {
        return clause("cost mode must be node");
    }
    let directed = sna.is_directed();
    let mut leaf = Vec::with_capacity(sna.candidates.len());
    for c in &sna.candidates {
        let other = if c.u == root {
            c.v
        } else if c.v == root && !directed {
            c.u
        } else {
            return clause("candidate edges must all leave the root (s-based)");
        };
        leaf.push(other);
    }
    let mut demand_of = vec![0u64; n];
    for d in &sna.demands {
        let other = if d.s == root {
            d.v
        } else if d.v == root && !directed {
            d.s
        } else if d.r == 0 {
            continue;
        } else {
            return clause("every demand must start at the root (rooted)");
        };
        demand_of[other] = demand_of[other].max(d.r);
    }
    if sna.graph.degree(root) != 0 {
        return clause("the root must have no edges in G");
    }
    if sna.node_costs[root] != Cost::zero() {
        return clause("the root must have cost 0");
    }

    let ssl_node: Vec<Option<usize>> = (0..n)
        .map(|v| match v.cmp(&root) {
            std::cmp::Ordering::Less => Some(v),
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some(v - 1),
        })
        .collect();
    let sna_node: Vec<usize> = (0..n).filter(|&v| v != root).collect();
    let mut graph = Graph::new(n - 1, directed);
    for &(u, v) in sna.graph.edges() {
        graph.add_edge(ssl_node[u].expect("root has no edges"), ssl_node[v].expect("root has no edges"))?;
    }
    let mut supply = vec![0u64; n];
    for &l in &leaf {
        supply[l] += 1;
    }
    let nodes = sna_node
        .iter()
        .map(|&v| NodeAttrs {
            cost: sna.node_costs[v],
            demand: demand_of[v],
            capacity: sna.capacity[v],
            supply: Extended::Finite(supply[v]),
            flow_cost_bound: Extended::Infinite,
        })
        .collect();
    let ssl = SslInstance::new(graph, nodes)?;
    let leaf = leaf.iter().map(|&l| ssl_node[l].expect("leaf differs from root")).collect();
    Ok((
        ssl,
        SslSnaMap {
            root,
            ssl_node,
            sna_node,
            leaf,
        },
    ))
}

/// Node `v` of a κ instance becomes `in_node(v) = 2v` and `out_node(v) = 2v + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KappaSplitMap {
    pub node_count: usize,
}

impl KappaSplitMap {
    pub fn in_node(&self, v: usize) -> usize {
        2 * v
    }

    pub fn out_node(&self, v: usize) -> usize {
        2 * v + 1
    }

    /// `S ↦ S^out`.
    pub fn forward(&self, sources: &[usize]) -> Vec<usize> {
        sources.iter().map(|&v| self.out_node(v)).collect()
    }

    /// Original nodes whose out-copy is in the split solution; in-copies are
    /// never selectable and are ignored.
    pub fn pull_back(&self, split_sources: &[usize]) -> Vec<usize> {
        let s: BTreeSet<usize> = split_sources
            .iter()
            .filter(|&&x| x % 2 == 1)
            .map(|&x| x / 2)
            .collect();
        s.into_iter().collect()
    }
}

/// Directed node-connectivity source location to edge-connectivity source
/// location. `ssl` supplies the graph, costs and demands; its `p`/`q` are
/// ignored because the κ semantics fix them.
///
/// `v_in` gets cost ∞ and demand `d_v`, `v_out` keeps `c_v` with demand 0.
/// Arcs: `v_in -> v_out`, `u_out -> w_in` per edge `u -> w`, and `d_v`
/// parallel arcs `v_out -> v_in` so that an open `v_out` meets `v`'s demand.
pub fn kappa_split(ssl: &SslInstance) -> Result<(SslInstance, KappaSplitMap), Error> {
    if !ssl.graph.is_directed() {
        return Err(Error::Incompatible("kappa_split requires a directed graph".into()));
    }
    let n = ssl.node_count();
    let (mut graph, _) = crate::flow::node_split_digraph(&ssl.graph);
    let mut nodes = Vec::with_capacity(2 * n);
    for (v, a) in ssl.nodes.iter().enumerate() {
        for _ in 0..a.demand {
            graph.add_edge(2 * v + 1, 2 * v)?;
        }
        nodes.push(NodeAttrs {
            cost: Extended::Infinite,
            demand: a.demand,
            ..NodeAttrs::default()
        });
        nodes.push(NodeAttrs {
            cost: a.cost,
            demand: 0,
            ..NodeAttrs::default()
        });
    }
    Ok((SslInstance::new(graph, nodes)?, KappaSplitMap { node_count: n }))
}

/// `κ(S, v) ≥ d_v` for every `v`, evaluated directly on the original digraph.
pub fn kappa_feasible(ssl: &SslInstance, sources: &[usize]) -> Result<bool, Error> {
    for (v, a) in ssl.nodes.iter().enumerate() {
        if a.demand == 0 {
            continue;
        }
        let k = crate::flow::connectivity(crate::flow::ConnectivityKind::KappaDirected, &ssl.graph, sources, v)?;
        if k < Extended::Finite(a.demand) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Layout of the set-cover gadget: sets `A`, elements `B`, `M` copies of
/// `B`, and the root `s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetCoverGadget {
    pub instance: SnaInstance,
    pub set_count: usize,
    pub element_count: usize,
    pub copies: usize,
    pub root: usize,
    /// Minimum number of sets covering `B`, when `B` is coverable and the
    /// system was small enough to solve.
    pub set_cover_optimum: Option<u64>,
    /// Elements in no set.
    pub uncoverable: Vec<usize>,
}

impl SetCoverGadget {
    pub fn set_node(&self, a: usize) -> usize {
        a
    }

    /// Node of element `b` in copy `j` (copy 0 is `B` itself).
    pub fn element_node(&self, j: usize, b: usize) -> usize {
        self.set_count + j * self.element_count + b
    }

    /// Candidate index of the edge `s v`; candidates are listed in node order.
    pub fn candidate_to(&self, v: usize) -> usize {
        v
    }

    /// The sets chosen by `I`, if `I` buys no element edge; otherwise the
    /// first element demand it had to buy directly.
    pub fn cover_of(&self, chosen: &[usize]) -> Result<Vec<usize>, Infeasibility> {
        let mut sets = Vec::new();
        for &i in chosen {
            let v = self.instance.candidates[i].v;
            if v < self.set_count {
                sets.push(v);
            } else {
                return Err(Infeasibility::Demand {
                    source: self.root,
                    target: v,
                    achieved: 0,
                    required: 1,
                });
            }
        }
        sets.sort_unstable();
        sets.dedup();
        Ok(sets)
    }
}

/// Largest set system solved exactly inside [`setcover_gadget`].
pub const GADGET_EXACT_SETS: usize = 16;

pub fn default_gadget_copies(set_count: usize, element_count: usize) -> usize {
    (set_count + element_count).pow(2)
}

/// Minimum set cover by enumeration, `None` when some element is uncoverable.
pub fn min_set_cover(sets: &[Vec<usize>], element_count: usize) -> Option<u64> {
    assert!(sets.len() < 32, "enumeration over 2^|A| subsets");
    let masks: Vec<u64> = sets
        .iter()
        .map(|s| s.iter().fold(0u64, |m, &b| m | 1 << b))
        .collect();
    let full = if element_count == 64 { u64::MAX } else { (1u64 << element_count) - 1 };
    let mut best: Option<u64> = None;
    for pick in 0u32..(1u32 << sets.len()) {
        let size = pick.count_ones() as u64;
        if best.is_some_and(|b| size >= b) {
            continue;
        }
        let covered = (0..sets.len())
            .filter(|&i| pick >> i & 1 == 1)
            .fold(0u64, |m, i| m | masks[i]);
        if covered & full == full {
            best = Some(size);
        }
    }
    best
}

/// Directed rooted `s`-based gadget from a set system: `sets[a]` lists the
/// elements of set `a`. `F = {s v : v ≠ s}`, each of cost 1 (or node cost 1
/// with `node_costs`); `r_sv = 0` on sets and 1 on elements and their copies.
pub fn setcover_gadget(
    sets: &[Vec<usize>],
    element_count: usize,
    copies: usize,
    node_costs: bool,
) -> Result<SetCoverGadget, Error> {
    let set_count = sets.len();
    if set_count == 0 || element_count == 0 {
        return Err(Error::Precondition("set system needs at least one set and one element".into()));
    }
    let n = set_count + element_count * (copies + 1) + 1;
    let root = n - 1;
    let mut graph = Graph::new(n, true);
    for (a, members) in sets.iter().enumerate() {
        for &b in members {
            if b >= element_count {
                return Err(Error::NodeOutOfRange { node: b, node_count: element_count });
            }
            for j in 0..=copies {
                graph.add_edge(a, set_count + j * element_count + b)?;
            }
        }
    }
    let candidates = (0..root)
        .map(|v| Candidate {
            u: root,
            v,
            cost: Rational::from_integer(1),
        })
        .collect();
    let demands = (0..root)
        .map(|v| Demand {
            s: root,
            v,
            r: u64::from(v >= set_count),
        })
        .collect();
    let mut costs = vec![Cost::int(1); n];
    costs[root] = Cost::zero();
    let instance = SnaInstance {
        graph,
        capacity: vec![Extended::Infinite; n],
        candidates,
        node_costs: costs,
        demands,
        cost_mode: if node_costs { CostMode::Node } else { CostMode::Edge },
    };
    let uncoverable: Vec<usize> = (0..element_count)
        .filter(|b| !sets.iter().any(|s| s.contains(b)))
        .collect();
    let set_cover_optimum = if uncoverable.is_empty() && set_count <= GADGET_EXACT_SETS && element_count <= 64 {
        min_set_cover(sets, element_count)
    } else {
        None
    };
    Ok(SetCoverGadget {
        instance,
        set_count,
        element_count,
        copies,
        root,
        set_cover_optimum,
        uncoverable,
    })
}
