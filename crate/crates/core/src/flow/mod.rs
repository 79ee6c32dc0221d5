//! Node-capacitated connectivity evaluated by flows.
//!
//! Every connectivity notion used by the solvers reduces to one max-flow (or
//! min-cost flow) on a split network: each capacitated node `v` becomes
//! `v_in -> v_out` with capacity `q_v`, each edge copy becomes a unit arc
//! `u_out -> v_in` (both directions for undirected edges), and a set of
//! sources is fed from a super-source.

pub mod network;

use crate::biset::{Biset, NodeSet};
use crate::error::Error;
use crate::graph::Graph;
use crate::numeric::{common_denominator, Capacity, Cost, Extended, Rational};

pub use network::{ArcNetwork, ArcOrigin, FlowResult, INFINITE_CAPACITY};
use network::{arc_capacity, flow_value};

/// A split network together with the in/out copy of every original node.
/// Unsplit nodes have `node_in[v] == node_out[v]`.
#[derive(Debug, Clone)]
pub struct SplitNetwork {
    pub network: ArcNetwork,
    pub node_in: Vec<usize>,
    pub node_out: Vec<usize>,
}

impl SplitNetwork {
    pub fn is_split(&self, v: usize) -> bool {
        self.node_in[v] != self.node_out[v]
    }

    /// Reads the source-side node set of a finished flow as a biset:
    /// inner = both copies reached, outer = at least the in-copy reached.
    pub fn source_side_biset(&self, flow: &FlowResult) -> Biset {
        let n = self.node_in.len();
        let inner = (0..n)
            .filter(|&v| flow.source_side[self.node_in[v]] && flow.source_side[self.node_out[v]]);
        let outer = (0..n).filter(|&v| flow.source_side[self.node_in[v]]);
        Biset::new(NodeSet::from_nodes(n, inner), NodeSet::from_nodes(n, outer))
            .expect("residual reachability yields nested parts")
    }
}

fn check_capacities(q: &[Capacity]) -> Result<(), Error> {
    match q.iter().position(|c| *c == Extended::Finite(0)) {
        Some(v) => Err(Error::ZeroCapacity(v)),
        None => Ok(()),
    }
}

fn check_node(g: &Graph, v: usize) -> Result<(), Error> {
    if v < g.node_count() {
        Ok(())
    } else {
        Err(Error::NodeOutOfRange {
            node: v,
            node_count: g.node_count(),
        })
    }
}

/// Replaces every node outside `keep` by a capacitated in/out pair and every
/// edge copy by a unit arc. The network's source and sink are left at 0 for
/// the caller to set.
pub fn split_transform(g: &Graph, q: &[Capacity], keep: &[usize]) -> Result<SplitNetwork, Error> {
    split_transform_with_costs(g, q, keep, None)
}

fn split_transform_with_costs(
    g: &Graph,
    q: &[Capacity],
    keep: &[usize],
    edge_costs: Option<&[i64]>,
) -> Result<SplitNetwork, Error> {
    assert_eq!(q.len(), g.node_count(), "one capacity per node");
    check_capacities(q)?;
    let n = g.node_count();
    let mut node_in = vec![0; n];
    let mut node_out = vec![0; n];
    let mut next = 0;
    for v in 0..n {
        node_in[v] = next;
        next += 1;
        if keep.contains(&v) {
            node_out[v] = node_in[v];
        } else {
            node_out[v] = next;
            next += 1;
        }
    }
    let mut network = ArcNetwork::new(next, 0, 0);
    for v in 0..n {
        if node_in[v] != node_out[v] {
            network.add_arc(
                node_in[v],
                node_out[v],
                arc_capacity(q[v]),
                0,
                ArcOrigin::Splitter(v),
            );
        }
    }
    for (i, &(u, v)) in g.edges().iter().enumerate() {
        let cost = edge_costs.map_or(0, |c| c[i]);
        network.add_arc(node_out[u], node_in[v], 1, cost, ArcOrigin::Edge { tail: u, head: v });
        if !g.is_directed() {
            network.add_arc(node_out[v], node_in[u], 1, cost, ArcOrigin::Edge { tail: v, head: u });
        }
    }
    Ok(SplitNetwork {
        network,
        node_in,
        node_out,
    })
}

/// The network of the `(p, q)` construction: a super-source joined to every
/// source `u` by `p_u` unit arcs (or one infinite arc), all nodes but the
/// sink `v` split by `q`. Returns the network with source and sink set.
fn supply_network(
    g: &Graph,
    supply: impl Fn(usize) -> Capacity,
    q: &[Capacity],
    sources: &[usize],
    v: usize,
    edge_costs: Option<&[i64]>,
) -> Result<SplitNetwork, Error> {
    check_node(g, v)?;
    for &u in sources {
        check_node(g, u)?;
    }
    let mut split = split_transform_with_costs(g, q, &[v], edge_costs)?;
    let root = split.network.add_node();
    split.network.source = root;
    split.network.sink = split.node_in[v];
    let mut seen = NodeSet::empty(g.node_count());
    for &u in sources {
        if seen.contains(u) {
            continue;
        }
        seen.insert(u);
        split
            .network
            .add_arc(root, split.node_in[u], arc_capacity(supply(u)), 0, ArcOrigin::Supply(u));
    }
    Ok(split)
}

/// `λ^q_G(S, v)`: maximum flow from `S \ {v}` to `v` with unit edges and
/// node capacities `q` on every node except `v`.
pub fn lambda_q(g: &Graph, q: &[Capacity], sources: &[usize], v: usize) -> Result<u64, Error> {
    let others: Vec<usize> = sources.iter().copied().filter(|&u| u != v).collect();
    let split = supply_network(g, |_| Extended::Infinite, q, &others, v, None)?;
    Ok(split.network.max_flow().value)
}

/// `λ^{p,q}_G(S, v)`: maximum flow in the graph extended by a super-source
/// joined to each `u ∈ S` with `p_u` edges. Infinite when an uncapacitated
/// supply reaches `v` directly.
pub fn lambda_pq(
    g: &Graph,
    p: &[Capacity],
    q: &[Capacity],
    sources: &[usize],
    v: usize,
) -> Result<Capacity, Error> {
    let split = supply_network(g, |u| p[u], q, sources, v, None)?;
    Ok(flow_value(split.network.max_flow().value))
}

/// `min(λ^{p,q}_G(S, v), limit)`, stopping the flow early.
pub fn lambda_pq_up_to(
    g: &Graph,
    p: &[Capacity],
    q: &[Capacity],
    sources: &[usize],
    v: usize,
    limit: u64,
) -> Result<u64, Error> {
    let split = supply_network(g, |u| p[u], q, sources, v, None)?;
    Ok(split.network.max_flow_up_to(limit).value)
}

/// `λ^q_G(s, t)` for a terminal pair: both terminals are uncapacitated,
/// every other node `w` carries capacity `q_w`. Stops once `limit` is reached.
pub fn pair_connectivity(
    g: &Graph,
    q: &[Capacity],
    s: usize,
    t: usize,
    limit: u64,
) -> Result<u64, Error> {
    Ok(pair_network(g, q, s, t)?.network.max_flow_up_to(limit).value)
}

fn pair_network(g: &Graph, q: &[Capacity], s: usize, t: usize) -> Result<SplitNetwork, Error> {
    check_node(g, s)?;
    check_node(g, t)?;
    let mut split = split_transform(g, q, &[s, t])?;
    split.network.source = split.node_out[s];
    split.network.sink = split.node_in[t];
    Ok(split)
}

/// Minimum `(s, t)` cut as a biset `(X, X+)` with `s ∈ X` and `t ∉ X+`, taking
/// the source-side-minimal cut. Its value `q(Γ) + |δ_G(X̂)|` equals the
/// returned connectivity.
pub fn pair_min_cut(g: &Graph, q: &[Capacity], s: usize, t: usize) -> Result<(u64, Biset), Error> {
    let split = pair_network(g, q, s, t)?;
    let flow = split.network.max_flow();
    let biset = split.source_side_biset(&flow);
    Ok((flow.value, biset))
}

/// Connectivity notions expressible as `(p, q)` presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConnectivityKind {
    /// Edge-connectivity: `p ≡ q ≡ ∞`.
    Lambda,
    /// No shared node except `v`: `p ≡ ∞`, `q ≡ 1`.
    KappaHat,
    /// Like `KappaHat`, but a source `v` contributes exactly one: `p ≡ q ≡ 1`.
    KappaPrime,
    /// Directed node-connectivity where sources may be shared, via the
    /// in/out node split.
    KappaDirected,
}

impl ConnectivityKind {
    /// The `(p, q)` preset, for kinds that have one.
    pub fn preset(self) -> Option<(Capacity, Capacity)> {
        match self {
            ConnectivityKind::Lambda => Some((Extended::Infinite, Extended::Infinite)),
            ConnectivityKind::KappaHat => Some((Extended::Infinite, Extended::Finite(1))),
            ConnectivityKind::KappaPrime => Some((Extended::Finite(1), Extended::Finite(1))),
            ConnectivityKind::KappaDirected => None,
        }
    }
}

pub fn connectivity(
    kind: ConnectivityKind,
    g: &Graph,
    sources: &[usize],
    v: usize,
) -> Result<Capacity, Error> {
    let n = g.node_count();
    match kind.preset() {
        Some((p, q)) => lambda_pq(g, &vec![p; n], &vec![q; n], sources, v),
        None => {
            if !g.is_directed() {
                return Err(Error::Incompatible(
                    "kappa_directed requires a directed graph".into(),
                ));
            }
            check_node(g, v)?;
            if sources.contains(&v) {
                return Ok(Extended::Infinite);
            }
            // Paths end at v_in, so v itself is never charged as an internal node.
            let (split, _) = node_split_digraph(g);
            let outs: Vec<usize> = sources.iter().map(|&u| 2 * u + 1).collect();
            let inf = vec![Extended::Infinite; split.node_count()];
            lambda_pq(&split, &inf, &inf, &outs, 2 * v)
        }
    }
}

/// Directed in/out split: node `v` becomes `2v` (in) and `2v + 1` (out) joined
/// by one arc; each edge `u -> w` becomes `2u + 1 -> 2w`. Returns the graph
/// and, per original edge, its index in the new graph.
pub fn node_split_digraph(g: &Graph) -> (Graph, Vec<usize>) {
    let n = g.node_count();
    let mut split = Graph::new(2 * n, true);
    for v in 0..n {
        split.add_edge(2 * v, 2 * v + 1).expect("valid split arc");
    }
    let map = g
        .edges()
        .iter()
        .map(|&(u, w)| split.add_edge(2 * u + 1, 2 * w).expect("valid edge"))
        .collect();
    (split, map)
}

/// Dual witness of `λ^q_G(S, v)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutCertificate {
    /// Indices into the graph's edge list.
    pub cut_edges: Vec<usize>,
    pub cut_nodes: Vec<usize>,
    pub value: u64,
}

impl CutCertificate {
    /// Whether deleting the cut leaves no path from `S \ {v}` to `v`.
    pub fn disconnects(&self, g: &Graph, sources: &[usize], v: usize) -> bool {
        let n = g.node_count();
        let removed_node = |x: usize| self.cut_nodes.contains(&x);
        let mut adj = vec![Vec::new(); n];
        for (i, &(a, b)) in g.edges().iter().enumerate() {
            if self.cut_edges.contains(&i) {
                continue;
            }
            adj[a].push(b);
            if !g.is_directed() {
                adj[b].push(a);
            }
        }
        let mut seen = vec![false; n];
        let mut stack: Vec<usize> = sources
            .iter()
            .copied()
            .filter(|&u| u != v && !removed_node(u))
            .collect();
        for &u in &stack {
            seen[u] = true;
        }
        while let Some(x) = stack.pop() {
            if x == v {
                return false;
            }
            for &y in &adj[x] {
                if !seen[y] && !removed_node(y) {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        true
    }
}

/// Minimum cut for `λ^q_G(S, v)`, read from the source-minimal residual side.
pub fn min_cut_certificate(
    g: &Graph,
    q: &[Capacity],
    sources: &[usize],
    v: usize,
) -> Result<CutCertificate, Error> {
    let others: Vec<usize> = sources.iter().copied().filter(|&u| u != v).collect();
    let split = supply_network(g, |_| Extended::Infinite, q, &others, v, None)?;
    let flow = split.network.max_flow();
    let side = &flow.source_side;
    let mut cut_nodes = Vec::new();
    let mut crossing = Vec::new();
    for a in split.network.arcs() {
        if side[a.tail] && !side[a.head] {
            match a.origin {
                ArcOrigin::Splitter(x) => cut_nodes.push(x),
                ArcOrigin::Edge { tail, head } => crossing.push((tail, head)),
                ArcOrigin::Supply(_) => unreachable!("infinite supply arcs are never cut"),
            }
        }
    }
    let mut cut_edges: Vec<usize> = g
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, &(a, b))| {
            crossing.contains(&(a, b)) || (!g.is_directed() && crossing.contains(&(b, a)))
        })
        .map(|(i, _)| i)
        .collect();
    cut_edges.sort_unstable();
    cut_nodes.sort_unstable();
    let value = cut_edges.len() as u64
        + cut_nodes
            .iter()
            .map(|&x| q[x].finite().expect("finite node in a finite cut"))
            .sum::<u64>();
    debug_assert_eq!(value, flow.value, "max-flow equals min-cut");
    Ok(CutCertificate {
        cut_edges,
        cut_nodes,
        value,
    })
}

/// `μ_G(S, v)`: minimum total edge cost of a subgraph carrying `demand` units
/// in the `(p, q)` construction, or infinity when `λ^{p,q}_G(S, v) < demand`.
pub fn mu(
    g: &Graph,
    edge_costs: &[Rational],
    p: &[Capacity],
    q: &[Capacity],
    sources: &[usize],
    v: usize,
    demand: u64,
) -> Result<Cost, Error> {
    assert_eq!(edge_costs.len(), g.edge_count(), "one cost per edge");
    if demand == 0 {
        return Ok(Cost::zero());
    }
    if let Some(neg) = edge_costs.iter().position(|c| *c < Rational::from_integer(0)) {
        return Err(Error::Precondition(format!("edge {neg} has a negative cost")));
    }
    let scale = common_denominator(edge_costs);
    let scaled: Vec<i64> = edge_costs
        .iter()
        .map(|c| (c * Rational::from_integer(scale)).to_integer())
        .collect();
    let split = supply_network(g, |u| p[u], q, sources, v, Some(&scaled))?;
    Ok(match split.network.min_cost_flow(demand) {
        Some((total, _)) => {
            let total = i64::try_from(total).expect("flow cost fits in i64");
            Extended::Finite(Rational::new(total, scale))
        }
        None => Extended::Infinite,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inf(n: usize) -> Vec<Capacity> {
        vec![Extended::Infinite; n]
    }

    fn ones(n: usize) -> Vec<Capacity> {
        vec![Extended::Finite(1); n]
    }

    #[test]
    fn split_single_node() {
        let g = Graph::new(1, true);
        let s = split_transform(&g, &ones(1), &[]).unwrap();
        assert_eq!(s.network.node_count(), 2);
        assert_eq!(s.network.arcs().len(), 1);
        assert!(s.is_split(0));
    }

    #[test]
    fn split_directed_path() {
        let g = Graph::from_edges(3, true, [(0, 1), (1, 2)]).unwrap();
        let q = vec![Extended::Finite(1), Extended::Finite(2), Extended::Finite(1)];
        let s = split_transform(&g, &q, &[0, 2]).unwrap();
        let arcs: Vec<(usize, usize, u64)> = s
            .network
            .arcs()
            .iter()
            .map(|a| (a.tail, a.head, a.capacity))
            .collect();
        let (a, b_in, b_out, c) = (s.node_out[0], s.node_in[1], s.node_out[1], s.node_in[2]);
        assert_eq!(arcs.len(), 3);
        assert!(arcs.contains(&(a, b_in, 1)));
        assert!(arcs.contains(&(b_in, b_out, 2)));
        assert!(arcs.contains(&(b_out, c, 1)));
    }

    #[test]
    fn split_rejects_zero_capacity() {
        let g = Graph::new(2, false);
        let q = vec![Extended::Finite(0), Extended::Finite(1)];
        assert!(matches!(split_transform(&g, &q, &[]), Err(Error::ZeroCapacity(0))));
    }

    #[test]
    fn lambda_q_examples() {
        let g = Graph::from_edges(2, false, [(0, 1)]).unwrap();
        assert_eq!(lambda_q(&g, &ones(2), &[0], 1).unwrap(), 1);
        assert_eq!(lambda_q(&g, &ones(2), &[1], 1).unwrap(), 0);
        // Source nodes are capacitated: two parallel edges but q_s = 1.
        let g = Graph::from_edges(2, false, [(0, 1), (0, 1)]).unwrap();
        assert_eq!(lambda_q(&g, &ones(2), &[0], 1).unwrap(), 1);
        assert_eq!(lambda_q(&g, &inf(2), &[0], 1).unwrap(), 2);
    }

    #[test]
    fn lambda_q_on_k4() {
        let mut g = Graph::new(4, false);
        for u in 0..4 {
            for v in u + 1..4 {
                g.add_edge(u, v).unwrap();
            }
        }
        // With q ≡ 1 the single source node caps the flow.
        assert_eq!(lambda_q(&g, &ones(4), &[0], 3).unwrap(), 1);
        assert_eq!(lambda_q(&g, &inf(4), &[0], 3).unwrap(), 3);
        assert_eq!(pair_connectivity(&g, &ones(4), 0, 3, u64::MAX).unwrap(), 3);
    }

    #[test]
    fn lambda_pq_closed_form_cases() {
        let g = Graph::new(2, false);
        let p = vec![Extended::Finite(2), Extended::Finite(2)];
        assert_eq!(lambda_pq(&g, &p, &ones(2), &[1], 1).unwrap(), Extended::Finite(2));
        let g = Graph::from_edges(3, false, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(
            lambda_pq(&g, &inf(3), &inf(3), &[0], 2).unwrap(),
            Extended::Finite(2)
        );
        assert_eq!(
            lambda_pq(&g, &inf(3), &inf(3), &[0, 2], 2).unwrap(),
            Extended::Infinite
        );
    }

    #[test]
    fn connectivity_presets() {
        let g = Graph::new(1, false);
        assert_eq!(
            connectivity(ConnectivityKind::KappaPrime, &g, &[0], 0).unwrap(),
            Extended::Finite(1)
        );
        assert_eq!(
            connectivity(ConnectivityKind::KappaHat, &g, &[0], 0).unwrap(),
            Extended::Infinite
        );
        // Star with center 3 and leaves 0, 1, 2.
        let g = Graph::from_edges(4, false, [(0, 3), (1, 3), (2, 3)]).unwrap();
        assert_eq!(
            connectivity(ConnectivityKind::KappaHat, &g, &[0, 1, 2], 3).unwrap(),
            Extended::Finite(3)
        );
        assert!(matches!(
            connectivity(ConnectivityKind::KappaDirected, &g, &[0], 3),
            Err(Error::Incompatible(_))
        ));
    }

    #[test]
    fn kappa_directed_lets_sources_share() {
        // Two sources 0, 1 both pass through 1 -> 2: node 1 is a source, so it
        // may carry both paths; node 2 is internal and carries one.
        let g = Graph::from_edges(4, true, [(0, 1), (1, 2), (2, 3), (1, 3)]).unwrap();
        assert_eq!(
            connectivity(ConnectivityKind::KappaDirected, &g, &[0, 1], 3).unwrap(),
            Extended::Finite(2)
        );
        assert_eq!(
            connectivity(ConnectivityKind::KappaDirected, &g, &[0], 3).unwrap(),
            Extended::Finite(1)
        );
    }

    #[test]
    fn certificates_disconnect() {
        // Bridge.
        let g = Graph::from_edges(3, false, [(0, 1), (1, 2)]).unwrap();
        let c = min_cut_certificate(&g, &inf(3), &[0], 2).unwrap();
        assert_eq!(c.value, 1);
        assert_eq!(c.cut_edges, vec![0]);
        assert!(c.disconnects(&g, &[0], 2));
        // Already disconnected: empty cut.
        let g = Graph::from_edges(3, false, [(0, 1)]).unwrap();
        let c = min_cut_certificate(&g, &ones(3), &[0], 2).unwrap();
        assert_eq!(c.value, 0);
        assert!(c.cut_edges.is_empty() && c.cut_nodes.is_empty());
        // Node cut through a capacitated middle node.
        let g = Graph::from_edges(4, false, [(0, 1), (0, 1), (1, 3), (1, 3), (0, 2)]).unwrap();
        let q = vec![Extended::Infinite, Extended::Finite(1), Extended::Infinite, Extended::Infinite];
        let c = min_cut_certificate(&g, &q, &[0], 3).unwrap();
        assert_eq!(c.value, 1);
        assert_eq!(c.cut_nodes, vec![1]);
        assert!(c.disconnects(&g, &[0], 3));
    }

    #[test]
    fn mu_examples() {
        // Two parallel s-v paths: s-a-v with cost 3, s-b-v with cost 5.
        let g = Graph::from_edges(4, false, [(0, 1), (1, 3), (0, 2), (2, 3)]).unwrap();
        let costs: Vec<Rational> = [1, 2, 2, 3].iter().map(|&c| Rational::from_integer(c)).collect();
        let p = inf(4);
        let q = inf(4);
        assert_eq!(mu(&g, &costs, &p, &q, &[0], 3, 0).unwrap(), Cost::zero());
        assert_eq!(mu(&g, &costs, &p, &q, &[0], 3, 1).unwrap(), Cost::int(3));
        assert_eq!(mu(&g, &costs, &p, &q, &[0], 3, 2).unwrap(), Cost::int(8));
        assert_eq!(mu(&g, &costs, &p, &q, &[0], 3, 3).unwrap(), Extended::Infinite);
        let halves: Vec<Rational> = costs.iter().map(|c| c / 2).collect();
        assert_eq!(
            mu(&g, &halves, &p, &q, &[0], 3, 2).unwrap(),
            Cost::int(4)
        );
    }

    #[test]
    fn pair_cut_biset_matches_value() {
        let g = Graph::from_edges(4, false, [(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        let q = vec![Extended::Finite(1), Extended::Finite(1), Extended::Finite(2), Extended::Finite(1)];
        let (value, b) = pair_min_cut(&g, &q, 0, 3).unwrap();
        assert_eq!(value, 2);
        assert!(b.inner().contains(0) && !b.outer().contains(3));
        let cut = b
            .boundary()
            .iter()
            .map(|v| q[v].finite().unwrap())
            .sum::<u64>()
            + crate::biset::delta_count(g.edges(), &b, false) as u64;
        assert_eq!(cut, value);
    }
}
