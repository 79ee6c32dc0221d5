//! Integral arc networks with shortest-augmenting-path max-flow and
//! successive-shortest-path min-cost flow.

use std::collections::{HashMap, VecDeque};

use crate::numeric::{Capacity, Extended};

/// Stand-in for an infinite arc capacity. Any flow value at or above it is
/// reported as infinite: a finite cut can never reach it at desk scale.
pub const INFINITE_CAPACITY: u64 = 1 << 50;

pub fn arc_capacity(c: Capacity) -> u64 {
    c.clamp_to(INFINITE_CAPACITY)
}

pub fn flow_value(x: u64) -> Capacity {
    if x >= INFINITE_CAPACITY {
        Extended::Infinite
    } else {
        Extended::Finite(x)
    }
}

/// Where an arc of a derived network came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArcOrigin {
    /// Super-source to a source node.
    Supply(usize),
    /// `v_in -> v_out` of a split node.
    Splitter(usize),
    /// A copy of an original edge, oriented `tail -> head`.
    Edge { tail: usize, head: usize },
}

#[derive(Debug, Clone)]
pub struct Arc {
    pub tail: usize,
    pub head: usize,
    pub capacity: u64,
    pub cost: i64,
    pub origin: ArcOrigin,
}

/// A network of integral-capacity arcs with a source and a sink.
///
/// Parallel arcs with the same endpoints, cost, and origin kind are merged
/// into one arc whose capacity is the multiplicity.
#[derive(Debug, Clone)]
pub struct ArcNetwork {
    node_count: usize,
    arcs: Vec<Arc>,
    merged: HashMap<(usize, usize, i64, ArcOrigin), usize>,
    pub source: usize,
    pub sink: usize,
}

impl ArcNetwork {
    pub fn new(node_count: usize, source: usize, sink: usize) -> Self {
        ArcNetwork {
            node_count,
            arcs: Vec::new(),
            merged: HashMap::new(),
            source,
            sink,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn add_node(&mut self) -> usize {
        self.node_count += 1;
        self.node_count - 1
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn add_arc(&mut self, tail: usize, head: usize, capacity: u64, cost: i64, origin: ArcOrigin) {
        if capacity == 0 {
            return;
        }
        let key = (tail, head, cost, origin);
        match self.merged.get(&key) {
            Some(&i) => {
                let a = &mut self.arcs[i];
                a.capacity = (a.capacity + capacity).min(INFINITE_CAPACITY);
            }
            None => {
                self.merged.insert(key, self.arcs.len());
                self.arcs.push(Arc {
                    tail,
                    head,
                    capacity: capacity.min(INFINITE_CAPACITY),
                    cost,
                    origin,
                });
            }
        }
    }

    fn residual(&self) -> Residual {
        let mut r = Residual {
            adj: vec![Vec::new(); self.node_count],
            to: Vec::with_capacity(2 * self.arcs.len()),
            cap: Vec::with_capacity(2 * self.arcs.len()),
            cost: Vec::with_capacity(2 * self.arcs.len()),
        };
        for a in &self.arcs {
            r.push(a.tail, a.head, a.capacity, a.cost);
        }
        r
    }

    /// Maximum flow from source to sink.
    pub fn max_flow(&self) -> FlowResult {
        self.max_flow_up_to(u64::MAX)
    }

    /// Maximum flow, stopping as soon as the value reaches `limit`.
    pub fn max_flow_up_to(&self, limit: u64) -> FlowResult {
        let mut r = self.residual();
        let mut value = 0u64;
        if self.source != self.sink {
            while value < limit {
                let Some(parent) = r.bfs(self.source, self.sink) else {
                    break;
                };
                let mut push = limit - value;
                let mut v = self.sink;
                while v != self.source {
                    let e = parent[v];
                    push = push.min(r.cap[e]);
                    v = r.to[e ^ 1];
                }
                let mut v = self.sink;
                while v != self.source {
                    let e = parent[v];
                    r.cap[e] -= push;
                    r.cap[e ^ 1] += push;
                    v = r.to[e ^ 1];
                }
                value = value.saturating_add(push);
            }
        }
        let reachable = r.reachable_from(self.source);
        let arc_flow = (0..self.arcs.len())
            .map(|i| self.arcs[i].capacity - r.cap[2 * i])
            .collect();
        FlowResult {
            value,
            arc_flow,
            source_side: reachable,
        }
    }

    /// Cheapest flow of exactly `amount` units; `None` when the maximum flow
    /// is smaller. Arc costs must be nonnegative.
    pub fn min_cost_flow(&self, amount: u64) -> Option<(i128, Vec<u64>)> {
        let mut r = self.residual();
        let mut sent = 0u64;
        let mut total: i128 = 0;
        while sent < amount {
            let (dist, parent) = r.bellman_ford(self.source);
            dist[self.sink]?;
            let mut push = amount - sent;
            let mut v = self.sink;
            while v != self.source {
                let e = parent[v].expect("path arc");
                push = push.min(r.cap[e]);
                v = r.to[e ^ 1];
            }
            let mut v = self.sink;
            let mut path_cost: i128 = 0;
            while v != self.source {
                let e = parent[v].expect("path arc");
                r.cap[e] -= push;
                r.cap[e ^ 1] += push;
                path_cost += r.cost[e] as i128;
                v = r.to[e ^ 1];
            }
            total += path_cost * push as i128;
            sent += push;
        }
        let flow = (0..self.arcs.len())
            .map(|i| self.arcs[i].capacity - r.cap[2 * i])
            .collect();
        Some((total, flow))
    }
}

#[derive(Debug, Clone)]
pub struct FlowResult {
    pub value: u64,
    /// Flow on each arc of the network, indexed like `ArcNetwork::arcs`.
    pub arc_flow: Vec<u64>,
    /// Nodes reachable from the source in the final residual network.
    pub source_side: Vec<bool>,
}

struct Residual {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<u64>,
    cost: Vec<i64>,
}

impl Residual {
    fn push(&mut self, u: usize, v: usize, cap: u64, cost: i64) {
        self.adj[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(cap);
        self.cost.push(cost);
        self.adj[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(0);
        self.cost.push(-cost);
    }

    fn bfs(&self, s: usize, t: usize) -> Option<Vec<usize>> {
        let n = self.adj.len();
        let mut parent = vec![usize::MAX; n];
        let mut seen = vec![false; n];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let v = self.to[e];
                if self.cap[e] > 0 && !seen[v] {
                    seen[v] = true;
                    parent[v] = e;
                    if v == t {
                        return Some(parent);
                    }
                    queue.push_back(v);
                }
            }
        }
        None
    }

    fn reachable_from(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &e in &self.adj[u] {
                let v = self.to[e];
                if self.cap[e] > 0 && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }

    /// Queue-based Bellman-Ford over residual arcs.
    fn bellman_ford(&self, s: usize) -> (Vec<Option<i128>>, Vec<Option<usize>>) {
        let n = self.adj.len();
        let mut dist: Vec<Option<i128>> = vec![None; n];
        let mut parent = vec![None; n];
        let mut in_queue = vec![false; n];
        dist[s] = Some(0);
        let mut queue = VecDeque::from([s]);
        in_queue[s] = true;
        while let Some(u) = queue.pop_front() {
            in_queue[u] = false;
            let du = dist[u].expect("queued nodes are labelled");
            for &e in &self.adj[u] {
                if self.cap[e] == 0 {
                    continue;
                }
                let v = self.to[e];
                let nd = du + self.cost[e] as i128;
                if dist[v].is_none_or(|dv| nd < dv) {
                    dist[v] = Some(nd);
                    parent[v] = Some(e);
                    if !in_queue[v] {
                        in_queue[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        (dist, parent)
    }
}
