//! Brute-force reference implementations used by the integration tests.
//! Nothing here calls the library's flow code.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use srcloc::graph::{Edge, Graph};
use srcloc::numeric::{Capacity, Cost, Extended, Rational};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, m: usize, directed: bool) -> Graph {
    let mut g = Graph::new(n, directed);
    if n < 2 {
        return g;
    }
    for _ in 0..m {
        let u = rng.gen_range(0..n);
        let mut v = rng.gen_range(0..n - 1);
        if v >= u {
            v += 1;
        }
        g.add_edge(u, v).unwrap();
    }
    g
}

pub fn random_subset(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    (0..n).filter(|_| rng.gen_bool(0.5)).collect()
}

pub fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u64..1 << n).map(move |m| (0..n).filter(|&i| m >> i & 1 == 1).collect())
}

/// Whether some node of `from` reaches `to` after deleting the masked edges
/// and nodes.
pub fn reaches(g: &Graph, dead_edges: u64, dead_nodes: u64, from: &[usize], to: usize) -> bool {
    let n = g.node_count();
    let mut seen = vec![false; n];
    let mut stack: Vec<usize> = from
        .iter()
        .copied()
        .filter(|&u| dead_nodes >> u & 1 == 0)
        .collect();
    for &u in &stack {
        seen[u] = true;
    }
    while let Some(u) = stack.pop() {
        if u == to {
            return true;
        }
        for (i, &(a, b)) in g.edges().iter().enumerate() {
            if dead_edges >> i & 1 == 1 {
                continue;
            }
            let mut step = |x: usize, y: usize| {
                if x == u && dead_nodes >> y & 1 == 0 && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            };
            step(a, b);
            if !g.is_directed() {
                step(b, a);
            }
        }
    }
    false
}

/// Minimum of `|C ∩ E| + Σ_{u ∈ C ∩ V} q_u` over cuts `C` that separate
/// `from` from `to`, where only nodes outside `protected` may be cut.
pub fn min_cut(g: &Graph, q: &[Capacity], from: &[usize], to: usize, protected: &[usize]) -> u64 {
    let n = g.node_count();
    let m = g.edge_count();
    assert!(m <= 20 && n <= 16);
    let cuttable: Vec<usize> = (0..n)
        .filter(|v| !protected.contains(v) && q[*v].is_finite())
        .collect();
    let mut best = u64::MAX;
    for node_mask in 0u64..1 << cuttable.len() {
        let mut dead = 0u64;
        let mut cost = 0u64;
        for (i, &v) in cuttable.iter().enumerate() {
            if node_mask >> i & 1 == 1 {
                dead |= 1 << v;
                cost += q[v].finite().unwrap();
            }
        }
        if cost >= best {
            continue;
        }
        for edge_mask in 0u64..1 << m {
            let total = cost + edge_mask.count_ones() as u64;
            if total < best && !reaches(g, edge_mask, dead, from, to) {
                best = total;
            }
        }
    }
    best
}

/// `λ^q(S, v)`: sources are `S \ {v}` and may themselves be cut.
pub fn lambda_q(g: &Graph, q: &[Capacity], sources: &[usize], v: usize) -> u64 {
    let from: Vec<usize> = sources.iter().copied().filter(|&u| u != v).collect();
    min_cut(g, q, &from, v, &[v])
}

/// `λ^{p,q}(S, v)` by its closed form (valid when `q ≤ p`).
pub fn lambda_pq(g: &Graph, p: &[Capacity], q: &[Capacity], sources: &[usize], v: usize) -> Capacity {
    let base = lambda_q(g, q, sources, v);
    if sources.contains(&v) {
        p[v].map(|pv| pv + base)
    } else {
        Extended::Finite(base)
    }
}

/// Connectivity between two terminals that are never cut.
pub fn pair_lambda(g: &Graph, q: &[Capacity], s: usize, t: usize) -> u64 {
    min_cut(g, q, &[s], t, &[s, t])
}

/// Pair connectivity as the cheapest biset `(X, X⁺)` with `s ∈ X`,
/// `t ∉ X⁺`: edges leaving `X` past `X⁺` plus the capacity of `X⁺ \ X`.
pub fn biset_pair_lambda(g: &Graph, q: &[Capacity], s: usize, t: usize) -> u64 {
    let n = g.node_count();
    let mut best = u64::MAX;
    // Each node is inner (0), boundary (1) or outside (2).
    let mut side = vec![0u8; n];
    let total = 3u64.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        for x in side.iter_mut() {
            *x = (c % 3) as u8;
            c /= 3;
        }
        if side[s] != 0 || side[t] != 2 {
            continue;
        }
        let mut cost = 0u64;
        let mut finite = true;
        for v in 0..n {
            if side[v] == 1 {
                match q[v] {
                    Extended::Finite(x) => cost += x,
                    Extended::Infinite => finite = false,
                }
            }
        }
        if !finite {
            continue;
        }
        for &(a, b) in g.edges() {
            let crosses = (side[a] == 0 && side[b] == 2) || (!g.is_directed() && side[b] == 0 && side[a] == 2);
            if crosses {
                cost += 1;
            }
        }
        best = best.min(cost);
    }
    best
}

/// `λ^q(S, v)` as the cheapest biset separating the uncut sources from `v`;
/// each source is inner or boundary, `v` is outside.
pub fn biset_lambda_q(g: &Graph, q: &[Capacity], sources: &[usize], v: usize) -> u64 {
    let n = g.node_count();
    let mut best = u64::MAX;
    let mut side = vec![0u8; n];
    for code in 0..3u64.pow(n as u32) {
        let mut c = code;
        for x in side.iter_mut() {
            *x = (c % 3) as u8;
            c /= 3;
        }
        if side[v] != 2 || sources.iter().any(|&u| u != v && side[u] == 2) {
            continue;
        }
        let mut cost = 0u64;
        let mut finite = true;
        for u in 0..n {
            if side[u] == 1 {
                match q[u] {
                    Extended::Finite(x) => cost += x,
                    Extended::Infinite => finite = false,
                }
            }
        }
        if !finite || cost >= best {
            continue;
        }
        for &(a, b) in g.edges() {
            if (side[a] == 0 && side[b] == 2) || (!g.is_directed() && side[b] == 0 && side[a] == 2) {
                cost += 1;
            }
        }
        best = best.min(cost);
    }
    best
}

fn simple_paths(g: &Graph, sources: &[usize], v: usize) -> Vec<Vec<usize>> {
    // Paths as edge-index sequences; only the first node lies in `sources`.
    let mut out = Vec::new();
    fn walk(g: &Graph, at: usize, v: usize, sources: &[usize], nodes: &mut Vec<usize>, edges: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if at == v {
            out.push(edges.clone());
            return;
        }
        for (i, &(a, b)) in g.edges().iter().enumerate() {
            let next = if a == at {
                Some(b)
            } else if !g.is_directed() && b == at {
                Some(a)
            } else {
                None
            };
            let Some(y) = next else { continue };
            if nodes.contains(&y) || (y != v && sources.contains(&y)) {
                continue;
            }
            nodes.push(y);
            edges.push(i);
            walk(g, y, v, sources, nodes, edges, out);
            nodes.pop();
            edges.pop();
        }
    }
    for &s in sources {
        if s != v {
            walk(g, s, v, sources, &mut vec![s], &mut Vec::new(), &mut out);
        }
    }
    out
}

fn path_nodes(g: &Graph, path: &[usize], v: usize) -> Vec<usize> {
    let mut nodes = Vec::new();
    for &i in path {
        let (a, b) = g.edges()[i];
        nodes.push(a);
        nodes.push(b);
    }
    nodes.retain(|&x| x != v);
    nodes.sort();
    nodes.dedup();
    nodes
}

/// Largest family of pairwise compatible paths, each given as an edge mask
/// and a mask of nodes it may not share.
fn max_packing(paths: &[(u64, u64)], start: usize, used_edges: u64, used_nodes: u64, count: usize, best: &mut usize) {
    if count > *best {
        *best = count;
    }
    if count + (paths.len() - start) <= *best {
        return;
    }
    for j in start..paths.len() {
        let (e, n) = paths[j];
        if e & used_edges == 0 && n & used_nodes == 0 {
            max_packing(paths, j + 1, used_edges | e, used_nodes | n, count + 1, best);
        }
    }
}

fn pack(g: &Graph, sources: &[usize], v: usize, exempt: impl Fn(usize) -> bool) -> u64 {
    let paths: Vec<(u64, u64)> = simple_paths(g, sources, v)
        .into_iter()
        .map(|p| {
            let edges = p.iter().fold(0u64, |acc, &i| acc | 1 << i);
            let nodes = path_nodes(g, &p, v)
                .into_iter()
                .filter(|&x| !exempt(x))
                .fold(0u64, |acc, x| acc | 1 << x);
            (edges, nodes)
        })
        .collect();
    let mut best = 0;
    max_packing(&paths, 0, 0, 0, 0, &mut best);
    best as u64
}

/// `κ̂(S, v)`: paths disjoint outside `v`; infinite when `v ∈ S`.
pub fn kappa_hat(g: &Graph, sources: &[usize], v: usize) -> Capacity {
    if sources.contains(&v) {
        return Extended::Infinite;
    }
    Extended::Finite(pack(g, sources, v, |_| false))
}

/// `κ′(S, v)`: `κ̂` when `v ∉ S`, else `1 + κ̂(S \ {v}, v)`.
pub fn kappa_prime(g: &Graph, sources: &[usize], v: usize) -> Capacity {
    if sources.contains(&v) {
        let rest: Vec<usize> = sources.iter().copied().filter(|&u| u != v).collect();
        return kappa_hat(g, &rest, v).map(|x| x + 1);
    }
    kappa_hat(g, sources, v)
}

/// `κ(S, v)`: edge-disjoint paths that share no node outside `S ∪ {v}`.
pub fn kappa(g: &Graph, sources: &[usize], v: usize) -> Capacity {
    if sources.contains(&v) {
        return Extended::Infinite;
    }
    Extended::Finite(pack(g, sources, v, |x| sources.contains(&x)))
}

pub fn harmonic(n: u64) -> BigRational {
    (1..=n).fold(BigRational::from_integer(BigInt::from(0)), |acc, i| {
        acc + BigRational::new(BigInt::from(1), BigInt::from(i))
    })
}

pub fn big(x: &Rational) -> BigRational {
    BigRational::new(BigInt::from(*x.numer()), BigInt::from(*x.denom()))
}

/// `cost ≤ bound · opt`.
pub fn within(cost: &Cost, bound: &BigRational, opt: &Cost) -> bool {
    match (cost, opt) {
        (Extended::Finite(c), Extended::Finite(o)) => big(c) <= bound * big(o),
        (_, Extended::Infinite) => true,
        (Extended::Infinite, _) => false,
    }
}

/// Cheapest subset of `0..n` accepted by `feasible`.
pub fn cheapest(n: usize, cost: impl Fn(&[usize]) -> Cost, mut feasible: impl FnMut(&[usize]) -> bool) -> Option<(Cost, Vec<usize>)> {
    let mut best: Option<(Cost, Vec<usize>)> = None;
    for set in subsets(n) {
        let c = cost(&set);
        if best.as_ref().is_some_and(|(b, _)| *b <= c) {
            continue;
        }
        if feasible(&set) {
            best = Some((c, set));
        }
    }
    best
}

/// Smallest number of sets covering `0..elements`.
pub fn set_cover(sets: &[Vec<usize>], elements: usize) -> Option<u64> {
    cheapest(
        sets.len(),
        |s| Cost::int(s.len() as i64),
        |s| (0..elements).all(|b| s.iter().any(|&a| sets[a].contains(&b))),
    )
    .map(|(c, _)| c.finite().unwrap().to_integer() as u64)
}

pub fn edges_of(g: &Graph) -> Vec<Edge> {
    g.edges().to_vec()
}
