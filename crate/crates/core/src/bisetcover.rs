//! Undirected augmentation through biset covers.
//!
//! A stage raises `λ^q(u, v)` by one on a set of demand pairs. The bisets
//! that still need an edge are the tight ones, `h(X̂) = 1` for
//! `h(X̂) = max(r(X̂) − q(Γ) − |δ_G(X̂)|, 0)`; a star centered at `a` on a
//! transversal of their minimal inner parts covers all of them. Stages are
//! chained to reach arbitrary requirements.

use std::collections::BTreeSet;

use num_rational::BigRational;

use crate::biset::{minimal_members, Biset, BisetFamily, NodeSet};
use crate::bounds::{family_degree_bound, sequential_bound};
use crate::error::{Error, Infeasibility};
use crate::flow;
use crate::graph::{Edge, Graph};
use crate::instance::{CostMode, Demand, SnaInstance, SslInstance};
use crate::numeric::{Capacity, Cost, Extended, Level, Rational};
use crate::reductions::{ssl_to_rooted_sna, SslSnaMap};
use crate::submodular::{element_set, wolsey_greedy, CoverProblem, ElementSet, GreedyTrace};

/// Default largest node count for `3^n` biset enumeration.
pub const DEFAULT_ENUMERATION_CAP: usize = 12;
const MASK_LIMIT: usize = 24;

/// `r(X̂)`: the largest requirement of a demand covering `b`, 0 if none.
pub fn requirement_of_biset(demands: &[Demand], b: &Biset, directed: bool) -> u64 {
    demands
        .iter()
        .filter(|d| crate::biset::covers((d.s, d.v), b, directed))
        .map(|d| d.r)
        .max()
        .unwrap_or(0)
}

/// `h(X̂) = max(r(X̂) − q(Γ(X̂)) − |δ_G(X̂)|, 0)`.
pub fn deficiency(g: &Graph, q: &[Capacity], demands: &[Demand], b: &Biset) -> u64 {
    let r = requirement_of_biset(demands, b, g.is_directed());
    if r == 0 {
        return 0;
    }
    let mut cut = crate::biset::delta_count(g.edges(), b, g.is_directed()) as u64;
    for v in b.boundary().iter() {
        match q[v] {
            Extended::Finite(x) => cut += x,
            Extended::Infinite => return 0,
        }
    }
    r.saturating_sub(cut)
}

/// Biset evaluation on bitmasks, for enumeration.
struct MaskEval {
    n: usize,
    directed: bool,
    edges: Vec<(u64, u64)>,
    demands: Vec<(u64, u64, u64)>,
    q: Vec<Capacity>,
}

impl MaskEval {
    fn new(g: &Graph, q: &[Capacity], demands: &[Demand]) -> Self {
        let bit = |v: usize| 1u64 << v;
        MaskEval {
            n: g.node_count(),
            directed: g.is_directed(),
            edges: g.edges().iter().map(|&(u, v)| (bit(u), bit(v))).collect(),
            demands: demands
                .iter()
                .filter(|d| d.r > 0)
                .map(|d| (bit(d.s), bit(d.v), d.r))
                .collect(),
            q: q.to_vec(),
        }
    }

    fn covers(&self, u: u64, v: u64, inner: u64, outer: u64) -> bool {
        let fwd = u & inner != 0 && v & outer == 0;
        fwd || (!self.directed && v & inner != 0 && u & outer == 0)
    }

    fn deficiency(&self, inner: u64, outer: u64) -> u64 {
        let r = self
            .demands
            .iter()
            .filter(|&&(u, v, _)| self.covers(u, v, inner, outer))
            .map(|d| d.2)
            .max()
            .unwrap_or(0);
        if r == 0 {
            return 0;
        }
        let mut cut = 0u64;
        let mut boundary = outer & !inner;
        while boundary != 0 {
            let v = boundary.trailing_zeros() as usize;
            boundary &= boundary - 1;
            match self.q[v] {
                Extended::Finite(x) => cut += x,
                Extended::Infinite => return 0,
            }
            if cut >= r {
                return 0;
            }
        }
        for &(u, v) in &self.edges {
            if self.covers(u, v, inner, outer) {
                cut += 1;
                if cut >= r {
                    return 0;
                }
            }
        }
        r - cut
    }

    fn biset(&self, inner: u64, outer: u64) -> Biset {
        Biset::new(NodeSet::from_mask(self.n, inner), NodeSet::from_mask(self.n, outer))
            .expect("inner is a submask of outer")
    }

    /// Calls `f` on every biset with nonempty inner part and outer part short
    /// of the whole universe.
    fn for_each(&self, mut f: impl FnMut(u64, u64)) {
        let full = (1u64 << self.n) - 1;
        for outer in 0..full {
            let mut inner = outer;
            while inner != 0 {
                f(inner, outer);
                inner = (inner - 1) & outer;
            }
        }
    }
}

fn check_enumerable(n: usize, cap: usize) -> Result<(), Error> {
    if n > cap.min(MASK_LIMIT) {
        return Err(Error::CapExceeded {
            what: "biset enumeration universe",
            size: n,
            cap: cap.min(MASK_LIMIT),
        });
    }
    Ok(())
}

/// Requirements for one augmentation step: each listed pair must gain one
/// unit of `λ^q` over its value in `g`.
#[derive(Debug, Clone)]
pub struct TightQuery {
    pub graph: Graph,
    pub capacity: Vec<Capacity>,
    /// Requirements set to current connectivity plus one.
    pub demands: Vec<Demand>,
}

impl TightQuery {
    pub fn new(graph: Graph, capacity: Vec<Capacity>, pairs: &[Edge]) -> Result<Self, Error> {
        let mut demands = Vec::with_capacity(pairs.len());
        for &(s, v) in pairs {
            let lambda = flow::pair_connectivity(&graph, &capacity, s, v, u64::MAX)?;
            demands.push(Demand { s, v, r: lambda + 1 });
        }
        Ok(TightQuery {
            graph,
            capacity,
            demands,
        })
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn demand_edges(&self) -> Vec<Edge> {
        self.demands.iter().map(|d| (d.s, d.v)).collect()
    }

    pub fn deficiency(&self, b: &Biset) -> u64 {
        deficiency(&self.graph, &self.capacity, &self.demands, b)
    }
}

/// Every tight biset, by enumeration of all `3^n` bisets.
pub fn tight_bisets(query: &TightQuery, cap: usize) -> Result<BisetFamily, Error> {
    let n = query.node_count();
    check_enumerable(n, cap)?;
    let eval = MaskEval::new(&query.graph, &query.capacity, &query.demands);
    let mut members = Vec::new();
    eval.for_each(|inner, outer| {
        if eval.deficiency(inner, outer) == 1 {
            members.push(eval.biset(inner, outer));
        }
    });
    Ok(BisetFamily::new(n, members))
}

/// Minimal tight bisets whose outer part avoids `avoid` (all minimal tight
/// bisets with `None`), from source-minimal pair cuts.
///
/// Each minimal member is the inclusion-minimal minimum cut for some demand
/// pair oriented from its inner side, so the candidates are the two
/// orientations of every demand.
pub fn minimal_tight_fast(query: &TightQuery, avoid: Option<usize>) -> Result<BisetFamily, Error> {
    let n = query.node_count();
    let mut candidates = Vec::new();
    for d in &query.demands {
        let orientations: &[(usize, usize)] = if query.graph.is_directed() {
            &[(d.s, d.v)]
        } else {
            &[(d.s, d.v), (d.v, d.s)]
        };
        for &(from, to) in orientations {
            let (value, b) = flow::pair_min_cut(&query.graph, &query.capacity, from, to)?;
            if value + 1 == d.r && avoid.is_none_or(|a| !b.outer().contains(a)) {
                candidates.push(b);
            }
        }
    }
    let family = BisetFamily::new(n, candidates);
    Ok(minimal_members(&family))
}

/// Outcome of a Menger-type feasibility check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MengerVerdict {
    pub feasible: bool,
    /// A biset with `|δ_I(X̂)| < h(X̂)` when infeasible.
    pub witness: Option<Biset>,
}

/// Feasibility of `I` by recomputing every demand's flow in `G + I`; the
/// witness is a minimum cut of the first short demand.
pub fn menger_feasible(inst: &SnaInstance, chosen: &[usize]) -> Result<MengerVerdict, Error> {
    let g = inst.graph_with(chosen);
    for d in inst.active_demands() {
        let (value, b) = flow::pair_min_cut(&g, &inst.capacity, d.s, d.v)?;
        if value < d.r {
            return Ok(MengerVerdict {
                feasible: false,
                witness: Some(b),
            });
        }
    }
    Ok(MengerVerdict {
        feasible: true,
        witness: None,
    })
}

/// Feasibility of `I` by checking `|δ_I(X̂)| ≥ h(X̂)` on every biset.
pub fn menger_feasible_enumerated(
    inst: &SnaInstance,
    chosen: &[usize],
    cap: usize,
) -> Result<MengerVerdict, Error> {
    let n = inst.node_count();
    check_enumerable(n, cap)?;
    let eval = MaskEval::new(&inst.graph, &inst.capacity, &inst.demands);
    let added = Graph::from_edges(
        n,
        inst.is_directed(),
        chosen.iter().map(|&i| inst.candidates[i].edge()),
    )?;
    let extra = MaskEval::new(&added, &inst.capacity, &[]);
    let mut witness = None;
    eval.for_each(|inner, outer| {
        if witness.is_some() {
            return;
        }
        let h = eval.deficiency(inner, outer);
        if h == 0 {
            return;
        }
        let covered = extra
            .edges
            .iter()
            .filter(|&&(u, v)| extra.covers(u, v, inner, outer))
            .count() as u64;
        if covered < h {
            witness = Some(eval.biset(inner, outer));
        }
    });
    Ok(MengerVerdict {
        feasible: witness.is_none(),
        witness,
    })
}

/// Hitting set instance: every hyperedge must contain a chosen node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransversalProblem {
    pub node_count: usize,
    pub hyperedges: Vec<Vec<usize>>,
    pub costs: Vec<Cost>,
}

impl TransversalProblem {
    pub fn from_family(family: &BisetFamily, costs: Vec<Cost>) -> Self {
        TransversalProblem {
            node_count: family.universe(),
            hyperedges: family.members().iter().map(|b| b.inner().iter().collect()).collect(),
            costs,
        }
    }

    /// `Δ`: the largest number of hyperedges sharing one node.
    pub fn max_degree(&self) -> usize {
        (0..self.node_count)
            .map(|v| self.hyperedges.iter().filter(|e| e.contains(&v)).count())
            .max()
            .unwrap_or(0)
    }

    pub fn is_transversal(&self, nodes: &[usize]) -> bool {
        self.hyperedges.iter().all(|e| e.iter().any(|v| nodes.contains(v)))
    }

    pub fn cost(&self, nodes: &[usize]) -> Cost {
        let distinct: BTreeSet<usize> = nodes.iter().copied().collect();
        distinct.into_iter().fold(Cost::zero(), |acc, v| acc + self.costs[v])
    }

    /// First hyperedge without a finite-cost node.
    pub fn empty_hyperedge(&self) -> Option<usize> {
        self.hyperedges
            .iter()
            .position(|e| e.iter().all(|&v| self.costs[v].is_infinite()))
    }
}

#[derive(Debug, Clone)]
pub struct TransversalResult {
    pub nodes: Vec<usize>,
    pub cost: Rational,
    pub trace: GreedyTrace,
}

/// Greedy hitting set: most newly hit hyperedges per unit cost, ties to the
/// lowest node.
pub fn greedy_transversal(problem: &TransversalProblem) -> Result<TransversalResult, Error> {
    if let Some(i) = problem.empty_hyperedge() {
        return Err(Error::Infeasible(Infeasibility::EmptyHyperedge(i)));
    }
    let edges = &problem.hyperedges;
    let mut cover = CoverProblem::new(problem.costs.clone(), |s: &ElementSet| {
        Ok(Level::Finite(
            edges.iter().filter(|e| e.iter().any(|&v| s.contains(v))).count() as i64,
        ))
    })
    .with_target(edges.len() as i64);
    let trace = wolsey_greedy(&mut cover)?;
    Ok(TransversalResult {
        nodes: trace.chosen.clone(),
        cost: trace.cost,
        trace,
    })
}

/// `I = {e_v : v ∈ U}` where `e_v` is the cheapest candidate joining `a` and
/// `v` (lowest index on ties) among `available`.
pub fn star_cover_from_transversal(
    inst: &SnaInstance,
    center: usize,
    nodes: &[usize],
    available: &[bool],
    edge_cost: impl Fn(usize) -> Rational,
) -> Result<Vec<usize>, Error> {
    let mut chosen = Vec::with_capacity(nodes.len());
    for &v in nodes {
        let best = inst
            .candidates
            .iter()
            .enumerate()
            .filter(|(i, c)| available[*i] && ((c.u == center && c.v == v) || (c.v == center && c.u == v)))
            .map(|(i, _)| i)
            .min_by(|&i, &j| edge_cost(i).cmp(&edge_cost(j)).then(i.cmp(&j)));
        match best {
            Some(i) => chosen.push(i),
            None => {
                return Err(Error::Precondition(format!(
                    "node {v} has no candidate edge to the center {center}"
                )))
            }
        }
    }
    chosen.sort_unstable();
    Ok(chosen)
}

/// Which side condition makes a star on a transversal a cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StarCase {
    /// Every member avoids the center with its outer part.
    CenterOutside,
    /// Symmetric family with the center in no boundary.
    Symmetric,
}

/// Checks the star cover side conditions on an explicit family; on failure
/// the error names the offending biset.
pub fn star_case(family: &BisetFamily, center: usize) -> Result<StarCase, Error> {
    if family.members().iter().all(|b| !b.outer().contains(center)) {
        return Ok(StarCase::CenterOutside);
    }
    if let Some(b) = family.members().iter().find(|b| b.in_boundary(center)) {
        return Err(Error::Precondition(format!(
            "center {center} lies in the boundary of tight biset {b}"
        )));
    }
    if let Some(b) = family.members().iter().find(|b| !family.contains(&b.complement())) {
        return Err(Error::Precondition(format!(
            "family is not symmetric: the complement of {b} is missing"
        )));
    }
    Ok(StarCase::Symmetric)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TightMethod {
    Enumerate,
    FastPath,
    /// Enumerate within the cap, fast path above it.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BisetCoverOptions {
    pub method: TightMethod,
    pub enumeration_cap: usize,
}

impl Default for BisetCoverOptions {
    fn default() -> Self {
        BisetCoverOptions {
            method: TightMethod::Auto,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

impl BisetCoverOptions {
    fn enumerates(&self, n: usize) -> bool {
        match self.method {
            TightMethod::Enumerate => true,
            TightMethod::FastPath => false,
            TightMethod::Auto => n <= self.enumeration_cap.min(MASK_LIMIT),
        }
    }
}

/// Audit data for one covering stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageReport {
    pub stage: u64,
    pub demands: Vec<Edge>,
    /// Size of the full tight family, when enumerated.
    pub tight_count: Option<usize>,
    pub minimal_count: usize,
    /// `γ` of the minimal members that were covered.
    pub gamma: u64,
    /// `Δ` of the transversal hypergraph.
    pub degree: u64,
    /// `2γ + 1` or `(4γ + 1)²`.
    pub degree_bound: u64,
    /// `γ` and `Δ` of the minimal members of the full tight family, when
    /// enumerated.
    pub full_gamma: Option<u64>,
    pub full_degree: Option<u64>,
    pub transversal: Vec<usize>,
    pub added: Vec<usize>,
    pub cost: Rational,
}

/// Node costs for the transversal: the cheapest available candidate at each
/// node in edge mode; in node mode the node's cost, or 0 once it is already an
/// endpoint of the solution. The center and nodes without an available
/// candidate cost ∞.
fn transversal_costs(inst: &SnaInstance, center: usize, available: &[bool], bought: &[bool]) -> Vec<Cost> {
    let n = inst.node_count();
    let mut costs = vec![Extended::Infinite; n];
    for (i, c) in inst.candidates.iter().enumerate() {
        if !available[i] {
            continue;
        }
        let leaf = if c.u == center { c.v } else { c.u };
        let here = match inst.cost_mode {
            CostMode::Edge => Extended::Finite(c.cost),
            CostMode::Node if bought[leaf] => Cost::zero(),
            CostMode::Node => inst.node_costs[leaf],
        };
        costs[leaf] = costs[leaf].min(here);
    }
    costs[center] = Extended::Infinite;
    costs
}

/// Covers the tight family of one augmentation step with a star at the
/// candidate center. `rooted` demands that every pair has the center as an
/// endpoint, in which case only bisets avoiding the center are covered.
pub fn solve_abased_dsna(
    inst: &SnaInstance,
    chosen: &[usize],
    pairs: &[Edge],
    stage: u64,
    options: BisetCoverOptions,
) -> Result<StageReport, Error> {
    if inst.is_directed() {
        return Err(Error::Incompatible("biset cover solver needs an undirected instance".into()));
    }
    let center = inst
        .center()
        .ok_or_else(|| Error::Incompatible("candidate edges do not form a star".into()))?;
    let n = inst.node_count();
    let g = inst.graph_with(chosen);
    let query = TightQuery::new(g, inst.capacity.clone(), pairs)?;
    let rooted = pairs.iter().all(|&(s, v)| s == center || v == center);

    let (minimal, tight_count, full_gamma, full_degree) = if options.enumerates(n) {
        let family = tight_bisets(&query, options.enumeration_cap.max(n))?;
        if !rooted {
            star_case(&family, center)?;
        }
        let full_min = minimal_members(&family);
        let restricted = family.filter(|b| !b.outer().contains(center));
        (
            minimal_members(&restricted),
            Some(family.len()),
            Some(full_min.max_boundary() as u64),
            Some(full_min.max_inner_degree() as u64),
        )
    } else {
        if !rooted && inst.capacity[center].is_finite() {
            return Err(Error::Precondition(format!(
                "cannot certify that center {center} avoids every tight boundary without enumeration"
            )));
        }
        (minimal_tight_fast(&query, Some(center))?, None, None, None)
    };

    let mut available = vec![true; inst.candidates.len()];
    let mut bought = vec![false; n];
    for &i in chosen {
        available[i] = false;
        bought[inst.candidates[i].u] = true;
        bought[inst.candidates[i].v] = true;
    }
    let costs = transversal_costs(inst, center, &available, &bought);
    let problem = TransversalProblem::from_family(&minimal, costs);
    let result = greedy_transversal(&problem).map_err(|e| match e {
        Error::Infeasible(Infeasibility::EmptyHyperedge(i)) => Error::Infeasible(Infeasibility::Uncovered {
            stage: stage as usize,
            witness: minimal.members()[i].clone(),
        }),
        other => other,
    })?;
    let added = star_cover_from_transversal(inst, center, &result.nodes, &available, |i| {
        inst.candidates[i].cost
    })?;
    let gamma = minimal.max_boundary() as u64;
    let degree = problem.max_degree() as u64;
    Ok(StageReport {
        stage,
        demands: pairs.to_vec(),
        tight_count,
        minimal_count: minimal.len(),
        gamma,
        degree,
        degree_bound: family_degree_bound(gamma, rooted),
        full_gamma,
        full_degree,
        transversal: result.nodes,
        added,
        cost: result.cost,
    })
}

/// Result of the sequential undirected solver.
#[derive(Debug, Clone)]
pub struct SequentialReport {
    pub chosen: Vec<usize>,
    pub cost: Cost,
    pub stages: Vec<StageReport>,
    pub k: u64,
    /// Demands form a star centered at the candidate center.
    pub rooted: bool,
    pub bound: BigRational,
}

/// `k` stages, stage `ℓ` raising by one every demand at exactly
/// `r − k + ℓ − 1`; each stage is verified by flow before the next.
pub fn solve_abased_sna_undirected(
    inst: &SnaInstance,
    options: BisetCoverOptions,
) -> Result<SequentialReport, Error> {
    inst.validate()?;
    if inst.is_directed() {
        return Err(Error::Incompatible("sequential solver needs an undirected instance".into()));
    }
    let all: Vec<usize> = (0..inst.candidates.len()).collect();
    if let Some(v) = inst.violation(&all)? {
        return Err(Error::Infeasible(v));
    }
    let k = inst.max_requirement();
    let center = inst.center();
    let rooted = match center {
        Some(a) => inst.active_demands().all(|d| d.s == a || d.v == a),
        None => false,
    };
    let mut chosen: Vec<usize> = Vec::new();
    let mut stages = Vec::new();
    for stage in 1..=k {
        let g = inst.graph_with(&chosen);
        let mut pairs = Vec::new();
        for d in inst.active_demands() {
            let lambda = flow::pair_connectivity(&g, &inst.capacity, d.s, d.v, d.r)?;
            if lambda as i128 == d.r as i128 - k as i128 + stage as i128 - 1 {
                pairs.push((d.s, d.v));
            }
        }
        if pairs.is_empty() {
            continue;
        }
        let report = solve_abased_dsna(inst, &chosen, &pairs, stage, options)?;
        chosen.extend(&report.added);
        chosen.sort_unstable();
        let g = inst.graph_with(&chosen);
        for d in inst.active_demands() {
            let goal = (d.r + stage).saturating_sub(k);
            let (lambda, witness) = flow::pair_min_cut(&g, &inst.capacity, d.s, d.v)?;
            if lambda < goal {
                return Err(Error::Infeasible(Infeasibility::Uncovered {
                    stage: stage as usize,
                    witness,
                }));
            }
        }
        stages.push(report);
    }
    Ok(SequentialReport {
        cost: inst.cost(&chosen),
        chosen,
        stages,
        k,
        rooted,
        bound: sequential_bound(k, rooted, inst.cost_mode, inst.p_max()),
    })
}

/// Undirected source location through the rooted reduction and the
/// sequential solver.
pub fn solve_ssl_undirected(
    ssl: &SslInstance,
    options: BisetCoverOptions,
) -> Result<(Vec<usize>, SslSnaMap, SequentialReport), Error> {
    ssl.validate()?;
    if ssl.graph.is_directed() {
        return Err(Error::Incompatible("expected an undirected instance".into()));
    }
    let (sna, map) = ssl_to_rooted_sna(ssl);
    let report = solve_abased_sna_undirected(&sna, options).map_err(|e| map.pull_back_error(e))?;
    Ok((map.sources_of(&report.chosen), map, report))
}

/// Whether the endpoints of `chosen` hit every member of `family`.
pub fn endpoints_hit(inst: &SnaInstance, chosen: &[usize], family: &BisetFamily) -> bool {
    let ends = element_set(
        inst.node_count(),
        chosen.iter().flat_map(|&i| [inst.candidates[i].u, inst.candidates[i].v]),
    );
    family.members().iter().all(|b| b.inner().iter().any(|v| ends.contains(v)))
}
