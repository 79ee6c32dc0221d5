//! Brute-force exact solvers and the randomized property suite.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::json;

use crate::biset::{is_d_uncrossable, is_t_uncrossable, minimal_members, BisetFamily, NodeSet};
use crate::bisetcover::{minimal_tight_fast, tight_bisets, TightQuery, TransversalProblem};
use crate::bounds::family_degree_bound;
use crate::error::{Error, Infeasibility};
use crate::format::InstanceFile;
use crate::gen::{self, SnaParams};
use crate::instance::{CostMode, SnaInstance, SslInstance};
use crate::numeric::{Cost, Extended};
use crate::submodular::{
    element_set, find_monotonicity_violation, find_submodularity_violation, progress_g_node,
    single_edge_witnesses, ElementSet,
};

/// Enumeration limits. Exceeding one is an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleCaps {
    /// Nodes for source-set enumeration.
    pub ssl_nodes: usize,
    /// Candidates for edge-set enumeration (nodes in node-cost mode).
    pub sna_elements: usize,
    pub transversal_nodes: usize,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps {
            ssl_nodes: 12,
            sna_elements: 16,
            transversal_nodes: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactResult {
    pub optimum: Cost,
    /// First optimal solution in (cost, index list) order.
    pub solution: Vec<usize>,
    pub optimal_count: u64,
    /// Number of candidate subsets checked for feasibility.
    pub enumerated: u64,
}

fn check_cap(what: &'static str, size: usize, cap: usize) -> Result<(), Error> {
    if size > cap || size >= 63 {
        return Err(Error::CapExceeded { what, size, cap });
    }
    Ok(())
}

fn members(mask: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|&i| mask >> i & 1 == 1).collect()
}

/// Walks subsets of `0..n` by increasing cost, ties broken by the sorted
/// index list; each equal-cost group is checked in parallel and the first
/// group with a feasible member is optimal.
fn cheapest_feasible(
    n: usize,
    cost: impl Fn(&[usize]) -> Cost,
    feasible: impl Fn(&[usize]) -> Result<bool, Error> + Sync,
) -> Result<Option<ExactResult>, Error> {
    let mut order: Vec<(Cost, Vec<usize>)> = (0..1u64 << n)
        .map(|m| {
            let set = members(m, n);
            (cost(&set), set)
        })
        .collect();
    order.sort();
    let mut enumerated = 0u64;
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end < order.len() && order[end].0 == order[start].0 {
            end += 1;
        }
        let group = &order[start..end];
        let verdicts: Vec<bool> = group
            .par_iter()
            .map(|(_, set)| feasible(set))
            .collect::<Result<_, _>>()?;
        enumerated += group.len() as u64;
        if let Some(first) = verdicts.iter().position(|&ok| ok) {
            return Ok(Some(ExactResult {
                optimum: group[first].0,
                solution: group[first].1.clone(),
                optimal_count: verdicts.iter().filter(|&&ok| ok).count() as u64,
                enumerated,
            }));
        }
        start = end;
    }
    Ok(None)
}

/// Minimum-cost feasible source set.
pub fn exact_ssl(ssl: &SslInstance, caps: &OracleCaps) -> Result<ExactResult, Error> {
    let n = ssl.node_count();
    check_cap("source location instance", n, caps.ssl_nodes)?;
    let all: Vec<usize> = (0..n).collect();
    if let Some(why) = ssl.violation(&all)? {
        return Err(Error::Infeasible(why));
    }
    let found = cheapest_feasible(n, |s| ssl.cost(s), |s| ssl.is_feasible(s))?;
    Ok(found.expect("the full source set is feasible"))
}

/// Minimum-cost feasible `I ⊆ F`. In node-cost mode node sets are enumerated
/// and each stands for every candidate with both ends inside it.
pub fn exact_sna(inst: &SnaInstance, caps: &OracleCaps) -> Result<ExactResult, Error> {
    let everything: Vec<usize> = (0..inst.candidates.len()).collect();
    if let Some(why) = inst.violation(&everything)? {
        return Err(Error::Infeasible(why));
    }
    match inst.cost_mode {
        CostMode::Edge => {
            check_cap("candidate set", everything.len(), caps.sna_elements)?;
            let found = cheapest_feasible(everything.len(), |i| inst.cost(i), |i| inst.is_feasible(i))?;
            Ok(found.expect("the full candidate set is feasible"))
        }
        CostMode::Node => {
            let n = inst.node_count();
            check_cap("node set", n, caps.sna_elements)?;
            let inside = |nodes: &[usize]| -> Vec<usize> {
                let set = element_set(n, nodes.iter().copied());
                inst.candidates
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| set.contains(c.u) && set.contains(c.v))
                    .map(|(i, _)| i)
                    .collect()
            };
            let cost = |nodes: &[usize]| {
                nodes
                    .iter()
                    .fold(Cost::zero(), |acc, &v| acc + inst.node_costs[v])
            };
            let found = cheapest_feasible(n, cost, |s| inst.is_feasible(&inside(s)))?
                .expect("the full node set is feasible");
            let solution = inside(&found.solution);
            Ok(ExactResult {
                optimum: inst.cost(&solution),
                solution,
                ..found
            })
        }
    }
}

/// Minimum-cost hitting set.
pub fn exact_transversal(problem: &TransversalProblem, caps: &OracleCaps) -> Result<ExactResult, Error> {
    check_cap("transversal universe", problem.node_count, caps.transversal_nodes)?;
    if let Some(i) = problem.empty_hyperedge() {
        return Err(Error::Infeasible(Infeasibility::EmptyHyperedge(i)));
    }
    let found = cheapest_feasible(
        problem.node_count,
        |s| problem.cost(s),
        |s| Ok(problem.is_transversal(s)),
    )?;
    Ok(found.expect("the full node set is a transversal"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub instances: usize,
    /// Nodes are drawn from `3..=max_nodes`.
    pub max_nodes: usize,
    pub max_candidates: usize,
    pub k: u64,
    /// Replace the connectivity function by a non-submodular one.
    pub mutant: bool,
    pub counterexample_dir: Option<PathBuf>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            instances: 100,
            max_nodes: 5,
            max_candidates: 6,
            k: 2,
            mutant: false,
            counterexample_dir: None,
        }
    }
}

pub const PROPERTIES: [&str; 9] = [
    "submodular",
    "monotone",
    "single-edge-witness",
    "star-pushforward",
    "tight-d-uncrossable",
    "tight-symmetric",
    "rooted-t-uncrossable",
    "fast-path-matches-enumeration",
    "degree-bound",
];

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PropertyCount {
    pub name: &'static str,
    pub passed: u64,
    pub failed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SuiteReport {
    pub properties: Vec<PropertyCount>,
    pub warnings: Vec<String>,
    pub counterexamples: Vec<PathBuf>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(|p| p.failed == 0)
    }

    pub fn count(&self, name: &str) -> Option<&PropertyCount> {
        self.properties.iter().find(|p| p.name == name)
    }
}

struct Recorder<'a> {
    report: SuiteReport,
    dir: Option<&'a Path>,
}

impl Recorder<'_> {
    fn record(
        &mut self,
        name: &'static str,
        ok: bool,
        inst: &SnaInstance,
        seed: u64,
        detail: impl FnOnce() -> String,
    ) -> Result<(), Error> {
        let slot = self
            .report
            .properties
            .iter_mut()
            .find(|p| p.name == name)
            .expect("known property");
        if ok {
            slot.passed += 1;
            return Ok(());
        }
        slot.failed += 1;
        if let Some(dir) = self.dir {
            std::fs::create_dir_all(dir)?;
            let mut file = InstanceFile::from_sna(inst);
            file.metadata.seed = Some(seed);
            file.metadata.generator = Some("property-suite".into());
            file.metadata
                .extra
                .insert("property".into(), json!(name));
            file.metadata
                .extra
                .insert("detail".into(), json!(detail()));
            let serial = self.report.counterexamples.len();
            let path = dir.join(format!("{name}-{seed}-{serial}.json"));
            std::fs::write(&path, file.to_canonical())?;
            self.report.counterexamples.push(path);
        }
        Ok(())
    }
}

fn subset_of(n: usize, set: &ElementSet) -> Vec<usize> {
    (0..n).filter(|&i| set.contains(i)).collect()
}

/// Runs every property over `config.instances` seeded instances and counts
/// passes and failures per property. Failing instances are written to the
/// counterexample directory when one is configured.
pub fn property_suite(config: &SuiteConfig) -> Result<SuiteReport, Error> {
    let mut rec = Recorder {
        report: SuiteReport {
            properties: PROPERTIES
                .iter()
                .map(|&name| PropertyCount { name, ..Default::default() })
                .collect(),
            ..Default::default()
        },
        dir: config.counterexample_dir.as_deref(),
    };
    if config.instances == 0 {
        rec.report
            .warnings
            .push("no instances requested; every property passes vacuously".into());
        return Ok(rec.report);
    }
    if config.max_nodes < 3 {
        return Err(Error::Precondition("property suite needs max_nodes >= 3".into()));
    }
    for i in 0..config.instances {
        let seed = config.seed.wrapping_add(i as u64);
        let mut pick = gen::rng(seed ^ 0x5eed);
        let nodes = rand::Rng::gen_range(&mut pick, 3..=config.max_nodes);
        let candidates = rand::Rng::gen_range(&mut pick, 1..=config.max_candidates.max(1));
        directed_checks(&mut rec, config, seed, nodes, candidates)?;
        biset_checks(&mut rec, config, seed, nodes, candidates)?;
    }
    Ok(rec.report)
}

fn directed_checks(
    rec: &mut Recorder<'_>,
    config: &SuiteConfig,
    seed: u64,
    nodes: usize,
    candidates: usize,
) -> Result<(), Error> {
    let params = SnaParams {
        nodes,
        edges: nodes,
        candidates,
        demands: nodes - 1,
        k: config.k,
        directed: true,
        rooted: true,
        root_is_center: seed.is_multiple_of(2),
        q_max: Some(2),
        ..SnaParams::default()
    };
    let inst = gen::sna(&params, seed)?;
    let m = inst.candidates.len();
    let penalty = config.k as i64 + 1;
    for d in inst.demands.clone() {
        let f = |set: &ElementSet| -> Result<i64, Error> {
            let g = inst.graph_with(&subset_of(m, set));
            let value = crate::flow::pair_connectivity(&g, &inst.capacity, d.s, d.v, u64::MAX)? as i64;
            let size = set.count_ones(..) as i64;
            Ok(if config.mutant { value + penalty * size * size } else { value })
        };
        let sub = find_submodularity_violation(m, f)?;
        rec.record("submodular", sub.is_none(), &inst, seed, || {
            format!("demand {}->{}: {:?}", d.s, d.v, sub)
        })?;
        let mono = find_monotonicity_violation(m, f)?;
        rec.record("monotone", mono.is_none(), &inst, seed, || {
            format!("demand {}->{}: {:?}", d.s, d.v, mono)
        })?;
        let (witnesses, h) =
            single_edge_witnesses(&inst.graph, &inst.capacity, &inst.candidate_edges(), d.s, d.v)?;
        rec.record(
            "single-edge-witness",
            witnesses.len() as u64 >= h,
            &inst,
            seed,
            || format!("demand {}->{}: {} witnesses for increase {h}", d.s, d.v, witnesses.len()),
        )?;
    }
    let n = inst.node_count();
    let mut star = inst.clone();
    star.cost_mode = CostMode::Node;
    let push = find_submodularity_violation(n, |set| {
        let value = progress_g_node(&star, set)?;
        let size = set.count_ones(..) as i64;
        Ok(if config.mutant { value + penalty * size * size } else { value })
    })?;
    rec.record("star-pushforward", push.is_none(), &inst, seed, || format!("{push:?}"))
}

fn biset_checks(
    rec: &mut Recorder<'_>,
    config: &SuiteConfig,
    seed: u64,
    nodes: usize,
    candidates: usize,
) -> Result<(), Error> {
    let rooted = seed.is_multiple_of(2);
    let params = SnaParams {
        nodes,
        edges: nodes,
        candidates,
        demands: nodes - 1,
        k: config.k,
        directed: false,
        rooted,
        root_is_center: true,
        q_max: Some(2),
        ..SnaParams::default()
    };
    let mut inst = gen::sna(&params, seed)?;
    let center = 0;
    inst.demands = uniform_level(&inst)?;
    let pairs = inst.demand_edges();
    let query = TightQuery::new(inst.graph.clone(), inst.capacity.clone(), &pairs)?;
    let family = tight_bisets(&query, config.max_nodes.max(nodes))?;
    rec.record(
        "tight-d-uncrossable",
        is_d_uncrossable(&family, &pairs, false),
        &inst,
        seed,
        || format!("{} tight bisets", family.len()),
    )?;
    rec.record("tight-symmetric", family.is_symmetric(), &inst, seed, || {
        format!("{} tight bisets", family.len())
    })?;
    let avoiding = family.filter(|b| !b.outer().contains(center));
    if rooted {
        let terminals = NodeSet::from_nodes(nodes, pairs.iter().map(|&(_, v)| v));
        rec.record(
            "rooted-t-uncrossable",
            is_t_uncrossable(&avoiding, &terminals),
            &inst,
            seed,
            || format!("{} bisets avoiding the root", avoiding.len()),
        )?;
    }
    let fast_all = minimal_tight_fast(&query, None)?;
    let fast_avoid = minimal_tight_fast(&query, Some(center))?;
    let same = same_family(&fast_all, &minimal_members(&family))
        && same_family(&fast_avoid, &minimal_members(&avoiding));
    rec.record("fast-path-matches-enumeration", same, &inst, seed, || {
        format!("fast {} vs enumerated {}", fast_all.len(), minimal_members(&family).len())
    })?;
    let (checked, gamma) = if rooted {
        (minimal_members(&avoiding), avoiding.max_boundary())
    } else {
        (minimal_members(&family), family.max_boundary())
    };
    let degree = checked.max_inner_degree() as u64;
    let bound = family_degree_bound(gamma as u64, rooted);
    rec.record("degree-bound", degree <= bound, &inst, seed, || {
        format!("degree {degree} above bound {bound} for gamma {gamma}")
    })
}

/// The largest group of demands sharing one connectivity level in `G`
/// (lowest level on ties). Uncrossing of tight bisets is only checked on
/// such groups: with mixed levels two tight bisets can be dependent through a
/// low-level demand while neither pair of uncrossed bisets is tight.
fn uniform_level(inst: &SnaInstance) -> Result<Vec<crate::instance::Demand>, Error> {
    let mut levels = std::collections::BTreeMap::<u64, Vec<_>>::new();
    for d in &inst.demands {
        let lambda = crate::flow::pair_connectivity(&inst.graph, &inst.capacity, d.s, d.v, u64::MAX)?;
        levels.entry(lambda).or_default().push(*d);
    }
    let mut best: Vec<crate::instance::Demand> = Vec::new();
    for group in levels.into_values() {
        if group.len() > best.len() {
            best = group;
        }
    }
    Ok(best)
}

fn same_family(a: &BisetFamily, b: &BisetFamily) -> bool {
    a.len() == b.len() && a.members().iter().all(|x| b.contains(x))
}

/// `Finite` optimum as an exact rational, for ratio checks.
pub fn finite_optimum(result: &ExactResult) -> Option<crate::numeric::Rational> {
    match result.optimum {
        Extended::Finite(x) => Some(x),
        Extended::Infinite => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Graph, NodeAttrs};
    use crate::numeric::Rational;

    fn node(c: i64, d: u64) -> NodeAttrs {
        NodeAttrs {
            cost: Cost::int(c),
            demand: d,
            capacity: Extended::Infinite,
            supply: Extended::Infinite,
            flow_cost_bound: Extended::Infinite,
        }
    }

    #[test]
    fn zero_demand_gives_empty_set() {
        let g = Graph::from_edges(3, true, vec![(0, 1)]).unwrap();
        let ssl = SslInstance::new(g, vec![node(1, 0); 3]).unwrap();
        let r = exact_ssl(&ssl, &OracleCaps::default()).unwrap();
        assert_eq!(r.optimum, Cost::zero());
        assert!(r.solution.is_empty());
        assert_eq!(r.enumerated, 1);
    }

    #[test]
    fn single_node_costs_its_price() {
        let g = Graph::new(1, true);
        let ssl = SslInstance::new(g, vec![node(7, 1)]).unwrap();
        let r = exact_ssl(&ssl, &OracleCaps::default()).unwrap();
        assert_eq!(r.optimum, Cost::int(7));
        assert_eq!(r.solution, vec![0]);
    }

    #[test]
    fn infeasible_is_distinct_from_cap() {
        let g = Graph::new(2, true);
        let mut short = node(1, 3);
        short.supply = Extended::Finite(1);
        short.capacity = Extended::Finite(1);
        let ssl = SslInstance::new(g, vec![node(1, 0), short]).unwrap();
        assert!(matches!(
            exact_ssl(&ssl, &OracleCaps::default()),
            Err(Error::Infeasible(Infeasibility::NodeDemand { node: 1, .. }))
        ));
        let caps = OracleCaps { ssl_nodes: 1, ..OracleCaps::default() };
        assert!(matches!(exact_ssl(&ssl, &caps), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn ties_report_lexicographically_first() {
        // Nodes 0 and 1 both reach 2; both cost 1.
        let g = Graph::from_edges(3, true, vec![(0, 2), (1, 2)]).unwrap();
        let ssl = SslInstance::new(g, vec![node(1, 0), node(1, 0), node(5, 1)]).unwrap();
        let r = exact_ssl(&ssl, &OracleCaps::default()).unwrap();
        assert_eq!(r.solution, vec![0]);
        assert_eq!(r.optimal_count, 2);
    }

    #[test]
    fn transversal_trivia() {
        let empty = TransversalProblem { node_count: 3, hyperedges: vec![], costs: vec![Cost::int(1); 3] };
        let r = exact_transversal(&empty, &OracleCaps::default()).unwrap();
        assert_eq!((r.optimum, r.solution.len()), (Cost::zero(), 0));
        let one = TransversalProblem {
            node_count: 3,
            hyperedges: vec![vec![0, 1, 2]],
            costs: vec![Cost::int(4), Cost::int(2), Cost::int(3)],
        };
        let r = exact_transversal(&one, &OracleCaps::default()).unwrap();
        assert_eq!(r.solution, vec![1]);
        assert_eq!(r.optimum, Cost::int(2));
    }

    #[test]
    fn node_mode_matches_edge_enumeration() {
        let p = SnaParams { cost_mode: CostMode::Node, candidates: 5, ..SnaParams::default() };
        for seed in 0..10 {
            let inst = gen::sna(&p, seed).unwrap();
            let by_nodes = exact_sna(&inst, &OracleCaps::default()).unwrap();
            // Direct enumeration over candidate subsets with endpoint costs.
            let m = inst.candidates.len();
            let mut best: Option<Cost> = None;
            for mask in 0u64..1 << m {
                let set = members(mask, m);
                if inst.is_feasible(&set).unwrap() {
                    let c = inst.cost(&set);
                    best = Some(best.map_or(c, |b| b.min(c)));
                }
            }
            assert_eq!(Some(by_nodes.optimum), best, "seed {seed}");
            assert!(inst.is_feasible(&by_nodes.solution).unwrap());
        }
    }

    #[test]
    fn suite_passes_and_mutant_fails() {
        let config = SuiteConfig { instances: 20, ..SuiteConfig::default() };
        let report = property_suite(&config).unwrap();
        assert!(report.passed(), "{:?}", report.properties);
        let mutant = SuiteConfig { mutant: true, ..config };
        assert!(!property_suite(&mutant).unwrap().passed());
    }

    #[test]
    fn empty_suite_warns() {
        let report = property_suite(&SuiteConfig { instances: 0, ..SuiteConfig::default() }).unwrap();
        assert!(report.passed());
        assert_eq!(report.warnings.len(), 1);
    }

    #[test]
    fn optimum_is_rational() {
        let r = ExactResult { optimum: Cost::int(3), solution: vec![], optimal_count: 1, enumerated: 1 };
        assert_eq!(finite_optimum(&r), Some(Rational::from_integer(3)));
    }
}
