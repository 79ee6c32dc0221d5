//! Greedy submodular cover and the solvers built on it.
//!
//! [`wolsey_greedy`] repeatedly adds the element of largest gain per unit
//! cost until the progress function reaches its target; for monotone
//! submodular progress it is within `H(α)` of optimal, `α` being the largest
//! single-element gain. The augmentation and source location solvers below
//! are instances of it with the truncated connectivity sums as progress.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Infeasibility};
use crate::flow;
use crate::instance::{CostMode, SnaInstance, SslInstance};
use crate::numeric::{harmonic, to_big, Cost, Extended, Level, Rational};
use crate::reductions::{ssl_to_rooted_sna, SslSnaMap};

/// Subset of a ground set `0..n`.
pub type ElementSet = FixedBitSet;

pub fn element_set(n: usize, elements: impl IntoIterator<Item = usize>) -> ElementSet {
    let mut s = FixedBitSet::with_capacity(n);
    for e in elements {
        s.insert(e);
    }
    s
}

type ProgressFn<'a> = Box<dyn FnMut(&ElementSet) -> Result<Level, Error> + 'a>;

/// A covering problem: element costs and a progress oracle `g` to be raised
/// to `target`. Elements of infinite cost are never selected.
pub struct CoverProblem<'a> {
    pub costs: Vec<Cost>,
    progress: ProgressFn<'a>,
    /// Defaults to `g` of all finite-cost elements.
    pub target: Option<i64>,
}

impl<'a> CoverProblem<'a> {
    pub fn new(
        costs: Vec<Cost>,
        progress: impl FnMut(&ElementSet) -> Result<Level, Error> + 'a,
    ) -> Self {
        CoverProblem {
            costs,
            progress: Box::new(progress),
            target: None,
        }
    }

    pub fn with_target(mut self, target: i64) -> Self {
        self.target = Some(target);
        self
    }

    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }

    pub fn evaluate(&mut self, set: &ElementSet) -> Result<Level, Error> {
        (self.progress)(set)
    }

    fn selectable(&self) -> ElementSet {
        element_set(
            self.len(),
            (0..self.len()).filter(|&u| self.costs[u].is_finite()),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyStep {
    pub element: usize,
    pub gain: i64,
    pub cost: Rational,
}

/// Audit trail of one greedy run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyTrace {
    pub steps: Vec<GreedyStep>,
    /// Elements added by this run, ascending.
    pub chosen: Vec<usize>,
    pub cost: Rational,
    pub initial: Level,
    pub reached: Level,
    pub target: i64,
    /// Largest single-element gain over the starting set.
    pub alpha: u64,
    /// `H(alpha)`.
    pub bound: BigRational,
    pub evaluations: usize,
}

struct Memo<'p, 'a> {
    problem: &'p mut CoverProblem<'a>,
    cache: HashMap<ElementSet, Level>,
}

impl Memo<'_, '_> {
    fn eval(&mut self, set: &ElementSet) -> Result<Level, Error> {
        if let Some(&v) = self.cache.get(set) {
            return Ok(v);
        }
        let v = self.problem.evaluate(set)?;
        self.cache.insert(set.clone(), v);
        Ok(v)
    }
}

fn gain(after: Level, before: Level) -> Result<i64, Error> {
    match (after, before) {
        (Level::Finite(a), Level::Finite(b)) => Ok(a - b),
        _ => Err(Error::Precondition(
            "greedy gain requested while progress is -infinity".into(),
        )),
    }
}

/// Greedy cover from the empty set.
pub fn wolsey_greedy(problem: &mut CoverProblem<'_>) -> Result<GreedyTrace, Error> {
    let start = FixedBitSet::with_capacity(problem.len());
    wolsey_greedy_from(problem, &start)
}

/// Greedy cover of the residual function `h(A) = g(start ∪ A)`.
///
/// Zero-cost elements with positive gain are taken first in index order; then
/// each round takes the maximum gain/cost ratio, ties to the lowest index.
pub fn wolsey_greedy_from(
    problem: &mut CoverProblem<'_>,
    start: &ElementSet,
) -> Result<GreedyTrace, Error> {
    let n = problem.len();
    let selectable = problem.selectable();
    let costs = problem.costs.clone();
    let explicit_target = problem.target;
    let mut memo = Memo {
        problem,
        cache: HashMap::new(),
    };

    let target = match explicit_target {
        Some(t) => t,
        None => {
            let mut all = selectable.clone();
            all.union_with(start);
            memo.eval(&all)?.finite().ok_or_else(|| {
                Error::Precondition("progress of the full ground set is -infinity".into())
            })?
        }
    };

    let mut current = start.clone();
    let initial = memo.eval(&current)?;
    if !initial.is_finite() {
        return Err(Error::Precondition(
            "greedy started where progress is -infinity".into(),
        ));
    }

    let mut alpha = 0i64;
    for u in selectable.ones().filter(|&u| !start.contains(u)) {
        let mut s = start.clone();
        s.insert(u);
        alpha = alpha.max(gain(memo.eval(&s)?, initial)?);
    }

    let mut value = initial;
    let mut steps = Vec::new();
    let take = |current: &mut ElementSet, steps: &mut Vec<GreedyStep>, u: usize, g: i64| {
        current.insert(u);
        steps.push(GreedyStep {
            element: u,
            gain: g,
            cost: *costs[u].as_finite().expect("selectable"),
        });
    };

    if value < Level::Finite(target) {
        for u in 0..n {
            if current.contains(u) || costs[u] != Cost::zero() {
                continue;
            }
            let mut s = current.clone();
            s.insert(u);
            let after = memo.eval(&s)?;
            let g = gain(after, value)?;
            if g > 0 {
                take(&mut current, &mut steps, u, g);
                value = after;
            }
        }
    }

    while value < Level::Finite(target) {
        let mut best: Option<(usize, i64, Rational, Level)> = None;
        for u in selectable.ones().filter(|&u| !current.contains(u)) {
            let c = *costs[u].as_finite().expect("selectable");
            let mut s = current.clone();
            s.insert(u);
            let after = memo.eval(&s)?;
            let g = gain(after, value)?;
            if g <= 0 {
                continue;
            }
            let better = match &best {
                None => true,
                // g / c > bg / bc, compared exactly; zero costs were handled above.
                Some((_, bg, bc, _)) => {
                    Rational::from_integer(g) * *bc > Rational::from_integer(*bg) * c
                }
            };
            if better {
                best = Some((u, g, c, after));
            }
        }
        match best {
            Some((u, g, _, after)) => {
                take(&mut current, &mut steps, u, g);
                value = after;
            }
            None => {
                return Err(Error::Infeasible(Infeasibility::Stalled {
                    reached: value.to_string(),
                    target: target.to_string(),
                }))
            }
        }
    }

    let mut chosen: Vec<usize> = steps.iter().map(|s| s.element).collect();
    chosen.sort_unstable();
    let cost = steps.iter().map(|s| s.cost).sum();
    let alpha = alpha.max(0) as u64;
    Ok(GreedyTrace {
        steps,
        chosen,
        cost,
        initial,
        reached: value,
        target,
        alpha,
        bound: harmonic(alpha),
        evaluations: memo.cache.len(),
    })
}

/// `g(I) = Σ_{uv ∈ D} min(r_uv, λ^q_{G+I}(u, v))` over candidate subsets.
pub fn progress_g_edge(inst: &SnaInstance, chosen: &[usize]) -> Result<i64, Error> {
    let g = inst.graph_with(chosen);
    let mut total = 0i64;
    for d in inst.active_demands() {
        total += inst.demand_connectivity(&g, d)? as i64;
    }
    Ok(total)
}

/// `F_S`: the candidate edges joining the center `a` to a node of `S`.
pub fn star_edges_to(inst: &SnaInstance, center: usize, nodes: &ElementSet) -> Vec<usize> {
    inst.candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| {
            let leaf = if c.u == center { c.v } else { c.u };
            nodes.contains(leaf)
        })
        .map(|(i, _)| i)
        .collect()
}

fn require_center(inst: &SnaInstance) -> Result<Option<usize>, Error> {
    if inst.candidates.is_empty() {
        return Ok(None);
    }
    inst.center()
        .map(Some)
        .ok_or_else(|| Error::Incompatible("candidate edges do not form a star".into()))
}

/// `g'(S) = g(F_S)` for an `a`-based instance.
pub fn progress_g_node(inst: &SnaInstance, nodes: &ElementSet) -> Result<i64, Error> {
    match require_center(inst)? {
        Some(a) => progress_g_edge(inst, &star_edges_to(inst, a, nodes)),
        None => progress_g_edge(inst, &[]),
    }
}

/// Outcome of the greedy `a`-based augmentation solver.
#[derive(Debug, Clone)]
pub struct SnaSolution {
    /// Chosen candidate indices, ascending.
    pub chosen: Vec<usize>,
    /// Node picks in node-cost mode.
    pub nodes: Option<Vec<usize>>,
    pub cost: Cost,
    pub trace: GreedyTrace,
    /// `|D|` for edge costs, `min(r(D), |D| p_max)` for node costs.
    pub alpha_cap: u64,
    /// `H(alpha_cap)`, doubled for undirected inputs.
    pub bound: BigRational,
    pub undirected_factor: bool,
}

/// Cap on `α` for the greedy `a`-based solver.
pub fn abased_alpha_cap(inst: &SnaInstance, mode: CostMode) -> u64 {
    let d = inst.demand_count() as u64;
    match mode {
        CostMode::Edge => d,
        CostMode::Node => inst.total_requirement().min(d * inst.p_max()),
    }
}

/// Greedy for `a`-based augmentation with edge or node costs.
pub fn solve_abased_sna(inst: &SnaInstance) -> Result<SnaSolution, Error> {
    inst.validate()?;
    let center = require_center(inst)?;
    let all: Vec<usize> = (0..inst.candidates.len()).collect();
    if let Some(v) = inst.violation(&all)? {
        return Err(Error::Infeasible(v));
    }
    let target: i64 = inst.active_demands().map(|d| d.r as i64).sum();
    let (chosen, nodes, trace) = match inst.cost_mode {
        CostMode::Edge => {
            let costs = inst
                .candidates
                .iter()
                .map(|c| Extended::Finite(c.cost))
                .collect();
            let mut problem = CoverProblem::new(costs, |set: &ElementSet| {
                let chosen: Vec<usize> = set.ones().collect();
                progress_g_edge(inst, &chosen).map(Level::Finite)
            })
            .with_target(target);
            let trace = wolsey_greedy(&mut problem)?;
            (trace.chosen.clone(), None, trace)
        }
        CostMode::Node => {
            let n = inst.node_count();
            let mut costs = inst.node_costs.clone();
            if let Some(a) = center {
                // The center is an endpoint of every candidate; picking it adds nothing.
                costs[a] = Extended::Infinite;
            }
            let mut problem = CoverProblem::new(costs, |set: &ElementSet| {
                progress_g_node(inst, set).map(Level::Finite)
            })
            .with_target(target);
            let trace = wolsey_greedy(&mut problem)?;
            let picked = element_set(n, trace.chosen.iter().copied());
            let chosen = match center {
                Some(a) => star_edges_to(inst, a, &picked),
                None => Vec::new(),
            };
            (chosen, Some(trace.chosen.clone()), trace)
        }
    };
    let alpha_cap = abased_alpha_cap(inst, inst.cost_mode);
    let undirected = !inst.is_directed();
    let mut bound = harmonic(alpha_cap);
    if undirected {
        bound *= BigRational::from_integer(2.into());
    }
    Ok(SnaSolution {
        cost: inst.cost(&chosen),
        chosen,
        nodes,
        trace,
        alpha_cap,
        bound,
        undirected_factor: undirected,
    })
}

/// A source set with the solver's audit data.
#[derive(Debug, Clone)]
pub struct SslSolution {
    pub sources: Vec<usize>,
    pub cost: Cost,
    pub bound: BigRational,
    pub detail: SslDetail,
}

#[derive(Debug, Clone)]
pub enum SslDetail {
    Greedy { map: SslSnaMap, sna: Box<SnaSolution> },
    DoubleCover(DoubleCoverTrace),
}

/// Greedy source location through the rooted augmentation reduction.
pub fn solve_ssl(ssl: &SslInstance) -> Result<SslSolution, Error> {
    ssl.validate()?;
    let (sna, map) = ssl_to_rooted_sna(ssl);
    let sol = solve_abased_sna(&sna).map_err(|e| map.pull_back_error(e))?;
    let sources = map.sources_of(&sol.chosen);
    Ok(SslSolution {
        cost: ssl.cost(&sources),
        sources,
        bound: sol.bound.clone(),
        detail: SslDetail::Greedy {
            map,
            sna: Box::new(sol),
        },
    })
}

#[derive(Debug, Clone)]
pub struct DoubleCoverTrace {
    pub first: GreedyTrace,
    pub second: GreedyTrace,
    pub chosen: Vec<usize>,
    pub cost: Rational,
    /// `H(α_f) + H(α_h)` from the realized runs.
    pub bound: BigRational,
}

/// Two-phase greedy for covering `f` and then `g` restricted above `S_f`.
///
/// `g` may be `-∞`; it must be finite once `f` is covered, which is checked
/// after the first phase.
pub fn solve_double_cover(
    f: &mut CoverProblem<'_>,
    g: &mut CoverProblem<'_>,
) -> Result<DoubleCoverTrace, Error> {
    assert_eq!(f.len(), g.len(), "both progress functions share a ground set");
    let first = wolsey_greedy(f)?;
    let s_f = element_set(f.len(), first.chosen.iter().copied());
    if !g.evaluate(&s_f)?.is_finite() {
        return Err(Error::Precondition(
            "second progress function is -infinity after covering the first".into(),
        ));
    }
    let second = wolsey_greedy_from(g, &s_f)?;
    let mut chosen: Vec<usize> = first.chosen.iter().chain(&second.chosen).copied().collect();
    chosen.sort_unstable();
    let cost = first.cost + second.cost;
    let bound = &first.bound + &second.bound;
    Ok(DoubleCoverTrace {
        first,
        second,
        chosen,
        cost,
        bound,
    })
}

fn integral_flow_costs(ssl: &SslInstance) -> Result<&[Rational], Error> {
    let costs = ssl.edge_costs.as_deref().ok_or_else(|| {
        Error::Incompatible("flow-cost bounds need edge costs on the graph".into())
    })?;
    if let Some(i) = costs.iter().position(|c| !c.is_integer()) {
        return Err(Error::Precondition(format!(
            "edge {i} has a fractional cost; flow-cost bounds need integral edge costs"
        )));
    }
    Ok(costs)
}

/// `H(d(V)) + H(c(E))`.
pub fn flow_bounds_ratio(ssl: &SslInstance) -> BigRational {
    let c_e: Rational = ssl.edge_costs.iter().flatten().sum();
    harmonic(ssl.total_demand()) + harmonic(c_e.to_integer().max(0) as u64)
}

/// Source location with flow-cost bounds by the two-phase greedy.
pub fn solve_ssl_flow_bounds(ssl: &SslInstance) -> Result<SslSolution, Error> {
    ssl.validate()?;
    integral_flow_costs(ssl)?;
    let n = ssl.node_count();
    let every: Vec<usize> = (0..n).collect();
    // S = V must already satisfy both families of constraints.
    if let Some(v) = ssl.violation(&every)? {
        return Err(Error::Infeasible(v));
    }
    let costs: Vec<Cost> = ssl.nodes.iter().map(|a| a.cost).collect();
    let demand_total = ssl.total_demand() as i64;
    let mut f = CoverProblem::new(costs.clone(), |set: &ElementSet| {
        let s: Vec<usize> = set.ones().collect();
        let mut total = 0i64;
        for v in 0..n {
            total += ssl.truncated_connectivity(&s, v)? as i64;
        }
        Ok(Level::Finite(total))
    })
    .with_target(demand_total);
    let bounded: Vec<(usize, i64)> = ssl
        .nodes
        .iter()
        .enumerate()
        .filter_map(|(v, a)| a.flow_cost_bound.finite().map(|b| (v, b.floor().to_integer())))
        .collect();
    let budget_target: i64 = -bounded.iter().map(|&(_, b)| b).sum::<i64>();
    let mut g = CoverProblem::new(costs, |set: &ElementSet| {
        let s: Vec<usize> = set.ones().collect();
        let mut total = Level::Finite(0);
        for &(v, b) in &bounded {
            let term = match ssl.flow_cost(&s, v)? {
                Extended::Finite(mu) => Level::Finite(-mu.to_integer().max(b)),
                Extended::Infinite => Level::NegInfinite,
            };
            total = total + term;
        }
        Ok(total)
    })
    .with_target(budget_target);
    let trace = solve_double_cover(&mut f, &mut g)?;
    let sources = trace.chosen.clone();
    Ok(SslSolution {
        cost: ssl.cost(&sources),
        sources,
        bound: flow_bounds_ratio(ssl),
        detail: SslDetail::DoubleCover(trace),
    })
}

/// Checks `f(A ∪ e) + f(A ∪ e') ≥ f(A) + f(A ∪ {e, e'})` for every `A` and
/// pair `e, e' ∉ A`; returns the first violating `(A, e, e')`.
pub fn find_submodularity_violation(
    n: usize,
    mut f: impl FnMut(&ElementSet) -> Result<i64, Error>,
) -> Result<Option<(Vec<usize>, usize, usize)>, Error> {
    assert!(n < 24, "exhaustive check over 2^n subsets");
    let mut values = Vec::with_capacity(1 << n);
    for mask in 0u32..(1 << n) {
        values.push(f(&element_set(n, (0..n).filter(|&i| mask >> i & 1 == 1)))?);
    }
    for mask in 0u32..(1 << n) {
        for e in 0..n {
            if mask >> e & 1 == 1 {
                continue;
            }
            for e2 in e + 1..n {
                if mask >> e2 & 1 == 1 {
                    continue;
                }
                let a = values[mask as usize];
                let ae = values[(mask | 1 << e) as usize];
                let ae2 = values[(mask | 1 << e2) as usize];
                let both = values[(mask | 1 << e | 1 << e2) as usize];
                if ae + ae2 < a + both {
                    let base = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
                    return Ok(Some((base, e, e2)));
                }
            }
        }
    }
    Ok(None)
}

/// Checks monotonicity over all subsets; returns a violating `(A, e)`.
pub fn find_monotonicity_violation(
    n: usize,
    mut f: impl FnMut(&ElementSet) -> Result<i64, Error>,
) -> Result<Option<(Vec<usize>, usize)>, Error> {
    assert!(n < 24, "exhaustive check over 2^n subsets");
    let mut values = Vec::with_capacity(1 << n);
    for mask in 0u32..(1 << n) {
        values.push(f(&element_set(n, (0..n).filter(|&i| mask >> i & 1 == 1)))?);
    }
    for mask in 0u32..(1 << n) {
        for e in 0..n {
            if mask >> e & 1 == 0 && values[(mask | 1 << e) as usize] < values[mask as usize] {
                return Ok(Some(((0..n).filter(|&i| mask >> i & 1 == 1).collect(), e)));
            }
        }
    }
    Ok(None)
}

/// Edges of `extra` that each raise `λ^q(s, t)` by one on their own, and the
/// total increase `h` from adding all of them. The witness property holds
/// when the first has at least `h` elements.
pub fn single_edge_witnesses(
    inst_graph: &crate::graph::Graph,
    capacity: &[crate::numeric::Capacity],
    extra: &[crate::graph::Edge],
    s: usize,
    t: usize,
) -> Result<(Vec<usize>, u64), Error> {
    let base = flow::pair_connectivity(inst_graph, capacity, s, t, u64::MAX)?;
    let all = flow::pair_connectivity(&inst_graph.augmented(extra), capacity, s, t, u64::MAX)?;
    let mut witnesses = Vec::new();
    for (i, e) in extra.iter().enumerate() {
        let one = flow::pair_connectivity(&inst_graph.augmented([e]), capacity, s, t, u64::MAX)?;
        if one == base + 1 {
            witnesses.push(i);
        }
    }
    Ok((witnesses, all - base))
}

/// `cost <= bound * opt`, exactly.
pub fn within_bound(cost: &Rational, bound: &BigRational, opt: &Rational) -> bool {
    to_big(cost) <= bound * to_big(opt)
}

/// `true` when `bound` is at least one (sanity for reported ratios).
pub fn bound_is_sane(bound: &BigRational) -> bool {
    *bound >= BigRational::one() || bound.is_zero()
}
