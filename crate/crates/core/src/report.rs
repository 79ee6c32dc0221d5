//! Solver dispatch and reports with independently re-verified feasibility.

use num_rational::BigRational;
use serde::Serialize;

use crate::bisetcover::{menger_feasible, solve_abased_sna_undirected, solve_ssl_undirected, BisetCoverOptions};
use crate::error::Error;
use crate::format::{InstanceFile, Kind, Problem};
use crate::instance::{describe_cost, CostMode, SnaInstance, SslInstance};
use crate::numeric::{format_big, format_rational, to_big, Cost, Extended, Rational};
use crate::oracle::{exact_sna, exact_ssl, OracleCaps};
use crate::submodular::{solve_abased_sna, solve_ssl, solve_ssl_flow_bounds};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    GreedySna,
    SeqBiset,
    Ssl,
    SslFlowBounds,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::GreedySna,
        Algorithm::SeqBiset,
        Algorithm::Ssl,
        Algorithm::SslFlowBounds,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::GreedySna => "greedy-sna",
            Algorithm::SeqBiset => "seq-biset",
            Algorithm::Ssl => "ssl",
            Algorithm::SslFlowBounds => "ssl-flow-bounds",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == s)
    }
}

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    pub biset: BisetCoverOptions,
    /// Run the greedy on undirected instances (bound doubles).
    pub allow_undirected: bool,
    /// Compute the exact optimum when the file stores none.
    pub oracle: Option<OracleCaps>,
}

/// One line of a feasibility certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub subject: String,
    pub achieved: u64,
    pub required: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flow_cost: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<String>,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub feasible: bool,
    pub checks: Vec<Check>,
    /// Inner and outer part of a deficient biset when the flow check fails.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub solver: String,
    pub instance_sha256: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sources: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<usize>>,
    pub cost: String,
    pub feasible: bool,
    pub certificate: Certificate,
    pub bound_formula: String,
    pub bound: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_optimum: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub within_bound: Option<bool>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub stages: Vec<StageLine>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageLine {
    pub stage: u64,
    pub demands: usize,
    pub minimal_bisets: usize,
    pub gamma: u64,
    pub degree: u64,
    pub degree_bound: u64,
    pub cost: String,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    /// Bound as an exact rational.
    pub fn bound_value(&self) -> BigRational {
        self.bound.parse().expect("bound is a rational")
    }
}

/// Source-set certificate: per-node connectivity and, with bounds, `μ` vs `b`.
pub fn certify_ssl(ssl: &SslInstance, sources: &[usize]) -> Result<Certificate, Error> {
    let checks: Vec<Check> = ssl
        .check(sources)?
        .into_iter()
        .map(|c| Check {
            subject: format!("node {}", c.node),
            achieved: c.achieved,
            required: c.demand,
            flow_cost: c.flow_cost.as_ref().map(|(mu, _)| describe_cost(mu)),
            budget: c.flow_cost.as_ref().map(|(_, b)| describe_cost(b)),
            ok: c.ok(),
        })
        .collect();
    Ok(Certificate {
        feasible: checks.iter().all(|c| c.ok),
        checks,
        witness: None,
    })
}

/// Augmentation certificate: per-demand connectivity from flow plus a
/// deficient biset when some demand is short.
pub fn certify_sna(inst: &SnaInstance, chosen: &[usize]) -> Result<Certificate, Error> {
    let g = inst.graph_with(chosen);
    let mut checks = Vec::new();
    for d in inst.active_demands() {
        let achieved = inst.demand_connectivity(&g, d)?;
        checks.push(Check {
            subject: format!("demand {}->{}", d.s, d.v),
            achieved,
            required: d.r,
            flow_cost: None,
            budget: None,
            ok: achieved >= d.r,
        });
    }
    let verdict = menger_feasible(inst, chosen)?;
    Ok(Certificate {
        feasible: verdict.feasible && checks.iter().all(|c| c.ok),
        checks,
        witness: verdict.witness.map(|b| b.to_string()),
    })
}

/// Checks a selection against a parsed problem without solving anything.
pub fn certify(problem: &Problem, selection: &[usize]) -> Result<Certificate, Error> {
    match problem {
        Problem::Ssl(ssl) => certify_ssl(ssl, selection),
        Problem::Sna(sna) => certify_sna(sna, selection),
    }
}

fn incompatible(alg: Algorithm, why: &str) -> Error {
    Error::Incompatible(format!("{} cannot solve {why}", alg.name()))
}

fn exact_ratio(cost: &Cost, opt: &Rational) -> Option<BigRational> {
    let Extended::Finite(c) = cost else { return None };
    if opt == &Rational::from_integer(0) {
        return (c == opt).then(|| BigRational::from_integer(1.into()));
    }
    Some(to_big(c) / to_big(opt))
}

struct Solved {
    sources: Option<Vec<usize>>,
    candidates: Option<Vec<usize>>,
    cost: Cost,
    bound: BigRational,
    formula: String,
    stages: Vec<StageLine>,
}

fn greedy_formula(mode: CostMode, doubled: bool) -> String {
    let h = match mode {
        CostMode::Edge => "H(|D|)",
        CostMode::Node => "H(min(r(D), |D|*p_max))",
    };
    if doubled {
        format!("2*{h}")
    } else {
        h.to_string()
    }
}

fn sequential_formula(mode: CostMode, rooted: bool) -> String {
    let delta = if rooted { "2l-1" } else { "(4l-3)^2" };
    match mode {
        CostMode::Edge => format!("sum_l H({delta})/(k-l+1)"),
        CostMode::Node => format!("sum_l H({delta})*min(p_max/(k-l+1), 1)"),
    }
}

fn stage_lines(report: &crate::bisetcover::SequentialReport) -> Vec<StageLine> {
    report
        .stages
        .iter()
        .map(|s| StageLine {
            stage: s.stage,
            demands: s.demands.len(),
            minimal_bisets: s.minimal_count,
            gamma: s.gamma,
            degree: s.degree,
            degree_bound: s.degree_bound,
            cost: format_rational(&s.cost),
        })
        .collect()
}

fn run(file: &InstanceFile, problem: &Problem, alg: Algorithm, options: &SolveOptions) -> Result<Solved, Error> {
    match (alg, problem) {
        (Algorithm::GreedySna, Problem::Sna(sna)) => {
            if !sna.is_directed() && !options.allow_undirected {
                return Err(incompatible(alg, "an undirected instance without the undirected flag"));
            }
            let sol = solve_abased_sna(sna)?;
            Ok(Solved {
                sources: None,
                candidates: Some(sol.chosen.clone()),
                cost: sol.cost,
                formula: greedy_formula(sna.cost_mode, sol.undirected_factor),
                bound: sol.bound,
                stages: Vec::new(),
            })
        }
        (Algorithm::SeqBiset, Problem::Sna(sna)) => {
            if sna.is_directed() {
                return Err(incompatible(alg, "a directed instance"));
            }
            let rep = solve_abased_sna_undirected(sna, options.biset)?;
            Ok(Solved {
                sources: None,
                candidates: Some(rep.chosen.clone()),
                cost: rep.cost,
                formula: sequential_formula(sna.cost_mode, rep.rooted),
                bound: rep.bound.clone(),
                stages: stage_lines(&rep),
            })
        }
        (Algorithm::SeqBiset, Problem::Ssl(ssl)) if file.kind == Kind::Ssl => {
            let (sources, _, rep) = solve_ssl_undirected(ssl, options.biset)?;
            Ok(Solved {
                cost: ssl.cost(&sources),
                sources: Some(sources),
                candidates: None,
                formula: sequential_formula(CostMode::Node, rep.rooted),
                bound: rep.bound.clone(),
                stages: stage_lines(&rep),
            })
        }
        (Algorithm::Ssl, Problem::Ssl(ssl)) if file.kind == Kind::Ssl => {
            if !ssl.graph.is_directed() && !options.allow_undirected {
                return Err(incompatible(alg, "an undirected instance without the undirected flag"));
            }
            let sol = solve_ssl(ssl)?;
            Ok(Solved {
                formula: greedy_formula(CostMode::Node, !ssl.graph.is_directed()),
                sources: Some(sol.sources),
                candidates: None,
                cost: sol.cost,
                bound: sol.bound,
                stages: Vec::new(),
            })
        }
        (Algorithm::SslFlowBounds, Problem::Ssl(ssl)) if file.kind == Kind::SslFlowBounds => {
            let sol = solve_ssl_flow_bounds(ssl)?;
            Ok(Solved {
                formula: "H(d(V)) + H(c(E))".into(),
                sources: Some(sol.sources),
                candidates: None,
                cost: sol.cost,
                bound: sol.bound,
                stages: Vec::new(),
            })
        }
        _ => Err(incompatible(alg, &format!("a {} instance", file.kind.name()))),
    }
}

/// Exact optimum: the stored one, else the oracle when caps are given.
pub fn optimum_for(file: &InstanceFile, problem: &Problem, caps: Option<&OracleCaps>) -> Result<Option<Rational>, Error> {
    if let Some(known) = file.metadata.known_optimum {
        return Ok(known.0.finite());
    }
    let Some(caps) = caps else { return Ok(None) };
    let exact = match problem {
        Problem::Ssl(ssl) => exact_ssl(ssl, caps)?,
        Problem::Sna(sna) => exact_sna(sna, caps)?,
    };
    Ok(exact.optimum.finite())
}

/// Solves, re-verifies the answer from scratch and fills in the ratio when an
/// optimum is available.
pub fn solve(file: &InstanceFile, alg: Algorithm, options: &SolveOptions) -> Result<Report, Error> {
    let problem = file.to_problem()?;
    let solved = run(file, &problem, alg, options)?;
    let selection = solved
        .sources
        .as_deref()
        .or(solved.candidates.as_deref())
        .unwrap_or_default();
    let certificate = certify(&problem, selection)?;
    let optimum = optimum_for(file, &problem, options.oracle.as_ref())?;
    let ratio = optimum.as_ref().and_then(|opt| exact_ratio(&solved.cost, opt));
    // cost <= bound * opt, which also covers a zero optimum.
    let within_bound = optimum.as_ref().zip(solved.cost.as_finite()).map(|(opt, c)| to_big(c) <= &solved.bound * to_big(opt));
    Ok(Report {
        solver: alg.name().into(),
        instance_sha256: file.digest(),
        sources: solved.sources,
        candidates: solved.candidates,
        cost: describe_cost(&solved.cost),
        feasible: certificate.feasible,
        certificate,
        bound_formula: solved.formula,
        bound: format_big(&solved.bound),
        oracle_optimum: optimum.as_ref().map(format_rational),
        ratio: ratio.as_ref().map(format_big),
        within_bound,
        stages: solved.stages,
    })
}
