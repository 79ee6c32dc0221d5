use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use srcloc::bisetcover::{BisetCoverOptions, TightMethod};
use srcloc::format::{InstanceFile, Num, Problem, SolutionFile};
use srcloc::gen::{self, GenSpec, PqMode, SetCoverParams, SnaParams, SslParams};
use srcloc::instance::{describe_cost, CostMode};
use srcloc::oracle::{exact_sna, exact_ssl, property_suite, OracleCaps, SuiteConfig};
use srcloc::report::{certify, optimum_for, solve, Algorithm, SolveOptions};
use srcloc::Error;

#[derive(Parser)]
#[command(name = "srcloc", version, about = "Source location and rooted network augmentation solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded instance.
    Gen(GenArgs),
    /// Solve an instance and print a report.
    Solve(SolveArgs),
    /// Check a solution file against an instance.
    Verify { instance: PathBuf, solution: PathBuf },
    /// Compute the exact optimum by enumeration.
    Oracle(OracleArgs),
    /// Solve every instance in a directory and tabulate realized ratios.
    RatioReport(RatioArgs),
    /// Run the randomized property checks.
    PropertySuite(SuiteArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Ssl,
    SslFlowBounds,
    Sna,
    Setcover,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Lambda,
    KappaHat,
    KappaPrime,
    General,
}

#[derive(Clone, Copy, ValueEnum)]
enum CostModeArg {
    Edge,
    Node,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    GreedySna,
    SeqBiset,
    Ssl,
    SslFlowBounds,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::GreedySna => Algorithm::GreedySna,
            AlgorithmArg::SeqBiset => Algorithm::SeqBiset,
            AlgorithmArg::Ssl => Algorithm::Ssl,
            AlgorithmArg::SslFlowBounds => Algorithm::SslFlowBounds,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    Enumerate,
    Fast,
}

#[derive(Args)]
struct GenArgs {
    kind: GenKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    edges: Option<usize>,
    #[arg(long)]
    k: Option<u64>,
    #[arg(long)]
    max_cost: Option<i64>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    undirected: bool,
    #[arg(long)]
    max_edge_cost: Option<i64>,
    #[arg(long)]
    candidates: Option<usize>,
    #[arg(long)]
    demands: Option<usize>,
    #[arg(long, value_enum)]
    cost_mode: Option<CostModeArg>,
    /// Draw demand pairs freely instead of from the center.
    #[arg(long)]
    unrooted: bool,
    #[arg(long)]
    q_max: Option<u64>,
    #[arg(long)]
    sets: Option<usize>,
    #[arg(long)]
    elements: Option<usize>,
    #[arg(long)]
    copies: Option<usize>,
    /// Set membership probability in percent.
    #[arg(long)]
    density: Option<u32>,
    #[arg(long)]
    node_costs: bool,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone, Copy)]
struct CapArgs {
    #[arg(long, default_value_t = 12)]
    ssl_cap: usize,
    #[arg(long, default_value_t = 16)]
    sna_cap: usize,
}

impl CapArgs {
    fn caps(self) -> OracleCaps {
        OracleCaps {
            ssl_nodes: self.ssl_cap,
            sna_elements: self.sna_cap,
            ..OracleCaps::default()
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, short, value_enum)]
    algorithm: AlgorithmArg,
    /// Allow the greedy on undirected instances.
    #[arg(long)]
    undirected: bool,
    /// Compute the exact optimum when the file stores none.
    #[arg(long)]
    oracle: bool,
    #[command(flatten)]
    caps: CapArgs,
    #[arg(long, value_enum, default_value = "auto")]
    method: MethodArg,
    #[arg(long, default_value_t = srcloc::bisetcover::DEFAULT_ENUMERATION_CAP)]
    enumeration_cap: usize,
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Also write the selection as a solution file.
    #[arg(long)]
    solution_out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    instance: PathBuf,
    #[command(flatten)]
    caps: CapArgs,
    #[arg(long)]
    solution_out: Option<PathBuf>,
}

#[derive(Args)]
struct RatioArgs {
    directory: PathBuf,
    #[arg(long, short, value_enum)]
    algorithm: AlgorithmArg,
    #[arg(long)]
    undirected: bool,
    #[arg(long, default_value_t = 4)]
    workers: usize,
    #[command(flatten)]
    caps: CapArgs,
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    instances: usize,
    #[arg(long, default_value_t = 5)]
    max_nodes: usize,
    #[arg(long, default_value_t = 6)]
    max_candidates: usize,
    #[arg(long, default_value_t = 2)]
    k: u64,
    /// Swap in a non-submodular function; the suite should then fail.
    #[arg(long)]
    mutant: bool,
    #[arg(long)]
    counterexamples: Option<PathBuf>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Infeasible(_) => 2,
        Error::Incompatible(_) | Error::Precondition(_) => 3,
        Error::Format { .. } | Error::Io(_) => 4,
        Error::CapExceeded { .. } => 5,
        _ => 1,
    }
}

fn read_instance(path: &Path) -> Result<InstanceFile, Error> {
    let text = fs::read_to_string(path)?;
    InstanceFile::parse(&text).map_err(|e| match e {
        Error::Format { path: field, message } => Error::Format {
            path: format!("{}: {field}", path.display()),
            message,
        },
        other => other,
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_gen(a: &GenArgs) -> Result<u8, Error> {
    let spec = match a.kind {
        GenKind::Ssl | GenKind::SslFlowBounds => {
            let d = SslParams::default();
            GenSpec::Ssl(SslParams {
                nodes: a.nodes.unwrap_or(d.nodes),
                edges: a.edges.unwrap_or(d.edges),
                k: a.k.unwrap_or(d.k),
                max_cost: a.max_cost.unwrap_or(d.max_cost),
                directed: !a.undirected,
                mode: match a.mode {
                    None => d.mode,
                    Some(ModeArg::Lambda) => PqMode::Lambda,
                    Some(ModeArg::KappaHat) => PqMode::KappaHat,
                    Some(ModeArg::KappaPrime) => PqMode::KappaPrime,
                    Some(ModeArg::General) => PqMode::General,
                },
                flow_bounds: matches!(a.kind, GenKind::SslFlowBounds),
                max_edge_cost: a.max_edge_cost.unwrap_or(d.max_edge_cost),
                budget_slack: d.budget_slack,
            })
        }
        GenKind::Sna => {
            let d = SnaParams::default();
            GenSpec::Sna(SnaParams {
                nodes: a.nodes.unwrap_or(d.nodes),
                edges: a.edges.unwrap_or(d.edges),
                candidates: a.candidates.unwrap_or(d.candidates),
                demands: a.demands.unwrap_or(d.demands),
                k: a.k.unwrap_or(d.k),
                max_cost: a.max_cost.unwrap_or(d.max_cost),
                directed: !a.undirected,
                cost_mode: match a.cost_mode {
                    Some(CostModeArg::Node) => CostMode::Node,
                    _ => CostMode::Edge,
                },
                rooted: !a.unrooted,
                root_is_center: true,
                q_max: a.q_max,
            })
        }
        GenKind::Setcover => {
            let d = SetCoverParams::default();
            GenSpec::SetCover(SetCoverParams {
                sets: a.sets.unwrap_or(d.sets),
                elements: a.elements.unwrap_or(d.elements),
                copies: a.copies,
                density: a.density.unwrap_or(d.density),
                node_costs: a.node_costs,
            })
        }
    };
    let file = gen::generate(&spec, a.seed)?;
    emit(a.out.as_deref(), &file.to_canonical())?;
    Ok(0)
}

fn cmd_solve(a: &SolveArgs) -> Result<u8, Error> {
    let file = read_instance(&a.instance)?;
    let options = SolveOptions {
        biset: BisetCoverOptions {
            method: match a.method {
                MethodArg::Auto => TightMethod::Auto,
                MethodArg::Enumerate => TightMethod::Enumerate,
                MethodArg::Fast => TightMethod::FastPath,
            },
            enumeration_cap: a.enumeration_cap,
        },
        allow_undirected: a.undirected,
        oracle: a.oracle.then(|| a.caps.caps()),
    };
    let report = solve(&file, a.algorithm.into(), &options)?;
    emit(a.out.as_deref(), &report.to_json())?;
    if let Some(path) = &a.solution_out {
        let sol = SolutionFile {
            instance_sha256: report.instance_sha256.clone(),
            sources: report.sources.clone(),
            candidates: report.candidates.clone(),
        };
        fs::write(path, sol.to_canonical())?;
    }
    Ok(if report.feasible { 0 } else { 2 })
}

fn cmd_verify(instance: &Path, solution: &Path) -> Result<u8, Error> {
    let file = read_instance(instance)?;
    let sol = SolutionFile::parse(&fs::read_to_string(solution)?)?;
    if sol.instance_sha256 != file.digest() {
        return Err(Error::format(
            "instance_sha256",
            format!("solution refers to {}, instance is {}", sol.instance_sha256, file.digest()),
        ));
    }
    let problem = file.to_problem()?;
    let selection = sol.selection(&problem)?;
    let cert = certify(&problem, &selection)?;
    for c in &cert.checks {
        let mut line = format!("{}: {} / {}", c.subject, c.achieved, c.required);
        if let (Some(mu), Some(b)) = (&c.flow_cost, &c.budget) {
            line.push_str(&format!(", flow cost {mu} / bound {b}"));
        }
        println!("{line} {}", if c.ok { "ok" } else { "SHORT" });
    }
    if let Some(w) = &cert.witness {
        println!("deficient biset: {w}");
    }
    println!("{}", if cert.feasible { "feasible" } else { "infeasible" });
    Ok(if cert.feasible { 0 } else { 2 })
}

fn cmd_oracle(a: &OracleArgs) -> Result<u8, Error> {
    let file = read_instance(&a.instance)?;
    let problem = file.to_problem()?;
    let caps = a.caps.caps();
    let (result, is_ssl) = match &problem {
        Problem::Ssl(ssl) => (exact_ssl(ssl, &caps)?, true),
        Problem::Sna(sna) => (exact_sna(sna, &caps)?, false),
    };
    let key = if is_ssl { "sources" } else { "candidates" };
    let text = serde_json::to_string_pretty(&json!({
        "instance_sha256": file.digest(),
        "optimum": describe_cost(&result.optimum),
        key: result.solution,
        "optimal_count": result.optimal_count,
        "enumerated": result.enumerated,
    }))
    .expect("json");
    println!("{text}");
    if let Some(path) = &a.solution_out {
        let sol = SolutionFile {
            instance_sha256: file.digest(),
            sources: is_ssl.then(|| result.solution.clone()),
            candidates: (!is_ssl).then(|| result.solution.clone()),
        };
        fs::write(path, sol.to_canonical())?;
    }
    Ok(0)
}

struct Row {
    name: String,
    status: String,
    cost: String,
    optimum: String,
    ratio: String,
    bound: String,
    exceeds: bool,
}

fn ratio_row(path: &Path, alg: Algorithm, options: &SolveOptions) -> Row {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let blank = |status: String| Row {
        name: name.clone(),
        status,
        cost: "-".into(),
        optimum: "-".into(),
        ratio: "-".into(),
        bound: "-".into(),
        exceeds: false,
    };
    let file = match read_instance(path) {
        Ok(f) => f,
        Err(e) => return blank(format!("parse-error: {e}")),
    };
    let problem = match file.to_problem() {
        Ok(p) => p,
        Err(e) => return blank(format!("parse-error: {e}")),
    };
    let (optimum, status) = match optimum_for(&file, &problem, options.oracle.as_ref()) {
        Ok(opt) => (opt, None),
        Err(e @ Error::CapExceeded { .. }) => (None, Some(format!("cap-exceeded: {e}"))),
        Err(e) => (None, Some(format!("oracle-error: {e}"))),
    };
    // The optimum travels as metadata so the solve itself never enumerates.
    let mut file = file;
    file.metadata.known_optimum = optimum.map(Num::rational);
    let solve_options = SolveOptions { oracle: None, ..options.clone() };
    let report = match solve(&file, alg, &solve_options) {
        Ok(r) => r,
        Err(e) => return blank(format!("error: {e}")),
    };
    let exceeds = !report.feasible || report.within_bound == Some(false);
    let status = status.unwrap_or_else(|| {
        if !report.feasible {
            "INFEASIBLE".into()
        } else if exceeds {
            "EXCEEDS".into()
        } else {
            "ok".into()
        }
    });
    Row {
        name,
        status,
        cost: report.cost,
        optimum: report.oracle_optimum.unwrap_or_else(|| "-".into()),
        ratio: report.ratio.unwrap_or_else(|| "-".into()),
        bound: report.bound,
        exceeds,
    }
}

fn cmd_ratio_report(a: &RatioArgs) -> Result<u8, Error> {
    let mut paths: Vec<PathBuf> = fs::read_dir(&a.directory)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let options = SolveOptions {
        allow_undirected: a.undirected,
        oracle: Some(a.caps.caps()),
        ..SolveOptions::default()
    };
    let alg: Algorithm = a.algorithm.into();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.workers.max(1))
        .build()
        .map_err(|e| Error::Precondition(e.to_string()))?;
    let rows: Vec<Row> = pool.install(|| paths.par_iter().map(|p| ratio_row(p, alg, &options)).collect());
    println!("instance\tstatus\tcost\toptimum\tratio\tbound");
    for r in &rows {
        println!("{}\t{}\t{}\t{}\t{}\t{}", r.name, r.status, r.cost, r.optimum, r.ratio, r.bound);
    }
    let with_ratio = rows.iter().filter(|r| r.ratio != "-").count();
    let exceeding = rows.iter().filter(|r| r.exceeds).count();
    println!("# instances {}, with ratio {with_ratio}, exceeding bound {exceeding}", rows.len());
    Ok(if exceeding > 0 { 1 } else { 0 })
}

fn cmd_property_suite(a: &SuiteArgs) -> Result<u8, Error> {
    let report = property_suite(&SuiteConfig {
        seed: a.seed,
        instances: a.instances,
        max_nodes: a.max_nodes,
        max_candidates: a.max_candidates,
        k: a.k,
        mutant: a.mutant,
        counterexample_dir: a.counterexamples.clone(),
    })?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    println!("property\tpassed\tfailed");
    for p in &report.properties {
        println!("{}\t{}\t{}", p.name, p.passed, p.failed);
    }
    for c in &report.counterexamples {
        println!("# counterexample written to {}", c.display());
    }
    Ok(if report.passed() { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Verify { instance, solution } => cmd_verify(instance, solution),
        Command::Oracle(a) => cmd_oracle(a),
        Command::RatioReport(a) => cmd_ratio_report(a),
        Command::PropertySuite(a) => cmd_property_suite(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
