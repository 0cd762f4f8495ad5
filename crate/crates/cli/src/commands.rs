use std::fs;
use std::path::Path;

use clap::{Args, ValueEnum};
use log::info;
use te_shape::consensus::{run_aggregator_on, ConsensusError, GraphError};
use te_shape::experiment::{m4_grid, write_sweep_csv, ExperimentError, SweepError};
use te_shape::model::{to_json, InstanceError};
use te_shape::{
    check_homogeneous, check_pwl_set, check_quadratic_set, load_instance, run_distributed, run_m4_sweep,
    run_monte_carlo, solve as solve_market, CommGraph, ConsensusConfig, ConsensusMode, ExperimentSpec,
    MarketInstance, MethodChoice, ModelKind, ShapingVerdict, SolverConfig, UtilityParams,
};

use crate::THREADS_ENV;

pub const EXIT_NOT_ADMISSIBLE: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_SOLVER: u8 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

fn input(message: impl ToString) -> CliError {
    CliError { code: EXIT_INPUT, message: message.to_string() }
}

fn solver(message: impl ToString) -> CliError {
    CliError { code: EXIT_SOLVER, message: message.to_string() }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| input(format!("cannot write {}: {e}", path.display())))
}

fn read_instance(path: &Path) -> Result<MarketInstance, CliError> {
    load_instance(path).map_err(|e: InstanceError| input(e))
}

pub fn configure_threads(flag: Option<usize>) -> Result<(), CliError> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| input(format!("{THREADS_ENV}={v:?} is not a count")))?),
        Err(_) => flag,
    };
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| input(format!("thread pool: {e}")))?;
        info!("using {n} worker threads");
    }
    Ok(())
}

pub fn solve(path: &Path, model: Option<ModelKind>, method: &str, out: Option<&Path>) -> Result<u8, CliError> {
    let choice: MethodChoice = method.parse().map_err(input)?;
    let mut instance = read_instance(path)?;
    if let Some(model) = model {
        instance.model = model;
    }
    let result = solve_market(&instance, &SolverConfig::default(), choice).map_err(|e| {
        if e.is_input_error() {
            input(e)
        } else {
            solver(e)
        }
    })?;
    info!("solved with {:?} in {} iterations", result.method, result.diagnostics.iterations);
    println!("lambda_star={:.3}", result.lambda_star);
    let xs: Vec<String> = result.x_star.iter().map(|x| format!("{x:.3}")).collect();
    println!("x_star={}", xs.join(","));
    if let Some(e) = &result.e_star {
        let es: Vec<String> = e.iter().map(|v| format!("{v:.3}")).collect();
        println!("e_star={}", es.join(","));
    }
    if let Some(out) = out {
        let json = to_json(&instance, &result).map_err(input)?;
        write_file(out, &(serde_json::to_string_pretty(&json).expect("json") + "\n"))?;
    }
    Ok(0)
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ShapeFamily {
    Quad,
    Pwl,
    Homog,
}

#[derive(Args, Debug)]
pub struct ShapeArgs {
    #[arg(long, value_enum)]
    family: ShapeFamily,
    #[arg(long)]
    b_max: Option<f64>,
    #[arg(long)]
    m_max: Option<f64>,
    #[arg(long)]
    beta_max: Option<f64>,
    #[arg(long)]
    phi_max: Option<f64>,
    /// Homogeneous quadratic curvature.
    #[arg(long)]
    b: Option<f64>,
    /// Homogeneous quadratic satiation load.
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    n: usize,
    /// Network generation C.
    #[arg(long = "C")]
    capacity: f64,
    #[arg(long)]
    lambda_dagger: f64,
}

fn need(value: Option<f64>, flag: &str) -> Result<f64, CliError> {
    value.ok_or_else(|| input(format!("--{flag} is required for this family")))
}

pub fn shape_check(args: &ShapeArgs) -> Result<u8, CliError> {
    let (n, c, t) = (args.n, args.capacity, args.lambda_dagger);
    let verdict: ShapingVerdict = match args.family {
        ShapeFamily::Quad => check_quadratic_set(need(args.b_max, "b-max")?, need(args.m_max, "m-max")?, n, c, t),
        ShapeFamily::Pwl => check_pwl_set(need(args.beta_max, "beta-max")?, need(args.phi_max, "phi-max")?, n, c, t),
        ShapeFamily::Homog => {
            let theta = UtilityParams::quadratic(need(args.b, "b")?, need(args.m, "m")?);
            check_homogeneous(&theta, n, c, t)
        }
    }
    .map_err(input)?;
    println!("admissible={}", verdict.admissible);
    match verdict.worst_case_lambda {
        Some(w) => println!("worst_case_lambda={w}"),
        None => println!("worst_case_lambda=unknown"),
    }
    println!("binding_condition={:?}", verdict.binding_condition);
    Ok(if verdict.admissible { 0 } else { EXIT_NOT_ADMISSIBLE })
}

pub fn experiment(spec_path: &Path, seed: Option<u64>, out: &Path) -> Result<u8, CliError> {
    let mut spec = ExperimentSpec::load(spec_path).map_err(input)?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    let output = run_monte_carlo(&spec).map_err(|e| match e {
        ExperimentError::InvalidSpec(_) | ExperimentError::Json(_) => input(e),
        other => solver(other),
    })?;
    output.write_to(out).map_err(|e| input(format!("cannot write to {}: {e}", out.display())))?;
    for c in &output.cells {
        let above = c.lambda_stars.iter().filter(|&&l| l > c.cell.lambda_dagger).count();
        println!(
            "{}: median={:.4} q25={:.4} q75={:.4} above_threshold={above}/{}",
            c.cell.key,
            c.stats.median,
            c.stats.q25,
            c.stats.q75,
            c.lambda_stars.len()
        );
    }
    Ok(0)
}

pub fn sweep(path: &Path, out: Option<&Path>) -> Result<u8, CliError> {
    let instance = read_instance(path)?;
    let rows = run_m4_sweep(&instance, &m4_grid()).map_err(|e| match e {
        SweepError::BadBase => input(e),
        other => solver(other),
    })?;
    match out {
        Some(out) => {
            let mut buf = Vec::new();
            write_sweep_csv(&rows, &mut buf).map_err(solver)?;
            write_file(out, &String::from_utf8(buf).expect("csv is utf-8"))?;
            let ratio = rows[rows.len() - 1].lambda_star / rows[0].lambda_star;
            println!("{} rows written; lambda_star ratio last/first = {ratio:.2}", rows.len());
        }
        None => {
            println!("{:>6} {:>12} {:>10}", "m4", "lambda_star", "x4");
            for r in &rows {
                println!("{:>6} {:>12.4} {:>10.4}", r.m4, r.lambda_star, r.x4);
            }
        }
    }
    Ok(0)
}

pub fn consensus(
    path: &Path,
    graph: Option<&Path>,
    rounds: usize,
    mode: &str,
    tolerance: f64,
    trace: Option<&Path>,
) -> Result<u8, CliError> {
    let mode: ConsensusMode = mode.parse().map_err(input)?;
    if tolerance.is_nan() || tolerance < 0.0 {
        return Err(input("--tolerance must be non-negative"));
    }
    let instance = read_instance(path)?;
    let graph = match graph {
        Some(p) => CommGraph::load(p),
        None => CommGraph::complete(instance.n()),
    }
    .map_err(|e: GraphError| input(e))?;
    let cfg = ConsensusConfig { mode, rounds, tolerance, solver: SolverConfig::default() };
    let run = run_distributed(&instance, &graph, &cfg).map_err(|e| match e {
        ConsensusError::NotConverged { .. } | ConsensusError::Solve { .. } => solver(e),
        other => input(other),
    })?;
    if let Some(trace_path) = trace {
        let mut buf = Vec::new();
        run.trace.write_csv(&mut buf).map_err(solver)?;
        write_file(trace_path, &String::from_utf8(buf).expect("csv is utf-8"))?;
    }
    info!("{} rounds, final consensus error {:e}", run.trace.rounds, run.trace.final_max_error());

    let lambda = run.outcomes[0].result.lambda_star;
    if run.agents_agree() {
        println!("all agents agree: lambda_star={lambda:.3}");
    } else {
        for o in &run.outcomes {
            println!("agent {}: lambda_star={:.6}", o.agent, o.result.lambda_star);
        }
    }
    if mode != ConsensusMode::HomogeneousAverage {
        let central = run_aggregator_on(&instance, &SolverConfig::default()).map_err(solver)?.result;
        let gap = run
            .outcomes
            .iter()
            .map(|o| (o.result.lambda_star - central.lambda_star).abs())
            .fold(0.0, f64::max);
        println!("max gap to centralized: {gap:e}");
    }
    Ok(0)
}
