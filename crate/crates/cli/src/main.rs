use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use log::info;

use ipld::apps::{build_dsl_instance, build_num_instance, generate_dsl, generate_num_with, Network, NumData};
use ipld::baseline::{build_cp_num, cp_solve, cp_tune, default_tau_grid};
use ipld::io::{parse_dsl, parse_edge_list, write_results, write_trace, CpSteps, RunConfig, RunResult};
use ipld::model::ProblemInstance;
use ipld::path::{neighborhood_diagnostics, tolerance_sweep, SweepAxis, ToleranceSchedule};
use ipld::{solve, IpldError, SolverConfig};

const EXIT_ERROR: u8 = 1;
const EXIT_CAP: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "ipld", version, about = "Inexact interior-point Lagrangian decomposition solver")]
struct Cli {
    /// Log verbosity: -v info, -vv debug.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one instance with IPLD and/or the Chambolle-Pock baseline.
    Solve(SolveArgs),
    /// Sweep the slave or master tolerance and record one trace per value.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Problem {
    Num,
    Dsl,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Solver {
    Ipld,
    Cp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Axis {
    Delta,
    EpsMaster,
}

#[derive(Args, Debug)]
struct ProblemArgs {
    #[arg(long, value_enum, default_value = "num")]
    problem: Problem,
    /// Edge-list file for NUM.
    #[arg(long)]
    edges: Option<PathBuf>,
    /// Node count of a synthetic NUM network.
    #[arg(long)]
    synthetic: Option<usize>,
    /// Truncate the NUM network to this many nodes around `--center` (BFS ball).
    #[arg(long)]
    subnetwork: Option<usize>,
    #[arg(long, default_value_t = 0)]
    center: usize,
    /// Keep only this many heaviest destinations per NUM source.
    #[arg(long)]
    destinations: Option<usize>,
    /// DSL matrices file; without it a synthetic instance is drawn.
    #[arg(long)]
    dsl_data: Option<PathBuf>,
    /// Users `m` of a synthetic DSL instance.
    #[arg(long, default_value_t = 7)]
    users: usize,
    /// Channels `M` of a synthetic DSL instance.
    #[arg(long, default_value_t = 50)]
    channels: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Clone, Copy)]
struct PathArgs {
    #[arg(long, default_value_t = 0.25)]
    t0: f64,
    #[arg(long, default_value_t = 0.05)]
    beta: f64,
    /// Target accuracy of the certified stop.
    #[arg(long, default_value_t = 1e-4)]
    eps: f64,
    #[arg(long, default_value_t = 1e-5)]
    delta_slave: f64,
    #[arg(long, default_value_t = 1e-5)]
    eps_master: f64,
    /// Override the main-loop iteration cap.
    #[arg(long)]
    kmax: Option<usize>,
    /// Record and check the neighborhood quantities (extra slave solves).
    #[arg(long)]
    diagnostics: bool,
}

impl PathArgs {
    fn config(&self, seed: u64) -> SolverConfig {
        SolverConfig {
            t0: self.t0,
            beta: self.beta,
            eps: self.eps,
            delta: ToleranceSchedule::constant(self.delta_slave),
            eps_master: ToleranceSchedule::constant(self.eps_master),
            kmax: self.kmax,
            seed,
            diagnostics: self.diagnostics,
            ..SolverConfig::default()
        }
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    path: PathArgs,
    /// Solver to run; repeat to run several.
    #[arg(long = "solver", value_enum, default_values_t = [Solver::Ipld])]
    solvers: Vec<Solver>,
    /// CP primal step; without it the best of 1, 1e-1, ..., 1e-8 is used.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, default_value_t = 20_000)]
    cp_max_iter: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    path: PathArgs,
    #[arg(long, value_enum, default_value = "eps-master")]
    axis: Axis,
    /// Tolerance values; defaults to decades down to 1e-12 (master) or 1e-8 (slave).
    #[arg(long, value_delimiter = ',')]
    grid: Vec<f64>,
    /// Directory receiving one trace CSV per grid value.
    #[arg(long)]
    trace_dir: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Loaded {
    instance: ProblemInstance,
    num: Option<NumData>,
    source: String,
}

fn load(p: &ProblemArgs) -> Result<Loaded, IpldError> {
    match p.problem {
        Problem::Num => {
            let (mut net, source) = match (&p.edges, p.synthetic) {
                (Some(path), _) => (parse_edge_list(path)?, path.display().to_string()),
                (None, Some(n)) => (Network::synthetic(n, n / 2, p.seed)?, format!("synthetic:{n}")),
                (None, None) => {
                    return Err(IpldError::InvalidArgument("--problem num needs --edges <path> or --synthetic <nodes>".into()))
                }
            };
            if let Some(size) = p.subnetwork {
                net = net.bfs_ball(p.center, size)?;
            }
            let data = generate_num_with(&net, p.seed, p.destinations)?;
            info!("NUM: {} nodes, {} flows, {} loaded edges", net.n_nodes(), data.n_vars(), data.n_rows());
            Ok(Loaded { instance: build_num_instance(&data)?, num: Some(data), source })
        }
        Problem::Dsl => {
            let (data, source) = match &p.dsl_data {
                Some(path) => (parse_dsl(path)?, path.display().to_string()),
                None => (generate_dsl(p.users, p.channels, p.seed)?, format!("synthetic:{}x{}", p.users, p.channels)),
            };
            Ok(Loaded { instance: build_dsl_instance(&data)?, num: None, source })
        }
    }
}

fn run_config(p: &ProblemArgs, a: &PathArgs, source: &str, tau: Option<f64>) -> RunConfig {
    RunConfig {
        problem: format!("{:?}", p.problem).to_lowercase(),
        source: source.to_string(),
        seed: p.seed,
        t0: a.t0,
        beta: a.beta,
        eps: a.eps,
        delta: a.delta_slave,
        eps_master: a.eps_master,
        tau,
    }
}

/// Result plus whether it stopped on an iteration cap.
fn run_ipld(args: &SolveArgs, loaded: &Loaded) -> Result<(RunResult, bool), IpldError> {
    let cfg = args.path.config(args.problem.seed);
    let started = Instant::now();
    let config = run_config(&args.problem, &args.path, &loaded.source, None);
    let outcome = match solve(&loaded.instance, &cfg) {
        Ok(o) => o,
        Err(e) if e.is_iteration_cap() => {
            eprintln!("ipld: {e}");
            let r = RunResult {
                solver: "ipld".into(),
                converged: false,
                objective: None,
                feasibility: None,
                iterations: 0,
                wall_ms: started.elapsed().as_secs_f64() * 1e3,
                certificate: None,
                diagnostics_passed: None,
                cp_steps: None,
                config,
                trace: None,
            };
            return Ok((r, true));
        }
        Err(e) => return Err(e),
    };
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;
    if let Some(path) = &args.trace {
        write_trace(&outcome.trace, path)?;
    }
    let diagnostics_passed = cfg.diagnostics.then(|| {
        let rep = neighborhood_diagnostics(&outcome.trace);
        println!(
            "ipld diagnostics: {} ({} rows, max lambda/beta {:.3})",
            if rep.passed() { "all checks passed" } else { "FAILED" },
            rep.rows.len(),
            rep.max_lambda_ratio(&outcome.trace)
        );
        rep.passed()
    });
    let r = RunResult {
        solver: "ipld".into(),
        converged: true,
        objective: Some(outcome.objective),
        feasibility: Some(outcome.feasibility),
        iterations: outcome.iterations(),
        wall_ms,
        certificate: Some(outcome.certificate.clone()),
        diagnostics_passed,
        cp_steps: None,
        config,
        trace: args.trace.as_ref().map(|p| p.display().to_string()),
    };
    Ok((r, false))
}

fn run_cp(args: &SolveArgs, loaded: &Loaded) -> Result<(RunResult, bool), IpldError> {
    let data = loaded
        .num
        .as_ref()
        .ok_or_else(|| IpldError::InvalidArgument("the CP baseline is implemented for NUM only".into()))?;
    let started = Instant::now();
    let cp = build_cp_num(data)?;
    let (tol_feas, tol_gap) = (1e-7, 1e-7);
    let res = match args.tau {
        Some(tau) => cp_solve(&cp.problem, tau, args.cp_max_iter, tol_feas, tol_gap)?,
        None => cp_tune(&cp.problem, &default_tau_grid(), args.cp_max_iter, tol_feas, tol_gap)?,
    };
    let r = RunResult {
        solver: "cp".into(),
        converged: res.converged,
        objective: Some(cp.objective(data, &res)),
        feasibility: Some(cp.flow_feasibility(data, &res)),
        iterations: res.iters,
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
        certificate: None,
        diagnostics_passed: None,
        cp_steps: Some(CpSteps { tau: res.tau, sigma: res.sigma, k_norm: res.k_norm }),
        config: run_config(&args.problem, &args.path, &loaded.source, Some(res.tau)),
        trace: None,
    };
    Ok((r, !res.converged))
}

fn print_result(r: &RunResult) {
    let (Some(obj), Some(feas)) = (r.objective, r.feasibility) else {
        println!("{:>4}: stopped at the iteration cap", r.solver);
        return;
    };
    println!(
        "{:>4}: objective {:.12e}  feasibility {:.3e}  iterations {}  time {:.1} ms{}",
        r.solver,
        obj,
        feas,
        r.iterations,
        r.wall_ms,
        if r.converged { "" } else { "  (not converged)" }
    );
}

fn cmd_solve(args: &SolveArgs) -> Result<u8, IpldError> {
    args.path.config(args.problem.seed).validate()?;
    let loaded = load(&args.problem)?;
    let mut results = Vec::new();
    let mut capped = false;
    let mut solvers = args.solvers.clone();
    solvers.dedup();
    for s in solvers {
        let (r, cap) = match s {
            Solver::Ipld => run_ipld(args, &loaded)?,
            Solver::Cp => run_cp(args, &loaded)?,
        };
        print_result(&r);
        capped |= cap;
        results.push(r);
    }
    if let [a, b] = results.as_slice() {
        if let (Some(x), Some(y)) = (a.objective, b.objective) {
            let rel = (x - y).abs() / x.abs().max(1.0);
            println!("relative objective difference {}/{}: {rel:.3e}", a.solver, b.solver);
        }
    }
    if let Some(path) = &args.out {
        write_results(&results, path)?;
    }
    Ok(if capped { EXIT_CAP } else { 0 })
}

fn cmd_sweep(args: &SweepArgs) -> Result<u8, IpldError> {
    let base = args.path.config(args.problem.seed);
    base.validate()?;
    let loaded = load(&args.problem)?;
    let axis = match args.axis {
        Axis::Delta => SweepAxis::Delta,
        Axis::EpsMaster => SweepAxis::EpsMaster,
    };
    let grid = if args.grid.is_empty() { axis.default_grid() } else { args.grid.clone() };
    if let Some(dir) = &args.trace_dir {
        std::fs::create_dir_all(dir).map_err(|e| IpldError::Io { path: dir.display().to_string(), source: e })?;
    }
    let mut capped = false;
    let mut results = Vec::new();
    for cell in tolerance_sweep(&loaded.instance, &base, axis, &grid) {
        let mut pa = args.path;
        match axis {
            SweepAxis::Delta => pa.delta_slave = cell.value,
            SweepAxis::EpsMaster => pa.eps_master = cell.value,
        }
        let config = run_config(&args.problem, &pa, &loaded.source, None);
        match cell.outcome {
            Ok(o) => {
                let trace = args.trace_dir.as_ref().map(|d| trace_name(d, axis, cell.value));
                if let Some(p) = &trace {
                    write_trace(&o.trace, p)?;
                }
                println!("{:?} = {:.0e}: {} iterations, objective {:.12e}", axis, cell.value, o.iterations(), o.objective);
                results.push(RunResult {
                    solver: "ipld".into(),
                    converged: true,
                    objective: Some(o.objective),
                    feasibility: Some(o.feasibility),
                    iterations: o.iterations(),
                    wall_ms: o.trace.records.iter().map(|r| r.wall_ms).sum(),
                    certificate: Some(o.certificate),
                    diagnostics_passed: None,
                    cp_steps: None,
                    config,
                    trace: trace.map(|p| p.display().to_string()),
                });
            }
            Err(e) if e.is_iteration_cap() => {
                println!("{:?} = {:.0e}: {e}", axis, cell.value);
                capped = true;
            }
            Err(e) => return Err(e),
        }
    }
    if let Some(path) = &args.out {
        write_results(&results, path)?;
    }
    Ok(if capped { EXIT_CAP } else { 0 })
}

fn trace_name(dir: &Path, axis: SweepAxis, value: f64) -> PathBuf {
    let tag = match axis {
        SweepAxis::Delta => "delta",
        SweepAxis::EpsMaster => "eps_master",
    };
    dir.join(format!("trace_{tag}_{value:.0e}.csv"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Sweep(a) => cmd_sweep(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, IpldError::InvalidArgument(_)) {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            ExitCode::from(EXIT_ERROR)
        }
    }
}
