//! `cma` — command-line front end for the Monge-Ampere solvers: radial and
//! planar runs, t sweeps, geodesics, inequality scans, bounds tables, the
//! stability eigenvalue, and uniqueness experiments.

mod app;
mod config;
mod plot;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use cma_core::DomainSpec;
use serde_json::json;

use app::{AppError, Lambda1Source, Task};
use config::{
    linear_t_grid, parse_families, parse_phi0, parse_starts, RunConfig, DEFAULT_MAX_ITER,
    DEFAULT_PLANAR_GRID, DEFAULT_RADIAL_NODES, DEFAULT_TOL,
};

const OUT_DIR_ENV: &str = "CMA_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "cma",
    version,
    about = "Solvers and diagnostics for the Dirichlet Monge-Ampere problem"
)]
struct Cli {
    /// Output directory (default: $CMA_OUT_DIR, then ./cma-out)
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SolveCommon {
    /// Convergence tolerance on sup|phi_{j+1} - phi_j|
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Iteration budget
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the radial problem on a ball by inverse iteration
    SolveRadial {
        /// Complex dimension
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Ball radius
        #[arg(long = "R")]
        radius: f64,
        /// Exponent parameter
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Number of radial grid nodes
        #[arg(long, default_value_t = DEFAULT_RADIAL_NODES)]
        grid: usize,
        /// Initial potential: zero, paraboloid, or a solution CSV path
        #[arg(long, default_value = "zero")]
        phi0: String,
        #[command(flatten)]
        common: SolveCommon,
    },
    /// Solve the planar Liouville problem on a grid domain
    SolvePlanar {
        /// Domain JSON: inline or a file path
        #[arg(long)]
        domain: String,
        /// Exponent parameter
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Cells across the characteristic extent
        #[arg(long, default_value_t = DEFAULT_PLANAR_GRID)]
        grid: usize,
        #[command(flatten)]
        common: SolveCommon,
    },
    /// Run the radial solver over an evenly spaced grid of t values
    SweepT {
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long = "R")]
        radius: f64,
        #[arg(long, default_value_t = 513)]
        grid: usize,
        #[arg(long)]
        t_min: f64,
        #[arg(long)]
        t_max: f64,
        /// Number of t values including both endpoints
        #[arg(long)]
        steps: usize,
        /// Worker threads for independent runs
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[command(flatten)]
        common: SolveCommon,
    },
    /// Geodesic between two radial potentials via Legendre duality
    Geodesic {
        /// Solution CSV of the starting potential
        #[arg(long)]
        from: PathBuf,
        /// Solution CSV of the ending potential
        #[arg(long)]
        to: PathBuf,
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Number of path segments (samples minus one)
        #[arg(long, default_value_t = 16)]
        samples: usize,
        /// Nodes of the logarithmic window
        #[arg(long, default_value_t = 1024)]
        s_nodes: usize,
    },
    /// Moser-Trudinger inequality scan over scaled potential families
    MtScan {
        /// Comma-separated families: unif, star
        #[arg(long, default_value = "unif,star")]
        family: String,
        #[arg(long, default_value_t = 0.9)]
        beta: f64,
        /// Largest scale factor
        #[arg(long, default_value_t = 8.0)]
        s_max: f64,
        /// Number of scales per family
        #[arg(long, default_value_t = 17)]
        steps: usize,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long = "R", default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = DEFAULT_RADIAL_NODES)]
        grid: usize,
    },
    /// Dimensional constants: Bishop-type bound and solvability threshold
    Bounds {
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
    /// First eigenvalue of the linearized operator on a planar solution
    Lambda1 {
        /// Domain JSON: inline or a file path
        #[arg(long)]
        domain: String,
        #[arg(long, default_value_t = DEFAULT_PLANAR_GRID)]
        grid: usize,
        /// Solution CSV to analyze; omit to solve first at the given t
        #[arg(long)]
        solution: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[command(flatten)]
        common: SolveCommon,
    },
    /// Limit agreement of the iteration from several starts
    Uniqueness {
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long = "R")]
        radius: f64,
        #[arg(long, default_value_t = 513)]
        grid: usize,
        /// Comma-separated starts: zero, paraboloid[*s], fubini[*s]
        #[arg(long, default_value = "zero,paraboloid,paraboloid*0.5")]
        starts: String,
        #[arg(long, default_value_t = 1.0e-6)]
        tol: f64,
        #[arg(long, default_value_t = 600)]
        max_iter: usize,
    },
    /// Execute a JSON run configuration
    Run {
        /// Path to the RunConfig JSON file
        #[arg(long)]
        config: PathBuf,
    },
}

/// Domain argument: inline JSON when it parses as such, else a file path.
fn parse_domain(text: &str) -> Result<DomainSpec, AppError> {
    let trimmed = text.trim();
    let source = if trimmed.starts_with('{') {
        trimmed.to_string()
    } else {
        std::fs::read_to_string(trimmed).map_err(|source| AppError::Io {
            context: format!("reading domain file {trimmed}"),
            source,
        })?
    };
    serde_json::from_str(&source)
        .map_err(|err| AppError::Config(format!("domain JSON: {err}")))
}

fn build_task(command: &Command) -> Result<(Task, serde_json::Value), AppError> {
    let task = match command {
        Command::SolveRadial { n, radius, t, grid, phi0, common } => Task::Radial {
            n: *n,
            radius: *radius,
            t: *t,
            grid: *grid,
            tol: common.tol,
            max_iter: common.max_iter,
            phi0: parse_phi0(phi0),
        },
        Command::SolvePlanar { domain, t, grid, common } => Task::Planar {
            domain: parse_domain(domain)?,
            t: *t,
            grid: *grid,
            tol: common.tol,
            max_iter: common.max_iter,
        },
        Command::SweepT { n, radius, grid, t_min, t_max, steps, threads, common } => {
            Task::SweepT {
                n: *n,
                radius: *radius,
                grid: *grid,
                t_grid: linear_t_grid(*t_min, *t_max, *steps).map_err(AppError::Config)?,
                tol: common.tol,
                max_iter: common.max_iter,
                threads: *threads,
            }
        }
        Command::Geodesic { from, to, n, samples, s_nodes } => Task::Geodesic {
            n: *n,
            from: from.clone(),
            to: to.clone(),
            segments: *samples,
            s_nodes: *s_nodes,
        },
        Command::MtScan { family, beta, s_max, steps, n, radius, grid } => Task::MtScan {
            n: *n,
            radius: *radius,
            grid: *grid,
            families: parse_families(family).map_err(AppError::Config)?,
            beta: *beta,
            s_max: *s_max,
            steps: *steps,
        },
        Command::Bounds { n } => Task::Bounds { n: *n },
        Command::Lambda1 { domain, grid, solution, t, common } => Task::Lambda1 {
            domain: parse_domain(domain)?,
            grid: *grid,
            source: match solution {
                Some(path) => Lambda1Source::File(path.clone()),
                None => {
                    Lambda1Source::Solve { t: *t, tol: common.tol, max_iter: common.max_iter }
                }
            },
        },
        Command::Uniqueness { n, radius, grid, starts, tol, max_iter } => Task::Uniqueness {
            n: *n,
            radius: *radius,
            grid: *grid,
            starts: parse_starts(starts).map_err(AppError::Config)?,
            tol: *tol,
            max_iter: *max_iter,
        },
        Command::Run { .. } => unreachable!("run is dispatched before build_task"),
    };
    let echo = task_echo(&task);
    Ok((task, echo))
}

/// Config echo for the manifest when the run came from flags, not a file.
fn task_echo(task: &Task) -> serde_json::Value {
    match task {
        Task::Radial { n, radius, t, grid, tol, max_iter, phi0 } => json!({
            "mode": "radial", "n": n, "R": radius, "t": t, "gridSize": grid,
            "tol": tol, "maxIter": max_iter,
            "phi0": match phi0 {
                app::Phi0::Zero => "zero".to_string(),
                app::Phi0::Paraboloid => "paraboloid".to_string(),
                app::Phi0::File(p) => p.display().to_string(),
            },
        }),
        Task::Planar { domain, t, grid, tol, max_iter } => json!({
            "mode": "planar", "domain": domain, "t": t, "gridSize": grid,
            "tol": tol, "maxIter": max_iter,
        }),
        Task::SweepT { n, radius, grid, t_grid, tol, max_iter, threads } => json!({
            "mode": "sweep-t", "n": n, "R": radius, "gridSize": grid, "tGrid": t_grid,
            "tol": tol, "maxIter": max_iter, "threadCount": threads,
        }),
        Task::Geodesic { n, from, to, segments, s_nodes } => json!({
            "mode": "geodesic", "n": n, "from": from.display().to_string(),
            "to": to.display().to_string(), "samples": segments, "sNodes": s_nodes,
        }),
        Task::MtScan { n, radius, grid, families, beta, s_max, steps } => json!({
            "mode": "mt-scan", "n": n, "R": radius, "gridSize": grid,
            "family": families.iter().map(|f| f.name()).collect::<Vec<_>>().join(","),
            "beta": beta, "sMax": s_max, "steps": steps,
        }),
        Task::Bounds { n } => json!({ "mode": "bounds", "n": n }),
        Task::Lambda1 { domain, grid, source } => match source {
            Lambda1Source::File(path) => json!({
                "mode": "lambda1", "domain": domain, "gridSize": grid,
                "solution": path.display().to_string(),
            }),
            Lambda1Source::Solve { t, tol, max_iter } => json!({
                "mode": "lambda1", "domain": domain, "gridSize": grid, "t": t,
                "tol": tol, "maxIter": max_iter,
            }),
        },
        Task::Uniqueness { n, radius, grid, starts, tol, max_iter } => json!({
            "mode": "uniqueness", "n": n, "R": radius, "gridSize": grid,
            "starts": format!("{starts:?}"), "tol": tol, "maxIter": max_iter,
        }),
    }
}

fn resolve_out_dir(flag: &Option<PathBuf>, config_dir: Option<&Path>) -> PathBuf {
    if let Some(dir) = flag {
        return dir.clone();
    }
    if let Some(dir) = config_dir {
        return dir.to_path_buf();
    }
    if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    PathBuf::from("cma-out")
}

fn dispatch(cli: &Cli) -> Result<(), AppError> {
    match &cli.command {
        Command::Run { config } => {
            let text = std::fs::read_to_string(config).map_err(|source| AppError::Io {
                context: format!("reading config {}", config.display()),
                source,
            })?;
            let parsed: RunConfig = serde_json::from_str(&text)
                .map_err(|err| AppError::Config(format!("config JSON: {err}")))?;
            let task = parsed.to_task().map_err(AppError::Config)?;
            let echo = serde_json::from_str(&text).expect("parsed once already");
            let out_dir = resolve_out_dir(&cli.out_dir, parsed.output_dir.as_deref());
            app::execute(&task, &echo, &out_dir)
        }
        command => {
            let (task, echo) = build_task(command)?;
            let out_dir = resolve_out_dir(&cli.out_dir, None);
            app::execute(&task, &echo, &out_dir)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(err.exit_code());
        }
    }
}
