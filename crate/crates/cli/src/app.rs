//! Task execution: dispatch to the solver crate, write artifacts into the
//! output directory, and keep the run manifest crash-visible (written once
//! with status "running", finalized when the run ends either way).

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use cma_core::geodesics::{check_energy_affine, check_f_concave, geodesic_path};
use cma_core::io::{
    field_from_csv, field_to_csv, path_to_csv, potential_from_csv, potential_to_csv,
    sweep_to_csv, trace_to_csv,
};
use cma_core::planar::{
    lambda1, liouville_iterate, planar_energy, planar_f_value, DomainSpec, PlanarDomain,
    EIGEN_TOLERANCE, RESIDUAL_TOLERANCE,
};
use cma_core::radial::{RadialGrid, RadialPotential};
use cma_core::{
    beta_default, bishop_bound, mt_check, mt_solvable_bound, ricci_iterate, summarize,
    sweep_t_max, t_sweep, uniqueness_experiment, SolverError,
};
use serde_json::{json, Value};

use crate::plot::{render_plot, Series};

/// Initial potential of a radial run.
#[derive(Debug, Clone)]
pub enum Phi0 {
    Zero,
    Paraboloid,
    File(PathBuf),
}

#[derive(Debug, Clone, Copy)]
pub enum Family {
    Unif,
    Star,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Unif => "unif",
            Family::Star => "star",
        }
    }
}

#[derive(Debug, Clone)]
pub enum Start {
    Zero,
    Paraboloid(f64),
    Fubini(f64),
}

#[derive(Debug, Clone)]
pub enum Lambda1Source {
    File(PathBuf),
    Solve { t: f64, tol: f64, max_iter: usize },
}

/// One executable unit of work, independent of how it was configured.
#[derive(Debug, Clone)]
pub enum Task {
    Radial { n: usize, radius: f64, t: f64, grid: usize, tol: f64, max_iter: usize, phi0: Phi0 },
    Planar { domain: DomainSpec, t: f64, grid: usize, tol: f64, max_iter: usize },
    SweepT {
        n: usize,
        radius: f64,
        grid: usize,
        t_grid: Vec<f64>,
        tol: f64,
        max_iter: usize,
        threads: usize,
    },
    Geodesic { n: usize, from: PathBuf, to: PathBuf, segments: usize, s_nodes: usize },
    MtScan {
        n: usize,
        radius: f64,
        grid: usize,
        families: Vec<Family>,
        beta: f64,
        s_max: f64,
        steps: usize,
    },
    Bounds { n: usize },
    Lambda1 { domain: DomainSpec, grid: usize, source: Lambda1Source },
    Uniqueness { n: usize, radius: f64, grid: usize, starts: Vec<Start>, tol: f64, max_iter: usize },
}

impl Task {
    pub fn mode(&self) -> &'static str {
        match self {
            Task::Radial { .. } => "radial",
            Task::Planar { .. } => "planar",
            Task::SweepT { .. } => "sweep-t",
            Task::Geodesic { .. } => "geodesic",
            Task::MtScan { .. } => "mt-scan",
            Task::Bounds { .. } => "bounds",
            Task::Lambda1 { .. } => "lambda1",
            Task::Uniqueness { .. } => "uniqueness",
        }
    }

    /// Names of this mode's manifest acceptance flags.
    fn flag_names(&self) -> &'static [&'static str] {
        match self {
            Task::Radial { .. } | Task::Planar { .. } => &["converged", "fMonotone"],
            Task::SweepT { .. } => &["anyConverged"],
            Task::Geodesic { .. } => &["endpointsExact", "energyAffine", "fConcave"],
            Task::MtScan { .. } => &["allHold", "fittedConstantFinite"],
            Task::Bounds { .. } => &["allFinite"],
            Task::Lambda1 { .. } => &["positive"],
            Task::Uniqueness { .. } => &["passes"],
        }
    }

    fn tolerances(&self) -> Value {
        let mut map = serde_json::Map::new();
        map.insert("linearResidual".to_string(), json!(RESIDUAL_TOLERANCE));
        map.insert("eigen".to_string(), json!(EIGEN_TOLERANCE));
        match self {
            Task::Radial { tol, .. }
            | Task::Planar { tol, .. }
            | Task::SweepT { tol, .. }
            | Task::Uniqueness { tol, .. } => {
                map.insert("solver".to_string(), json!(tol));
            }
            Task::Lambda1 { source: Lambda1Source::Solve { tol, .. }, .. } => {
                map.insert("solver".to_string(), json!(tol));
            }
            _ => {}
        }
        Value::Object(map)
    }
}

/// Failure of a run, carrying the process exit code.
#[derive(Debug)]
pub enum AppError {
    Config(String),
    Solver(SolverError),
    Io { context: String, source: std::io::Error },
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Config(msg) => write!(f, "invalid configuration: {msg}"),
            AppError::Solver(err) => write!(f, "{err}"),
            AppError::Io { context, source } => write!(f, "{context}: {source}"),
        }
    }
}

impl From<SolverError> for AppError {
    fn from(err: SolverError) -> Self {
        AppError::Solver(err)
    }
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) => 2,
            AppError::Io { .. } => 5,
            AppError::Solver(err) => match err {
                SolverError::InvalidInput { .. }
                | SolverError::InvalidDomain { .. }
                | SolverError::GridMismatch { .. } => 2,
                SolverError::Diverged { .. } => 3,
                SolverError::SolverStall { .. } => 4,
                _ => 1,
            },
        }
    }
}

fn read_file(path: &Path) -> Result<String, AppError> {
    fs::read_to_string(path).map_err(|source| AppError::Io {
        context: format!("reading {}", path.display()),
        source,
    })
}

struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    fn create(root: &Path) -> Result<Self, AppError> {
        fs::create_dir_all(root).map_err(|source| AppError::Io {
            context: format!("creating output directory {}", root.display()),
            source,
        })?;
        Ok(OutputDir { root: root.to_path_buf(), written: Vec::new() })
    }

    fn write(&mut self, name: &str, content: &str) -> Result<(), AppError> {
        let path = self.root.join(name);
        fs::write(&path, content).map_err(|source| AppError::Io {
            context: format!("writing {}", path.display()),
            source,
        })?;
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_string());
        }
        Ok(())
    }
}

fn manifest_value(
    task: &Task,
    config_echo: &Value,
    status: &str,
    flags: &Value,
    summary: &Value,
    wall_time: Option<f64>,
    error: Option<&str>,
    outputs: &[String],
) -> Value {
    json!({
        "artifactVersion": env!("CARGO_PKG_VERSION"),
        "status": status,
        "mode": task.mode(),
        "config": config_echo,
        "tolerances": task.tolerances(),
        "acceptance": flags,
        "summary": summary,
        "wallTimeSeconds": wall_time,
        "error": error,
        "outputs": outputs,
    })
}

fn default_flags(task: &Task) -> Value {
    let mut map = serde_json::Map::new();
    for name in task.flag_names() {
        map.insert((*name).to_string(), json!(false));
    }
    Value::Object(map)
}

fn to_json(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON serialization cannot fail");
    text.push('\n');
    text
}

/// Run the task, writing every artifact and the manifest into `out_root`.
/// The manifest exists from before the first solve step; on failure it is
/// finalized with status "failed" and the error string before returning.
pub fn execute(task: &Task, config_echo: &Value, out_root: &Path) -> Result<(), AppError> {
    let mut out = OutputDir::create(out_root)?;
    let start = Instant::now();
    out.write(
        "manifest.json",
        &to_json(&manifest_value(
            task,
            config_echo,
            "running",
            &default_flags(task),
            &Value::Null,
            None,
            None,
            &out.written,
        )),
    )?;
    let result = run_task(task, &mut out);
    let wall = start.elapsed().as_secs_f64();
    match result {
        Ok((flags, summary)) => {
            let manifest = manifest_value(
                task,
                config_echo,
                "ok",
                &flags,
                &summary,
                Some(wall),
                None,
                &out.written,
            );
            out.write("manifest.json", &to_json(&manifest))?;
            Ok(())
        }
        Err(err) => {
            let manifest = manifest_value(
                task,
                config_echo,
                "failed",
                &default_flags(task),
                &Value::Null,
                Some(wall),
                Some(&err.to_string()),
                &out.written,
            );
            // Best effort: the original error outranks a manifest write error.
            let _ = out.write("manifest.json", &to_json(&manifest));
            Err(err)
        }
    }
}

fn run_task(task: &Task, out: &mut OutputDir) -> Result<(Value, Value), AppError> {
    match task {
        Task::Radial { n, radius, t, grid, tol, max_iter, phi0 } => {
            let initial = match phi0 {
                Phi0::File(path) => potential_from_csv(&read_file(path)?, *n)?,
                _ => {
                    let g = Arc::new(RadialGrid::uniform(*n, *radius, *grid)?);
                    match phi0 {
                        Phi0::Zero => RadialPotential::zero(g),
                        Phi0::Paraboloid => RadialPotential::paraboloid(g),
                        Phi0::File(_) => unreachable!(),
                    }
                }
            };
            let (phi, trace) = ricci_iterate(&initial, *t, *tol, *max_iter)?;
            let summary = summarize(&phi, *t, &trace)?;
            out.write("solution.csv", &potential_to_csv(&phi))?;
            out.write("trace.csv", &trace_to_csv(&trace))?;
            out.write("summary.json", &to_json(&serde_json::to_value(&summary).unwrap()))?;
            out.write(
                "phi_vs_r.svg",
                &render_plot(
                    "phi vs r",
                    &[Series {
                        name: "phi".to_string(),
                        xs: phi.grid().nodes().to_vec(),
                        ys: phi.values().to_vec(),
                    }],
                ),
            )?;
            out.write("f_vs_j.svg", &render_plot("F vs iteration", &[trace_series(&trace)]))?;
            let flags = json!({
                "converged": trace.converged,
                "fMonotone": trace.f_monotone_within(1.0e-10),
            });
            Ok((flags, serde_json::to_value(&summary).unwrap()))
        }
        Task::Planar { domain, t, grid, tol, max_iter } => {
            let dom = PlanarDomain::build(domain.clone(), *grid)?;
            let (phi, trace) = liouville_iterate(&dom, *t, *tol, *max_iter)?;
            let summary = json!({
                "converged": trace.converged,
                "iterations": trace.iterations,
                "finalE": planar_energy(&phi)?,
                "finalF": planar_f_value(&phi, *t)?,
                "area": dom.area(),
                "interiorNodes": dom.interior_count(),
            });
            out.write("solution.csv", &field_to_csv(&phi))?;
            out.write("trace.csv", &trace_to_csv(&trace))?;
            out.write("summary.json", &to_json(&summary))?;
            out.write("f_vs_j.svg", &render_plot("F vs iteration", &[trace_series(&trace)]))?;
            let flags = json!({
                "converged": trace.converged,
                "fMonotone": trace.f_monotone_within(1.0e-9),
            });
            Ok((flags, summary))
        }
        Task::SweepT { n, radius, grid, t_grid, tol, max_iter, threads } => {
            let entries = t_sweep(*n, *radius, *grid, t_grid, *tol, *max_iter, *threads)?;
            let t_max = sweep_t_max(&entries);
            out.write("sweep.csv", &sweep_to_csv(&entries))?;
            let summary = json!({
                "entries": entries.len(),
                "converged": entries.iter().filter(|e| e.converged).count(),
                "tMaxIfSweep": t_max,
            });
            out.write("summary.json", &to_json(&summary))?;
            out.write(
                "f_vs_t.svg",
                &render_plot(
                    "F vs t",
                    &[Series {
                        name: "F".to_string(),
                        xs: entries.iter().map(|e| e.t).collect(),
                        ys: entries.iter().map(|e| e.f).collect(),
                    }],
                ),
            )?;
            let flags = json!({ "anyConverged": t_max.is_some() });
            Ok((flags, summary))
        }
        Task::Geodesic { n, from, to, segments, s_nodes } => {
            let phi0 = potential_from_csv(&read_file(from)?, *n)?;
            let phi1 = potential_from_csv(&read_file(to)?, *n)?;
            let path = geodesic_path(&phi0, &phi1, *segments, *s_nodes)?;
            let affine = check_energy_affine(&path);
            let concave = check_f_concave(&path)?;
            let endpoints_exact = path.samples.first().unwrap().sup_diff(&path.u0)? == 0.0
                && path.samples.last().unwrap().sup_diff(&path.u1)? == 0.0;
            out.write("path.csv", &path_to_csv(&path))?;
            let energies: Vec<f64> = path.samples.iter().map(|u| u.energy()).collect();
            let f_values: Vec<f64> = path.samples.iter().map(|u| u.f_value()).collect();
            let summary = json!({
                "segments": segments,
                "sNodes": s_nodes,
                "endpointsExact": endpoints_exact,
                "energyAffine": serde_json::to_value(&affine).unwrap(),
                "fConcave": serde_json::to_value(&concave).unwrap(),
            });
            out.write("summary.json", &to_json(&summary))?;
            let chord: Vec<f64> = path
                .ts
                .iter()
                .map(|t| (1.0 - t) * energies[0] + t * energies[energies.len() - 1])
                .collect();
            out.write(
                "energy_vs_t.svg",
                &render_plot(
                    "E along the path",
                    &[
                        Series { name: "E".to_string(), xs: path.ts.clone(), ys: energies },
                        Series { name: "chord".to_string(), xs: path.ts.clone(), ys: chord },
                    ],
                ),
            )?;
            out.write(
                "f_vs_t.svg",
                &render_plot(
                    "F along the path",
                    &[Series { name: "F".to_string(), xs: path.ts.clone(), ys: f_values }],
                ),
            )?;
            let flags = json!({
                "endpointsExact": endpoints_exact,
                "energyAffine": affine.holds,
                "fConcave": concave.holds,
            });
            Ok((flags, summary))
        }
        Task::MtScan { n, radius, grid, families, beta, s_max, steps } => {
            if *steps < 2 {
                return Err(AppError::Config("mt-scan needs at least 2 steps".to_string()));
            }
            let g = Arc::new(RadialGrid::uniform(*n, *radius, *grid)?);
            let mut members: Vec<(String, RadialPotential)> = Vec::new();
            for family in families {
                let base = match family {
                    Family::Unif => RadialPotential::paraboloid(g.clone()),
                    Family::Star => RadialPotential::fubini_study(g.clone()),
                };
                for i in 0..*steps {
                    let s = s_max * i as f64 / (*steps - 1) as f64;
                    members.push((format!("{}", family.name()), base.scaled(s)?));
                }
            }
            // First pass fits the constant; the verdicts use the family-wide fit.
            let mut fitted = f64::NEG_INFINITY;
            for (_, phi) in &members {
                let v = mt_check(phi, *beta, None)?;
                fitted = fitted.max(v.fitted_constant.expect("fitting mode returns a constant"));
            }
            let mut rows = String::from("family,s,lhs,rhs,slack,holds\n");
            let mut all_hold = true;
            let mut scan_series: Vec<Series> = Vec::new();
            let mut xs: Vec<f64> = Vec::new();
            let mut lhs_ys: Vec<f64> = Vec::new();
            let mut rhs_ys: Vec<f64> = Vec::new();
            for (i, (name, phi)) in members.iter().enumerate() {
                let s = s_max * (i % steps) as f64 / (*steps - 1) as f64;
                let v = mt_check(phi, *beta, Some(fitted))?;
                all_hold &= v.holds;
                rows.push_str(&format!(
                    "{},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
                    name, s, v.lhs, v.rhs, v.slack, v.holds
                ));
                xs.push(s);
                lhs_ys.push(v.lhs);
                rhs_ys.push(v.rhs);
                if (i + 1) % steps == 0 {
                    scan_series.push(Series {
                        name: format!("{name} lhs"),
                        xs: xs.clone(),
                        ys: lhs_ys.clone(),
                    });
                    scan_series.push(Series {
                        name: format!("{name} rhs"),
                        xs: std::mem::take(&mut xs),
                        ys: std::mem::take(&mut rhs_ys),
                    });
                    lhs_ys.clear();
                }
            }
            out.write("mt.csv", &rows)?;
            out.write("mt_scan.svg", &render_plot("Moser-Trudinger scan", &scan_series))?;
            let summary = json!({
                "beta": beta,
                "fittedConstant": fitted,
                "allHold": all_hold,
                "members": members.len(),
            });
            out.write("summary.json", &to_json(&summary))?;
            let flags = json!({
                "allHold": all_hold,
                "fittedConstantFinite": fitted.is_finite(),
            });
            Ok((flags, summary))
        }
        Task::Bounds { n } => {
            let bishop = bishop_bound(*n)?;
            let mt = mt_solvable_bound(*n)?;
            let beta = beta_default(*n);
            let summary = json!({
                "n": n,
                "bishop": bishop,
                "mtBound": mt,
                "betaDefault": beta,
            });
            out.write("summary.json", &to_json(&summary))?;
            let flags =
                json!({ "allFinite": bishop.is_finite() && mt.is_finite() && beta.is_finite() });
            Ok((flags, summary))
        }
        Task::Lambda1 { domain, grid, source } => {
            let dom = PlanarDomain::build(domain.clone(), *grid)?;
            let (phi, solve_summary) = match source {
                Lambda1Source::File(path) => {
                    let phi = field_from_csv(&read_file(path)?, &dom)?;
                    (phi, Value::Null)
                }
                Lambda1Source::Solve { t, tol, max_iter } => {
                    let (phi, trace) = liouville_iterate(&dom, *t, *tol, *max_iter)?;
                    let info = json!({ "converged": trace.converged, "iterations": trace.iterations });
                    (phi, info)
                }
            };
            let lambda = lambda1(&phi)?;
            let summary = json!({
                "lambda1": lambda,
                "gridSize": grid,
                "solve": solve_summary,
            });
            out.write("summary.json", &to_json(&summary))?;
            let flags = json!({ "positive": lambda > 0.0 });
            Ok((flags, summary))
        }
        Task::Uniqueness { n, radius, grid, starts, tol, max_iter } => {
            let g = Arc::new(RadialGrid::uniform(*n, *radius, *grid)?);
            let potentials: Result<Vec<RadialPotential>, SolverError> = starts
                .iter()
                .map(|start| match start {
                    Start::Zero => Ok(RadialPotential::zero(g.clone())),
                    Start::Paraboloid(s) => RadialPotential::paraboloid(g.clone()).scaled(*s),
                    Start::Fubini(s) => RadialPotential::fubini_study(g.clone()).scaled(*s),
                })
                .collect();
            let report = uniqueness_experiment(&potentials?, *tol, *max_iter)?;
            let summary = serde_json::to_value(&report).unwrap();
            out.write("summary.json", &to_json(&summary))?;
            let flags = json!({ "passes": report.passes });
            Ok((flags, summary))
        }
    }
}

fn trace_series(trace: &cma_core::IterationTrace) -> Series {
    Series {
        name: "F".to_string(),
        xs: trace.steps.iter().map(|s| s.index as f64).collect(),
        ys: trace.steps.iter().map(|s| s.f).collect(),
    }
}
