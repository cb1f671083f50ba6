//! JSON run configuration: one file drives any mode, with mode-specific
//! fields validated up front.

use std::path::PathBuf;

use cma_core::DomainSpec;
use serde::{Deserialize, Serialize};

use crate::app::{Family, Lambda1Source, Phi0, Start, Task};

pub const DEFAULT_RADIAL_NODES: usize = 2049;
pub const DEFAULT_PLANAR_GRID: usize = 64;
pub const DEFAULT_TOL: f64 = 1.0e-8;
pub const DEFAULT_MAX_ITER: usize = 400;

/// Single-file run description; unknown keys are rejected.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct RunConfig {
    pub mode: String,
    pub n: Option<usize>,
    #[serde(rename = "R")]
    pub r: Option<f64>,
    pub domain: Option<DomainSpec>,
    pub grid_size: Option<usize>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub t: Option<f64>,
    pub t_grid: Option<Vec<f64>>,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub steps: Option<usize>,
    pub phi0: Option<String>,
    pub output_dir: Option<PathBuf>,
    pub thread_count: Option<usize>,
    pub from: Option<PathBuf>,
    pub to: Option<PathBuf>,
    pub samples: Option<usize>,
    pub s_nodes: Option<usize>,
    pub family: Option<String>,
    pub beta: Option<f64>,
    pub s_max: Option<f64>,
    pub solution: Option<PathBuf>,
    pub starts: Option<String>,
}

fn missing(mode: &str, field: &str) -> String {
    format!("mode {mode:?} requires the field {field:?}")
}

pub fn parse_phi0(text: &str) -> Phi0 {
    match text {
        "zero" => Phi0::Zero,
        "paraboloid" => Phi0::Paraboloid,
        path => Phi0::File(PathBuf::from(path)),
    }
}

pub fn parse_families(text: &str) -> Result<Vec<Family>, String> {
    let mut out = Vec::new();
    for token in text.split(',') {
        match token.trim() {
            "unif" => out.push(Family::Unif),
            "star" => out.push(Family::Star),
            other => return Err(format!("unknown family {other:?}; expected unif or star")),
        }
    }
    if out.is_empty() {
        return Err("family list must not be empty".to_string());
    }
    Ok(out)
}

pub fn parse_starts(text: &str) -> Result<Vec<Start>, String> {
    let mut out = Vec::new();
    for token in text.split(',') {
        let token = token.trim();
        let (name, scale) = match token.split_once('*') {
            Some((name, s)) => {
                let scale: f64 = s
                    .trim()
                    .parse()
                    .map_err(|_| format!("unparsable scale in start {token:?}"))?;
                (name.trim(), scale)
            }
            None => (token, 1.0),
        };
        match name {
            "zero" => out.push(Start::Zero),
            "paraboloid" => out.push(Start::Paraboloid(scale)),
            "fubini" => out.push(Start::Fubini(scale)),
            other => {
                return Err(format!(
                    "unknown start {other:?}; expected zero, paraboloid[*s], or fubini[*s]"
                ))
            }
        }
    }
    if out.is_empty() {
        return Err("start list must not be empty".to_string());
    }
    Ok(out)
}

/// Evenly spaced t grid from [t_min, t_max] with `steps` points.
pub fn linear_t_grid(t_min: f64, t_max: f64, steps: usize) -> Result<Vec<f64>, String> {
    if steps == 0 {
        return Err("steps must be at least 1".to_string());
    }
    if steps == 1 {
        return Ok(vec![t_min]);
    }
    if !(t_max > t_min) {
        return Err(format!("tMax = {t_max} must exceed tMin = {t_min}"));
    }
    Ok((0..steps)
        .map(|i| {
            if i == steps - 1 {
                t_max
            } else {
                t_min + (t_max - t_min) * i as f64 / (steps - 1) as f64
            }
        })
        .collect())
}

impl RunConfig {
    /// Validate and lower into an executable task.
    pub fn to_task(&self) -> Result<Task, String> {
        let mode = self.mode.as_str();
        let n = self.n.unwrap_or(1);
        let tol = self.tol.unwrap_or(DEFAULT_TOL);
        let max_iter = self.max_iter.unwrap_or(DEFAULT_MAX_ITER);
        match mode {
            "radial" => Ok(Task::Radial {
                n,
                radius: self.r.ok_or_else(|| missing(mode, "R"))?,
                t: self.t.unwrap_or(1.0),
                grid: self.grid_size.unwrap_or(DEFAULT_RADIAL_NODES),
                tol,
                max_iter,
                phi0: parse_phi0(self.phi0.as_deref().unwrap_or("zero")),
            }),
            "planar" => Ok(Task::Planar {
                domain: self.domain.clone().ok_or_else(|| missing(mode, "domain"))?,
                t: self.t.unwrap_or(1.0),
                grid: self.grid_size.unwrap_or(DEFAULT_PLANAR_GRID),
                tol,
                max_iter,
            }),
            "sweep-t" => {
                let t_grid = match &self.t_grid {
                    Some(grid) => grid.clone(),
                    None => {
                        let t_min = self.t_min.ok_or_else(|| missing(mode, "tGrid or tMin"))?;
                        let t_max = self.t_max.ok_or_else(|| missing(mode, "tGrid or tMax"))?;
                        let steps = self.steps.ok_or_else(|| missing(mode, "tGrid or steps"))?;
                        linear_t_grid(t_min, t_max, steps)?
                    }
                };
                Ok(Task::SweepT {
                    n,
                    radius: self.r.ok_or_else(|| missing(mode, "R"))?,
                    grid: self.grid_size.unwrap_or(513),
                    t_grid,
                    tol,
                    max_iter,
                    threads: self.thread_count.unwrap_or(1),
                })
            }
            "geodesic" => Ok(Task::Geodesic {
                n,
                from: self.from.clone().ok_or_else(|| missing(mode, "from"))?,
                to: self.to.clone().ok_or_else(|| missing(mode, "to"))?,
                segments: self.samples.unwrap_or(16),
                s_nodes: self.s_nodes.unwrap_or(1024),
            }),
            "mt-scan" => Ok(Task::MtScan {
                n,
                radius: self.r.ok_or_else(|| missing(mode, "R"))?,
                grid: self.grid_size.unwrap_or(DEFAULT_RADIAL_NODES),
                families: parse_families(self.family.as_deref().unwrap_or("unif,star"))?,
                beta: self.beta.unwrap_or(0.9),
                s_max: self.s_max.unwrap_or(8.0),
                steps: self.steps.unwrap_or(17),
            }),
            "bounds" => Ok(Task::Bounds { n }),
            "lambda1" => {
                let domain = self.domain.clone().ok_or_else(|| missing(mode, "domain"))?;
                let grid = self.grid_size.unwrap_or(DEFAULT_PLANAR_GRID);
                let source = match &self.solution {
                    Some(path) => Lambda1Source::File(path.clone()),
                    None => Lambda1Source::Solve { t: self.t.unwrap_or(1.0), tol, max_iter },
                };
                Ok(Task::Lambda1 { domain, grid, source })
            }
            "uniqueness" => Ok(Task::Uniqueness {
                n,
                radius: self.r.ok_or_else(|| missing(mode, "R"))?,
                grid: self.grid_size.unwrap_or(513),
                starts: parse_starts(
                    self.starts.as_deref().unwrap_or("zero,paraboloid,paraboloid*0.5"),
                )?,
                tol: self.tol.unwrap_or(1.0e-6),
                max_iter: self.max_iter.unwrap_or(600),
            }),
            other => Err(format!(
                "unknown mode {other:?}; expected radial, planar, sweep-t, geodesic, mt-scan, bounds, lambda1, or uniqueness"
            )),
        }
    }
}
