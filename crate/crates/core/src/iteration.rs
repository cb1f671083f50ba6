//! Inverse-iteration driver for the Monge-Ampere fixed-point problem: the
//! step phi -> ma_solve_dirichlet(density_to_mass(phi, t)), its trace
//! bookkeeping, breakdown detection, and sweeps over the parameter t.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::SolverError;
use crate::functionals::{energy, f_value};
use crate::radial::{density_to_mass, ma_apply, ma_solve_dirichlet, RadialGrid, RadialPotential};

/// Consecutive steps of growing sup-difference before a run is declared
/// divergent.
pub const DIVERGENCE_WINDOW: usize = 20;

/// Cap on |E| beyond which a run is declared divergent.
pub const ENERGY_BLOWUP_CAP: f64 = 1.0e3;

/// Largest admissible exponent parameter t.
pub const DEFAULT_T_CAP: f64 = 32.0;

/// One record of the iteration trace. `sup_diff` and `residual` compare the
/// iterate at `index` with its successor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub index: usize,
    pub e: f64,
    pub f: f64,
    pub sup_diff: f64,
    pub residual: f64,
}

/// Full trace of one run: per-step records, the convergence flag, and the
/// run-level bound c0 with -c0 <= phi_j <= 0 for every iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub steps: Vec<TraceStep>,
    pub converged: bool,
    pub iterations: usize,
    pub c0: f64,
}

impl IterationTrace {
    /// True when every consecutive pair satisfies f_{j+1} >= f_j - slack.
    pub fn f_monotone_within(&self, slack: f64) -> bool {
        self.steps.windows(2).all(|w| w[1].f >= w[0].f - slack)
    }
}

/// JSON summary of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub converged: bool,
    pub iterations: usize,
    #[serde(rename = "finalE")]
    pub final_e: f64,
    #[serde(rename = "finalF")]
    pub final_f: f64,
    #[serde(rename = "tMaxIfSweep", default, skip_serializing_if = "Option::is_none")]
    pub t_max_if_sweep: Option<f64>,
}

/// Summary of the returned potential of a run; E and F are evaluated on the
/// final iterate, which the trace itself does not record.
pub fn summarize(
    phi: &RadialPotential,
    t: f64,
    trace: &IterationTrace,
) -> Result<RunSummary, SolverError> {
    Ok(RunSummary {
        converged: trace.converged,
        iterations: trace.iterations,
        final_e: energy(phi)?,
        final_f: f_value(phi, t)?,
        t_max_if_sweep: None,
    })
}

pub(crate) fn check_t(t: f64) -> Result<(), SolverError> {
    if !(t.is_finite() && (0.0..=DEFAULT_T_CAP).contains(&t)) {
        return Err(SolverError::invalid_input(format!(
            "parameter t must lie in [0, {DEFAULT_T_CAP}], got {t}"
        )));
    }
    Ok(())
}

/// One inverse-iteration step: solve (dd^c psi)^n = e^{-t phi} mu / Z for psi.
pub fn ricci_step(phi: &RadialPotential, t: f64) -> Result<RadialPotential, SolverError> {
    check_t(t)?;
    ma_solve_dirichlet(&density_to_mass(phi, t)?)
}

/// Iterate the step from `phi0` until sup|phi_{j+1} - phi_j| <= tol or
/// `max_iter` applications are exhausted.
///
/// A run is `Diverged` when the sup-difference grows for `DIVERGENCE_WINDOW`
/// consecutive steps or |E| exceeds `ENERGY_BLOWUP_CAP` — the signature of a
/// parameter t beyond the solvable range.
pub fn ricci_iterate(
    phi0: &RadialPotential,
    t: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(RadialPotential, IterationTrace), SolverError> {
    check_t(t)?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(SolverError::invalid_input(format!("tolerance must be positive, got {tol}")));
    }
    if max_iter == 0 {
        return Err(SolverError::invalid_input("max_iter must be at least 1"));
    }
    let mut current = phi0.clone();
    let mut c0 = current.sup_norm();
    let mut steps: Vec<TraceStep> = Vec::new();
    let mut grow_streak = 0usize;
    let mut prev_sup = f64::INFINITY;
    let mut converged = false;
    for index in 0..max_iter {
        let e = energy(&current)?;
        let f = f_value(&current, t)?;
        if e.abs() > ENERGY_BLOWUP_CAP {
            return Err(SolverError::Diverged {
                iterations: index,
                reason: format!("|E| = {:.3e} exceeded the blowup cap {ENERGY_BLOWUP_CAP:.0e}", e.abs()),
            });
        }
        let mass = density_to_mass(&current, t)?;
        let next = ma_solve_dirichlet(&mass)?;
        let sup_diff = next.sup_diff(&current)?;
        let residual = ma_apply(&next)?.sup_diff(&mass)?;
        steps.push(TraceStep { index, e, f, sup_diff, residual });
        c0 = c0.max(next.sup_norm());
        if sup_diff > prev_sup {
            grow_streak += 1;
            if grow_streak >= DIVERGENCE_WINDOW {
                return Err(SolverError::Diverged {
                    iterations: index + 1,
                    reason: format!(
                        "sup-difference grew for {DIVERGENCE_WINDOW} consecutive steps, last {sup_diff:.3e}"
                    ),
                });
            }
        } else {
            grow_streak = 0;
        }
        prev_sup = sup_diff;
        current = next;
        if sup_diff <= tol {
            converged = true;
            break;
        }
    }
    let iterations = steps.len();
    Ok((current, IterationTrace { steps, converged, iterations, c0 }))
}

/// Outcome of one sweep member; a failed run records converged = false with
/// NaN functionals rather than aborting the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub t: f64,
    pub converged: bool,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "F")]
    pub f: f64,
}

/// Run the iteration from the zero potential for every t in `t_grid`
/// (strictly increasing), fanning the independent runs out over `threads`
/// workers; results are ordered by t regardless of scheduling.
pub fn t_sweep(
    n: usize,
    radius: f64,
    node_count: usize,
    t_grid: &[f64],
    tol: f64,
    max_iter: usize,
    threads: usize,
) -> Result<Vec<SweepEntry>, SolverError> {
    if t_grid.is_empty() {
        return Err(SolverError::invalid_input("t grid must not be empty"));
    }
    for w in t_grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(SolverError::invalid_input("t grid must be strictly increasing"));
        }
    }
    for &t in t_grid {
        check_t(t)?;
    }
    if threads == 0 {
        return Err(SolverError::invalid_input("thread count must be at least 1"));
    }
    let grid = Arc::new(RadialGrid::uniform(n, radius, node_count)?);
    let run_one = |&t: &f64| -> SweepEntry {
        let phi0 = RadialPotential::zero(grid.clone());
        match ricci_iterate(&phi0, t, tol, max_iter) {
            Ok((phi, trace)) => {
                let e = energy(&phi).unwrap_or(f64::NAN);
                let f = f_value(&phi, t).unwrap_or(f64::NAN);
                SweepEntry { t, converged: trace.converged, e, f }
            }
            Err(_) => SweepEntry { t, converged: false, e: f64::NAN, f: f64::NAN },
        }
    };
    if threads == 1 {
        return Ok(t_grid.iter().map(run_one).collect());
    }
    let mut entries: Vec<Option<SweepEntry>> = vec![None; t_grid.len()];
    std::thread::scope(|scope| {
        let mut slots: Vec<&mut [Option<SweepEntry>]> = Vec::new();
        let mut rest = entries.as_mut_slice();
        while !rest.is_empty() {
            let take = rest.len().min(t_grid.len().div_ceil(threads));
            let (head, tail) = rest.split_at_mut(take);
            slots.push(head);
            rest = tail;
        }
        let mut offset = 0;
        for chunk in slots {
            let ts = &t_grid[offset..offset + chunk.len()];
            offset += chunk.len();
            let run_one = &run_one;
            scope.spawn(move || {
                for (slot, t) in chunk.iter_mut().zip(ts) {
                    *slot = Some(run_one(t));
                }
            });
        }
    });
    Ok(entries.into_iter().map(|e| e.expect("every sweep slot is filled")).collect())
}

/// Largest t whose run converged, if any.
pub fn sweep_t_max(entries: &[SweepEntry]) -> Option<f64> {
    entries.iter().filter(|e| e.converged).map(|e| e.t).fold(None, |acc, t| {
        Some(acc.map_or(t, |a: f64| a.max(t)))
    })
}
