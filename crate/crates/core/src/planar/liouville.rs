//! Inverse iteration for the planar Liouville problem
//! lap phi = 2 pi e^{-t phi} / int e^{-t phi} dA with zero boundary data,
//! sharing the trace bookkeeping of the radial driver.

use std::sync::Arc;

use crate::error::SolverError;
use crate::iteration::{check_t, IterationTrace, TraceStep, DIVERGENCE_WINDOW, ENERGY_BLOWUP_CAP};
use crate::planar::domain::{GridPotential2D, PlanarDomain};
use crate::planar::poisson::{laplacian_apply, solve_values};
use crate::radial::EXPONENT_CAP;

/// Energy of a planar potential: E = (1/2) int phi (lap phi / 2 pi) dA.
pub fn planar_energy(phi: &GridPotential2D) -> Result<f64, SolverError> {
    let lap = laplacian_apply(phi.domain(), phi.values())?;
    let integrand: Vec<f64> =
        phi.values().iter().zip(&lap).map(|(v, l)| v * l).collect();
    let total = phi.domain().integrate(&integrand, 0.0)?;
    Ok(total / (4.0 * std::f64::consts::PI))
}

/// Shifted Boltzmann weights e^{-t(phi - min phi)} and the raw integral
/// int e^{-t phi} dA split as (weights, boundary weight value, shift).
fn boltzmann_weights(phi: &GridPotential2D, t: f64) -> Result<(Vec<f64>, f64, f64), SolverError> {
    let shift = phi.values().iter().cloned().fold(0.0_f64, f64::min);
    let spread = phi
        .values()
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v - shift));
    if t * spread > EXPONENT_CAP {
        return Err(SolverError::OverflowRisk { exponent: t * spread, cap: EXPONENT_CAP });
    }
    let weights: Vec<f64> = phi.values().iter().map(|v| (-t * (v - shift)).exp()).collect();
    let boundary = (t * shift).exp();
    Ok((weights, boundary, shift))
}

/// log of int e^{-t phi} dmu with mu the normalized area measure.
pub fn planar_log_int_exp(phi: &GridPotential2D, t: f64) -> Result<f64, SolverError> {
    check_t(t)?;
    let (weights, boundary, shift) = boltzmann_weights(phi, t)?;
    let raw = phi.domain().integrate(&weights, boundary)?;
    Ok(-t * shift + (raw / phi.domain().area()).ln())
}

/// F_t = E + (1/t) log int e^{-t phi} dmu, with the t = 0 limit
/// E - int phi dmu.
pub fn planar_f_value(phi: &GridPotential2D, t: f64) -> Result<f64, SolverError> {
    check_t(t)?;
    let e = planar_energy(phi)?;
    if t == 0.0 {
        let mean = phi.domain().integrate(phi.values(), 0.0)? / phi.domain().area();
        return Ok(e - mean);
    }
    Ok(e + planar_log_int_exp(phi, t)? / t)
}

/// Iterate phi -> lap^{-1}(2 pi e^{-t phi} / int e^{-t phi} dA) from the zero
/// potential until sup|phi_{j+1} - phi_j| <= tol or `max_iter` applications
/// are exhausted. Breakdown reporting matches the radial driver.
pub fn liouville_iterate(
    domain: &Arc<PlanarDomain>,
    t: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(GridPotential2D, IterationTrace), SolverError> {
    check_t(t)?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(SolverError::invalid_input(format!("tolerance must be positive, got {tol}")));
    }
    if max_iter == 0 {
        return Err(SolverError::invalid_input("max_iter must be at least 1"));
    }
    let mut current = GridPotential2D::zero(domain.clone());
    let mut c0 = 0.0_f64;
    let mut steps: Vec<TraceStep> = Vec::new();
    let mut grow_streak = 0usize;
    let mut prev_sup = f64::INFINITY;
    let mut converged = false;
    for index in 0..max_iter {
        let e = planar_energy(&current)?;
        let f = planar_f_value(&current, t)?;
        if e.abs() > ENERGY_BLOWUP_CAP {
            return Err(SolverError::Diverged {
                iterations: index,
                reason: format!("|E| = {:.3e} exceeded the blowup cap {ENERGY_BLOWUP_CAP:.0e}", e.abs()),
            });
        }
        let (weights, boundary, _) = boltzmann_weights(&current, t)?;
        let raw = domain.integrate(&weights, boundary)?;
        let source: Vec<f64> =
            weights.iter().map(|w| 2.0 * std::f64::consts::PI * w / raw).collect();
        let mut next_values = solve_values(domain, &source, Some(current.values()))?;
        // The discrete maximum principle keeps the solution nonpositive;
        // clamp roundoff-level positives so the invariant is exact.
        for v in &mut next_values {
            *v = v.min(0.0);
        }
        let next = GridPotential2D::new(domain.clone(), next_values)?;
        let sup_diff = next.sup_diff(&current)?;
        let lap = laplacian_apply(domain, next.values())?;
        let residual = lap
            .iter()
            .zip(&source)
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()));
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
