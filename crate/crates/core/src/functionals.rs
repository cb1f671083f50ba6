//! Variational quantities attached to radial potentials: the energy E, the
//! functional F = E + log int e^{-phi} dmu, relative entropy, and the
//! Moser-Trudinger / capacity inequality checks with their closed-form
//! constants.

use serde::{Deserialize, Serialize};

use crate::error::SolverError;
use crate::radial::{check_same_grid, integrate_dmu, ma_apply, RadialGrid, RadialPotential};

/// Energy, log-integral and their sum for one potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "logIntExp")]
    pub log_int_exp: f64,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feasible: Option<bool>,
}

/// Outcome of one inequality check: lhs <= rhs up to a scale-aware tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityVerdict {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
    #[serde(
        rename = "fittedConstant",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub fitted_constant: Option<f64>,
}

impl InequalityVerdict {
    fn from_sides(lhs: f64, rhs: f64, fitted_constant: Option<f64>) -> Self {
        let slack = rhs - lhs;
        InequalityVerdict {
            lhs,
            rhs,
            slack,
            holds: slack >= -slack_tolerance(lhs, rhs),
            fitted_constant,
        }
    }
}

/// Scale-aware tolerance used by every inequality verdict.
pub fn slack_tolerance(lhs: f64, rhs: f64) -> f64 {
    1.0e-9 * (1.0 + lhs.abs() + rhs.abs())
}

/// Mean of a nodal function against mu, with the discrete measure normalised
/// so that constants integrate exactly to themselves.
fn average_dmu(grid: &RadialGrid, g: &[f64]) -> f64 {
    let ones = vec![1.0; grid.len()];
    integrate_dmu(grid, g) / integrate_dmu(grid, &ones)
}

/// Energy E(phi) = (1/(n+1)) int phi (dd^c phi)^n, evaluated as the Stieltjes
/// integral (1/(n+1)) int phi dM over the cumulative mass M of phi.
pub fn energy(phi: &RadialPotential) -> Result<f64, SolverError> {
    let mass = ma_apply(phi)?;
    let v = phi.values();
    let m = mass.values();
    let mut acc = 0.0;
    for i in 1..v.len() {
        acc += 0.5 * (v[i] + v[i - 1]) * (m[i] - m[i - 1]);
    }
    Ok(acc / (phi.grid().n() + 1) as f64)
}

/// log int e^{-t phi} dmu with the exponent shifted by min phi so all
/// exponentials stay in (0, 1].
pub fn log_int_exp(phi: &RadialPotential, t: f64) -> Result<f64, SolverError> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(SolverError::invalid_input(format!(
            "exponent parameter t must be nonnegative, got {t}"
        )));
    }
    let shift = phi.min_value();
    let spread = t * (0.0 - shift);
    if spread > crate::radial::EXPONENT_CAP {
        return Err(SolverError::OverflowRisk {
            exponent: spread,
            cap: crate::radial::EXPONENT_CAP,
        });
    }
    let grid = phi.grid();
    let w: Vec<f64> = phi.values().iter().map(|&v| (-t * (v - shift)).exp()).collect();
    Ok(-t * shift + average_dmu(grid, &w).ln())
}

/// Full report for F(phi) = E(phi) + log int e^{-phi} dmu.
pub fn f_functional(phi: &RadialPotential) -> Result<FunctionalReport, SolverError> {
    let e = energy(phi)?;
    let lie = log_int_exp(phi, 1.0)?;
    Ok(FunctionalReport { e, log_int_exp: lie, f: e + lie, feasible: None })
}

/// The t-weighted functional E + (1/t) log int e^{-t phi} dmu, which the
/// inverse-iteration step at parameter t increases monotonically; at t = 1 it
/// is F, and the t -> 0 limit is E - int phi dmu.
pub fn f_value(phi: &RadialPotential, t: f64) -> Result<f64, SolverError> {
    let e = energy(phi)?;
    if t == 0.0 {
        return Ok(e - average_dmu(phi.grid(), phi.values()));
    }
    Ok(e + log_int_exp(phi, t)? / t)
}

/// Relative entropy of the normalised measures mu_phi against mu_psi,
/// int log(dmu_phi/dmu_psi) dmu_phi >= 0, zero exactly when phi = psi.
pub fn relative_entropy(phi: &RadialPotential, psi: &RadialPotential) -> Result<f64, SolverError> {
    check_same_grid(phi.grid(), psi.grid(), "relative entropy of potentials on different grids")?;
    if phi.values() == psi.values() {
        return Ok(0.0);
    }
    let l_phi = log_int_exp(phi, 1.0)?;
    let l_psi = log_int_exp(psi, 1.0)?;
    let shift = phi.min_value();
    let grid = phi.grid();
    let w: Vec<f64> = phi.values().iter().map(|&v| (-(v - shift)).exp()).collect();
    let weighted: Vec<f64> = phi
        .values()
        .iter()
        .zip(psi.values())
        .zip(&w)
        .map(|((&pv, &qv), &wi)| ((qv + l_psi) - (pv + l_phi)) * wi)
        .collect();
    Ok(average_dmu(grid, &weighted) / average_dmu(grid, &w))
}

/// Moser-Trudinger check log int e^{-phi} dmu <= beta |E(phi)| + log C.
///
/// With `c` absent the check runs in fitting mode: the constant making the
/// inequality an equality is reported and the verdict holds by construction.
pub fn mt_check(
    phi: &RadialPotential,
    beta: f64,
    c: Option<f64>,
) -> Result<InequalityVerdict, SolverError> {
    if !(beta.is_finite() && beta > 0.0 && beta < 1.0) {
        return Err(SolverError::invalid_input(format!("beta must lie in (0, 1), got {beta}")));
    }
    let abs_e = energy(phi)?.abs();
    let lhs = log_int_exp(phi, 1.0)?;
    match c {
        Some(c) => {
            if !(c.is_finite() && c > 0.0) {
                return Err(SolverError::invalid_input(format!("constant C must be positive, got {c}")));
            }
            Ok(InequalityVerdict::from_sides(lhs, beta * abs_e + c.ln(), None))
        }
        None => {
            let fitted = (lhs - beta * abs_e).exp();
            Ok(InequalityVerdict::from_sides(lhs, beta * abs_e + fitted.ln(), Some(fitted)))
        }
    }
}

/// Capacity bound for sublevel sets: the set {phi < -t} of a radial potential
/// is a ball B_rho, Cap(B_rho, B_R) = (log(R/rho))^{-n}, and the check is
/// Cap(phi < -t) <= (n+1)|E(phi)| / t^{n+1}. An empty sublevel set yields a
/// trivially true verdict with lhs 0.
pub fn capacity_sublevel_check(
    phi: &RadialPotential,
    t: f64,
) -> Result<InequalityVerdict, SolverError> {
    if !(t.is_finite() && t > 0.0) {
        return Err(SolverError::invalid_input(format!("sublevel depth t must be positive, got {t}")));
    }
    let grid = phi.grid();
    let n = grid.n();
    let rhs = (n + 1) as f64 * energy(phi)?.abs() / t.powi(n as i32 + 1);
    let v = phi.values();
    if v[0] >= -t {
        return Ok(InequalityVerdict::from_sides(0.0, rhs, None));
    }
    let r = grid.nodes();
    let i = v.iter().position(|&x| x >= -t).unwrap();
    let rho = r[i - 1] + (-t - v[i - 1]) * (r[i] - r[i - 1]) / (v[i] - v[i - 1]);
    let lhs = (grid.radius() / rho).ln().powi(-(n as i32));
    Ok(InequalityVerdict::from_sides(lhs, rhs, None))
}

/// Volume-capacity bound mu(B_rho) <= C exp(-gamma / Cap(B_rho, B_R)^{1/n})
/// for the closed ball of radius `rho_inner`, checked with C = 1:
/// lhs = (rho/R)^{2n}, rhs = exp(-gamma log(R/rho)).
pub fn volume_capacity_check(
    n: usize,
    radius: f64,
    rho_inner: f64,
    gamma: f64,
) -> Result<InequalityVerdict, SolverError> {
    validate_volume_capacity_args(n, radius, rho_inner, gamma)?;
    let lhs = (rho_inner / radius).powi(2 * n as i32);
    let rhs = (-gamma * (radius / rho_inner).ln()).exp();
    Ok(InequalityVerdict::from_sides(lhs, rhs, None))
}

/// Smallest constant C making the volume-capacity bound hold across a sweep
/// of inner radii; gamma = 2n gives C = 1 exactly.
pub fn volume_capacity_fit(
    n: usize,
    radius: f64,
    gamma: f64,
    rhos: &[f64],
) -> Result<f64, SolverError> {
    if rhos.is_empty() {
        return Err(SolverError::invalid_input("volume-capacity fit needs at least one radius"));
    }
    let mut c = 0.0_f64;
    for &rho in rhos {
        validate_volume_capacity_args(n, radius, rho, gamma)?;
        let lhs = (rho / radius).powi(2 * n as i32);
        let rhs = (-gamma * (radius / rho).ln()).exp();
        c = c.max(lhs / rhs);
    }
    Ok(c)
}

fn validate_volume_capacity_args(
    n: usize,
    radius: f64,
    rho_inner: f64,
    gamma: f64,
) -> Result<(), SolverError> {
    if n == 0 {
        return Err(SolverError::invalid_input("dimension n must be at least 1"));
    }
    if !(radius.is_finite() && radius > 0.0 && rho_inner.is_finite() && rho_inner > 0.0 && rho_inner < radius) {
        return Err(SolverError::invalid_input(format!(
            "inner radius must satisfy 0 < rho < R, got rho = {rho_inner}, R = {radius}"
        )));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(SolverError::invalid_input(format!("gamma must be positive, got {gamma}")));
    }
    Ok(())
}

/// The constant beta_A = A^{n+1} / (gamma^n (1 + 1/n)^n); A = 1 recovers the
/// baseline constant beta'_n of the Moser-Trudinger proof.
pub fn beta_constants(n: usize, gamma: f64, a: f64) -> Result<f64, SolverError> {
    if n == 0 {
        return Err(SolverError::invalid_input("dimension n must be at least 1"));
    }
    if !(gamma.is_finite() && gamma > 0.0 && a.is_finite() && a > 0.0) {
        return Err(SolverError::invalid_input(format!(
            "beta constant needs gamma > 0 and A > 0, got gamma = {gamma}, A = {a}"
        )));
    }
    let nf = n as f64;
    Ok(a.powi(n as i32 + 1) / (gamma.powi(n as i32) * (1.0 + 1.0 / nf).powi(n as i32)))
}

/// Default Moser-Trudinger exponent used by the checks: the baseline constant
/// at gamma = 2n plus headroom, clamped into [0.5, 0.99].
pub fn beta_default(n: usize) -> f64 {
    let base = beta_constants(n, 2.0 * n as f64, 1.0).expect("n >= 1 by clamp below");
    (base + 0.05).max(0.5).min(0.99)
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// Volume-comparison obstruction: solvability requires
/// t <= 4(2n-1) [(n-1)! n! / (2n-1)!]^{1/n}.
pub fn bishop_bound(n: usize) -> Result<f64, SolverError> {
    if n == 0 {
        return Err(SolverError::invalid_input("dimension n must be at least 1"));
    }
    let log_ratio = ln_factorial(n - 1) + ln_factorial(n) - ln_factorial(2 * n - 1);
    Ok(4.0 * (2 * n - 1) as f64 * (log_ratio / n as f64).exp())
}

/// Range guaranteed solvable by the Moser-Trudinger route:
/// t < (2n)^{1+1/n} (1 + 1/n)^{1+1/n} = (2n+2)^{(n+1)/n}.
pub fn mt_solvable_bound(n: usize) -> Result<f64, SolverError> {
    if n == 0 {
        return Err(SolverError::invalid_input("dimension n must be at least 1"));
    }
    let p = (n + 1) as f64 / n as f64;
    Ok((2.0 * (n + 1) as f64).powf(p))
}

/// Properness line F <= a E + b with a = 1 - beta: fits the smallest b over a
/// family of (E, F) pairs and returns (a, b).
pub fn properness_fit(pairs: &[(f64, f64)], beta: f64) -> Result<(f64, f64), SolverError> {
    if !(beta.is_finite() && beta > 0.0 && beta < 1.0) {
        return Err(SolverError::invalid_input(format!("beta must lie in (0, 1), got {beta}")));
    }
    if pairs.is_empty() {
        return Err(SolverError::invalid_input("properness fit needs at least one (E, F) pair"));
    }
    let a = 1.0 - beta;
    let b = pairs.iter().map(|&(e, f)| f - a * e).fold(f64::NEG_INFINITY, f64::max);
    Ok((a, b))
}
