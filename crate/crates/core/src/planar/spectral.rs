//! First eigenvalue of the weighted problem -lap psi = lambda (lap phi) psi
//! with Dirichlet data, by inverse power iteration on the discrete operator.

use crate::error::SolverError;
use crate::planar::domain::GridPotential2D;
use crate::planar::poisson::{laplacian_apply, solve_values};

/// Relative Rayleigh-quotient change below which the iteration has converged.
pub const EIGEN_TOLERANCE: f64 = 1.0e-8;

const MAX_POWER_STEPS: usize = 2_000;

/// Weights below -NEGATIVE_SLACK * max(w) are rejected; smaller negatives
/// are roundoff and get clamped to a positive floor.
const NEGATIVE_SLACK: f64 = 1.0e-9;

/// Smallest eigenvalue of -lap psi = lambda w psi with w = lap phi, the
/// discrete Laplacian of `phi`. Requires w > 0 up to roundoff.
pub fn lambda1(phi: &GridPotential2D) -> Result<f64, SolverError> {
    let domain = phi.domain();
    let mut w = laplacian_apply(domain, phi.values())?;
    let w_max = w.iter().fold(0.0_f64, |acc, v| acc.max(*v));
    let w_min = w.iter().fold(f64::INFINITY, |acc, v| acc.min(*v));
    if !(w_max > 0.0) || w_min < -NEGATIVE_SLACK * w_max {
        return Err(SolverError::NotPositiveMetric { min_weight: w_min });
    }
    let floor = 1.0e-12 * w_max;
    for v in &mut w {
        *v = v.max(floor);
    }

    let m = domain.interior_count();
    let mut x = vec![1.0_f64; m];
    let mut y = vec![0.0_f64; m];
    let mut lambda_prev = f64::INFINITY;
    let mut rel_change = f64::INFINITY;
    for _ in 0..MAX_POWER_STEPS {
        // One inverse power step: solve -lap y = w x.
        let rhs: Vec<f64> = w.iter().zip(&x).map(|(wi, xi)| -wi * xi).collect();
        y = solve_values(domain, &rhs, Some(&y))?;
        let mut num = 0.0_f64;
        let mut den = 0.0_f64;
        for k in 0..m {
            num += y[k] * w[k] * x[k];
            den += w[k] * y[k] * y[k];
        }
        if !(den > 0.0) {
            return Err(SolverError::NotPositiveMetric { min_weight: w_min });
        }
        let lambda = num / den;
        let sup = y.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        for (xk, yk) in x.iter_mut().zip(&y) {
            *xk = yk / sup;
        }
        for v in &mut y {
            *v /= sup;
        }
        rel_change = ((lambda - lambda_prev) / lambda).abs();
        if rel_change <= EIGEN_TOLERANCE {
            return Ok(lambda);
        }
        lambda_prev = lambda;
    }
    Err(SolverError::SolverStall { residual: rel_change, sweeps: MAX_POWER_STEPS })
}
