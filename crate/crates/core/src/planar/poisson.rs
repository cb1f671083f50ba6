//! Dirichlet Poisson solver on planar domains: Shortley-Weller stencil at
//! boundary-clipped nodes, solved by symmetric successive over-relaxation
//! with automatic relaxation back-off.

use std::sync::Arc;

use crate::error::SolverError;
use crate::planar::domain::{GridPotential2D, PlanarDomain};

/// Relative sup-norm residual demanded of a converged solve.
pub const RESIDUAL_TOLERANCE: f64 = 1.0e-10;

const MAX_DOUBLE_SWEEPS: usize = 150_000;
const CHECK_EVERY: usize = 16;
const MAX_BACKOFFS: usize = 4;

/// Per-node stencil: diagonal coefficient and E, W, N, S off-diagonals, so
/// that (lap u)_k = offdiag . u_nb - diag * u_k.
struct Stencil {
    diag: Vec<f64>,
    offdiag: Vec<[f64; 4]>,
}

fn build_stencil(domain: &PlanarDomain) -> Stencil {
    let h2 = domain.h() * domain.h();
    let m = domain.interior_count();
    let mut diag = vec![0.0; m];
    let mut offdiag = vec![[0.0; 4]; m];
    for k in 0..m {
        let ar = domain.arms()[k];
        let (ae, aw, an, as_) = (ar[0], ar[1], ar[2], ar[3]);
        offdiag[k][0] = 2.0 / (h2 * ae * (ae + aw));
        offdiag[k][1] = 2.0 / (h2 * aw * (ae + aw));
        offdiag[k][2] = 2.0 / (h2 * an * (an + as_));
        offdiag[k][3] = 2.0 / (h2 * as_ * (an + as_));
        diag[k] = 2.0 / (h2 * ae * aw) + 2.0 / (h2 * an * as_);
    }
    Stencil { diag, offdiag }
}

/// Discrete Laplacian of interior `values` (boundary values are 0).
pub fn laplacian_apply(domain: &PlanarDomain, values: &[f64]) -> Result<Vec<f64>, SolverError> {
    if values.len() != domain.interior_count() {
        return Err(SolverError::GridMismatch {
            context: format!(
                "laplacian input has {} values for {} interior nodes",
                values.len(),
                domain.interior_count()
            ),
        });
    }
    let st = build_stencil(domain);
    let mut out = vec![0.0; values.len()];
    for (k, o) in out.iter_mut().enumerate() {
        let mut acc = -st.diag[k] * values[k];
        for d in 0..4 {
            let nb = domain.neighbors()[k][d];
            if nb >= 0 {
                acc += st.offdiag[k][d] * values[nb as usize];
            }
        }
        *o = acc;
    }
    Ok(out)
}

fn residual_sup(st: &Stencil, domain: &PlanarDomain, u: &[f64], f: &[f64]) -> f64 {
    let mut worst = 0.0_f64;
    for k in 0..u.len() {
        let mut lap = -st.diag[k] * u[k];
        for d in 0..4 {
            let nb = domain.neighbors()[k][d];
            if nb >= 0 {
                lap += st.offdiag[k][d] * u[nb as usize];
            }
        }
        worst = worst.max((lap - f[k]).abs());
    }
    worst
}

/// Solve lap u = f with u = 0 on the boundary, starting from `start` when
/// given. Returns the interior values.
pub(crate) fn solve_values(
    domain: &PlanarDomain,
    f: &[f64],
    start: Option<&[f64]>,
) -> Result<Vec<f64>, SolverError> {
    if f.len() != domain.interior_count() {
        return Err(SolverError::GridMismatch {
            context: format!(
                "right-hand side has {} values for {} interior nodes",
                f.len(),
                domain.interior_count()
            ),
        });
    }
    if f.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::invalid_input("right-hand side must be finite"));
    }
    let st = build_stencil(domain);
    let m = domain.interior_count();
    let mut u = match start {
        Some(s) if s.len() == m => s.to_vec(),
        _ => vec![0.0; m],
    };
    let f_scale = f.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if f_scale == 0.0 && start.is_none() {
        return Ok(u);
    }
    let tol = RESIDUAL_TOLERANCE * f_scale.max(1.0e-300);

    let (nx, ny) = domain.grid_shape();
    let mut omega = 2.0 / (1.0 + (std::f64::consts::PI / nx.max(ny) as f64).sin());
    omega = omega.min(1.995);

    let update = |u: &mut [f64], k: usize, omega: f64| {
        let mut nbsum = 0.0;
        for d in 0..4 {
            let nb = domain.neighbors()[k][d];
            if nb >= 0 {
                nbsum += st.offdiag[k][d] * u[nb as usize];
            }
        }
        let gs = (nbsum - f[k]) / st.diag[k];
        u[k] += omega * (gs - u[k]);
    };

    let mut best = f64::INFINITY;
    let mut first = f64::INFINITY;
    let mut stalled_checks = 0usize;
    let mut backoffs = 0usize;
    for sweep in 1..=MAX_DOUBLE_SWEEPS {
        for k in 0..m {
            update(&mut u, k, omega);
        }
        for k in (0..m).rev() {
            update(&mut u, k, omega);
        }
        if sweep % CHECK_EVERY == 0 || sweep == MAX_DOUBLE_SWEEPS {
            let res = residual_sup(&st, domain, &u, f);
            if res <= tol {
                return Ok(u);
            }
            if !first.is_finite() {
                first = res;
            }
            // Near-optimal omega overshoots before it descends; back-off must
            // wait out that transient or it degrades omega permanently.
            let can_back_off = backoffs < MAX_BACKOFFS && omega > 1.0 + 1.0e-3;
            if res >= 10.0 * first && can_back_off {
                omega = 1.0 + 0.5 * (omega - 1.0);
                backoffs += 1;
                stalled_checks = 0;
            } else if best <= 0.25 * first && res >= 0.999 * best {
                stalled_checks += 1;
                if stalled_checks >= 2 && can_back_off {
                    omega = 1.0 + 0.5 * (omega - 1.0);
                    backoffs += 1;
                    stalled_checks = 0;
                }
            } else {
                stalled_checks = 0;
            }
            best = best.min(res);
        }
    }
    Err(SolverError::SolverStall {
        residual: residual_sup(&st, domain, &u, f) / f_scale.max(1.0e-300),
        sweeps: MAX_DOUBLE_SWEEPS,
    })
}

/// Solve lap u = f with homogeneous Dirichlet data on `domain`.
pub fn poisson_solve(domain: &Arc<PlanarDomain>, f: &[f64]) -> Result<GridPotential2D, SolverError> {
    let values = solve_values(domain, f, None)?;
    GridPotential2D::new(domain.clone(), values)
}
