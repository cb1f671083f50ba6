//! Geodesics between radial potentials via Legendre duality in s = log r.
//!
//! A radial potential phi corresponds to the convex profile u(s) = phi(e^s);
//! the geodesic joining two potentials linearly interpolates their Legendre
//! transforms, u_t = ((1-t) u0^* + t u1^*)^*. For piecewise-linear profiles
//! the conjugate is exact (a max over nodes), the interpolant's breakpoints
//! lie in the merged slope grid, and the biconjugate recovers endpoints
//! exactly — so the construction is validated by the necessary conditions it
//! must satisfy: endpoint recovery, affinity of t -> E(u_t), and concavity of
//! t -> F(u_t).

use serde::{Deserialize, Serialize};

use crate::error::SolverError;
use crate::functionals::{slack_tolerance, InequalityVerdict};
use crate::iteration::ricci_iterate;
use crate::radial::{ma_apply, RadialPotential};

/// Relative slack allowed when repairing near-convex profiles; violations
/// beyond it are structural and rejected.
pub const CONVEXITY_SLACK: f64 = 1.0e-6;

/// Coefficient of the grid-resolution tolerance used by the E-affinity
/// check: rhs = coeff * (delta s)^2 * (1 + |E0| + |E1|).
pub const ENERGY_AFFINE_COEFF: f64 = 10.0;

/// Tolerance on the discrete second differences in the F-concavity check.
pub const F_CONCAVITY_TOL: f64 = 1.0e-6;

/// mu-mass below the window start must be < 1e-12, i.e.
/// 2n (sMax - sMin) >= log(1e12).
const MU_TAIL_LOG: f64 = 27.631021115928547;

/// Hard floor on the window width.
const MAX_WINDOW: f64 = 50.0;

/// Share of the Monge-Ampere mass allowed below the window start.
const MA_TAIL_SHARE: f64 = 1.0e-12;

/// Convex profile u(s) = phi(e^s) on a uniform grid over [sMin, sMax],
/// extended affinely with slope `tail_slope` below sMin; u(sMax) = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SLogProfile {
    n: usize,
    s_min: f64,
    s_max: f64,
    values: Vec<f64>,
    tail_slope: f64,
}

impl SLogProfile {
    pub fn new(
        n: usize,
        s_min: f64,
        s_max: f64,
        mut values: Vec<f64>,
    ) -> Result<Self, SolverError> {
        if n == 0 {
            return Err(SolverError::invalid_input("dimension n must be at least 1"));
        }
        if !(s_min.is_finite() && s_max.is_finite() && s_min < s_max) {
            return Err(SolverError::invalid_input(format!(
                "window must satisfy sMin < sMax, got [{s_min}, {s_max}]"
            )));
        }
        if values.len() < 3 {
            return Err(SolverError::invalid_input("profile needs at least 3 nodes"));
        }
        let mut scale = 1.0_f64;
        for v in &values {
            if !v.is_finite() {
                return Err(SolverError::invalid_input("profile values must be finite"));
            }
            scale = scale.max(v.abs());
        }
        let last = *values.last().unwrap();
        if last.abs() > 1.0e-9 * scale {
            return Err(SolverError::invalid_input(format!(
                "profile must vanish at sMax, got u(sMax) = {last:.3e}"
            )));
        }
        // Repair sub-tolerance convexity defects (interpolation noise) by the
        // lower convex envelope; larger defects are structural.
        let envelope = lower_convex_envelope(&values);
        let mut worst = (0usize, 0.0_f64);
        for (i, (&v, &e)) in values.iter().zip(&envelope).enumerate() {
            let dev = v - e;
            if dev > worst.1 {
                worst = (i, dev);
            }
        }
        if worst.1 > CONVEXITY_SLACK * scale {
            return Err(SolverError::NonConvexProfile { index: worst.0, violation: worst.1 });
        }
        values = envelope;
        for i in 1..values.len() {
            if values[i] < values[i - 1] - 1.0e-9 * scale {
                return Err(SolverError::invalid_input(format!(
                    "profile must be nondecreasing in s; drops at node {i}"
                )));
            }
            if values[i] < values[i - 1] {
                values[i] = values[i - 1];
            }
        }
        *values.last_mut().unwrap() = 0.0;
        let ds = (s_max - s_min) / (values.len() - 1) as f64;
        let tail_slope = ((values[1] - values[0]) / ds).max(0.0);
        Ok(SLogProfile { n, s_min, s_max, values, tail_slope })
    }

    /// Resample a radial potential on `s_nodes` log-radius points over a
    /// window wide enough that the discarded tail carries less than 1e-12 of
    /// both the Monge-Ampere mass and the volume measure.
    pub fn from_radial(phi: &RadialPotential, s_nodes: usize) -> Result<Self, SolverError> {
        let s_max = phi.grid().radius().ln();
        let s_min = window_start(&[phi], s_max, phi.grid().n())?;
        Self::on_window(phi, s_min, s_nodes)
    }

    /// Resample on an explicit window [s_min, log R].
    pub fn on_window(
        phi: &RadialPotential,
        s_min: f64,
        s_nodes: usize,
    ) -> Result<Self, SolverError> {
        if s_nodes < 3 {
            return Err(SolverError::invalid_input("profile needs at least 3 nodes"));
        }
        let grid = phi.grid();
        let s_max = grid.radius().ln();
        if !(s_min.is_finite() && s_min < s_max) {
            return Err(SolverError::invalid_input(format!(
                "window start {s_min} must lie below log R = {s_max}"
            )));
        }
        let r = grid.nodes();
        let v = phi.values();
        let mut values = Vec::with_capacity(s_nodes);
        let mut j = 0usize;
        for i in 0..s_nodes {
            let s = s_min + (s_max - s_min) * i as f64 / (s_nodes - 1) as f64;
            let x = s.exp().min(grid.radius());
            while j + 2 < r.len() && r[j + 1] < x {
                j += 1;
            }
            let theta = (x - r[j]) / (r[j + 1] - r[j]);
            values.push(v[j] + theta * (v[j + 1] - v[j]));
        }
        Self::new(grid.n(), s_min, s_max, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s_min(&self) -> f64 {
        self.s_min
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tail_slope(&self) -> f64 {
        self.tail_slope
    }

    pub fn delta_s(&self) -> f64 {
        (self.s_max - self.s_min) / (self.values.len() - 1) as f64
    }

    /// Uniform abscissae; the endpoints are s_min and s_max exactly.
    pub fn s_nodes(&self) -> Vec<f64> {
        let m = self.values.len() - 1;
        (0..=m)
            .map(|i| {
                if i == m {
                    self.s_max
                } else {
                    self.s_min + (self.s_max - self.s_min) * i as f64 / m as f64
                }
            })
            .collect()
    }

    fn edge_slopes(&self) -> Vec<f64> {
        let ds = self.delta_s();
        self.values.windows(2).map(|w| (w[1] - w[0]) / ds).collect()
    }

    /// Energy E = -(1/(n+1)) int (u')^{n+1} ds, exact for the piecewise-linear
    /// profile; the tail below sMin contributes less than the window's 1e-12
    /// mass share and is dropped.
    pub fn energy(&self) -> f64 {
        let ds = self.delta_s();
        let p = self.n as i32 + 1;
        let total: f64 = self
            .values
            .windows(2)
            .map(|w| ((w[1] - w[0]) / ds).max(0.0).powi(p) * ds)
            .sum();
        -total / (self.n + 1) as f64
    }

    /// log int e^{-u} dmu over the ball, window by trapezoid quadrature in s
    /// plus the closed-form affine tail below sMin.
    pub fn log_int_exp(&self) -> f64 {
        let ds = self.delta_s();
        let two_n = 2.0 * self.n as f64;
        let s = self.s_nodes();
        let w: Vec<f64> =
            self.values.iter().zip(&s).map(|(&u, &si)| (-u).exp() * two_n * (two_n * (si - self.s_max)).exp()).collect();
        let mut total = 0.0;
        for i in 1..w.len() {
            total += 0.5 * ds * (w[i] + w[i - 1]);
        }
        if self.tail_slope < two_n {
            total += (-self.values[0]).exp() * two_n * (two_n * (self.s_min - self.s_max)).exp()
                / (two_n - self.tail_slope);
        }
        total.ln()
    }

    /// F = E + log int e^{-u} dmu.
    pub fn f_value(&self) -> f64 {
        self.energy() + self.log_int_exp()
    }

    pub fn sup_diff(&self, other: &SLogProfile) -> Result<f64, SolverError> {
        if self.values.len() != other.values.len()
            || self.s_min != other.s_min
            || self.s_max != other.s_max
        {
            return Err(SolverError::GridMismatch {
                context: "sup_diff of profiles on different windows".to_string(),
            });
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs())))
    }
}

fn lower_convex_envelope(values: &[f64]) -> Vec<f64> {
    // Uniform abscissae: hull slopes compare by value differences per index.
    let m = values.len();
    let mut hull: Vec<usize> = Vec::with_capacity(m);
    for i in 0..m {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // Keep b only if it lies strictly below chord a-i.
            let chord = values[a] + (values[i] - values[a]) * (b - a) as f64 / (i - a) as f64;
            if values[b] <= chord {
                break;
            }
            hull.pop();
        }
        hull.push(i);
    }
    let mut out = vec![0.0; m];
    for pair in hull.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        for i in a..=b {
            let theta = (i - a) as f64 / (b - a) as f64;
            out[i] = values[a] + theta * (values[b] - values[a]);
        }
    }
    out[0] = values[0];
    out[m - 1] = values[m - 1];
    out
}

/// Window start for a family of potentials: low enough that every member
/// keeps all but a 1e-12 share of its Monge-Ampere mass above e^{sMin}, the
/// volume measure below is < 1e-12, and the width is at most MAX_WINDOW.
fn window_start(
    phis: &[&RadialPotential],
    s_max: f64,
    n: usize,
) -> Result<f64, SolverError> {
    let mut lo = s_max - MU_TAIL_LOG / (2.0 * n as f64);
    for phi in phis {
        let mass = ma_apply(phi)?;
        let total = mass.total();
        if total <= 0.0 {
            continue;
        }
        let threshold = MA_TAIL_SHARE * total;
        if let Some(i) = mass.values().iter().position(|&m| m >= threshold) {
            let r = phi.grid().nodes()[i.max(1)];
            lo = lo.min(r.ln());
        }
    }
    Ok(lo.max(s_max - MAX_WINDOW))
}

/// Legendre transform sampled on a slope grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DualProfile {
    slopes: Vec<f64>,
    values: Vec<f64>,
}

impl DualProfile {
    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Conjugate of the dual at the given (increasing) abscissae:
    /// u(s) = max_k (s p_k - dual_k). Exact for piecewise-linear duals whose
    /// breakpoints lie in the slope grid.
    pub fn conjugate_at(&self, s_points: &[f64]) -> Vec<f64> {
        conjugate_scan(&self.slopes, &self.values, s_points)
    }
}

/// max_i (q x_i - f_i) for each q in increasing order; x increasing, f convex
/// along x, so the argmax index is monotone in q.
fn conjugate_scan(x: &[f64], f: &[f64], qs: &[f64]) -> Vec<f64> {
    let m = x.len() - 1;
    let mut idx = 0usize;
    let mut out = Vec::with_capacity(qs.len());
    for &q in qs {
        while idx < m {
            // Moving right improves when the edge slope does not exceed q.
            if f[idx + 1] - f[idx] <= q * (x[idx + 1] - x[idx]) {
                idx += 1;
            } else {
                break;
            }
        }
        out.push(q * x[idx] - f[idx]);
    }
    out
}

fn merged_slope_grid(profiles: &[&SLogProfile]) -> Vec<f64> {
    let mut p_max = 0.0_f64;
    let mut dense = 0usize;
    let mut slopes: Vec<f64> = vec![0.0];
    for u in profiles {
        for s in u.edge_slopes() {
            let s = s.max(0.0);
            p_max = p_max.max(s);
            slopes.push(s);
        }
        dense = dense.max(4 * u.values().len());
    }
    for i in 0..=dense {
        slopes.push(p_max * i as f64 / dense as f64);
    }
    slopes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    slopes.dedup();
    slopes
}

/// Legendre transform û(p) = sup_s (ps - u(s)) of the profile restricted to
/// its window, on the uniform slope grid [0, max u'] at 4x the node density
/// merged with the profile's own edge slopes (making the biconjugate exact at
/// the nodes).
pub fn legendre(u: &SLogProfile) -> DualProfile {
    let slopes = merged_slope_grid(&[u]);
    let values = conjugate_scan(&u.s_nodes(), u.values(), &slopes);
    DualProfile { slopes, values }
}

/// Geodesic between two radial potentials: the common-window profiles of the
/// endpoints and the sampled path u_t at t = 0, 1/K, ..., 1.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicPath {
    pub u0: SLogProfile,
    pub u1: SLogProfile,
    pub ts: Vec<f64>,
    pub samples: Vec<SLogProfile>,
}

/// Build the geodesic joining phi0 to phi1 with K segments on an `s_nodes`
/// point window: duals are interpolated linearly and conjugated back; the
/// endpoint samples are the endpoint profiles themselves.
pub fn geodesic_path(
    phi0: &RadialPotential,
    phi1: &RadialPotential,
    k: usize,
    s_nodes: usize,
) -> Result<GeodesicPath, SolverError> {
    crate::radial::check_same_grid(phi0.grid(), phi1.grid(), "geodesic endpoints on different grids")?;
    if k < 1 {
        return Err(SolverError::invalid_input("geodesic needs at least 1 segment"));
    }
    let n = phi0.grid().n();
    let s_max = phi0.grid().radius().ln();
    let s_min = window_start(&[phi0, phi1], s_max, n)?;
    let u0 = SLogProfile::on_window(phi0, s_min, s_nodes)?;
    let u1 = SLogProfile::on_window(phi1, s_min, s_nodes)?;
    let slopes = merged_slope_grid(&[&u0, &u1]);
    let s = u0.s_nodes();
    let dual0 = conjugate_scan(&s, u0.values(), &slopes);
    let dual1 = conjugate_scan(&s, u1.values(), &slopes);
    let mut ts = Vec::with_capacity(k + 1);
    let mut samples = Vec::with_capacity(k + 1);
    for j in 0..=k {
        let t = j as f64 / k as f64;
        ts.push(t);
        if j == 0 {
            samples.push(u0.clone());
            continue;
        }
        if j == k {
            samples.push(u1.clone());
            continue;
        }
        let dual_t: Vec<f64> =
            dual0.iter().zip(&dual1).map(|(&a, &b)| (1.0 - t) * a + t * b).collect();
        let values = conjugate_scan(&slopes, &dual_t, &s);
        samples.push(SLogProfile::new(n, s_min, s_max, values)?);
    }
    Ok(GeodesicPath { u0, u1, ts, samples })
}

/// Deviation of t -> E(u_t) from the chord between its endpoints, against a
/// grid-resolution tolerance.
pub fn check_energy_affine(path: &GeodesicPath) -> InequalityVerdict {
    let e0 = path.samples.first().unwrap().energy();
    let e1 = path.samples.last().unwrap().energy();
    let mut worst = 0.0_f64;
    for (t, u) in path.ts.iter().zip(&path.samples) {
        let chord = (1.0 - t) * e0 + t * e1;
        worst = worst.max((u.energy() - chord).abs());
    }
    let ds = path.u0.delta_s();
    let rhs = ENERGY_AFFINE_COEFF * ds * ds * (1.0 + e0.abs() + e1.abs());
    let slack = rhs - worst;
    InequalityVerdict { lhs: worst, rhs, slack, holds: slack >= 0.0, fitted_constant: None }
}

/// Concavity of t -> F(u_t): every discrete second difference must stay below
/// the fixed tolerance.
pub fn check_f_concave(path: &GeodesicPath) -> Result<InequalityVerdict, SolverError> {
    if path.samples.len() < 5 {
        return Err(SolverError::invalid_input("F-concavity check needs at least 4 segments"));
    }
    let f: Vec<f64> = path.samples.iter().map(|u| u.f_value()).collect();
    let mut worst = f64::NEG_INFINITY;
    for w in f.windows(3) {
        worst = worst.max(w[2] - 2.0 * w[1] + w[0]);
    }
    let rhs = F_CONCAVITY_TOL;
    let slack = rhs - worst;
    Ok(InequalityVerdict {
        lhs: worst,
        rhs,
        slack,
        holds: slack >= -slack_tolerance(worst, rhs),
        fitted_constant: None,
    })
}

/// Outcome of the uniqueness experiment: iterate from several starts and
/// compare the limits pairwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    #[serde(rename = "maxPairwise")]
    pub max_pairwise: f64,
    pub passes: bool,
    pub iterations: Vec<usize>,
}

/// Run the inverse iteration at t = 1 from each start (all on one grid with
/// R < 1) and report the maximum pairwise sup-distance of the limits.
pub fn uniqueness_experiment(
    starts: &[RadialPotential],
    tol: f64,
    max_iter: usize,
) -> Result<UniquenessReport, SolverError> {
    if starts.is_empty() {
        return Err(SolverError::invalid_input("uniqueness experiment needs at least one start"));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(SolverError::invalid_input(format!("tolerance must be positive, got {tol}")));
    }
    let grid = starts[0].grid();
    if grid.radius() >= 1.0 {
        return Err(SolverError::invalid_input(format!(
            "uniqueness regime needs R < 1, got R = {}",
            grid.radius()
        )));
    }
    for s in &starts[1..] {
        crate::radial::check_same_grid(grid, s.grid(), "uniqueness starts on different grids")?;
    }
    let mut limits = Vec::with_capacity(starts.len());
    let mut iterations = Vec::with_capacity(starts.len());
    for start in starts {
        let (phi, trace) = ricci_iterate(start, 1.0, tol * 1.0e-2, max_iter)?;
        if !trace.converged {
            return Err(SolverError::Diverged {
                iterations: trace.iterations,
                reason: "a uniqueness run exhausted its iteration budget".to_string(),
            });
        }
        iterations.push(trace.iterations);
        limits.push(phi);
    }
    let mut max_pairwise = 0.0_f64;
    for i in 0..limits.len() {
        for j in i + 1..limits.len() {
            max_pairwise = max_pairwise.max(limits[i].sup_diff(&limits[j])?);
        }
    }
    Ok(UniquenessReport { max_pairwise, passes: max_pairwise <= tol, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::RadialGrid;
    use std::sync::Arc;

    const STAR_RADIUS_1: f64 = 0.5773502691896258;

    fn grid(n: usize, radius: f64, nodes: usize) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::uniform(n, radius, nodes).unwrap())
    }

    fn quadratic_profile(nodes: usize) -> SLogProfile {
        // u(s) = (s^2 - s_max^2)/2 on [0, 2]: convex, nondecreasing, 0 at s_max.
        let s_max = 2.0;
        let values: Vec<f64> = (0..nodes)
            .map(|i| {
                let s = s_max * i as f64 / (nodes - 1) as f64;
                (s * s - s_max * s_max) / 2.0
            })
            .collect();
        SLogProfile::new(1, 0.0, s_max, values).unwrap()
    }

    #[test]
    fn profile_rejects_concave_kinks() {
        let values: Vec<f64> = (0..65)
            .map(|i| {
                let s = i as f64 / 64.0;
                // Concave bulge: -(1-s)^2 sits far above its convex envelope.
                -(1.0 - s) * (1.0 - s)
            })
            .collect();
        let err = SLogProfile::new(1, -1.0, 0.0, values).unwrap_err();
        assert!(matches!(err, SolverError::NonConvexProfile { .. }));
    }

    #[test]
    fn profile_repairs_noise_level_dips() {
        let mut values: Vec<f64> = (0..65)
            .map(|i| {
                let s = i as f64 / 64.0;
                s * s - 1.0
            })
            .collect();
        values[30] += 2.0e-8;
        let u = SLogProfile::new(1, -1.0, 0.0, values).unwrap();
        let d = u.edge_slopes();
        for w in d.windows(2) {
            assert!(w[1] >= w[0] - 1.0e-12, "repair must restore convexity");
        }
    }

    #[test]
    fn legendre_of_quadratic_is_quadratic() {
        let u = quadratic_profile(513);
        let dual = legendre(&u);
        // u(s) = s^2/2 - 2, so the dual is p^2/2 + 2 for slopes inside [0, 2].
        for (&p, &v) in dual.slopes().iter().zip(dual.values()) {
            if p >= 0.1 && p <= 1.9 {
                assert!((v - (p * p / 2.0 + 2.0)).abs() < 1.0e-4, "p={p} v={v}");
            }
        }
    }

    #[test]
    fn legendre_of_affine_profile_is_supported_at_one_slope() {
        let s_max = 1.0;
        let a = 1.5;
        let values: Vec<f64> = (0..65)
            .map(|i| {
                let s = -1.0 + 2.0 * i as f64 / 64.0;
                a * (s - s_max)
            })
            .collect();
        let u = SLogProfile::new(1, -1.0, s_max, values).unwrap();
        let dual = legendre(&u);
        for (&p, &v) in dual.slopes().iter().zip(dual.values()) {
            if (p - a).abs() < 1.0e-12 {
                // u = a s + b with b = -a s_max, so the dual at p = a is -b.
                assert!((v - a * s_max).abs() < 1.0e-12);
            }
            // Off the supporting slope the dual is the wall value p s_min - u(s_min)
            // (p < a) or p s_max (p > a).
            if p > a + 1.0e-9 {
                assert!((v - p * s_max).abs() < 1.0e-12, "p={p}");
            }
        }
    }

    #[test]
    fn biconjugation_recovers_convex_profiles_at_nodes() {
        let u = quadratic_profile(257);
        let rec = legendre(&u).conjugate_at(&u.s_nodes());
        let worst = rec
            .iter()
            .zip(u.values())
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()));
        assert!(worst < 1.0e-12, "biconjugate deviates by {worst}");

        let g = grid(1, STAR_RADIUS_1, 1025);
        let u = SLogProfile::from_radial(&RadialPotential::fubini_study(g), 801).unwrap();
        let rec = legendre(&u).conjugate_at(&u.s_nodes());
        let worst = rec
            .iter()
            .zip(u.values())
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()));
        assert!(worst < 1.0e-12, "biconjugate deviates by {worst}");
    }

    #[test]
    fn profile_energy_matches_stieltjes_energy() {
        let g = grid(1, STAR_RADIUS_1, 8193);
        let phi = RadialPotential::fubini_study(g);
        let u = SLogProfile::from_radial(&phi, 4097).unwrap();
        let direct = crate::functionals::energy(&phi).unwrap();
        assert!((u.energy() - direct).abs() < 1.0e-5, "{} vs {direct}", u.energy());
    }

    #[test]
    fn profile_f_matches_direct_f() {
        let g = grid(1, STAR_RADIUS_1, 8193);
        let phi = RadialPotential::fubini_study(g);
        let u = SLogProfile::from_radial(&phi, 4097).unwrap();
        let direct = crate::functionals::f_functional(&phi).unwrap().f;
        assert!((u.f_value() - direct).abs() < 1.0e-5, "{} vs {direct}", u.f_value());
    }

    #[test]
    fn degenerate_geodesic_is_constant_in_t() {
        let g = grid(1, STAR_RADIUS_1, 1025);
        let phi = RadialPotential::fubini_study(g);
        let path = geodesic_path(&phi, &phi, 8, 513).unwrap();
        for u in &path.samples {
            assert!(u.sup_diff(&path.u0).unwrap() < 1.0e-12);
        }
    }

    #[test]
    fn geodesic_recovers_endpoints_exactly() {
        let g = grid(1, STAR_RADIUS_1, 2049);
        let phi0 = RadialPotential::paraboloid(g.clone());
        let phi1 = RadialPotential::fubini_study(g);
        let path = geodesic_path(&phi0, &phi1, 16, 1025).unwrap();
        assert_eq!(path.samples[0].values(), path.u0.values());
        assert_eq!(path.samples[16].values(), path.u1.values());
        // The interior construction also reproduces endpoints at the dual level.
        let slopes = merged_slope_grid(&[&path.u0, &path.u1]);
        let s = path.u0.s_nodes();
        let rec = conjugate_scan(&slopes, &conjugate_scan(&s, path.u0.values(), &slopes), &s);
        let worst = rec
            .iter()
            .zip(path.u0.values())
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()));
        assert!(worst < 1.0e-12, "dual-level endpoint deviation {worst}");
    }

    #[test]
    fn geodesic_samples_vanish_at_s_max_and_stay_convex() {
        let g = grid(1, STAR_RADIUS_1, 2049);
        let phi0 = RadialPotential::paraboloid(g.clone());
        let phi1 = RadialPotential::fubini_study(g);
        let path = geodesic_path(&phi0, &phi1, 8, 513).unwrap();
        for u in &path.samples {
            assert_eq!(*u.values().last().unwrap(), 0.0);
            let d = u.edge_slopes();
            for w in d.windows(2) {
                assert!(w[1] >= w[0] - 1.0e-10);
            }
        }
    }

    #[test]
    fn energy_is_affine_along_the_geodesic() {
        let g = grid(1, STAR_RADIUS_1, 4097);
        let phi0 = RadialPotential::paraboloid(g.clone());
        let phi1 = RadialPotential::fubini_study(g);
        let coarse = geodesic_path(&phi0, &phi1, 16, 1025).unwrap();
        let fine = geodesic_path(&phi0, &phi1, 16, 2049).unwrap();
        let vc = check_energy_affine(&coarse);
        let vf = check_energy_affine(&fine);
        assert!(vc.holds, "coarse deviation {} tolerance {}", vc.lhs, vc.rhs);
        assert!(vf.holds, "fine deviation {} tolerance {}", vf.lhs, vf.rhs);
        assert!(vc.lhs / vf.lhs >= 3.0, "refinement ratio {} too small", vc.lhs / vf.lhs);
    }

    #[test]
    fn f_is_concave_along_the_geodesic_both_ways() {
        let g = grid(1, STAR_RADIUS_1, 2049);
        let phi0 = RadialPotential::paraboloid(g.clone());
        let phi1 = RadialPotential::fubini_study(g);
        let forward = check_f_concave(&geodesic_path(&phi0, &phi1, 16, 1025).unwrap()).unwrap();
        let backward = check_f_concave(&geodesic_path(&phi1, &phi0, 16, 1025).unwrap()).unwrap();
        assert!(forward.holds, "forward second difference {}", forward.lhs);
        assert!(backward.holds, "backward second difference {}", backward.lhs);
        assert!((forward.lhs - backward.lhs).abs() < 1.0e-9, "path must be symmetric");
    }

    #[test]
    fn scaled_mass_endpoints_give_monotone_paths() {
        let g = grid(1, 0.9, 1025);
        let phi0 = RadialPotential::paraboloid(g.clone());
        let phi1 = phi0.scaled(1.25).unwrap();
        let path = geodesic_path(&phi0, &phi1, 8, 513).unwrap();
        for k in 1..path.samples.len() {
            let prev = path.samples[k - 1].values();
            let cur = path.samples[k].values();
            for (a, b) in prev.iter().zip(cur) {
                assert!(*b <= *a + 1.0e-12, "path must decrease pointwise in t");
            }
        }
    }

    #[test]
    fn f_concave_requires_enough_segments() {
        let g = grid(1, 0.9, 1025);
        let phi0 = RadialPotential::paraboloid(g.clone());
        let phi1 = RadialPotential::fubini_study(g);
        let path = geodesic_path(&phi0, &phi1, 2, 257).unwrap();
        assert!(check_f_concave(&path).is_err());
    }

    #[test]
    fn uniqueness_experiment_agrees_across_starts() {
        let g = grid(1, STAR_RADIUS_1, 513);
        let unif = RadialPotential::paraboloid(g.clone());
        let starts = vec![
            RadialPotential::zero(g.clone()),
            unif.clone(),
            unif.scaled(0.5).unwrap(),
        ];
        let report = uniqueness_experiment(&starts, 1.0e-6, 400).unwrap();
        assert!(report.passes, "max pairwise distance {}", report.max_pairwise);
        assert_eq!(report.iterations.len(), 3);
    }

    #[test]
    fn uniqueness_experiment_rejects_large_balls() {
        let g = grid(1, 1.5, 257);
        let starts = vec![RadialPotential::zero(g)];
        assert!(uniqueness_experiment(&starts, 1.0e-6, 50).is_err());
    }
}
