//! Radial reduction of the Dirichlet complex Monge-Ampere problem on balls
//! B_R in C^n.
//!
//! For a rotation-invariant potential phi(r) with phi(R) = 0 the Monge-Ampere
//! measure of the ball of radius r has total mass M(r) = (r phi'(r))^n, so the
//! equation becomes a pointwise identity between cumulative mass profiles and
//! the Dirichlet solve reduces to the explicit inversion
//! phi(r) = -int_r^R M(rho)^{1/n} drho / rho.

use std::sync::Arc;

use crate::error::SolverError;

/// Minimum number of grid nodes (16 intervals).
pub const MIN_NODES: usize = 17;

/// Cap on exponents fed to `exp` after log-sum-exp shifting; beyond this the
/// shifted integrand underflows across most of the domain and the quadrature
/// loses all relative precision.
pub const EXPONENT_CAP: f64 = 700.0;

/// Absolute slack (relative to the mass scale) tolerated in monotonicity
/// checks of cumulative mass profiles.
pub(crate) const MASS_SLACK: f64 = 1.0e-9;

/// Node tolerance for boundary and monotonicity checks on potentials.
pub(crate) const VALUE_SLACK: f64 = 1.0e-9;

/// Discretisation of [0, R]: strictly increasing nodes from r_0 = 0 to
/// r_m = R, tagged with the complex dimension n of the ambient ball.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    n: usize,
    radius: f64,
    nodes: Vec<f64>,
}

impl RadialGrid {
    /// Uniform grid with `node_count` nodes on [0, radius].
    pub fn uniform(n: usize, radius: f64, node_count: usize) -> Result<Self, SolverError> {
        if node_count < MIN_NODES {
            return Err(SolverError::invalid_input(format!(
                "grid needs at least {MIN_NODES} nodes, got {node_count}"
            )));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(SolverError::invalid_input(format!("radius must be positive, got {radius}")));
        }
        if n == 0 {
            return Err(SolverError::invalid_input("dimension n must be at least 1"));
        }
        let m = node_count - 1;
        let nodes = (0..=m).map(|i| radius * i as f64 / m as f64).collect();
        Ok(RadialGrid { n, radius, nodes })
    }

    /// Grid over explicitly given nodes; the first must be 0 and the sequence
    /// strictly increasing. The radius is the final node.
    pub fn from_nodes(n: usize, nodes: Vec<f64>) -> Result<Self, SolverError> {
        if nodes.len() < MIN_NODES {
            return Err(SolverError::invalid_input(format!(
                "grid needs at least {MIN_NODES} nodes, got {}",
                nodes.len()
            )));
        }
        if n == 0 {
            return Err(SolverError::invalid_input("dimension n must be at least 1"));
        }
        if nodes[0] != 0.0 {
            return Err(SolverError::invalid_input("first grid node must be 0"));
        }
        for w in nodes.windows(2) {
            if !(w[1].is_finite() && w[1] > w[0]) {
                return Err(SolverError::invalid_input("grid nodes must be finite and strictly increasing"));
            }
        }
        let radius = *nodes.last().unwrap();
        Ok(RadialGrid { n, radius, nodes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn same_as(&self, other: &RadialGrid) -> bool {
        self == other
    }
}

pub(crate) fn check_same_grid(a: &RadialGrid, b: &RadialGrid, context: &str) -> Result<(), SolverError> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(SolverError::GridMismatch { context: context.to_string() })
    }
}

/// Radial potential sampled on a grid: phi <= 0, nondecreasing in r, with
/// phi(R) = 0 (Dirichlet boundary).
#[derive(Debug, Clone, PartialEq)]
pub struct RadialPotential {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl RadialPotential {
    pub fn new(grid: Arc<RadialGrid>, mut values: Vec<f64>) -> Result<Self, SolverError> {
        if values.len() != grid.len() {
            return Err(SolverError::GridMismatch {
                context: format!("potential has {} values on a {}-node grid", values.len(), grid.len()),
            });
        }
        let mut scale = 1.0_f64;
        for v in &values {
            if !v.is_finite() {
                return Err(SolverError::invalid_input("potential values must be finite"));
            }
            scale = scale.max(v.abs());
        }
        let tol = VALUE_SLACK * scale;
        let last = *values.last().unwrap();
        if last.abs() > tol {
            return Err(SolverError::invalid_input(format!(
                "potential must vanish on the boundary, got phi(R) = {last:.3e}"
            )));
        }
        for i in 1..values.len() {
            if values[i] < values[i - 1] - tol {
                return Err(SolverError::invalid_input(format!(
                    "potential must be nondecreasing in r; drops by {:.3e} at node {i}",
                    values[i - 1] - values[i]
                )));
            }
            if values[i] < values[i - 1] {
                values[i] = values[i - 1];
            }
        }
        *values.last_mut().unwrap() = 0.0;
        Ok(RadialPotential { grid, values })
    }

    /// The zero potential.
    pub fn zero(grid: Arc<RadialGrid>) -> Self {
        let values = vec![0.0; grid.len()];
        RadialPotential { grid, values }
    }

    /// The paraboloid (r^2 - R^2) / (2 R^2): the unique radial solution of
    /// (dd^c phi)^n = mu with zero boundary values, whose mass profile is
    /// (r/R)^{2n}.
    pub fn paraboloid(grid: Arc<RadialGrid>) -> Self {
        let rr = grid.radius() * grid.radius();
        let values = grid.nodes().iter().map(|&r| (r * r - rr) / (2.0 * rr)).collect();
        RadialPotential { grid, values }
    }

    /// The Fubini-Study model potential (n+1) log((1+r^2)/(1+R^2)).
    ///
    /// It solves (dd^c phi)^n = e^{-phi} mu / int e^{-phi} dmu exactly when
    /// R^2 = 1/(2n+1); on other balls it is simply a valid test potential.
    pub fn fubini_study(grid: Arc<RadialGrid>) -> Self {
        let a = (grid.n() + 1) as f64;
        let denom = 1.0 + grid.radius() * grid.radius();
        let values = grid.nodes().iter().map(|&r| a * ((1.0 + r * r) / denom).ln()).collect();
        RadialPotential { grid, values }
    }

    /// Pointwise scaling s * phi for s >= 0.
    pub fn scaled(&self, s: f64) -> Result<Self, SolverError> {
        if !(s.is_finite() && s >= 0.0) {
            return Err(SolverError::invalid_input(format!("scale factor must be nonnegative, got {s}")));
        }
        let values = self.values.iter().map(|v| s * v).collect();
        Ok(RadialPotential { grid: self.grid.clone(), values })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// Sup-norm distance to another potential on the same grid.
    pub fn sup_diff(&self, other: &RadialPotential) -> Result<f64, SolverError> {
        check_same_grid(&self.grid, &other.grid, "sup_diff of potentials on different grids")?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs())))
    }
}

/// Cumulative Monge-Ampere mass M(r) of the balls B_r: nondecreasing from
/// M(0) = 0. When the profile represents a normalised right-hand side the
/// total mass M(R) is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeMass {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl CumulativeMass {
    pub fn new(grid: Arc<RadialGrid>, mut values: Vec<f64>) -> Result<Self, SolverError> {
        if values.len() != grid.len() {
            return Err(SolverError::GridMismatch {
                context: format!("mass profile has {} values on a {}-node grid", values.len(), grid.len()),
            });
        }
        let mut scale = 1.0_f64;
        for v in &values {
            if !v.is_finite() {
                return Err(SolverError::invalid_input("mass values must be finite"));
            }
            scale = scale.max(v.abs());
        }
        let tol = MASS_SLACK * scale;
        if values[0].abs() > tol {
            return Err(SolverError::invalid_input(format!(
                "cumulative mass must start at 0, got M(0) = {:.3e}",
                values[0]
            )));
        }
        values[0] = 0.0;
        for i in 1..values.len() {
            if values[i] < values[i - 1] - tol {
                return Err(SolverError::NonMonotoneMass { index: i, drop: values[i - 1] - values[i] });
            }
            // Quadrature noise may produce microscopic dips; clamp them so the
            // profile is exactly nondecreasing.
            if values[i] < values[i - 1] {
                values[i] = values[i - 1];
            }
        }
        Ok(CumulativeMass { grid, values })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn sup_diff(&self, other: &CumulativeMass) -> Result<f64, SolverError> {
        check_same_grid(&self.grid, &other.grid, "sup_diff of mass profiles on different grids")?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs())))
    }
}

/// Derivative of the quadratic through (x0,f0), (x1,f1), (x2,f2) at `at`.
fn three_point_derivative(x: [f64; 3], f: [f64; 3], at: f64) -> f64 {
    let [x0, x1, x2] = x;
    let [f0, f1, f2] = f;
    f0 * (2.0 * at - x1 - x2) / ((x0 - x1) * (x0 - x2))
        + f1 * (2.0 * at - x0 - x2) / ((x1 - x0) * (x1 - x2))
        + f2 * (2.0 * at - x0 - x1) / ((x2 - x0) * (x2 - x1))
}

/// Cumulative Monge-Ampere mass of a radial potential: M(r_i) = (r_i phi'(r_i))^n,
/// with phi' from second-order difference stencils.
pub fn ma_apply(phi: &RadialPotential) -> Result<CumulativeMass, SolverError> {
    let grid = phi.grid();
    let r = grid.nodes();
    let v = phi.values();
    let m = r.len() - 1;
    let n = grid.n() as i32;
    let mut mass = vec![0.0; r.len()];
    for i in 1..=m {
        let (lo, hi) = if i == m { (m - 2, m) } else { (i - 1, i + 1) };
        let slope = three_point_derivative(
            [r[lo], r[lo + 1], r[hi]],
            [v[lo], v[lo + 1], v[hi]],
            r[i],
        );
        mass[i] = (r[i] * slope).powi(n);
    }
    CumulativeMass::new(grid.clone(), mass)
}

/// Estimated growth exponent of M near the origin; profiles carrying an atom
/// at 0 have a plateau (exponent near zero) already at small radii.
fn atom_exponent(mass: &[f64], r: &[f64], total: f64) -> Option<(f64, f64)> {
    let floor = 1.0e-9 * total;
    let a = mass.iter().position(|&v| v > floor)?;
    if a == 0 || a > r.len() / 2 {
        return None;
    }
    let b = r.iter().position(|&x| x >= 2.0 * r[a])?;
    if b <= a || mass[b] <= 0.0 {
        return None;
    }
    let exponent = (mass[b] / mass[a]).ln() / (r[b] / r[a]).ln();
    Some((exponent, r[a]))
}

/// Solve the radial Dirichlet problem (dd^c phi)^n = dM with phi(R) = 0:
/// phi(r) = -int_r^R M(rho)^{1/n} drho / rho.
pub fn ma_solve_dirichlet(mass: &CumulativeMass) -> Result<RadialPotential, SolverError> {
    let grid = mass.grid();
    let r = grid.nodes();
    let mv = mass.values();
    let total = mass.total();
    if total <= 0.0 {
        return Ok(RadialPotential::zero(grid.clone()));
    }
    if let Some((exponent, radius)) = atom_exponent(mv, r, total) {
        if exponent < 0.1 {
            return Err(SolverError::SingularMass { exponent, radius });
        }
    }
    let inv_n = 1.0 / grid.n() as f64;
    // The integrand M^{1/n}/rho extends continuously to 0 at the origin for
    // atom-free profiles.
    let g: Vec<f64> = r
        .iter()
        .zip(mv)
        .map(|(&ri, &mi)| if ri == 0.0 { 0.0 } else { mi.max(0.0).powf(inv_n) / ri })
        .collect();
    let m = r.len() - 1;
    let mut phi = vec![0.0; r.len()];
    for i in (0..m).rev() {
        phi[i] = phi[i + 1] - 0.5 * (r[i + 1] - r[i]) * (g[i] + g[i + 1]);
    }
    RadialPotential::new(grid.clone(), phi)
}

/// Normalised cumulative mass of the measure e^{-t phi} mu on [0, R]:
/// M(rho) = int_0^rho e^{-t phi} r^{2n-1} dr / int_0^R e^{-t phi} r^{2n-1} dr.
///
/// The integrand is evaluated with the exponent shifted by min phi so that
/// every exponential stays in (0, 1].
pub fn density_to_mass(phi: &RadialPotential, t: f64) -> Result<CumulativeMass, SolverError> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(SolverError::invalid_input(format!("exponent parameter t must be nonnegative, got {t}")));
    }
    let grid = phi.grid();
    let shift = phi.min_value();
    let spread = t * (0.0 - shift);
    if spread > EXPONENT_CAP {
        return Err(SolverError::OverflowRisk { exponent: spread, cap: EXPONENT_CAP });
    }
    let r = grid.nodes();
    let v = phi.values();
    let pow = (2 * grid.n() - 1) as i32;
    let w: Vec<f64> = r
        .iter()
        .zip(v)
        .map(|(&ri, &vi)| (-t * (vi - shift)).exp() * ri.powi(pow))
        .collect();
    let mut cum = vec![0.0; r.len()];
    for i in 1..r.len() {
        cum[i] = cum[i - 1] + 0.5 * (r[i] - r[i - 1]) * (w[i] + w[i - 1]);
    }
    let total = *cum.last().unwrap();
    if !(total > 0.0) {
        return Err(SolverError::invalid_input("density integrates to zero"));
    }
    for c in cum.iter_mut() {
        *c /= total;
    }
    *cum.last_mut().unwrap() = 1.0;
    CumulativeMass::new(grid.clone(), cum)
}

/// Integral of a nodal function against the normalised volume measure mu,
/// whose radial density is 2n r^{2n-1} / R^{2n}.
pub(crate) fn integrate_dmu(grid: &RadialGrid, g: &[f64]) -> f64 {
    let r = grid.nodes();
    let n = grid.n() as f64;
    let pow = (2 * grid.n() - 1) as i32;
    let norm = 2.0 * n / grid.radius().powi(2 * grid.n() as i32);
    let mut acc = 0.0;
    for i in 1..r.len() {
        let wa = g[i - 1] * r[i - 1].powi(pow);
        let wb = g[i] * r[i].powi(pow);
        acc += 0.5 * (r[i] - r[i - 1]) * (wa + wb);
    }
    norm * acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, radius: f64, nodes: usize) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::uniform(n, radius, nodes).unwrap())
    }

    fn star_radius(n: usize) -> f64 {
        1.0 / ((2 * n + 1) as f64).sqrt()
    }

    #[test]
    fn uniform_grid_rejects_too_few_nodes() {
        assert!(RadialGrid::uniform(1, 1.0, 8).is_err());
        assert!(RadialGrid::uniform(1, 1.0, MIN_NODES).is_ok());
    }

    #[test]
    fn potential_requires_zero_boundary() {
        let g = grid(1, 1.0, 33);
        let bad = vec![-1.0; 33];
        assert!(RadialPotential::new(g.clone(), bad).is_err());
        let mut ok = vec![-1.0; 33];
        for (i, v) in ok.iter_mut().enumerate() {
            *v = (i as f64 / 32.0) - 1.0;
        }
        assert!(RadialPotential::new(g, ok).is_ok());
    }

    #[test]
    fn potential_rejects_decreasing_values() {
        let g = grid(1, 1.0, 33);
        let mut values: Vec<f64> = (0..33).map(|i| (i as f64 / 32.0) - 1.0).collect();
        values[20] = values[19] - 0.1;
        *values.last_mut().unwrap() = 0.0;
        assert!(RadialPotential::new(g, values).is_err());
    }

    #[test]
    fn paraboloid_mass_is_power_law() {
        for n in 1..=3 {
            let g = grid(n, 0.8, 257);
            let phi = RadialPotential::paraboloid(g.clone());
            let mass = ma_apply(&phi).unwrap();
            for (&r, &m) in g.nodes().iter().zip(mass.values()) {
                let expected = (r / 0.8).powi(2 * n as i32);
                assert!((m - expected).abs() < 1.0e-12, "n={n} r={r} m={m} expected={expected}");
            }
        }
    }

    #[test]
    fn fubini_study_mass_matches_closed_form() {
        let g = grid(1, star_radius(1), 2049);
        let phi = RadialPotential::fubini_study(g.clone());
        let mass = ma_apply(&phi).unwrap();
        let mut worst = 0.0_f64;
        for (&r, &m) in g.nodes().iter().zip(mass.values()) {
            let expected = 4.0 * r * r / (1.0 + r * r);
            worst = worst.max((m - expected).abs());
        }
        assert!(worst < 1.0e-6, "sup error {worst}");
        assert!((mass.total() - 1.0).abs() < 1.0e-7);
    }

    #[test]
    fn ma_apply_rejects_non_psh_input() {
        let g = grid(1, 1.0, 65);
        // Ramp that flattens at r = 0.5: the mass profile climbs to ~0.5 and
        // then collapses to 0, a decrease far beyond tolerance.
        let values: Vec<f64> = g.nodes().iter().map(|&r| (r - 0.5).min(0.0)).collect();
        let phi = RadialPotential::new(g, values).unwrap();
        let err = ma_apply(&phi).unwrap_err();
        assert!(matches!(err, SolverError::NonMonotoneMass { .. }));
    }

    #[test]
    fn solve_recovers_paraboloid_from_power_law_mass() {
        for n in 1..=3 {
            let g = grid(n, 1.3, 513);
            let mvals: Vec<f64> = g.nodes().iter().map(|&r| (r / 1.3).powi(2 * n as i32)).collect();
            let mass = CumulativeMass::new(g.clone(), mvals).unwrap();
            let phi = ma_solve_dirichlet(&mass).unwrap();
            let expected = RadialPotential::paraboloid(g.clone());
            let err = phi.sup_diff(&expected).unwrap();
            // M^{1/n}/r is exactly linear for the power law, so only roundoff is left.
            assert!(err < 1.0e-12, "n={n} err={err}");
        }
    }

    #[test]
    fn solve_of_zero_mass_is_zero_potential() {
        let g = grid(2, 1.0, 33);
        let mass = CumulativeMass::new(g.clone(), vec![0.0; 33]).unwrap();
        let phi = ma_solve_dirichlet(&mass).unwrap();
        assert_eq!(phi.values(), RadialPotential::zero(g).values());
    }

    #[test]
    fn solve_detects_origin_atom() {
        let g = grid(1, 1.0, 257);
        // Half the mass sits at the origin.
        let mvals: Vec<f64> = g.nodes().iter().map(|&r| if r == 0.0 { 0.0 } else { 0.5 + 0.5 * (r / 1.0).powi(2) }).collect();
        let mass = CumulativeMass::new(g.clone(), mvals).unwrap();
        let err = ma_solve_dirichlet(&mass).unwrap_err();
        assert!(matches!(err, SolverError::SingularMass { .. }));
    }

    #[test]
    fn density_to_mass_of_zero_potential_is_uniform() {
        for n in 1..=3 {
            let g = grid(n, 0.7, 129);
            let phi = RadialPotential::zero(g.clone());
            let mass = density_to_mass(&phi, 1.0).unwrap();
            for (&r, &m) in g.nodes().iter().zip(mass.values()) {
                let expected = (r / 0.7).powi(2 * n as i32);
                // Trapezoid rule is exact only for n = 1; allow the O(h^2) error.
                assert!((m - expected).abs() < 2.0e-4, "n={n} r={r}");
            }
            assert_eq!(mass.total(), 1.0);
        }
    }

    #[test]
    fn density_to_mass_matches_fubini_study_fixed_point() {
        let g = grid(1, star_radius(1), 2049);
        let phi = RadialPotential::fubini_study(g.clone());
        let mass = density_to_mass(&phi, 1.0).unwrap();
        let mut worst = 0.0_f64;
        for (&r, &m) in g.nodes().iter().zip(mass.values()) {
            let expected = 4.0 * r * r / (1.0 + r * r);
            worst = worst.max((m - expected).abs());
        }
        assert!(worst < 1.0e-6, "sup error {worst}");
    }

    #[test]
    fn density_to_mass_flags_uncontrolled_exponent() {
        let g = grid(1, 1.0, 65);
        let phi = RadialPotential::paraboloid(g.clone()).scaled(4000.0).unwrap();
        let err = density_to_mass(&phi, 1.0).unwrap_err();
        assert!(matches!(err, SolverError::OverflowRisk { .. }));
    }

    #[test]
    fn round_trip_apply_solve_is_second_order() {
        // Reconstruction error of apply(solve(M)) for a smooth generic mass
        // profile must shrink at the trapezoid rate h^2 (slope >= 1.9).
        let mut errors = Vec::new();
        let sizes = [257usize, 513, 1025, 2049];
        for &nodes in &sizes {
            let g = grid(2, 0.9, nodes);
            let phi = RadialPotential::fubini_study(g.clone());
            let mass = density_to_mass(&phi, 1.0).unwrap();
            let back = ma_apply(&ma_solve_dirichlet(&mass).unwrap()).unwrap();
            errors.push(back.sup_diff(&mass).unwrap());
        }
        for k in 1..errors.len() {
            let slope = (errors[k - 1] / errors[k]).ln() / 2.0_f64.ln();
            assert!(slope > 1.9, "refinement slope {slope} between {} and {} nodes", sizes[k - 1], sizes[k]);
        }
    }

    #[test]
    fn sup_diff_requires_matching_grids() {
        let a = RadialPotential::zero(grid(1, 1.0, 33));
        let b = RadialPotential::zero(grid(1, 1.0, 65));
        assert!(matches!(a.sup_diff(&b), Err(SolverError::GridMismatch { .. })));
    }

    #[test]
    fn integrate_dmu_normalises_constants() {
        for n in 1..=3 {
            let g = grid(n, 1.7, 513);
            let ones = vec![1.0; g.len()];
            let total = integrate_dmu(&g, &ones);
            assert!((total - 1.0).abs() < 1.0e-4, "n={n} total={total}");
        }
    }
}
