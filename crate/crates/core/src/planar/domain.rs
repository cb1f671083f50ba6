//! Planar domains Omega = {rho < 0} discretised on a uniform grid, with
//! boundary-edge intersection fractions for second-order stencils and cell
//! quadrature weights accurate to O(h^2) up to the curved boundary.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::SolverError;

/// Smallest admissible number of grid cells across the characteristic extent.
pub const MIN_GRID_SIZE: usize = 16;

/// Boundary arms are clamped below at this fraction of h to keep stencil
/// coefficients finite.
pub const MIN_ARM: f64 = 1.0e-9;

const BISECTION_STEPS: usize = 48;

/// Shape description; `rho` is negative exactly inside the domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum DomainSpec {
    Disc {
        #[serde(rename = "R")]
        r: f64,
    },
    Ellipse {
        a: f64,
        b: f64,
    },
    /// Axis-aligned rectangle of side lengths a x b centred at the origin.
    Rect {
        a: f64,
        b: f64,
    },
    /// rho(x, y) = sum of c * x^i * y^j terms over `expr`, on the given
    /// bounding box [xmin, xmax, ymin, ymax].
    Implicit {
        expr: Vec<(u32, u32, f64)>,
        bbox: [f64; 4],
    },
}

impl DomainSpec {
    pub fn disc(r: f64) -> Self {
        DomainSpec::Disc { r }
    }

    pub fn ellipse(a: f64, b: f64) -> Self {
        DomainSpec::Ellipse { a, b }
    }

    pub fn rect(a: f64, b: f64) -> Self {
        DomainSpec::Rect { a, b }
    }

    fn validate(&self) -> Result<(), SolverError> {
        let ok = match self {
            DomainSpec::Disc { r } => r.is_finite() && *r > 0.0,
            DomainSpec::Ellipse { a, b } | DomainSpec::Rect { a, b } => {
                a.is_finite() && b.is_finite() && *a > 0.0 && *b > 0.0
            }
            DomainSpec::Implicit { expr, bbox } => {
                !expr.is_empty()
                    && expr.iter().all(|t| t.2.is_finite())
                    && bbox.iter().all(|v| v.is_finite())
                    && bbox[0] < bbox[1]
                    && bbox[2] < bbox[3]
            }
        };
        if ok {
            Ok(())
        } else {
            Err(SolverError::InvalidDomain { context: format!("invalid shape parameters: {self:?}") })
        }
    }

    /// Defining function, negative inside.
    pub fn rho(&self, x: f64, y: f64) -> f64 {
        match self {
            DomainSpec::Disc { r } => x * x + y * y - r * r,
            DomainSpec::Ellipse { a, b } => (x / a) * (x / a) + (y / b) * (y / b) - 1.0,
            DomainSpec::Rect { a, b } => (x.abs() - 0.5 * a).max(y.abs() - 0.5 * b),
            DomainSpec::Implicit { expr, .. } => expr
                .iter()
                .map(|&(i, j, c)| c * x.powi(i as i32) * y.powi(j as i32))
                .sum(),
        }
    }

    /// Bounding box [xmin, xmax, ymin, ymax] of the domain.
    fn bbox(&self) -> [f64; 4] {
        match self {
            DomainSpec::Disc { r } => [-r, *r, -r, *r],
            DomainSpec::Ellipse { a, b } => [-a, *a, -b, *b],
            DomainSpec::Rect { a, b } => [-0.5 * a, 0.5 * a, -0.5 * b, 0.5 * b],
            DomainSpec::Implicit { bbox, .. } => *bbox,
        }
    }

    /// Characteristic half-extent defining the grid spacing h = extent/gridSize.
    pub fn char_extent(&self) -> f64 {
        let [xmin, xmax, ymin, ymax] = self.bbox();
        (0.5 * (xmax - xmin)).max(0.5 * (ymax - ymin))
    }
}

/// Fraction along the segment p0 -> p1 at which rho crosses 0; requires
/// rho(p0) < 0 <= rho(p1).
fn crossing_fraction(spec: &DomainSpec, p0: (f64, f64), p1: (f64, f64)) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let x = p0.0 + mid * (p1.0 - p0.0);
        let y = p0.1 + mid * (p1.1 - p0.1);
        if spec.rho(x, y) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi.clamp(MIN_ARM, 1.0)
}

/// Discretised domain: mask, boundary arms, and quadrature weights on a
/// uniform grid padded two cells beyond the bounding box.
#[derive(Debug, Clone)]
pub struct PlanarDomain {
    spec: DomainSpec,
    h: f64,
    nx: usize,
    ny: usize,
    x0: f64,
    y0: f64,
    interior: Vec<(usize, usize)>,
    /// Per interior node, the interior indices of the E, W, N, S neighbors
    /// (-1 when the boundary intervenes).
    neighbors: Vec<[i64; 4]>,
    /// Per interior node, the distance fractions (of h) to the E, W, N, S
    /// neighbors or boundary crossings.
    arms: Vec<[f64; 4]>,
    quad_weights: Vec<f64>,
    boundary_weight: f64,
    area: f64,
}

impl PlanarDomain {
    /// Discretise `spec` with spacing h = char_extent / grid_size.
    pub fn build(spec: DomainSpec, grid_size: usize) -> Result<Arc<Self>, SolverError> {
        spec.validate()?;
        if grid_size < MIN_GRID_SIZE {
            return Err(SolverError::invalid_input(format!(
                "grid size must be at least {MIN_GRID_SIZE}, got {grid_size}"
            )));
        }
        let h = spec.char_extent() / grid_size as f64;
        let [xmin, xmax, ymin, ymax] = spec.bbox();
        let x0 = xmin - 2.0 * h;
        let y0 = ymin - 2.0 * h;
        let nx = ((xmax + 2.0 * h - x0) / h).ceil() as usize + 1;
        let ny = ((ymax + 2.0 * h - y0) / h).ceil() as usize + 1;
        let at = |i: usize, j: usize| (x0 + i as f64 * h, y0 + j as f64 * h);

        let mut mask = vec![false; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let (x, y) = at(i, j);
                mask[j * nx + i] = spec.rho(x, y) < 0.0;
            }
        }
        let mut interior = Vec::new();
        let mut node_of = vec![-1_i64; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                if mask[j * nx + i] {
                    if i == 0 || j == 0 || i == nx - 1 || j == ny - 1 {
                        return Err(SolverError::InvalidDomain {
                            context: "domain reaches the padded bounding box".to_string(),
                        });
                    }
                    node_of[j * nx + i] = interior.len() as i64;
                    interior.push((i, j));
                }
            }
        }
        if interior.is_empty() {
            return Err(SolverError::InvalidDomain {
                context: "no grid node falls inside the domain".to_string(),
            });
        }
        // 4-connectivity sweep from the first interior node.
        let mut seen = vec![false; interior.len()];
        let mut queue = vec![0usize];
        seen[0] = true;
        while let Some(k) = queue.pop() {
            let (i, j) = interior[k];
            for (di, dj) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
                let ni = (i as i64 + di) as usize;
                let nj = (j as i64 + dj) as usize;
                let id = node_of[nj * nx + ni];
                if id >= 0 && !seen[id as usize] {
                    seen[id as usize] = true;
                    queue.push(id as usize);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(SolverError::InvalidDomain {
                context: "domain is not 4-connected at this resolution".to_string(),
            });
        }

        let mut neighbors = Vec::with_capacity(interior.len());
        let mut arms = Vec::with_capacity(interior.len());
        for &(i, j) in &interior {
            let p = at(i, j);
            let mut nb = [-1_i64; 4];
            let mut ar = [1.0_f64; 4];
            let dirs = [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)];
            for (d, (di, dj)) in dirs.iter().enumerate() {
                let ni = (i as i64 + di) as usize;
                let nj = (j as i64 + dj) as usize;
                let id = node_of[nj * nx + ni];
                if id >= 0 {
                    nb[d] = id;
                } else {
                    ar[d] = crossing_fraction(&spec, p, at(ni, nj));
                }
            }
            neighbors.push(nb);
            arms.push(ar);
        }

        let (quad_weights, boundary_weight) =
            cell_quadrature(&spec, nx, ny, h, x0, y0, &mask, &node_of, interior.len());
        let area = quad_weights.iter().sum::<f64>() + boundary_weight;
        Ok(Arc::new(PlanarDomain {
            spec,
            h,
            nx,
            ny,
            x0,
            y0,
            interior,
            neighbors,
            arms,
            quad_weights,
            boundary_weight,
            area,
        }))
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn interior_count(&self) -> usize {
        self.interior.len()
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    /// Grid position of interior node k.
    pub fn position(&self, k: usize) -> (f64, f64) {
        let (i, j) = self.interior[k];
        (self.x0 + i as f64 * self.h, self.y0 + j as f64 * self.h)
    }

    pub(crate) fn neighbors(&self) -> &[[i64; 4]] {
        &self.neighbors
    }

    pub(crate) fn arms(&self) -> &[[f64; 4]] {
        &self.arms
    }

    pub(crate) fn grid_shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    /// Integral over Omega of a field given by `values` at interior nodes and
    /// the constant `boundary_value` on the boundary itself.
    pub fn integrate(&self, values: &[f64], boundary_value: f64) -> Result<f64, SolverError> {
        if values.len() != self.interior.len() {
            return Err(SolverError::GridMismatch {
                context: format!(
                    "field has {} values for {} interior nodes",
                    values.len(),
                    self.interior.len()
                ),
            });
        }
        let mut acc = self.boundary_weight * boundary_value;
        for (w, v) in self.quad_weights.iter().zip(values) {
            acc += w * v;
        }
        Ok(acc)
    }
}

/// Marching-squares cell quadrature: every cell's inside region is clipped to
/// a polygon whose corner vertices carry node values and whose edge crossings
/// carry the boundary value; the cell integral is area times the vertex mean.
#[allow(clippy::too_many_arguments)]
fn cell_quadrature(
    spec: &DomainSpec,
    nx: usize,
    ny: usize,
    h: f64,
    x0: f64,
    y0: f64,
    mask: &[bool],
    node_of: &[i64],
    interior_count: usize,
) -> (Vec<f64>, f64) {
    let mut weights = vec![0.0_f64; interior_count];
    let mut boundary_weight = 0.0_f64;
    let at = |i: usize, j: usize| (x0 + i as f64 * h, y0 + j as f64 * h);
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            // Counter-clockwise corners of the cell.
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let inside: Vec<bool> =
                corners.iter().map(|&(ci, cj)| mask[cj * nx + ci]).collect();
            if inside.iter().all(|&b| !b) {
                continue;
            }
            // Polygon vertices: (x, y, interior index or -1 for boundary).
            let mut poly: Vec<(f64, f64, i64)> = Vec::with_capacity(6);
            for c in 0..4 {
                let d = (c + 1) % 4;
                let (ci, cj) = corners[c];
                let (dxi, dyj) = corners[d];
                if inside[c] {
                    let (x, y) = at(ci, cj);
                    poly.push((x, y, node_of[cj * nx + ci]));
                }
                if inside[c] != inside[d] {
                    let (p_in, p_out) = if inside[c] {
                        (at(ci, cj), at(dxi, dyj))
                    } else {
                        (at(dxi, dyj), at(ci, cj))
                    };
                    let f = crossing_fraction(spec, p_in, p_out);
                    let x = p_in.0 + f * (p_out.0 - p_in.0);
                    let y = p_in.1 + f * (p_out.1 - p_in.1);
                    poly.push((x, y, -1));
                }
            }
            if poly.len() < 3 {
                continue;
            }
            let mut area2 = 0.0;
            for k in 0..poly.len() {
                let (ax, ay, _) = poly[k];
                let (bx, by, _) = poly[(k + 1) % poly.len()];
                area2 += ax * by - bx * ay;
            }
            let area = 0.5 * area2.abs();
            if area == 0.0 {
                continue;
            }
            let share = area / poly.len() as f64;
            for &(_, _, id) in &poly {
                if id >= 0 {
                    weights[id as usize] += share;
                } else {
                    boundary_weight += share;
                }
            }
        }
    }
    (weights, boundary_weight)
}

/// Field on a planar domain: values at interior nodes, implicit 0 on the
/// boundary.
#[derive(Debug, Clone)]
pub struct GridPotential2D {
    domain: Arc<PlanarDomain>,
    values: Vec<f64>,
}

impl GridPotential2D {
    pub fn new(domain: Arc<PlanarDomain>, values: Vec<f64>) -> Result<Self, SolverError> {
        if values.len() != domain.interior_count() {
            return Err(SolverError::GridMismatch {
                context: format!(
                    "potential has {} values for {} interior nodes",
                    values.len(),
                    domain.interior_count()
                ),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::invalid_input("potential values must be finite"));
        }
        Ok(GridPotential2D { domain, values })
    }

    pub fn zero(domain: Arc<PlanarDomain>) -> Self {
        let values = vec![0.0; domain.interior_count()];
        GridPotential2D { domain, values }
    }

    pub fn domain(&self) -> &Arc<PlanarDomain> {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn sup_diff(&self, other: &GridPotential2D) -> Result<f64, SolverError> {
        if !Arc::ptr_eq(&self.domain, &other.domain) {
            return Err(SolverError::GridMismatch {
                context: "sup_diff of potentials on different domains".to_string(),
            });
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs())))
    }
}
