//! Planar backend: grid domains with curved boundaries, a Dirichlet Poisson
//! solver, the Liouville inverse iteration, and the linearized-stability
//! eigenvalue.

pub mod domain;
pub mod liouville;
pub mod poisson;
pub mod spectral;

pub use domain::{DomainSpec, GridPotential2D, PlanarDomain, MIN_GRID_SIZE};
pub use liouville::{liouville_iterate, planar_energy, planar_f_value, planar_log_int_exp};
pub use poisson::{laplacian_apply, poisson_solve, RESIDUAL_TOLERANCE};
pub use spectral::{lambda1, EIGEN_TOLERANCE};
