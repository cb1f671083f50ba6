//! Solvers and diagnostics for the complex Monge-Ampere equation
//! (dd^c phi)^n = e^{-t phi} mu / int e^{-t phi} dmu with zero Dirichlet data.
//!
//! On balls the rotation-invariant problem reduces exactly to an ODE in the
//! radius ([`radial`]), driven to its fixed point by inverse iteration
//! ([`iteration`]) and scored by the energy and free-energy functionals with
//! their inequality checks ([`functionals`]). Geodesics between potentials
//! are computed by Legendre duality in logarithmic coordinates
//! ([`geodesics`]). On general planar domains the n = 1 case becomes a
//! Liouville equation solved on a grid with curved-boundary stencils,
//! including the linearized-stability eigenvalue ([`planar`]). [`io`] holds
//! the CSV formats shared by the command-line tools.

pub mod error;
pub mod functionals;
pub mod geodesics;
pub mod io;
pub mod iteration;
pub mod planar;
pub mod radial;

pub use error::SolverError;
pub use functionals::{
    beta_constants, beta_default, bishop_bound, capacity_sublevel_check, energy, f_functional,
    f_value, log_int_exp, mt_check, mt_solvable_bound, relative_entropy, volume_capacity_check,
    volume_capacity_fit, FunctionalReport, InequalityVerdict,
};
pub use geodesics::{
    check_energy_affine, check_f_concave, geodesic_path, legendre, uniqueness_experiment,
    DualProfile, GeodesicPath, SLogProfile, UniquenessReport,
};
pub use iteration::{
    ricci_iterate, ricci_step, summarize, sweep_t_max, t_sweep, IterationTrace, RunSummary,
    SweepEntry, TraceStep,
};
pub use io::{
    field_from_csv, field_to_csv, path_from_csv, path_to_csv, potential_from_csv,
    potential_to_csv, sweep_from_csv, sweep_to_csv, trace_steps_from_csv, trace_to_csv,
};
pub use planar::{
    lambda1, laplacian_apply, liouville_iterate, planar_energy, planar_f_value,
    planar_log_int_exp, poisson_solve, DomainSpec, GridPotential2D, PlanarDomain,
};
pub use radial::{
    density_to_mass, ma_apply, ma_solve_dirichlet, CumulativeMass, RadialGrid, RadialPotential,
};
