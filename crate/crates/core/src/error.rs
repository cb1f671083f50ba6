/// Errors shared by the radial, planar, and geodesic solvers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("grid mismatch: {context}")]
    GridMismatch { context: String },

    #[error("invalid input: {context}")]
    InvalidInput { context: String },

    #[error("mass profile decreases at node {index} by {drop:.3e} (input not plurisubharmonic)")]
    NonMonotoneMass { index: usize, drop: f64 },

    #[error("mass profile carries an atom at the origin (exponent estimate {exponent:.3e} at r = {radius:.6e})")]
    SingularMass { exponent: f64, radius: f64 },

    #[error("exponent {exponent:.3e} exceeds the cap {cap:.1}; rescale the potential before exponentiating")]
    OverflowRisk { exponent: f64, cap: f64 },

    #[error("non-convex log-radius profile: convexity violated by {violation:.3e} at node {index}")]
    NonConvexProfile { index: usize, violation: f64 },

    #[error("iteration diverged after {iterations} steps: {reason}")]
    Diverged { iterations: usize, reason: String },

    #[error("linear solver stalled at relative residual {residual:.3e} after {sweeps} sweeps")]
    SolverStall { residual: f64, sweeps: usize },

    #[error("metric weight is not positive: min Delta phi = {min_weight:.3e}")]
    NotPositiveMetric { min_weight: f64 },

    #[error("invalid domain: {context}")]
    InvalidDomain { context: String },
}

impl SolverError {
    pub fn invalid_input(context: impl Into<String>) -> Self {
        SolverError::InvalidInput { context: context.into() }
    }
}
