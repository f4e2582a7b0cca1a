//! Element-level Neumann problems of degree `p + k` and their linear
//! traction-to-stress operators.

mod bernstein;
mod loads;
mod space;

pub use loads::{balancing_body_force, simplex_moments, BalancedLoad, BodyLoad, ElementTraction, SimplexMoments};
pub use space::{
    solve_local_neumann, traction_to_stress_operator, ElementLocalSpace, ElementStress, LocalSolution,
    TractionOperator, COMPATIBILITY_TOL,
};

/// Default extra degree of the local displacement space.
pub const DEFAULT_EXTRA_DEGREE: usize = 3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LocalError {
    #[error("element {element}: local Neumann data is not self-equilibrated (relative residual {residual:e})")]
    Incompatible { element: usize, residual: f64 },
    #[error("element {element}: local stiffness could not be factored")]
    Singular { element: usize },
    #[error("extra degree must be 1, 2 or 3, got {0}")]
    UnsupportedExtraDegree(usize),
}

#[cfg(test)]
mod tests;
