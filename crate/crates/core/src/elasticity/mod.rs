//! P1 displacement finite elements for isotropic linear elasticity.

mod fem;
mod material;
mod norms;
mod problem;

pub use fem::{
    assemble_solve, load_scale, nodal_loads, nodal_residual, p1_gradient, p1_stiffness, solution_from_displacement,
    FeSolution,
};
pub use material::{Material, MaterialMode, SymTensor};
pub use norms::{
    energy_norm_sigma, energy_norm_u, energy_sigma_squared_with, energy_u_squared, prolongate, reference_error,
    ReferenceError,
};
pub use problem::{BoundaryData, CompBc, DirichletBc, DirichletTarget, FacetBc, NeumannBc, ProblemDef};

use crate::linalg::LinalgError;
use crate::math::Vec3;
use crate::mesh::MeshError;
use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FemError {
    #[error("invalid material: E = {young_modulus}, nu = {poisson_ratio}")]
    InvalidMaterial { young_modulus: f64, poisson_ratio: f64 },
    #[error("material mode does not match the mesh dimension")]
    DimensionMismatch,
    #[error("only degree 1 is supported, got {0}")]
    UnsupportedDegree(usize),
    #[error("no Dirichlet condition: rigid body modes are not removed")]
    NoDirichlet,
    #[error("boundary label `{0}` does not exist in the mesh")]
    UnknownLabel(String),
    #[error("label `{0}` carries both Dirichlet and Neumann conditions")]
    OverlappingConditions(String),
    #[error("conflicting Dirichlet values at node {node}, component {component}")]
    ConflictingDirichlet { node: usize, component: usize },
    #[error("Dirichlet point {0:?} is not a mesh node")]
    PointNotOnMesh(Vec3),
    #[error("stiffness matrix is singular near node {node}: insufficient Dirichlet constraints")]
    RigidMode { node: usize },
    #[error("reference error radicand is negative ({0:e}): solutions are not nested")]
    NegativeReferenceError(f64),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Solver(#[from] LinalgError),
}
