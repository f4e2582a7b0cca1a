//! Bundled benchmark problems.

use crate::elasticity::{FemError, Material, ProblemDef};
use crate::mesh::{self, Dim, Grid, Mesh, MeshError, PlateHole2d, PlateHole3d};
use alloc::string::String;

/// A mesh together with the boundary value problem posed on it.
#[derive(Debug, Clone)]
pub struct Case {
    pub name: String,
    pub mesh: Mesh,
    pub problem: ProblemDef,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CaseError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Fem(#[from] FemError),
}

fn material(dim: Dim) -> Result<Material, FemError> {
    Material::for_dim(dim, 1.0, 0.3)
}

/// Unit square under uniform tension `σ_xx = 1` on an `n × n` grid.
pub fn uniform_tension(n: usize) -> Result<Case, CaseError> {
    let mesh = mesh::generate_structured(&Grid::rectangle([0.0, 0.0], [1.0, 1.0], n, n))?;
    let problem = ProblemDef::new(material(Dim::Two)?)
        .with_dirichlet("left", [Some(0.0), None, None])
        .with_point_dirichlet([0.0, 0.0, 0.0], [None, Some(0.0), None])
        .with_neumann("right", [1.0, 0.0, 0.0]);
    Ok(Case { name: String::from("uniform_tension"), mesh, problem })
}

/// Quarter of a square plate with a central hole under remote tension.
pub fn plate_hole_2d() -> Result<Case, CaseError> {
    plate_hole_2d_with(&PlateHole2d::default())
}

pub fn plate_hole_2d_with(p: &PlateHole2d) -> Result<Case, CaseError> {
    let mesh = mesh::plate_with_hole_2d(p)?;
    let problem = plate_problem(Dim::Two)?;
    Ok(Case { name: String::from("plate_hole_2d"), mesh, problem })
}

fn plate_problem(dim: Dim) -> Result<ProblemDef, FemError> {
    let mut p = ProblemDef::new(material(dim)?)
        .with_dirichlet("left", [Some(0.0), None, None])
        .with_dirichlet("bottom", [None, Some(0.0), None])
        .with_neumann("right", [1.0, 0.0, 0.0]);
    if dim == Dim::Three {
        p = p.with_dirichlet("back", [None, None, Some(0.0)]);
    }
    Ok(p)
}

/// L-shaped domain clamped at the bottom with a shear load on the right edge.
pub fn l_shape(n: usize) -> Result<Case, CaseError> {
    let mesh = mesh::l_shape(n)?;
    let problem = ProblemDef::new(material(Dim::Two)?)
        .with_dirichlet("bottom", [Some(0.0), Some(0.0), None])
        .with_neumann("right", [0.0, 1.0, 0.0]);
    Ok(Case { name: String::from("l_shape"), mesh, problem })
}

/// One-eighth of a thick plate with a hole, symmetric on three planes.
pub fn plate_hole_3d() -> Result<Case, CaseError> {
    let mesh = mesh::plate_with_hole_3d(&PlateHole3d::default())?;
    let problem = plate_problem(Dim::Three)?;
    Ok(Case { name: String::from("plate_hole_3d"), mesh, problem })
}
