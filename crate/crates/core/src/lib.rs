//! Guaranteed upper bounds on the energy-norm discretization error of linear
//! elasticity finite element solutions.
//!
//! The bound is the constitutive relation error between the P1 displacement
//! solution and a statically admissible stress field rebuilt element by
//! element from equilibrated inter-element tractions. Tractions come either
//! from vertex star-patch least-squares problems (the standard construction)
//! or, on a selected set of elements, from a local minimization of the
//! complementary energy under equilibrium constraints (the enhanced
//! construction).
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration
//! and the command-line front end live in the companion `equistress` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod cases;
pub mod elasticity;
pub mod enhanced_tractions;
pub mod estimator;
pub mod linalg;
pub mod local_solver;
pub mod mesh;
pub mod pipeline;
pub mod quadrature;
pub mod standard_tractions;

mod math;

pub use elasticity::{FeSolution, Material, ProblemDef, SymTensor};
pub use estimator::{AdmissibleStress, ErrorReport};
pub use mesh::{Dim, Mesh, Topology};
pub use standard_tractions::TractionField;

use alloc::string::String;

/// Top-level error type. Each variant wraps the error of one pipeline stage.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Mesh(#[from] mesh::MeshError),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
    #[error(transparent)]
    Fem(#[from] elasticity::FemError),
    #[error(transparent)]
    Local(#[from] local_solver::LocalError),
    #[error(transparent)]
    Traction(#[from] standard_tractions::TractionError),
    #[error(transparent)]
    Enhanced(#[from] enhanced_tractions::EnhancedError),
    #[error(transparent)]
    Estimate(#[from] estimator::EstimateError),
    #[error("{phase}: {source}")]
    Phase {
        phase: String,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
}

impl Error {
    /// Wraps the error with the name of the pipeline phase that produced it.
    pub fn in_phase(self, phase: &str) -> Self {
        Error::Phase {
            phase: String::from(phase),
            source: alloc::boxed::Box::new(self),
        }
    }

    /// Innermost error, skipping phase annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::Phase { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
