//! Application errors and their process exit codes.

use crate::config::ConfigError;
use crate::msh::MshError;
use equistress_core::elasticity::FemError;
use equistress_core::enhanced_tractions::EnhancedError;
use equistress_core::linalg::LinalgError;
use equistress_core::local_solver::LocalError;
use equistress_core::standard_tractions::TractionError;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const GENERIC: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const MESH: i32 = 3;
    pub const INFEASIBLE: i32 = 4;
    pub const RANK: i32 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("mesh: {0}")]
    Msh(#[from] MshError),
    #[error(transparent)]
    Core(#[from] equistress_core::Error),
    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

fn linalg_code(e: &LinalgError) -> i32 {
    match e {
        LinalgError::InfeasibleConstraints { .. } => exit::INFEASIBLE,
        LinalgError::NotPositiveDefinite { .. } | LinalgError::ZeroPivot(_) | LinalgError::RankDeficient { .. } => exit::RANK,
        LinalgError::Dimension(_) => exit::GENERIC,
    }
}

fn fem_code(e: &FemError) -> i32 {
    match e {
        FemError::RigidMode { .. } => exit::RANK,
        FemError::Mesh(_) => exit::MESH,
        FemError::NegativeReferenceError(_) => exit::GENERIC,
        _ => exit::CONFIG,
    }
}

fn core_code(e: &equistress_core::Error) -> i32 {
    use equistress_core::Error as E;
    match e.root() {
        E::Mesh(_) => exit::MESH,
        E::Linalg(l) => linalg_code(l),
        E::Fem(f) => fem_code(f),
        E::Local(LocalError::Incompatible { .. }) => exit::INFEASIBLE,
        E::Local(LocalError::Singular { .. }) => exit::RANK,
        E::Local(LocalError::UnsupportedExtraDegree(_)) => exit::CONFIG,
        E::Traction(TractionError::Patch { source, .. }) => linalg_code(source),
        E::Traction(TractionError::Fem(f)) => fem_code(f),
        E::Traction(TractionError::MissingPatch(_)) => exit::GENERIC,
        E::Enhanced(EnhancedError::Infeasible { .. }) => exit::INFEASIBLE,
        E::Enhanced(EnhancedError::Solve { source, .. }) => linalg_code(source),
        E::Enhanced(EnhancedError::InvalidParameter(_) | EnhancedError::UnsupportedDegree(_)) => exit::CONFIG,
        E::Enhanced(EnhancedError::Fem(f)) => fem_code(f),
        E::Enhanced(EnhancedError::Local(LocalError::Incompatible { .. })) => exit::INFEASIBLE,
        E::Enhanced(EnhancedError::Local(LocalError::Singular { .. })) => exit::RANK,
        E::Enhanced(_) | E::Estimate(_) | E::Phase { .. } => exit::GENERIC,
    }
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) | AppError::Usage(_) => exit::CONFIG,
            AppError::Msh(_) => exit::MESH,
            AppError::Core(e) => core_code(e),
            AppError::Output { .. } => exit::GENERIC,
        }
    }
}
