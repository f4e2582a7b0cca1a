//! File formats, case configuration, reports and batch runs around
//! [`equistress_core`].

pub mod config;
pub mod error;
pub mod msh;
pub mod parallel;
pub mod report;
pub mod run;
pub mod vtk;

pub use config::CaseConfig;
pub use error::AppError;
