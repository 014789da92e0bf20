//! Mixed-membership stochastic block models: simulation, spectral estimation
//! of memberships and connectivity, identifiability checks and evaluation.

pub mod error;
pub mod estimator;
pub mod experiment;
pub mod graph;
pub mod identifiability;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod sampling;
pub mod spectral;

pub use nalgebra;
pub use error::{Error, Result};
pub use graph::{SparseSymmetricGraph, SymmetricOperator};
pub use model::{DenseSymmetricMatrix, MembershipMatrix, ModelParams};
