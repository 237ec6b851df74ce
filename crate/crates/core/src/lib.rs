//! Hybrid DGSEM / finite-volume subcell solver for the compressible Euler
//! equations on structured Cartesian meshes, with an algebraic wall model and
//! parallel-performance bookkeeping.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod basis;
pub mod blending;
pub mod cases;
pub mod config;
pub mod error;
pub mod field;
pub mod mesh;
pub mod operator;
pub mod output;
pub mod perf;
pub mod physics;
pub mod solver;
pub mod timestep;
pub mod wall;

pub use basis::SpectralBasis;
pub use cases::{run_case, RunOutput};
pub use config::{parse_config, render, CaseId, RunConfig};
pub use blending::{BlendingParams, BlendingState, IndicatorVariable};
pub use error::{BasisError, PerfError, PhysicsError, SolverError, WallModelError};
pub use field::ConservativeField;
pub use mesh::CartesianMesh;
pub use operator::SpatialOperator;
pub use perf::{compute_pid, speedup_table, PerfRecord};
pub use physics::{Axis, Conserved, Gas, Primitive};
pub use solver::{BlendingMode, HybridSolver, StepDiagnostics};
