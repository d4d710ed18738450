//! Piecewise-linear minimization of the anisotropic weighted Rayleigh
//! quotient on triangulated convex polygons.

mod field;
mod mesh;
mod quotient;
mod solver;
mod verify;

pub use field::{gradient_pw, Field2D};
pub use mesh::{triangulate, TriMesh, MAX_TRIANGLES};
pub use quotient::{constraint_shift_nd, rayleigh_nd, RayleighNd};
pub use solver::{minimize_nd, DomainSpec, Scenario, SolveResult, SolverSettings};
pub use verify::{verify_bound, SolverMetadata, VerificationReport, SOLVER_SLACK, UNDER_RESOLVED_H_REL};
