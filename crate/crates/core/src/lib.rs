//! Numerical verification of sharp lower bounds for weighted anisotropic
//! Poincaré constants on convex planar domains.
//!
//! The crate is organised bottom-up:
//!
//! - [`anisotropy`]: positively 1-homogeneous gauges, their polars and bipolars.
//! - [`geometry`]: convex polygons, quadrature, diameters, Wulff shapes, weights
//!   and the zero-mean slicing decomposition.
//! - [`wirtinger`]: π_p and the weighted one-dimensional Wirtinger constant.
//! - [`eigen`]: meshing and minimisation of the anisotropic Rayleigh quotient,
//!   plus the bound report.
//! - [`config`], [`suite`], [`emit`]: scenario files, batch runs and output.

pub mod anisotropy;
pub mod config;
pub mod eigen;
pub mod emit;
pub mod error;
pub mod geometry;
pub mod optimize;
pub mod suite;
pub mod wirtinger;

pub use anisotropy::{Anisotropy, DirectionGrid};
pub use error::{Error, Result};
pub use geometry::polygon::ConvexPolygon;
pub use geometry::weight::Weight;

/// Plane vectors and points.
pub type Vec2 = nalgebra::Vector2<f64>;
