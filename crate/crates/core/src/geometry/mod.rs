//! Convex planar geometry: polygons, quadrature, weights and slicing.

pub mod polygon;
pub mod quadrature;
pub mod slicing;
pub mod svg;
pub mod weight;

pub use polygon::{ConvexPolygon, Line};
pub use quadrature::{integrate, QuadratureOrder};
pub use slicing::{
    area_bisecting_line, slice_decomposition, zero_mean_bisection, zero_p_mean_shift, PMeanField,
    SlicePiece, SlicingTolerances,
};
pub use weight::Weight;
