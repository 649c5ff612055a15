//! Planar geometry kernel: exact predicates, Delaunay triangulation and
//! polygon utilities used by the tessellation layer.

pub mod delaunay;
pub mod polygon;
pub mod predicates;
