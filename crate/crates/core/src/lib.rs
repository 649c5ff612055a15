//! Simulation engine for Voronoi-cell driven thinning and
//! thinning-replacement point processes.
//!
//! At every step one generator is chosen with probability proportional to
//! a selection function of its Voronoi cell (cell measure or number of
//! Voronoi neighbours), removed, and in replacement mode substituted by a
//! fresh draw from the sampling measure.

pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod process;
pub mod rng;
pub mod selection;
pub mod space;
pub mod statistics;
pub mod tessellation;

pub use error::{Error, Result};
pub use process::{ChainState, InitKind, Mode, ProcessParams, StepEvent, Trajectory};
pub use selection::SelectionSpec;
pub use space::{DensityGrid, Point, Space, SpaceKind};
pub use tessellation::{Configuration, Tessellation};

#[cfg(feature = "parallel")]
pub(crate) fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}
