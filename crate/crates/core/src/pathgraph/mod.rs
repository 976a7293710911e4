//! Path graph: shading points from many paths share radiance samples within
//! spatial clusters, and the refined radiance is propagated back along each
//! path to the camera.

pub mod aggregate;
pub mod cluster;
pub mod graph;
pub mod solve;
pub mod synthetic;

pub use aggregate::{aggregate_direct, aggregate_indirect, compute_marginals, Marginals};
pub use cluster::cluster_points;
pub use graph::{Cluster, PathEntry, PathGraph, NO_EDGE};
pub use solve::{propagate, relative_change, solve, splat_output, DirectMode, Solution, SolveConfig, Solver};
