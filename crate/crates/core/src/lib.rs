//! Construction and verification of minimal-capacity continua realised as
//! inverse polynomial images `T^{-1}([-1, 1])`.

pub mod analysis;
pub mod catalog;
pub mod connectivity;
pub mod factor;
pub mod poly;
pub mod solver;
pub mod tracer;

pub use num_complex::Complex64;
pub use poly::{cluster_roots, dist_to_interval, ComplexPoly, PolyError, RootCluster};
