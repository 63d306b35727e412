//! Interior-penalty discontinuous Galerkin solver for second-order elliptic
//! problems on multi-patch NURBS surfaces.
//!
//! The crate is organised along the pipeline:
//! [`splines`] (B-spline bases) -> [`geometry`] (NURBS patches, multi-patch
//! topology, surface calculus) -> [`quadrature`] (element, edge and merged
//! interface rules) -> [`assembly`] (discontinuous space and dG forms) ->
//! [`solver`] (CSR matrices, preconditioned CG) -> [`norms`] / [`bench`]
//! (error norms, benchmarks, convergence studies).

pub mod assembly;
pub mod bench;
pub mod files;
pub mod geometry;
pub mod norms;
pub mod quadrature;
pub mod solver;
pub mod verify;
pub mod splines;
