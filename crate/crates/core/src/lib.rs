//! cyclotome: an exact-arithmetic workbench for the homological algebra of
//! small associative algebras.
//!
//! The crate computes Hochschild, cyclic, periodic and negative cyclic
//! homology of finite-dimensional (optionally graded or DG) algebras over
//! exact coefficient rings, the Hodge filtration and its spectral sequence,
//! filtered Dieudonné modules with syntomic cohomology, quasi-Frobenius
//! maps with the resulting Cartier comparison on smash products, and the
//! span calculus of Burnside categories with tables of marks and Mackey
//! functor checks.
//!
//! Everything is computed on explicit finite windows. Values that a window
//! truncation could distort are flagged, never silently reported as exact.

pub mod error;
pub mod ring;
pub mod sparse;
pub mod solve;
pub mod snf;
pub mod descriptor;
pub mod complex;
pub mod algebra;
pub mod cyclic;
pub mod hodge;

pub use descriptor::ModuleDescriptor;
pub use error::{Error, Result};
pub use ring::{Elem, Ring};
pub use sparse::SparseMatrix;
