//! Finite-scale verification workbench for twisted C*-dynamical systems:
//! systems and their perturbations, equivariant representations on concrete
//! carriers, Fourier–Stieltjes coefficient maps with a positive-definiteness
//! decision procedure, transport maps between equivalent systems, Morita
//! equivalence machinery, and amenability-witness transfer.
//!
//! Everything is exact finite-dimensional linear algebra over ℂ with
//! explicit tolerances; all values are immutable after construction and all
//! operations are pure functions.

// Indexed loops mirror the table-based math: the indices are group elements
// and coordinate positions fed back into multiplication tables.
#![allow(clippy::needless_range_loop)]

pub mod algebra;
pub mod amenability;
pub mod bundle;
pub mod equivariant;
pub mod fourier;
pub mod gallery;
pub mod group;
pub mod morita;
pub mod random;
pub mod system;
pub mod transport;

pub use algebra::{AlgElement, C64, CMatrix, CStarAlgebra, CVector, ScalarTolerance};
pub use group::FiniteGroup;
pub use system::TwistedSystem;
