//! Elasticity of two blocks joined across a thin layer of elastic rods, and the
//! spring-interface model that replaces the layer when the rods are thin.
//!
//! The crate is organised around one pipeline:
//!
//! * [`scaling`] fixes the geometry of the rod layer (rod radius `r`, layer
//!   thickness `delta`) as power laws of the period `epsilon` and classifies
//!   the scaling regime,
//! * [`beam`] splits a displacement field of a single rod into a mean line,
//!   a section rotation and a residual warping part,
//! * [`unfolding`] rescales fields of the periodic layer onto fixed reference
//!   domains so that quantities for different `epsilon` can be compared,
//! * [`bending`] solves the clamped fourth-order rod problem that governs the
//!   layer in the limit and produces the interface spring constant,
//! * [`mesh`], [`fem`] solve the resolved plane-strain problem on a graded
//!   quadrilateral mesh,
//! * [`limit`] solves the two-block problem coupled by the interface spring,
//! * [`experiment`] runs the fine-versus-limit comparison over a ladder of
//!   `epsilon` values and writes the report files.

pub mod bending;
pub mod beam;
pub mod error;
pub mod experiment;
pub mod fem;
pub mod lattice;
pub mod limit;
pub mod mesh;
pub mod quadrature;
pub mod scaling;
pub mod sparse;
pub mod unfolding;
pub mod vtk;

pub use error::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
