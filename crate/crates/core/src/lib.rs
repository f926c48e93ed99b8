//! Numerical laboratory for quasiconformal surgery on polynomial dynamics.
//!
//! The crate builds the pieces of a desk-scale surgery experiment on maps
//! with totally disconnected Julia sets: rational map evaluation and escape
//! censuses, Jordan-curve lifting under the dynamics, ring-domain moduli,
//! a radial blend map transplanted into a dynamical disk, the induced
//! invariant Beltrami field, an FFT-based solver for the Beltrami equation,
//! and an experiment harness that certifies the escape-count increase of
//! the straightened map.

pub mod curve;
pub mod error;
pub mod grid;
pub mod harness;
pub mod lift;
pub mod linkage;
pub mod moduli;
pub mod mrmt;
pub mod poly;
pub mod rational;
pub mod roots;
pub mod surgery;

pub use error::Error;
pub use num_complex::Complex64;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
