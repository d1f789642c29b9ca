//! Numerical laboratory for the pointwise tensor algebra of real hypersurfaces
//! in the complex quadric `Q^m`.
//!
//! The crate is layered bottom-up:
//!
//! * [`algebra`]: dense linear algebra, a Levenberg–Marquardt minimizer and a
//!   deterministic multistart driver.
//! * [`quadric`]: the ambient tangent-space data `(g, J, A)` and the circle of
//!   conjugations through `A`.
//! * [`hypersurface`]: the almost contact structure induced by a unit normal,
//!   the canonical conjugation gauge, shape operators and first-jet data.
//! * [`tensors`]: curvature, Codazzi right-hand side, star-Ricci tensor and
//!   the residual functionals built from them.
//! * [`harness`]: constraint sets, seeded infeasibility searches and the three
//!   theorem chains (commuting, parallel, soliton).
//! * [`suite`]: named identity checks used by the command line.
//! * [`report`] and [`cli`]: JSON/CSV report envelopes and the `qhlab` binary.

pub mod algebra;
pub mod cli;
pub mod error;
pub mod harness;
pub mod hypersurface;
pub mod quadric;
pub mod report;
pub mod suite;
pub mod tensors;

pub use error::{Error, Result};

/// Ambient tangent vector of `T_z Q^m` in real coordinates (length `2m`).
pub type Vector = nalgebra::DVector<f64>;
/// Real `2m x 2m` linear map on the ambient tangent space.
pub type Operator = nalgebra::DMatrix<f64>;
