//! Data induced on a real hypersurface at a point: the almost contact frame,
//! the canonical conjugation gauge, shape operators and first-jet data.

mod frame;
mod gauge;
mod jet;
mod shape;

pub use frame::{induce_frame, Frame, ALMOST_CONTACT_TOL};
pub use gauge::{
    canonicalize_conjugation, classify_normal, normal_with_singular_angle, CanonicalGauge,
    NormalKind, NormalType, SINGULAR_ANGLE_TOL,
};
pub use jet::{
    extend_jet, tune_reeb_derivative, CodazziSystem, JetData, Tensor3, CODAZZI_SOLVABILITY_TOL,
};
pub use shape::{
    pack_symmetric, shape_isometric_reeb_soliton, shape_isometric_reeb_soliton_with, shape_random,
    shape_random_hopf, shape_solve_hopf, shape_solve_hopf_with, symmetric_param_count,
    unpack_symmetric, ShapeOperator, ShapeSolve, ShapeSolveOptions, HOPF_TOL,
};
