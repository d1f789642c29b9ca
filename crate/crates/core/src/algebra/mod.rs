//! Dense real linear algebra and a small nonlinear least-squares toolkit.

mod linalg;
mod optimize;
mod rng;

pub use linalg::{
    antisymmetric_part, asymmetry, complete_orthonormal, expm, gram_schmidt, solve_least_squares,
    sup_norm, sym_eigendecompose, symmetric_part, LeastSquares, LeastSquaresSolver, SymEigen,
    DEFAULT_SOLVE_TOL, SYMMETRY_TOL,
};
pub use optimize::{
    minimize_residual, multistart, Histogram, MinimizeOptions, MinimizeResult, MultistartResult,
    Termination, DEFAULT_OPTIMIZE_TOL,
};
pub use rng::{restart_rng, seeded_rng, standard_normal_vector};
