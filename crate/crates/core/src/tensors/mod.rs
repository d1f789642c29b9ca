//! Tensors and residual functionals evaluated at a point of a hypersurface.
//!
//! Bilinear forms are matrices `M` with `B(X, Y) = X^T M Y`; an operator `K`
//! corresponds to the form `g(K X, Y)`, i.e. `M = K^T`.

mod curvature;
mod data;
mod forms;
mod residuals;
mod star_ricci;

pub use curvature::{codazzi_rhs, curvature, Curvature};
pub use data::TangentData;
pub use forms::{bilinear_sup, BilinearForm, RANDOM_PAIRS};
pub use residuals::{
    commutator_residuals, hopf_jet_residual, hopf_residual, nabla_xi_shape_check,
    parallel_star_ricci_grid, parallel_star_ricci_residual, parallel_star_ricci_terms,
    soliton_form, soliton_residual, twisted_phi_form, CommutatorResiduals, NablaXiCheck,
    ResidualReport, TermValue,
};
pub use star_ricci::{
    lie_xi_metric, star_ricci_closed, star_ricci_corrected, star_ricci_trace, star_ricci_trace_over,
};
