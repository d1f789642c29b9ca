//! Feasibility searches over pointwise hypersurface data and the three
//! theorem chains built on them.

mod chains;
mod constraints;
mod search;

pub use chains::{
    anchors, run_commuting_chain, run_parallel_chain, run_soliton_chain,
    soliton_contradiction_scale, ChainConfig, ChainReport, ChainStep, ContradictionScale,
    SeedRecord, Verdict, COMMUTING, DEGENERATE_TOL, FORCING_TOL, LAMBDA_INSTANCES,
    NEAR_FEASIBLE_FACTOR, PARALLEL, SOLITON,
};
pub use constraints::{
    AlphaDomain, Constraint, ConstraintSet, GaugeDomain, SearchPoint, SearchSpace, ShapeDomain,
    WeightedConstraint,
};
pub use search::{
    infeasibility_search, search_with_point, ConstraintValue, PointSnapshot, SearchConfig,
    SearchReport,
};
