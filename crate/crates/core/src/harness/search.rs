use std::f64::consts::FRAC_PI_4;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::constraints::{ConstraintSet, SearchPoint, SearchSpace};
use crate::algebra::{multistart, sup_norm, Histogram, MinimizeOptions, Termination};
use crate::hypersurface::{NormalKind, SINGULAR_ANGLE_TOL};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub restarts: usize,
    pub seed: u64,
    /// Feasibility threshold on the total residual.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            restarts: 100,
            seed: 42,
            tol: 1e-8,
            max_iterations: 100,
        }
    }
}

impl SearchConfig {
    fn minimize_options(&self) -> MinimizeOptions {
        MinimizeOptions {
            tol: self.tol * 1e-3,
            max_iterations: self.max_iterations,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintValue {
    pub name: String,
    pub weight: f64,
    /// Euclidean norm of the constraint's residual entries.
    pub norm: f64,
    /// Largest residual entry in absolute value.
    pub sup: f64,
}

/// Geometric summary of a search point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSnapshot {
    pub t: f64,
    pub normal_kind: NormalKind,
    pub alpha: f64,
    /// `sup |S|` in tangent-frame coordinates.
    pub shape_sup: f64,
    pub phi_s_sup: f64,
    /// `sup |S phi - phi S|`.
    pub commutator_sup: f64,
    /// `sup |(phi S)^2 - (S phi)^2|`.
    pub lemma_defect: f64,
    /// `|S A xi|` and `|S AN|` (tangential parts).
    pub s_a_xi: f64,
    pub s_a_n: f64,
}

impl PointSnapshot {
    pub fn of(point: &SearchPoint) -> Self {
        let s = &point.shape_reduced;
        let d = &point.data;
        let phi_s = &d.phi * s;
        let s_phi = s * &d.phi;
        let t = point.t;
        let normal_kind = if t < SINGULAR_ANGLE_TOL {
            NormalKind::Principal
        } else if (t - FRAC_PI_4).abs() < SINGULAR_ANGLE_TOL {
            NormalKind::Isotropic
        } else {
            NormalKind::Generic
        };
        Self {
            t,
            normal_kind,
            alpha: point.alpha,
            shape_sup: sup_norm(s),
            phi_s_sup: sup_norm(&phi_s),
            commutator_sup: sup_norm(&(&s_phi - &phi_s)),
            lemma_defect: sup_norm(&(&phi_s * &phi_s - &s_phi * &s_phi)),
            s_a_xi: (s * &d.axi).norm(),
            s_a_n: (s * &d.an).norm(),
        }
    }
}

/// Outcome of a multistart feasibility search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub constraint_set: String,
    pub constraints: Vec<String>,
    pub space: SearchSpace,
    pub restarts: usize,
    pub seed: u64,
    pub tol: f64,
    /// `sqrt(sum_i w_i ||r_i||^2)` at the best restart.
    pub best_residual: f64,
    pub best_restart: usize,
    pub median_residual: f64,
    /// Restarts whose final residual is below `tol`.
    pub feasible_restarts: usize,
    pub histogram: Histogram,
    pub termination: Termination,
    pub iterations: usize,
    pub argmin: Vec<f64>,
    pub snapshot: PointSnapshot,
    pub breakdown: Vec<ConstraintValue>,
}

impl SearchReport {
    pub fn feasible(&self) -> bool {
        self.best_residual < self.tol
    }
}

pub fn infeasibility_search(
    constraints: &ConstraintSet,
    space: &SearchSpace,
    cfg: &SearchConfig,
) -> Result<SearchReport> {
    search_with_point(constraints, space, cfg).map(|(report, _)| report)
}

/// As [`infeasibility_search`], also returning the decoded best point.
pub fn search_with_point(
    constraints: &ConstraintSet,
    space: &SearchSpace,
    cfg: &SearchConfig,
) -> Result<(SearchReport, SearchPoint)> {
    if constraints.is_empty() {
        return Err(Error::InvalidArgument("empty constraint set".into()));
    }
    if constraints.needs_jet() && !space.jet {
        return Err(Error::InvalidArgument(format!(
            "constraint set '{}' needs jet parameters",
            constraints.name
        )));
    }
    if cfg.restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be at least 1".into()));
    }
    let model = space.build_model()?;
    let residual = |p: &DVector<f64>| match space.decode(&model, p.as_slice()) {
        Ok(point) => constraints.stacked_residual(&point),
        Err(_) => DVector::from_element(1, f64::NAN),
    };
    let ms = multistart(
        residual,
        |rng| space.sample(rng),
        cfg.restarts,
        cfg.seed,
        &cfg.minimize_options(),
    );
    let point = space.decode(&model, &ms.best.argmin)?;
    let breakdown = constraints
        .items
        .iter()
        .map(|w| {
            let mut r = Vec::new();
            w.constraint.residual(&point, &mut r);
            let v = DVector::from_vec(r);
            ConstraintValue {
                name: w.constraint.name(),
                weight: w.weight,
                norm: v.norm(),
                sup: v.amax(),
            }
        })
        .collect();
    let report = SearchReport {
        constraint_set: constraints.name.clone(),
        constraints: constraints
            .items
            .iter()
            .map(|w| w.constraint.name())
            .collect(),
        space: space.clone(),
        restarts: cfg.restarts,
        seed: cfg.seed,
        tol: cfg.tol,
        best_residual: ms.best.residual_norm,
        best_restart: ms.best_restart,
        median_residual: ms.median_residual(),
        feasible_restarts: ms.runs.iter().filter(|r| r.residual_norm < cfg.tol).count(),
        histogram: ms.histogram.clone(),
        termination: ms.best.termination,
        iterations: ms.best.iterations,
        argmin: ms.best.argmin.clone(),
        snapshot: PointSnapshot::of(&point),
        breakdown,
    };
    Ok((report, point))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{Constraint, GaugeDomain, ShapeDomain};
    use nalgebra::DMatrix;

    fn cfg(restarts: usize) -> SearchConfig {
        SearchConfig {
            restarts,
            seed: 3,
            ..Default::default()
        }
    }

    fn projector_target(m: usize) -> DMatrix<f64> {
        let n = 2 * m - 1;
        let mut p = DMatrix::identity(n, n);
        p[(0, 0)] = 0.0;
        p
    }

    #[test]
    fn satisfiable_target_is_reached() {
        let space = SearchSpace::hopf(3, 1)
            .with_gauge(GaugeDomain::Fixed(0.2))
            .with_shape(ShapeDomain::General);
        let set = ConstraintSet::new(
            "target",
            [Constraint::shape_target("p", &projector_target(3))],
        );
        let r = infeasibility_search(&set, &space, &cfg(2)).unwrap();
        assert!(r.best_residual < 1e-12, "{r:?}");
        assert!(r.feasible());
    }

    #[test]
    fn incompatible_targets_have_an_analytic_floor() {
        let space = SearchSpace::hopf(3, 1)
            .with_gauge(GaugeDomain::Fixed(0.2))
            .with_shape(ShapeDomain::General);
        let zero = DMatrix::zeros(5, 5);
        let set = ConstraintSet::new(
            "incompatible",
            [
                Constraint::shape_target("zero", &zero),
                Constraint::shape_target("projector", &projector_target(3)),
            ],
        );
        let r = infeasibility_search(&set, &space, &cfg(4)).unwrap();
        // ||P_C|| over the packed upper triangle is 2, so the floor is 2 / sqrt 2
        assert!(
            (r.best_residual - 2.0_f64.sqrt()).abs() < 1e-9,
            "{}",
            r.best_residual
        );
        assert!(r.best_residual > 0.1);
        assert_eq!(r.breakdown.len(), 2);
    }

    #[test]
    fn search_is_reproducible() {
        let space = SearchSpace::hopf(3, 2);
        let set = ConstraintSet::new("hopf", [Constraint::Hopf]);
        let a = infeasibility_search(&set, &space, &cfg(3)).unwrap();
        let b = infeasibility_search(&set, &space, &cfg(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_set_and_missing_jet_are_rejected() {
        let space = SearchSpace::hopf(3, 2);
        let empty = ConstraintSet::new("empty", []);
        assert!(infeasibility_search(&empty, &space, &cfg(1)).is_err());
        let jet = ConstraintSet::new("jet", [Constraint::HopfJet]);
        assert!(infeasibility_search(&jet, &space, &cfg(1)).is_err());
    }

    #[test]
    fn removing_a_constraint_never_raises_the_objective() {
        let space = SearchSpace::hopf(3, 5);
        let full = ConstraintSet::new("c", [Constraint::Hopf, Constraint::IsometricReeb]);
        let a = infeasibility_search(&full, &space, &cfg(4)).unwrap();
        let ablated = full.without("isometric_reeb");
        let b = ablated.residual_at(&space, &a.argmin).unwrap();
        assert!(b <= a.best_residual + 1e-12);
    }
}
