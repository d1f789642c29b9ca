use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::frame::Frame;
use super::gauge::{CanonicalGauge, NormalKind};
use crate::algebra::{
    asymmetry, multistart, seeded_rng, standard_normal_vector, sup_norm, MinimizeOptions,
    MinimizeResult,
};
use crate::tensors::{hopf_residual, ResidualReport, TangentData};
use crate::{Error, Operator, Result};

/// Threshold on `||S xi - alpha xi||` for the Hopf flag.
pub const HOPF_TOL: f64 = 1e-8;
const SHAPE_SYMMETRY_TOL: f64 = 1e-10;

/// Symmetric operator on the tangent space, stored as an ambient matrix with
/// `S N = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeOperator {
    matrix: Operator,
    alpha: f64,
}

impl ShapeOperator {
    /// Accepts a symmetric ambient matrix and compresses it to the tangent space.
    pub fn from_matrix(frame: &Frame, matrix: &Operator) -> Result<Self> {
        let tolerance = SHAPE_SYMMETRY_TOL * sup_norm(matrix).max(1.0);
        let defect = asymmetry(matrix);
        if defect > tolerance {
            return Err(Error::NotSymmetric {
                asymmetry: defect,
                tolerance,
            });
        }
        let p = frame.projector();
        let sym = (matrix + matrix.transpose()) * 0.5;
        Ok(Self::from_tangent(frame, p * sym * p))
    }

    /// From a symmetric matrix in tangent-frame coordinates.
    pub fn from_reduced(frame: &Frame, reduced: &Operator) -> Self {
        let sym = (reduced + reduced.transpose()) * 0.5;
        Self::from_tangent(frame, frame.expand(&sym))
    }

    /// Hopf operator `alpha xi (x) eta + B` with `B` given on the holomorphic
    /// distribution in the coordinates of [`Frame::holomorphic_basis`].
    pub fn hopf(frame: &Frame, alpha: f64, holomorphic: &Operator) -> Self {
        Self::from_reduced(frame, &hopf_reduced(alpha, holomorphic))
    }

    pub fn zero(frame: &Frame) -> Self {
        Self::from_tangent(frame, DMatrix::zeros(frame.dim(), frame.dim()))
    }

    fn from_tangent(frame: &Frame, matrix: Operator) -> Self {
        let xi = frame.xi();
        let alpha = xi.dot(&(&matrix * xi));
        Self { matrix, alpha }
    }

    pub fn matrix(&self) -> &Operator {
        &self.matrix
    }

    /// `g(S xi, xi)`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn hopf_defect(&self, frame: &Frame) -> f64 {
        (&self.matrix * frame.xi() - frame.xi() * self.alpha).norm()
    }

    pub fn is_hopf(&self, frame: &Frame) -> bool {
        self.hopf_defect(frame) < HOPF_TOL
    }

    pub fn symmetry_defect(&self) -> f64 {
        asymmetry(&self.matrix)
    }

    /// `sup |(phi S)^2 - (S phi)^2|`.
    pub fn lemma_defect(&self, frame: &Frame) -> f64 {
        let phi_s = frame.phi() * &self.matrix;
        let s_phi = &self.matrix * frame.phi();
        sup_norm(&(&phi_s * &phi_s - &s_phi * &s_phi))
    }

    /// `sup |S phi - phi S|`.
    pub fn commutator_defect(&self, frame: &Frame) -> f64 {
        sup_norm(&(&self.matrix * frame.phi() - frame.phi() * &self.matrix))
    }
}

pub(crate) fn hopf_reduced(alpha: f64, holomorphic: &Operator) -> Operator {
    let k = holomorphic.nrows();
    let mut reduced = DMatrix::zeros(k + 1, k + 1);
    reduced[(0, 0)] = alpha;
    reduced.view_mut((1, 1), (k, k)).copy_from(holomorphic);
    reduced
}

pub fn symmetric_param_count(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Upper triangle, row by row.
pub fn pack_symmetric(m: &Operator) -> Vec<f64> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(symmetric_param_count(n));
    for r in 0..n {
        for c in r..n {
            out.push(m[(r, c)]);
        }
    }
    out
}

pub fn unpack_symmetric(n: usize, params: &[f64]) -> Operator {
    let mut m = DMatrix::zeros(n, n);
    let mut k = 0;
    for r in 0..n {
        for c in r..n {
            m[(r, c)] = params[k];
            m[(c, r)] = params[k];
            k += 1;
        }
    }
    m
}

fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> Operator {
    let v = standard_normal_vector(rng, symmetric_param_count(n));
    unpack_symmetric(n, v.as_slice())
}

/// Seeded random symmetric tangent operator; generically not Hopf.
pub fn shape_random(frame: &Frame, seed: u64) -> ShapeOperator {
    let reduced = random_symmetric(frame.tangent_dim(), &mut seeded_rng(seed));
    ShapeOperator::from_reduced(frame, &reduced)
}

/// Hopf operator with `S xi = alpha xi` and a seeded random symmetric block on
/// the holomorphic distribution.
pub fn shape_random_hopf(frame: &Frame, alpha: f64, seed: u64) -> ShapeOperator {
    let block = random_symmetric(frame.tangent_dim() - 1, &mut seeded_rng(seed));
    ShapeOperator::hopf(frame, alpha, &block)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeSolveOptions {
    pub restarts: usize,
    pub minimize: MinimizeOptions,
}

impl Default for ShapeSolveOptions {
    fn default() -> Self {
        Self {
            restarts: 16,
            minimize: MinimizeOptions {
                tol: 1e-13,
                max_iterations: 400,
                ..Default::default()
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct ShapeSolve {
    pub shape: ShapeOperator,
    /// Hopf-constraint residual of `shape`.
    pub residual: ResidualReport,
    /// Combined residual minimized by the solver (sup-norm of the stacked vector).
    pub combined_residual: f64,
    pub search: MinimizeResult,
    pub best_restart: usize,
    pub restarts: usize,
}

fn upper_entries(m: &Operator, include_diagonal: bool, out: &mut Vec<f64>) {
    let n = m.nrows();
    for r in 0..n {
        let start = if include_diagonal { r } else { r + 1 };
        for c in start..n {
            out.push(m[(r, c)]);
        }
    }
}

pub fn shape_solve_hopf(
    frame: &Frame,
    gauge: &CanonicalGauge,
    alpha: f64,
    seed: u64,
) -> Result<ShapeSolve> {
    shape_solve_hopf_with(frame, gauge, alpha, seed, &ShapeSolveOptions::default())
}

/// Multistart least squares for a Hopf `S` with prescribed `alpha` satisfying
/// the Hopf constraint. Non-convergence shows up in `search` and `residual`.
pub fn shape_solve_hopf_with(
    frame: &Frame,
    gauge: &CanonicalGauge,
    alpha: f64,
    seed: u64,
    opts: &ShapeSolveOptions,
) -> Result<ShapeSolve> {
    let data = TangentData::reduced(frame, gauge.a_star_op());
    let k = frame.tangent_dim() - 1;
    let residual = |p: &DVector<f64>| {
        let s = hopf_reduced(alpha, &unpack_symmetric(k, p.as_slice()));
        let mut out = Vec::new();
        // the form is antisymmetric for Hopf S
        upper_entries(&data.hopf_form(&s, alpha), false, &mut out);
        DVector::from_vec(out)
    };
    let sampler = |rng: &mut ChaCha8Rng| standard_normal_vector(rng, symmetric_param_count(k));
    let ms = multistart(residual, sampler, opts.restarts, seed, &opts.minimize);
    let block = unpack_symmetric(k, &ms.best.argmin);
    let shape = ShapeOperator::hopf(frame, alpha, &block);
    let combined = residual(&DVector::from_column_slice(&ms.best.argmin)).amax();
    Ok(ShapeSolve {
        residual: hopf_residual(frame, shape.matrix(), gauge.a_star_op(), alpha),
        shape,
        combined_residual: combined,
        search: ms.best,
        best_restart: ms.best_restart,
        restarts: opts.restarts,
    })
}

/// Hopf `S` with `S phi = phi S` satisfying the Hopf constraint and the
/// star-Ricci soliton equation with `lambda = 0`; `alpha` is free.
pub fn shape_isometric_reeb_soliton(
    frame: &Frame,
    gauge: &CanonicalGauge,
    seed: u64,
) -> Result<ShapeSolve> {
    shape_isometric_reeb_soliton_with(frame, gauge, seed, &ShapeSolveOptions::default())
}

pub fn shape_isometric_reeb_soliton_with(
    frame: &Frame,
    gauge: &CanonicalGauge,
    seed: u64,
    opts: &ShapeSolveOptions,
) -> Result<ShapeSolve> {
    let ty = gauge.normal_type();
    if ty.kind != NormalKind::Isotropic {
        return Err(Error::WrongNormalType {
            required: "Isotropic",
            found: ty.to_string(),
        });
    }
    let data = TangentData::reduced(frame, gauge.a_star_op());
    let k = frame.tangent_dim() - 1;
    let split = |p: &DVector<f64>| {
        let alpha = p[0];
        (
            alpha,
            hopf_reduced(alpha, &unpack_symmetric(k, &p.as_slice()[1..])),
        )
    };
    let residual = |p: &DVector<f64>| {
        let (alpha, s) = split(p);
        let mut out = Vec::new();
        upper_entries(&(&s * &data.phi - &data.phi * &s), true, &mut out);
        upper_entries(&data.hopf_form(&s, alpha), false, &mut out);
        out.extend(data.soliton_form(&s, 0.0).iter());
        DVector::from_vec(out)
    };
    let sampler = |rng: &mut ChaCha8Rng| {
        let mut v = standard_normal_vector(rng, symmetric_param_count(k) + 1);
        let alpha: f64 = StandardNormal.sample(rng);
        v[0] = 2.0 * alpha;
        v
    };
    let ms = multistart(residual, sampler, opts.restarts, seed, &opts.minimize);
    let p = DVector::from_column_slice(&ms.best.argmin);
    let (alpha, s) = split(&p);
    let shape = ShapeOperator::from_reduced(frame, &s);
    Ok(ShapeSolve {
        residual: hopf_residual(frame, shape.matrix(), gauge.a_star_op(), alpha),
        combined_residual: residual(&p).amax(),
        shape,
        search: ms.best,
        best_restart: ms.best_restart,
        restarts: opts.restarts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypersurface::{canonicalize_conjugation, induce_frame, normal_with_singular_angle};
    use crate::quadric::QuadricModel;
    use std::f64::consts::FRAC_PI_4;

    fn at(m: usize, t: f64, seed: u64) -> (Frame, CanonicalGauge) {
        let model = QuadricModel::build(m, seed).unwrap();
        let n = normal_with_singular_angle(&model, t);
        (
            induce_frame(&model, &n).unwrap(),
            canonicalize_conjugation(&model, &n).unwrap(),
        )
    }

    #[test]
    fn random_hopf_shape_properties() {
        let (f, _) = at(4, 0.3, 2);
        let s = shape_random_hopf(&f, 0.0, 5);
        assert!((s.matrix() * f.xi()).norm() < 1e-12);
        let s = shape_random_hopf(&f, 1.7, 6);
        assert!(s.symmetry_defect() < 1e-12);
        assert!((s.alpha() - 1.7).abs() < 1e-12);
        assert!(s.is_hopf(&f));
        assert!((s.matrix() * f.normal()).norm() < 1e-12);
    }

    #[test]
    fn random_shape_is_not_hopf() {
        let (f, _) = at(3, 0.3, 2);
        let s = shape_random(&f, 1);
        assert!(!s.is_hopf(&f));
        assert!(s.symmetry_defect() < 1e-12);
    }

    #[test]
    fn asymmetric_matrix_is_rejected() {
        let (f, _) = at(3, 0.0, 1);
        let mut m = DMatrix::identity(6, 6);
        m[(0, 1)] = 1.0;
        assert!(matches!(
            ShapeOperator::from_matrix(&f, &m),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn pack_round_trip() {
        let m = random_symmetric(5, &mut seeded_rng(3));
        assert_eq!(unpack_symmetric(5, &pack_symmetric(&m)), m);
    }

    #[test]
    fn holomorphic_projector_solves_the_principal_constraint() {
        let (f, g) = at(3, 0.0, 4);
        let block = DMatrix::identity(4, 4);
        let s = ShapeOperator::hopf(&f, 0.0, &block);
        let r = hopf_residual(&f, s.matrix(), g.a_star_op(), 0.0);
        assert!(r.value < 1e-10, "{r:?}");
    }

    #[test]
    fn solver_reaches_isotropic_solution() {
        let (f, g) = at(3, FRAC_PI_4, 7);
        let sol = shape_solve_hopf(&f, &g, 0.0, 1).unwrap();
        assert!(sol.residual.value < 1e-8, "{:?}", sol.residual);
        assert!(sol.shape.is_hopf(&f));
        assert!(sol.shape.lemma_defect(&f) < 1e-6);
    }

    #[test]
    fn random_shape_violates_the_constraint() {
        let (f, g) = at(4, 0.3, 8);
        let s = shape_random(&f, 2);
        assert!(hopf_residual(&f, s.matrix(), g.a_star_op(), s.alpha()).value > 1e-2);
    }

    #[test]
    fn soliton_construction_rejects_principal_gauge() {
        let (f, g) = at(4, 0.0, 1);
        assert!(matches!(
            shape_isometric_reeb_soliton(&f, &g, 1),
            Err(Error::WrongNormalType { .. })
        ));
    }
}
