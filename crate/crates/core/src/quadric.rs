//! Ambient algebraic data of a tangent space `T_z Q^m`: the standard metric,
//! the complex structure `J`, a conjugation `A` and the circle of conjugations
//! `cos(theta) A + sin(theta) JA`.

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::algebra::{expm, seeded_rng, sup_norm, sym_eigendecompose};
use crate::{Error, Operator, Result, Vector};

/// Tolerance used by [`QuadricModel::validate`] and the conjugation invariants.
pub const MODEL_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct QuadricModel {
    m: usize,
    seed: u64,
    j: Operator,
    a: Operator,
    unitary: Operator,
}

/// Complex structure in real coordinates: `J e_i = e_{m+i}`, `J e_{m+i} = -e_i`.
pub fn standard_complex_structure(m: usize) -> Operator {
    let mut j = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        j[(m + i, i)] = 1.0;
        j[(i, m + i)] = -1.0;
    }
    j
}

/// Conjugation fixing the first `m` coordinates.
pub fn reference_conjugation(m: usize) -> Operator {
    DMatrix::from_fn(2 * m, 2 * m, |r, c| match (r == c, r < m) {
        (true, true) => 1.0,
        (true, false) => -1.0,
        _ => 0.0,
    })
}

/// Random element of `U(m)` in its real `2m x 2m` representation, obtained by
/// exponentiating `[[H, -K], [K, H]]` with `H` skew and `K` symmetric. The
/// generator commutes with `J` exactly, so the exponential does too up to
/// rounding. Seed 0 is reserved for the identity.
fn random_unitary(m: usize, seed: u64) -> Operator {
    if seed == 0 {
        return DMatrix::identity(2 * m, 2 * m);
    }
    let mut rng = seeded_rng(seed);
    let mut h = DMatrix::<f64>::zeros(m, m);
    let mut k = DMatrix::<f64>::zeros(m, m);
    for r in 0..m {
        for c in r..m {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            if r != c {
                h[(r, c)] = a;
                h[(c, r)] = -a;
            }
            k[(r, c)] = b;
            k[(c, r)] = b;
        }
    }
    let mut generator = DMatrix::zeros(2 * m, 2 * m);
    generator.view_mut((0, 0), (m, m)).copy_from(&h);
    generator.view_mut((m, m), (m, m)).copy_from(&h);
    generator.view_mut((0, m), (m, m)).copy_from(&(-&k));
    generator.view_mut((m, 0), (m, m)).copy_from(&k);
    expm(&generator)
}

impl QuadricModel {
    /// Builds the model for complex dimension `m` with base conjugation
    /// `A = U A0 U^T` for a seeded unitary `U` (identity when `seed == 0`).
    pub fn build(m: usize, seed: u64) -> Result<Self> {
        if m < 3 {
            return Err(Error::DimensionTooSmall(m));
        }
        let j = standard_complex_structure(m);
        let unitary = random_unitary(m, seed);
        let a = &unitary * reference_conjugation(m) * unitary.transpose();
        Ok(Self {
            m,
            seed,
            j,
            a,
            unitary,
        })
    }

    /// Assembles a model from explicit operators without validation, for
    /// experiments that perturb the structure on purpose.
    pub fn from_parts(m: usize, j: Operator, a: Operator) -> Self {
        let dim = 2 * m;
        Self {
            m,
            seed: 0,
            j,
            a,
            unitary: DMatrix::identity(dim, dim),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        2 * self.m
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn j(&self) -> &Operator {
        &self.j
    }

    pub fn a(&self) -> &Operator {
        &self.a
    }

    pub fn unitary(&self) -> &Operator {
        &self.unitary
    }

    pub fn metric(&self, x: &Vector, y: &Vector) -> f64 {
        x.dot(y)
    }

    /// Orthonormal basis `U e_1, ..., U e_m` of the `+1` eigenspace `V(A)`.
    pub fn real_basis(&self) -> Vec<Vector> {
        (0..self.m)
            .map(|i| self.unitary.column(i).into_owned())
            .collect()
    }

    pub fn conjugation_at(&self, theta: f64) -> ConjugationOperator {
        let theta = theta.rem_euclid(std::f64::consts::TAU);
        let op = &self.a * theta.cos() + (&self.j * &self.a) * theta.sin();
        ConjugationOperator { theta, op }
    }

    pub fn invariant_report(&self) -> ModelInvariantReport {
        let dim = self.dim();
        let id = DMatrix::<f64>::identity(dim, dim);
        let j_squared = sup_norm(&(&self.j * &self.j + &id));
        let j_orthogonality = sup_norm(&(self.j.transpose() * &self.j - &id));
        let a_squared = sup_norm(&(&self.a * &self.a - &id));
        let a_orthogonality = sup_norm(&(self.a.transpose() * &self.a - &id));
        let anticommutation = sup_norm(&(&self.a * &self.j + &self.j * &self.a));
        let max_defect = [
            j_squared,
            j_orthogonality,
            a_squared,
            a_orthogonality,
            anticommutation,
        ]
        .into_iter()
        .fold(0.0, f64::max);
        ModelInvariantReport {
            m: self.m,
            seed: self.seed,
            j_squared_plus_identity: j_squared,
            j_orthogonality,
            a_squared_minus_identity: a_squared,
            a_orthogonality,
            aj_plus_ja: anticommutation,
            max_defect,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let report = self.invariant_report();
        if report.max_defect > MODEL_TOL {
            return Err(Error::InvalidArgument(format!(
                "quadric model invariants violated (max defect {:.3e})",
                report.max_defect
            )));
        }
        Ok(())
    }
}

/// A member of the conjugation circle through the model's base conjugation.
#[derive(Debug, Clone)]
pub struct ConjugationOperator {
    /// Gauge angle in `[0, 2 pi)`.
    pub theta: f64,
    pub op: Operator,
}

impl ConjugationOperator {
    /// `(||C^2 - I||, ||CJ + JC||, ||C^T C - I||)` in sup-norm.
    pub fn defects(&self, j: &Operator) -> (f64, f64, f64) {
        let dim = self.op.nrows();
        let id = DMatrix::<f64>::identity(dim, dim);
        (
            sup_norm(&(&self.op * &self.op - &id)),
            sup_norm(&(&self.op * j + j * &self.op)),
            sup_norm(&(self.op.transpose() * &self.op - &id)),
        )
    }

    /// Orthonormal bases of the `+1` and `-1` eigenspaces.
    pub fn eigenspaces(&self) -> Result<(Operator, Operator)> {
        let eig = sym_eigendecompose(&self.op)?;
        Ok((eig.eigenspace(1.0, 1e-6), eig.eigenspace(-1.0, 1e-6)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInvariantReport {
    pub m: usize,
    pub seed: u64,
    pub j_squared_plus_identity: f64,
    pub j_orthogonality: f64,
    pub a_squared_minus_identity: f64,
    pub a_orthogonality: f64,
    pub aj_plus_ja: f64,
    pub max_defect: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{seeded_rng, standard_normal_vector};
    use std::f64::consts::{FRAC_PI_2, TAU};

    #[test]
    fn small_dimensions_are_rejected() {
        assert!(matches!(
            QuadricModel::build(2, 1),
            Err(Error::DimensionTooSmall(2))
        ));
        let msg = QuadricModel::build(1, 1).unwrap_err().to_string();
        assert!(msg.contains("m >= 3"), "{msg}");
    }

    #[test]
    fn seed_zero_gives_reference_conjugation() {
        let model = QuadricModel::build(3, 0).unwrap();
        assert_eq!(model.a(), &reference_conjugation(3));
        let (v, _) = model.conjugation_at(0.0).eigenspaces().unwrap();
        assert_eq!(v.ncols(), 3);
        // V(A) = span of the first three coordinates
        for c in 0..3 {
            for r in 3..6 {
                assert!(v[(r, c)].abs() < 1e-14);
            }
        }
    }

    #[test]
    fn anticommutation_holds_for_seeded_model() {
        let model = QuadricModel::build(4, 7).unwrap();
        let report = model.invariant_report();
        assert!(report.aj_plus_ja < 1e-12, "{report:?}");
        assert!(report.max_defect < 1e-12, "{report:?}");
    }

    #[test]
    fn eigenspaces_are_swapped_by_j() {
        let model = QuadricModel::build(5, 1).unwrap();
        let (v, w) = model.conjugation_at(0.0).eigenspaces().unwrap();
        assert_eq!((v.ncols(), w.ncols()), (5, 5));
        assert!(sup_norm(&(v.transpose() * &w)) < 1e-10);
        // J V(A) lies in the -1 eigenspace: its projection onto V(A) vanishes
        let jv = model.j() * &v;
        assert!(sup_norm(&(v.transpose() * jv)) < 1e-10);
    }

    #[test]
    fn family_endpoints() {
        let model = QuadricModel::build(3, 11).unwrap();
        assert!(sup_norm(&(model.conjugation_at(0.0).op - model.a())) < 1e-15);
        let quarter = model.conjugation_at(FRAC_PI_2).op;
        assert!(sup_norm(&(quarter - model.j() * model.a())) < 1e-15);
    }

    #[test]
    fn every_family_member_is_a_conjugation() {
        let model = QuadricModel::build(4, 3).unwrap();
        for k in 0..32 {
            let c = model.conjugation_at(TAU * k as f64 / 32.0 + 0.1);
            let (inv, anti, orth) = c.defects(model.j());
            assert!(
                inv < 1e-12 && anti < 1e-10 && orth < 1e-10,
                "{inv} {anti} {orth}"
            );
        }
    }

    #[test]
    fn conjugation_is_an_isometry() {
        let model = QuadricModel::build(4, 21).unwrap();
        let mut rng = seeded_rng(5);
        for _ in 0..100 {
            let x = standard_normal_vector(&mut rng, 8);
            let y = standard_normal_vector(&mut rng, 8);
            let ax = model.a() * &x;
            let ay = model.a() * &y;
            assert!((model.metric(&ax, &ay) - model.metric(&x, &y)).abs() < 1e-10);
        }
    }

    #[test]
    fn corrupted_conjugation_is_reported() {
        let model = QuadricModel::build(3, 2).unwrap();
        let mut a = model.a().clone();
        a[(0, 1)] += 1e-3;
        let bad = QuadricModel::from_parts(3, model.j().clone(), a);
        let report = bad.invariant_report();
        assert!(report.a_squared_minus_identity > 1e-4, "{report:?}");
        assert!(bad.validate().is_err());
    }

    #[test]
    fn real_basis_spans_the_fixed_space() {
        let model = QuadricModel::build(4, 8).unwrap();
        for z in model.real_basis() {
            assert!((model.a() * &z - &z).norm() < 1e-12);
        }
    }
}
