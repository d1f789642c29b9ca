use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{complete_orthonormal, gram_schmidt, standard_normal_vector};
use crate::quadric::QuadricModel;
use crate::{Error, Operator, Result, Vector};

pub const ALMOST_CONTACT_TOL: f64 = 1e-12;

/// Almost contact metric structure `(phi, eta, xi, g)` induced at a point by a
/// unit normal `N`.
///
/// All operators are stored as ambient `2m x 2m` matrices. `basis` is an
/// orthonormal frame of the tangent space `N^perp` with `basis[0] = xi`; the
/// remaining `2m - 2` vectors span the holomorphic distribution `ker eta`.
#[derive(Debug, Clone)]
pub struct Frame {
    m: usize,
    normal: Vector,
    xi: Vector,
    phi: Operator,
    j: Operator,
    projector: Operator,
    basis: Vec<Vector>,
    basis_matrix: Operator,
}

pub fn induce_frame(model: &QuadricModel, normal: &Vector) -> Result<Frame> {
    let dim = model.dim();
    if normal.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: normal.len(),
        });
    }
    let norm = normal.norm();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::DegenerateNormal);
    }
    let normal = normal / norm;
    let xi = -(model.j() * &normal);
    let projector = DMatrix::identity(dim, dim) - &normal * normal.transpose();
    let phi = &projector * model.j() * &projector;
    let mut basis = vec![xi.clone()];
    basis.extend(complete_orthonormal(&[normal.clone(), xi.clone()], dim));
    let basis_matrix = DMatrix::from_columns(&basis);
    Ok(Frame {
        m: model.m(),
        normal,
        xi,
        phi,
        j: model.j().clone(),
        projector,
        basis,
        basis_matrix,
    })
}

impl Frame {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        2 * self.m
    }

    pub fn tangent_dim(&self) -> usize {
        2 * self.m - 1
    }

    pub fn normal(&self) -> &Vector {
        &self.normal
    }

    pub fn xi(&self) -> &Vector {
        &self.xi
    }

    pub fn phi(&self) -> &Operator {
        &self.phi
    }

    /// The ambient complex structure `J`.
    pub fn j(&self) -> &Operator {
        &self.j
    }

    pub fn projector(&self) -> &Operator {
        &self.projector
    }

    pub fn eta(&self, x: &Vector) -> f64 {
        x.dot(&self.xi)
    }

    /// Orthonormal tangent frame, `xi` first.
    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    /// Orthonormal basis of `ker eta`.
    pub fn holomorphic_basis(&self) -> &[Vector] {
        &self.basis[1..]
    }

    /// The tangent frame as columns of a `2m x (2m - 1)` matrix.
    pub fn basis_matrix(&self) -> &Operator {
        &self.basis_matrix
    }

    pub fn project(&self, x: &Vector) -> Vector {
        &self.projector * x
    }

    /// Coordinates of `x` in the tangent frame.
    pub fn coordinates(&self, x: &Vector) -> Vector {
        self.basis_matrix.transpose() * x
    }

    /// Compression `E^T K E` of an ambient operator to tangent coordinates.
    pub fn compress(&self, op: &Operator) -> Operator {
        self.basis_matrix.transpose() * op * &self.basis_matrix
    }

    /// Inverse of [`Frame::compress`] for operators supported on the tangent space.
    pub fn expand(&self, reduced: &Operator) -> Operator {
        &self.basis_matrix * reduced * self.basis_matrix.transpose()
    }

    pub fn random_tangent(&self, rng: &mut ChaCha8Rng) -> Vector {
        self.project(&standard_normal_vector(rng, self.dim()))
    }

    pub fn random_unit_tangent(&self, rng: &mut ChaCha8Rng) -> Vector {
        let v = self.random_tangent(rng);
        let n = v.norm();
        v / n
    }

    /// A random orthonormal frame of the tangent space.
    pub fn random_tangent_basis(&self, rng: &mut ChaCha8Rng) -> Vec<Vector> {
        let candidates: Vec<Vector> = (0..self.tangent_dim() + 4)
            .map(|_| self.random_tangent(rng))
            .collect();
        let mut out = gram_schmidt(std::slice::from_ref(&self.normal), candidates, 1e-8);
        out.truncate(self.tangent_dim());
        out
    }
}
