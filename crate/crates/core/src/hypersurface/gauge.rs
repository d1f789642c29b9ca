use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::gram_schmidt;
use crate::quadric::{ConjugationOperator, QuadricModel};
use crate::{Error, Operator, Result, Vector};

/// Threshold `eps_t` on the singular angle used by [`classify_normal`].
pub const SINGULAR_ANGLE_TOL: f64 = 1e-8;

/// Decomposition `N = cos(t) Z1 + sin(t) J Z2` with `Z1, Z2` orthonormal in
/// the `+1` eigenspace of the conjugation `A*` maximizing `g(A N, N)`.
#[derive(Debug, Clone)]
pub struct CanonicalGauge {
    pub theta_star: f64,
    /// Singular angle in `[0, pi/4]`.
    pub t: f64,
    /// `max_theta g(A_theta N, N) = sqrt(a^2 + b^2)`.
    pub cos_2t: f64,
    pub z1: Vector,
    pub z2: Vector,
    pub a_star: ConjugationOperator,
}

impl CanonicalGauge {
    pub fn a_star_op(&self) -> &Operator {
        &self.a_star.op
    }

    pub fn normal_type(&self) -> NormalType {
        classify_normal(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalKind {
    Principal,
    Isotropic,
    Generic,
}

impl fmt::Display for NormalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormalKind::Principal => "Principal",
            NormalKind::Isotropic => "Isotropic",
            NormalKind::Generic => "Generic",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalType {
    pub kind: NormalKind,
    pub t: f64,
}

impl fmt::Display for NormalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            NormalKind::Generic => write!(f, "Generic({:.6})", self.t),
            kind => write!(f, "{kind}"),
        }
    }
}

pub fn canonicalize_conjugation(model: &QuadricModel, normal: &Vector) -> Result<CanonicalGauge> {
    let norm = normal.norm();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::DegenerateNormal);
    }
    let n = normal / norm;
    let an = model.a() * &n;
    // g(A_theta N, N) = a cos(theta) + b sin(theta)
    let a = an.dot(&n);
    let b = (model.j() * &an).dot(&n);
    let theta_star = b.atan2(a);
    let a_star = model.conjugation_at(theta_star);
    let astar_n = &a_star.op * &n;
    let real_part = (&n + &astar_n) * 0.5;
    let imaginary_part = (&n - &astar_n) * 0.5;
    let t = imaginary_part.norm().atan2(real_part.norm());
    let z1 = &real_part / t.cos();
    let z2 = if t > SINGULAR_ANGLE_TOL {
        -(model.j() * &imaginary_part) / t.sin()
    } else {
        let candidates = (0..model.dim()).map(|i| {
            let mut e = Vector::zeros(model.dim());
            e[i] = 1.0;
            (&e + &a_star.op * &e) * 0.5
        });
        gram_schmidt(std::slice::from_ref(&z1), candidates, 1e-6)
            .into_iter()
            .next()
            .expect("V(A*) has dimension m >= 3")
    };
    Ok(CanonicalGauge {
        theta_star: a_star.theta,
        t,
        cos_2t: a.hypot(b),
        z1,
        z2,
        a_star,
    })
}

pub fn classify_normal(gauge: &CanonicalGauge) -> NormalType {
    let t = gauge.t;
    let kind = if t < SINGULAR_ANGLE_TOL {
        NormalKind::Principal
    } else if (t - std::f64::consts::FRAC_PI_4).abs() < SINGULAR_ANGLE_TOL {
        NormalKind::Isotropic
    } else {
        NormalKind::Generic
    };
    NormalType { kind, t }
}

/// The unit normal `cos(t) U e_1 + sin(t) J U e_2` with singular angle `t`
/// relative to the model's base conjugation.
pub fn normal_with_singular_angle(model: &QuadricModel, t: f64) -> Vector {
    let basis = model.real_basis();
    &basis[0] * t.cos() + (model.j() * &basis[1]) * t.sin()
}
