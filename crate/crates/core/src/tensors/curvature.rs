use crate::hypersurface::Frame;
use crate::{Operator, Vector};

/// Curvature tensor of a hypersurface of the quadric given by the Gauss
/// equation. Vector factors `AX`, `JAX` are projected to the tangent space so
/// that the result is tangent.
#[derive(Debug, Clone)]
pub struct Curvature<'a> {
    frame: &'a Frame,
    shape: &'a Operator,
    a: Operator,
    ja: Operator,
}

pub fn curvature<'a>(frame: &'a Frame, shape: &'a Operator, a_star: &Operator) -> Curvature<'a> {
    Curvature {
        frame,
        shape,
        a: a_star.clone(),
        ja: frame.j() * a_star,
    }
}

impl Curvature<'_> {
    /// `R(X, Y) Z`; inputs are projected to the tangent space first.
    pub fn apply(&self, x: &Vector, y: &Vector, z: &Vector) -> Vector {
        let f = self.frame;
        let (x, y, z) = (f.project(x), f.project(y), f.project(z));
        let phi = f.phi();
        let (phx, phy) = (phi * &x, phi * &y);
        let (ax, ay) = (&self.a * &x, &self.a * &y);
        let (jax, jay) = (&self.ja * &x, &self.ja * &y);
        let (sx, sy) = (self.shape * &x, self.shape * &y);

        let mut out = &x * y.dot(&z) - &y * x.dot(&z);
        out += &phx * phy.dot(&z) - &phy * phx.dot(&z) - (phi * &z) * (2.0 * phx.dot(&y));
        out += f.project(&(&ax * ay.dot(&z) - &ay * ax.dot(&z)));
        out += f.project(&(&jax * jay.dot(&z) - &jay * jax.dot(&z)));
        out += &sx * sy.dot(&z) - &sy * sx.dot(&z);
        out
    }

    /// `g(R(X, Y) Z, W)`.
    pub fn quadrilinear(&self, x: &Vector, y: &Vector, z: &Vector, w: &Vector) -> f64 {
        self.apply(x, y, z).dot(w)
    }
}

/// Right-hand side of the Codazzi equation,
/// `g((nabla_X S) Y - (nabla_Y S) X, Z)`, for tangent `X, Y, Z`.
pub fn codazzi_rhs(frame: &Frame, a_star: &Operator, x: &Vector, y: &Vector, z: &Vector) -> f64 {
    let phi = frame.phi();
    let an = a_star * frame.normal();
    let axi = a_star * frame.xi();
    let ja = frame.j() * a_star;
    let (ex, ey, ez) = (frame.eta(x), frame.eta(y), frame.eta(z));
    ex * (phi * y).dot(z) - ey * (phi * x).dot(z) - 2.0 * ez * (phi * x).dot(y)
        + x.dot(&an) * (a_star * y).dot(z)
        - y.dot(&an) * (a_star * x).dot(z)
        + x.dot(&axi) * (&ja * y).dot(z)
        - y.dot(&axi) * (&ja * x).dot(z)
}
