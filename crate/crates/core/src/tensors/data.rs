use nalgebra::DMatrix;

use crate::hypersurface::Frame;
use crate::{Operator, Vector};

/// Pointwise algebra shared by every closed-form tensor: `phi`, `xi` and the
/// tangential parts of `A* N`, `A* xi`, `A*` and `J A*`.
///
/// The same formulas are evaluated either on ambient `2m x 2m` matrices
/// ([`TangentData::ambient`]) or in tangent-frame coordinates
/// ([`TangentData::reduced`]); the latter is what the solvers use.
#[derive(Debug, Clone)]
pub struct TangentData {
    pub m: usize,
    pub phi: Operator,
    /// Identity of the tangent space (the projector in ambient form).
    pub metric: Operator,
    pub xi: Vector,
    /// Tangential part of `A* N`.
    pub an: Vector,
    /// Tangential part of `A* xi`.
    pub axi: Vector,
    /// `g(A* N, N)`.
    pub an_n: f64,
    /// `g(A* xi, xi)`.
    pub axi_xi: f64,
    pub a_block: Operator,
    pub ja_block: Operator,
}

impl TangentData {
    pub fn ambient(frame: &Frame, a_star: &Operator) -> Self {
        let p = frame.projector();
        let n = frame.normal();
        let xi = frame.xi();
        let a_n = a_star * n;
        let a_xi = a_star * xi;
        Self {
            m: frame.m(),
            phi: frame.phi().clone(),
            metric: p.clone(),
            xi: xi.clone(),
            an: p * &a_n,
            axi: p * &a_xi,
            an_n: a_n.dot(n),
            axi_xi: a_xi.dot(xi),
            a_block: p * a_star * p,
            ja_block: p * (frame.j() * a_star) * p,
        }
    }

    pub fn reduced(frame: &Frame, a_star: &Operator) -> Self {
        let n = frame.normal();
        let xi = frame.xi();
        let a_n = a_star * n;
        let a_xi = a_star * xi;
        let dim = frame.tangent_dim();
        Self {
            m: frame.m(),
            phi: frame.compress(frame.phi()),
            metric: DMatrix::identity(dim, dim),
            xi: frame.coordinates(xi),
            an: frame.coordinates(&a_n),
            axi: frame.coordinates(&a_xi),
            an_n: a_n.dot(n),
            axi_xi: a_xi.dot(xi),
            a_block: frame.compress(a_star),
            ja_block: frame.compress(&(frame.j() * a_star)),
        }
    }

    pub fn eta(&self, x: &Vector) -> f64 {
        self.xi.dot(x)
    }

    /// Matrix of the Hopf constraint form for a shape operator `s` with Hopf
    /// curvature `alpha`; it vanishes on every Hopf hypersurface.
    pub fn hopf_form(&self, s: &Operator, alpha: f64) -> Operator {
        self.hopf_terms(s, alpha).into_iter().map(|(_, t)| t).sum()
    }

    pub fn hopf_terms(&self, s: &Operator, alpha: f64) -> Vec<(&'static str, Operator)> {
        let phi = &self.phi;
        let phi_s = phi * s;
        let s_phi = s * phi;
        let an = &self.an;
        let axi = &self.axi;
        vec![
            ("2g(S phi S X, Y)", -(&s_phi * s) * 2.0),
            ("-alpha g((phi S + S phi) X, Y)", (&phi_s + &s_phi) * alpha),
            ("-2g(phi X, Y)", phi * 2.0),
            (
                "2g(X, AN)g(Y, A xi) - 2g(Y, AN)g(X, A xi)",
                (an * axi.transpose() - axi * an.transpose()) * 2.0,
            ),
            (
                "2g(xi, A xi)(g(Y, AN)eta(X) - g(X, AN)eta(Y))",
                (&self.xi * an.transpose() - an * self.xi.transpose()) * (2.0 * self.axi_xi),
            ),
        ]
    }

    /// Printed closed form of the star-Ricci tensor.
    pub fn star_ricci_closed(&self, s: &Operator) -> Operator {
        let phi_s = &self.phi * s;
        let phi2 = &self.phi * &self.phi;
        phi2 * (-2.0 * (self.m as f64 - 1.0))
            - &self.an * self.an.transpose() * 2.0
            - (&phi_s * &phi_s).transpose()
    }

    /// Closed form that agrees with the trace definition at every normal.
    pub fn star_ricci_corrected(&self, s: &Operator) -> Operator {
        let phi_s = &self.phi * s;
        let phi2 = &self.phi * &self.phi;
        phi2 * (-2.0 * (self.m as f64 - 1.0))
            + &self.an * self.an.transpose() * 2.0
            + &self.axi * self.axi.transpose() * 2.0
            + &self.axi * self.xi.transpose() * (2.0 * self.an_n)
            - (&phi_s * &phi_s).transpose()
    }

    /// `g(phi S X, Y) + g(X, phi S Y)`.
    pub fn lie_xi_metric(&self, s: &Operator) -> Operator {
        let phi_s = &self.phi * s;
        phi_s.transpose() + phi_s
    }

    /// `1/2 L_xi g + Ric* - lambda g` with the printed closed form.
    pub fn soliton_form(&self, s: &Operator, lambda: f64) -> Operator {
        self.lie_xi_metric(s) * 0.5 + self.star_ricci_closed(s) - &self.metric * lambda
    }

    /// `g(phi X, Y) - g(X, AN)g(Y, A xi) + g(Y, AN)g(X, A xi)`.
    pub fn twisted_phi_form(&self) -> Operator {
        -&self.phi - &self.an * self.axi.transpose() + &self.axi * self.an.transpose()
    }

    /// `(phi K - K phi, phi K + K phi)` for the operator `K` of a bilinear form.
    pub fn commutators(&self, form: &Operator) -> (Operator, Operator) {
        let k = form.transpose();
        let a = &self.phi * &k;
        let b = &k * &self.phi;
        (&a - &b, a + b)
    }
}
